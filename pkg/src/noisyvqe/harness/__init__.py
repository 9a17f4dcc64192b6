"""Experiment configs, batch runs, summaries and the command-line interface."""

from .config import ExperimentConfig
from .runner import RunRecord, execute_run, load_records, read_trace, run_experiment, write_trace
from .summary import SummaryRow, summarize, to_csv, to_text

__all__ = [
    "ExperimentConfig", "RunRecord", "execute_run", "load_records", "read_trace", "run_experiment",
    "write_trace", "SummaryRow", "summarize", "to_csv", "to_text",
]
