"""Per-configuration statistics over run records."""

from __future__ import annotations

import csv
import io
import math
from collections import OrderedDict
from dataclasses import asdict, dataclass

import numpy as np

from .runner import RunRecord


@dataclass
class SummaryRow:
    config_hash: str
    name: str
    n_runs: int
    n_converged: int
    n_budget: int
    n_diverged: int
    fe_mean: float
    fe_median: float
    fe_min: float
    fe_max: float
    error_raw_mean: float
    error_corrected_mean: float
    sigma_noise_mean: float


def _stat(values, fn) -> float:
    values = [v for v in values if v is not None and math.isfinite(v)]
    return float(fn(values)) if values else math.nan


def summarize(records: list[RunRecord]) -> list[SummaryRow]:
    """Group records by config hash and aggregate.

    FE statistics use converged runs only; diverged runs are excluded from
    every mean and show up in ``n_diverged``.
    """
    groups: OrderedDict[str, list[RunRecord]] = OrderedDict()
    for rec in records:
        groups.setdefault(rec.config_hash, []).append(rec)
    rows = []
    for key, recs in groups.items():
        ok = [r for r in recs if r.status != "diverged"]
        fes = [r.fes_to_tolerance for r in ok if r.status == "converged"]
        rows.append(SummaryRow(
            config_hash=key,
            name=recs[0].name,
            n_runs=len(recs),
            n_converged=sum(r.status == "converged" for r in recs),
            n_budget=sum(r.status == "budget" for r in recs),
            n_diverged=sum(r.status == "diverged" for r in recs),
            fe_mean=_stat(fes, np.mean),
            fe_median=_stat(fes, np.median),
            fe_min=_stat(fes, np.min),
            fe_max=_stat(fes, np.max),
            error_raw_mean=_stat([r.error_raw for r in ok], np.mean),
            error_corrected_mean=_stat([r.error_corrected for r in ok], np.mean),
            sigma_noise_mean=_stat([r.sigma_noise for r in ok], np.mean),
        ))
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def to_csv(rows: list[SummaryRow]) -> str:
    buf = io.StringIO()
    fields = list(SummaryRow.__dataclass_fields__)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(v) for k, v in asdict(row).items()})
    return buf.getvalue()


def to_text(rows: list[SummaryRow]) -> str:
    """Column-aligned table for terminals."""
    fields = list(SummaryRow.__dataclass_fields__)
    cells = [fields] + [[_fmt(v) for v in asdict(r).values()] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(fields))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(line, widths)) for line in cells) + "\n"
