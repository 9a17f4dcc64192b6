"""Batch execution of optimization runs with crash-safe persistence."""

from __future__ import annotations

import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..analysis import elite_candidates, high_shot_reevaluate
from ..estimator import rng_stream
from ..exceptions import CapabilityError, ConfigurationError
from ..optimizers import ObjectiveHandle, OptimizerTrace
from ..pauli import exact_ground_energy
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

# stream keys for initial points and reevaluation, disjoint from FE indices
_INIT_STREAM = 0x1A17
_REEVAL_STREAM = 0x2EE7
# divergence guard: |value| above this multiple of |E0| aborts a run
DIVERGENCE_FACTOR = 1e3
RECORDS_FILE = "records.jsonl"


@dataclass
class RunRecord:
    """Outcome of one optimization run.

    ``fes_to_tolerance`` is ``None`` when the tolerance was never reached.
    ``stop_reason`` keeps the optimizer's own status, so an internal early
    stop (``"stopped"``) stays distinguishable from a budget stop.
    """

    config_hash: str
    name: str
    run: int
    seed: int
    status: str
    stop_reason: str
    n_fev: int
    fes_to_tolerance: int | None
    e0: float
    final_raw: float
    final_corrected: float | None
    error_raw: float
    error_corrected: float | None
    sigma_noise: float | None
    sigma_corrected: float | None
    best_theta: list
    wall_clock: float
    trace_file: str | None = None
    trace: OptimizerTrace | None = field(default=None, repr=False)

    def to_dict(self, with_trace: bool = False) -> dict:
        d = asdict(self)
        d.pop("trace")
        if with_trace and self.trace is not None:
            d["trace"] = self.trace.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> RunRecord:
        d = dict(d)
        trace = d.pop("trace", None)
        rec = cls(**d)
        if trace is not None:
            rec.trace = OptimizerTrace.from_dict(trace)
        return rec


class RecordWriter:
    """Serialized, append-only writer for records and per-run traces."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        (self.out_dir / "traces").mkdir(parents=True, exist_ok=True)
        self.records_path = self.out_dir / RECORDS_FILE
        self._lock = threading.Lock()

    def trace_path(self, cfg_hash: str, run: int) -> Path:
        return self.out_dir / "traces" / f"{cfg_hash}_run{run:03d}.jsonl"

    def write(self, record: RunRecord, header: dict):
        path = self.trace_path(record.config_hash, record.run)
        record.trace_file = str(path.relative_to(self.out_dir))
        with self._lock:
            write_trace(path, record.trace, header)
            with open(self.records_path, "a") as fh:
                fh.write(record.to_json() + "\n")
                fh.flush()


def write_trace(path, trace: OptimizerTrace, header: dict | None = None):
    """One JSON-lines file: a header line, then one line per iteration."""
    path = Path(path)
    tmp = path.with_suffix(".tmp")
    head = {
        **(header or {}),
        **trace.header,
        "status": trace.status,
        "wall_clock": trace.wall_clock,
        "first_target_fe": trace.first_target_fe,
        "n_shots": trace.n_shots,
    }
    with open(tmp, "w") as fh:
        fh.write(json.dumps(head, sort_keys=True, default=_jsonable) + "\n")
        for i, it in enumerate(trace.iterations):
            fh.write(json.dumps({"iteration": i, **it.to_dict()}) + "\n")
    # rename is atomic, so a crash never leaves a half-written trace behind
    tmp.replace(path)


def read_trace(path) -> OptimizerTrace:
    from ..optimizers.base import Iteration

    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"empty trace file: {path}")
    head = json.loads(lines[0])
    iters = [Iteration.from_dict(json.loads(line)) for line in lines[1:] if line.strip()]
    return OptimizerTrace(
        iters,
        head,
        head.get("status", "unknown"),
        head.get("wall_clock", 0.0),
        head.get("first_target_fe"),
        head.get("n_shots"),
    )


def load_records(path) -> list[RunRecord]:
    """Read a records file, skipping a torn final line left by a crash."""
    path = Path(path)
    if path.is_dir():
        path = path / RECORDS_FILE
    out = []
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        try:
            out.append(RunRecord.from_dict(json.loads(line)))
        except json.JSONDecodeError:
            logger.warning("skipping unreadable record line in %s", path)
    return out


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return str(obj)


def reference_energy(h) -> float:
    """Exact E0 where diagonalization is feasible, else the stored reference."""
    try:
        return exact_ground_energy(h)[0]
    except CapabilityError:
        ref = h.metadata.get("e0_reference")
        if ref is None:
            raise
        return float(ref)


def initial_point(cfg: ExperimentConfig, n_params: int, run: int) -> np.ndarray:
    kind = cfg.init.kind
    if kind == "zeros":
        return np.zeros(n_params)
    if kind == "custom":
        x0 = np.asarray(cfg.init.values, dtype=float)
        if x0.shape != (n_params,):
            raise ConfigurationError(f"init.values has length {x0.size}, ansatz has {n_params} parameters")
        return x0
    return rng_stream(cfg.seed, run, _INIT_STREAM).random(n_params)


def execute_run(cfg: ExperimentConfig, run: int, built=None, e0: float | None = None) -> RunRecord:
    """Run ``run`` of an experiment without touching the filesystem."""
    h, ansatz, est = built or cfg.build()
    e0 = reference_energy(h) if e0 is None else e0
    seed = cfg.seed + run
    obj = ObjectiveHandle.from_estimator(
        est,
        seed=cfg.seed,
        run=run,
        budget=cfg.budget,
        target=e0 + cfg.tolerance,
        stop_at_target=cfg.stop_at_tolerance,
        divergence_threshold=DIVERGENCE_FACTOR * max(abs(e0), 1.0),
    )
    result = cfg.make_optimizer(seed=seed).minimize(obj, initial_point(cfg, ansatz.n_params, run))
    trace = result.trace

    if result.status == "diverged":
        status = "diverged"
    elif trace.first_target_fe is not None:
        status = "converged"
    else:
        status = "budget"

    final_raw = float(result.fun)
    final_corrected = sigma_corrected = None
    re = cfg.reevaluation
    if re.enabled and math.isfinite(final_raw) and status != "diverged":
        cands = elite_candidates(trace, re.elites)
        if result.x_last is not None:
            cands.append(np.asarray(result.x_last, dtype=float))
        shots = None if re.mode == "exact" else re.shots
        scored = high_shot_reevaluate(
            cands, ansatz, h, shots, re.mode, seed=seed + _REEVAL_STREAM,
            allocation=cfg.noise.allocation, variance_model=cfg.noise.variance_model,
        )
        best_theta, final_corrected = min(scored, key=lambda tv: tv[1])
        final_corrected = float(final_corrected)
        sigma_corrected = 0.0
        if shots:
            var = est.single_shot_variance(ansatz.prepare(best_theta))
            sigma_corrected = math.sqrt(var / shots)

    return RunRecord(
        config_hash=cfg.config_hash,
        name=cfg.name,
        run=run,
        seed=seed,
        status=status,
        stop_reason=result.status,
        n_fev=result.nfev,
        fes_to_tolerance=trace.first_target_fe,
        e0=e0,
        final_raw=final_raw,
        final_corrected=final_corrected,
        error_raw=final_raw - e0,
        error_corrected=None if final_corrected is None else final_corrected - e0,
        sigma_noise=trace.sigma_noise(),
        sigma_corrected=sigma_corrected,
        best_theta=[float(v) for v in result.x],
        wall_clock=trace.wall_clock,
        trace=trace,
    )


def run_experiment(cfg: ExperimentConfig, out_dir=None, threads: int = 1) -> list[RunRecord]:
    """Execute ``cfg.n_runs`` independent runs and persist each as it finishes.

    Parameters
    ----------
    cfg : ExperimentConfig
        Validated again here, so errors surface before any run starts.
    out_dir : path-like, optional
        Receives ``records.jsonl`` (appended) and ``traces/*.jsonl``.
    threads : int
        Size of the worker pool; runs are the unit of parallelism.

    Returns
    -------
    list of RunRecord
        Ordered by run index.
    """
    cfg.validate()
    built = cfg.build()
    e0 = reference_energy(built[0])
    writer = RecordWriter(out_dir) if out_dir is not None else None
    header = {"config": cfg.to_dict(), "config_hash": cfg.config_hash, "estimator": built[2].metadata}

    def job(run: int) -> RunRecord:
        rec = execute_run(cfg, run, built, e0)
        logger.info("run %d: %s after %d FEs", run, rec.status, rec.n_fev)
        if writer is not None:
            writer.write(rec, {**header, "run": run, "seed": rec.seed})
        return rec

    if threads <= 1:
        return [job(i) for i in range(cfg.n_runs)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(cfg.n_runs)))
