"""Command-line interface: ``noisyvqe <subcommand> ...``.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ..analysis import bias_report, hessian_diagnostics, landscape_scan
from ..ansatz import build_ansatz
from ..estimator import Estimator, rng_stream
from ..exceptions import ConfigurationError, NoisyVQEError
from ..models import build_model
from ..pauli import exact_ground_energy, spectrum
from ..vqe import VQE
from .config import ExperimentConfig
from .runner import load_records, read_trace, run_experiment
from .summary import summarize, to_csv, to_text

logger = logging.getLogger("noisyvqe")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; usage errors are config errors here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_model_args(p):
    p.add_argument("--model", default="ising", help="ising, hubbard, a bundled molecule (h2) or a .json path")
    p.add_argument("--qubits", type=int, default=5)
    p.add_argument("--sites", type=int, default=2)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--u", type=float, default=1.0)
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")


def _add_ansatz_args(p):
    p.add_argument("--ansatz", choices=("auto", "twolocal", "tvha"), default="auto")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--p", type=float, default=1.0, help="tVHA cumulative-weight truncation")
    p.add_argument("--layers", type=int, default=2)


def _add_noise_args(p, default_mode=None):
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--mode", choices=("exact", "gaussian", "sampled"), default=default_mode,
                   help="defaults to sampled when --shots is given, else exact")
    p.add_argument("--allocation", choices=("per_group", "split"), default="per_group")


def _add_theta_args(p):
    p.add_argument("--theta", default=None, help="comma-separated parameters")
    p.add_argument("--center", default="zeros",
                   help="'zeros', 'optimum' (noiseless CMA-ES), or comma-separated parameters")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisyvqe", description="Noisy VQE optimizer benchmarking toolkit")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out-dir", default=".")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("energy", help="one energy estimate")
    _add_model_args(p)
    _add_ansatz_args(p)
    _add_noise_args(p)
    _add_theta_args(p)

    p = sub.add_parser("exactdiag", help="ground energy and state by exact diagonalization")
    _add_model_args(p)
    p.add_argument("--levels", type=int, default=1, help="number of lowest eigenvalues to print")
    p.add_argument("--state", action="store_true", help="also write the ground state to the output directory")

    p = sub.add_parser("optimize", help="run an experiment config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("scan", help="2-D landscape slice")
    _add_model_args(p)
    _add_ansatz_args(p)
    _add_noise_args(p)
    p.add_argument("--grid", type=int, default=41)
    p.add_argument("--axes", default="0,1")
    p.add_argument("--span", type=float, default=math.pi)
    p.add_argument("--center", default="optimum",
                   help="'optimum' (noiseless CMA-ES), 'zeros', or comma-separated parameters")

    p = sub.add_parser("bias", help="winner's-curse report for a trace file")
    p.add_argument("--trace", required=True)
    p.add_argument("--K", type=int, default=None)

    p = sub.add_parser("hessian", help="curvature and step-size diagnostics")
    _add_model_args(p)
    _add_ansatz_args(p)
    _add_noise_args(p)
    _add_theta_args(p)
    p.add_argument("--step", type=float, default=1e-3)

    p = sub.add_parser("summarize", help="aggregate run records")
    p.add_argument("records", nargs="+", help="records.jsonl files or directories holding one")
    return parser


def _hamiltonian(args):
    return build_model(args.model, qubits=args.qubits, sites=args.sites, t=args.t, u=args.u, boundary=args.boundary)


def _family(args, h) -> str:
    if args.ansatz != "auto":
        return args.ansatz
    return "twolocal" if h.metadata.get("name", "").startswith(("ising", "hubbard")) else "tvha"


def _estimator(args, h):
    ansatz = build_ansatz(_family(args, h), h, reps=args.reps, p=args.p, layers=args.layers)
    mode = args.mode or ("sampled" if args.shots else "exact")
    return Estimator(ansatz, h, mode, args.shots, args.allocation)


def _vector(text: str, n: int) -> np.ndarray:
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse parameter list {text!r}") from exc
    if v.shape != (n,):
        raise ConfigurationError(f"expected {n} parameters, got {v.size}")
    return v


def _point(args, est, point: str) -> np.ndarray:
    n = est.ansatz.n_params
    if point == "zeros":
        return np.zeros(n)
    if point == "optimum":
        vqe = VQE(ansatz=_family(args, est.hamiltonian), reps=args.reps, p=args.p, n_layers=args.layers,
                  optimizer="cma_es", budget=4000, seed=args.seed)
        return vqe.fit(est.hamiltonian).theta_
    return _vector(point, n)


def _clean(value: float) -> str:
    # strip eigensolver round-off so integral spectra print as e.g. -4.0
    value = float(value)
    return repr(float(round(value))) if abs(value - round(value)) < 1e-9 else repr(value)


def _emit(args, payload: dict, name: str | None = None):
    if args.format == "json":
        text = json.dumps(payload, indent=2, default=float)
    else:
        keys = [k for k, v in payload.items() if not isinstance(v, (list, dict))]
        text = ",".join(keys) + "\n" + ",".join(str(payload[k]) for k in keys)
    print(text)
    if name:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text + "\n")


def cmd_energy(args) -> int:
    h = _hamiltonian(args)
    est = _estimator(args, h)
    theta = _vector(args.theta, est.ansatz.n_params) if args.theta else _point(args, est, args.center)
    rng = rng_stream(args.seed, 0) if est.mode != "exact" else None
    e = est.estimate(theta, rng)
    _emit(args, {
        "value": e.value,
        "exact": e.true_expectation,
        "variance_single_shot": e.variance_single_shot,
        "sigma": e.sigma,
        "n_shots": e.n_shots,
        "mode": e.mode,
    })
    return EXIT_OK


def cmd_exactdiag(args) -> int:
    h = _hamiltonian(args)
    if args.levels > 1:
        for v in spectrum(h)[: args.levels]:
            print(_clean(v))
    else:
        print(_clean(exact_ground_energy(h)[0]))
    if args.state:
        _, psi = exact_ground_energy(h)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{h.metadata.get('name', 'model')}_ground_state.npy"
        np.save(path, psi)
        logger.info("ground state written to %s", path)
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed:
        cfg.seed = args.seed
    out = Path(args.out_dir)
    records = run_experiment(cfg, out, threads=args.threads)
    rows = summarize(records)
    text = to_csv(rows) if args.format == "csv" else json.dumps([r.__dict__ for r in rows], indent=2)
    print(text, end="" if text.endswith("\n") else "\n")
    (out / f"summary_{cfg.config_hash}.csv").write_text(to_csv(rows))
    return EXIT_OK


def cmd_scan(args) -> int:
    h = _hamiltonian(args)
    est = _estimator(args, h)
    axes = [int(a) for a in args.axes.split(",")]
    if len(axes) != 2:
        raise ConfigurationError("--axes takes two comma-separated indices")
    center = _point(args, est, args.center)
    scan = landscape_scan(est, axes[0], axes[1], center, args.span, args.grid, args.seed, args.threads)
    e0 = exact_ground_energy(h)[0]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    shots = args.shots if est.mode != "exact" else "exact"
    path = out / f"scan_{h.metadata.get('name', 'model')}_{shots}_{args.grid}.csv"
    path.write_text(scan.to_text("csv"))
    _emit(args, {"file": str(path), "grid": args.grid, "e0": e0, "min": float(scan.values.min()),
                 "cells_below_e0": scan.count_below(e0)})
    return EXIT_OK


def cmd_bias(args) -> int:
    trace = read_trace(args.trace)
    _emit(args, bias_report(trace, K=args.K).to_dict())
    return EXIT_OK


def cmd_hessian(args) -> int:
    h = _hamiltonian(args)
    est = _estimator(args, h)
    theta = _vector(args.theta, est.ansatz.n_params) if args.theta else _point(args, est, args.center)
    diag = hessian_diagnostics(est, theta, step=args.step, seed=args.seed)
    _emit(args, diag.to_dict())
    return EXIT_OK


def cmd_summarize(args) -> int:
    records = [r for path in args.records for r in load_records(path)]
    if not records:
        raise ConfigurationError("no records found")
    rows = summarize(records)
    if args.format == "json":
        print(json.dumps([r.__dict__ for r in rows], indent=2))
    else:
        print(to_text(rows), end="")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(to_csv(rows))
    return EXIT_OK


COMMANDS = {
    "energy": cmd_energy,
    "exactdiag": cmd_exactdiag,
    "optimize": cmd_optimize,
    "scan": cmd_scan,
    "bias": cmd_bias,
    "hessian": cmd_hessian,
    "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0; usage errors already mapped to 1
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoisyVQEError, ArithmeticError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
