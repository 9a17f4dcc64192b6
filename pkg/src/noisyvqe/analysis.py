"""Statistics on noisy optimization runs.

Winner's-curse bias of minimum tracking, noise floors, mean-vs-best
tracking errors, high-shot reevaluation of elites, finite-difference Hessian
diagnostics for step-size stability, and two-parameter landscape scans.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .estimator import EnergyEstimate, Estimator, rng_stream
from .exceptions import ConfigurationError, DiagnosticError
from .optimizers.base import OptimizerTrace

SIGNIFICANCE_SIGMAS = 4.0


def predicted_winner_bias(sigma_noise: float, K: int) -> float:
    """Expected downward bias of the minimum of ``K`` noisy draws, ``-sigma sqrt(2 ln K)``."""
    if K < 1:
        raise ConfigurationError("K must be >= 1")
    if sigma_noise < 0:
        raise ConfigurationError("sigma_noise must be >= 0")
    return -sigma_noise * math.sqrt(2.0 * math.log(K))


def empirical_min_bias(sigma: float, K: int, repetitions: int = 100, rng=None) -> float:
    """Mean over ``repetitions`` of ``min`` of ``K`` draws from ``N(0, sigma^2)``."""
    rng = rng if rng is not None else np.random.default_rng()
    return float(np.mean([rng.normal(0.0, sigma, size=K).min() for _ in range(repetitions)]))


def is_significant(decrease: float, sigma_noise: float, n_sigmas: float = SIGNIFICANCE_SIGMAS) -> bool:
    """An improvement counts only when it exceeds ``n_sigmas`` noise standard deviations."""
    return decrease > n_sigmas * sigma_noise


@dataclass(frozen=True)
class BiasReport:
    K: int
    sigma_noise: float
    predicted_bias: float
    observed_min_gap: float
    significance_threshold: float

    def to_dict(self) -> dict:
        return asdict(self)


def bias_report(trace: OptimizerTrace, exact_evaluator=None, K: int | None = None) -> BiasReport:
    """Compare the best noisy value of a run with the predicted winner's-curse bias.

    ``observed_min_gap`` is the best noisy value minus the exact energy at the
    same parameters, taken from the trace or from ``exact_evaluator(theta)``.
    No correction for correlated samples is applied to ``K``.
    """
    if trace.n_fev == 0:
        raise ConfigurationError("empty trace")
    values = trace.values
    k_best = int(np.argmin(values))
    true = trace.true_values[k_best]
    if exact_evaluator is not None:
        true = exact_evaluator(trace.thetas[k_best])
    if true is None or not np.isfinite(true):
        raise ConfigurationError("exact energy at the best point is unavailable")
    sigma = trace.sigma_noise() or 0.0
    K = K or trace.n_fev
    return BiasReport(
        K=K,
        sigma_noise=sigma,
        predicted_bias=predicted_winner_bias(sigma, K),
        observed_min_gap=float(values[k_best] - true),
        significance_threshold=SIGNIFICANCE_SIGMAS * sigma,
    )


@dataclass(frozen=True)
class TrackingErrors:
    mean_error: float | None
    best_error: float
    sigma_noise: float | None
    n_iterations: int

    def to_dict(self) -> dict:
        return asdict(self)


def tracking_errors(trace: OptimizerTrace, e0: float, exact_evaluator=None, window: float = 0.25,
                    reevaluate_mean: bool = False) -> TrackingErrors:
    """Average absolute errors of the iteration-mean and iteration-best series.

    Both series are compared with ``e0`` over the last ``window`` fraction of
    iterations (the converged phase).  With ``reevaluate_mean`` the mean error
    is instead ``|exact(mean parameter vector) - e0|``, which needs
    ``exact_evaluator``.  Single-evaluation iterations yield no mean error.
    """
    iters = trace.nonempty()
    if not iters:
        raise ConfigurationError("empty trace")
    if not 0 < window <= 1:
        raise ConfigurationError("window must be in (0, 1]")
    tail = iters[len(iters) - max(1, int(math.ceil(window * len(iters)))):]
    best_error = float(np.mean([abs(it.best - e0) for it in tail]))
    mean_error = None
    if all(len(it) >= 2 for it in tail):
        if reevaluate_mean:
            if exact_evaluator is None:
                raise ConfigurationError("reevaluate_mean needs exact_evaluator")
            errs = [abs(exact_evaluator(np.mean(it.thetas, axis=0)) - e0) for it in tail]
        else:
            errs = [abs(it.mean - e0) for it in tail]
        mean_error = float(np.mean(errs))
    return TrackingErrors(mean_error, best_error, trace.sigma_noise(), len(tail))


def high_shot_reevaluate(candidates, ansatz, hamiltonian, n_shots_high: int | None = 1_000_000,
                         mode: str = "gaussian", seed: int = 0, **estimator_opts) -> list[tuple[np.ndarray, float]]:
    """Re-measure candidate parameter vectors at a much higher shot count.

    ``mode="exact"`` (or ``n_shots_high=None``) returns exact energies.
    Candidate ``i`` uses the stream ``rng_stream(seed, i)``.
    """
    if n_shots_high is None:
        mode = "exact"
    est = Estimator(ansatz, hamiltonian, mode, n_shots_high, **estimator_opts)
    out = []
    for i, theta in enumerate(candidates):
        theta = np.asarray(theta, dtype=float)
        out.append((theta, est.estimate(theta, rng_stream(seed, i)).value))
    return out


def elite_candidates(trace: OptimizerTrace, k: int = 10) -> list[np.ndarray]:
    """The ``k`` parameter vectors with the lowest noisy values in a trace."""
    values = trace.values
    order = np.argsort(values, kind="stable")[:k]
    thetas = trace.thetas
    return [thetas[i] for i in order]


@dataclass(frozen=True)
class HessianDiagnostics:
    hessian: np.ndarray
    lambda_max: float
    lambda_min: float
    condition_number: float | None
    eta_max: float | None
    gradient_noise_rms: float
    signal: float
    noise_dominated: bool
    estimated: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hessian"] = self.hessian.tolist()
        return d


def _scalar(func, theta, rng):
    out = func.estimate(theta, rng) if isinstance(func, Estimator) else func(theta, rng)
    if isinstance(out, EnergyEstimate):
        return out.value, out.variance_single_shot
    return float(out), 0.0


def finite_difference_hessian(func, theta, step: float = 1e-3, repeats: int = 1, seed: int = 0):
    """Central-difference Hessian of ``func(theta, rng)``, averaged over ``repeats``.

    Returns the symmetrized Hessian and the mean single-shot variance seen
    at ``theta`` (zero for plain float objectives).
    """
    theta = np.asarray(theta, dtype=float)
    d = theta.shape[0]
    counter = iter(range(10**9))

    def f(x):
        return _scalar(func, x, rng_stream(seed, next(counter)))

    hess = np.zeros((d, d))
    center_var = []
    for _ in range(repeats):
        f0, v0 = f(theta)
        center_var.append(v0)
        for i in range(d):
            ei = np.zeros(d)
            ei[i] = step
            hess[i, i] += (f(theta + ei)[0] - 2 * f0 + f(theta - ei)[0]) / step**2
            for j in range(i + 1, d):
                ej = np.zeros(d)
                ej[j] = step
                val = (f(theta + ei + ej)[0] - f(theta + ei - ej)[0]
                       - f(theta - ei + ej)[0] + f(theta - ei - ej)[0]) / (4 * step**2)
                hess[i, j] += val
                hess[j, i] += val
    hess /= repeats
    return (hess + hess.T) / 2, float(np.mean(center_var))


def hessian_diagnostics(func, theta, theta_star=None, step: float = 1e-3, repeats: int | None = None,
                        n_shots: int | None = None, shift_rule: bool | None = None, seed: int = 0) -> HessianDiagnostics:
    """Curvature and gradient-noise diagnostics at ``theta``.

    ``func`` is an :class:`Estimator` or any ``func(theta, rng)`` callable.
    Noisy estimators average the Hessian over 16 repeats by default.

    ``eta_max = 2 / lambda_max`` is the fixed-step gradient-descent stability
    bound and ``condition_number = lambda_max / lambda_min`` (reported when
    ``lambda_min > 1e-10``).  The gradient-noise RMS assumes two-point
    gradient estimates: ``sqrt(d * sigma^2 / 2)`` for the shift rule and
    ``sqrt(d * sigma^2 / (2 h^2))`` for central differences, where
    ``sigma^2`` is the estimator variance at ``theta``.  The run is flagged
    noise dominated when that RMS reaches ``||H (theta - theta_star)||``;
    ``theta_star`` defaults to ``theta`` and should be the best known point.
    For a noisy :class:`Estimator` the ``H`` in that norm is the noiseless
    Hessian, while the returned ``hessian`` is the averaged noisy one.
    """
    theta = np.asarray(theta, dtype=float)
    noisy = isinstance(func, Estimator) and func.mode != "exact"
    if isinstance(func, Estimator):
        n_shots = n_shots or func.n_shots
        if shift_rule is None:
            shift_rule = func.ansatz.shift_rule
    if repeats is None:
        repeats = 16 if noisy else 1
    hess, var = finite_difference_hessian(func, theta, step, repeats, seed)
    if not np.all(np.isfinite(hess)):
        raise DiagnosticError("Hessian has non-finite entries")
    evals = np.linalg.eigvalsh(hess)
    lmax, lmin = float(evals[-1]), float(evals[0])
    kappa = lmax / lmin if lmin > 1e-10 else None
    eta_max = 2.0 / lmax if lmax > 0 else None
    sigma2 = var / n_shots if (noisy and n_shots) else 0.0
    d = theta.shape[0]
    per_component = 0.5 if shift_rule else 1.0 / (2 * step**2)
    noise_rms = math.sqrt(d * sigma2 * per_component)
    ref = theta if theta_star is None else np.asarray(theta_star, dtype=float)
    # the averaged noisy Hessian still carries O(sigma / step^2) fluctuations,
    # so the curvature term uses the noiseless energy when it is available
    curvature = hess
    if noisy:
        curvature = finite_difference_hessian(lambda x, rng: func.exact_energy(x), theta, step)[0]
    signal = float(np.linalg.norm(curvature @ (theta - ref)))
    return HessianDiagnostics(
        hessian=hess,
        lambda_max=lmax,
        lambda_min=lmin,
        condition_number=kappa,
        eta_max=eta_max,
        gradient_noise_rms=noise_rms,
        signal=signal,
        noise_dominated=bool(noise_rms > 0 and noise_rms >= signal),
    )


@dataclass
class LandscapeScan:
    axis_i: int
    axis_j: int
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # values[a, b] at (x[a], y[b])

    def count_below(self, level: float) -> int:
        return int(np.sum(self.values < level))

    def to_text(self, fmt: str = "csv") -> str:
        """Matrix with the j-axis as a header row and the i-axis as the first column."""
        sep = "," if fmt == "csv" else " "
        lines = [f"# landscape axes: rows=theta[{self.axis_i}] cols=theta[{self.axis_j}]"]
        lines.append(sep.join(["nan"] + [repr(float(v)) for v in self.y]))
        for a, xv in enumerate(self.x):
            lines.append(sep.join([repr(float(xv))] + [repr(float(v)) for v in self.values[a]]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, axis_i: int = 0, axis_j: int = 1) -> LandscapeScan:
        rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        sep = "," if "," in rows[0] else None
        data = np.array([[float(v) for v in ln.split(sep)] for ln in rows])
        return cls(axis_i, axis_j, data[1:, 0], data[0, 1:], data[1:, 1:])


def landscape_scan(estimator, axis_i: int, axis_j: int, center, span: float = math.pi, grid_n: int = 41,
                   seed: int = 0, threads: int = 1) -> LandscapeScan:
    """Evaluate ``estimator`` on a ``grid_n x grid_n`` slice through ``center``.

    Axis values run over ``center[k] +/- span``; every other parameter stays
    at ``center``.  Cell ``(a, b)`` draws from ``rng_stream(seed, a, b)``, so
    the result does not depend on ``threads``.
    """
    if grid_n < 1 or grid_n > 512:
        raise ConfigurationError("grid_n must be in 1..512")
    center = np.asarray(center, dtype=float)
    if axis_i == axis_j or not (0 <= axis_i < center.shape[0] and 0 <= axis_j < center.shape[0]):
        raise ConfigurationError("axes must be distinct parameter indices")
    x = center[axis_i] + np.linspace(-span, span, grid_n)
    y = center[axis_j] + np.linspace(-span, span, grid_n)

    def row(a):
        out = np.empty(grid_n)
        for b in range(grid_n):
            theta = center.copy()
            theta[axis_i], theta[axis_j] = x[a], y[b]
            out[b] = _scalar(estimator, theta, rng_stream(seed, a, b))[0]
        return out

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(row, range(grid_n)))
    else:
        rows = [row(a) for a in range(grid_n)]
    return LandscapeScan(axis_i, axis_j, x, y, np.vstack(rows))
