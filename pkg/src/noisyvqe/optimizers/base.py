"""Objective bookkeeping, traces, and the optimizer base class."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array

from ..estimator import EnergyEstimate, Estimator, rng_stream
from ..exceptions import ConfigurationError

# population methods keep angles inside this box
ANGLE_BOUND = 2 * math.pi

# keyed stream id for optimizer-internal randomness
_OPTIMIZER_STREAM = 0x0F7


class StopOptimization(Exception):
    def __init__(self, status: str):
        super().__init__(status)
        self.status = status


@dataclass
class Iteration:
    thetas: list = field(default_factory=list)
    values: list = field(default_factory=list)
    variances: list = field(default_factory=list)
    true_values: list = field(default_factory=list)

    def __len__(self):
        return len(self.values)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def best(self) -> float:
        return float(np.min(self.values))

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.values))

    def to_dict(self) -> dict:
        return {
            "thetas": [list(map(float, t)) for t in self.thetas],
            "values": list(map(float, self.values)),
            "variances": list(map(float, self.variances)),
            "true_values": [None if v is None else float(v) for v in self.true_values],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Iteration:
        return cls(
            [np.asarray(t, dtype=float) for t in d["thetas"]],
            list(d["values"]),
            list(d["variances"]),
            list(d["true_values"]),
        )


@dataclass
class OptimizerTrace:
    """Every function evaluation of one run, grouped by optimizer iteration."""

    iterations: list[Iteration] = field(default_factory=list)
    header: dict = field(default_factory=dict)
    status: str = "running"
    wall_clock: float = 0.0
    first_target_fe: int | None = None
    n_shots: int | None = None

    @property
    def n_fev(self) -> int:
        return sum(len(it) for it in self.iterations)

    def nonempty(self) -> list[Iteration]:
        return [it for it in self.iterations if len(it)]

    @property
    def iteration_means(self) -> np.ndarray:
        return np.array([it.mean for it in self.nonempty()])

    @property
    def iteration_best(self) -> np.ndarray:
        return np.array([it.best for it in self.nonempty()])

    @property
    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.iteration_best) if self.nonempty() else np.array([])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for it in self.iterations for v in it.values])

    @property
    def true_values(self) -> np.ndarray:
        return np.array([np.nan if v is None else v for it in self.iterations for v in it.true_values], dtype=float)

    @property
    def variances(self) -> np.ndarray:
        return np.array([v for it in self.iterations for v in it.variances])

    @property
    def thetas(self) -> np.ndarray:
        return np.array([t for it in self.iterations for t in it.thetas])

    def sigma_noise(self) -> float | None:
        """Noise floor from the logged per-evaluation variances."""
        if not self.n_shots or self.n_fev == 0:
            return None
        return math.sqrt(float(np.mean(self.variances)) / self.n_shots)

    def to_dict(self) -> dict:
        return {
            "header": self.header,
            "status": self.status,
            "wall_clock": self.wall_clock,
            "first_target_fe": self.first_target_fe,
            "n_shots": self.n_shots,
            "iterations": [it.to_dict() for it in self.iterations],
        }

    @classmethod
    def from_dict(cls, d: dict) -> OptimizerTrace:
        return cls(
            [Iteration.from_dict(i) for i in d["iterations"]],
            d.get("header", {}),
            d.get("status", "unknown"),
            d.get("wall_clock", 0.0),
            d.get("first_target_fe"),
            d.get("n_shots"),
        )


class ObjectiveHandle:
    """Counts, logs, and guards calls to a (possibly noisy) objective.

    ``func(theta, rng)`` may return a float or an :class:`EnergyEstimate`;
    the latter also logs the single-shot variance and the exact energy.
    Evaluation ``k`` receives the generator ``rng_stream(seed, run, k)``.

    Parameters
    ----------
    func : callable
    dimension : int
    seed, run : int
        Keys of the per-evaluation random streams.
    budget : int, optional
        Hard cap on evaluations.
    target : float, optional
        Convergence threshold on the exact energy (noisy value when no exact
        energy is available); the first FE at or below it is recorded.
    stop_at_target : bool
        End the run once ``target`` is reached.
    divergence_threshold : float, optional
        Abort when ``|value|`` exceeds it.
    shift_rule : bool
        Whether parameter-shift gradients are exact for this objective.
    n_shots : int, optional
        Recorded for noise-floor analysis.
    """

    def __init__(
        self,
        func,
        dimension: int,
        seed: int = 0,
        run: int = 0,
        budget: int | None = None,
        target: float | None = None,
        stop_at_target: bool = False,
        divergence_threshold: float | None = None,
        shift_rule: bool = False,
        n_shots: int | None = None,
    ):
        self.func = func
        self.dimension = int(dimension)
        self.seed = seed
        self.run = run
        self.budget = budget
        self.target = target
        self.stop_at_target = stop_at_target
        self.divergence_threshold = divergence_threshold
        self.shift_rule = shift_rule
        self.n_fev = 0
        self.trace = OptimizerTrace(n_shots=n_shots)
        self.best_x = None
        self.best_value = math.inf
        # optimizers publish their current iterate (or distribution mean) here
        self.iterate = None

    @classmethod
    def from_estimator(cls, estimator: Estimator, **kwargs) -> ObjectiveHandle:
        kwargs.setdefault("shift_rule", estimator.ansatz.shift_rule)
        kwargs.setdefault("n_shots", estimator.n_shots if estimator.mode != "exact" else None)
        return cls(estimator.estimate, estimator.ansatz.n_params, **kwargs)

    def next_iteration(self):
        if not self.trace.iterations or len(self.trace.iterations[-1]):
            self.trace.iterations.append(Iteration())

    def __call__(self, theta) -> float:
        return self.evaluate(theta)

    def evaluate(self, theta) -> float:
        if self.budget is not None and self.n_fev >= self.budget:
            raise StopOptimization("budget")
        theta = np.array(theta, dtype=float)
        rng = rng_stream(self.seed, self.run, self.n_fev)
        out = self.func(theta, rng)
        if isinstance(out, EnergyEstimate):
            value, var, true = out.value, out.variance_single_shot, out.true_expectation
        else:
            value, var, true = float(out), 0.0, None
        self.n_fev += 1
        if not self.trace.iterations:
            self.trace.iterations.append(Iteration())
        it = self.trace.iterations[-1]
        it.thetas.append(theta)
        it.values.append(value)
        it.variances.append(var)
        it.true_values.append(true)
        if not math.isfinite(value) or (
            self.divergence_threshold is not None and abs(value) > self.divergence_threshold
        ):
            raise StopOptimization("diverged")
        if value < self.best_value:
            self.best_value, self.best_x = value, theta
        if self.target is not None and self.trace.first_target_fe is None:
            reference = value if true is None else true
            if reference <= self.target:
                self.trace.first_target_fe = self.n_fev
                if self.stop_at_target:
                    raise StopOptimization("converged")
        return value

    def evaluate_many(self, thetas) -> np.ndarray:
        return np.array([self.evaluate(t) for t in thetas])


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    trace: OptimizerTrace
    status: str
    nfev: int
    x_last: np.ndarray | None = None

    def __iter__(self):
        # allows ``best_x, best_value, trace = opt.minimize(...)``
        return iter((self.x, self.fun, self.trace))


class Optimizer(BaseEstimator):
    """Base class; subclasses implement ``_minimize(obj, x0, rng)``.

    ``_minimize`` runs until it returns (an internal stop) or the objective
    raises :class:`StopOptimization`.  It keeps ``obj.iterate`` current so the
    final iterate survives a budget stop.
    """

    name = "base"
    population_based = False

    def minimize(self, objective, x0) -> OptimizeResult:
        if not isinstance(objective, ObjectiveHandle):
            func = objective
            objective = ObjectiveHandle(lambda th, rng: func(th), len(np.ravel(x0)))
        x0 = check_array(np.asarray(x0, dtype=float).reshape(1, -1), ensure_all_finite=True)[0]
        if x0.shape[0] != objective.dimension:
            raise ConfigurationError(f"x0 has length {x0.shape[0]}, objective expects {objective.dimension}")
        if self.budget < 1:
            raise ConfigurationError("budget must be >= 1")
        if objective.budget is None or objective.budget > objective.n_fev + self.budget:
            objective.budget = objective.n_fev + self.budget
        trace = objective.trace
        trace.header.setdefault("optimizer", self.name)
        trace.header.setdefault("hyperparameters", self.get_params())
        rng = rng_stream(self.seed, objective.run, _OPTIMIZER_STREAM)
        start = time.perf_counter()
        objective.iterate = x0.copy()
        try:
            self._minimize(objective, x0.copy(), rng)
            status = "stopped"
        except StopOptimization as stop:
            status = stop.status
        x_last = objective.iterate
        trace.status = status
        trace.wall_clock = time.perf_counter() - start
        # drop a trailing empty iteration opened just before the stop
        if trace.iterations and not len(trace.iterations[-1]):
            trace.iterations.pop()
        best_x = objective.best_x if objective.best_x is not None else x0
        return OptimizeResult(best_x, objective.best_value, trace, status, objective.n_fev, x_last)

    def _minimize(self, obj: ObjectiveHandle, x0: np.ndarray, rng: np.random.Generator):
        raise NotImplementedError


def clip_angles(x):
    return np.clip(x, -ANGLE_BOUND, ANGLE_BOUND)


def central_gradient(obj: ObjectiveHandle, x: np.ndarray, step: float) -> np.ndarray:
    g = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (obj.evaluate(x + e) - obj.evaluate(x - e)) / (2 * step)
    return g


def shift_gradient(obj: ObjectiveHandle, x: np.ndarray) -> np.ndarray:
    g = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = math.pi / 2
        g[j] = 0.5 * (obj.evaluate(x + e) - obj.evaluate(x - e))
    return g


def init_population(x0, size, radius, rng, bound=ANGLE_BOUND):
    """``x0`` plus ``size - 1`` uniform points in the box ``x0 +/- radius``."""
    pop = x0 + rng.uniform(-radius, radius, size=(size, x0.shape[0]))
    pop[0] = x0
    return np.clip(pop, -bound, bound)
