"""Minimizers sharing one interface: ``opt.minimize(objective, x0)``."""

from ..exceptions import ConfigurationError
from .base import ObjectiveHandle, OptimizeResult, Optimizer, OptimizerTrace, Iteration, StopOptimization
from .cmaes import CMAES
from .gradients import parameter_shift_gradient
from .local import BFGS, SPSA, GradientDescent, NelderMead
from .population import ILSHADE, PSO, CauchyAnnealing, DEBest1Bin

OPTIMIZERS = {
    cls.name: cls
    for cls in (GradientDescent, SPSA, NelderMead, BFGS, CMAES, PSO, DEBest1Bin, ILSHADE, CauchyAnnealing)
}


def make_optimizer(algorithm: str, **params) -> Optimizer:
    """Instantiate an optimizer by id, e.g. ``make_optimizer("cma_es", budget=2000)``."""
    try:
        cls = OPTIMIZERS[algorithm]
    except KeyError:
        raise ConfigurationError(f"unknown optimizer {algorithm!r}; choose from {sorted(OPTIMIZERS)}") from None
    opt = cls()
    unknown = set(params) - set(opt.get_params())
    if unknown:
        raise ConfigurationError(f"{algorithm} has no hyperparameter(s) {sorted(unknown)}")
    if cls.population_based and params.get("popsize") is not None and params["popsize"] < 4:
        raise ConfigurationError("population size must be >= 4")
    return opt.set_params(**params)


__all__ = [
    "OPTIMIZERS", "make_optimizer", "parameter_shift_gradient", "ObjectiveHandle", "OptimizeResult",
    "Optimizer", "OptimizerTrace", "Iteration", "StopOptimization", "CMAES", "BFGS", "SPSA",
    "GradientDescent", "NelderMead", "ILSHADE", "PSO", "CauchyAnnealing", "DEBest1Bin",
]
