"""Scikit-learn style front end: ``VQE().fit(hamiltonian).predict(thetas)``."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .ansatz import build_ansatz
from .estimator import Estimator, rng_stream
from .exceptions import ConfigurationError
from .models import build_model
from .optimizers import ObjectiveHandle, make_optimizer
from .pauli import Hamiltonian, exact_ground_energy

_INIT_STREAM = 0x1A17


class VQE(BaseEstimator):
    """Variational ground-state search for one Hamiltonian.

    Parameters
    ----------
    ansatz : {"auto", "twolocal", "tvha"}
        ``"auto"`` picks TwoLocal for lattice models and tVHA otherwise.
    reps : int
        TwoLocal repetitions.
    p, n_layers : float, int
        tVHA truncation weight and layer count.
    optimizer : str
        Registry name, see :data:`noisyvqe.optimizers.OPTIMIZERS`.
    optimizer_params : dict, optional
        Extra optimizer hyperparameters.
    mode, n_shots, allocation, variance_model
        Passed to :class:`~noisyvqe.estimator.Estimator`.
    budget : int
        Function-evaluation cap.
    init : {"uniform01", "zeros"}
        Starting point; ``uniform01`` draws each angle from U[0, 1).
    seed : int

    Attributes
    ----------
    theta_ : ndarray
        Returned parameters: the best evaluated point in exact mode and the
        optimizer's final iterate in noisy modes, where the best noisy value
        is biased low.
    energy_ : float
        Exact energy at ``theta_``.
    result_ : OptimizeResult
    """

    def __init__(self, ansatz="auto", reps=3, p=1.0, n_layers=2, optimizer="cma_es", optimizer_params=None,
                 mode="exact", n_shots=None, allocation="per_group", variance_model="grouped",
                 budget=2000, init="uniform01", seed=0):
        self.ansatz = ansatz
        self.reps = reps
        self.p = p
        self.n_layers = n_layers
        self.optimizer = optimizer
        self.optimizer_params = optimizer_params
        self.mode = mode
        self.n_shots = n_shots
        self.allocation = allocation
        self.variance_model = variance_model
        self.budget = budget
        self.init = init
        self.seed = seed

    def _family(self, h: Hamiltonian) -> str:
        if self.ansatz != "auto":
            return self.ansatz
        return "twolocal" if h.metadata.get("name", "").startswith(("ising", "hubbard")) else "tvha"

    def fit(self, X, y=None):
        """Minimize the energy of ``X`` (a Hamiltonian or a model name)."""
        h = X if isinstance(X, Hamiltonian) else build_model(str(X))
        ansatz = build_ansatz(self._family(h), h, reps=self.reps, p=self.p, n_layers=self.n_layers)
        est = Estimator(ansatz, h, self.mode, self.n_shots, self.allocation, self.variance_model)
        if self.init == "zeros":
            x0 = np.zeros(ansatz.n_params)
        elif self.init == "uniform01":
            x0 = rng_stream(self.seed, 0, _INIT_STREAM).random(ansatz.n_params)
        else:
            raise ConfigurationError(f"init must be 'uniform01' or 'zeros', got {self.init!r}")
        opt = make_optimizer(self.optimizer, budget=self.budget, seed=self.seed, **(self.optimizer_params or {}))
        obj = ObjectiveHandle.from_estimator(est, seed=self.seed)
        res = opt.minimize(obj, x0)

        self.hamiltonian_ = h
        self.ansatz_ = ansatz
        self.estimator_ = est
        self.result_ = res
        self.n_fev_ = res.nfev
        noisy = self.mode != "exact"
        self.theta_ = np.asarray(res.x_last if noisy and res.x_last is not None else res.x, dtype=float)
        self.energy_ = est.exact_energy(self.theta_)
        return self

    def predict(self, X) -> np.ndarray:
        """Exact energies for each row of a parameter matrix."""
        check_is_fitted(self, "theta_")
        X = check_array(X, ensure_all_finite=True)
        if X.shape[1] != self.ansatz_.n_params:
            raise ConfigurationError(f"expected {self.ansatz_.n_params} parameters per row, got {X.shape[1]}")
        return np.array([self.estimator_.exact_energy(row) for row in X])

    def sample(self, X, seed: int = 0) -> np.ndarray:
        """Noisy energies under the fitted estimator; row ``k`` uses ``rng_stream(seed, k)``."""
        check_is_fitted(self, "theta_")
        X = check_array(X, ensure_all_finite=True)
        return np.array([self.estimator_(row, rng_stream(seed, k)) for k, row in enumerate(X)])

    def score(self, X=None, y=None) -> float:
        """Negative gap between ``energy_`` and the exact ground energy."""
        check_is_fitted(self, "theta_")
        return -(self.energy_ - exact_ground_energy(self.hamiltonian_)[0])
