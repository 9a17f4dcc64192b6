"""Finite-shot energy estimation.

Three modes are supported:

``exact``
    the statevector expectation, no noise.
``gaussian``
    exact value plus a normal draw with variance ``variance_single_shot / n_shots``.
``sampled``
    bitstrings are drawn per qubit-wise commuting group after the group's
    basis change and the energy is assembled from parities.

``variance_single_shot`` is the variance that, divided by ``n_shots``, gives
the variance of the returned estimate.  With the default ``per_group``
allocation every group is measured with ``n_shots`` shots and this is
``sum_g Var_g`` (intra-group covariances included, inter-group ones absent
because groups are measured independently).  With ``split`` allocation the
shots are divided between groups and it becomes ``n_groups * sum_g Var_g``.
The ``hamiltonian`` variance model instead uses ``<H^2> - <H>^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ansatz import Ansatz, greedy_qwc_groups, prepare
from .exceptions import ConfigurationError
from .pauli import Hamiltonian, apply_1q, expectation, variance, _H, _SDG

MODES = ("exact", "gaussian", "sampled")
ALLOCATIONS = ("per_group", "split")
VARIANCE_MODELS = ("grouped", "hamiltonian")


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Counter-keyed generator: the same ``(seed, *keys)`` always gives the same stream.

    Keys go in as a spawn key, so ``(seed,)``, ``(seed, 0)`` and ``(seed, 0, 0)``
    are distinct streams (plain entropy words would treat trailing zeros as padding).
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    true_expectation: float
    variance_single_shot: float
    n_shots: int | None
    mode: str

    @property
    def injected_noise(self) -> float:
        return self.value - self.true_expectation

    @property
    def sigma(self) -> float:
        """Standard deviation of this estimate."""
        if self.mode == "exact" or not self.n_shots:
            return 0.0
        return math.sqrt(self.variance_single_shot / self.n_shots)


class MeasurementGrouping:
    """Qubit-wise commuting partition of a Hamiltonian's terms.

    Attributes
    ----------
    groups : list of list of int
        Term indices per group, first-fit in term order.
    bases : list of str
        Per group, the measurement letter on each qubit (``I`` when unused).
    """

    def __init__(self, h: Hamiltonian):
        self.hamiltonian = h
        strings = [t.paulis for t in h.terms]
        self.groups = greedy_qwc_groups(strings)
        self.bases = []
        for g in self.groups:
            basis = ["I"] * h.n_qubits
            for k in g:
                for q, p in enumerate(strings[k]):
                    if p != "I":
                        basis[q] = p
            self.bases.append("".join(basis))

    def __len__(self):
        return len(self.groups)

    def rotate(self, state: np.ndarray, g: int) -> np.ndarray:
        """Apply group ``g``'s basis change (X -> H, Y -> S^dag then H)."""
        psi = state
        for q, p in enumerate(self.bases[g]):
            if p == "X":
                psi = apply_1q(psi, _H, q)
            elif p == "Y":
                psi = apply_1q(apply_1q(psi, _SDG, q), _H, q)
        return psi

    @cached_property
    def diagonals(self) -> list[np.ndarray]:
        """Per group, the observable's eigenvalue on every measured bitstring."""
        h = self.hamiltonian
        n = h.n_qubits
        idx = np.arange(1 << n, dtype=np.int64)
        out = []
        for g in self.groups:
            d = np.zeros(1 << n)
            for k in g:
                support = sum(1 << (n - 1 - q) for q, p in enumerate(h.terms[k].paulis) if p != "I")
                parity = np.bitwise_count(idx & support).astype(np.int64) & 1
                d += h.terms[k].coeff * (1.0 - 2.0 * parity)
            out.append(d)
        return out

    def group_probabilities(self, state: np.ndarray) -> list[np.ndarray]:
        return [np.abs(self.rotate(state, g)) ** 2 for g in range(len(self))]

    def group_moments(self, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Exact per-group means and single-shot variances."""
        means, variances = [], []
        for probs, d in zip(self.group_probabilities(state), self.diagonals):
            m = probs @ d
            means.append(m)
            variances.append(max(probs @ (d * d) - m * m, 0.0))
        return np.array(means), np.array(variances)

    def shot_counts(self, n_shots: int, allocation: str) -> list[int]:
        if allocation == "per_group":
            return [n_shots] * len(self)
        base, rem = divmod(n_shots, len(self))
        return [base + (1 if g < rem else 0) for g in range(len(self))]


def build_grouping(h: Hamiltonian) -> MeasurementGrouping:
    return MeasurementGrouping(h)


class Estimator:
    """Noisy energy oracle for one (ansatz, Hamiltonian) pair.

    Parameters
    ----------
    ansatz, hamiltonian
        The circuit and the observable.
    mode : {"exact", "gaussian", "sampled"}
    n_shots : int or None
        Shots per evaluation; ignored in exact mode.
    allocation : {"per_group", "split"}
        Whether every commuting group gets ``n_shots`` or they share them.
    variance_model : {"grouped", "hamiltonian"}
        Gaussian-mode variance: the grouped-measurement variance or ``Var[H]``.
    """

    def __init__(
        self,
        ansatz: Ansatz,
        hamiltonian: Hamiltonian,
        mode: str = "exact",
        n_shots: int | None = None,
        allocation: str = "per_group",
        variance_model: str = "grouped",
    ):
        if ansatz.n_qubits != hamiltonian.n_qubits:
            raise ConfigurationError(
                f"ansatz has {ansatz.n_qubits} qubits, Hamiltonian {hamiltonian.n_qubits}"
            )
        if mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {mode!r}")
        if allocation not in ALLOCATIONS:
            raise ConfigurationError(f"allocation must be one of {ALLOCATIONS}")
        if variance_model not in VARIANCE_MODELS:
            raise ConfigurationError(f"variance_model must be one of {VARIANCE_MODELS}")
        if mode != "exact":
            if n_shots is None or int(n_shots) < 1:
                raise ConfigurationError(f"{mode} mode needs n_shots >= 1, got {n_shots}")
            n_shots = int(n_shots)
        self.ansatz = ansatz
        self.hamiltonian = hamiltonian
        self.mode = mode
        self.n_shots = n_shots
        self.allocation = allocation
        self.variance_model = variance_model
        self.grouping = MeasurementGrouping(hamiltonian)
        if allocation == "split" and mode != "exact" and n_shots < len(self.grouping):
            raise ConfigurationError(
                f"split allocation needs at least {len(self.grouping)} shots, got {n_shots}"
            )

    @property
    def metadata(self) -> dict:
        return {
            "mode": self.mode,
            "n_shots": self.n_shots,
            "allocation": self.allocation,
            "variance_model": self.variance_model,
            "n_groups": len(self.grouping),
            "group_variance": "sum of per-group single-shot variances with intra-group covariances",
        }

    def _implied_variance(self, group_vars: np.ndarray) -> float:
        if self.allocation == "per_group":
            return float(group_vars.sum())
        counts = self.grouping.shot_counts(self.n_shots, "split")
        return float(self.n_shots * sum(v / c for v, c in zip(group_vars, counts)))

    def single_shot_variance(self, state: np.ndarray) -> float:
        if self.variance_model == "hamiltonian":
            return variance(state, self.hamiltonian)
        _, group_vars = self.grouping.group_moments(state)
        return self._implied_variance(group_vars)

    def estimate_state(self, state: np.ndarray, rng: np.random.Generator | None = None) -> EnergyEstimate:
        h = self.hamiltonian
        exact = expectation(state, h)
        if self.mode == "sampled":
            value = h.identity_offset
            group_vars = []
            counts = self.grouping.shot_counts(self.n_shots, self.allocation)
            for probs, d, n_g in zip(self.grouping.group_probabilities(state), self.grouping.diagonals, counts):
                probs = probs / probs.sum()
                hist = rng.multinomial(n_g, probs)
                value += hist @ d / n_g
                m = probs @ d
                group_vars.append(max(probs @ (d * d) - m * m, 0.0))
            var = self._implied_variance(np.array(group_vars))
            if self.variance_model == "hamiltonian":
                var = variance(state, h)
            return EnergyEstimate(float(value), exact, var, self.n_shots, "sampled")
        var = self.single_shot_variance(state)
        if self.mode == "exact":
            return EnergyEstimate(exact, exact, var, self.n_shots, "exact")
        noise = rng.normal(0.0, math.sqrt(var / self.n_shots)) if var > 0 else 0.0
        return EnergyEstimate(exact + noise, exact, var, self.n_shots, "gaussian")

    def estimate(self, theta, rng: np.random.Generator | None = None) -> EnergyEstimate:
        if self.mode != "exact" and rng is None:
            raise ConfigurationError(f"{self.mode} mode needs an rng stream")
        return self.estimate_state(prepare(self.ansatz, theta), rng)

    def exact_energy(self, theta) -> float:
        return expectation(prepare(self.ansatz, theta), self.hamiltonian)

    def __call__(self, theta, rng=None) -> float:
        return self.estimate(theta, rng).value


def estimate(ansatz, hamiltonian, theta, n_shots=None, mode="exact", rng=None, **kwargs) -> EnergyEstimate:
    """One-off energy estimate; see :class:`Estimator` for the options."""
    return Estimator(ansatz, hamiltonian, mode, n_shots, **kwargs).estimate(theta, rng)


def noise_floor(trace_variances, n_shots: int) -> float:
    """``sqrt(mean(single-shot variances) / n_shots)``."""
    v = np.asarray(trace_variances, dtype=float)
    if v.size == 0:
        raise ConfigurationError("noise_floor needs at least one variance")
    if n_shots is None or n_shots < 1:
        raise ConfigurationError("noise_floor needs n_shots >= 1")
    return math.sqrt(v.mean() / n_shots)
