"""Pauli-string Hamiltonians and dense statevector simulation.

Conventions
-----------
Qubit 0 is the leftmost character of a Pauli string and the most significant
bit of a basis-state index, so ``"ZI"`` acts on the high bit of a 2-qubit
index and ``basis_state(2, 0b10)`` is ``|10>``.

Statevectors are plain ``complex128`` numpy arrays of length ``2**n``.
Pauli operators are applied through bit masks: X/Y flip index bits, Z/Y
contribute signs.  Dense matrices are only built for exact diagonalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .exceptions import CapabilityError, ConfigurationError

PAULI_LETTERS = frozenset("IXYZ")
DROP_THRESHOLD = 1e-12
MAX_EXACT_QUBITS = 14
# dense eigh above this size is slow; switch to Lanczos
_DENSE_LIMIT = 10


@dataclass(frozen=True)
class PauliTerm:
    """A real coefficient times a Pauli string such as ``"XZIY"``."""

    paulis: str
    coeff: float

    def __post_init__(self):
        if not set(self.paulis) <= PAULI_LETTERS:
            raise ConfigurationError(f"invalid Pauli string {self.paulis!r}")
        if not math.isfinite(self.coeff):
            raise ConfigurationError(f"non-finite coefficient for {self.paulis!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.paulis)

    @property
    def is_identity(self) -> bool:
        return set(self.paulis) <= {"I"}

    def masks(self) -> tuple[int, int, int]:
        return pauli_masks(self.paulis)


def pauli_masks(paulis: str) -> tuple[int, int, int]:
    """Return ``(x_mask, z_mask, n_y)`` for a Pauli string."""
    n = len(paulis)
    x_mask = z_mask = n_y = 0
    for q, p in enumerate(paulis):
        bit = 1 << (n - 1 - q)
        if p in "XY":
            x_mask |= bit
        if p in "ZY":
            z_mask |= bit
        if p == "Y":
            n_y += 1
    return x_mask, z_mask, n_y


def _parity(values: np.ndarray) -> np.ndarray:
    return np.bitwise_count(values).astype(np.int64) & 1


def _pauli_phase(indices: np.ndarray, x_mask: int, z_mask: int, n_y: int) -> np.ndarray:
    """Phase vector ``d`` with ``(P psi)[c] = d[c] * psi[c ^ x_mask]``."""
    src = indices ^ x_mask
    sign = 1.0 - 2.0 * _parity(src & z_mask)
    return (1j**n_y) * sign


class Hamiltonian:
    """Weighted sum of Pauli strings with a separate identity offset.

    Duplicate strings are merged by adding coefficients, all-identity terms
    are folded into ``identity_offset``, and terms whose merged coefficient
    magnitude falls below ``threshold`` are dropped.

    Parameters
    ----------
    n_qubits : int
        Number of qubits.
    terms : iterable of PauliTerm or mapping of str to float
        Pauli terms; order of first appearance is preserved.
    identity_offset : float
        Coefficient of the identity.
    threshold : float
        Magnitude below which merged terms are discarded.
    """

    def __init__(
        self,
        n_qubits: int,
        terms: Iterable[PauliTerm] | Mapping[str, float] = (),
        identity_offset: float = 0.0,
        threshold: float = DROP_THRESHOLD,
        metadata: dict | None = None,
    ):
        if n_qubits < 1:
            raise ConfigurationError("n_qubits must be positive")
        if isinstance(terms, Mapping):
            terms = [PauliTerm(p, float(c)) for p, c in terms.items()]
        merged: dict[str, float] = {}
        offset = float(identity_offset)
        for term in terms:
            if term.n_qubits != n_qubits:
                raise ConfigurationError(
                    f"term {term.paulis!r} has length {term.n_qubits}, expected {n_qubits}"
                )
            if term.is_identity:
                offset += term.coeff
            else:
                merged[term.paulis] = merged.get(term.paulis, 0.0) + term.coeff
        self.n_qubits = n_qubits
        self.terms = tuple(PauliTerm(p, c) for p, c in merged.items() if abs(c) >= threshold)
        self.identity_offset = offset
        self.metadata = dict(metadata or {})

    def __repr__(self):
        return (
            f"Hamiltonian(n_qubits={self.n_qubits}, n_terms={len(self.terms)}, "
            f"identity_offset={self.identity_offset:.6g})"
        )

    def __len__(self):
        return len(self.terms)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([t.coeff for t in self.terms])

    def to_dict(self) -> dict[str, float]:
        return {t.paulis: t.coeff for t in self.terms}

    @cached_property
    def _compiled(self):
        # One phase vector per distinct X-mask; diagonal terms share mask 0.
        idx = np.arange(self.dim, dtype=np.int64)
        blocks: dict[int, np.ndarray] = {}
        for term in self.terms:
            x, z, ny = term.masks()
            d = term.coeff * _pauli_phase(idx, x, z, ny)
            if x in blocks:
                blocks[x] = blocks[x] + d
            else:
                blocks[x] = d.astype(complex)
        diag = blocks.pop(0, np.zeros(self.dim, dtype=complex)).real.copy()
        diag += self.identity_offset
        off = [(idx ^ x, d) for x, d in blocks.items()]
        return diag, off

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Return ``H |state>`` without forming a matrix."""
        _check_dim(state, self.n_qubits)
        diag, off = self._compiled
        out = diag * state
        for src, d in off:
            out += d * state[src]
        return out

    def to_sparse(self) -> sp.csr_matrix:
        diag, off = self._compiled
        rows = [np.arange(self.dim)]
        cols = [np.arange(self.dim)]
        vals = [diag.astype(complex)]
        for src, d in off:
            rows.append(np.arange(self.dim))
            cols.append(src)
            vals.append(d)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim),
        )

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def is_diagonal(self) -> bool:
        return all(set(t.paulis) <= {"I", "Z"} for t in self.terms)


def _check_dim(state: np.ndarray, n_qubits: int):
    if state.ndim != 1 or state.shape[0] != 1 << n_qubits:
        raise ConfigurationError(
            f"state of shape {state.shape} does not match {n_qubits} qubits"
        )


def zero_state(n_qubits: int) -> np.ndarray:
    return basis_state(n_qubits, 0)


def basis_state(n_qubits: int, index: int) -> np.ndarray:
    if not 0 <= index < 1 << n_qubits:
        raise ConfigurationError(f"basis index {index} out of range for {n_qubits} qubits")
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def n_qubits_of(state: np.ndarray) -> int:
    n = int(state.shape[0]).bit_length() - 1
    if state.ndim != 1 or 1 << n != state.shape[0]:
        raise ConfigurationError(f"state length {state.shape} is not a power of two")
    return n


def expectation(state: np.ndarray, h: Hamiltonian) -> float:
    """Exact ``<psi|H|psi>``; the imaginary round-off is discarded."""
    hpsi = h.apply(state)
    return float(np.vdot(state, hpsi).real)


def variance(state: np.ndarray, h: Hamiltonian) -> float:
    """Exact ``<H^2> - <H>^2`` computed from ``||H psi||^2``."""
    hpsi = h.apply(state)
    mean = np.vdot(state, hpsi).real
    return float(max(np.vdot(hpsi, hpsi).real - mean * mean, 0.0))


def apply_pauli(state: np.ndarray, paulis: str) -> np.ndarray:
    """Return ``P |state>`` for a Pauli string ``P``."""
    n = len(paulis)
    _check_dim(state, n)
    x, z, ny = pauli_masks(paulis)
    idx = np.arange(state.shape[0], dtype=np.int64)
    return _pauli_phase(idx, x, z, ny) * state[idx ^ x]


def apply_pauli_rotation(state: np.ndarray, term: PauliTerm | str, angle: float) -> np.ndarray:
    """Apply ``exp(-i * angle * P)``; the term coefficient is ignored.

    Uses ``exp(-i t P) = cos(t) I - i sin(t) P`` since ``P**2 = I``.
    """
    if not math.isfinite(angle):
        raise ConfigurationError("rotation angle must be finite")
    paulis = term.paulis if isinstance(term, PauliTerm) else term
    if angle == 0.0:
        return state.copy()
    return math.cos(angle) * state - 1j * math.sin(angle) * apply_pauli(state, paulis)


# -- standard gates ---------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SDG = np.array([[1, 0], [0, -1j]], dtype=complex)


def _ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _rz(theta):
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


_PARAMETRIC = {"RY": _ry, "RX": _rx, "RZ": _rz}
_FIXED = {"H": _H, "X": _X, "SDG": _SDG}


def apply_1q(state: np.ndarray, matrix: np.ndarray, qubit: int) -> np.ndarray:
    n = n_qubits_of(state)
    if not 0 <= qubit < n:
        raise ConfigurationError(f"qubit {qubit} out of range for {n} qubits")
    psi = state.reshape((1 << qubit, 2, -1))
    return np.einsum("ab,ibj->iaj", matrix, psi).reshape(-1)


def _controlled(state: np.ndarray, control: int, target: int, kind: str) -> np.ndarray:
    n = n_qubits_of(state)
    for q in (control, target):
        if not 0 <= q < n:
            raise ConfigurationError(f"qubit {q} out of range for {n} qubits")
    if control == target:
        raise ConfigurationError("control and target must differ")
    idx = np.arange(state.shape[0], dtype=np.int64)
    cbit, tbit = 1 << (n - 1 - control), 1 << (n - 1 - target)
    on = (idx & cbit) != 0
    out = state.copy()
    if kind == "CX":
        out[on] = state[idx[on] ^ tbit]
    else:
        out[on & ((idx & tbit) != 0)] *= -1
    return out


def apply_standard_gate(state: np.ndarray, gate: str, qubits, theta: float | None = None):
    """Apply one of RY, RX, RZ, H, X, SDG, CX, CZ.

    ``qubits`` is an int for single-qubit gates and a ``(control, target)``
    pair for CX/CZ.  Rotations follow ``R_P(theta) = exp(-i theta P / 2)``.
    """
    gate = gate.upper()
    if gate not in ("CX", "CZ") and isinstance(qubits, (tuple, list)):
        (qubits,) = qubits
    if gate in _PARAMETRIC:
        if theta is None:
            raise ConfigurationError(f"{gate} needs an angle")
        return apply_1q(state, _PARAMETRIC[gate](theta), int(qubits))
    if gate in _FIXED:
        return apply_1q(state, _FIXED[gate], int(qubits))
    if gate in ("CX", "CZ"):
        control, target = qubits
        return _controlled(state, int(control), int(target), gate)
    raise ConfigurationError(f"unknown gate {gate!r}")


def probabilities(state: np.ndarray) -> np.ndarray:
    return np.abs(state) ** 2


def exact_ground_energy(h: Hamiltonian) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of ``h`` and a unit eigenvector.

    Dense ``eigh`` up to 10 qubits, Lanczos (``eigsh``) beyond that.
    """
    if h.n_qubits > MAX_EXACT_QUBITS:
        raise CapabilityError(
            f"exact diagonalization limited to {MAX_EXACT_QUBITS} qubits, got {h.n_qubits}"
        )
    if not h.terms:
        return h.identity_offset, zero_state(h.n_qubits)
    if h.n_qubits <= _DENSE_LIMIT:
        w, v = np.linalg.eigh(h.to_dense())
        e0, psi = float(w[0]), v[:, 0]
    else:
        w, v = eigsh(h.to_sparse(), k=1, which="SA", tol=1e-12)
        e0, psi = float(w[0]), v[:, 0]
    return e0, psi / np.linalg.norm(psi)


def spectrum(h: Hamiltonian) -> np.ndarray:
    if h.n_qubits > _DENSE_LIMIT:
        raise CapabilityError(f"full spectrum limited to {_DENSE_LIMIT} qubits")
    return np.linalg.eigvalsh(h.to_dense())
