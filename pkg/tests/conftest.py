"""Shared fixtures and an independent dense-matrix oracle.

The oracle builds Pauli strings with explicit Kronecker products (qubit 0 is
the leftmost factor) and never touches the bit-mask code under test.
"""

from functools import reduce

import numpy as np
import pytest

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_pauli(paulis: str) -> np.ndarray:
    return reduce(np.kron, [PAULI[c] for c in paulis])


def dense_oracle(h) -> np.ndarray:
    dim = 2**h.n_qubits
    m = h.identity_offset * np.eye(dim, dtype=complex)
    for term in h.terms:
        m = m + term.coeff * kron_pauli(term.paulis)
    return m


def ladder(mode: int, n_modes: int, dagger: bool) -> np.ndarray:
    """Fermionic ladder operator built from 2x2 blocks with a parity string."""
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |1> -> |0>
    op = lower.conj().T if dagger else lower
    factors = [PAULI["Z"]] * mode + [op] + [PAULI["I"]] * (n_modes - mode - 1)
    return reduce(np.kron, factors)


def random_state(n_qubits: int, rng) -> np.ndarray:
    v = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def h2():
    from noisyvqe.models import load_bundled

    return load_bundled("h2")


@pytest.fixture(scope="session")
def h2_e0(h2):
    return float(np.linalg.eigvalsh(dense_oracle(h2))[0])
