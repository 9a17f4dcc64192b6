import math
from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import kron_pauli
from noisyvqe.ansatz import (
    build_ansatz,
    build_tvha,
    build_twolocal,
    greedy_qwc_groups,
    qubitwise_commute,
    truncate_terms,
)
from noisyvqe.estimator import Estimator
from noisyvqe.exceptions import ConfigurationError
from noisyvqe.models import build_ising
from noisyvqe.optimizers import make_optimizer
from noisyvqe.pauli import Hamiltonian, basis_state, expectation, zero_state


def twolocal_oracle(n, reps, theta, pairs):
    """Dense-matrix TwoLocal with RY layers and linear CX."""
    def ry(t):
        return np.array([[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]])

    def cx(c, t):
        dim = 2**n
        m = np.zeros((dim, dim))
        for i in range(dim):
            j = i ^ (1 << (n - 1 - t)) if (i >> (n - 1 - c)) & 1 else i
            m[j, i] = 1
        return m

    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    k = 0
    for layer in range(reps + 1):
        if layer:
            for c, t in pairs:
                psi = cx(c, t) @ psi
        psi = reduce(np.kron, [ry(theta[k + q]) for q in range(n)]) @ psi
        k += n
    return psi


class TestTwoLocal:
    def test_parameter_count(self):
        assert build_twolocal(5, 1).n_params == 10
        assert build_twolocal(4, 3).n_params == 16

    def test_zero_angles_give_zero_state(self):
        a = build_twolocal(5, 3)
        np.testing.assert_allclose(a.prepare(a.zero_params()), zero_state(5), atol=1e-15)

    @pytest.mark.parametrize("entanglement", ["linear", "circular", "full"])
    def test_matches_dense_oracle(self, rng, entanglement):
        n, reps = 4, 2
        a = build_twolocal(n, reps, entanglement=entanglement)
        pairs = [g.qubits for g in a.gates if g.kind == "CX"]
        layer_pairs = pairs[: len(pairs) // reps]
        theta = rng.uniform(-math.pi, math.pi, a.n_params)
        np.testing.assert_allclose(a.prepare(theta), twolocal_oracle(n, reps, theta, layer_pairs), atol=1e-12)

    def test_reaches_bell_minimum(self):
        h = Hamiltonian(2, {"ZZ": -1.0, "XX": -1.0})
        e0 = np.linalg.eigvalsh(-kron_pauli("ZZ") - kron_pauli("XX"))[0]
        assert e0 == pytest.approx(-2.0)
        est = Estimator(build_twolocal(2, 1), h)
        res = make_optimizer("bfgs_fd", budget=3000).minimize(est.exact_energy, np.full(4, 0.3))
        assert res.fun - e0 < 1e-6

    def test_rejects_bad_options(self):
        with pytest.raises(ConfigurationError):
            build_twolocal(3, 0)
        with pytest.raises(ConfigurationError):
            build_twolocal(3, 1, entanglement="star")
        with pytest.raises(ConfigurationError):
            build_twolocal(3, 1, rotation="RZ")


class TestGrouping:
    def test_qubitwise_commute(self):
        assert qubitwise_commute("XIZ", "XYZ")
        assert not qubitwise_commute("XI", "ZI")

    def test_first_fit(self):
        assert greedy_qwc_groups(["ZZ", "XI", "ZI", "IX"]) == [[0, 2], [1, 3]]


class TestTruncation:
    def test_full_weight_keeps_everything(self, h2):
        assert sorted(truncate_terms(h2, 1.0)) == list(range(len(h2)))

    def test_prefix_rule(self):
        h = Hamiltonian(2, {"ZI": 0.5, "IZ": 0.3, "ZZ": 0.2})
        assert truncate_terms(h, 0.79) == [0, 1]
        assert truncate_terms(h, 0.8) == [0, 1]
        assert truncate_terms(h, 0.81) == [0, 1, 2]

    @pytest.mark.parametrize("p", [0.0, -0.1, 1.01])
    def test_rejects_out_of_range(self, h2, p):
        with pytest.raises(ConfigurationError):
            truncate_terms(h2, p)


class TestTVHA:
    def test_h2_structure(self, h2):
        a = build_tvha(h2, 1.0, 2)
        # regression: greedy grouping of the bundled H2 gives one Z group plus four XY singles
        assert a.info["n_groups"] == 5
        assert a.n_params == 10
        assert a.initial_state == 0b1100

    def test_zero_angles_give_hf_state(self, h2):
        a = build_tvha(h2, 1.0, 2)
        np.testing.assert_allclose(a.prepare(a.zero_params()), basis_state(4, 0b1100), atol=1e-15)

    def test_deterministic(self, h2, rng):
        a = build_tvha(h2, 0.9, 1)
        theta = rng.normal(size=a.n_params)
        assert np.array_equal(a.prepare(theta), a.prepare(theta))

    def test_diagonal_group_leaves_hf_energy_fixed(self, h2):
        a = build_tvha(h2, 1.0, 1)
        z_param = next(g.param for g in a.gates if all(set(t.paulis) <= {"I", "Z"} for t in g.terms))
        energies = []
        for angle in np.linspace(-3, 3, 13):
            theta = np.zeros(a.n_params)
            theta[z_param] = angle
            energies.append(expectation(a.prepare(theta), h2))
        np.testing.assert_allclose(energies, energies[0], atol=1e-12)

    def test_group_rotation_matches_matrix_exponential(self, h2, rng):
        a = build_tvha(h2, 1.0, 1)
        theta = rng.normal(size=a.n_params)
        psi = basis_state(4, a.initial_state)
        for g in a.gates:
            gen = sum(t.coeff * kron_pauli(t.paulis) for t in g.terms)
            psi = expm(-1j * theta[g.param] * gen) @ psi
        np.testing.assert_allclose(a.prepare(theta), psi, atol=1e-12)

    def test_wrong_parameter_length(self, h2):
        with pytest.raises(ConfigurationError):
            build_tvha(h2).prepare(np.zeros(3))


def test_build_ansatz_dispatch(h2):
    assert build_ansatz("twolocal", build_ising(3), reps=2).n_params == 9
    assert build_ansatz("tvha", h2, p=1.0, layers=2).n_params == 10
    with pytest.raises(ConfigurationError):
        build_ansatz("uccsd", h2)
