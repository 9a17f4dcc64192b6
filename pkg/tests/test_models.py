import json
import math

import numpy as np
import pytest

from conftest import dense_oracle, kron_pauli, ladder
from noisyvqe.exceptions import ConfigurationError, ConstructionError, HamiltonianLoadError
from noisyvqe.models import (
    FermionOperator,
    build_hubbard,
    build_ising,
    build_model,
    bundled_hamiltonians,
    hubbard_fermion_operator,
    jordan_wigner,
    load_hamiltonian,
    multiply_paulis,
    save_hamiltonian,
)
from noisyvqe.pauli import exact_ground_energy, spectrum


def fermion_dense(op: FermionOperator, n_modes: int) -> np.ndarray:
    """Dense image of a fermion operator from explicit ladder matrices."""
    dim = 2**n_modes
    out = np.zeros((dim, dim), dtype=complex)
    for ops, coeff in op.terms.items():
        m = np.eye(dim, dtype=complex)
        for mode, dagger in ops:
            m = m @ ladder(mode, n_modes, dagger)
        out += coeff * m
    return out


class TestIsing:
    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_term_count_and_ground_energy(self, n):
        h = build_ising(n)
        assert len(h) == n - 1
        assert exact_ground_energy(h)[0] == pytest.approx(-(n - 1))

    def test_two_qubit_spectrum(self):
        h = build_ising(2)
        assert h.to_dict() == {"ZZ": -1.0}
        np.testing.assert_allclose(np.unique(np.round(spectrum(h), 12)), [-1.0, 1.0])

    def test_rejects_single_qubit(self):
        with pytest.raises(ConfigurationError):
            build_ising(1)


class TestPauliAlgebra:
    @pytest.mark.parametrize("a,b", [("XY", "ZZ"), ("XYZI", "YYXZ"), ("Z", "X")])
    def test_product_matches_matrices(self, a, b):
        phase, p = multiply_paulis(a, b)
        np.testing.assert_allclose(phase * kron_pauli(p), kron_pauli(a) @ kron_pauli(b), atol=1e-14)


class TestJordanWigner:
    def test_number_operator(self):
        h = jordan_wigner(FermionOperator.number(1), 3)
        assert h.identity_offset == pytest.approx(0.5)
        assert h.to_dict() == {"IZI": pytest.approx(-0.5)}

    def test_adjacent_hopping(self):
        h = jordan_wigner(FermionOperator.hopping(0, 1, 1.0), 2)
        assert h.to_dict() == {"XX": pytest.approx(0.5), "YY": pytest.approx(0.5)}

    def test_hopping_with_parity_string(self):
        h = jordan_wigner(FermionOperator.hopping(0, 2, 1.0), 3)
        assert h.to_dict() == {"XZX": pytest.approx(0.5), "YZY": pytest.approx(0.5)}

    def test_ladder_oracle_anticommutation(self):
        n = 3
        for i in range(n):
            for j in range(n):
                anti = ladder(i, n, False) @ ladder(j, n, True) + ladder(j, n, True) @ ladder(i, n, False)
                np.testing.assert_allclose(anti, np.eye(2**n) * (i == j), atol=1e-14)

    def test_matches_ladder_matrices(self, rng):
        n = 4
        op = FermionOperator()
        for _ in range(6):
            i, j = rng.integers(n, size=2)
            op += FermionOperator.hopping(int(i), int(j), float(rng.normal()))
        op.add(((0, True), (0, False), (3, True), (3, False)), 0.7)
        op.add(((1, True), (2, True), (2, False), (1, False)), -0.4)
        np.testing.assert_allclose(dense_oracle(jordan_wigner(op, n)), fermion_dense(op, n), atol=1e-10)

    def test_non_hermitian_rejected(self):
        op = FermionOperator({((0, True), (1, False)): 1.0})
        with pytest.raises(ConstructionError):
            jordan_wigner(op, 2)

    def test_mode_out_of_range(self):
        with pytest.raises(ConfigurationError):
            jordan_wigner(FermionOperator.number(4), 3)


class TestHubbard:
    def test_two_site_ground_energy(self):
        assert exact_ground_energy(build_hubbard(2))[0] == pytest.approx((1 - math.sqrt(17)) / 2, abs=1e-9)

    @pytest.mark.parametrize("sites,boundary", [(2, "open"), (3, "open"), (3, "periodic")])
    def test_jw_matches_fermionic_oracle(self, sites, boundary):
        op = hubbard_fermion_operator(sites, 1.0, 2.0, boundary)
        h = build_hubbard(sites, 1.0, 2.0, boundary)
        np.testing.assert_allclose(dense_oracle(h), fermion_dense(op, 2 * sites), atol=1e-10)

    def test_conserves_particle_number(self):
        n_modes = 6
        h = dense_oracle(build_hubbard(3))
        number = sum(ladder(m, n_modes, True) @ ladder(m, n_modes, False) for m in range(n_modes))
        np.testing.assert_allclose(h @ number - number @ h, 0, atol=1e-10)

    def test_site_range(self):
        with pytest.raises(ConfigurationError):
            build_hubbard(8)

    def test_bad_boundary(self):
        with pytest.raises(ConfigurationError):
            build_hubbard(3, boundary="twisted")


class TestFiles:
    def test_bundled_h2(self, h2):
        assert "h2_sto3g_0.735" in bundled_hamiltonians()
        assert h2.n_qubits == 4
        # 15 file entries; the IIII entry folds into the offset
        assert len(h2) == 14
        assert exact_ground_energy(h2)[0] == pytest.approx(-1.137, abs=5e-4)
        assert exact_ground_energy(h2)[0] == pytest.approx(h2.metadata["e0_reference"], abs=1e-8)

    def test_duplicate_terms_merge(self, tmp_path):
        path = tmp_path / "dup.json"
        path.write_text(json.dumps({"n_qubits": 4, "terms": [
            {"pauli": "ZZII", "coeff": 0.3}, {"pauli": "ZZII", "coeff": 0.2}]}))
        assert load_hamiltonian(path).to_dict() == {"ZZII": pytest.approx(0.5)}

    @pytest.mark.parametrize("terms,match", [
        ([{"pauli": "ZZ", "coeff": 1.0}, {"pauli": "ZQ", "coeff": 1.0}], "term 1"),
        ([{"pauli": "ZZZ", "coeff": 1.0}], "term 0"),
        ([{"pauli": "ZZ", "coeff": "nan"}], "term 0"),
        ([{"pauli": "ZZ"}], "term 0"),
    ])
    def test_load_errors_name_the_term(self, tmp_path, terms, match):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n_qubits": 2, "terms": terms}))
        with pytest.raises(HamiltonianLoadError, match=match):
            load_hamiltonian(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(HamiltonianLoadError):
            load_hamiltonian(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_hamiltonian(tmp_path / "absent.json")

    def test_round_trip(self, tmp_path, h2):
        path = tmp_path / "h2.json"
        save_hamiltonian(h2, path)
        back = build_model(str(path))
        assert back.to_dict() == pytest.approx(h2.to_dict())
        assert back.identity_offset == pytest.approx(h2.identity_offset)

    def test_unknown_bundle(self):
        with pytest.raises(ConfigurationError):
            build_model("lih")
