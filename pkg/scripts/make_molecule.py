"""Regenerate a bundled molecular Hamiltonian file (needs pyscf, not a package dependency).

    python scripts/make_molecule.py h2 0.735 src/noisyvqe/data/hamiltonians/h2_sto3g_0.735.json
"""

import sys

import numpy as np
from pyscf import ao2mo, gto, scf

from noisyvqe.models import FermionOperator, jordan_wigner, save_hamiltonian
from noisyvqe.pauli import PauliTerm, exact_ground_energy

GEOMETRIES = {"h2": lambda r: f"H 0 0 0; H 0 0 {r}"}


def molecular_hamiltonian(atom, basis="sto-3g"):
    mol = gto.M(atom=atom, basis=basis, unit="Angstrom")
    mf = scf.RHF(mol).run(verbose=0)
    c = mf.mo_coeff
    h1 = c.T @ mf.get_hcore() @ c
    n = h1.shape[0]
    eri = ao2mo.restore(1, ao2mo.kernel(mol, c), n)  # chemist (pq|rs)
    op = FermionOperator()
    for p in range(n):
        for q in range(n):
            for s in (0, 1):
                if abs(h1[p, q]) > 1e-14:
                    op.add(((2 * p + s, True), (2 * q + s, False)), h1[p, q])
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for t in range(n):
                    v = 0.5 * eri[p, q, r, t]
                    if abs(v) < 1e-14:
                        continue
                    for s1 in (0, 1):
                        for s2 in (0, 1):
                            a, b = 2 * p + s1, 2 * r + s2
                            cc, d = 2 * t + s2, 2 * q + s1
                            if a == b or cc == d:
                                continue
                            op.add(((a, True), (b, True), (cc, False), (d, False)), v)
    h = jordan_wigner(op, 2 * n, tol=1e-10)
    h.identity_offset += mol.energy_nuc()
    return h, mol.nelectron, mf.e_tot


if __name__ == "__main__":
    name, r, out = sys.argv[1], float(sys.argv[2]), sys.argv[3]
    h, ne, e_hf = molecular_hamiltonian(GEOMETRIES[name](r))
    e0, _ = exact_ground_energy(h)
    hf_index = int("1" * ne + "0" * (h.n_qubits - ne), 2)
    h.metadata = {
        "name": f"{name}_sto3g_{r}",
        "e0_reference": round(e0, 10),
        "e_hf": round(e_hf, 10),
        "hf_occupation": hf_index,
        "n_electrons": ne,
        "source": "pyscf RHF STO-3G, interleaved spin orbitals, Jordan-Wigner",
    }
    # keep the identity as an explicit term so the file lists every Pauli string
    import json
    data = {
        "n_qubits": h.n_qubits,
        "identity_offset": 0.0,
        "terms": [{"pauli": "I" * h.n_qubits, "coeff": h.identity_offset}]
        + [{"pauli": t.paulis, "coeff": t.coeff} for t in h.terms],
        "metadata": h.metadata,
    }
    open(out, "w").write(json.dumps(data, indent=2) + "\n")
    print(f"{len(data['terms'])} terms, E0={e0:.10f}, E_HF={e_hf:.10f}")
