"""Benchmark Hamiltonians: Ising chain, Fermi-Hubbard and file-based molecules."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

from .exceptions import ConfigurationError, ConstructionError, HamiltonianLoadError
from .pauli import PAULI_LETTERS, Hamiltonian, PauliTerm

# product table for single-qubit Paulis: (a, b) -> (phase, result)
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


def multiply_paulis(a: str, b: str) -> tuple[complex, str]:
    """Product of two Pauli strings as ``(phase, string)``."""
    phase = 1 + 0j
    out = []
    for pa, pb in zip(a, b):
        f, p = _PRODUCT[(pa, pb)]
        phase *= f
        out.append(p)
    return phase, "".join(out)


class FermionOperator:
    """Linear combination of products of fermionic ladder operators.

    Each term is a tuple of ``(mode, dagger)`` factors applied left to right
    as written, e.g. ``((0, True), (1, False))`` is ``c0^dag c1``.  Spin
    orbitals are interleaved: mode ``2i`` is site ``i`` spin up and mode
    ``2i + 1`` is site ``i`` spin down.
    """

    def __init__(self, terms=None):
        self.terms: dict[tuple[tuple[int, bool], ...], float] = {}
        for ops, coeff in (terms or {}).items():
            self.add(ops, coeff)

    def add(self, ops, coeff: float):
        ops = tuple((int(m), bool(d)) for m, d in ops)
        if any(m < 0 for m, _ in ops):
            raise ConfigurationError("mode indices must be non-negative")
        self.terms[ops] = self.terms.get(ops, 0.0) + coeff
        return self

    def __iadd__(self, other: FermionOperator):
        for ops, c in other.terms.items():
            self.add(ops, c)
        return self

    @property
    def max_mode(self) -> int:
        return max((m for ops in self.terms for m, _ in ops), default=-1)

    @classmethod
    def hopping(cls, i: int, j: int, coeff: float) -> FermionOperator:
        """``coeff * (c_i^dag c_j + c_j^dag c_i)``."""
        return cls({((i, True), (j, False)): coeff, ((j, True), (i, False)): coeff})

    @classmethod
    def number(cls, i: int, coeff: float = 1.0) -> FermionOperator:
        return cls({((i, True), (i, False)): coeff})


def _ladder_paulis(mode: int, dagger: bool, n_modes: int) -> dict[str, complex]:
    # c_j = Z..Z (X + iY)/2,  c_j^dag = Z..Z (X - iY)/2
    prefix = "Z" * mode
    suffix = "I" * (n_modes - mode - 1)
    sign = -1 if dagger else 1
    return {prefix + "X" + suffix: 0.5, prefix + "Y" + suffix: sign * 0.5j}


def jordan_wigner(op: FermionOperator, n_modes: int, tol: float = 1e-12) -> Hamiltonian:
    """Map a Hermitian fermion operator onto qubits.

    Raises
    ------
    ConstructionError
        If the mapped operator has imaginary Pauli coefficients above ``tol``,
        i.e. the input was not Hermitian.
    """
    if op.max_mode >= n_modes:
        raise ConfigurationError(f"mode {op.max_mode} out of range for {n_modes} modes")
    identity = "I" * n_modes
    acc: dict[str, complex] = {}
    for ops, coeff in op.terms.items():
        product = {identity: complex(coeff)}
        for mode, dagger in ops:
            factor = _ladder_paulis(mode, dagger, n_modes)
            nxt: dict[str, complex] = {}
            for pa, ca in product.items():
                for pb, cb in factor.items():
                    phase, p = multiply_paulis(pa, pb)
                    nxt[p] = nxt.get(p, 0) + ca * cb * phase
            product = nxt
        for p, c in product.items():
            acc[p] = acc.get(p, 0) + c
    terms = []
    for p, c in acc.items():
        if abs(c.imag) > tol:
            raise ConstructionError(
                f"operator is not Hermitian: imaginary coefficient {c.imag:.3g} on {p}"
            )
        terms.append(PauliTerm(p, c.real))
    return Hamiltonian(n_modes, terms, threshold=tol)


def build_ising(n_qubits: int) -> Hamiltonian:
    """Open ferromagnetic chain ``-sum_i Z_i Z_{i+1}`` without field."""
    if not 2 <= n_qubits <= 14:
        raise ConfigurationError(f"Ising chain needs 2..14 qubits, got {n_qubits}")
    terms = []
    for i in range(n_qubits - 1):
        s = ["I"] * n_qubits
        s[i] = s[i + 1] = "Z"
        terms.append(PauliTerm("".join(s), -1.0))
    return Hamiltonian(n_qubits, terms, metadata={"name": f"ising_{n_qubits}", "e0_reference": -(n_qubits - 1.0)})


def hubbard_fermion_operator(n_sites: int, t: float, u: float, boundary: str = "open") -> FermionOperator:
    if boundary not in ("open", "periodic"):
        raise ConfigurationError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    bonds = [(i, i + 1) for i in range(n_sites - 1)]
    if boundary == "periodic" and n_sites > 2:
        bonds.append((n_sites - 1, 0))
    op = FermionOperator()
    for i, j in bonds:
        for s in (0, 1):
            op += FermionOperator.hopping(2 * i + s, 2 * j + s, -t)
    for i in range(n_sites):
        op.add(((2 * i, True), (2 * i, False), (2 * i + 1, True), (2 * i + 1, False)), u)
    return op


def build_hubbard(n_sites: int, t: float = 1.0, u: float = 1.0, boundary: str = "open") -> Hamiltonian:
    """Jordan-Wigner image of the 1D Fermi-Hubbard chain on ``2 * n_sites`` qubits."""
    if not 2 <= n_sites <= 7:
        raise ConfigurationError(f"Hubbard chain needs 2..7 sites, got {n_sites}")
    h = jordan_wigner(hubbard_fermion_operator(n_sites, t, u, boundary), 2 * n_sites)
    h.metadata = {"name": f"hubbard_{n_sites}_{boundary}", "t": t, "u": u, "e0_reference": None}
    return h


def _hamiltonian_from_dict(data, source: str) -> Hamiltonian:
    if not isinstance(data, dict):
        raise HamiltonianLoadError(f"{source}: top level must be a JSON object")
    try:
        n = int(data["n_qubits"])
        raw_terms = data["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise HamiltonianLoadError(f"{source}: missing or invalid field {exc}") from exc
    offset = float(data.get("identity_offset", 0.0))
    if not math.isfinite(offset):
        raise HamiltonianLoadError(f"{source}: non-finite identity_offset")
    terms = []
    for k, entry in enumerate(raw_terms):
        try:
            pauli, coeff = str(entry["pauli"]), float(entry["coeff"])
        except (KeyError, TypeError, ValueError) as exc:
            raise HamiltonianLoadError(f"{source}: term {k} is malformed ({exc})") from exc
        if len(pauli) != n:
            raise HamiltonianLoadError(f"{source}: term {k} has length {len(pauli)}, expected {n}")
        if not set(pauli) <= PAULI_LETTERS:
            raise HamiltonianLoadError(f"{source}: term {k} has invalid Pauli string {pauli!r}")
        if not math.isfinite(coeff):
            raise HamiltonianLoadError(f"{source}: term {k} has non-finite coefficient")
        terms.append(PauliTerm(pauli, coeff))
    metadata = dict(data.get("metadata") or {})
    metadata.setdefault("e0_reference", None)
    return Hamiltonian(n, terms, offset, metadata=metadata)


def load_hamiltonian(path) -> Hamiltonian:
    """Read a Hamiltonian JSON file.

    Schema::

        {"n_qubits": 4, "identity_offset": -0.09,
         "terms": [{"pauli": "ZZII", "coeff": 0.17}, ...],
         "metadata": {"name": "h2", "e0_reference": -1.137}}
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise HamiltonianLoadError(f"{path}: {exc}") from exc
    return _hamiltonian_from_dict(data, str(path))


def save_hamiltonian(h: Hamiltonian, path) -> None:
    data = {
        "n_qubits": h.n_qubits,
        "identity_offset": h.identity_offset,
        "terms": [{"pauli": t.paulis, "coeff": t.coeff} for t in h.terms],
        "metadata": h.metadata,
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def bundled_hamiltonians() -> list[str]:
    root = resources.files("noisyvqe") / "data" / "hamiltonians"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_bundled(name: str) -> Hamiltonian:
    """Load a shipped molecule, e.g. ``"h2_sto3g_0.735"`` or the alias ``"h2"``."""
    aliases = {"h2": "h2_sto3g_0.735"}
    name = aliases.get(name, name)
    ref = resources.files("noisyvqe") / "data" / "hamiltonians" / f"{name}.json"
    if not ref.is_file():
        raise ConfigurationError(f"no bundled Hamiltonian {name!r}; have {bundled_hamiltonians()}")
    return _hamiltonian_from_dict(json.loads(ref.read_text()), name)


def build_model(name: str, **params) -> Hamiltonian:
    """Dispatch ``ising`` / ``hubbard`` / bundled molecule / file path."""
    if name == "ising":
        return build_ising(int(params.get("qubits", params.get("n_qubits", 5))))
    if name == "hubbard":
        return build_hubbard(
            int(params.get("sites", params.get("n_sites", 2))),
            float(params.get("t", 1.0)),
            float(params.get("u", 1.0)),
            params.get("boundary", "open"),
        )
    if name.endswith(".json"):
        return load_hamiltonian(name)
    return load_bundled(name)
