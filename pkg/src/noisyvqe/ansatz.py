"""Parameterized circuits: hardware-efficient TwoLocal and truncated VHA."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError
from .pauli import (
    Hamiltonian,
    PauliTerm,
    apply_pauli_rotation,
    apply_standard_gate,
    basis_state,
)


def qubitwise_commute(a: str, b: str) -> bool:
    """True when on every qubit the letters agree or one of them is ``I``."""
    return all(x == y or x == "I" or y == "I" for x, y in zip(a, b))


def greedy_qwc_groups(strings: list[str]) -> list[list[int]]:
    """First-fit coloring of Pauli strings into qubit-wise commuting groups."""
    groups: list[list[int]] = []
    for k, s in enumerate(strings):
        for g in groups:
            if all(qubitwise_commute(s, strings[j]) for j in g):
                g.append(k)
                break
        else:
            groups.append([k])
    return groups


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``kind`` is a standard gate name (``RY``, ``CX``, ...) or ``"PAULI_GROUP"``
    for a product of commuting Pauli exponentials.  ``param`` is the index
    into the parameter vector, or ``None`` for fixed gates.
    """

    kind: str
    qubits: tuple = ()
    param: int | None = None
    terms: tuple[PauliTerm, ...] = ()


@dataclass(frozen=True)
class Ansatz:
    """An ordered gate list acting on a computational basis reference state."""

    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int
    initial_state: int = 0
    family: str = "custom"
    # True when every parameter enters through a single exp(-i theta G / 2) with G^2 = I
    shift_rule: bool = False
    info: dict = field(default_factory=dict, compare=False)

    def prepare(self, theta) -> np.ndarray:
        return prepare(self, theta)

    def zero_params(self) -> np.ndarray:
        return np.zeros(self.n_params)


def _entangling_pairs(n_qubits: int, entanglement: str) -> list[tuple[int, int]]:
    if entanglement == "full":
        return [(a, b) for a in range(n_qubits) for b in range(a + 1, n_qubits)]
    pairs = [(q, q + 1) for q in range(n_qubits - 1)]
    if entanglement == "circular":
        if n_qubits > 2:
            pairs.append((n_qubits - 1, 0))
    elif entanglement != "linear":
        raise ConfigurationError(f"unknown entanglement {entanglement!r}")
    return pairs


def build_twolocal(
    n_qubits: int,
    reps: int = 1,
    rotation: str = "RY",
    entangler: str = "CX",
    entanglement: str = "linear",
) -> Ansatz:
    """Rotation layer, then ``reps`` x (entangler layer, rotation layer).

    ``n_params = n_qubits * (reps + 1)``; at ``theta = 0`` the circuit is the
    identity on ``|0...0>``.
    """
    if n_qubits < 1:
        raise ConfigurationError("n_qubits must be positive")
    if reps < 1:
        raise ConfigurationError(f"reps must be >= 1, got {reps}")
    rotation, entangler = rotation.upper(), entangler.upper()
    if rotation != "RY":
        raise ConfigurationError(f"unsupported rotation {rotation!r}")
    if entangler not in ("CX", "CZ"):
        raise ConfigurationError(f"unsupported entangler {entangler!r}")
    pairs = _entangling_pairs(n_qubits, entanglement)
    gates = []
    p = 0
    for layer in range(reps + 1):
        if layer > 0:
            gates.extend(Gate(entangler, pair) for pair in pairs)
        for q in range(n_qubits):
            gates.append(Gate(rotation, (q,), p))
            p += 1
    return Ansatz(
        n_qubits,
        tuple(gates),
        p,
        0,
        family="twolocal",
        shift_rule=True,
        info={"reps": reps, "rotation": rotation, "entangler": entangler, "entanglement": entanglement},
    )


def truncate_terms(h: Hamiltonian, p: float) -> list[int]:
    """Indices of the strongest terms carrying a fraction ``p`` of ``sum |c|``.

    Terms are ranked by ``|c|`` descending (ties by original index) and the
    shortest prefix whose cumulative weight reaches ``p * sum |c|`` is kept.
    """
    if not 0 < p <= 1:
        raise ConfigurationError(f"truncation p must be in (0, 1], got {p}")
    if not h.terms:
        raise ConfigurationError("cannot build tVHA from an empty Hamiltonian")
    weights = np.abs(h.coeffs)
    order = sorted(range(len(weights)), key=lambda k: (-weights[k], k))
    target = p * weights.sum()
    kept, total = [], 0.0
    for k in order:
        kept.append(k)
        total += weights[k]
        # relative slack guards p = 1 against summation-order round-off
        if total >= target * (1 - 1e-12):
            break
    return kept


def build_tvha(h: Hamiltonian, p: float = 1.0, n_layers: int = 1, hf_occupation: int | None = None) -> Ansatz:
    """Truncated Variational Hamiltonian Ansatz.

    Retained terms are split into qubit-wise commuting groups (first fit in
    ranked order); every layer has one shared angle per group, applied as
    ``prod_k exp(-i theta c_k P_k)`` over the group's terms.
    """
    if n_layers < 1:
        raise ConfigurationError(f"n_layers must be >= 1, got {n_layers}")
    if hf_occupation is None:
        hf_occupation = int(h.metadata.get("hf_occupation", 0))
    kept = truncate_terms(h, p)
    terms = [h.terms[k] for k in kept]
    groups = greedy_qwc_groups([t.paulis for t in terms])
    gates = []
    n_params = 0
    for _ in range(n_layers):
        for g in groups:
            gates.append(Gate("PAULI_GROUP", param=n_params, terms=tuple(terms[k] for k in g)))
            n_params += 1
    return Ansatz(
        h.n_qubits,
        tuple(gates),
        n_params,
        hf_occupation,
        family="tvha",
        shift_rule=False,
        info={"p": p, "n_layers": n_layers, "n_groups": len(groups), "retained_terms": [h.terms[k].paulis for k in kept]},
    )


def prepare(ansatz: Ansatz, theta) -> np.ndarray:
    """Statevector ``U(theta) |initial_state>``."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != ansatz.n_params:
        raise ConfigurationError(f"expected {ansatz.n_params} parameters, got {theta.shape[0]}")
    psi = basis_state(ansatz.n_qubits, ansatz.initial_state)
    for gate in ansatz.gates:
        if gate.kind == "PAULI_GROUP":
            angle = theta[gate.param]
            for term in gate.terms:
                psi = apply_pauli_rotation(psi, term, angle * term.coeff)
        elif gate.param is None:
            psi = apply_standard_gate(psi, gate.kind, gate.qubits)
        else:
            psi = apply_standard_gate(psi, gate.kind, gate.qubits[0], theta[gate.param])
    return psi


def build_ansatz(family: str, h: Hamiltonian, **opts) -> Ansatz:
    if family == "twolocal":
        return build_twolocal(
            h.n_qubits,
            int(opts.get("reps", 1)),
            opts.get("rotation", "RY"),
            opts.get("entangler", "CX"),
            opts.get("entanglement", "linear"),
        )
    if family == "tvha":
        return build_tvha(h, float(opts.get("p", 1.0)), int(opts.get("layers", opts.get("n_layers", 1))), opts.get("hf_occupation"))
    raise ConfigurationError(f"unknown ansatz family {family!r}")
