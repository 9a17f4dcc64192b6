"""Gradient estimators for ansatz energies."""

from __future__ import annotations

import math

import numpy as np

from ..estimator import Estimator


def parameter_shift_gradient(ansatz, hamiltonian, theta, n_shots=None, mode="exact", rng=None,
                             fd_step=1e-3, **estimator_opts) -> np.ndarray:
    """Two-point gradient estimate, ``2 * d`` energy evaluations.

    For ansatzes whose parameters enter as ``exp(-i theta G / 2)`` with
    ``G**2 = I`` this is the exact shift rule with shift ``pi / 2``;
    otherwise (tVHA) it falls back to central differences with ``fd_step``.
    """
    est = Estimator(ansatz, hamiltonian, mode, n_shots, **estimator_opts)
    theta = np.asarray(theta, dtype=float)
    if ansatz.shift_rule:
        shift, scale = math.pi / 2, 0.5
    else:
        shift, scale = fd_step, 1 / (2 * fd_step)
    grad = np.empty_like(theta)
    for j in range(theta.shape[0]):
        e = np.zeros_like(theta)
        e[j] = shift
        grad[j] = scale * (est(theta + e, rng) - est(theta - e, rng))
    return grad
