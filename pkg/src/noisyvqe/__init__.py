"""Statevector VQE toolkit for studying optimizers under finite-shot noise."""

from .analysis import (
    bias_report,
    empirical_min_bias,
    hessian_diagnostics,
    high_shot_reevaluate,
    landscape_scan,
    predicted_winner_bias,
    tracking_errors,
)
from .ansatz import Ansatz, build_ansatz, build_tvha, build_twolocal
from .estimator import EnergyEstimate, Estimator, estimate, noise_floor, rng_stream
from .exceptions import (
    CapabilityError,
    ConfigurationError,
    ConstructionError,
    DiagnosticError,
    HamiltonianLoadError,
    NoisyVQEError,
)
from .models import build_hubbard, build_ising, build_model, jordan_wigner, load_hamiltonian
from .optimizers import OPTIMIZERS, make_optimizer
from .pauli import Hamiltonian, PauliTerm, exact_ground_energy, expectation, variance
from .vqe import VQE

__version__ = "0.1.0"

__all__ = [
    "Ansatz", "CapabilityError", "ConfigurationError", "ConstructionError", "DiagnosticError",
    "EnergyEstimate", "Estimator", "Hamiltonian", "HamiltonianLoadError", "NoisyVQEError", "OPTIMIZERS",
    "PauliTerm", "VQE", "bias_report", "build_ansatz", "build_hubbard", "build_ising", "build_model",
    "build_tvha", "build_twolocal", "empirical_min_bias", "estimate", "exact_ground_energy", "expectation",
    "hessian_diagnostics", "high_shot_reevaluate", "jordan_wigner", "landscape_scan", "load_hamiltonian",
    "make_optimizer", "noise_floor", "predicted_winner_bias", "rng_stream", "tracking_errors", "variance",
]
