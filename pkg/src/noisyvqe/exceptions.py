class NoisyVQEError(Exception):
    """Base class for package errors."""


class ConfigurationError(NoisyVQEError, ValueError):
    """Invalid input, configuration, or dimension mismatch."""


class CapabilityError(NoisyVQEError):
    """Request exceeds a documented size limit."""


class HamiltonianLoadError(ConfigurationError):
    """Malformed Hamiltonian file."""


class ConstructionError(NoisyVQEError, ValueError):
    """An operator could not be built (e.g. non-Hermitian input)."""


class DiagnosticError(NoisyVQEError):
    """Numerical diagnostics produced non-finite values."""
