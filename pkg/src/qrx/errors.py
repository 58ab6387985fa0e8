"""Shared exception types."""


class TruncationError(ValueError):
    """A requested Fock cutoff is too small for the requested tolerance."""


class ConvergenceError(RuntimeError):
    """An infinite series or quadrature failed to meet its tail bound."""
