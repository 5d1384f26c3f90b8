# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Errors raised by kfree-points."""


class KFreePointsError(RuntimeError):
    """Base class for custom errors raised by this library."""


class ParameterError(KFreePointsError):
    """Raised when an operation is called outside of its preconditions."""


class EmptyTableError(ParameterError):
    """Raised when a prime table would be empty."""


class DivergenceError(ParameterError):
    """Raised when a zeta value is requested at a pole or in the divergent range."""


class NotCoprimeError(ParameterError):
    """Raised when a congruence system has moduli with a common factor."""

    def __init__(self, first: int, second: int):
        super().__init__(f"moduli {first} and {second} are not coprime")
        self.pair = (first, second)


class NotInSpectrumError(ParameterError):
    """Raised when a denominator lies outside of the support of the diffraction."""


class LatticeError(ParameterError):
    """Raised for malformed lattice descriptions."""


class BudgetExceededError(KFreePointsError):
    """Raised when a computation would exceed a configured resource budget."""

    def __init__(self, message: str, required: int = None):
        super().__init__(message)
        self.required = required
