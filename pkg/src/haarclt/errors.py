"""Exception hierarchy. The CLI maps each class to an exit status."""


class HaarCLTError(Exception):
    exit_status = 1


class DomainError(HaarCLTError, ValueError):
    """An argument lies outside the operation's domain."""

    exit_status = 2


class PrecisionError(DomainError):
    """A requested binary digit is beyond the precision of the input."""


class DegenerateExpansionError(DomainError):
    """All retained Haar coefficients vanish (sigma_M == 0)."""


class BudgetError(HaarCLTError):
    """Enumeration or quadrature would exceed the configured budget."""

    exit_status = 3


class NumericError(HaarCLTError, ArithmeticError):
    """Quadrature failed to reach the requested tolerance."""

    exit_status = 4

    def __init__(self, message, achieved=None, estimate=None):
        super().__init__(message)
        self.achieved = achieved
        self.estimate = estimate
