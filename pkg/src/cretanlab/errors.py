"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class CretanError(Exception):
    """Base class for all package errors."""


class MixedRadicandError(CretanError, ValueError):
    """Arithmetic between two quadratic numbers with different radicands."""


class ParseError(CretanError, ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DesignError(CretanError, ValueError):
    """A design, difference set or family request is invalid."""


class ParamsInvalid(DesignError):
    pass


class InvalidDifferenceSet(DesignError):
    pass


class NotPrime(DesignError):
    pass


class WrongResidueClass(DesignError):
    pass


class NotTwinPrimes(DesignError):
    pass


class UnsupportedOrder(DesignError):
    pass


class NoDesignAvailable(CretanError, LookupError):
    pass


class BudgetExceeded(CretanError, RuntimeError):
    def __init__(self, message: str, nodes: int):
        self.nodes = nodes
        super().__init__(message)


class DegenerateParams(CretanError, ValueError):
    pass


class InadmissibleRoot(CretanError, ValueError):
    pass


class NotVerifiedDesign(CretanError, ValueError):
    pass


class NoFeasiblePoint(CretanError, RuntimeError):
    pass


class SingularWithinTolerance(CretanError, ArithmeticError):
    pass
