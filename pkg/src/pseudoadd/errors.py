"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PseudoaddError(Exception):
    """Base class for every error raised by this package."""


class InputFormatError(PseudoaddError):
    """Malformed user input: expression text, CSV, JSON, inline lists."""


class ExprSyntaxError(InputFormatError):
    def __init__(self, message: str, offset: int, expected: str, source: str = ""):
        self.offset = offset
        self.expected = expected
        self.source = source
        super().__init__(f"syntax error at offset {offset}: {message} (expected {expected})")


class UnknownIdentifierError(InputFormatError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier '{name}' at offset {offset}")


class EvalDomainError(PseudoaddError, ArithmeticError):
    """An expression was evaluated outside its mathematical domain."""

    def __init__(self, reason: str, subexpr: str, var: str, x: float):
        self.reason = reason
        self.subexpr = subexpr
        self.var = var
        self.x = x
        super().__init__(f"{reason} in '{subexpr}' at {var}={x!r}")


class InvalidSpecError(PseudoaddError, ValueError):
    pass


class UnknownPresetError(InvalidSpecError):
    pass


class OutOfDomainError(PseudoaddError, ValueError):
    """q outside the spec's admissible interval, or p outside (0, 1]."""


class ZeroPhiError(PseudoaddError, ZeroDivisionError):
    def __init__(self, q: float):
        self.q = q
        super().__init__(f"phi(q) evaluates to 0 at q={q!r} != 1; spec is invalid there")


class DegenerateSpecError(PseudoaddError):
    pass


class DistributionError(PseudoaddError, ValueError):
    pass


class DivergentExpectationError(PseudoaddError):
    pass


class GridError(PseudoaddError, ValueError):
    pass


class RecoveryError(PseudoaddError):
    pass


class MissingAnchorError(RecoveryError):
    pass


class InvalidTableError(RecoveryError):
    pass


class DegenerateSampleError(RecoveryError):
    pass


class InconsistentSampleError(RecoveryError):
    pass
