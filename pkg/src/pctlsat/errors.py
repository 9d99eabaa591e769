"""Exception types shared across the package."""

from __future__ import annotations


class PctlSatError(Exception):
    """Base class for all errors raised by this package."""


class ConstantsError(PctlSatError):
    """Geometry constants violate one of their constraints."""


class DomainError(PctlSatError):
    """An argument lies outside the domain of a geometric map."""


class CapExceeded(PctlSatError):
    """An iteration or state-count cap was hit."""


class ParseError(PctlSatError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ChainError(PctlSatError):
    """Malformed Markov chain (non-stochastic row, unknown target, ...)."""


class MachineError(PctlSatError):
    """Malformed Minsky machine, product or computation."""


class UnsupportedInput(PctlSatError):
    """Input is valid but outside what the builders can handle (e.g. aperiodic runs)."""
