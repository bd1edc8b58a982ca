"""Exceptions raised by perioscope.

Every exception derives from :class:`PerioscopeError`. Each one also derives from the
builtin exception that best describes it, so ``except ValueError`` still catches a bad
expression and ``except ArithmeticError`` still catches a numerical failure.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Optional


class PerioscopeError(Exception):
    """Base class for all perioscope errors."""


class HypothesisWarning(UserWarning):
    """Issued when a problem violates a hypothesis of the theory behind a solution curve.

    The computation still runs; the warning only says the qualitative guarantees may not hold.
    """


## Expressions

class ExpressionError(PerioscopeError, ValueError):
    """Base class for errors in expression text."""


class ExpressionSyntaxError(ExpressionError):
    """The expression text could not be parsed.

    Parameters:
        offset: byte offset into the (UTF-8 encoded) source where parsing failed.
        expected: description of what the parser expected at that point.
    """

    def __init__(self, offset: int, expected: str, message: Optional[str] = None):
        self.offset = offset
        self.expected = expected
        super().__init__(message or f"syntax error at offset {offset}: expected {expected}")


class UnknownIdentifierError(ExpressionSyntaxError):
    """The expression refers to a name that is not ``t``, ``pi`` or a known function."""

    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(offset, "'t', 'pi' or a function call",
                         f"unknown identifier '{name}' at offset {offset}")


class EvaluationError(PerioscopeError, ArithmeticError):
    """Raised when evaluating an expression does not produce a finite number."""


## Configuration

class ConfigError(PerioscopeError, ValueError):
    """Invalid run configuration.

    Parameters:
        message: what is wrong.
        path: dotted path of the offending field, e.g. ``'problem.e'``.
    """

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        self.message = message
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class ProblemDefinitionError(ConfigError):
    """A problem definition violates one of its invariants (T <= 0, a(t) <= 0, ...)."""


## Numerics

class NumericalError(PerioscopeError, ArithmeticError):
    """Base class for failures of the numerical machinery."""


class DomainError(NumericalError):
    """A nonlinearity was evaluated outside its domain (u <= 0)."""


class IntegrationBlowupError(NumericalError):
    """The integrator produced a non-finite or overflowing state.

    Parameters:
        time: the step end time at which the state stopped being representable.
    """

    def __init__(self, time: float, message: Optional[str] = None):
        self.time = time
        super().__init__(message or f"integration blew up at t={time:.6g}")


class ResonanceError(NumericalError):
    """The homogeneous linear problem has a nontrivial periodic solution."""

    def __init__(self, scaled_determinant: float):
        self.scaled_determinant = scaled_determinant
        super().__init__(f"resonant linear problem (scaled determinant {scaled_determinant:.3e})")


class SingularSystemError(NumericalError):
    """The augmented zero-average system is singular."""

    def __init__(self, determinant: float):
        self.determinant = determinant
        super().__init__(f"singular zero-average system (|det| = {determinant:.3e})")


class PositivityError(NumericalError):
    """A trajectory dropped below the positivity floor.

    Parameters:
        time: where the minimum was found.
        value: the value of u there.
    """

    def __init__(self, time: float, value: float):
        self.time = time
        self.value = value
        super().__init__(f"solution lost positivity: u({time:.6g}) = {value:.6g}")


class ConvergenceError(NumericalError):
    """Newton's method did not reach the required tolerance."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3e})")


## Verification

class VerificationFailure(PerioscopeError):
    """A computed curve failed a verification or shape expectation."""


__all__ = [
    'PerioscopeError',
    'HypothesisWarning',

    'ExpressionError',
    'ExpressionSyntaxError',
    'UnknownIdentifierError',
    'EvaluationError',

    'ConfigError',
    'ProblemDefinitionError',

    'NumericalError',
    'DomainError',
    'IntegrationBlowupError',
    'ResonanceError',
    'SingularSystemError',
    'PositivityError',
    'ConvergenceError',

    'VerificationFailure',
]
