"""Exception hierarchy for the robust game solver.

Every error raised on purpose by the library derives from
:class:`RobustGameError` and from the closest builtin exception, so callers
can catch either the domain error or the generic one.
"""

from typing import Optional


class RobustGameError(Exception):
    """Base class for all solver errors."""


# ============================================================================
# EXPRESSIONS
# ============================================================================


class ExpressionSyntaxError(RobustGameError, ValueError):
    """Raised when an expression cannot be parsed.

    Parameters
    ----------
    message : str
        Human-readable description of the problem.
    offset : int
        Byte offset into the UTF-8 encoded source where the problem starts.
    """

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExpressionEvaluationError(RobustGameError, ArithmeticError):
    """Raised when an expression cannot be evaluated to a finite real."""


class UnboundVariableError(ExpressionEvaluationError, KeyError):
    """Raised when an evaluated variable has no binding."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unbound variable"


class DivisionByZeroError(ExpressionEvaluationError, ZeroDivisionError):
    """Raised when an expression divides by zero."""


# ============================================================================
# GAMES
# ============================================================================


class GameFileError(RobustGameError, ValueError):
    """Raised when a game file or game definition is invalid.

    Parameters
    ----------
    message : str
        Diagnostic text.
    field : Optional[str], default None
        JSON path of the offending field, e.g. ``player[1].delta``.
    """

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        text = f"{field}: {message}" if field else message
        super().__init__(text)
        self.field = field


# ============================================================================
# SOLVERS
# ============================================================================


class BestReplyError(RobustGameError, ValueError):
    """Raised when the corner-point reply cannot be assembled."""


class NoCornerCertifiedError(BestReplyError):
    """No corner of the scaled polytope certifies its own maximizer."""


class AmbiguousTieError(BestReplyError):
    """More than two corners certify with distinct maximizers."""


class NotAnEquilibriumError(RobustGameError, ValueError):
    """Raised when a profile expected to be an ROE is not one."""


class EmbeddingError(RobustGameError, ValueError):
    """Raised when an epsilon-Nash point cannot be embedded as an ROE."""


class ContinuationError(RobustGameError, ValueError):
    """Raised when an equilibrium path cannot be started or probed."""


class CournotParameterError(RobustGameError, ValueError):
    """Raised when duopoly parameters violate the model assumptions."""


class CournotCaseError(RobustGameError, ValueError):
    """Raised when a duopoly quantity is requested in the wrong case."""
