"""Utility functions for the robust game solver.

This module contains the one-dimensional maximization helpers shared by the
solvers, quadratic-structure detection, number formatting for emitters and
the error-handling decorator used by the tool server.
"""

import inspect
import logging
import math
from dataclasses import dataclass
from functools import lru_cache, wraps
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from .config import GOLDEN_TOLERANCE, SIGNIFICANT_DIGITS
from .exceptions import RobustGameError

logger: logging.Logger = logging.getLogger(__name__)

INV_PHI: float = (math.sqrt(5.0) - 1.0) / 2.0

# Probe abscissae in local coordinates u in [-1, 1].
_PROBE_U: np.ndarray = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
_QUADRATIC_RESIDUAL: float = 1e-9
_MAX_GOLDEN_STEPS: int = 200


# ============================================================================
# ONE-DIMENSIONAL MAXIMIZATION
# ============================================================================


def golden_section_maximize(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = GOLDEN_TOLERANCE,
) -> Tuple[float, float]:
    """Maximize a unimodal function on ``[lo, hi]`` by golden-section search.

    Parameters
    ----------
    f : Callable[[float], float]
        Function to maximize.
    lo, hi : float
        Bracket, ``lo <= hi``.
    tol : float
        Target bracket width.

    Returns
    -------
    Tuple[float, float]
        ``(x, f(x))``. On equal interior values the left point is kept, so
        plateaus resolve toward the smaller argument.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(_MAX_GOLDEN_STEPS):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def grid_then_golden(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    resolution: int,
    tol: float = GOLDEN_TOLERANCE,
) -> Tuple[float, float]:
    """Maximize ``f`` on ``[lo, hi]`` with a grid scan plus golden refinement.

    ``f`` is evaluated on whole arrays. The first grid maximizer fixes a
    two-cell bracket which golden-section search then refines; the refined
    point is only kept when it strictly improves on the grid.

    Returns
    -------
    Tuple[float, float]
        ``(x, f(x))``.
    """
    if hi <= lo:
        return lo, float(np.asarray(f(np.array([lo])))[0])
    xs = np.linspace(lo, hi, resolution)
    values = np.broadcast_to(f(xs), xs.shape)
    k = int(np.argmax(values))
    left = xs[max(k - 1, 0)]
    right = xs[min(k + 1, resolution - 1)]

    def scalar(t: float) -> float:
        return float(np.asarray(f(np.array([t])))[0])

    x, value = golden_section_maximize(scalar, float(left), float(right), tol)
    if value > values[k]:
        return x, value
    return float(xs[k]), float(values[k])


# ============================================================================
# QUADRATIC STRUCTURE
# ============================================================================


@dataclass(frozen=True)
class LocalFrame:
    """Affine map ``t = mid + half * u`` onto an action interval."""

    lo: float
    hi: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half(self) -> float:
        return 0.5 * (self.hi - self.lo)

    def probes(self) -> np.ndarray:
        return self.mid + self.half * _PROBE_U

    def to_action(self, u: float) -> float:
        return min(max(self.mid + self.half * u, self.lo), self.hi)


@lru_cache(maxsize=1)
def _probe_pseudo_inverse() -> Tuple[np.ndarray, np.ndarray]:
    vandermonde = np.vander(_PROBE_U, 3)
    return vandermonde, np.linalg.pinv(vandermonde)


def fit_quadratic(values: np.ndarray) -> Optional[np.ndarray]:
    """Fit exact quadratics to rows of probe values.

    Parameters
    ----------
    values : np.ndarray
        Shape ``(k, 5)``: each row holds a function sampled at the five probe
        abscissae of a :class:`LocalFrame`.

    Returns
    -------
    Optional[np.ndarray]
        Shape ``(k, 3)`` coefficients ``(A, B, C)`` of ``A u^2 + B u + C`` in
        local coordinates, or None when some row is not quadratic.
    """
    vandermonde, pseudo_inverse = _probe_pseudo_inverse()
    coefficients = values @ pseudo_inverse.T
    residual = np.abs(coefficients @ vandermonde.T - values)
    scale = 1.0 + np.max(np.abs(values), axis=1, keepdims=True)
    if np.any(residual > _QUADRATIC_RESIDUAL * scale):
        return None
    return coefficients


def real_roots(a: float, b: float, c: float) -> List[float]:
    """Real roots of ``a u^2 + b u + c``; empty for the zero polynomial."""
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return []
    if abs(a) <= 1e-12 * scale:
        if abs(b) <= 1e-12 * scale:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        if disc > -1e-12 * max(b * b, abs(4.0 * a * c)):
            return [-b / (2.0 * a)]
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return [0.0]
    return [q / a, c / q]


# ============================================================================
# FORMATTING
# ============================================================================


def format_float(value: float) -> float:
    """Round ``value`` to the configured number of significant digits."""
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def round_floats(obj: Any) -> Any:
    """Recursively round every float inside dicts, lists and tuples."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, dict):
        return {key: round_floats(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(item) for item in obj]
    return obj


def parse_profile(text: str) -> Tuple[float, ...]:
    """Parse a comma-separated action profile such as ``"1,0.5"``.

    Raises
    ------
    ValueError
        If an entry is not a number.
    """
    return tuple(float(part) for part in text.split(",") if part.strip())


def max_norm(a: Sequence[float], b: Sequence[float]) -> float:
    """Largest coordinate-wise distance between two profiles."""
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


# ============================================================================
# ERROR HANDLING
# ============================================================================


def handle_solver_errors(
    default_return: Any = None
) -> Callable[..., Any]:
    """Decorator to turn solver errors into a fallback return value.

    Parameters
    ----------
    default_return : Any, default None
        Value returned when a :class:`RobustGameError` (or ``ValueError``) is
        raised. If callable, it is called with the exception and its result
        is returned.

    Returns
    -------
    Callable[..., Any]
        Decorator function. Works for plain and ``async`` functions.
    """
    def fallback(func: Callable[..., Any], err: Exception) -> Any:
        logger.error("Error in %s: %s", func.__name__, str(err))
        return default_return(err) if callable(default_return) else default_return

    def decorator(func: Callable[..., Any]) -> Callable[..., Any]:
        if inspect.iscoroutinefunction(func):
            @wraps(func)
            async def async_wrapper(*args: Any, **kwargs: Any) -> Any:
                try:
                    return await func(*args, **kwargs)
                except (RobustGameError, ValueError) as e:
                    return fallback(func, e)
            return async_wrapper

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            try:
                return func(*args, **kwargs)
            except (RobustGameError, ValueError) as e:
                return fallback(func, e)
        return wrapper
    return decorator
