"""Closed-form robust Cournot duopoly.

Two symmetric firms earn ``(a - gamma * q_opp - b * q) * q``. The slopes
``(b, gamma)`` are uncertain on the segment joining ``(b_hi, gamma_lo)`` and
``(b_lo, gamma_hi)``, which contains the nominal point ``(b_hat, gamma_hat)``.
This module gives the scaled segment, the piecewise robust reaction, the
equilibrium case analysis and worst-case profits in closed form, and builds
the same duopoly as a generic :class:`~robust_game_solver.game.Game` so the
numerical solvers can be checked against it.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from .config import FEASIBILITY_TOLERANCE, STRUCTURAL_TOLERANCE
from .exceptions import CournotCaseError, CournotParameterError
from .expr import parse_expression
from .game import ActionInterval, Game, PayoffForm, UncertaintyPolytope

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CournotParams:
    """Demand intercept, nominal slopes, slope segment and uncertainty level.

    Raises
    ------
    CournotParameterError
        If a parameter is negative, the segment is degenerate, ``2 b_hat``
        does not exceed ``gamma_hat``, the nominal point is off the segment
        or ``delta`` is outside ``[0, 1]``.
    """

    a: float
    b_hat: float
    gamma_hat: float
    b_lo: float
    b_hi: float
    gamma_lo: float
    gamma_hi: float
    delta: float = 1.0

    def __post_init__(self) -> None:
        values = (self.a, self.b_hat, self.gamma_hat, self.b_lo, self.b_hi,
                  self.gamma_lo, self.gamma_hi)
        if any(not math.isfinite(v) or v < 0.0 for v in values):
            raise CournotParameterError("all parameters must be finite and non-negative")
        if not 0.0 <= self.delta <= 1.0:
            raise CournotParameterError(f"delta out of range: {self.delta}")
        if self.b_hi <= self.b_lo:
            raise CournotParameterError("b_hi must exceed b_lo")
        if self.gamma_hi <= self.gamma_lo:
            raise CournotParameterError("gamma_hi must exceed gamma_lo")
        if 2.0 * self.b_hat <= self.gamma_hat:
            raise CournotParameterError("2 * b_hat must exceed gamma_hat")
        if not self.b_lo <= self.b_hat <= self.b_hi:
            raise CournotParameterError("b_hat must lie between b_lo and b_hi")
        if abs(self.segment_gamma(self.b_hat) - self.gamma_hat) > FEASIBILITY_TOLERANCE:
            raise CournotParameterError(
                f"(b_hat, gamma_hat) = ({self.b_hat}, {self.gamma_hat}) is not on the "
                "uncertainty segment"
            )

    @property
    def b_spread(self) -> float:
        return self.b_hi - self.b_lo

    @property
    def gamma_spread(self) -> float:
        return self.gamma_hi - self.gamma_lo

    def segment_gamma(self, b: float) -> float:
        """Substitutability on the uncertainty segment at slope ``b``."""
        return self.gamma_lo + (self.b_hi - b) * self.gamma_spread / self.b_spread

    def with_delta(self, delta: float) -> "CournotParams":
        return CournotParams(self.a, self.b_hat, self.gamma_hat, self.b_lo, self.b_hi,
                             self.gamma_lo, self.gamma_hi, delta)

    def to_dict(self) -> Dict[str, float]:
        return {
            "a": self.a, "b_hat": self.b_hat, "gamma_hat": self.gamma_hat,
            "b_lo": self.b_lo, "b_hi": self.b_hi, "gamma_lo": self.gamma_lo,
            "gamma_hi": self.gamma_hi, "delta": self.delta,
        }


@dataclass(frozen=True)
class ScaledParams:
    b_hi: float
    b_lo: float
    gamma_hi: float
    gamma_lo: float


@dataclass(frozen=True)
class Thresholds:
    q_lo: float
    q_hi: float
    q_max: float


def scaled_params(p: CournotParams) -> ScaledParams:
    """Endpoints of the segment scaled toward the nominal point by ``delta``.

    Examples
    --------
    With ``a=10, b_hat=0.6, gamma_hat=0.8, b_lo=0.2, b_hi=1.0, gamma_lo=0.2,
    gamma_hi=1.4`` and ``delta=0.9`` the result is ``(0.96, 0.24, 1.34, 0.26)``.
    """
    d = p.delta
    return ScaledParams(
        b_hi=(1.0 - d) * p.b_hat + d * p.b_hi,
        b_lo=(1.0 - d) * p.b_hat + d * p.b_lo,
        gamma_hi=(1.0 - d) * p.gamma_hat + d * p.gamma_hi,
        gamma_lo=(1.0 - d) * p.gamma_hat + d * p.gamma_lo,
    )


def thresholds(p: CournotParams) -> Thresholds:
    """Opponent outputs at which the robust reaction changes branch."""
    s = scaled_params(p)
    db, dg = p.b_spread, p.gamma_spread
    return Thresholds(
        q_lo=p.a * db / (2.0 * s.b_hi * dg + s.gamma_lo * db),
        q_hi=p.a * db / (2.0 * s.b_lo * dg + s.gamma_hi * db),
        q_max=p.a / s.gamma_hi if s.gamma_hi > 0.0 else math.inf,
    )


# ============================================================================
# REACTIONS
# ============================================================================


def nominal_reaction(p: CournotParams, q_opp: float) -> float:
    """Best reply under the nominal slopes, ``max(0, (a - gamma_hat q) / (2 b_hat))``."""
    return max(0.0, (p.a - p.gamma_hat * q_opp) / (2.0 * p.b_hat))


def robust_reaction(p: CournotParams, q_opp: float) -> float:
    """Worst-case best reply to the opponent output ``q_opp``.

    Four branches: the high-``b`` interior reply below ``q_lo``, the kink
    line ``(gamma_spread / b_spread) q_opp`` on ``[q_lo, q_hi]``, the
    low-``b`` interior reply up to ``q_max`` and zero beyond. ``delta = 0``
    uses the nominal reaction.
    """
    if q_opp < 0.0:
        raise CournotParameterError(f"opponent output must be non-negative, got {q_opp}")
    if p.delta == 0.0:
        return nominal_reaction(p, q_opp)
    s = scaled_params(p)
    t = thresholds(p)
    if q_opp < t.q_lo:
        return (p.a - s.gamma_lo * q_opp) / (2.0 * s.b_hi)
    if q_opp <= t.q_hi:
        return p.gamma_spread / p.b_spread * q_opp
    if q_opp < t.q_max:
        return (p.a - s.gamma_hi * q_opp) / (2.0 * s.b_lo)
    return 0.0


def nominal_nash(p: CournotParams) -> Tuple[float, float]:
    """Unique Cournot-Nash equilibrium of the nominal duopoly."""
    q = p.a / (2.0 * p.b_hat + p.gamma_hat)
    return q, q


# ============================================================================
# CASE ANALYSIS
# ============================================================================


class CournotCase(str, Enum):
    NOMINAL = "nominal"
    UNIQUE_HIGH_SLOPE = "1"
    DIAGONAL_CONTINUUM = "2"
    UNIQUE_LOW_SLOPE = "3i"
    ANTI_DIAGONAL_CONTINUUM = "3ii"
    THREE_EQUILIBRIA = "3iii"


@dataclass(frozen=True)
class DeltaStar:
    """Level above which the asymmetric equilibria exist.

    ``interior`` is true iff the level lies strictly inside ``(0, 1)``,
    which holds exactly when ``2 b_lo < gamma_hi``.
    """

    value: float
    interior: bool


def delta_star(p: CournotParams) -> DeltaStar:
    """Level at which ``gamma_hi(delta) = 2 b_lo(delta)``.

    Raises
    ------
    CournotCaseError
        If the segment is not steeper in ``gamma`` than in ``b``.
    """
    if p.gamma_spread - p.b_spread <= STRUCTURAL_TOLERANCE:
        raise CournotCaseError("delta* is defined only when gamma_hi - gamma_lo > b_hi - b_lo")
    nominal_gap = 2.0 * p.b_hat - p.gamma_hat
    denominator = p.gamma_hi - 2.0 * p.b_lo + nominal_gap
    if denominator <= 0.0:
        return DeltaStar(math.inf, False)
    value = nominal_gap / denominator
    return DeltaStar(value, 0.0 < value < 1.0)


def classify(p: CournotParams) -> CournotCase:
    """Which equilibrium regime ``p`` falls in."""
    if p.delta == 0.0:
        return CournotCase.NOMINAL
    difference = p.b_spread - p.gamma_spread
    if abs(difference) <= STRUCTURAL_TOLERANCE:
        return CournotCase.DIAGONAL_CONTINUUM
    if difference > 0.0:
        return CournotCase.UNIQUE_HIGH_SLOPE
    threshold = delta_star(p).value
    if abs(p.delta - threshold) <= STRUCTURAL_TOLERANCE:
        return CournotCase.ANTI_DIAGONAL_CONTINUUM
    if p.delta < threshold:
        return CournotCase.UNIQUE_LOW_SLOPE
    return CournotCase.THREE_EQUILIBRIA


@dataclass(frozen=True)
class CournotEquilibrium:
    """A point equilibrium, or a segment from ``profile`` to ``end_profile``."""

    profile: Tuple[float, float]
    end_profile: Optional[Tuple[float, float]] = None

    @property
    def is_continuum(self) -> bool:
        return self.end_profile is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "interval" if self.is_continuum else "point",
            "profile": list(self.profile),
            "end_profile": list(self.end_profile) if self.end_profile is not None else None,
        }


@dataclass(frozen=True)
class CournotRoeSet:
    case: CournotCase
    equilibria: Tuple[CournotEquilibrium, ...]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case": self.case.value,
            "equilibria": [eq.to_dict() for eq in self.equilibria],
        }


def _symmetric_low_slope(p: CournotParams) -> float:
    s = scaled_params(p)
    return p.a / (2.0 * s.b_lo + s.gamma_hi)


def roe_set(p: CournotParams) -> CournotRoeSet:
    """All robust equilibria of the duopoly, sorted lexicographically.

    Examples
    --------
    The case-3 parameters at ``delta = 0.9`` give the symmetric point
    ``5.494505`` and the pair ``(4.016064, 6.024096)`` with its mirror.
    """
    case = classify(p)
    s = scaled_params(p)
    t = thresholds(p)
    equilibria: List[CournotEquilibrium]
    if case is CournotCase.NOMINAL:
        equilibria = [CournotEquilibrium(nominal_nash(p))]
    elif case is CournotCase.UNIQUE_HIGH_SLOPE:
        q = p.a / (2.0 * s.b_hi + s.gamma_lo)
        equilibria = [CournotEquilibrium((q, q))]
    elif case is CournotCase.DIAGONAL_CONTINUUM:
        equilibria = [CournotEquilibrium((t.q_lo, t.q_lo), (t.q_hi, t.q_hi))]
    elif case is CournotCase.UNIQUE_LOW_SLOPE:
        q = _symmetric_low_slope(p)
        equilibria = [CournotEquilibrium((q, q))]
    elif case is CournotCase.ANTI_DIAGONAL_CONTINUUM:
        total = p.a / (2.0 * s.b_lo)
        equilibria = [CournotEquilibrium((t.q_hi, total - t.q_hi), (total - t.q_hi, t.q_hi))]
    else:
        q = _symmetric_low_slope(p)
        denominator = 2.0 * s.b_lo * p.b_spread + s.gamma_hi * p.gamma_spread
        low = p.a * p.b_spread / denominator
        high = p.a * p.gamma_spread / denominator
        equilibria = [
            CournotEquilibrium((low, high)),
            CournotEquilibrium((q, q)),
            CournotEquilibrium((high, low)),
        ]
    logger.debug("Cournot case %s with %d equilibria", case.value, len(equilibria))
    return CournotRoeSet(case, tuple(sorted(equilibria, key=lambda eq: eq.profile)))


# ============================================================================
# PROFITS
# ============================================================================


def nominal_profit(p: CournotParams, q_i: float, q_opp: float) -> float:
    return (p.a - p.gamma_hat * q_opp - p.b_hat * q_i) * q_i


def worst_case_profit(p: CournotParams, q_i: float, q_opp: float) -> float:
    """Smallest profit over the two endpoints of the scaled segment."""
    s = scaled_params(p)
    return min(
        (p.a - s.gamma_lo * q_opp - s.b_hi * q_i) * q_i,
        (p.a - s.gamma_hi * q_opp - s.b_lo * q_i) * q_i,
    )


def opportunity_cost(p: CournotParams, q_opp: float) -> float:
    """Nominal profit given up by reacting robustly to ``q_opp``."""
    best = nominal_profit(p, nominal_reaction(p, q_opp), q_opp)
    robust = nominal_profit(p, robust_reaction(p, q_opp), q_opp)
    return max(0.0, best - robust)


def profit_gap(p: CournotParams) -> List[Dict[str, Any]]:
    """Profits at each equilibrium relative to the nominal Cournot-Nash profit.

    Continua contribute both endpoints. Each entry holds the profile, both
    firms' worst-case and nominal profits, and the nominal profit at the
    Cournot-Nash equilibrium.
    """
    q_ne, _ = nominal_nash(p)
    nash = nominal_profit(p, q_ne, q_ne)
    rows: List[Dict[str, Any]] = []
    for equilibrium in roe_set(p).equilibria:
        profiles = [equilibrium.profile]
        if equilibrium.end_profile is not None:
            profiles.append(equilibrium.end_profile)
        for q1, q2 in profiles:
            worst = (worst_case_profit(p, q1, q2), worst_case_profit(p, q2, q1))
            nominal = (nominal_profit(p, q1, q2), nominal_profit(p, q2, q1))
            rows.append({
                "profile": [q1, q2],
                "worst_case_profit": list(worst),
                "nominal_profit": list(nominal),
                "nash_profit": nash,
                "worst_case_gap": [w - nash for w in worst],
                "nominal_gap": [v - nash for v in nominal],
            })
    return rows


# ============================================================================
# GENERIC GAME
# ============================================================================


def as_game(p: CournotParams, q_max: float = 20.0) -> Game:
    """The duopoly as a two-vertex robust game on ``[0, q_max]`` per firm.

    Parameter 1 is the own slope ``b`` and parameter 2 the substitutability
    ``gamma``.
    """
    if q_max <= 0.0:
        raise CournotParameterError("q_max must be positive")
    polytope = UncertaintyPolytope(
        vertices=((p.b_hi, p.gamma_lo), (p.b_lo, p.gamma_hi)),
        nominal=(p.b_hat, p.gamma_hat),
    )
    payoffs = []
    for own in ("x1", "x2"):
        payoffs.append(PayoffForm(
            constant=parse_expression(f"{float(p.a)!r}*{own}"),
            terms=(
                (1, parse_expression(f"-{own}^2")),
                (2, parse_expression("-x1*x2")),
            ),
        ))
    return Game(
        actions=(ActionInterval(0.0, q_max), ActionInterval(0.0, q_max)),
        payoffs=tuple(payoffs),
        uncertainty=(polytope, polytope),
        delta=(p.delta, p.delta),
        name="cournot",
    )
