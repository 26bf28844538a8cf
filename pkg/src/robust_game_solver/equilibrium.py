"""Robust-optimization equilibria, opportunity costs and epsilon-Nash checks.

A profile is a robust-optimization equilibrium (ROE) when every player's
action is a worst-case best reply to the others. Two-player games are
searched exhaustively by scanning the composed reply gap
``phi(x1) = x1 - R1(R2(x1))`` on a grid; games with more players use damped
best-response iteration from low-discrepancy starts.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.stats import qmc

from .config import (
    DAMPING,
    DEDUPE_RADIUS,
    DEFAULT_GRID_RESOLUTION,
    MAX_ITERATIONS,
    MULTISTART_COUNT,
    ROE_TOLERANCE,
)
from .exceptions import EmbeddingError, NotAnEquilibriumError
from .expr import combine
from .game import Game, IndicatorPenalty, PayoffForm, Profile, UncertaintyPolytope
from .utils import max_norm
from .worstcase import (
    best_reply_maximin,
    maximize_envelope,
    nominal_best_reply,
    opponents_of,
    with_own,
    worst_case_payoff,
    worst_case_values,
)

logger: logging.Logger = logging.getLogger(__name__)

_BISECTION_STEPS: int = 60
_EPSILON_SLACK: float = 1e-9
_EMBEDDING_RESIDUAL: float = 1e-9


# ============================================================================
# REPORTS
# ============================================================================


class EquilibriumKind(str, Enum):
    POINT = "point"
    INTERVAL = "interval"


@dataclass(frozen=True)
class EquilibriumReport:
    """One ROE, either a point or a continuum between two profiles.

    For an interval continuum ``costs`` and ``epsilon`` are evaluated at the
    start endpoint ``profile``.
    """

    kind: EquilibriumKind
    profile: Profile
    residual: float
    costs: Tuple[float, ...]
    end_profile: Optional[Profile] = None

    @property
    def epsilon(self) -> float:
        return max(self.costs) if self.costs else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "profile": list(self.profile),
            "end_profile": list(self.end_profile) if self.end_profile is not None else None,
            "residual": self.residual,
            "costs": list(self.costs),
            "epsilon": self.epsilon,
        }


@dataclass(frozen=True)
class RoeOptions:
    """Numerical knobs of the ROE search."""

    resolution: int = DEFAULT_GRID_RESOLUTION
    tolerance: float = ROE_TOLERANCE
    dedupe_radius: float = DEDUPE_RADIUS
    starts: int = MULTISTART_COUNT
    max_iterations: int = MAX_ITERATIONS
    damping: float = DAMPING

    def __post_init__(self) -> None:
        if self.resolution < 3:
            raise ValueError("resolution must be at least 3")
        if self.tolerance <= 0.0 or self.dedupe_radius <= 0.0:
            raise ValueError("tolerance and dedupe radius must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must be in (0, 1]")


@dataclass(frozen=True)
class StartFailure:
    """A multi-start run that did not converge."""

    start: Profile
    last: Profile
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {"start": list(self.start), "last": list(self.last), "residual": self.residual}


@dataclass(frozen=True)
class RoeSearch:
    equilibria: Tuple[EquilibriumReport, ...]
    failures: Tuple[StartFailure, ...] = field(default=())


# ============================================================================
# RESIDUALS
# ============================================================================


def best_replies(g: Game, x: Sequence[float],
                 resolution: int = DEFAULT_GRID_RESOLUTION) -> Tuple[float, ...]:
    """Every player's worst-case best reply to the rest of ``x``."""
    return tuple(
        best_reply_maximin(g, i, opponents_of(x, i), resolution) for i in range(g.n)
    )


def roe_residual(g: Game, x: Sequence[float],
                 resolution: int = DEFAULT_GRID_RESOLUTION) -> float:
    """``max_i |x_i - R_i(x_-i)|``."""
    replies = best_replies(g, x, resolution)
    return max_norm(x, replies)


def verify_roe(
    g: Game,
    x: Sequence[float],
    tol: float = ROE_TOLERANCE,
    resolution: int = DEFAULT_GRID_RESOLUTION,
) -> Tuple[bool, float]:
    """Check the fixed-point condition at ``x``.

    Returns
    -------
    Tuple[bool, float]
        Whether the residual is within ``tol``, and the residual.
    """
    if len(x) != g.n:
        raise ValueError(f"profile has {len(x)} actions, game has {g.n} players")
    residual = roe_residual(g, x, resolution)
    return residual <= tol, residual


# ============================================================================
# OPPORTUNITY COSTS
# ============================================================================


def opportunity_cost(
    g: Game, i: int, x_minus_i: Any, resolution: int = DEFAULT_GRID_RESOLUTION
) -> float:
    """Nominal payoff lost by playing the worst-case best reply.

    Parameters
    ----------
    g : Game
        The robust game; player ``i`` uses its own level ``delta[i]``.
    i : int
        Player index.
    x_minus_i : Any
        Opponent actions.
    resolution : int
        Grid size for non-quadratic payoffs.

    Returns
    -------
    float
        ``max nominal payoff - nominal payoff at the robust reply``, clamped
        at zero.
    """
    if g.delta[i] == 0.0:
        return 0.0
    robust = best_reply_maximin(g, i, x_minus_i, resolution)
    _, best = nominal_best_reply(g, i, x_minus_i, resolution)
    achieved = float(g.nominal_payoff(i, with_own(x_minus_i, i, robust)))
    return max(0.0, best - achieved)


def opportunity_costs(
    g: Game, x: Sequence[float], resolution: int = DEFAULT_GRID_RESOLUTION
) -> Tuple[float, ...]:
    """Every player's opportunity cost at profile ``x``."""
    return tuple(opportunity_cost(g, i, opponents_of(x, i), resolution) for i in range(g.n))


def epsilon_of_roe(
    g: Game,
    x: Sequence[float],
    tol: float = 1e-6,
    resolution: int = DEFAULT_GRID_RESOLUTION,
) -> float:
    """Largest opportunity cost at an ROE.

    The ROE is an epsilon-Nash equilibrium of the nominal game for exactly
    this epsilon.

    Raises
    ------
    NotAnEquilibriumError
        If ``x`` fails :func:`verify_roe` at ``tol``.
    """
    ok, residual = verify_roe(g, x, tol, resolution)
    if not ok:
        raise NotAnEquilibriumError(
            f"profile {tuple(x)} is not an ROE (residual {residual:.3g} > {tol:g})"
        )
    return max(opportunity_costs(g, x, resolution))


def deviation_gains(
    g: Game, x: Sequence[float], resolution: int = DEFAULT_GRID_RESOLUTION
) -> Tuple[float, ...]:
    """Per-player nominal payoff gain of the best unilateral deviation."""
    gains = []
    for i in range(g.n):
        _, best = nominal_best_reply(g, i, opponents_of(x, i), resolution)
        current = float(g.nominal_payoff(i, [float(v) for v in x]))
        gains.append(max(0.0, best - current))
    return tuple(gains)


def verify_epsilon_nash(
    g: Game, x: Sequence[float], eps: float, grid: int = DEFAULT_GRID_RESOLUTION
) -> bool:
    """Whether no player gains more than ``eps`` by deviating under nominal payoffs.

    The game's uncertainty levels are ignored; payoffs are evaluated at each
    player's nominal parameter.
    """
    gains = deviation_gains(g, x, grid)
    logger.debug("Deviation gains at %s: %s", tuple(x), gains)
    return all(gain <= eps + _EPSILON_SLACK for gain in gains)


def cost_upper_bound(
    g: Game, i: int, x_minus_i: Any, resolution: int = DEFAULT_GRID_RESOLUTION
) -> float:
    """Linear-in-delta bound ``delta_i * max_x (rho^0 - rho^1)`` on the opportunity cost.

    The gap between the nominal and the full-set worst-case payoff is the
    largest of ``(nominal - v) . c(x)`` over the unscaled vertices ``v``, so
    each vertex is maximized over the own interval separately.
    """
    level = g.delta[i]
    if level == 0.0:
        return 0.0
    polytope = g.uncertainty[i]
    gaps = polytope.nominal_array() - polytope.vertex_array()
    exact = g.payoffs[i].penalty is None
    largest = 0.0
    for gap in gaps:
        def pieces(own: np.ndarray, gap: np.ndarray = gap) -> np.ndarray:
            rows = g.coefficient_rows(i, with_own(x_minus_i, i, own))
            return np.tensordot(gap.reshape(1, -1), rows[1:], axes=(1, 0))

        _, value = maximize_envelope(pieces, g.actions[i], resolution, exact=exact)
        largest = max(largest, value)
    return level * largest


def cost_bound_certificate(
    g: Game, x: Sequence[float], resolution: int = DEFAULT_GRID_RESOLUTION
) -> float:
    """An epsilon valid for ``x`` from the linear bound: ``max_i delta_i * E_i``."""
    return max(cost_upper_bound(g, i, opponents_of(x, i), resolution) for i in range(g.n))


# ============================================================================
# ROE SEARCH
# ============================================================================


def _report(
    g: Game,
    profile: Profile,
    resolution: int,
    end_profile: Optional[Profile] = None,
) -> EquilibriumReport:
    residual = roe_residual(g, profile, resolution)
    kind = EquilibriumKind.POINT
    if end_profile is not None:
        kind = EquilibriumKind.INTERVAL
        residual = max(residual, roe_residual(g, end_profile, resolution))
    return EquilibriumReport(
        kind=kind,
        profile=profile,
        residual=residual,
        costs=opportunity_costs(g, profile, resolution),
        end_profile=end_profile,
    )


class ComposedGap:
    """``phi(x1) = x1 - R1(R2(x1))`` with player 2's reply kept."""

    def __init__(self, g: Game, resolution: int) -> None:
        self.g = g
        self.resolution = resolution

    def reply(self, x1: float) -> float:
        return best_reply_maximin(self.g, 1, x1, self.resolution)

    def __call__(self, x1: float) -> float:
        x2 = self.reply(x1)
        return x1 - best_reply_maximin(self.g, 0, x2, self.resolution)

    def profile(self, x1: float) -> Profile:
        return (float(x1), float(self.reply(x1)))


def _near_runs(near: np.ndarray) -> List[Tuple[int, int]]:
    runs: List[Tuple[int, int]] = []
    start: Optional[int] = None
    for k, flag in enumerate(near):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            runs.append((start, k - 1))
            start = None
    if start is not None:
        runs.append((start, len(near) - 1))
    return runs


def _boundary(gap: ComposedGap, inside: float, outside: float, tol: float) -> float:
    """Last point from ``inside`` toward ``outside`` where ``|phi| <= tol``."""
    for _ in range(_BISECTION_STEPS):
        if abs(outside - inside) <= tol:
            break
        mid = 0.5 * (inside + outside)
        if abs(gap(mid)) <= tol:
            inside = mid
        else:
            outside = mid
    return inside


def _scan_two_players(g: Game, options: RoeOptions) -> List[Tuple[Profile, Optional[Profile]]]:
    gap = ComposedGap(g, options.resolution)
    xs = g.actions[0].grid(options.resolution)
    phis = np.array([gap(float(x)) for x in xs])
    near = np.abs(phis) <= options.tolerance
    found: List[Tuple[Profile, Optional[Profile]]] = []

    for first, last in _near_runs(near):
        if last - first + 1 >= 3:
            lo = float(xs[first]) if first == 0 else _boundary(
                gap, float(xs[first]), float(xs[first - 1]), options.tolerance)
            hi = float(xs[last]) if last == len(xs) - 1 else _boundary(
                gap, float(xs[last]), float(xs[last + 1]), options.tolerance)
            found.append((gap.profile(lo), gap.profile(hi)))
            logger.debug("Continuum of equilibria for x1 in [%g, %g]", lo, hi)
            continue
        k = first + int(np.argmin(np.abs(phis[first:last + 1])))
        x1 = float(xs[k])
        left, right = max(first - 1, 0), min(last + 1, len(xs) - 1)
        if phis[left] * phis[right] < 0.0:
            x1 = brentq(gap, float(xs[left]), float(xs[right]), xtol=options.tolerance * 1e-4)
        found.append((gap.profile(x1), None))

    for k in range(len(xs) - 1):
        if near[k] or near[k + 1] or phis[k] * phis[k + 1] >= 0.0:
            continue
        x1 = brentq(gap, float(xs[k]), float(xs[k + 1]), xtol=options.tolerance * 1e-4)
        found.append((gap.profile(x1), None))
    return found


def _halton_starts(g: Game, count: int) -> np.ndarray:
    lows = np.array([action.lo for action in g.actions])
    highs = np.array([action.hi for action in g.actions])
    points = qmc.Halton(d=g.n, scramble=False).random(count)
    return lows + points * (highs - lows)


def damped_iteration(
    g: Game, start: Sequence[float], options: RoeOptions
) -> Tuple[Profile, float, bool]:
    """Damped simultaneous best-response iteration from ``start``.

    Returns the last profile, its residual and whether it converged.
    """
    x = np.array(start, dtype=float)
    residual = np.inf
    for _ in range(options.max_iterations):
        replies = np.array(best_replies(g, x, options.resolution))
        residual = float(np.max(np.abs(x - replies)))
        if residual <= options.tolerance:
            return tuple(float(v) for v in x), residual, True
        x = (1.0 - options.damping) * x + options.damping * replies
    return tuple(float(v) for v in x), residual, False


def _dedupe(
    candidates: List[Tuple[Profile, Optional[Profile]]], radius: float
) -> List[Tuple[Profile, Optional[Profile]]]:
    kept: List[Tuple[Profile, Optional[Profile]]] = []
    for profile, end in sorted(candidates, key=lambda item: item[0]):
        if any(
            max_norm(profile, other) < radius
            and (end is None) == (other_end is None)
            for other, other_end in kept
        ):
            continue
        kept.append((profile, end))
    return kept


def search_roe(g: Game, options: Optional[RoeOptions] = None) -> RoeSearch:
    """Search for every ROE of ``g``.

    Parameters
    ----------
    g : Game
        Validated robust game.
    options : Optional[RoeOptions]
        Search settings; defaults from the configuration.

    Returns
    -------
    RoeSearch
        Equilibria sorted lexicographically by profile, plus the starts that
        failed to converge (only for three or more players).
    """
    options = options or RoeOptions()
    failures: List[StartFailure] = []

    if g.n == 1:
        candidates: List[Tuple[Profile, Optional[Profile]]] = [
            ((best_reply_maximin(g, 0, (), options.resolution),), None)
        ]
    elif g.n == 2:
        candidates = _scan_two_players(g, options)
    else:
        candidates = []
        for start in _halton_starts(g, options.starts):
            profile, residual, converged = damped_iteration(g, start, options)
            if converged:
                candidates.append((profile, None))
            else:
                failures.append(StartFailure(tuple(float(v) for v in start), profile, residual))
                logger.warning(
                    "Start %s did not converge after %d iterations (residual %.3g)",
                    tuple(start), options.max_iterations, residual,
                )

    reports: List[EquilibriumReport] = []
    for profile, end in _dedupe(candidates, options.dedupe_radius):
        report = _report(g, profile, options.resolution, end)
        if report.residual > options.tolerance:
            logger.debug("Discarding %s: residual %.3g", profile, report.residual)
            continue
        reports.append(report)
    logger.info("Found %d equilibria in game %r", len(reports), g.name)
    return RoeSearch(equilibria=tuple(reports), failures=tuple(failures))


def find_roe(g: Game, options: Optional[RoeOptions] = None) -> List[EquilibriumReport]:
    """Every ROE of ``g``, sorted lexicographically.

    Examples
    --------
    The two-player example game has seven point equilibria at delta = 1 and
    the single point ``(8/11, 8/11)`` at delta = 0.
    """
    return list(search_roe(g, options).equilibria)


# ============================================================================
# EPSILON-NASH EMBEDDING
# ============================================================================


@dataclass(frozen=True)
class EmbeddingCertificate:
    """A robust game in which a given epsilon-Nash point is an ROE."""

    game: Game
    point: Profile
    delta: float
    bound: float
    epsilon: float
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": list(self.point),
            "delta": self.delta,
            "H": self.bound,
            "epsilon": self.epsilon,
            "residual": self.residual,
            "game": self.game.to_dict(),
        }


def _embedded_game(nominal: Game, x: Profile, eps: float, bound: float) -> Game:
    payoffs = []
    for i, payoff in enumerate(nominal.payoffs):
        weights = nominal.uncertainty[i].nominal
        folded = combine(
            (1.0, payoff.constant),
            *[(weights[k - 1], expression) for k, expression in payoff.terms],
        )
        payoffs.append(PayoffForm(folded, (), IndicatorPenalty(1, x[i])))
    level = eps / bound
    return Game(
        actions=nominal.actions,
        payoffs=tuple(payoffs),
        uncertainty=tuple(
            UncertaintyPolytope(((0.0,), (bound,)), (0.0,)) for _ in range(nominal.n)
        ),
        delta=(level,) * nominal.n,
        name=f"{nominal.name}-embedded" if nominal.name else "embedded",
    )


def _deviation_excess(g: Game, x: Profile, resolution: int) -> float:
    excess = 0.0
    for i in range(g.n):
        others = opponents_of(x, i)
        own = g.actions[i].grid(resolution)
        peak, _ = nominal_best_reply(g, i, others, resolution)
        candidates = np.append(own, peak)
        values = worst_case_values(g, i, candidates, others)
        anchored, _ = worst_case_payoff(g, i, x)
        excess = max(excess, float(np.max(values)) - anchored)
    return excess


def embed_epsilon_nash(
    nominal: Game,
    x: Sequence[float],
    eps: float,
    H: float,
    resolution: int = DEFAULT_GRID_RESOLUTION,
) -> EmbeddingCertificate:
    """Build a robust game in which the epsilon-Nash point ``x`` is an ROE.

    Every payoff becomes ``f_i - alpha_i * 1{x_i != x*_i}`` with
    ``alpha_i`` in ``[0, H]`` and nominal ``0``; at level ``eps / H`` the
    worst case off ``x*_i`` is ``f_i - eps``, so no deviation beats ``x*``.

    Raises
    ------
    EmbeddingError
        If the game is not nominal, ``eps`` is negative, ``H <= eps`` for a
        positive ``eps``, ``x`` is not epsilon-Nash, or the direct check of the
        constructed game fails.
    """
    point = tuple(float(v) for v in x)
    if any(level != 0.0 for level in nominal.delta):
        raise EmbeddingError("the game to embed must have every delta equal to 0")
    if len(point) != nominal.n:
        raise EmbeddingError(f"profile has {len(point)} actions, game has {nominal.n} players")
    if eps < 0.0:
        raise EmbeddingError(f"eps must be non-negative, got {eps}")
    if eps > 0.0 and H <= eps:
        raise EmbeddingError(f"H must exceed eps ({H} <= {eps})")
    if not verify_epsilon_nash(nominal, point, eps, resolution):
        raise EmbeddingError(f"profile {point} is not a {eps:g}-Nash equilibrium")

    if eps == 0.0:
        game, level = nominal, 0.0
    else:
        game, level = _embedded_game(nominal, point, eps, H), eps / H

    residual = _deviation_excess(game, point, resolution)
    if residual > _EMBEDDING_RESIDUAL:
        raise EmbeddingError(
            f"embedded profile {point} fails the ROE check (gain {residual:.3g})"
        )
    logger.info("Embedded %s as an ROE at delta %.6g (H=%g)", point, level, H)
    return EmbeddingCertificate(
        game=game, point=point, delta=level, bound=H, epsilon=eps, residual=residual
    )
