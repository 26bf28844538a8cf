"""Uncertainty-level sweeps and equilibrium path tracing.

A path starts at an ROE for some level delta and follows it downward in
small steps, re-solving locally at each level. A path that reaches delta = 0
ends at a Nash equilibrium of the nominal game, its counterpart; a path that
finds no equilibrium within the jump tolerance is broken.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .config import (
    BREAK_RESOLUTION,
    DEFAULT_GRID_RESOLUTION,
    JUMP_TOLERANCE,
    ROE_TOLERANCE,
    TRACE_STEP,
)
from .equilibrium import (
    ComposedGap,
    EquilibriumReport,
    RoeOptions,
    damped_iteration,
    find_roe,
    opportunity_costs,
    roe_residual,
    verify_epsilon_nash,
    verify_roe,
)
from .exceptions import ContinuationError
from .game import Game, Profile
from .utils import max_norm
from .worstcase import best_reply_maximin

logger: logging.Logger = logging.getLogger(__name__)

_LOCAL_POINTS: int = 65
_COUNTERPART_EPSILON: float = 1e-8
_CONTINUITY_FLOOR: float = 1e-6


class PathStatus(str, Enum):
    REACHED_ZERO = "reached-zero"
    BROKEN = "broken"


@dataclass(frozen=True)
class PathPoint:
    delta: float
    profile: Profile
    residual: float
    epsilon: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "profile": list(self.profile),
            "residual": self.residual,
            "epsilon": self.epsilon,
        }


@dataclass(frozen=True)
class PathReport:
    """An equilibrium path traced toward delta = 0.

    Attributes
    ----------
    points : Tuple[PathPoint, ...]
        Levels in strictly decreasing order with the equilibrium found there.
    status : PathStatus
        ``REACHED_ZERO`` or ``BROKEN``.
    break_delta : Optional[float]
        For broken paths, the lowest level at which the path still exists,
        localized by bisection.
    step, jump_tol : float
        The settings the path was traced with.
    """

    points: Tuple[PathPoint, ...]
    status: PathStatus
    break_delta: Optional[float]
    step: float
    jump_tol: float

    @property
    def counterpart(self) -> bool:
        return self.status is PathStatus.REACHED_ZERO

    @property
    def terminal(self) -> PathPoint:
        return self.points[-1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "counterpart": self.counterpart,
            "break_delta": self.break_delta,
            "step": self.step,
            "jump_tol": self.jump_tol,
            "points": [point.to_dict() for point in self.points],
        }


# ============================================================================
# SWEEP
# ============================================================================


def sweep_delta(
    g: Game, deltas: Sequence[float], options: Optional[RoeOptions] = None
) -> Dict[float, List[EquilibriumReport]]:
    """Solve the game at every level in ``deltas``, all players sharing it.

    Raises
    ------
    ValueError
        If ``deltas`` is not sorted in increasing order.
    GameFileError
        If a level lies outside ``[0, 1]``.
    """
    levels = [float(d) for d in deltas]
    if any(b < a for a, b in zip(levels, levels[1:])):
        raise ValueError("deltas must be sorted in increasing order")
    results: Dict[float, List[EquilibriumReport]] = {}
    for level in levels:
        results[level] = find_roe(g.with_delta(level), options)
        logger.debug("delta %.6g: %d equilibria", level, len(results[level]))
    return results


def delta_levels(start: float, stop: float, steps: int) -> List[float]:
    """``steps`` evenly spaced levels from ``start`` to ``stop``, rounded to 12 digits."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if start > stop:
        raise ValueError(f"empty delta range [{start}, {stop}]")
    if steps == 1:
        return [round(start, 12)]
    return [round(float(v), 12) for v in np.linspace(start, stop, steps)]


# ============================================================================
# TRACE
# ============================================================================


def _local_two_player(
    g: Game, previous: Profile, jump_tol: float, resolution: int, tol: float
) -> Optional[Profile]:
    gap = ComposedGap(g, resolution)
    x1 = previous[0]
    if abs(gap(x1)) <= tol:
        candidates = [x1]
    else:
        action = g.actions[0]
        xs = np.linspace(max(action.lo, x1 - jump_tol), min(action.hi, x1 + jump_tol),
                         _LOCAL_POINTS)
        phis = np.array([gap(float(x)) for x in xs])
        candidates = [float(x) for x, phi in zip(xs, phis) if abs(phi) <= tol]
        for k in range(len(xs) - 1):
            if phis[k] * phis[k + 1] < 0.0:
                candidates.append(brentq(gap, float(xs[k]), float(xs[k + 1]), xtol=tol * 1e-4))
    profiles = [gap.profile(c) for c in candidates]
    profiles = [p for p in profiles if max_norm(p, previous) <= jump_tol]
    if not profiles:
        return None
    return min(profiles, key=lambda p: max_norm(p, previous))


def local_solve(
    g: Game,
    previous: Profile,
    jump_tol: float,
    resolution: int = DEFAULT_GRID_RESOLUTION,
    tol: float = ROE_TOLERANCE,
) -> Optional[Profile]:
    """The ROE of ``g`` closest to ``previous`` within ``jump_tol``, if any."""
    if g.n == 1:
        candidate: Optional[Profile] = (best_reply_maximin(g, 0, (), resolution),)
    elif g.n == 2:
        return _local_two_player(g, previous, jump_tol, resolution, tol)
    else:
        profile, _, converged = damped_iteration(
            g, previous, RoeOptions(resolution=resolution, tolerance=tol)
        )
        candidate = profile if converged else None
    if candidate is None or max_norm(candidate, previous) > jump_tol:
        return None
    return candidate


def _point(g: Game, level: float, profile: Profile, resolution: int) -> PathPoint:
    leveled = g.with_delta(level)
    return PathPoint(
        delta=level,
        profile=profile,
        residual=roe_residual(leveled, profile, resolution),
        epsilon=max(opportunity_costs(leveled, profile, resolution)),
    )


def _locate_break(
    g: Game, good: float, bad: float, profile: Profile, jump_tol: float,
    resolution: int, tol: float,
) -> float:
    while good - bad > BREAK_RESOLUTION:
        mid = 0.5 * (good + bad)
        found = local_solve(g.with_delta(mid), profile, jump_tol, resolution, tol)
        if found is None:
            bad = mid
        else:
            good, profile = mid, found
    return good


def _levels_below(start: float, step: float) -> List[float]:
    levels: List[float] = []
    k = 1
    while True:
        level = round(start - k * step, 12)
        if level <= 0.0:
            break
        levels.append(level)
        k += 1
    if start > 0.0:
        levels.append(0.0)
    return levels


def trace_equilibrium(
    g: Game,
    start_profile: Sequence[float],
    start_delta: float,
    step: float = TRACE_STEP,
    jump_tol: float = JUMP_TOLERANCE,
    resolution: int = DEFAULT_GRID_RESOLUTION,
    tol: float = ROE_TOLERANCE,
    start_tol: float = 1e-5,
) -> PathReport:
    """Follow an ROE from ``start_delta`` down to delta = 0.

    Parameters
    ----------
    g : Game
        The robust game; every player's level is set to the traced level.
    start_profile : Sequence[float]
        An ROE at ``start_delta``.
    start_delta : float
        Starting level.
    step : float
        Level decrement per step.
    jump_tol : float
        Largest action change accepted between consecutive levels.
    resolution : int
        Best-reply grid size.
    tol : float
        Equilibrium tolerance of the local re-solves.
    start_tol : float
        Tolerance of the start-profile check.

    Returns
    -------
    PathReport
        The traced path. Reaching delta = 0 requires the endpoint to be a
        Nash equilibrium of the nominal game.

    Raises
    ------
    ContinuationError
        If the start profile is not an ROE or the settings are invalid.
    """
    if step <= 0.0 or jump_tol <= 0.0:
        raise ContinuationError("step and jump_tol must be positive")
    start = tuple(float(v) for v in start_profile)
    game = g.with_delta(start_delta)
    ok, residual = verify_roe(game, start, start_tol, resolution)
    if not ok:
        raise ContinuationError(
            f"start profile {start} is not an ROE at delta {start_delta} "
            f"(residual {residual:.3g})"
        )
    refined = local_solve(game, start, jump_tol, resolution, tol) or start
    points = [_point(g, float(start_delta), refined, resolution)]

    for level in _levels_below(float(start_delta), step):
        previous = points[-1]
        found = local_solve(g.with_delta(level), previous.profile, jump_tol, resolution, tol)
        if found is None:
            break_delta = _locate_break(
                g, previous.delta, level, previous.profile, jump_tol, resolution, tol
            )
            logger.info("Path from %s broke near delta %.4f", start, break_delta)
            return PathReport(tuple(points), PathStatus.BROKEN, break_delta, step, jump_tol)
        points.append(_point(g, level, found, resolution))

    terminal = points[-1]
    if not verify_epsilon_nash(g.nominal(), terminal.profile, _COUNTERPART_EPSILON, resolution):
        logger.warning("Endpoint %s is not a nominal Nash equilibrium", terminal.profile)
        return PathReport(tuple(points), PathStatus.BROKEN, terminal.delta, step, jump_tol)
    logger.info("Path from %s reached delta 0 at %s", start, terminal.profile)
    return PathReport(tuple(points), PathStatus.REACHED_ZERO, None, step, jump_tol)


def cost_continuity_probe(
    g: Game, path: PathReport, resolution: int = DEFAULT_GRID_RESOLUTION
) -> List[Tuple[float, float]]:
    """Opportunity-cost epsilon along a path with a counterpart.

    Returns the ``(delta, epsilon)`` sequence and checks that epsilon
    vanishes at delta = 0: the last value may not exceed
    ``max(1e-6, 2 * previous)``.

    Raises
    ------
    ContinuationError
        If the path has no counterpart or epsilon does not vanish.
    """
    if not path.counterpart:
        raise ContinuationError("path has no Nash equilibrium counterpart")
    trace = [
        (point.delta, max(opportunity_costs(g.with_delta(point.delta), point.profile, resolution)))
        for point in path.points
    ]
    last = trace[-1][1]
    previous = trace[-2][1] if len(trace) > 1 else 0.0
    if last > max(_CONTINUITY_FLOOR, 2.0 * previous):
        raise ContinuationError(
            f"epsilon {last:.3g} at delta {trace[-1][0]} does not vanish (previous {previous:.3g})"
        )
    return trace
