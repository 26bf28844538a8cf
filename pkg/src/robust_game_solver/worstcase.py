"""Worst-case payoffs, worst-case best replies and worst-case frontiers.

Payoffs are affine in the uncertain parameters, so the minimum over the
scaled uncertainty set is attained at one of its extreme points and the
worst-case payoff is a plain minimum over the scaled vertex list.

Best replies maximize that minimum over the player's own action interval.
When every vertex payoff is exactly quadratic in the own action, the
maximizer is picked among a finite candidate set (interval ends, stationary
points of each piece, crossings of two pieces); otherwise a grid scan with
golden-section refinement is used.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEFAULT_GRID_RESOLUTION, FEASIBILITY_TOLERANCE, GOLDEN_TOLERANCE
from .exceptions import AmbiguousTieError, NoCornerCertifiedError
from .game import ActionInterval, Game, Profile
from .utils import LocalFrame, fit_quadratic, grid_then_golden, real_roots

logger: logging.Logger = logging.getLogger(__name__)

Opponents = Union[float, Sequence[float]]

_TIE_TOLERANCE: float = 1e-12


def opponents_of(x: Sequence[float], i: int) -> Tuple[float, ...]:
    """Drop player ``i`` from profile ``x``."""
    return tuple(float(v) for j, v in enumerate(x) if j != i)


def with_own(x_minus_i: Opponents, i: int, own: Any) -> List[Any]:
    """Insert the own action of player ``i`` into an opponent profile."""
    others = [x_minus_i] if np.isscalar(x_minus_i) else list(x_minus_i)
    profile: List[Any] = [float(v) for v in others]
    profile.insert(i, own)
    return profile


# ============================================================================
# WORST-CASE PAYOFF
# ============================================================================


def worst_case_payoff(g: Game, i: int, x: Sequence[float]) -> Tuple[float, FrozenSet[int]]:
    """Worst-case payoff of player ``i`` at profile ``x``.

    Parameters
    ----------
    g : Game
        The robust game.
    i : int
        Player index (0-based).
    x : Sequence[float]
        Full action profile.

    Returns
    -------
    Tuple[float, FrozenSet[int]]
        The minimum payoff over the scaled vertices and the indices of all
        vertices within the feasibility tolerance of it.
    """
    values = g.vertex_payoffs(i, [float(v) for v in x])
    low = float(np.min(values))
    active = frozenset(int(k) for k in np.flatnonzero(values <= low + FEASIBILITY_TOLERANCE))
    return low, active


def worst_case_values(g: Game, i: int, own: np.ndarray, x_minus_i: Opponents) -> np.ndarray:
    """Worst-case payoff of player ``i`` for an array of own actions."""
    values = g.vertex_payoffs(i, with_own(x_minus_i, i, own))
    return np.broadcast_to(np.min(values, axis=0), np.shape(own))


# ============================================================================
# ONE-DIMENSIONAL MAXIMIN
# ============================================================================


def _quadratic_pieces(
    pieces: Callable[[np.ndarray], np.ndarray], frame: LocalFrame
) -> Optional[np.ndarray]:
    values = np.asarray(pieces(frame.probes()))
    return fit_quadratic(values.reshape(values.shape[0], -1))


def _candidates(pieces: np.ndarray) -> List[float]:
    points = {-1.0, 1.0}
    for a, b, _ in pieces:
        if a < 0.0:
            points.add(-b / (2.0 * a))
    for first, second in combinations(range(len(pieces)), 2):
        a, b, c = pieces[first] - pieces[second]
        points.update(real_roots(float(a), float(b), float(c)))
    return sorted(u for u in points if -1.0 <= u <= 1.0)


def maximize_envelope(
    pieces: Callable[[np.ndarray], np.ndarray],
    action: ActionInterval,
    resolution: int = DEFAULT_GRID_RESOLUTION,
    tol: float = GOLDEN_TOLERANCE,
    exact: bool = True,
) -> Tuple[float, float]:
    """Maximize the lower envelope of finitely many functions of one action.

    Parameters
    ----------
    pieces : Callable[[np.ndarray], np.ndarray]
        Maps an array of own actions of shape ``(k,)`` to the piece values,
        shape ``(m, k)``.
    action : ActionInterval
        Interval to search.
    resolution : int
        Grid size for the non-quadratic path.
    tol : float
        Golden-section tolerance for the non-quadratic path.
    exact : bool
        Try the quadratic candidate path first.

    Returns
    -------
    Tuple[float, float]
        ``(argmax, max)``; ties resolve to the smaller action.
    """
    def objective(own: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.min(pieces(own), axis=0), np.shape(own))

    if action.hi <= action.lo:
        return action.lo, float(objective(np.array([action.lo]))[0])

    frame = LocalFrame(action.lo, action.hi)
    coefficients = _quadratic_pieces(pieces, frame) if exact else None
    if coefficients is None:
        return grid_then_golden(objective, action.lo, action.hi, resolution, tol)

    points = np.array(sorted({frame.to_action(u) for u in _candidates(coefficients)}))
    values = objective(points)
    best = float(np.max(values))
    k = int(np.argmax(values >= best - _TIE_TOLERANCE * (1.0 + abs(best))))
    return float(points[k]), float(values[k])


def maximize_min(
    g: Game,
    i: int,
    x_minus_i: Opponents,
    parameters: np.ndarray,
    resolution: int = DEFAULT_GRID_RESOLUTION,
    tol: float = GOLDEN_TOLERANCE,
) -> Tuple[float, float]:
    """Maximize ``min_k f_i(parameters[k]; ., x_-i)`` over the own interval.

    Parameters
    ----------
    g : Game
        The robust game.
    i : int
        Player index.
    x_minus_i : Opponents
        Opponent actions in player order (a float for two-player games).
    parameters : np.ndarray
        Parameter rows, shape ``(m, nu)``.
    resolution : int
        Grid size for the non-quadratic path.
    tol : float
        Golden-section tolerance for the non-quadratic path.

    Returns
    -------
    Tuple[float, float]
        ``(argmax, max)``; ties resolve to the smaller action.
    """
    def pieces(own: np.ndarray) -> np.ndarray:
        values = g.payoffs_at(i, with_own(x_minus_i, i, own), parameters)
        return np.broadcast_to(values, (len(parameters),) + np.shape(own))

    exact = g.payoffs[i].penalty is None
    return maximize_envelope(pieces, g.actions[i], resolution, tol, exact)


def best_reply_maximin(
    g: Game,
    i: int,
    x_minus_i: Opponents,
    resolution: int = DEFAULT_GRID_RESOLUTION,
    tol: float = GOLDEN_TOLERANCE,
) -> float:
    """Worst-case best reply: the own action maximizing the worst-case payoff.

    Examples
    --------
    In the two-player example game with delta = 1, the reply to 0.5 is the
    kink 1.0 and the reply to 1.2 is 0.0.
    """
    x, _ = maximize_min(g, i, x_minus_i, g.scaled_vertices(i), resolution, tol)
    return x


def nominal_best_reply(
    g: Game,
    i: int,
    x_minus_i: Opponents,
    resolution: int = DEFAULT_GRID_RESOLUTION,
) -> Tuple[float, float]:
    """Maximizer and maximum of the nominal payoff against ``x_minus_i``."""
    nominal = g.uncertainty[i].nominal_array().reshape(1, -1)
    return maximize_min(g, i, x_minus_i, nominal, resolution)


def best_reply_corner(
    g: Game,
    i: int,
    x_minus_i: Opponents,
    resolution: int = DEFAULT_GRID_RESOLUTION,
) -> float:
    """Corner-point worst-case best reply.

    For every corner ``alpha`` of the scaled uncertainty set, ``g(alpha)`` is
    the maximizer of the payoff at that corner and ``h(alpha)`` is 1 when
    ``alpha`` is itself a worst case at ``g(alpha)``. The reply is
    ``sum g*h - sum_{a < b} g(a) h(a) h(b)``.

    Raises
    ------
    NoCornerCertifiedError
        If no corner certifies; the maximin optimum then sits at a kink.
    AmbiguousTieError
        If more than two corners certify with different maximizers.
    """
    corners = g.scaled_vertices(i)
    maximizers = np.array([
        maximize_min(g, i, x_minus_i, corner.reshape(1, -1), resolution)[0]
        for corner in corners
    ])
    certified = np.zeros(len(corners))
    for k, own in enumerate(maximizers):
        values = g.vertex_payoffs(i, with_own(x_minus_i, i, float(own)))
        if values[k] <= np.min(values) + FEASIBILITY_TOLERANCE:
            certified[k] = 1.0

    count = int(certified.sum())
    if count == 0:
        raise NoCornerCertifiedError(
            f"no corner certifies a reply for player {i + 1} against {x_minus_i}"
        )
    if count > 2:
        chosen = maximizers[certified == 1.0]
        if np.ptp(chosen) > FEASIBILITY_TOLERANCE:
            raise AmbiguousTieError(
                f"{count} corners certify distinct replies {sorted(chosen.tolist())}"
            )
        return float(chosen[0])

    reply = float(np.sum(maximizers * certified))
    for first, second in combinations(range(len(corners)), 2):
        reply -= maximizers[first] * certified[first] * certified[second]
    return reply


def best_reply_with_fallback(
    g: Game, i: int, x_minus_i: Opponents, resolution: int = DEFAULT_GRID_RESOLUTION
) -> Tuple[float, str]:
    """Corner reply when it certifies, else the maximin reply.

    Returns the reply and the method used (``"corner"`` or ``"maximin"``).
    """
    try:
        return best_reply_corner(g, i, x_minus_i, resolution), "corner"
    except (NoCornerCertifiedError, AmbiguousTieError) as err:
        logger.debug("Corner reply unavailable (%s); using maximin", err)
        return best_reply_maximin(g, i, x_minus_i, resolution), "maximin"


# ============================================================================
# FRONTIER
# ============================================================================


@dataclass(frozen=True)
class FrontierReport:
    """Activity of each scaled vertex over a grid of action profiles."""

    player: int
    vertices: Tuple[Tuple[float, ...], ...]
    active: Tuple[bool, ...]
    uniquely_active: Tuple[bool, ...]
    profiles: Tuple[Tuple[Profile, ...], ...]
    resolution: int

    @property
    def frontier(self) -> Tuple[int, ...]:
        """Indices of the vertices that are active somewhere."""
        return tuple(k for k, flag in enumerate(self.active) if flag)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "player": self.player + 1,
            "resolution": self.resolution,
            "vertices": [
                {
                    "vertex": list(vertex),
                    "active": active,
                    "uniquely_active": unique,
                    "profiles": [list(p) for p in profiles],
                }
                for vertex, active, unique, profiles in zip(
                    self.vertices, self.active, self.uniquely_active, self.profiles
                )
            ],
        }


def worst_case_frontier(g: Game, i: int, resolution: int) -> FrontierReport:
    """Which scaled vertices realize the worst case on a full profile grid.

    Parameters
    ----------
    g : Game
        The robust game.
    i : int
        Player index.
    resolution : int
        Points per player axis, at least 2.

    Returns
    -------
    FrontierReport
        Per vertex, whether it is active anywhere, whether it is ever the
        only active vertex, and the profiles where it is active.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axes = [action.grid(resolution) for action in g.actions]
    mesh = np.meshgrid(*axes, indexing="ij")
    values = g.vertex_payoffs(i, mesh).reshape(len(g.scaled_vertices(i)), -1)
    low = np.min(values, axis=0)
    active = values <= low + FEASIBILITY_TOLERANCE
    single = active.sum(axis=0) == 1
    points = np.stack([m.ravel() for m in mesh], axis=1)
    vertices = tuple(tuple(float(v) for v in row) for row in g.scaled_vertices(i))
    return FrontierReport(
        player=i,
        vertices=vertices,
        active=tuple(bool(row.any()) for row in active),
        uniquely_active=tuple(bool((row & single).any()) for row in active),
        profiles=tuple(
            tuple(tuple(float(v) for v in points[k]) for k in np.flatnonzero(row))
            for row in active
        ),
        resolution=resolution,
    )
