"""MCP Tools for robust game analysis.

This module contains all tool definitions for the robust games MCP server.
Games are passed either as a catalogue name or as inline game-file JSON;
players are numbered from 1 as in game files.
"""

import logging
from dataclasses import asdict
from typing import Any, Dict, List, Optional

from fastmcp import Context, FastMCP

from .config import DEFAULT_GRID_RESOLUTION, JUMP_TOLERANCE, TRACE_STEP, VALIDATION_SAMPLES
from .continuation import delta_levels
from .continuation import trace_equilibrium as trace_path
from .cournot import (
    CournotCase,
    CournotParams,
    delta_star,
    nominal_nash,
    profit_gap,
    roe_set,
    scaled_params,
    thresholds,
)
from .equilibrium import (
    RoeOptions,
    cost_upper_bound,
    embed_epsilon_nash as embed,
    find_roe,
    search_roe,
)
from .equilibrium import opportunity_cost as cost_of_uncertainty
from .game import Game, validate_assumptions
from .library import list_games as catalogue_names
from .library import resolve_game
from .utils import handle_solver_errors, round_floats
from .worstcase import best_reply_maximin, best_reply_with_fallback
from .worstcase import worst_case_payoff as worst_case

logger: logging.Logger = logging.getLogger(__name__)


def _error_payload(err: Exception) -> Dict[str, Any]:
    return {"success": False, "error": str(err)}


def _load(game: str, delta: Optional[float] = None) -> Game:
    loaded = resolve_game(game)
    return loaded if delta is None else loaded.with_delta(delta)


def _player_index(g: Game, player: int) -> int:
    if not 1 <= player <= g.n:
        raise ValueError(f"player must be between 1 and {g.n}, got {player}")
    return player - 1


def _check_opponents(g: Game, opponents: List[float]) -> None:
    if len(opponents) != g.n - 1:
        raise ValueError(f"expected {g.n - 1} opponent actions, got {len(opponents)}")


# ============================================================================
# Tool Registration
# ============================================================================

def register_tools(mcp: FastMCP) -> None:
    """Register all tools with the MCP server.

    Parameters
    ----------
    mcp : FastMCP
        The FastMCP instance to register tools with.
    """

    @mcp.tool(
        name="list_games",
        description="List the games available in the game catalogue",
        annotations={
            "title": "List Games",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    def list_games() -> Dict:
        """Return the catalogue game names."""
        names = catalogue_names()
        return {"success": True, "total": len(names), "games": names}

    @mcp.tool(
        name="validate_game",
        description=(
            "Check a game against the existence assumptions: action "
            "intervals, nominal point inside the uncertainty set and "
            "concavity in the own action"
        ),
        annotations={
            "title": "Validate Game",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    @handle_solver_errors(default_return=_error_payload)
    def validate_game(game: str, samples: int = VALIDATION_SAMPLES) -> Dict:
        """Validate a game.

        Parameters
        ----------
        game : str
            Catalogue name or inline game JSON.
        samples : int, default VALIDATION_SAMPLES
            Grid size of the concavity check.

        Returns
        -------
        Dict
            ``valid`` flag and the list of findings.
        """
        findings = validate_assumptions(_load(game), samples)
        return round_floats({
            "success": True,
            "valid": not findings,
            "findings": [finding.to_dict() for finding in findings],
        })

    @mcp.tool(
        name="solve_game",
        description=(
            "Find every robust-optimization equilibrium of a game with its "
            "opportunity costs and epsilon"
        ),
        annotations={
            "title": "Solve Game",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    @handle_solver_errors(default_return=_error_payload)
    def solve_game(
        game: str,
        delta: Optional[float] = None,
        resolution: int = DEFAULT_GRID_RESOLUTION,
    ) -> Dict:
        """Solve a game.

        Parameters
        ----------
        game : str
            Catalogue name or inline game JSON.
        delta : Optional[float], default None
            Uncertainty level for every player; the file's levels if None.
        resolution : int, default DEFAULT_GRID_RESOLUTION
            Scan grid size.

        Returns
        -------
        Dict
            Sorted equilibria and any non-converged starts.
        """
        g = _load(game, delta)
        search = search_roe(g, RoeOptions(resolution=resolution))
        return round_floats({
            "success": True,
            "delta": list(g.delta),
            "count": len(search.equilibria),
            "equilibria": [report.to_dict() for report in search.equilibria],
            "failed_starts": [failure.to_dict() for failure in search.failures],
        })

    @mcp.tool(
        name="worst_case_payoff",
        description="Worst-case payoff of one player at an action profile",
        annotations={
            "title": "Worst-Case Payoff",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    @handle_solver_errors(default_return=_error_payload)
    def worst_case_payoff(
        game: str, player: int, profile: List[float], delta: Optional[float] = None
    ) -> Dict:
        """Return the worst-case payoff and the active vertices (1-based)."""
        g = _load(game, delta)
        i = _player_index(g, player)
        if len(profile) != g.n:
            raise ValueError(f"expected {g.n} actions, got {len(profile)}")
        value, active = worst_case(g, i, profile)
        return round_floats({
            "success": True,
            "value": value,
            "active_vertices": sorted(k + 1 for k in active),
        })

    @mcp.tool(
        name="best_reply",
        description=(
            "Worst-case best reply of one player, by the corner-point "
            "algorithm with maximin fallback or by direct maximin"
        ),
        annotations={
            "title": "Best Reply",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    @handle_solver_errors(default_return=_error_payload)
    def best_reply(
        game: str,
        player: int,
        opponents: List[float],
        delta: Optional[float] = None,
        method: str = "corner",
    ) -> Dict:
        """Return the worst-case best reply and the method that produced it."""
        g = _load(game, delta)
        i = _player_index(g, player)
        _check_opponents(g, opponents)
        if method == "maximin":
            reply, used = best_reply_maximin(g, i, opponents), "maximin"
        elif method == "corner":
            reply, used = best_reply_with_fallback(g, i, opponents)
        else:
            raise ValueError(f"unknown method {method!r}")
        return round_floats({"success": True, "reply": reply, "method": used})

    @mcp.tool(
        name="opportunity_cost",
        description=(
            "Opportunity cost of uncertainty for one player against fixed "
            "opponents, with its linear-in-delta upper bound"
        ),
        annotations={
            "title": "Opportunity Cost",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    @handle_solver_errors(default_return=_error_payload)
    def opportunity_cost(
        game: str, player: int, opponents: List[float], delta: Optional[float] = None
    ) -> Dict:
        """Return the opportunity cost and its upper bound."""
        g = _load(game, delta)
        i = _player_index(g, player)
        _check_opponents(g, opponents)
        return round_floats({
            "success": True,
            "cost": cost_of_uncertainty(g, i, opponents),
            "bound": cost_upper_bound(g, i, opponents),
        })

    @mcp.tool(
        name="embed_epsilon_nash",
        description=(
            "Build a robust game in which an epsilon-Nash point of a nominal "
            "game is a robust-optimization equilibrium"
        ),
        annotations={
            "title": "Embed Epsilon-Nash Point",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    @handle_solver_errors(default_return=_error_payload)
    def embed_epsilon_nash(game: str, profile: List[float], eps: float, H: float) -> Dict:
        """Return the embedding certificate; the game is taken at delta 0."""
        certificate = embed(_load(game, 0.0), profile, eps, H)
        return round_floats({"success": True, **certificate.to_dict()})

    @mcp.tool(
        name="cournot_analysis",
        description=(
            "Closed-form analysis of the robust Cournot duopoly: scaled "
            "slopes, reaction thresholds, equilibrium case and profits"
        ),
        annotations={
            "title": "Cournot Analysis",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    @handle_solver_errors(default_return=_error_payload)
    def cournot_analysis(
        a: float,
        b_hat: float,
        gamma_hat: float,
        b_lo: float,
        b_hi: float,
        gamma_lo: float,
        gamma_hi: float,
        delta: float,
    ) -> Dict:
        """Return the duopoly analysis for one parameter set."""
        p = CournotParams(a, b_hat, gamma_hat, b_lo, b_hi, gamma_lo, gamma_hi, delta)
        equilibria = roe_set(p)
        result: Dict[str, Any] = {
            "success": True,
            "params": p.to_dict(),
            "scaled": asdict(scaled_params(p)),
            "thresholds": asdict(thresholds(p)) if delta > 0.0 else None,
            "nominal_nash": list(nominal_nash(p)),
            **equilibria.to_dict(),
            "profits": profit_gap(p),
        }
        if equilibria.case not in (CournotCase.NOMINAL, CournotCase.UNIQUE_HIGH_SLOPE,
                                   CournotCase.DIAGONAL_CONTINUUM):
            star = delta_star(p)
            result["delta_star"] = {"value": star.value, "interior": star.interior}
        return round_floats(result)

    _register_path_tools(mcp)


def _register_path_tools(mcp: FastMCP) -> None:
    """Register the long-running tools that report progress.

    Parameters
    ----------
    mcp : FastMCP
        The FastMCP instance to register tools with.
    """

    @mcp.tool(
        name="sweep_delta",
        description=(
            "Solve a game at evenly spaced uncertainty levels with progress "
            "reporting"
        ),
        annotations={
            "title": "Sweep Uncertainty Level",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    async def sweep_delta(
        game: str,
        ctx: Context,
        start: float = 0.0,
        stop: float = 1.0,
        steps: int = 11,
        resolution: int = DEFAULT_GRID_RESOLUTION,
    ) -> Dict:
        """Solve ``game`` at each of ``steps`` levels from ``start`` to ``stop``.

        Parameters
        ----------
        game : str
            Catalogue name or inline game JSON.
        ctx : Context
            MCP context for logging and progress
        start, stop : float
            Level range.
        steps : int, default 11
            Number of levels.
        resolution : int, default DEFAULT_GRID_RESOLUTION
            Scan grid size.

        Returns
        -------
        Dict
            Equilibria per level.
        """
        try:
            g = _load(game)
            levels = delta_levels(start, stop, steps)
            options = RoeOptions(resolution=resolution)
            await ctx.info(f"Sweeping {len(levels)} levels from {start} to {stop}")
            rows = []
            for index, level in enumerate(levels):
                await ctx.report_progress(index, len(levels))
                reports = find_roe(g.with_delta(level), options)
                rows.append({
                    "delta": level,
                    "count": len(reports),
                    "equilibria": [report.to_dict() for report in reports],
                })
            await ctx.report_progress(len(levels), len(levels))
            return round_floats({"success": True, "levels": rows})
        except (ValueError, ArithmeticError) as e:
            await ctx.error(f"Error during sweep: {e}")
            return _error_payload(e)

    @mcp.tool(
        name="trace_equilibrium",
        description=(
            "Follow an equilibrium toward zero uncertainty and report "
            "whether it has a Nash equilibrium counterpart"
        ),
        annotations={
            "title": "Trace Equilibrium",
            "readOnlyHint": True,
            "openWorldHint": False
        }
    )
    async def trace_equilibrium(
        game: str,
        profile: List[float],
        ctx: Context,
        start_delta: float = 1.0,
        step: float = TRACE_STEP,
        jump_tol: float = JUMP_TOLERANCE,
    ) -> Dict:
        """Trace the equilibrium ``profile`` from ``start_delta`` down to 0.

        Parameters
        ----------
        game : str
            Catalogue name or inline game JSON.
        profile : List[float]
            An equilibrium at ``start_delta``.
        ctx : Context
            MCP context for logging and progress
        start_delta : float, default 1.0
            Starting level.
        step : float, default TRACE_STEP
            Level decrement.
        jump_tol : float, default JUMP_TOLERANCE
            Largest accepted action change per step.

        Returns
        -------
        Dict
            The path report.
        """
        try:
            g = _load(game)
            await ctx.info(f"Tracing {profile} from delta {start_delta}")
            await ctx.report_progress(0, 100)
            path = trace_path(g, profile, start_delta, step, jump_tol)
            await ctx.report_progress(100, 100)
            await ctx.info(f"Path status: {path.status.value}")
            return round_floats({"success": True, **path.to_dict()})
        except (ValueError, ArithmeticError) as e:
            await ctx.error(f"Error during trace: {e}")
            return _error_payload(e)
