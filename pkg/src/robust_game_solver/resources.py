"""MCP Resources for the game catalogue.

This module exposes the catalogue listing, the raw game files and their
solved equilibria through the MCP resource protocol.
"""

import json
import logging

from fastmcp import FastMCP

from .equilibrium import find_roe
from .game import strictly_concave
from .library import get_game, list_games, read_game_text
from .utils import round_floats

logger: logging.Logger = logging.getLogger(__name__)


def register_resources(mcp: FastMCP) -> None:
    """Register all resources with the MCP server.

    Parameters
    ----------
    mcp : FastMCP
        The FastMCP instance to register resources with.
    """

    @mcp.resource(
        uri="robustgame://games",
        name="All games",
        description="List of the games in the catalogue with their sizes"
    )
    def list_all_games() -> str:
        """Return a JSON list of the catalogue games.

        Returns
        -------
        str
            JSON string with one entry per game.
        """
        try:
            games = []
            for name in list_games():
                game = get_game(name)
                games.append({
                    "name": name,
                    "players": game.n,
                    "delta": list(game.delta),
                    "parameters": [polytope.dimension for polytope in game.uncertainty],
                })
            logger.info("Listed %d catalogue games", len(games))
            return json.dumps({
                "success": True,
                "total": len(games),
                "games": games
            }, ensure_ascii=False, indent=2)

        except (OSError, ValueError) as e:
            logger.error("Error listing games: %s", e)
            return json.dumps({
                "success": False,
                "error": str(e)
            })

    @mcp.resource(
        uri="robustgame://games/{name}",
        name="Game File",
        description="Raw JSON definition of a catalogue game"
    )
    def get_game_file(name: str) -> str:
        """Return the game file text.

        Parameters
        ----------
        name : str
            Catalogue name of the game

        Returns
        -------
        str
            The game file, or a JSON error object.
        """
        try:
            return read_game_text(name)
        except (OSError, ValueError) as e:
            logger.error("Error reading game '%s': %s", name, e)
            return json.dumps({
                "success": False,
                "error": str(e)
            })

    @mcp.resource(
        uri="robustgame://games/{name}/equilibria",
        name="Game Equilibria",
        description=(
            "Robust-optimization equilibria of a catalogue game at the "
            "uncertainty levels of its file"
        )
    )
    def get_game_equilibria(name: str) -> str:
        """Return the solved equilibria of a game.

        Parameters
        ----------
        name : str
            Catalogue name of the game

        Returns
        -------
        str
            JSON string with the equilibria and the strict concavity flag.
        """
        try:
            game = get_game(name)
            reports = find_roe(game)
            return json.dumps(round_floats({
                "success": True,
                "name": name,
                "delta": list(game.delta),
                "strictly_concave": strictly_concave(game),
                "count": len(reports),
                "equilibria": [report.to_dict() for report in reports],
            }), ensure_ascii=False, indent=2)

        except (OSError, ValueError, ArithmeticError) as e:
            logger.error("Error solving game '%s': %s", name, e)
            return json.dumps({
                "success": False,
                "error": str(e)
            })
