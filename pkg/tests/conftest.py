"""Shared pytest fixtures for the robust game solver tests.

This module provides reusable fixtures for testing the solver, including
the bundled catalogue games, Cournot parameter sets, game file texts and
the MCP server instance.
"""

import json
from typing import Any, Dict, Iterator, TYPE_CHECKING

import pytest

from robust_game_solver.cournot import CournotParams
from robust_game_solver.game import Game
from robust_game_solver.library import GameLibrary, get_game
from robust_game_solver.server import mcp

if TYPE_CHECKING:
    from fastmcp import FastMCP


@pytest.fixture
def example_game() -> Game:
    """Provide the two-player example game at delta = 1.

    Returns
    -------
    Game
        Payoffs ``x_i (1 - x_j) + alpha (1 - x_i) x_i`` with ``alpha`` in
        ``[0.1, 0.8]``, nominal ``0.6``, actions in ``[0, 1.8]``.
    """
    return get_game("example1")


@pytest.fixture
def nominal_example(example_game: Game) -> Game:
    """Provide the nominal counterpart of the example game."""
    return example_game.nominal()


@pytest.fixture
def case3_params() -> CournotParams:
    """Provide duopoly parameters with three equilibria at delta = 0.9.

    Returns
    -------
    CournotParams
        ``a=10``, nominal slopes ``(0.6, 0.8)`` on the segment from
        ``(1.0, 0.2)`` to ``(0.2, 1.4)``.
    """
    return CournotParams(10.0, 0.6, 0.8, 0.2, 1.0, 0.2, 1.4, 0.9)


@pytest.fixture
def case1_params() -> CournotParams:
    """Provide duopoly parameters where the own slope spreads more."""
    return CournotParams(10.0, 1.0, 0.5, 0.3, 1.7, 0.1, 0.9, 1.0)


@pytest.fixture
def case2_params() -> CournotParams:
    """Provide duopoly parameters with equal slope spreads."""
    return CournotParams(10.0, 1.0, 0.6, 0.6, 1.4, 0.2, 1.0, 1.0)


@pytest.fixture
def one_player_document() -> Dict[str, Any]:
    """Provide a one-player game file as a dictionary.

    Returns
    -------
    Dict[str, Any]
        Payoff ``x1 - alpha x1^2`` with ``alpha`` in ``[1, 3]``, nominal
        ``2``, action in ``[0, 2]``.
    """
    return {
        "name": "single",
        "players": 1,
        "player": [
            {
                "action": [0, 2],
                "payoff": {"const": "x1", "terms": [{"param": 1, "coeff": "-x1^2"}]},
                "uncertainty": {"vertices": [[1], [3]], "nominal": [2]},
                "delta": 1,
            }
        ],
    }


@pytest.fixture
def one_player_text(one_player_document: Dict[str, Any]) -> str:
    """Provide the one-player game file as JSON text."""
    return json.dumps(one_player_document)


@pytest.fixture
def catalogue_dir(tmp_path: Any, one_player_text: str) -> Iterator[Any]:
    """Point the game catalogue at a temporary directory.

    Yields
    ------
    Path
        Directory holding ``single.json``; the original catalogue is
        restored afterwards.
    """
    library = GameLibrary()
    original = library.directory
    (tmp_path / "single.json").write_text(one_player_text, encoding="utf-8")
    library.use_directory(str(tmp_path))
    try:
        yield tmp_path
    finally:
        library.use_directory(original)


@pytest.fixture
def test_server() -> "FastMCP":
    """Provide the FastMCP server instance for testing.

    Returns
    -------
    FastMCP
        The configured MCP server instance.
    """
    return mcp
