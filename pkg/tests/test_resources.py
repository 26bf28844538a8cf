"""Tests for the MCP Resources module.

This module tests the resource functions that expose the game catalogue,
the raw game files and their equilibria.
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict
from unittest.mock import Mock, patch

import pytest

from robust_game_solver.resources import register_resources


@pytest.fixture
def resources() -> Dict[str, Callable[..., str]]:
    """Register the resources on a mock server and capture them by URI."""
    mock_mcp = Mock()
    resources_dict: Dict[str, Any] = {}

    def capture_resource(
        uri: str,
        name: str,
        description: str,
    ) -> Callable:
        """Capture resource function for testing."""
        def decorator(func: Callable) -> Callable:
            resources_dict[uri] = func
            return func
        return decorator

    mock_mcp.resource = capture_resource
    register_resources(mock_mcp)
    return resources_dict


class TestListAllGames:
    """Tests for the list_all_games resource."""

    def test_list_all_games_success(self, resources: Dict[str, Callable[..., str]]) -> None:
        """Test listing the bundled catalogue.

        Verifies sizes and levels of the example game.
        """
        result_data = json.loads(resources["robustgame://games"]())

        assert result_data["success"] is True
        assert result_data["total"] == len(result_data["games"])
        example = next(g for g in result_data["games"] if g["name"] == "example1")
        assert example["players"] == 2
        assert example["delta"] == [1.0, 1.0]
        assert example["parameters"] == [1, 1]

    def test_list_all_games_with_broken_file(
        self, resources: Dict[str, Callable[..., str]], catalogue_dir: Path
    ) -> None:
        """Test that an invalid catalogue file yields an error payload."""
        (catalogue_dir / "broken.json").write_text("{", encoding="utf-8")

        result_data = json.loads(resources["robustgame://games"]())

        assert result_data["success"] is False
        assert "error" in result_data


class TestGetGameFile:
    """Tests for the get_game_file resource."""

    def test_returns_raw_text(
        self, resources: Dict[str, Callable[..., str]], catalogue_dir: Path
    ) -> None:
        """Test that the file text is returned unchanged."""
        expected = (catalogue_dir / "single.json").read_text(encoding="utf-8")

        assert resources["robustgame://games/{name}"]("single") == expected

    def test_unknown_name(self, resources: Dict[str, Callable[..., str]]) -> None:
        """Test that an unknown name returns a JSON error."""
        result_data = json.loads(resources["robustgame://games/{name}"]("missing"))

        assert result_data["success"] is False
        assert "missing" in result_data["error"]

    def test_read_failure(self, resources: Dict[str, Callable[..., str]]) -> None:
        """Test that an OS error while reading is reported."""
        with patch(
            "robust_game_solver.resources.read_game_text",
            side_effect=OSError("disk unavailable"),
        ):
            result_data = json.loads(resources["robustgame://games/{name}"]("example1"))

        assert result_data == {"success": False, "error": "disk unavailable"}


class TestGetGameEquilibria:
    """Tests for the get_game_equilibria resource."""

    def test_one_player_game(
        self, resources: Dict[str, Callable[..., str]], catalogue_dir: Path
    ) -> None:
        """Test the solved equilibria of a small catalogue game."""
        result_data = json.loads(resources["robustgame://games/{name}/equilibria"]("single"))

        assert result_data["success"] is True
        assert result_data["count"] == 1
        assert result_data["strictly_concave"] is True
        assert result_data["equilibria"][0]["profile"][0] == pytest.approx(1 / 6, abs=1e-8)

    def test_unknown_game(self, resources: Dict[str, Callable[..., str]]) -> None:
        """Test that an unknown game returns a JSON error."""
        result_data = json.loads(resources["robustgame://games/{name}/equilibria"]("missing"))

        assert result_data["success"] is False
