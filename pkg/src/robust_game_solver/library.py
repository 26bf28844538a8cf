"""Game catalogue management module.

This module resolves named game files in the configured games directory,
loads them once and provides a singleton interface for accessing them.
"""

import logging
import os
from functools import lru_cache
from typing import List, Optional

from .config import GAME_CACHE_SIZE, GAMES_DIR
from .exceptions import GameFileError
from .game import Game, load_game

logger: logging.Logger = logging.getLogger(__name__)

GAME_SUFFIX = ".json"


@lru_cache(maxsize=GAME_CACHE_SIZE)
def _load_game_file(path: str, mtime_ns: int) -> Game:
    """Parse a game file; the modification time keys edited files apart."""
    with open(path, "rb") as handle:
        game = load_game(handle.read())
    logger.info("Loaded game file %s", path)
    return game


class GameLibrary:
    """Singleton class for the named game catalogue.

    This class ensures only one catalogue instance exists and keeps the most
    recently used parsed games in memory.
    """

    _instance: Optional['GameLibrary'] = None
    _directory: str = GAMES_DIR

    def __new__(cls) -> 'GameLibrary':
        """Ensure only one instance of GameLibrary exists."""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    @property
    def directory(self) -> str:
        return self._directory

    def use_directory(self, directory: str) -> None:
        """Point the catalogue at another directory and drop cached games."""
        self._directory = directory
        self.clear()
        logger.info("Game catalogue directory set to %s", directory)

    def names(self) -> List[str]:
        """Sorted names of the games in the catalogue directory.

        Returns
        -------
        List[str]
            File names without the ``.json`` suffix; empty if the directory
            does not exist.
        """
        if not os.path.isdir(self._directory):
            logger.warning("Game directory %s does not exist", self._directory)
            return []
        return sorted(
            entry[:-len(GAME_SUFFIX)]
            for entry in os.listdir(self._directory)
            if entry.endswith(GAME_SUFFIX)
        )

    def path(self, name: str) -> str:
        """Path of the named game file.

        Raises
        ------
        GameFileError
            If the name is not in the catalogue.
        """
        if name not in self.names():
            raise GameFileError(f"unknown game {name!r}", field="name")
        return os.path.join(self._directory, name + GAME_SUFFIX)

    def read_text(self, name: str) -> str:
        with open(self.path(name), encoding="utf-8") as handle:
            return handle.read()

    def get(self, name: str) -> Game:
        """Load a named game, reusing the cached copy while the file is unchanged.

        Raises
        ------
        GameFileError
            If the name is unknown or the file is invalid.
        """
        path = self.path(name)
        return _load_game_file(path, os.stat(path).st_mtime_ns)

    def clear(self) -> None:
        """Forget every cached game."""
        _load_game_file.cache_clear()


# Singleton instance for easy access
_library = GameLibrary()


def get_game(name: str) -> Game:
    """Get a catalogue game by name.

    Raises
    ------
    GameFileError
        If the name is unknown or the file is invalid.
    """
    return _library.get(name)


def list_games() -> List[str]:
    return _library.names()


def read_game_text(name: str) -> str:
    """Raw JSON text of a catalogue game."""
    return _library.read_text(name)


def resolve_game(game: str) -> Game:
    """Load ``game`` as inline JSON when it starts with ``{``, else by name."""
    if game.lstrip().startswith("{"):
        return load_game(game)
    return get_game(game)
