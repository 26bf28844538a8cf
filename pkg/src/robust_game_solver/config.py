"""Configuration module for the robust game solver.

This module centralizes numeric defaults, environment variables and the
logging set-up shared by the library, the CLI and the MCP server.
"""

import logging
import os
from typing import Final

from dotenv import find_dotenv, load_dotenv

# Configure logging
logging.basicConfig(
    level=os.getenv("ROBUST_GAMES_LOG_LEVEL", "INFO").upper(),
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger: logging.Logger = logging.getLogger(__name__)


def _load_environment() -> None:
    """Load environment variables from .env file.

    Prefers a .env in the current working directory. If not found,
    falls back to the .env bundled next to the package file.
    """
    dot_env_path = find_dotenv(usecwd=True)
    if dot_env_path:
        load_dotenv(dot_env_path)
        logger.debug("Loaded environment from: %s", dot_env_path)
    else:
        env_path = os.path.join(
            os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
            '.env'
        )
        load_dotenv(env_path)
        logger.debug("Loaded environment from fallback: %s", env_path)


_load_environment()


# Solver Configuration
DEFAULT_GRID_RESOLUTION: Final[int] = int(os.getenv("ROBUST_GAMES_GRID", "1025"))
GOLDEN_TOLERANCE: Final[float] = float(os.getenv("ROBUST_GAMES_GOLDEN_TOL", "1e-10"))
ROE_TOLERANCE: Final[float] = float(os.getenv("ROBUST_GAMES_ROE_TOL", "1e-8"))
DEDUPE_RADIUS: Final[float] = float(os.getenv("ROBUST_GAMES_DEDUPE", "1e-6"))
MULTISTART_COUNT: Final[int] = int(os.getenv("ROBUST_GAMES_STARTS", "64"))
MAX_ITERATIONS: Final[int] = int(os.getenv("ROBUST_GAMES_MAX_ITER", "10000"))
DAMPING: Final[float] = 0.5

# Continuation Configuration
TRACE_STEP: Final[float] = float(os.getenv("ROBUST_GAMES_TRACE_STEP", "0.01"))
JUMP_TOLERANCE: Final[float] = float(os.getenv("ROBUST_GAMES_JUMP_TOL", "0.1"))
BREAK_RESOLUTION: Final[float] = 1e-4

# Tolerances
STRUCTURAL_TOLERANCE: Final[float] = 1e-12
FEASIBILITY_TOLERANCE: Final[float] = 1e-9
CONCAVITY_TOLERANCE: Final[float] = 1e-9

# Validation and Output
VALIDATION_SAMPLES: Final[int] = 50
SIGNIFICANT_DIGITS: Final[int] = 9

# Game Catalogue
DEFAULT_GAMES_DIR: Final[str] = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), "games"
)
GAMES_DIR: Final[str] = os.getenv("ROBUST_GAMES_DIR", DEFAULT_GAMES_DIR)
GAME_CACHE_SIZE: Final[int] = 32

# Validation (quiet in test environments)
_is_testing = os.getenv("PYTEST_CURRENT_TEST") is not None or os.getenv("TESTING") == "true"

if DEFAULT_GRID_RESOLUTION < 3:
    raise ValueError(
        "ROBUST_GAMES_GRID must be at least 3, "
        f"got {DEFAULT_GRID_RESOLUTION}."
    )

for _name, _value in (
    ("ROBUST_GAMES_GOLDEN_TOL", GOLDEN_TOLERANCE),
    ("ROBUST_GAMES_ROE_TOL", ROE_TOLERANCE),
    ("ROBUST_GAMES_DEDUPE", DEDUPE_RADIUS),
    ("ROBUST_GAMES_TRACE_STEP", TRACE_STEP),
    ("ROBUST_GAMES_JUMP_TOL", JUMP_TOLERANCE),
):
    if not _value > 0:
        raise ValueError(f"{_name} must be positive, got {_value}.")

if MULTISTART_COUNT < 1 or MAX_ITERATIONS < 1:
    raise ValueError(
        "ROBUST_GAMES_STARTS and ROBUST_GAMES_MAX_ITER must be positive integers."
    )

if not _is_testing:
    logger.info("Configuration loaded successfully")
    logger.info("Game catalogue: %s", GAMES_DIR)
