"""Robust game data model, game file loader and assumption validator.

A robust game gives every player a scalar action interval, a payoff that is
affine in an uncertain parameter vector, an uncertainty polytope with a
nominal point, and an uncertainty level delta that blends the nominal point
(delta = 0) with the full polytope (delta = 1).
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match
from scipy.optimize import nnls
from scipy.stats import qmc

from .config import (
    CONCAVITY_TOLERANCE,
    FEASIBILITY_TOLERANCE,
    VALIDATION_SAMPLES,
)
from .exceptions import (
    ExpressionEvaluationError,
    ExpressionSyntaxError,
    GameFileError,
)
from .expr import Expression, parse_expression

logger: logging.Logger = logging.getLogger(__name__)

Profile = Tuple[float, ...]


GAME_SCHEMA: Dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["players", "player"],
    "properties": {
        "name": {"type": "string"},
        "players": {"type": "integer", "minimum": 1},
        "player": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["action", "payoff", "uncertainty", "delta"],
                "properties": {
                    "action": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                    "payoff": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["const"],
                        "properties": {
                            "const": {"type": "string"},
                            "terms": {
                                "type": "array",
                                "items": {
                                    "type": "object",
                                    "additionalProperties": False,
                                    "required": ["param", "coeff"],
                                    "properties": {
                                        "param": {"type": "integer", "minimum": 1},
                                        "coeff": {"type": "string"},
                                    },
                                },
                            },
                        },
                    },
                    "uncertainty": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["vertices", "nominal"],
                        "properties": {
                            "vertices": {
                                "type": "array",
                                "minItems": 1,
                                "items": {"type": "array", "items": {"type": "number"}},
                            },
                            "nominal": {"type": "array", "items": {"type": "number"}},
                        },
                    },
                    "delta": {"type": "number"},
                },
            },
        },
    },
}

_VALIDATOR = Draft202012Validator(GAME_SCHEMA)


# ============================================================================
# DATA MODEL
# ============================================================================


@dataclass(frozen=True)
class ActionInterval:
    """Scalar action space ``[lo, hi]`` of one player."""

    lo: float
    hi: float

    @property
    def is_valid(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo <= self.hi

    def grid(self, resolution: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, resolution)

    def clip(self, value: float) -> float:
        return min(max(value, self.lo), self.hi)


@dataclass(frozen=True)
class UncertaintyPolytope:
    """Vertex list of an uncertainty set plus its nominal point."""

    vertices: Tuple[Tuple[float, ...], ...]
    nominal: Tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.nominal)

    def vertex_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float).reshape(len(self.vertices), self.dimension)

    def nominal_array(self) -> np.ndarray:
        return np.asarray(self.nominal, dtype=float)


@dataclass(frozen=True)
class IndicatorPenalty:
    """Coefficient ``-1{x_i != anchor}`` attached to one uncertain parameter.

    Only built by the epsilon-Nash embedding; never read from game files.
    """

    param: int
    anchor: float


@dataclass(frozen=True)
class PayoffForm:
    """Payoff ``c0(x) + sum_k alpha_k * c_k(x)`` with optional indicator term."""

    constant: Expression
    terms: Tuple[Tuple[int, Expression], ...] = ()
    penalty: Optional[IndicatorPenalty] = None

    def expressions(self) -> List[Expression]:
        return [self.constant] + [expression for _, expression in self.terms]


@dataclass(frozen=True)
class ScaledVertexSet:
    """Extreme points of the delta-scaled uncertainty set."""

    vectors: Tuple[Tuple[float, ...], ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vectors, dtype=float)


@dataclass(frozen=True)
class Game:
    """An n-player robust game with scalar actions.

    Attributes
    ----------
    actions : Tuple[ActionInterval, ...]
        Per-player action intervals.
    payoffs : Tuple[PayoffForm, ...]
        Per-player affine-in-parameter payoffs.
    uncertainty : Tuple[UncertaintyPolytope, ...]
        Per-player uncertainty polytopes.
    delta : Tuple[float, ...]
        Per-player uncertainty levels in ``[0, 1]``.
    name : str
        Optional label.
    """

    actions: Tuple[ActionInterval, ...]
    payoffs: Tuple[PayoffForm, ...]
    uncertainty: Tuple[UncertaintyPolytope, ...]
    delta: Tuple[float, ...]
    name: str = field(default="", compare=False)

    @property
    def n(self) -> int:
        return len(self.actions)

    @cached_property
    def _scaled(self) -> Tuple[np.ndarray, ...]:
        return tuple(
            scale_uncertainty(polytope, level).as_array()
            for polytope, level in zip(self.uncertainty, self.delta)
        )

    def scaled_vertices(self, i: int) -> np.ndarray:
        """Scaled vertex matrix of player ``i``, shape ``(m, nu)``."""
        return self._scaled[i]

    def with_delta(self, delta: Union[float, Sequence[float]]) -> "Game":
        """Copy of the game with new uncertainty levels.

        A scalar sets every player's level.
        """
        levels = (
            tuple(float(d) for d in delta)
            if isinstance(delta, (list, tuple, np.ndarray))
            else (float(delta),) * self.n
        )
        if len(levels) != self.n:
            raise GameFileError("one level per player expected", field="delta")
        for index, level in enumerate(levels):
            _check_delta(level, f"delta[{index}]")
        return replace(self, delta=levels)

    def nominal(self) -> "Game":
        """The nominal counterpart: every level set to 0."""
        return self.with_delta(0.0)

    def coefficient_rows(self, i: int, x: Sequence[Any]) -> np.ndarray:
        """Evaluate ``c0, c1, ..., c_nu`` of player ``i`` at ``x``.

        Entries of ``x`` may be arrays; the result has shape
        ``(nu + 1,) + broadcast shape``.
        """
        payoff = self.payoffs[i]
        shape = np.broadcast(*[np.asarray(v) for v in x]).shape
        rows = np.zeros((self.uncertainty[i].dimension + 1,) + shape)
        rows[0] = payoff.constant(x)
        for k, expression in payoff.terms:
            rows[k] = expression(x)
        if payoff.penalty is not None:
            own = np.broadcast_to(np.asarray(x[i], dtype=float), shape)
            rows[payoff.penalty.param] += np.where(own == payoff.penalty.anchor, 0.0, -1.0)
        return rows

    def payoffs_at(self, i: int, x: Sequence[Any], parameters: np.ndarray) -> np.ndarray:
        """Payoff of player ``i`` at ``x`` for each parameter row.

        Returns an array of shape ``(len(parameters),) + broadcast shape``.
        """
        rows = self.coefficient_rows(i, x)
        return rows[0] + np.tensordot(parameters, rows[1:], axes=(1, 0))

    def vertex_payoffs(self, i: int, x: Sequence[Any]) -> np.ndarray:
        """Payoffs of player ``i`` at every scaled vertex."""
        return self.payoffs_at(i, x, self.scaled_vertices(i))

    def nominal_payoff(self, i: int, x: Sequence[Any]) -> np.ndarray:
        """Payoff of player ``i`` at the nominal parameter."""
        nominal = self.uncertainty[i].nominal_array().reshape(1, -1)
        return self.payoffs_at(i, x, nominal)[0]

    def to_dict(self) -> Dict[str, Any]:
        """Game file representation (indicator terms under ``indicator``)."""
        players: List[Dict[str, Any]] = []
        for action, payoff, polytope, level in zip(
            self.actions, self.payoffs, self.uncertainty, self.delta
        ):
            entry: Dict[str, Any] = {
                "action": [action.lo, action.hi],
                "payoff": {
                    "const": str(payoff.constant),
                    "terms": [{"param": k, "coeff": str(e)} for k, e in payoff.terms],
                },
                "uncertainty": {
                    "vertices": [list(v) for v in polytope.vertices],
                    "nominal": list(polytope.nominal),
                },
                "delta": level,
            }
            if payoff.penalty is not None:
                entry["indicator"] = {
                    "param": payoff.penalty.param,
                    "anchor": payoff.penalty.anchor,
                }
            players.append(entry)
        document: Dict[str, Any] = {"players": self.n, "player": players}
        if self.name:
            document["name"] = self.name
        return document


# ============================================================================
# OPERATIONS
# ============================================================================


def _check_delta(delta: float, path: str) -> None:
    if not (0.0 <= delta <= 1.0):
        raise GameFileError(f"delta out of range: {delta}", field=path)


def scale_uncertainty(p: UncertaintyPolytope, delta: float) -> ScaledVertexSet:
    """Extreme points of ``delta * U + (1 - delta) * nominal``.

    Raises
    ------
    GameFileError
        If ``delta`` is outside ``[0, 1]``.
    """
    _check_delta(delta, "delta")
    scaled = delta * p.vertex_array() + (1.0 - delta) * p.nominal_array()
    return ScaledVertexSet(tuple(tuple(float(v) for v in row) for row in scaled))


def hull_membership(p: UncertaintyPolytope) -> bool:
    """Whether the nominal point is a convex combination of the vertices.

    Solves ``sum_j w_j v_j = nominal, sum_j w_j = 1, w >= 0`` as a
    non-negative least-squares problem and accepts residual norms up to the
    feasibility tolerance.
    """
    vertices = p.vertex_array()
    if vertices.shape[1] != p.dimension:
        return False
    system = np.vstack([vertices.T, np.ones((1, vertices.shape[0]))])
    target = np.concatenate([p.nominal_array(), [1.0]])
    _, residual = nnls(system, target)
    return bool(residual <= FEASIBILITY_TOLERANCE)


def _field(path: Sequence[Union[str, int]]) -> str:
    text = ""
    for part in path:
        text += f"[{part}]" if isinstance(part, int) else (f".{part}" if text else str(part))
    return text or "<root>"


def _parse(text: str, path: str, players: int) -> Expression:
    try:
        expression = parse_expression(text)
    except ExpressionSyntaxError as err:
        raise GameFileError(str(err), field=path) from err
    for name in sorted(expression.variables):
        if int(name[1:]) > players:
            raise GameFileError(f"unknown variable {name}", field=path)
    return expression


def _reject_constant(token: str) -> float:
    raise GameFileError(f"non-finite number {token}")


def load_game(contents: Union[bytes, str]) -> Game:
    """Load and validate a game file.

    Parameters
    ----------
    contents : Union[bytes, str]
        UTF-8 JSON text of the game file.

    Returns
    -------
    Game
        The validated game with all expressions parsed.

    Raises
    ------
    GameFileError
        On malformed JSON, schema violations, dimension mismatches,
        expression errors, unknown variables or delta out of range. The
        ``field`` attribute names the offending field.
    """
    try:
        text = contents.decode("utf-8") if isinstance(contents, bytes) else contents
        document = json.loads(text, parse_constant=_reject_constant)
    except UnicodeDecodeError as err:
        raise GameFileError(f"not UTF-8: {err}") from err
    except json.JSONDecodeError as err:
        raise GameFileError(f"invalid JSON: {err}") from err

    error = best_match(_VALIDATOR.iter_errors(document))
    if error is not None:
        raise GameFileError(error.message, field=_field(list(error.absolute_path)))

    players = document["players"]
    entries = document["player"]
    if len(entries) != players:
        raise GameFileError(
            f"{players} players declared but {len(entries)} defined", field="players"
        )

    actions: List[ActionInterval] = []
    payoffs: List[PayoffForm] = []
    polytopes: List[UncertaintyPolytope] = []
    levels: List[float] = []
    for index, entry in enumerate(entries):
        base = f"player[{index}]"
        lo, hi = (float(v) for v in entry["action"])
        if lo > hi:
            raise GameFileError(f"empty action interval [{lo}, {hi}]", field=f"{base}.action")
        actions.append(ActionInterval(lo, hi))

        level = float(entry["delta"])
        _check_delta(level, f"{base}.delta")
        levels.append(level)

        nominal = tuple(float(v) for v in entry["uncertainty"]["nominal"])
        vertices = []
        for v_index, vertex in enumerate(entry["uncertainty"]["vertices"]):
            if len(vertex) != len(nominal):
                raise GameFileError(
                    f"vertex has dimension {len(vertex)}, nominal has {len(nominal)}",
                    field=f"{base}.uncertainty.vertices[{v_index}]",
                )
            vertices.append(tuple(float(v) for v in vertex))
        polytopes.append(UncertaintyPolytope(tuple(vertices), nominal))

        payoff = entry["payoff"]
        constant = _parse(payoff["const"], f"{base}.payoff.const", players)
        terms: List[Tuple[int, Expression]] = []
        seen = set()
        for t_index, term in enumerate(payoff.get("terms", [])):
            path = f"{base}.payoff.terms[{t_index}]"
            k = term["param"]
            if k > len(nominal):
                raise GameFileError(
                    f"parameter {k} exceeds uncertainty dimension {len(nominal)}",
                    field=f"{path}.param",
                )
            if k in seen:
                raise GameFileError(f"parameter {k} appears twice", field=f"{path}.param")
            seen.add(k)
            terms.append((k, _parse(term["coeff"], f"{path}.coeff", players)))
        payoffs.append(PayoffForm(constant, tuple(terms)))

    game = Game(
        actions=tuple(actions),
        payoffs=tuple(payoffs),
        uncertainty=tuple(polytopes),
        delta=tuple(levels),
        name=document.get("name", ""),
    )
    logger.debug("Loaded game %r with %d players", game.name, game.n)
    return game


# ============================================================================
# ASSUMPTION CHECKS
# ============================================================================


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    """One validator finding; ``player`` is 0-based."""

    severity: Severity
    player: int
    check: str
    message: str
    location: Optional[Profile] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "severity": self.severity.value,
            "player": self.player + 1,
            "check": self.check,
            "message": self.message,
            "location": list(self.location) if self.location is not None else None,
        }


def opponent_samples(g: Game, i: int, samples: int) -> np.ndarray:
    """Opponent action profiles for player ``i``, shape ``(k, n - 1)``.

    One opponent is sampled on an even grid; more use an unscrambled Halton
    sequence scaled to the opponents' action box.
    """
    others = [j for j in range(g.n) if j != i]
    if not others:
        return np.zeros((1, 0))
    if len(others) == 1:
        return g.actions[others[0]].grid(samples).reshape(-1, 1)
    lows = np.array([g.actions[j].lo for j in others])
    highs = np.array([g.actions[j].hi for j in others])
    points = qmc.Halton(d=len(others), scramble=False).random(samples)
    span = highs - lows
    return lows + points * span


def _own_grid_profiles(
    g: Game, i: int, samples: int
) -> Tuple[np.ndarray, np.ndarray, List[Any]]:
    own = g.actions[i].grid(samples)
    opponents = opponent_samples(g, i, samples)
    x: List[Any] = []
    column = 0
    for j in range(g.n):
        if j == i:
            x.append(own.reshape(1, -1))
        else:
            x.append(opponents[:, column].reshape(-1, 1))
            column += 1
    return own, opponents, x


def _second_differences(g: Game, i: int, samples: int) -> Tuple[np.ndarray, np.ndarray,
                                                                   np.ndarray]:
    own, opponents, x = _own_grid_profiles(g, i, samples)
    values = np.broadcast_to(
        g.vertex_payoffs(i, x),
        (len(g.scaled_vertices(i)), len(opponents), len(own)),
    )
    second = values[..., :-2] - 2.0 * values[..., 1:-1] + values[..., 2:]
    return own, opponents, second


def _location(i: int, own: float, opponent: np.ndarray) -> Profile:
    profile = list(float(v) for v in opponent)
    profile.insert(i, float(own))
    return tuple(profile)


def _structural_findings(g: Game, i: int) -> List[Finding]:
    findings: List[Finding] = []
    action = g.actions[i]
    if not action.is_valid:
        findings.append(Finding(
            Severity.ERROR, i, "action-interval",
            f"action interval [{action.lo}, {action.hi}] is empty or unbounded",
        ))
    if not (0.0 <= g.delta[i] <= 1.0):
        findings.append(Finding(
            Severity.ERROR, i, "delta", f"delta {g.delta[i]} outside [0, 1]",
        ))
    polytope = g.uncertainty[i]
    if any(len(v) != polytope.dimension for v in polytope.vertices) or not polytope.vertices:
        findings.append(Finding(
            Severity.ERROR, i, "dimension", "vertex dimensions do not match the nominal point",
        ))
    elif not hull_membership(polytope):
        findings.append(Finding(
            Severity.ERROR, i, "hull",
            f"nominal point {list(polytope.nominal)} is outside the convex hull of the vertices",
        ))
    for expression in g.payoffs[i].expressions():
        if expression.max_index > g.n:
            findings.append(Finding(
                Severity.ERROR, i, "variables",
                f"expression {expression} uses variables beyond x{g.n}",
            ))
    return findings


def validate_assumptions(g: Game, samples: int = VALIDATION_SAMPLES) -> List[Finding]:
    """Check the existence hypotheses player by player.

    Checks the action interval, the delta range, the nominal point's hull
    membership and concavity of the payoff in the own action at every scaled
    vertex for ``samples`` opponent profiles, using second differences on a
    ``samples``-point own-action grid. Players carrying an indicator penalty
    are exempt from the concavity check.

    Parameters
    ----------
    g : Game
        Game to check.
    samples : int
        Grid size, at least 3.

    Returns
    -------
    List[Finding]
        Empty when every check passes.
    """
    if samples < 3:
        raise ValueError("samples must be at least 3")
    findings: List[Finding] = []
    for i in range(g.n):
        structural = _structural_findings(g, i)
        findings.extend(structural)
        if structural or g.payoffs[i].penalty is not None:
            continue
        try:
            own, opponents, second = _second_differences(g, i, samples)
        except ExpressionEvaluationError as err:
            findings.append(Finding(Severity.ERROR, i, "evaluation", str(err)))
            continue
        vertices = g.scaled_vertices(i)
        for v_index in range(second.shape[0]):
            violations = second[v_index] > CONCAVITY_TOLERANCE
            if not np.any(violations):
                continue
            o_index, k = np.unravel_index(int(np.argmax(second[v_index])), violations.shape)
            findings.append(Finding(
                Severity.ERROR, i, "concavity",
                f"payoff not concave in own action at vertex {list(vertices[v_index])}: "
                f"second difference {second[v_index, o_index, k]:.3g} at "
                f"{int(np.count_nonzero(violations.any(axis=1)))} of {len(opponents)} "
                "opponent samples",
                _location(i, own[k + 1], opponents[o_index]),
            ))
    for finding in findings:
        logger.warning("Player %d %s: %s", finding.player + 1, finding.check, finding.message)
    return findings


def strictly_concave(g: Game, samples: int = VALIDATION_SAMPLES) -> bool:
    """Whether every sampled own-action second difference is negative.

    Strictness uses the concavity tolerance as margin. Players with an
    indicator penalty or any structural finding make the game non-strict.
    """
    for i in range(g.n):
        if g.payoffs[i].penalty is not None or _structural_findings(g, i):
            return False
        _, _, second = _second_differences(g, i, samples)
        if np.any(second >= -CONCAVITY_TOLERANCE):
            return False
    return True
