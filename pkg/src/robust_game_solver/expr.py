"""Arithmetic expressions over action variables.

Payoff coefficient functions in game files are written as small arithmetic
expressions in the action variables ``x1 .. xn``. This module tokenizes and
parses them into an immutable tree, evaluates them on scalar bindings, and
compiles them into vectorized callables for the numerical layers.

Grammar
-------
::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)?
    exponent := ['-'] INT ('^' exponent)?
    atom     := NUMBER | VAR | '(' expr ')'
    VAR      := 'x' positive-integer

Precedence is ``^`` over unary minus over ``*``/``/`` over ``+``/``-``, so
``-x1^2`` reads as ``-(x1^2)``. ``*``, ``/``, ``+`` and ``-`` associate left;
``^`` associates right and only accepts integer exponents up to 1024 in
magnitude. Literals must be finite.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, FrozenSet, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .exceptions import (
    DivisionByZeroError,
    ExpressionEvaluationError,
    ExpressionSyntaxError,
    UnboundVariableError,
)

logger: logging.Logger = logging.getLogger(__name__)

VARIABLE_PATTERN = re.compile(r"x([1-9][0-9]*)")

MAX_EXPONENT = 1024

_TOKEN_PATTERN = re.compile(
    r"""
    (?P<space>\s+)
    | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<starstar>\*\*)
    | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


# ============================================================================
# TREE NODES
# ============================================================================


@dataclass(frozen=True)
class Literal:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str
    index: int


@dataclass(frozen=True)
class Negate:
    operand: "Node"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int


Node = Union[Literal, Variable, Negate, BinaryOp, Power]
Vectorized = Callable[[Sequence[Any]], Any]


# ============================================================================
# TOKENIZER
# ============================================================================


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    index = 0
    while index < len(text):
        match = _TOKEN_PATTERN.match(text, index)
        if match is None:
            raise ExpressionSyntaxError(
                f"unknown token {text[index]!r}", _byte_offset(text, index)
            )
        kind = match.lastgroup or ""
        offset = _byte_offset(text, index)
        if kind == "starstar":
            raise ExpressionSyntaxError("unsupported operator '**'", offset)
        if kind == "number" and not math.isfinite(float(match.group())):
            raise ExpressionSyntaxError(f"number {match.group()!r} out of range", offset)
        if kind == "name":
            if VARIABLE_PATTERN.fullmatch(match.group()) is None:
                raise ExpressionSyntaxError(
                    f"unknown token {match.group()!r}", offset
                )
            kind = "var"
        if kind != "space":
            tokens.append(_Token(kind, match.group(), offset))
        index = match.end()
    tokens.append(_Token("end", "", _byte_offset(text, len(text))))
    return tokens


# ============================================================================
# PARSER
# ============================================================================


class _Parser:
    """Recursive-descent parser over a token list."""

    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.position = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.position]

    def advance(self) -> _Token:
        token = self.current
        self.position += 1
        return token

    def at(self, kind: str, text: str = "") -> bool:
        token = self.current
        return token.kind == kind and (not text or token.text == text)

    def parse(self) -> Node:
        node = self.expr()
        if not self.at("end"):
            raise ExpressionSyntaxError(
                f"unexpected token {self.current.text!r}", self.current.offset
            )
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at("op", "+") or self.at("op", "-"):
            op = self.advance().text
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at("op", "*") or self.at("op", "/"):
            op = self.advance().text
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.at("op", "-"):
            self.advance()
            return Negate(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at("op", "^"):
            self.advance()
            return Power(base, self.exponent())
        return base

    def exponent(self) -> int:
        negative = False
        if self.at("op", "-"):
            self.advance()
            negative = True
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise ExpressionSyntaxError("non-integer exponent", token.offset)
        self.advance()
        value = int(token.text)
        if value > MAX_EXPONENT:
            raise ExpressionSyntaxError(f"exponent above {MAX_EXPONENT}", token.offset)
        if self.at("op", "^"):
            self.advance()
            rest_offset = self.current.offset
            rest = self.exponent()
            if rest < 0:
                raise ExpressionSyntaxError("non-integer exponent", rest_offset)
            # at most MAX_EXPONENT ** MAX_EXPONENT
            value = value ** rest
            if value > MAX_EXPONENT:
                raise ExpressionSyntaxError(f"exponent above {MAX_EXPONENT}", token.offset)
        return -value if negative else value

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Literal(float(token.text))
        if token.kind == "var":
            self.advance()
            return Variable(token.text, int(token.text[1:]))
        if self.at("op", "("):
            self.advance()
            node = self.expr()
            if not self.at("op", ")"):
                raise ExpressionSyntaxError("expected ')'", self.current.offset)
            self.advance()
            return node
        if token.kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", token.offset)
        raise ExpressionSyntaxError(f"unexpected token {token.text!r}", token.offset)


# ============================================================================
# EVALUATION
# ============================================================================


def _scalar(node: Node, bindings: Mapping[str, float]) -> float:
    if isinstance(node, Literal):
        return node.value
    if isinstance(node, Variable):
        try:
            return float(bindings[node.name])
        except KeyError:
            raise UnboundVariableError(f"unbound variable {node.name}") from None
    if isinstance(node, Negate):
        return -_scalar(node.operand, bindings)
    if isinstance(node, Power):
        base = _scalar(node.base, bindings)
        if base == 0.0 and node.exponent < 0:
            raise DivisionByZeroError("division by zero in negative power")
        try:
            return float(base ** node.exponent)
        except OverflowError as err:
            raise ExpressionEvaluationError("non-finite result") from err
    left = _scalar(node.left, bindings)
    right = _scalar(node.right, bindings)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right == 0.0:
        raise DivisionByZeroError("division by zero")
    return left / right


def _divide(left: Any, right: Any) -> Any:
    if np.any(np.asarray(right) == 0.0):
        raise DivisionByZeroError("division by zero")
    return left / right


def _power(base: Any, exponent: int) -> Any:
    if exponent < 0 and np.any(np.asarray(base) == 0.0):
        raise DivisionByZeroError("division by zero in negative power")
    return base ** exponent


def _compile(node: Node) -> Vectorized:
    if isinstance(node, Literal):
        value = node.value
        return lambda x: value
    if isinstance(node, Variable):
        slot = node.index - 1
        name = node.name

        def lookup(x: Sequence[Any]) -> Any:
            if slot >= len(x):
                raise UnboundVariableError(f"unbound variable {name}")
            return x[slot]
        return lookup
    if isinstance(node, Negate):
        operand = _compile(node.operand)
        return lambda x: -operand(x)
    if isinstance(node, Power):
        base = _compile(node.base)
        exponent = node.exponent
        return lambda x: _power(base(x), exponent)
    left = _compile(node.left)
    right = _compile(node.right)
    if node.op == "+":
        return lambda x: left(x) + right(x)
    if node.op == "-":
        return lambda x: left(x) - right(x)
    if node.op == "*":
        return lambda x: left(x) * right(x)
    return lambda x: _divide(left(x), right(x))


def _collect_variables(node: Node) -> FrozenSet[str]:
    if isinstance(node, Variable):
        return frozenset({node.name})
    if isinstance(node, Literal):
        return frozenset()
    if isinstance(node, Negate):
        return _collect_variables(node.operand)
    if isinstance(node, Power):
        return _collect_variables(node.base)
    return _collect_variables(node.left) | _collect_variables(node.right)


def _format_node(node: Node) -> str:
    if isinstance(node, Literal):
        text = repr(node.value)
        return f"({text})" if node.value < 0 else text
    if isinstance(node, Variable):
        return node.name
    if isinstance(node, Negate):
        return f"(-{_format_node(node.operand)})"
    if isinstance(node, Power):
        base = _format_node(node.base)
        if isinstance(node.base, Power):
            base = f"({base})"
        return f"{base}^{node.exponent}"
    return f"({_format_node(node.left)} {node.op} {_format_node(node.right)})"


@dataclass(frozen=True)
class Expression:
    """A parsed arithmetic expression.

    Calling an expression with a sequence ``x`` evaluates it with ``x1``
    bound to ``x[0]``, ``x2`` to ``x[1]`` and so on. Entries may be floats
    or NumPy arrays, which broadcast.
    """

    root: Node
    source: str = field(default="", compare=False)

    @cached_property
    def _vectorized(self) -> Vectorized:
        return _compile(self.root)

    @cached_property
    def variables(self) -> FrozenSet[str]:
        return _collect_variables(self.root)

    @property
    def max_index(self) -> int:
        """Largest variable index used, 0 for constant expressions."""
        return max((int(name[1:]) for name in self.variables), default=0)

    def __call__(self, x: Sequence[Any]) -> Any:
        with np.errstate(all="ignore"):
            try:
                result = self._vectorized(x)
            except OverflowError as err:
                raise ExpressionEvaluationError("non-finite result") from err
        if not np.all(np.isfinite(result)):
            raise ExpressionEvaluationError(
                f"non-finite result evaluating {self}"
            )
        return result

    def __str__(self) -> str:
        return _format_node(self.root)


# ============================================================================
# PUBLIC API
# ============================================================================


def parse_expression(text: str) -> Expression:
    """Parse ``text`` into an :class:`Expression`.

    Parameters
    ----------
    text : str
        Source text, e.g. ``"(1.6 - 0.6*x1 - x2)*x1"``.

    Returns
    -------
    Expression
        The unique parse under the module grammar.

    Raises
    ------
    ExpressionSyntaxError
        On empty input, unknown tokens, malformed structure or non-integer
        exponents. The exception carries the byte offset of the problem.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return Expression(_Parser(text).parse(), text)


def evaluate(e: Expression, bindings: Mapping[str, float]) -> float:
    """Evaluate ``e`` with variables bound by name.

    Parameters
    ----------
    e : Expression
        Parsed expression.
    bindings : Mapping[str, float]
        Values for the free variables, keyed ``"x1"``, ``"x2"``, ...

    Returns
    -------
    float
        The value of the expression.

    Raises
    ------
    UnboundVariableError
        If a free variable has no binding.
    DivisionByZeroError
        On division by zero.
    ExpressionEvaluationError
        If the result is not finite.
    """
    value = _scalar(e.root, bindings)
    if not math.isfinite(value):
        raise ExpressionEvaluationError(f"non-finite result evaluating {e}")
    return value


def free_variables(e: Expression) -> FrozenSet[str]:
    """Return the set of variable names appearing in ``e``."""
    return e.variables


def format_expression(e: Expression) -> str:
    """Render ``e`` as re-parseable text with explicit grouping."""
    return str(e)


def constant(value: float) -> Expression:
    """Build a literal expression without going through the parser."""
    node: Node = Literal(float(value))
    return Expression(node, repr(float(value)))


def combine(*weighted: Tuple[float, Expression]) -> Expression:
    """Build the expression ``sum(w * e)`` for pairs ``(w, e)``.

    Zero weights are skipped; an empty sum is the literal 0.
    """
    root: Union[Node, None] = None
    for weight, expression in weighted:
        if weight == 0.0:
            continue
        term: Node = expression.root
        if weight != 1.0:
            term = BinaryOp("*", Literal(float(weight)), term)
        root = term if root is None else BinaryOp("+", root, term)
    node: Node = root if root is not None else Literal(0.0)
    return Expression(node, _format_node(node))
