"""Tests for the expression parser and evaluator.

This module tests tokenizing, parsing, scalar and vectorized evaluation,
formatting and the error offsets of malformed input.
"""

import numpy as np
import pytest

from robust_game_solver.exceptions import (
    DivisionByZeroError,
    ExpressionEvaluationError,
    ExpressionSyntaxError,
    UnboundVariableError,
)
from robust_game_solver.expr import (
    combine,
    constant,
    evaluate,
    format_expression,
    free_variables,
    parse_expression,
)


class TestParseAndEvaluate:
    """Tests for parse_expression and evaluate."""

    @pytest.mark.parametrize(
        "text, bindings, expected",
        [
            ("(1 - x1)*x1", {"x1": 0.25}, 0.1875),
            ("-x1^2", {"x1": 3.0}, -9.0),
            ("2^3^2", {}, 512.0),
            ("x1^2^10", {"x1": 1.0}, 1.0),
            ("x1 - x2 - 1", {"x1": 5.0, "x2": 2.0}, 2.0),
            ("8 / 2 / 2", {}, 2.0),
            ("x1^-1", {"x1": 4.0}, 0.25),
            ("1.5e1 + .5", {}, 15.5),
            ("(1.6 - 0.6*x1 - x2)*x1", {"x1": 1.0, "x2": 0.5}, 0.5),
        ],
    )
    def test_evaluates_with_documented_precedence(
        self, text: str, bindings: dict, expected: float
    ) -> None:
        """Test evaluation of well-formed expressions.

        Verifies that power binds tighter than unary minus, that power is
        right-associative and the other operators associate left.
        """
        assert evaluate(parse_expression(text), bindings) == pytest.approx(expected)

    def test_free_variables(self) -> None:
        """Test that free variables are collected by name.

        Verifies that repeated variables appear once.
        """
        e = parse_expression("x1*(1 - x2) + x1^2")
        assert free_variables(e) == frozenset({"x1", "x2"})

    def test_unbound_variable(self) -> None:
        """Test evaluating with a missing binding.

        Verifies that the error is both a domain error and a KeyError.
        """
        with pytest.raises(UnboundVariableError) as excinfo:
            evaluate(parse_expression("x1 + x3"), {"x1": 1.0})
        assert isinstance(excinfo.value, KeyError)
        assert "x3" in str(excinfo.value)

    def test_division_by_zero(self) -> None:
        """Test division by a zero denominator.

        Verifies that both division and negative powers of zero raise.
        """
        with pytest.raises(DivisionByZeroError):
            evaluate(parse_expression("1 / (x1 - 1)"), {"x1": 1.0})
        with pytest.raises(DivisionByZeroError):
            evaluate(parse_expression("x1^-2"), {"x1": 0.0})

    def test_non_finite_result(self) -> None:
        """Test that overflowing results are rejected."""
        with pytest.raises(ExpressionEvaluationError):
            evaluate(parse_expression("x1^400"), {"x1": 1e10})


class TestSyntaxErrors:
    """Tests for malformed expressions."""

    @pytest.mark.parametrize(
        "text, offset",
        [
            ("1 +", 3),
            ("x1**2", 2),
            ("x1 ^ 0.5", 5),
            ("y + 1", 0),
            ("x0 + 1", 0),
            ("(x1 + 2", 7),
            ("x1 x2", 3),
            ("   ", 0),
            ("1e999", 0),
            ("x1 + 1e400", 5),
            ("x1^2000", 3),
            ("x1^999^999", 3),
            ("x1^2^11", 3),
        ],
    )
    def test_reports_byte_offset(self, text: str, offset: int) -> None:
        """Test the offset attached to a syntax error.

        Verifies that each error points at the offending token.
        """
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression(text)
        assert excinfo.value.offset == offset
        assert isinstance(excinfo.value, ValueError)

    def test_offset_counts_utf8_bytes(self) -> None:
        """Test that offsets are measured in UTF-8 bytes.

        Verifies that a multi-byte character before the error shifts the
        offset by its encoded length.
        """
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("x1\u00a0+ y")
        assert excinfo.value.offset == 6
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("x1 + é")
        assert excinfo.value.offset == 5


class TestFormatting:
    """Tests for format_expression and the builders."""

    @pytest.mark.parametrize(
        "text",
        ["x1*(1 - x2)", "-x1^2", "2^3^2", "x1 - (x2 - 3)", "x1^-1 / (4 - x2)"],
    )
    def test_format_reparses_to_the_same_tree(self, text: str) -> None:
        """Test that formatted text parses back to an equal expression."""
        e = parse_expression(text)
        assert parse_expression(format_expression(e)) == e

    def test_combine_weights_expressions(self) -> None:
        """Test the weighted sum builder.

        Verifies that zero weights are skipped and an empty sum is zero.
        """
        e = combine(
            (2.0, parse_expression("x1")),
            (0.0, parse_expression("x2")),
            (1.0, constant(3.0)),
        )
        assert evaluate(e, {"x1": 1.5}) == pytest.approx(6.0)
        assert "x2" not in free_variables(e)
        assert evaluate(combine(), {}) == 0.0


class TestVectorized:
    """Tests for calling expressions on arrays."""

    def test_broadcasts_over_arrays(self) -> None:
        """Test that array bindings broadcast like NumPy operands.

        Verifies agreement with scalar evaluation on every grid point.
        """
        e = parse_expression("x1*(1 - x2) + 0.1*(1 - x1)*x1")
        own = np.linspace(0.0, 1.8, 7).reshape(1, -1)
        opponent = np.array([[0.0], [0.5]])
        values = e([own, opponent])
        assert values.shape == (2, 7)
        for r, x2 in enumerate(opponent[:, 0]):
            for c, x1 in enumerate(own[0]):
                assert values[r, c] == pytest.approx(evaluate(e, {"x1": x1, "x2": x2}))

    def test_vectorized_division_by_zero(self) -> None:
        """Test that a zero anywhere in a denominator array raises."""
        with pytest.raises(DivisionByZeroError):
            parse_expression("1 / x1")([np.array([1.0, 0.0])])
