"""Tests for delta sweeps and equilibrium path tracing."""

import pytest

from robust_game_solver import cournot
from robust_game_solver.continuation import (
    PathStatus,
    cost_continuity_probe,
    delta_levels,
    sweep_delta,
    trace_equilibrium,
)
from robust_game_solver.cournot import CournotParams, as_game, roe_set
from robust_game_solver.equilibrium import EquilibriumKind
from robust_game_solver.exceptions import ContinuationError
from robust_game_solver.game import Game, strictly_concave
from robust_game_solver.utils import max_norm


def symmetric_path(delta: float) -> float:
    """Diagonal ROE of the example game at level ``delta``."""
    alpha_lo = 0.6 - 0.5 * delta
    return (1.0 + alpha_lo) / (1.0 + 2.0 * alpha_lo)


class TestDeltaLevels:
    """Tests for delta_levels."""

    def test_evenly_spaced(self) -> None:
        """Test the levels of an eleven-step sweep."""
        levels = delta_levels(0.0, 1.0, 11)
        assert levels[0] == 0.0
        assert levels[-1] == 1.0
        assert levels[3] == 0.3

    def test_single_step(self) -> None:
        """Test that one step returns the start level only."""
        assert delta_levels(0.4, 0.9, 1) == [0.4]

    @pytest.mark.parametrize("start, stop, steps", [(0.0, 1.0, 0), (0.8, 0.2, 5)])
    def test_rejects_bad_range(self, start: float, stop: float, steps: int) -> None:
        """Test a zero step count and a reversed range."""
        with pytest.raises(ValueError):
            delta_levels(start, stop, steps)


class TestSweep:
    """Tests for sweep_delta."""

    def test_counts_at_both_ends(self, example_game: Game) -> None:
        """Test the equilibrium counts at delta = 0 and delta = 1."""
        results = sweep_delta(example_game, [0.0, 1.0])
        assert list(results) == [0.0, 1.0]
        assert len(results[0.0]) == 1
        assert len(results[1.0]) == 7

    def test_symmetric_equilibrium_follows_closed_form(self, example_game: Game) -> None:
        """Test the diagonal equilibrium at intermediate levels."""
        for level, reports in sweep_delta(example_game, [0.25, 0.5]).items():
            diagonal = [r for r in reports if abs(r.profile[0] - r.profile[1]) < 1e-6]
            assert len(diagonal) == 1
            assert diagonal[0].profile[0] == pytest.approx(symmetric_path(level), abs=1e-6)

    def test_rejects_unsorted_levels(self, example_game: Game) -> None:
        """Test that levels must increase."""
        with pytest.raises(ValueError):
            sweep_delta(example_game, [0.5, 0.1])


class TestTrace:
    """Tests for trace_equilibrium and cost_continuity_probe."""

    def test_symmetric_path_reaches_nash(self, example_game: Game) -> None:
        """Test the path from (11/12, 11/12) down to delta = 0.

        Verifies that it follows the closed form, ends at the nominal Nash
        equilibrium and that epsilon vanishes along it.
        """
        start = (11.0 / 12.0, 11.0 / 12.0)
        path = trace_equilibrium(example_game, start, 1.0, step=0.05)
        assert path.status is PathStatus.REACHED_ZERO
        assert path.counterpart
        assert path.break_delta is None
        assert path.terminal.delta == 0.0
        assert path.terminal.profile == pytest.approx((8.0 / 11.0, 8.0 / 11.0), abs=1e-6)
        for point in path.points:
            assert point.profile[0] == pytest.approx(symmetric_path(point.delta), abs=1e-6)
        deltas = [point.delta for point in path.points]
        assert deltas == sorted(deltas, reverse=True)

        trace = cost_continuity_probe(example_game, path)
        x = 11.0 / 12.0
        nominal_best = (1.6 - x) ** 2 / 2.4
        nominal_at_x = x * (1.6 - x) - 0.6 * x ** 2
        assert trace[0][1] == pytest.approx(nominal_best - nominal_at_x, abs=1e-6)
        assert trace[-1][0] == 0.0
        assert trace[-1][1] == pytest.approx(0.0, abs=1e-9)

    def test_corner_path_breaks(self, example_game: Game) -> None:
        """Test the path from (1.125, 0), which has no Nash counterpart.

        Verifies that it breaks between delta = 0.9 and delta = 0.95.
        """
        path = trace_equilibrium(example_game, (1.125, 0.0), 1.0, step=0.05)
        assert path.status is PathStatus.BROKEN
        assert not path.counterpart
        assert 0.9 < path.break_delta <= 0.95
        assert path.to_dict()["status"] == "broken"
        with pytest.raises(ContinuationError):
            cost_continuity_probe(example_game, path)

    def test_rejects_non_equilibrium_start(self, example_game: Game) -> None:
        """Test that the start profile must be an ROE."""
        with pytest.raises(ContinuationError):
            trace_equilibrium(example_game, (0.5, 0.5), 1.0)

    def test_rejects_non_positive_step(self, example_game: Game) -> None:
        """Test that the step and jump tolerance must be positive."""
        with pytest.raises(ContinuationError):
            trace_equilibrium(example_game, (1.0, 0.5), 1.0, step=0.0)

    def test_asymmetric_path_breaks_near_one_fifth(self, example_game: Game) -> None:
        """Test the path from (1, 0.5), which leaves the kink below delta = 0.2.

        Verifies the break level, that every traced point keeps x1 = 1 and
        that the cost trace is refused.
        """
        path = trace_equilibrium(example_game, (1.0, 0.5), 1.0)

        assert path.status is PathStatus.BROKEN
        assert not path.counterpart
        assert path.break_delta == pytest.approx(0.2, abs=1e-3)
        assert path.points[0].delta == 1.0
        for point in path.points:
            assert point.profile == pytest.approx((1.0, 0.5), abs=1e-6)
        with pytest.raises(ContinuationError):
            cost_continuity_probe(example_game, path)


class TestCournotPath:
    """Tests of a duopoly path with a Nash counterpart."""

    def test_case1_reaches_cournot_nash(self, case1_params: CournotParams) -> None:
        """Test the unique case-1 ROE traced down to the Cournot-Nash point.

        Verifies the closed form ``10 / (2.5 + delta)`` along the path and
        that the cost trace starts at the closed-form opportunity cost and
        vanishes at delta = 0.
        """
        game = as_game(case1_params)
        (start,) = roe_set(case1_params).equilibria

        path = trace_equilibrium(game, start.profile, 1.0, step=0.02)

        assert path.status is PathStatus.REACHED_ZERO
        assert path.counterpart
        assert path.terminal.delta == 0.0
        assert path.terminal.profile == pytest.approx((4.0, 4.0), abs=1e-4)
        for point in path.points:
            q = 10.0 / (2.5 + point.delta)
            assert point.profile == pytest.approx((q, q), abs=1e-5)

        trace = cost_continuity_probe(game, path)
        assert len(trace) == len(path.points)
        assert trace[0][1] == pytest.approx(
            cournot.opportunity_cost(case1_params, start.profile[1]), abs=1e-6
        )
        assert all(eps >= 0.0 for _, eps in trace)
        assert trace[-1] == (0.0, 0.0)


class TestSweepProperties:
    """Tests relating sweeps, traces and strict concavity."""

    def test_trace_points_appear_in_sweep(self, example_game: Game) -> None:
        """Test that every traced profile is an equilibrium of the sweep at its level."""
        path = trace_equilibrium(example_game, (11.0 / 12.0, 11.0 / 12.0), 1.0, step=0.25)
        levels = [point.delta for point in path.points]

        sweep = sweep_delta(example_game, sorted(levels))

        for point in path.points:
            assert any(
                max_norm(point.profile, report.profile) <= 1e-4 for report in sweep[point.delta]
            )

    @pytest.mark.parametrize("fixture", ["case1_params", "case3_params"])
    def test_unique_equilibrium_for_strictly_concave_game(
        self, fixture: str, request: pytest.FixtureRequest
    ) -> None:
        """Test one ROE at every level for strictly concave duopolies.

        Case 1 is unique at every level; case 3 is swept only below delta*,
        where its ROE is unique.
        """
        params = request.getfixturevalue(fixture)
        game = as_game(params)
        assert strictly_concave(game)
        levels = [0.0, 0.25, 0.5, 0.75, 1.0] if fixture == "case1_params" else [0.0, 0.1, 0.2]

        for level, reports in sweep_delta(game, levels).items():
            assert len(reports) == 1, f"delta {level}"
            assert reports[0].kind is EquilibriumKind.POINT

    def test_count_jumps_across_delta_star(self, case3_params: CournotParams) -> None:
        """Test that case 3 goes from one ROE below delta* to three above it."""
        counts = {
            level: len(reports)
            for level, reports in sweep_delta(as_game(case3_params), [0.28, 0.30]).items()
        }

        assert counts == {0.28: 1, 0.30: 3}
