"""Tests for the ROE search, opportunity costs and the epsilon-Nash embedding."""

import json
from itertools import combinations

import numpy as np
import pytest

from robust_game_solver.config import DEDUPE_RADIUS
from robust_game_solver.cournot import CournotParams, as_game
from robust_game_solver.equilibrium import (
    EquilibriumKind,
    RoeOptions,
    _dedupe,
    cost_bound_certificate,
    cost_upper_bound,
    damped_iteration,
    deviation_gains,
    embed_epsilon_nash,
    epsilon_of_roe,
    find_roe,
    opportunity_cost,
    opportunity_costs,
    search_roe,
    verify_epsilon_nash,
    verify_roe,
)
from robust_game_solver.exceptions import EmbeddingError, NotAnEquilibriumError
from robust_game_solver.game import Game, load_game
from robust_game_solver.utils import max_norm
from robust_game_solver.worstcase import best_reply_maximin, worst_case_payoff

EXAMPLE_EQUILIBRIA = [
    (0.0, 1.125),
    (0.058824, 1.088235),
    (0.5, 1.0),
    (11.0 / 12.0, 11.0 / 12.0),
    (1.0, 0.5),
    (1.088235, 0.058824),
    (1.125, 0.0),
]


class TestFindRoe:
    """Tests for search_roe and find_roe."""

    def test_example_game_has_seven_equilibria(self, example_game: Game) -> None:
        """Test the full equilibrium set of the example game at delta = 1.

        Verifies the seven profiles, their order and that exactly one lies on
        the diagonal.
        """
        found = find_roe(example_game)
        assert len(found) == 7
        for report, expected in zip(found, EXAMPLE_EQUILIBRIA):
            assert report.kind is EquilibriumKind.POINT
            assert report.profile == pytest.approx(expected, abs=1e-4)
        symmetric = [r for r in found if abs(r.profile[0] - r.profile[1]) < 1e-6]
        assert len(symmetric) == 1

    def test_nominal_example_has_unique_nash(self, nominal_example: Game) -> None:
        """Test that the nominal game has the single point (8/11, 8/11)."""
        found = find_roe(nominal_example)
        assert len(found) == 1
        assert found[0].profile == pytest.approx((8.0 / 11.0, 8.0 / 11.0), abs=1e-6)
        assert found[0].epsilon == 0.0

    def test_one_player_game(self, one_player_text: str) -> None:
        """Test the one-player game, whose ROE is 1/6.

        Verifies that the reported cost is the nominal shortfall 1/72.
        """
        found = search_roe(load_game(one_player_text))
        assert len(found.equilibria) == 1
        report = found.equilibria[0]
        assert report.profile[0] == pytest.approx(1.0 / 6.0, abs=1e-8)
        assert report.costs[0] == pytest.approx(0.013889, abs=1e-6)
        assert found.failures == ()

    def test_every_reported_profile_verifies(self, example_game: Game) -> None:
        """Test that each reported equilibrium passes verify_roe."""
        for report in find_roe(example_game):
            ok, residual = verify_roe(example_game, report.profile)
            assert ok
            assert residual == pytest.approx(report.residual, abs=1e-9)

    def test_report_to_dict(self, example_game: Game) -> None:
        """Test the dictionary form of a report."""
        data = find_roe(example_game)[0].to_dict()
        assert data["kind"] == "point"
        assert len(data["profile"]) == 2
        assert len(data["costs"]) == 2

    @pytest.mark.parametrize(
        "kwargs",
        [{"resolution": 2}, {"tolerance": 0.0}, {"dedupe_radius": -1.0}, {"damping": 0.0},
         {"damping": 1.5}],
    )
    def test_options_are_validated(self, kwargs: dict) -> None:
        """Test that invalid search settings are rejected."""
        with pytest.raises(ValueError):
            RoeOptions(**kwargs)


class TestVerifyRoe:
    """Tests for verify_roe."""

    def test_rejects_non_equilibrium(self, example_game: Game) -> None:
        """Test a profile that is not a fixed point."""
        ok, residual = verify_roe(example_game, (0.5, 0.5))
        assert not ok
        assert residual == pytest.approx(0.5, abs=1e-6)

    def test_rejects_wrong_length(self, example_game: Game) -> None:
        """Test a profile with the wrong number of actions."""
        with pytest.raises(ValueError):
            verify_roe(example_game, (0.5,))


class TestOpportunityCost:
    """Tests for opportunity costs and their bound."""

    def test_cost_at_nominal_nash_action(self, example_game: Game) -> None:
        """Test the cost against the nominal Nash action 8/11.

        Verifies the value 0.044628 and the bound 0.288.
        """
        cost = opportunity_cost(example_game, 0, 8.0 / 11.0)
        bound = cost_upper_bound(example_game, 0, 8.0 / 11.0)
        assert cost == pytest.approx(0.044628, abs=1e-6)
        assert bound == pytest.approx(0.288, abs=1e-6)
        assert bound >= cost

    def test_cost_vanishes_at_zero(self, nominal_example: Game) -> None:
        """Test that the cost and its bound are zero without uncertainty."""
        assert opportunity_cost(nominal_example, 0, 0.3) == 0.0
        assert cost_upper_bound(nominal_example, 0, 0.3) == 0.0

    @pytest.mark.parametrize("delta", [0.1, 0.4, 0.7, 1.0])
    @pytest.mark.parametrize("x_opp", [0.0, 0.5, 1.0, 1.5])
    def test_bound_dominates_cost(self, example_game: Game, delta: float, x_opp: float) -> None:
        """Test that the linear bound never falls below the cost."""
        game = example_game.with_delta(delta)
        assert cost_upper_bound(game, 0, x_opp) >= opportunity_cost(game, 0, x_opp) - 1e-9

    def test_bound_certificate_covers_epsilon(self, example_game: Game) -> None:
        """Test that the certificate is at least the epsilon of an ROE."""
        profile = (1.0, 0.5)
        assert cost_bound_certificate(example_game, profile) >= epsilon_of_roe(
            example_game, profile
        )


class TestEpsilonNash:
    """Tests for epsilon_of_roe and verify_epsilon_nash."""

    def test_epsilon_at_asymmetric_roe(
        self, example_game: Game, nominal_example: Game
    ) -> None:
        """Test the epsilon of the ROE (1, 0.5).

        Verifies that player 2 has no cost, and that the profile is an
        epsilon-Nash point of the nominal game at epsilon but not just below.
        """
        profile = (1.0, 0.5)
        costs = opportunity_costs(example_game, profile)
        assert costs[1] == pytest.approx(0.0, abs=1e-9)
        eps = epsilon_of_roe(example_game, profile)
        assert eps == pytest.approx(0.0041667, abs=1e-6)
        assert verify_epsilon_nash(nominal_example, profile, eps)
        assert not verify_epsilon_nash(nominal_example, profile, 0.99 * eps)

    def test_epsilon_matches_deviation_gain(self, example_game: Game) -> None:
        """Test that at an ROE the cost equals the nominal deviation gain."""
        profile = (11.0 / 12.0, 11.0 / 12.0)
        gains = deviation_gains(example_game, profile)
        assert max(gains) == pytest.approx(epsilon_of_roe(example_game, profile), abs=1e-8)

    def test_non_equilibrium_raises(self, example_game: Game) -> None:
        """Test that epsilon_of_roe rejects a profile that is not an ROE."""
        with pytest.raises(NotAnEquilibriumError):
            epsilon_of_roe(example_game, (0.5, 0.5))


class TestEmbedding:
    """Tests for embed_epsilon_nash."""

    def test_zero_epsilon_returns_the_game(self, nominal_example: Game) -> None:
        """Test that a Nash equilibrium embeds into the nominal game itself."""
        point = (8.0 / 11.0, 8.0 / 11.0)
        certificate = embed_epsilon_nash(nominal_example, point, 0.0, 1.0)
        assert certificate.game == nominal_example
        assert certificate.delta == 0.0

    def test_embeds_asymmetric_point(self, nominal_example: Game) -> None:
        """Test embedding (1, 0.5) with eps = 0.005 and H = 1.

        Verifies the level eps / H, the indicator penalty and that no
        deviation beats the point in the constructed game.
        """
        point = (1.0, 0.5)
        certificate = embed_epsilon_nash(nominal_example, point, 0.005, 1.0)
        assert certificate.delta == pytest.approx(0.005)
        assert certificate.residual <= 1e-9
        game = certificate.game
        assert game.payoffs[0].penalty is not None
        anchored, _ = worst_case_payoff(game, 0, point)
        deviated, _ = worst_case_payoff(game, 0, (1.1 / 1.2, 0.5))
        assert deviated <= anchored + 1e-9
        assert certificate.to_dict()["H"] == 1.0

    @pytest.mark.parametrize(
        "eps, bound",
        [(0.004, 1.0), (0.005, 0.005), (-0.1, 1.0)],
    )
    def test_rejects_invalid_embedding(
        self, nominal_example: Game, eps: float, bound: float
    ) -> None:
        """Test a too-small eps, H <= eps and a negative eps."""
        with pytest.raises(EmbeddingError):
            embed_epsilon_nash(nominal_example, (1.0, 0.5), eps, bound)

    def test_rejects_robust_game(self, example_game: Game) -> None:
        """Test that only games with every delta at 0 can be embedded."""
        with pytest.raises(EmbeddingError):
            embed_epsilon_nash(example_game, (1.0, 0.5), 0.005, 1.0)


def three_player_game() -> Game:
    """Symmetric three-player game with the single ROE (1/3, 1/3, 1/3).

    Player i earns ``x_i (1 - (x_j + x_k) / 2) - alpha x_i^2`` with ``alpha``
    in ``[0.5, 1]``; the worst case is ``alpha = 1``.
    """
    players = []
    for own, first, second in (("x1", "x2", "x3"), ("x2", "x1", "x3"), ("x3", "x1", "x2")):
        players.append({
            "action": [0, 1],
            "payoff": {
                "const": f"{own}*(1 - 0.5*{first} - 0.5*{second})",
                "terms": [{"param": 1, "coeff": f"-{own}^2"}],
            },
            "uncertainty": {"vertices": [[0.5], [1.0]], "nominal": [0.75]},
            "delta": 1,
        })
    return load_game(json.dumps({"name": "three", "players": 3, "player": players}))


class TestMultiStartSearch:
    """Tests for the damped best-response search used with three or more players."""

    def test_symmetric_three_player_game(self) -> None:
        """Test that every start converges to the one ROE.

        Verifies that duplicates from different starts are merged and no
        start is reported as failed.
        """
        found = search_roe(three_player_game(), RoeOptions(starts=8))

        assert len(found.equilibria) == 1
        assert found.equilibria[0].profile == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-6)
        assert found.failures == ()

    def test_damped_iteration_converges(self) -> None:
        """Test a single run from the corner of the action box."""
        profile, residual, converged = damped_iteration(
            three_player_game(), (1.0, 0.0, 1.0), RoeOptions()
        )

        assert converged
        assert residual <= 1e-8
        assert profile == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-6)

    def test_unconverged_starts_are_reported(self) -> None:
        """Test that starts cut off by the iteration cap are kept as failures."""
        found = search_roe(three_player_game(), RoeOptions(starts=4, max_iterations=1))

        assert found.equilibria == ()
        assert len(found.failures) == 4
        for failure in found.failures:
            assert failure.residual > 1e-8
            assert set(failure.to_dict()) == {"start", "last", "residual"}


class TestCompleteness:
    """Tests that the two-player search misses nothing and repeats nothing."""

    def test_matches_dense_residual_scan(self, example_game: Game) -> None:
        """Test find_roe against sign changes of x1 - R1(R2(x1)) on 4097 points.

        Verifies the same count and that each reported profile lies within
        one grid cell of a scanned root.
        """
        xs = np.linspace(0.0, 1.8, 4097)
        phis = np.array([
            x - best_reply_maximin(example_game, 0, best_reply_maximin(example_game, 1, x))
            for x in xs
        ])
        roots = [float(x) for x, phi in zip(xs, phis) if phi == 0.0]
        for k in range(len(xs) - 1):
            if phis[k] * phis[k + 1] < 0.0:
                roots.append(float(0.5 * (xs[k] + xs[k + 1])))
        roots.sort()

        found = find_roe(example_game)

        assert len(roots) == len(found) == 7
        spacing = xs[1] - xs[0]
        for report, root in zip(found, roots):
            assert abs(report.profile[0] - root) <= spacing
            assert report.profile == pytest.approx(
                (report.profile[0], best_reply_maximin(example_game, 1, report.profile[0])),
                abs=1e-4,
            )

    @pytest.mark.parametrize("source", ["example", "cournot"])
    def test_equilibria_are_separated(
        self, source: str, example_game: Game, case3_params: CournotParams
    ) -> None:
        """Test that no two reported points are closer than the dedupe radius."""
        game = example_game if source == "example" else as_game(case3_params)
        found = find_roe(game)
        for first, second in combinations(found, 2):
            assert max_norm(first.profile, second.profile) >= DEDUPE_RADIUS

    def test_dedupe_merges_only_same_kind(self) -> None:
        """Test merging of near points while an interval at the same spot survives."""
        candidates = [
            ((0.5, 0.5), None),
            ((0.5 + 5e-7, 0.5), None),
            ((0.5, 0.5), (0.6, 0.4)),
            ((0.7, 0.2), None),
        ]

        kept = _dedupe(candidates, 1e-6)

        assert kept == [
            ((0.5, 0.5), None),
            ((0.5, 0.5), (0.6, 0.4)),
            ((0.7, 0.2), None),
        ]


class TestCostBoundProperty:
    """Tests of the linear bound over random opponent actions."""

    @pytest.mark.parametrize("source", ["example", "cournot_case1", "cournot_case3"])
    def test_bound_dominates_cost_at_random_points(
        self,
        source: str,
        example_game: Game,
        case1_params: CournotParams,
        case3_params: CournotParams,
    ) -> None:
        """Test the bound against the cost at 200 random (player, opponent) pairs."""
        game = {
            "example": example_game,
            "cournot_case1": as_game(case1_params),
            "cournot_case3": as_game(case3_params),
        }[source]
        rng = np.random.default_rng(2024)
        for _ in range(200):
            i = int(rng.integers(game.n))
            opponent = game.actions[1 - i]
            x_opp = float(rng.uniform(opponent.lo, opponent.hi))
            assert cost_upper_bound(game, i, x_opp) >= opportunity_cost(game, i, x_opp) - 1e-9


class TestEmbeddingEveryEquilibrium:
    """End-to-end embedding of every point ROE of the test games."""

    @pytest.mark.parametrize("source", ["example", "cournot_case1", "cournot_case3"])
    def test_embeds_at_epsilon_and_fails_below(
        self,
        source: str,
        example_game: Game,
        case1_params: CournotParams,
        case3_params: CournotParams,
    ) -> None:
        """Test embedding each ROE at its epsilon and rejecting 0.99 epsilon.

        Verifies that the epsilon is the ROE's opportunity cost and that the
        certificate's residual is within tolerance.
        """
        game = {
            "example": example_game,
            "cournot_case1": as_game(case1_params),
            "cournot_case3": as_game(case3_params),
        }[source]
        nominal = game.nominal()
        found = find_roe(game)
        assert found
        for report in found:
            point = report.profile
            eps = max(deviation_gains(nominal, point))
            assert eps > 1e-6
            assert eps == pytest.approx(epsilon_of_roe(game, point), abs=1e-6)
            bound = 10.0 * eps + 1.0
            certificate = embed_epsilon_nash(nominal, point, eps, bound)
            assert certificate.delta == pytest.approx(eps / bound)
            assert certificate.residual <= 1e-9
            with pytest.raises(EmbeddingError):
                embed_epsilon_nash(nominal, point, 0.99 * eps, bound)
