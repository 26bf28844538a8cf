"""Command-line front end for the robust game solver.

Every subcommand loads a game file (or a catalogue name), runs one solver
operation and writes JSON or CSV to ``--output`` or standard output. Logs
go to standard error.

Exit codes: 0 on success, 1 on I/O, parse or range errors, 2 when the
result is a mathematical finding (assumption violations, failed
verification).
"""

import argparse
import csv
import io
import json
import logging
import os
from dataclasses import asdict
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

from .config import (
    DEFAULT_GRID_RESOLUTION,
    JUMP_TOLERANCE,
    ROE_TOLERANCE,
    TRACE_STEP,
    VALIDATION_SAMPLES,
)
from .continuation import cost_continuity_probe, delta_levels, sweep_delta, trace_equilibrium
from .cournot import (
    CournotParams,
    delta_star,
    nominal_nash,
    nominal_profit,
    opportunity_cost as cournot_cost,
    profit_gap,
    robust_reaction,
    roe_set,
    scaled_params,
    thresholds,
    worst_case_profit,
)
from .equilibrium import (
    RoeOptions,
    cost_upper_bound,
    embed_epsilon_nash,
    opportunity_cost,
    roe_residual,
    search_roe,
)
from .exceptions import (
    AmbiguousTieError,
    ContinuationError,
    GameFileError,
    NoCornerCertifiedError,
    RobustGameError,
)
from .game import Game, load_game, strictly_concave, validate_assumptions
from .library import get_game, list_games
from .utils import format_float, parse_profile, round_floats
from .worstcase import best_reply_corner, best_reply_maximin, worst_case_frontier

logger: logging.Logger = logging.getLogger(__name__)

EXIT_OK: int = 0
EXIT_ERROR: int = 1
EXIT_FINDINGS: int = 2


# ============================================================================
# INPUT / OUTPUT
# ============================================================================


def load_game_source(source: str) -> Game:
    """Load a game from a file path, falling back to the catalogue by name.

    Raises
    ------
    GameFileError
        If ``source`` is neither an existing file nor a catalogue game.
    """
    if os.path.isfile(source):
        with open(source, "rb") as handle:
            return load_game(handle.read())
    if source in list_games():
        return get_game(source)
    raise GameFileError(f"no such game file or catalogue game: {source}")


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info("Wrote %s", output)
    else:
        print(text, end="")


def emit_json(payload: Any, output: Optional[str]) -> None:
    _emit(json.dumps(round_floats(payload), indent=2, sort_keys=True) + "\n", output)


def emit_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], output: Optional[str]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([
            format_float(value) if isinstance(value, float) else value for value in row
        ])
    _emit(buffer.getvalue(), output)


def _game(args: argparse.Namespace) -> Game:
    game = load_game_source(args.game)
    delta = getattr(args, "delta", None)
    return game if delta is None else game.with_delta(delta)


def _player(game: Game, player: int) -> int:
    if not 1 <= player <= game.n:
        raise ValueError(f"--player must be between 1 and {game.n}, got {player}")
    return player - 1


def _opponents(game: Game, text: str) -> List[float]:
    opponents = list(parse_profile(text))
    if len(opponents) != game.n - 1:
        raise ValueError(f"expected {game.n - 1} opponent actions, got {len(opponents)}")
    return opponents


# ============================================================================
# COMMANDS
# ============================================================================


def _verify_report(game: Game, args: argparse.Namespace) -> int:
    with open(args.verify, encoding="utf-8") as handle:
        report = json.load(handle)
    if "delta" in report:
        game = game.with_delta(report["delta"])
    checks = []
    for entry in report.get("equilibria", []):
        for key in ("profile", "end_profile"):
            if entry.get(key) is None:
                continue
            residual = roe_residual(game, entry[key], args.grid)
            checks.append({"profile": entry[key], "residual": residual,
                           "ok": residual <= args.tol})
    failed = sum(1 for check in checks if not check["ok"])
    emit_json({"tolerance": args.tol, "checks": checks, "failed": failed}, args.output)
    return EXIT_FINDINGS if failed else EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    """Find every ROE, or re-check a previous report with ``--verify``."""
    game = _game(args)
    if args.verify:
        return _verify_report(game, args)
    findings = validate_assumptions(game)
    if findings:
        emit_json({"valid": False, "findings": [f.to_dict() for f in findings]}, args.output)
        return EXIT_FINDINGS
    search = search_roe(game, RoeOptions(resolution=args.grid, tolerance=args.tol))
    emit_json({
        "game": game.name,
        "delta": list(game.delta),
        "strictly_concave": strictly_concave(game),
        "count": len(search.equilibria),
        "equilibria": [report.to_dict() for report in search.equilibria],
        "failed_starts": [failure.to_dict() for failure in search.failures],
    }, args.output)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    """Solve over evenly spaced levels; one CSV row per equilibrium action."""
    game = load_game_source(args.game)
    levels = delta_levels(args.start, args.stop, args.steps)
    results = sweep_delta(game, levels, RoeOptions(resolution=args.grid, tolerance=args.tol))
    rows = []
    for level in levels:
        for index, report in enumerate(results[level], start=1):
            for player, action in enumerate(report.profile, start=1):
                rows.append((float(level), index, player, float(action)))
    emit_csv(("delta", "eq_index", "player", "action"), rows, args.output)
    return EXIT_OK


def cmd_trace(args: argparse.Namespace) -> int:
    """Follow an ROE to delta = 0."""
    game = load_game_source(args.game)
    path = trace_equilibrium(
        game, parse_profile(args.start), args.start_delta,
        step=args.step, jump_tol=args.jump_tol, resolution=args.grid,
    )
    if args.format == "csv":
        emit_csv(("delta", "epsilon"), [(p.delta, p.epsilon) for p in path.points], args.output)
        return EXIT_OK
    payload: Dict[str, Any] = path.to_dict()
    payload["epsilon_vanishes"] = None
    if path.counterpart:
        try:
            cost_continuity_probe(game, path, args.grid)
            payload["epsilon_vanishes"] = True
        except ContinuationError as err:
            logger.warning("%s", err)
            payload["epsilon_vanishes"] = False
    emit_json(payload, args.output)
    return EXIT_OK


def cmd_cost(args: argparse.Namespace) -> int:
    """Opportunity cost of one player with its upper bound."""
    game = _game(args)
    i = _player(game, args.player)
    opponents = _opponents(game, args.opponents)
    emit_json({
        "player": args.player,
        "delta": game.delta[i],
        "cost": opportunity_cost(game, i, opponents, args.grid),
        "bound": cost_upper_bound(game, i, opponents, args.grid),
    }, args.output)
    return EXIT_OK


def cmd_embed(args: argparse.Namespace) -> int:
    """Embed an epsilon-Nash point of the nominal game as an ROE."""
    game = load_game_source(args.game).nominal()
    certificate = embed_epsilon_nash(game, parse_profile(args.profile), args.eps, args.H,
                                     args.grid)
    emit_json(certificate.to_dict(), args.output)
    return EXIT_OK


def cmd_frontier(args: argparse.Namespace) -> int:
    game = _game(args)
    report = worst_case_frontier(game, _player(game, args.player), args.resolution)
    payload = report.to_dict()
    payload["frontier"] = [k + 1 for k in report.frontier]
    emit_json(payload, args.output)
    return EXIT_OK


def cmd_corner(args: argparse.Namespace) -> int:
    """Corner-point reply next to the maximin reply."""
    game = _game(args)
    i = _player(game, args.player)
    opponents = _opponents(game, args.opponents)
    maximin = best_reply_maximin(game, i, opponents, args.grid)
    payload: Dict[str, Any] = {"player": args.player, "maximin": maximin}
    try:
        corner = best_reply_corner(game, i, opponents, args.grid)
        payload.update(corner=corner, corner_error=None, difference=abs(corner - maximin))
    except (NoCornerCertifiedError, AmbiguousTieError) as err:
        payload.update(corner=None, corner_error=str(err), difference=None)
    emit_json(payload, args.output)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    game = _game(args)
    findings = validate_assumptions(game, args.samples)
    emit_json({"valid": not findings, "findings": [f.to_dict() for f in findings]},
              args.output)
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import main as serve

    serve()
    return EXIT_OK


def _params(args: argparse.Namespace) -> CournotParams:
    return CournotParams(
        a=args.a, b_hat=args.bhat, gamma_hat=args.ghat, b_lo=args.blo, b_hi=args.bhi,
        gamma_lo=args.glo, gamma_hi=args.ghi, delta=args.delta,
    )


def _cournot_profit(p: CournotParams, args: argparse.Namespace) -> Dict[str, Any]:
    if args.qi is None or args.qopp is None:
        return {"profits": profit_gap(p)}
    return {
        "q": [args.qi, args.qopp],
        "nominal_profit": nominal_profit(p, args.qi, args.qopp),
        "worst_case_profit": worst_case_profit(p, args.qi, args.qopp),
    }


COURNOT_COMMANDS: Dict[str, Callable[[CournotParams, argparse.Namespace], Dict[str, Any]]] = {
    "thresholds": lambda p, args: asdict(thresholds(p)),
    "reaction": lambda p, args: {"q": args.q, "reaction": robust_reaction(p, args.q)},
    "nash": lambda p, args: {"nash": list(nominal_nash(p))},
    "delta-star": lambda p, args: asdict(delta_star(p)),
    "roe-set": lambda p, args: roe_set(p).to_dict(),
    "profit": _cournot_profit,
    "scaled": lambda p, args: asdict(scaled_params(p)),
    "cost": lambda p, args: {"q": args.q, "cost": cournot_cost(p, args.q)},
}


def cmd_cournot(args: argparse.Namespace) -> int:
    """Closed-form duopoly results."""
    p = _params(args)
    emit_json(COURNOT_COMMANDS[args.cournot_command](p, args), args.output)
    return EXIT_OK


# ============================================================================
# PARSER
# ============================================================================


def _game_arguments(parser: argparse.ArgumentParser, delta: bool = True) -> None:
    parser.add_argument("game", help="Game file path or catalogue name")
    if delta:
        parser.add_argument("--delta", type=float, default=None,
                            help="Uncertainty level for every player (default: from file)")
    parser.add_argument("--grid", type=int, default=DEFAULT_GRID_RESOLUTION,
                        help="Grid resolution of the best-reply scans")
    parser.add_argument("--output", "-o", default=None, help="Output file (default: stdout)")


def _cournot_parser(sub: Any) -> None:
    common = argparse.ArgumentParser(add_help=False)
    for flag, name in (("--a", "demand intercept"), ("--bhat", "nominal own slope"),
                       ("--ghat", "nominal cross slope"), ("--blo", "lowest own slope"),
                       ("--bhi", "highest own slope"), ("--glo", "lowest cross slope"),
                       ("--ghi", "highest cross slope")):
        common.add_argument(flag, type=float, required=True, help=name)
    common.add_argument("--delta", type=float, default=1.0, help="Uncertainty level")
    common.add_argument("--output", "-o", default=None, help="Output file (default: stdout)")

    p_cournot = sub.add_parser("cournot", help="Closed-form robust Cournot duopoly")
    commands = p_cournot.add_subparsers(dest="cournot_command", required=True)
    for name in ("thresholds", "nash", "delta-star", "roe-set", "scaled"):
        commands.add_parser(name, parents=[common])
    for name in ("reaction", "cost"):
        p_q = commands.add_parser(name, parents=[common])
        p_q.add_argument("--q", type=float, required=True, help="Opponent output")
    p_profit = commands.add_parser("profit", parents=[common])
    p_profit.add_argument("--qi", type=float, default=None, help="Own output")
    p_profit.add_argument("--qopp", type=float, default=None, help="Opponent output")
    p_cournot.set_defaults(func=cmd_cournot)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robust-games",
        description="Equilibria of games with uncertain payoffs",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="Find every robust-optimization equilibrium")
    _game_arguments(p_solve)
    p_solve.add_argument("--tol", type=float, default=ROE_TOLERANCE,
                         help="Equilibrium residual tolerance")
    p_solve.add_argument("--verify", default=None, metavar="REPORT",
                         help="Re-check the profiles of a previous solve report")
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="Solve over a range of uncertainty levels (CSV)")
    _game_arguments(p_sweep, delta=False)
    p_sweep.add_argument("--from", dest="start", type=float, default=0.0)
    p_sweep.add_argument("--to", dest="stop", type=float, default=1.0)
    p_sweep.add_argument("--steps", type=int, default=11)
    p_sweep.add_argument("--tol", type=float, default=ROE_TOLERANCE)
    p_sweep.set_defaults(func=cmd_sweep)

    p_trace = sub.add_parser("trace", help="Follow an equilibrium to zero uncertainty")
    _game_arguments(p_trace, delta=False)
    p_trace.add_argument("--start", required=True, help="Starting profile, e.g. 1,0.5")
    p_trace.add_argument("--start-delta", type=float, default=1.0)
    p_trace.add_argument("--step", type=float, default=TRACE_STEP)
    p_trace.add_argument("--jump-tol", type=float, default=JUMP_TOLERANCE)
    p_trace.add_argument("--format", choices=("json", "csv"), default="json")
    p_trace.set_defaults(func=cmd_trace)

    p_cost = sub.add_parser("cost", help="Opportunity cost of uncertainty for one player")
    _game_arguments(p_cost)
    p_cost.add_argument("--player", type=int, required=True, help="Player number (from 1)")
    p_cost.add_argument("--opponents", required=True, help="Opponent actions, comma separated")
    p_cost.set_defaults(func=cmd_cost)

    p_embed = sub.add_parser("embed", help="Embed an epsilon-Nash point as an ROE")
    _game_arguments(p_embed, delta=False)
    p_embed.add_argument("--profile", required=True)
    p_embed.add_argument("--eps", type=float, required=True)
    p_embed.add_argument("--H", type=float, required=True, help="Penalty bound, above eps")
    p_embed.set_defaults(func=cmd_embed)

    p_frontier = sub.add_parser("frontier", help="Worst-case frontier of one player")
    _game_arguments(p_frontier)
    p_frontier.add_argument("--player", type=int, required=True)
    p_frontier.add_argument("--resolution", type=int, default=101,
                            help="Grid points per player axis")
    p_frontier.set_defaults(func=cmd_frontier)

    p_corner = sub.add_parser("corner", help="Corner-point reply next to the maximin reply")
    _game_arguments(p_corner)
    p_corner.add_argument("--player", type=int, required=True)
    p_corner.add_argument("--opponents", required=True)
    p_corner.set_defaults(func=cmd_corner)

    p_validate = sub.add_parser("validate", help="Check the existence assumptions")
    _game_arguments(p_validate)
    p_validate.add_argument("--samples", type=int, default=VALIDATION_SAMPLES)
    p_validate.set_defaults(func=cmd_validate)

    _cournot_parser(sub)

    p_serve = sub.add_parser("serve", help="Run the MCP server over stdio")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the exit code."""
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        return int(args.func(args))
    except (OSError, ValueError, ArithmeticError, RobustGameError) as err:
        logger.error("%s", err)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
