"""Command-line entry point: ``xorrigidity {game,evaluate,rigidity,sdp}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import CapacityError, XorRigidityError
from .games import (
    BinaryGame,
    bias,
    binary_game_values,
    binary_win_probability,
    build_chsh_game,
    build_ffl_game,
    classical_bias_bruteforce,
    win_probability,
)
from .rigidity import BOUND_IDS
from .sdp import build_gsym, certify, duality_gap, gram_Z_from_strategy, solve_symmetric_dual
from .serialize import (
    binary_game_to_dict,
    certificate_to_dict,
    dumps,
    fmt,
    game_from_dict,
    game_to_dict,
    strategy_from_dict,
)
from .strategies import build_ffl_strategy, build_optimal_chsh_strategy
from .sweep import DEFAULT_N, DEFAULT_SEEDS, DEFAULT_THETA, SweepConfig, exit_code, reports_csv, run_report, run_sweep

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _write(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_json(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {what} file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path!r} is not valid JSON: {exc.msg}") from None


def _ffl_metadata() -> dict:
    vals = binary_game_values(build_ffl_game())
    return {"classical_value": str(vals.value), "classical_bias": str(vals.bias)}


def cmd_game_build(args) -> int:
    if args.kind == "chsh":
        g = build_chsh_game(args.n)
        doc = game_to_dict(g)
        summary = f"signed_sum={fmt(g.signed_sum)} absolute_sum={fmt(g.absolute_sum)} shape={g.shape[0]}x{g.shape[1]}"
    else:
        g = build_ffl_game()
        doc = binary_game_to_dict(g, _ffl_metadata())
        summary = f"questions={len(g.alice_questions)}x{len(g.bob_questions)} classical_value={doc['metadata']['classical_value']}"
    _write(dumps(doc), args.output)
    print(summary, file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


def _resolve_game(args):
    if args.game == "chsh":
        if args.n is None:
            raise UsageError("--n is required for chsh")
        return build_chsh_game(args.n)
    if args.game == "ffl":
        return build_ffl_game()
    return game_from_dict(_load_json(args.game, "game"))


def cmd_evaluate(args) -> int:
    game = _resolve_game(args)
    if not (args.canonical or args.classical or args.sdp or args.strategy):
        raise UsageError("pass --canonical, --classical, --sdp or --strategy FILE")
    lines = []
    if isinstance(game, BinaryGame):
        if args.classical:
            vals = binary_game_values(game)
            lines.append(f"classical_value: {vals.value}")
            lines.append(f"classical_bias: {vals.bias}")
        if args.canonical:
            if game.name != "ffl":
                raise UsageError("--canonical is only defined for the FFL binary game")
            ffl = build_ffl_strategy()
            lines.append(f"win_probability: {fmt(binary_win_probability(game, ffl.deterministic))}")
            lines.append(f"correlator_bias: {fmt(bias(build_chsh_game(2), ffl.correlator))}")
        if args.sdp:
            raise UsageError("--sdp needs an XOR game")
    else:
        strategy = None
        if args.strategy:
            strategy = strategy_from_dict(_load_json(args.strategy, "strategy"))
        elif args.canonical or args.sdp:
            if args.game != "chsh":
                raise UsageError("--canonical needs the chsh game or --strategy FILE")
            strategy = build_optimal_chsh_strategy(args.n)
        if strategy is not None and (args.canonical or args.strategy):
            beta = bias(game, strategy)
            lines.append(f"bias: {fmt(beta)}")
            lines.append(f"win_probability: {fmt(win_probability(beta))}")
        if args.classical:
            lines.append(f"classical_bias: {classical_bias_bruteforce(game).value}")
        if args.sdp:
            dual = solve_symmetric_dual(game)
            gap = duality_gap(dual.y, gram_Z_from_strategy(game, strategy), build_gsym(game))
            lines.append(f"dual_objective: {fmt(dual.objective)}")
            lines.append(f"duality_gap: {fmt(gap)}")
    print("\n".join(lines))
    return EXIT_OK


def _parse_seeds(tokens) -> list[int]:
    seeds = []
    for tok in tokens:
        for part in str(tok).split(","):
            if "-" in part.strip("-"):
                lo, hi = part.split("-")
                seeds.extend(range(int(lo), int(hi) + 1))
            elif part:
                seeds.append(int(part))
    return seeds


def _sweep_config(args) -> SweepConfig:
    base = {}
    if args.config:
        base = _load_json(args.config, "config")
    try:
        cfg = dict(
            game=args.game or base.get("game", "chsh"),
            n_values=tuple(args.n or base.get("n_values", DEFAULT_N)),
            theta_grid=tuple(float(t) for t in (args.theta or base.get("theta_grid", DEFAULT_THETA))),
            seeds=tuple(_parse_seeds(args.seeds) if args.seeds else base.get("seeds", DEFAULT_SEEDS)),
            bounds=tuple(args.bounds) if args.bounds else (tuple(base["bounds"]) if base.get("bounds") else None),
            output=args.output or base.get("output"),
            format=args.format or base.get("format", "json"),
            timings=args.timings or bool(base.get("timings", False)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad sweep configuration: {exc}") from None
    return SweepConfig(**cfg)


def cmd_rigidity_sweep(args) -> int:
    config = _sweep_config(args)
    results = run_sweep(config)
    if config.format == "csv":
        text = reports_csv(results)
    else:
        text = dumps(run_report(config, results))
    _write(text, config.output)
    code = exit_code(results)
    if code == EXIT_FAIL:
        print("bound failures detected; see summary.failures", file=sys.stderr)
    elif code == EXIT_CAPACITY:
        print("some sweep points exceeded the capacity cap", file=sys.stderr)
    return code


def cmd_sdp_certify(args) -> int:
    game = build_chsh_game(args.n)
    if args.strategy:
        strategy = strategy_from_dict(_load_json(args.strategy, "strategy"))
    else:
        strategy = build_optimal_chsh_strategy(args.n)
    _write(dumps(certificate_to_dict(certify(game, strategy))), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xorrigidity", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    game = sub.add_parser("game", help="build game matrices")
    game_sub = game.add_subparsers(dest="action", required=True)
    build = game_sub.add_parser("build", help="write a game as JSON")
    build.add_argument("kind", choices=("chsh", "ffl"))
    build.add_argument("--n", type=int, default=2)
    build.add_argument("--output", "-o")
    build.set_defaults(func=cmd_game_build)

    ev = sub.add_parser("evaluate", help="bias, win probability, classical value, duality gap")
    ev.add_argument("game", help="chsh, ffl, or a game JSON file")
    ev.add_argument("--n", type=int)
    ev.add_argument("--canonical", action="store_true")
    ev.add_argument("--classical", action="store_true")
    ev.add_argument("--sdp", action="store_true")
    ev.add_argument("--strategy", help="strategy JSON file")
    ev.set_defaults(func=cmd_evaluate)

    rig = sub.add_parser("rigidity", help="rigidity bound checks")
    rig_sub = rig.add_subparsers(dest="action", required=True)
    sw = rig_sub.add_parser("sweep", help="run every bound over an (n, theta, seed) grid")
    sw.add_argument("--config", help="JSON file with SweepConfig fields; flags override it")
    sw.add_argument("--game", choices=("chsh", "ffl"))
    sw.add_argument("--n", type=int, nargs="+")
    sw.add_argument("--theta", type=float, nargs="+")
    sw.add_argument("--seeds", nargs="+", help="integers or ranges such as 1-10")
    sw.add_argument("--bounds", nargs="+", choices=BOUND_IDS)
    sw.add_argument("--output", "-o")
    sw.add_argument("--format", choices=("json", "csv"))
    sw.add_argument("--timings", action="store_true", help="include wall-clock seconds per point")
    sw.set_defaults(func=cmd_rigidity_sweep)

    sdp = sub.add_parser("sdp", help="SDP certificates")
    sdp_sub = sdp.add_subparsers(dest="action", required=True)
    cert = sdp_sub.add_parser("certify", help="primal Z, dual y and duality gap for CHSH(n)")
    cert.add_argument("kind", choices=("chsh",))
    cert.add_argument("--n", type=int, default=2)
    cert.add_argument("--strategy", help="strategy JSON file (default: canonical)")
    cert.add_argument("--output", "-o")
    cert.set_defaults(func=cmd_sdp_certify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (XorRigidityError, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
