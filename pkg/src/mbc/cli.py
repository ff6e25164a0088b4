"""Command-line surface: generate databases, analyze games, decide stability.

Reports are single JSON objects on standard output, built deterministically
so identical inputs give byte-identical output; wall-clock timings are only
attached under --timings since they break that contract.  Exit codes signal
operational problems only: a game with an empty or unstable core still
exits 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import generate, props, stability
from .generate import MbcDatabase, peleg, peleg_stream
from .model import (
    Game,
    GameFormatError,
    coalition_key,
    format_value,
    full_mask,
    parse_coalition_key,
    parse_game,
)

DB_DIR_ENV = "MBC_DB_DIR"

ANALYZE_CHECKS = ("core", "exact", "effective", "sve", "extendable", "feasible")


class CliError(Exception):
    pass


def _parse_set_system(text: str, n: int):
    masks = []
    for part in text.split(";"):
        part = part.strip()
        if part:
            masks.append(parse_coalition_key(part, n))
    if not masks:
        raise CliError("empty set system")
    return masks


def cmd_generate(args) -> int:
    n = args.players
    if n < 1:
        raise CliError("n must be at least 1")
    if n >= 7 and not args.allow_long:
        raise CliError(
            f"n={n} is a long-running generation; pass --allow-long to confirm"
        )
    set_system = None
    if args.restrict:
        set_system = _parse_set_system(args.restrict, n)
    if n >= 7 and args.output == "-":
        raise CliError("n >= 7 streams shards to disk; give a file path")
    started = time.monotonic()
    if args.output != "-" and n >= 7:
        count = peleg_stream(n, args.output, set_system=set_system,
                             player_limit=max(n, generate.DEFAULT_PLAYER_LIMIT))
        elapsed = time.monotonic() - started
        print(f"n={n} count={count}")
    else:
        db = peleg(n, set_system=set_system,
                   player_limit=max(n, generate.DEFAULT_PLAYER_LIMIT))
        elapsed = time.monotonic() - started
        if args.output == "-":
            db.dump(sys.stdout)
            print(f"n={n} count={len(db)}", file=sys.stderr)
        else:
            db.save(args.output)
            print(f"n={n} count={len(db)}")
    if args.timings:
        print(f"elapsed={elapsed:.3f}s", file=sys.stderr)
    return 0


def _load_game(path) -> Game:
    try:
        if path == "-":
            return parse_game(sys.stdin.read())
        with open(path, "rb") as fh:
            return parse_game(fh.read())
    except OSError as exc:
        raise CliError(f"cannot read game file: {exc}") from exc
    except GameFormatError as exc:
        raise CliError(f"bad game file: {exc}") from exc


def _load_db(args, game: Game) -> MbcDatabase:
    path = args.db
    if path is None:
        db_dir = os.environ.get(DB_DIR_ENV)
        if db_dir:
            candidate = os.path.join(db_dir, f"mbc{game.n}.db")
            if os.path.exists(candidate):
                path = candidate
    if path is not None:
        try:
            db = MbcDatabase.load(path)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load database: {exc}") from exc
        if db.n != game.n:
            raise CliError(f"database has n={db.n}, game has n={game.n}")
        if db.restricted:
            raise CliError("analysis needs an unrestricted database")
        return db
    if game.n > 6:
        raise CliError("no database given and in-memory generation is capped at n=6")
    return peleg(game.n)


def _mask_list(masks):
    return [coalition_key(m) for m in sorted(masks)]


def cmd_analyze(args) -> int:
    game = _load_game(args.game)
    checks = []
    for name in (args.checks or "core").split(","):
        name = name.strip()
        if not name:
            continue
        if name not in ANALYZE_CHECKS:
            raise CliError(f"unknown check {name!r}; pick from {','.join(ANALYZE_CHECKS)}")
        if name not in checks:
            checks.append(name)
    db = _load_db(args, game)
    index = props.BalancedIndex(game, db)
    report = {
        "game": game.digest(),
        "n": game.n,
        "database": {"n": db.n, "count": len(db)},
        "checks": checks,
        "results": {},
    }
    timings = {}
    balanced = index.balanced
    family = None
    extendable_cache: dict[int, bool] = {}

    for check in checks:
        started = time.monotonic()
        if check == "core":
            witness = None
            if not balanced:
                wc = props.balancedness_witness(game, db)
                witness = {
                    "coalitions": [coalition_key(m) for m in wc.coalitions],
                    "weights": [format_value(w) for w in wc.weights],
                }
            report["results"]["core"] = {
                "balanced": balanced,
                "violated_collection": witness,
            }
        elif not balanced:
            report["results"][check] = {"error": "game is not balanced"}
        elif check == "exact":
            report["results"]["exact"] = {
                "coalitions": _mask_list(props.exact_coalitions(game, db, index))
            }
        elif check == "effective":
            report["results"]["effective"] = {
                "coalitions": _mask_list(props.effective_set(game, db, index))
            }
        elif check == "sve":
            if family is None:
                family = props.sve_family(game, db, index)
            report["results"]["sve"] = {"coalitions": _mask_list(family)}
        elif check == "extendable":
            if family is None:
                family = props.sve_family(game, db, index)
            for S in family:
                if S not in extendable_cache:
                    extendable_cache[S] = props.is_extendable(S, game)
            report["results"]["extendable"] = {
                "family": _mask_list(family),
                "coalitions": _mask_list(
                    [S for S in family if extendable_cache[S]]
                ),
            }
        elif check == "feasible":
            if family is None:
                family = props.sve_family(game, db, index)
            survey = props.feasibility_survey(game, db, family, extendable_cache)
            report["results"]["feasible"] = {
                "family": _mask_list(family),
                "collections": [
                    {
                        "collection": [coalition_key(m) for m in r.collection],
                        "blocking": r.blocking,
                        "has_min_extendable": r.has_min_extendable,
                    }
                    for r in survey
                ],
                "count": len(survey),
                "without_min_extendable": sum(
                    1 for r in survey if not r.has_min_extendable
                ),
            }
        timings[check] = round(time.monotonic() - started, 6)
    if args.timings:
        report["timings"] = timings
    json.dump(report, sys.stdout)
    sys.stdout.write("\n")
    return 0


def cmd_stable(args) -> int:
    game = _load_game(args.game)
    db = _load_db(args, game)
    caps = stability.StabilityCaps(
        max_systems=args.max_systems,
        time_limit=args.time_limit,
    )
    report = stability.is_core_stable(game, db, caps)
    payload = {"game": game.digest(), "n": game.n}
    payload.update(report.to_payload(with_timings=args.timings))
    json.dump(payload, sys.stdout)
    sys.stdout.write("\n")
    return 0


def cmd_bench(args) -> int:
    """Timing comparisons; prints numbers and asserts nothing."""
    import random

    from fractions import Fraction

    lines = []
    for n in range(2, min(args.max_players, 4) + 1):
        t = time.monotonic()
        db = peleg(n)
        t_peleg = time.monotonic() - t
        t = time.monotonic()
        from .polytope import mbc_via_vertices

        verts = mbc_via_vertices(n)
        t_vertex = time.monotonic() - t
        lines.append(
            f"generation n={n}: peleg {t_peleg:.3f}s ({len(db)}), "
            f"vertex oracle {t_vertex:.3f}s ({len(verts)})"
        )
    rng = random.Random(args.seed)
    n = min(args.max_players, 5)
    db = peleg(n)
    games = []
    for _ in range(args.games):
        values = {
            mask: Fraction(rng.randint(0, 500), 100)
            for mask in range(1, full_mask(n))
        }
        values[full_mask(n)] = Fraction(50)
        games.append(Game(n, values))
    t = time.monotonic()
    bs = [props.is_balanced_game(g, db) for g in games]
    t_bs = time.monotonic() - t
    from .polytope import LinearSystem, enumerate_vertices

    t = time.monotonic()
    oracle = [bool(enumerate_vertices(LinearSystem.core(g))) for g in games]
    t_oracle = time.monotonic() - t
    agree = sum(1 for a, b in zip(bs, oracle) if a == b)
    lines.append(
        f"nonemptiness n={n} x{args.games}: Bondareva-Shapley {t_bs:.3f}s, "
        f"vertex oracle {t_oracle:.3f}s, agreement {agree}/{args.games}"
    )
    for line in lines:
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbc",
        description="Minimal balanced collections and core stability of TU games",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker hint passed to the library (generation is currently sequential)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a minimal-balanced-collection database")
    gen.add_argument("-n", "--players", type=int, required=True)
    gen.add_argument("-o", "--output", required=True, help="output path, or - for stdout")
    gen.add_argument("--restrict", help="set system: semicolon-separated coalitions, e.g. '1,2;2,3'")
    gen.add_argument("--allow-long", action="store_true",
                     help="confirm a long-running generation (n >= 7)")
    gen.add_argument("--timings", action="store_true")
    gen.set_defaults(func=cmd_generate)

    analyze = sub.add_parser("analyze", help="check properties of a game")
    analyze.add_argument("game", help="game file path, or - for stdin")
    analyze.add_argument("-d", "--db", help=f"database path (default: ${DB_DIR_ENV}/mbc<n>.db)")
    analyze.add_argument("-c", "--checks", help="comma list: " + ",".join(ANALYZE_CHECKS))
    analyze.add_argument("--timings", action="store_true")
    analyze.set_defaults(func=cmd_analyze)

    stable = sub.add_parser("stable", help="decide core stability")
    stable.add_argument("game", help="game file path, or - for stdin")
    stable.add_argument("-d", "--db", help=f"database path (default: ${DB_DIR_ENV}/mbc<n>.db)")
    stable.add_argument("--max-systems", type=int, default=20_000,
                        help="cap on admissible systems per feasible collection")
    stable.add_argument("--time-limit", type=float, default=600.0,
                        help="wall-clock cap for the nested stage, seconds")
    stable.add_argument("--timings", action="store_true")
    stable.set_defaults(func=cmd_stable)

    bench = sub.add_parser("bench", help="timing comparisons (asserts nothing)")
    bench.add_argument("--max-players", type=int, default=4)
    bench.add_argument("--games", type=int, default=100)
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
