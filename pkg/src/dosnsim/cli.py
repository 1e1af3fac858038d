"""``bench`` command line: sweep, compare, scenario.

Exit codes: 0 success, 1 usage or input error, 2 oracle divergence.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import bench
from .core import GroupType, HistoryError, ScenarioError
from .crypto import DEFAULT_PROFILE, load_profile
from .models import GroupError, MODELS


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _gtype(text: str) -> GroupType:
    try:
        return GroupType.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bench", description="Access-control enforcement cost simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sweep = sub.add_parser("sweep", help="run a parameter grid and write per-role CSV rows")
    defaults = bench.SweepConfig()
    sweep.add_argument("--models", nargs="+", choices=sorted(MODELS), default=list(defaults.models))
    sweep.add_argument("--gtypes", nargs="+", type=_gtype, default=list(defaults.gtypes))
    sweep.add_argument("--n", nargs="+", type=_positive, default=list(defaults.n_list))
    sweep.add_argument("--p", nargs="+", type=int, default=list(defaults.p_list))
    sweep.add_argument("--degree", type=int, default=defaults.degree)
    sweep.add_argument("--content-size", type=_positive, default=defaults.content_size)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--profile", help="cost profile file (key = value lines)")
    sweep.add_argument("--out", required=True, help="CSV path, or - for stdout")

    compare = sub.add_parser("compare", help="normalized model comparison for a group category")
    compare.add_argument("--category", required=True, choices=sorted(bench.CATEGORIES))
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--profile")
    compare.add_argument("--out", required=True)

    scen = sub.add_parser("scenario", help="replay a scenario file against the access oracle")
    scen.add_argument("--file", required=True)
    scen.add_argument("--model", required=True, choices=sorted(MODELS))
    scen.add_argument("--gtype", required=True, type=_gtype)
    scen.add_argument("--degree", type=int, default=4)
    scen.add_argument("--real", action="store_true", help="use real AES-GCM/RSA-OAEP crypto")
    scen.add_argument("--out", help="optional CSV of per-event ledgers")
    return parser


def _profile(path: Optional[str]):
    return load_profile(path) if path else DEFAULT_PROFILE


def _out(path: str):
    return sys.stdout if path == "-" else path


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            if args.degree < 2:
                raise UsageError("degree must be at least 2")
            if any(p < 0 for p in args.p):
                raise UsageError("p values must be >= 0")
            cfg = bench.SweepConfig(
                models=tuple(dict.fromkeys(args.models)), gtypes=tuple(dict.fromkeys(args.gtypes)),
                n_list=tuple(args.n), p_list=tuple(args.p), degree=args.degree,
                content_size=args.content_size, seed=args.seed, profile=_profile(args.profile),
            )
            bench.emit_csv(bench.run_sweep(cfg), _out(args.out))
        elif args.command == "compare":
            cfg = bench.SweepConfig(seed=args.seed, profile=_profile(args.profile))
            bench.emit_summary(bench.run_category_comparison(args.category, cfg), _out(args.out))
        else:
            rows = bench.run_scenario(args.file, args.model, args.gtype,
                                      degree=args.degree, real=args.real)
            if args.out:
                bench.emit_csv(rows, _out(args.out))
            print(f"ok: {len(rows)} events replayed, no divergence", file=sys.stderr)
    except bench.OracleDivergence as exc:
        print(f"bench: oracle divergence: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, OSError, ScenarioError, HistoryError, GroupError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
