"""Command-line driver: run named experiments, list them, run the check suite.

Exit codes: 0 success, 2 usage/config parse error, 3 numerical failure,
4 acceptance-threshold failure in check mode.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import _threads, __version__
from .acceptance import run_criteria
from .errors import ConfigError, FracLabError
from .experiments import RECIPES, run_experiment
from .runconfig import parse_config

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_THRESHOLD = 4

# experiments with a direct acceptance criterion, for `run --check`
_CHECKED = {
    "getoor": (1,),
    "symbol": (2,),
    "product-rule": (3,),
    "identity-check": (3,),
    "parabolic-energy": (4,),
    "semigroup-contraction": (5,),
    "elliptic-regularity": (6, 7),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fraclab",
        description="fractional-Laplacian grid laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config file")
    p_run.add_argument("--config", required=True, help="config file path")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--threads", type=int, default=1, help="worker count")
    p_run.add_argument("--check", action="store_true",
                       help="also evaluate the experiment's acceptance thresholds")

    p_list = sub.add_parser("list", help="list experiment recipes")
    p_list.add_argument("--json", action="store_true", help="emit a JSON array")

    p_check = sub.add_parser("check", help="run the embedded acceptance suite")
    p_check.add_argument("--out", default="out/acceptance", help="output directory")
    p_check.add_argument("--threads", type=int, default=1, help="worker count")
    p_check.add_argument("--criteria", default=None,
                         help="comma-separated criterion numbers (default: all)")
    return parser


def cmd_run(args):
    try:
        cfg = parse_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    name = cfg.get_str("experiment", "name", default=None)
    if name is None:
        print("error: config needs [experiment] name = <recipe>", file=sys.stderr)
        return EXIT_USAGE
    _threads.set_num_threads(args.threads)
    try:
        summary = run_experiment(name, cfg, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FracLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"experiment {name}: artifacts in {args.out}")
    for key, val in summary.items():
        print(f"  {key}: {val}")
    if args.check:
        numbers = _CHECKED.get(name)
        if numbers is None:
            print(f"note: no acceptance criterion covers {name!r}; nothing to check")
            return EXIT_OK
        results = run_criteria(args.out, numbers=set(numbers))
        failed = [r for r in results if not r.passed]
        for r in results:
            print(r.line())
        if failed:
            return EXIT_THRESHOLD
    return EXIT_OK


def cmd_list(args):
    names = list(RECIPES)
    if args.json:
        print(json.dumps(names))
    else:
        for name in names:
            print(name)
    return EXIT_OK


def cmd_check(args):
    numbers = None
    if args.criteria:
        try:
            numbers = {int(tok) for tok in args.criteria.replace(",", " ").split()}
        except ValueError:
            print(f"error: bad --criteria value {args.criteria!r}", file=sys.stderr)
            return EXIT_USAGE
        if not numbers.issubset(set(range(1, 11))):
            print("error: criterion numbers must lie in 1..10", file=sys.stderr)
            return EXIT_USAGE
    _threads.set_num_threads(args.threads)
    try:
        results = run_criteria(args.out, numbers=numbers)
    except FracLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for r in results:
        print(r.line())
    if any(not r.passed for r in results):
        return EXIT_THRESHOLD
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "list":
        return cmd_list(args)
    if args.command == "check":
        return cmd_check(args)
    parser.print_usage(sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
