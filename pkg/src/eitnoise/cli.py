"""Command-line entry point: scenario runners plus config validation.

Exit codes: 0 success, 1 configuration error, 2 numerical failure
(non-convergent fit), 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .config import SCENARIOS, ConfigError, validate_config
from .scenarios import NumericalError, run_scenario, write_report

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="INI config file (omit for paper-mode defaults)")
    parser.add_argument("--seed", type=int, default=None, metavar="U64",
                        help="override the run seed")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (default from config)")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--oracle", action="store_true",
                       help="force the Monte Carlo route")
    group.add_argument("--fast", action="store_true",
                       help="force the closed-form route")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eitnoise",
        description="Phase-noise transfer scenarios for driven Raman media.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        _add_common(p)
    v = sub.add_parser("validate", help="validate a config file and exit")
    v.add_argument("--config", metavar="PATH", required=True)
    v.add_argument("--scenario", choices=SCENARIOS, default="noise-transfer",
                   help="scenario whose defaults apply")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = validate_config(args.config, args.scenario)
            print(f"ok: {args.config} valid for {args.scenario} "
                  f"(hash {cfg.config_hash()})")
            return EXIT_OK

        cfg = validate_config(args.config, args.command)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out_dir"] = args.out
        if args.oracle:
            overrides["mode"] = "oracle"
        if args.fast:
            overrides["mode"] = "fast"
        if overrides:
            import dataclasses

            cfg = dataclasses.replace(cfg, **overrides)
        report = run_scenario(cfg)
        written = write_report(report, cfg.out_dir)
        for key in sorted(report.summary):
            print(f"{key} = {report.summary[key]}")
        for path in written:
            print(f"wrote {path}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
