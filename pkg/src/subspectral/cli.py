"""Command-line interface for the experiment harness.

Exit codes: 0 on success, 2 on configuration errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import sys
import traceback

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    load_config_file,
    make_config,
    run_experiment,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subspectral",
        description="Kernel-PCA subspace estimation experiments: reports "
                    "(CSV/JSON) plus rendered figures.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", metavar="PATH",
                       help="key=value config file")
        p.add_argument("--seed", type=int, help="master RNG seed")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--workers", type=int,
                       help="concurrent trial workers")
        p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = load_config_file(args.config) if args.config else {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["output_dir"] = args.out
        if args.workers is not None:
            overrides["workers"] = args.workers
        if args.no_plots:
            overrides["plots"] = False
        config = make_config(args.experiment, overrides)
        config.validate()
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        paths = run_experiment(config)
    except Exception:
        traceback.print_exc()
        return 1
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
