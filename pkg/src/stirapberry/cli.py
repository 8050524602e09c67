"""Command-line entry point: one subcommand per experiment.

Exit codes: 0 success, 2 configuration error, 3 numerical-invariant or
convergence failure, 4 fit failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ._backend import backend_name
from .config import (EXPERIMENTS, ConfigError, config_from_entries,
                     parse_config_text)
from .evolve import ConvergenceError, InvariantError
from .experiments import PRESETS, RUNNERS
from .fitting import FitError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_FIT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stirapberry",
        description="Dissipative four-level STIRAP simulator: dark-state "
                    "transport, geometric phase, and noise robustness.",
    )
    parser.add_argument("--backend", default=None,
                        choices=("auto", "compiled", "python"),
                        help="propagation kernel to use (default: auto)")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name, help=f"run the {name} experiment")
        cmd.add_argument("--config", type=Path, default=None,
                         help="flat key = value configuration file")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the master seed")
        cmd.add_argument("--out", type=Path, default=Path("out"),
                         help="output directory for CSV/JSON reports")
        cmd.add_argument("--mode", choices=("ideal", "sampled"), default=None,
                         help="readout model override")
        cmd.add_argument("--threads", type=int, default=None,
                         help="parallel workers for sweep points")
    return parser


def _load_entries(args) -> dict[str, str]:
    entries = dict(PRESETS.get(args.experiment, {}))
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        entries.update(parse_config_text(text))
    entries["experiment"] = args.experiment
    if args.seed is not None:
        entries["seed"] = str(args.seed)
    if args.mode is not None:
        entries["mode"] = args.mode
    if args.threads is not None:
        entries["threads"] = str(args.threads)
    return entries


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.backend is not None:
        import os

        os.environ["STIRAPBERRY_BACKEND"] = args.backend
    try:
        cfg = config_from_entries(_load_entries(args))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out / cfg.experiment
    try:
        RUNNERS[cfg.experiment](cfg, out_dir=out_dir)
    except (InvariantError, ConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FitError as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT
    print(f"{cfg.experiment}: reports written to {out_dir} "
          f"(backend: {backend_name()}, seed: {cfg.seed})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
