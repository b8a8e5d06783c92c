"""Command-line entry point: ``knowstate {tomography,dispute-a,dispute-b,sweep}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, ExperimentConfig, load_config
from .harness import run_scenario

log = logging.getLogger("knowstate")

OUTPUT_DIR_ENV = "KNOWSTATE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _parse_grid(items: Sequence[str]) -> dict:
    grid = {}
    for item in items:
        key, sep, values = item.partition("=")
        if not sep or not values:
            raise ConfigError(f"--grid {item!r}: expected KEY=V1,V2,...")
        try:
            grid[key.strip()] = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--grid {item!r}: values must be numbers") from None
    return grid


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knowstate",
        description="Simulate qubit ensembles under different preparation knowledge "
                    "and run the judge-mediated dispute protocols.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("tomography", "compare two preparations direction by direction"),
            ("dispute-a", "axis declaration before disclosure"),
            ("dispute-b", "secret axis, Alice picks the measurement direction"),
            ("sweep", "error rates over a parameter grid")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="YAML experiment config")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--trials", type=int, help="Monte Carlo trials")
        p.add_argument("--out", type=Path, help="output file (default: stdout or "
                                                f"${OUTPUT_DIR_ENV}/<scenario>.<ext>)")
        p.add_argument("--format", choices=("table", "structured"))
        if name == "sweep":
            p.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2,...",
                           help="sweep values; repeat for a cartesian product")
            p.add_argument("--protocol", choices=("a", "b"))
    return parser


def _output_path(cfg: ExperimentConfig, out: Optional[Path]) -> Optional[Path]:
    if out is not None:
        return out
    if cfg.output.path:
        return Path(cfg.output.path)
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        ext = "csv" if cfg.output.format == "table" else "json"
        return Path(env_dir) / f"{cfg.scenario}.{ext}"
    return None


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {"scenario": args.command, "seed": args.seed, "trials": args.trials,
                 "output.format": args.format}
    try:
        if args.command == "sweep":
            if args.grid:
                overrides["sweep.grid"] = _parse_grid(args.grid)
            overrides["sweep.protocol"] = args.protocol
        cfg = load_config(args.config, overrides)
        log.info("running %s with seed %d, digest %s", cfg.scenario, cfg.seed, cfg.digest())
        report = run_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - anything past validation is a runtime failure
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    text = report.render(cfg.output.format)
    path = _output_path(cfg, args.out)
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            print(f"runtime error: cannot write {path}: {exc.strerror}", file=sys.stderr)
            return EXIT_RUNTIME
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
