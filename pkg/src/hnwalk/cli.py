"""Command-line entry point.

    hnwalk list-presets
    hnwalk preset fig1-a1 [--override params.L=40 ...] [--output-dir DIR] [--dry-run]
    hnwalk run config.json [--output-dir DIR] [--workers N]

Exit status: 0 success, 1 configuration error, 2 runtime failure or an
invariant violated during the run.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import (
    OUTPUT_ROOT_ENV,
    PRESET_NAMES,
    apply_overrides,
    describe_preset,
    load_config,
    preset,
)
from .errors import ConfigError, HNWalkError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hnwalk",
        description="Two-boson quantum walks on the tilted Hatano-Nelson chain.",
        epilog=f"Default output root: ${OUTPUT_ROOT_ENV} (else ./runs).",
    )
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a JSON experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir")
    p_run.add_argument("--workers", type=int)

    p_pre = sub.add_parser("preset", help="run a figure preset")
    p_pre.add_argument("name")
    p_pre.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted config key, e.g. params.L=40 or sweep.delta=[0,0.04]")
    p_pre.add_argument("--output-dir")
    p_pre.add_argument("--workers", type=int)
    p_pre.add_argument("--dry-run", action="store_true", help="print the resolved config and exit")

    sub.add_parser("list-presets", help="list figure presets")
    return ap


def _execute(config) -> int:
    from .runner import run

    manifest = run(config)
    root = config.resolved_output_dir()
    print(f"wrote {len(manifest['points'])} sweep point(s) to {root}")
    if not manifest["ok"]:
        for entry in manifest["points"]:
            for v in entry["violations"]:
                print(f"invariant violated in {entry['dir']}: {v}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-presets":
        for name in PRESET_NAMES:
            print(f"{name:8s}  {describe_preset(name)}")
        return EXIT_OK

    try:
        if args.command == "run":
            config = load_config(args.config)
        else:
            config = apply_overrides(preset(args.name), args.override)
        if args.output_dir:
            config = replace(config, output_dir=args.output_dir)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("must be >= 1", "workers")
            config = replace(config, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if getattr(args, "dry_run", False):
        print(config.dumps())
        return EXIT_OK

    try:
        return _execute(config)
    except HNWalkError as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
