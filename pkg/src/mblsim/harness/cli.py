"""Command-line front end.

    mblsim run <config-file> [--seed S] [--workers N] [--out DIR]
    mblsim list-experiments
    mblsim validate <config-file>
    mblsim summarize <run-dir>

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError
from .experiments import EXPERIMENTS, load_config, run_experiment
from .manifest import load_manifest, verify_run

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mblsim",
        description="Config-driven simulator of disordered XY-chain experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("config", help="JSON config file")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    run.add_argument("--out", default=None, help="override the output directory")

    sub.add_parser("list-experiments", help="list available experiments")

    val = sub.add_parser("validate", help="validate a config file without running")
    val.add_argument("config", help="JSON config file")

    summ = sub.add_parser("summarize", help="verify and summarize a finished run")
    summ.add_argument("run_dir", help="run directory containing manifest.txt")
    return parser


def _cmd_run(args) -> int:
    overrides = {"seed": args.seed, "output_dir": args.out}
    cfg = load_config(args.config, overrides=overrides)
    run_dir, manifest = run_experiment(cfg, workers=max(1, args.workers))
    print(f"run complete: {cfg.experiment}")
    print(f"output directory: {run_dir}")
    for name in sorted(manifest.files):
        print(f"  {name}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"configuration OK: experiment {cfg.experiment!r}, "
          f"{len(cfg.disorder_bounds_mhz)} disorder bound(s), "
          f"{cfg.n_realizations} realization(s), seed {cfg.seed}")
    return EXIT_OK


def _cmd_list() -> int:
    width = max(len(name) for name in EXPERIMENTS)
    for name in sorted(EXPERIMENTS):
        print(f"{name:<{width}}  {EXPERIMENTS[name].description}")
    return EXIT_OK


def _cmd_summarize(args) -> int:
    run_dir = Path(args.run_dir)
    manifest = load_manifest(run_dir)
    print(f"experiment: {manifest.experiment}")
    print(f"package_version: {manifest.package_version}")
    print(f"created_utc: {manifest.created_utc}")
    print(f"elapsed_seconds: {manifest.elapsed_seconds:.3f}")
    print(f"workers: {manifest.workers}")
    results = verify_run(run_dir)
    bad = [name for name, ok in results if not ok]
    for name, ok in results:
        print(f"  {'OK      ' if ok else 'MISMATCH'} {name}")
    if bad:
        print(f"checksum verification FAILED for {len(bad)} file(s)", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"all {len(results)} files verified")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "list-experiments":
            return _cmd_list()
        return _cmd_summarize(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
