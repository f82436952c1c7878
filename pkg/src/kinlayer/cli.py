"""Command-line entry point: ``kinlayer {run,convergence,audit}``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import driver
from .scenario import ConfigError, load_config

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinlayer", description="Layer-averaged kinetic shallow-water solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write CSV/JSON output")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument("--output", type=Path, help="output directory (default: [run] output)")

    p_conv = sub.add_parser("convergence", help="grid-refinement study of a scenario")
    p_conv.add_argument("--config", required=True, type=Path)
    p_conv.add_argument("--levels", type=int, default=3)
    p_conv.add_argument("--output", type=Path, help="write convergence.csv here")

    p_audit = sub.add_parser("audit", help="check positivity, conservation, well-balance and energy")
    p_audit.add_argument("--config", required=True, type=Path)
    p_audit.add_argument("--seed", type=int, default=0, help="seed of the randomized linear-system checks")
    p_audit.add_argument("--output", type=Path, help="write audit.txt here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "run":
        try:
            status, info = driver.run(cfg, args.output)
        except OSError as exc:
            print(f"error: cannot write output: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"{info['steps']} steps to t={info['final_time']:.6g}; mass drift {info['relative_mass_drift']:.3e}")
        for v in info["violations"]:
            print(f"violation: {v}", file=sys.stderr)
        return status

    if args.command == "convergence":
        try:
            table = driver.convergence(cfg, args.levels)
        except (ValueError, RuntimeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VIOLATION if isinstance(exc, RuntimeError) else EXIT_CONFIG
        driver.write_convergence(table, sys.stdout)
        if args.output is not None:
            args.output.mkdir(parents=True, exist_ok=True)
            with open(args.output / "convergence.csv", "w", newline="") as fh:
                driver.write_convergence(table, fh)
        return EXIT_OK

    items = driver.audit(cfg, args.seed)
    report = driver.audit_report(items)
    print(report, end="")
    if args.output is not None:
        args.output.mkdir(parents=True, exist_ok=True)
        (args.output / "audit.txt").write_text(report)
    return EXIT_VIOLATION if any(it.status == "FAIL" for it in items) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
