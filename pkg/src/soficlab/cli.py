"""Command line entry point: ``soficlab run|describe|suite``."""
from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError


def _threads(value: int | None) -> int | None:
    if value is not None:
        return value
    env = os.environ.get("SOFICLAB_THREADS")
    return int(env) if env else None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="soficlab", description=__doc__)
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: $SOFICLAB_THREADS); results do not depend on it")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the pipelines of a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output", help="output directory (overrides the config)")
    p_desc = sub.add_parser("describe", help="summarize a config without running it")
    p_desc.add_argument("config")
    p_suite = sub.add_parser("suite", help="run the acceptance catalog")
    p_suite.add_argument("criteria", nargs="*", type=int, help="criterion numbers (default: all)")
    p_suite.add_argument("--json", action="store_true", help="print details as JSON")
    args = parser.parse_args(argv)
    threads = _threads(args.threads)

    from . import config, runner, suite

    if args.command == "suite":
        results = suite.run_suite(args.criteria or None, threads)
        for r in results:
            print(r.line())
            if args.json:
                print(json.dumps(r.detail, sort_keys=True, default=str))
        return 0 if all(r.passed for r in results) else 1

    try:
        cfg = config.load_config(args.config)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 2
    if args.command == "describe":
        print(runner.describe(cfg))
        return 0
    report = runner.run(cfg, args.output, threads)
    for c in report.checks:
        if not c["passed"]:
            print(f"FAIL {c['stage']}: {c['name']} value={c['value']} tolerance={c['tolerance']}")
    for e in report.errors:
        print(f"ERROR {e}", file=sys.stderr)
    n_ok = sum(c["passed"] for c in report.checks)
    print(f"{n_ok}/{len(report.checks)} checks passed; report in {args.output or cfg.output_dir}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
