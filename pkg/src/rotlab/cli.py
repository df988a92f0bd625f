"""Command-line entry point.

    rotlab run <config.json> [--out DIR] [--parallel N]
    rotlab validate <config.json>
    rotlab list-scenarios

Exit codes: 0 all embedded checks pass, 2 check failures (or invalid config
for validate), 1 execution error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .scenarios import SCENARIOS, ConfigError, run_scenario, validate_config


def _load_config(path: str) -> dict:
    p = Path(path)
    try:
        return json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}")


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    outdir = Path(args.out) if args.out else None
    if outdir is None:
        outdir = Path(config.get("output_dir", "rotlab_out"))
    report = run_scenario(config, outdir, workers=max(1, args.parallel))
    for name, ok in report["checks"].items():
        print(f"[{'PASS' if ok else 'FAIL'}] {report['scenario']}: {name}")
    print(f"report: {outdir / 'report.json'}")
    return 0 if report["passed"] else 2


def _cmd_validate(args) -> int:
    config = _load_config(args.config)
    diags = validate_config(config)
    for d in diags:
        print(d)
    return 0 if not diags else 2


def _cmd_list(args) -> int:
    for name in sorted(SCENARIOS):
        sc = SCENARIOS[name]
        print(f"{name}: {sc.help}")
        for pname, p in sc.params.items():
            print(f"    {pname} (default {p.default!r}) {p.help}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rotlab",
        description="scenario runner for rotation vectors, cones and minimal actions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config", help="path to the scenario JSON config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--parallel", type=int, default=1,
                       help="intra-scenario worker threads")
    p_run.set_defaults(fn=_cmd_run)

    p_val = sub.add_parser("validate", help="schema-check a config without running")
    p_val.add_argument("config", help="path to the scenario JSON config")
    p_val.set_defaults(fn=_cmd_validate)

    p_list = sub.add_parser("list-scenarios", help="list scenario ids and parameters")
    p_list.set_defaults(fn=_cmd_list)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
