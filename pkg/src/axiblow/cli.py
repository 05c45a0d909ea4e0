"""Command line: ``run``, ``validate``, ``reference-config`` and ``version``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .config import ConfigError, load_config, reference_config, validate_config
from .scenarios import run_scenario


def _load(path):
    try:
        return load_config(path), None
    except (OSError, ConfigError) as exc:
        return None, str(exc)


def _fail(status: str, messages: list[str], code: int) -> int:
    print(json.dumps({"status": status, "violations": messages}, indent=2), file=sys.stderr)
    return code


def cmd_run(args) -> int:
    cfg, err = _load(args.config)
    if err:
        return _fail("invalid", [err], 2)
    report = run_scenario(cfg, args.out_dir)
    if report.exit_code == 2:
        return _fail("invalid", report.summary["violations"], 2)
    verdicts = report.summary.get("verdicts", [])
    for v in verdicts:
        note = f" ({v['note']})" if v.get("note") else ""
        print(f"{v['status']:>8}  {v['check']}{note}")
    print(f"status: {report.status}")
    print(f"csv:  {report.csv_path}")
    print(f"json: {report.json_path}")
    return report.exit_code


def cmd_validate(args) -> int:
    cfg, err = _load(args.config)
    if err:
        return _fail("invalid", [err], 2)
    violations = validate_config(cfg)
    if violations:
        return _fail("invalid", violations, 2)
    print("ok")
    return 0


def cmd_reference_config(args) -> int:
    sys.stdout.write(reference_config())
    return 0


def cmd_version(args) -> int:
    print(__version__)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="axiblow", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the scenario described by a config file")
    r.add_argument("config")
    r.add_argument("--out-dir", default=None, help="override [output] directory")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("validate", help="check a config against the scenario preconditions")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    sub.add_parser("reference-config", help="print a config with every key and its default").set_defaults(
        func=cmd_reference_config
    )
    sub.add_parser("version", help="print the package version").set_defaults(func=cmd_version)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
