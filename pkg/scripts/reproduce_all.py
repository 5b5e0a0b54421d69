#!/usr/bin/env python3
"""Run every experiment subcommand and write one JSON report per experiment."""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
from pathlib import Path

from nonlocality.cli import SUBCOMMANDS, main


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", default="reports")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=None)
    return p.parse_args(argv)


def run(argv=None) -> int:
    args = parse_args(argv)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for cmd in SUBCOMMANDS:
        flags = [cmd, "--seed", str(args.seed), "--out", str(out / f"{cmd}.json")]
        if args.runs is not None:
            flags += ["--runs", str(args.runs)]
        with contextlib.redirect_stderr(io.StringIO()) as err:
            code = main(flags)
        worst = max(worst, code)
        if code == 3:
            print(f"{cmd:10s} invalid input: {err.getvalue().strip()}")
            continue
        report = json.loads((out / f"{cmd}.json").read_text())
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        status = "pass" if not failed else "FAIL " + ", ".join(failed)
        print(f"{cmd:10s} {len(report['checks']):3d} checks  {status}")
    return worst


if __name__ == "__main__":
    sys.exit(run())
