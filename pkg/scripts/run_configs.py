"""Run every INI file in a directory through the scenario runner."""

import argparse
import glob
import os
import sys

from axiblow.config import load_config
from axiblow.scenarios import run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=os.path.join(os.path.dirname(__file__), "..", "configs"))
    ap.add_argument("--out-dir", default="out")
    args = ap.parse_args()
    worst = 0
    for path in sorted(glob.glob(os.path.join(args.configs, "*.ini"))):
        rep = run_scenario(load_config(path), args.out_dir)
        failed = [v["check"] for v in rep.summary.get("verdicts", []) if v["status"] == "fail"]
        print(f"{os.path.basename(path):28s} exit={rep.exit_code} status={rep.status} failed={failed or '-'}")
        worst = max(worst, rep.exit_code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
