#!/usr/bin/env python3
"""Run the nine-run controller comparison and print the consolidated table."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mhauv_sim.cli import main as cli_main  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG = os.path.join(HERE, "..", "configs", "comparison.yaml")
OUT = os.path.join(HERE, "..", "out", "comparison")


def main() -> int:
    rc = cli_main(["compare", "--config", CONFIG, "--out", OUT])
    if rc != 0:
        return rc
    with open(os.path.join(OUT, "comparison.csv")) as fh:
        print(fh.read())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
