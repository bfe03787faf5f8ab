#!/usr/bin/env python3
"""Random vs mixed-mask recovery on the phantom, both morphology choices.

Writes table1.csv under --out (default results/table1) and prints the rows.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from marsense.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if not any(a.startswith("--out") for a in argv):
        argv += ["--out", "results/table1"]
    sys.exit(main(["table1", *argv]))
