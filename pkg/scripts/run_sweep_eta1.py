#!/usr/bin/env python3
"""Recovery quality along a sampling-ratio grid, random vs mixed masks."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from marsense.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if not any(a.startswith("--out") for a in argv):
        argv += ["--out", "results/sweep_eta1"]
    sys.exit(main(["sweep-eta1", *argv]))
