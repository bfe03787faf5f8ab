#!/usr/bin/env python3
"""Recovery quality along the deliberate-share grid at fixed overall ratio."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from marsense.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if not any(a.startswith("--out") for a in argv):
        argv += ["--out", "results/sweep_eta2"]
    sys.exit(main(["sweep-eta2", *argv]))
