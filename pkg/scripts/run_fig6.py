#!/usr/bin/env python3
"""Dense Gaussian CS vs random vs mixed masks on the synthetic ball image."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from marsense.cli import main

if __name__ == "__main__":
    argv = sys.argv[1:]
    if not any(a.startswith("--out") for a in argv):
        argv += ["--out", "results/fig6"]
    sys.exit(main(["fig6", *argv]))
