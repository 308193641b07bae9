#!/usr/bin/env python3
"""Run the logistic regression experiment on the bundled dataset and emit
the theory report.

Usage: python scripts/reproduce_logreg.py
"""

from pathlib import Path

from gradtrack import harness

ROOT = Path(__file__).resolve().parent.parent


def main():
    cfg = harness.parse_config(ROOT / "configs" / "logreg_synth.cfg")
    result = harness.execute_grid(cfg)
    outdir = harness.run_experiment(cfg, result)
    harness.theory_report(cfg, result)
    print(f"artifacts in {outdir}")


if __name__ == "__main__":
    main()
