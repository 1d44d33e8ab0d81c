#!/usr/bin/env python3
"""Run the full oracle battery over one parameter set per solution regime.

The Monte Carlo leg uses the criterion-sized configuration (1e5 paths at
dt = 1/2500) unless --quick is given.

Usage: python scripts/run_verification.py [--quick] [--seed N]
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from bequest_opt import run_verification, solve
from cases import REGIME_CASES


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="5k paths at dt = 0.004 instead of the full setting")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    n_paths = 5_000 if args.quick else 100_000
    dt = 0.004 if args.quick else 1.0 / 2500.0
    failures = 0
    for regime, params in REGIME_CASES.items():
        t0 = time.time()
        report = run_verification(solve(params), seed=args.seed,
                                  n_paths=n_paths, dt=dt)
        bad = report.failures()
        status = "PASS" if not bad else "FAIL " + "; ".join(bad)
        print(f"{regime.value:<30} residual={report.residual_sup:.1e} "
              f"fd={report.fd_sup_error:.1e} mc_z={report.mc_z:+.2f} "
              f"[{time.time() - t0:.0f}s] {status}")
        failures += bool(bad)
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
