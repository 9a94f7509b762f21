#!/usr/bin/env python3
"""Run every verification suite on the desk-scale towers and print a
one-line-per-suite scoreboard.  Pass --quick for a shallow fast pass.

    python3 scripts/run_suites.py [--quick] [--seed N] [--out-dir DIR]
"""

import argparse
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from cyclodiff.constants import estimate_constants
from cyclodiff.harness import SUITE_NAMES, run_suite
from cyclodiff.reportio import emit_report
from cyclodiff.tower import CyclotomicTower, TowerParams


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="shallow towers, small samples")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", help="also write one canonical JSON report per suite")
    args = ap.parse_args()

    if args.quick:
        configs = [TowerParams(3, 1, 3, prec=24), TowerParams(2, 2, 3, prec=24)]
        cons_samples, sample_override = 40, 8
    else:
        configs = [TowerParams(3, 1, 4, prec=60), TowerParams(2, 2, 3, prec=60)]
        cons_samples, sample_override = 200, None

    all_green = True
    for params in configs:
        tower = CyclotomicTower(params)
        print(f"\ntower p={params.p} s={params.s} levels={params.max_level} prec={params.prec}")
        constants = estimate_constants(tower, seed=args.seed, samples=cons_samples)
        for name in SUITE_NAMES:
            t0 = time.time()
            rep = run_suite(
                tower, name, seed=args.seed, constants=constants, samples=sample_override
            )
            dt = time.time() - t0
            n_skip = sum(1 for a in rep["assertions"] if a.get("skipped"))
            status = "ok" if rep["passed"] else "FAIL"
            note = f"  ({n_skip} skipped)" if n_skip else ""
            print(f"  {name:18s} {status:4s} {len(rep['assertions']):3d} assertions"
                  f"  {dt:6.1f}s{note}")
            all_green = all_green and rep["passed"]
            if args.out_dir:
                out = pathlib.Path(args.out_dir)
                out.mkdir(parents=True, exist_ok=True)
                emit_report(rep, str(out / f"p{params.p}-{name}.json"))
    print("\nall suites green" if all_green else "\nFAILURES above")
    return 0 if all_green else 1


if __name__ == "__main__":
    sys.exit(main())
