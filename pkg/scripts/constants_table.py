#!/usr/bin/env python3
"""Measure the numerical constants on both desk towers and print them as a
table, cell by cell.

    python3 scripts/constants_table.py [--samples N] [--seed N] [--quick]
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from cyclodiff.constants import estimate_constants
from cyclodiff.tower import CyclotomicTower, TowerParams


def show(tower, seed, samples):
    rep = estimate_constants(tower, seed=seed, samples=samples)
    d = tower.description()
    print(f"\ntower p={d['p']} s={d['s']} levels={d['max_level']} prec={d['prec']}"
          f"  (seed={seed}, samples={samples})")
    print(f"  different drift      a={rep.a}  b={rep.b}  per-level={list(map(str, rep.drifts))}")
    print(f"  norm congruence      c_norm={rep.c_norm}  witness={rep.c_norm_witness}  m_c={rep.m_c}")
    for (n, k), v in rep.c_norm_cells:
        print(f"    cell n={n} k={k}: {v}")
    print(f"  projector defect     c2*={rep.c2_star}")
    print(f"  layer defect         c3*={rep.c3_star}")
    for (n, k), v in rep.c3_cells:
        print(f"    cell n={n} k={k}: {v}")
    print(f"  kernel shift         n_0={rep.n_0}")
    print(f"  decomposition depth  n_1={rep.n_1}")
    print(f"  divisibility bound   n_0+n_1+ceil(c2*)={rep.nopdiv_bound()}")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quick", action="store_true", help="level-3 towers at precision 24")
    args = ap.parse_args()
    if args.quick:
        configs = [TowerParams(3, 1, 3, prec=24), TowerParams(2, 2, 3, prec=24)]
    else:
        configs = [TowerParams(3, 1, 4, prec=60), TowerParams(2, 2, 3, prec=60)]
    for params in configs:
        show(CyclotomicTower(params), args.seed, args.samples)
    return 0


if __name__ == "__main__":
    sys.exit(main())
