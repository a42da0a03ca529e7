#!/usr/bin/env python3
"""Long-horizon comparison: gradient-guided attack vs. plain boundary walk.

At a 1000-query budget the gradient-guided attack finds far smaller
perturbations than the boundary walk, but the walk keeps grinding and
eventually overtakes it once budgets grow by two orders of magnitude.
This script reproduces that observation on the shipped 8x8 fixture
classifier and prints one table per seed. Expect a few minutes of runtime
at the default budgets (the largest run spends 100000 queries).

Usage:
    python3 scripts/crossover_demo.py
    python3 scripts/crossover_demo.py --budgets 1000 20000 --seeds 0
"""

import argparse
import sys
import time
from pathlib import Path

from hardlabel import (
    AttackConfig,
    BaselineConfig,
    load_mlp,
    read_image,
    run_attack,
    run_boundary_attack,
)

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"


def parse_args(argv):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--budgets", type=int, nargs="+",
                        default=[1000, 5000, 20000, 50000, 100000])
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1])
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    oracle = load_mlp(FIXTURES / "mlp_stripes_8x8.json")
    source = read_image(FIXTURES / "source.pgm", range_hint=1.0)
    reference = read_image(FIXTURES / "reference.pgm", range_hint=1.0)
    for seed in args.seeds:
        print(f"\nseed {seed}")
        print(f"{'queries':>8}  {'guided_norm':>12}  {'walk_norm':>12}  leader")
        for q_max in args.budgets:
            t0 = time.monotonic()
            red = run_attack(source, reference, oracle,
                             AttackConfig(q_max=q_max, seed=seed))
            walk = run_boundary_attack(source, reference, oracle,
                                       BaselineConfig(q_max=q_max, seed=seed))
            leader = "guided" if red.metrics.pert_norm < walk.metrics.pert_norm \
                else "walk"
            print(f"{q_max:>8}  {red.metrics.pert_norm:>12.4f}  "
                  f"{walk.metrics.pert_norm:>12.4f}  {leader}"
                  f"   ({time.monotonic() - t0:.0f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
