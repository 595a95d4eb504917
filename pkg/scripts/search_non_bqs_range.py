"""Search random pure Brehmer tuples whose dilation range is not Beurling.

By the final equivalence such tuples are exactly the ones not of Beurling
type. Prints how often the range fails and the smallest failing example.
A small spectral radius keeps the truncated range co-invariant to working
precision; with --k 1 every range should pass.
"""

import argparse

import numpy as np

from bqslab.corpus import random_pure_tuple
from bqslab.dilation import beurling_equivalence_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--max-h", type=int, default=3)
    ap.add_argument("--p", type=int, default=10)
    ap.add_argument("--spectral-radius", type=float, default=0.1)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    fails, smallest = 0, None
    for a in range(args.count):
        h = int(rng.integers(1, args.max_h + 1))
        tup = random_pure_tuple(rng, args.k, h, spectral_radius=args.spectral_radius)
        e = beurling_equivalence_check(tup, args.p)
        if e.bqs_of_range is None or not e.bqs_of_range.verdict:
            fails += 1
            if smallest is None or h < smallest[0]:
                smallest = (h, a, e.bqs_of_range.residual if e.bqs_of_range else float("inf"))
        print(f"{a:>3} h={h} pure={e.pure} brehmer={e.brehmer} beurling_range="
              f"{e.bqs_of_range.verdict if e.bqs_of_range else None} equivalence={e.equivalence_residual:.1e}")
    print(f"\n{fails}/{args.count} ranges are not Beurling")
    if smallest:
        print(f"smallest: h={smallest[0]} (instance {smallest[1]}), residual {smallest[2]:.3f}")


if __name__ == "__main__":
    main()
