"""Isometry residual and norm-identity tail of the truncated dilation against p.

Shows how the truncation level needed for a given isometry residual grows
with the spectral radius of the random pure tuples.
"""

import argparse

import numpy as np

from bqslab.corpus import random_pure_tuple
from bqslab.dilation import build_dilation, pi_norm_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=10)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--h", type=int, default=3)
    ap.add_argument("--p-max", type=int, default=12)
    ap.add_argument("--radii", default="0.3,0.5,0.8")
    args = ap.parse_args()

    ps = list(range(1, args.p_max + 1))
    print("median isometry residual ||Pi* Pi - I|| (rows: spectral radius, columns: p)")
    print(f"{'radius':>7} " + " ".join(f"{p:>9}" for p in ps))
    for radius in (float(x) for x in args.radii.split(",")):
        rng = np.random.default_rng(args.seed)
        tuples = [random_pure_tuple(rng, args.k, args.h, spectral_radius=radius) for _ in range(args.count)]
        med = [np.median([build_dilation(t, p).isometry_residual for t in tuples]) for p in ps]
        print(f"{radius:>7.2f} " + " ".join(f"{m:>9.2e}" for m in med))
        tails = []
        for t in tuples:
            h = rng.standard_normal(t.h_dim)
            h /= np.linalg.norm(h)
            tails.append(pi_norm_check(t, h, args.p_max).tail)
        print(f"{'':>7} tail of the norm identity at p={args.p_max}: median {np.median(tails):.2e}")


if __name__ == "__main__":
    main()
