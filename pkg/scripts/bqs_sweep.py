"""Sweep seeded quotient subspaces and tabulate the Beurling test by configuration.

For each configuration prints the count, how many are Beurling, the worst
main/cross disagreement and the largest residual among the Beurling ones.
"""

import argparse
import collections

from bqslab.beurling import bqs_test
from bqslab.corpus import dcs_corpus, qs_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=100)
    args = ap.parse_args()

    rows = collections.defaultdict(lambda: [0, 0, 0, 0.0])
    for rep, k_sub in qs_corpus(args.seed, args.count):
        r = bqs_test(rep.tuple, k_sub, rep.interior())
        row = rows[(rep.spec.dims, rep.module.h_dim, rep.module.level_cap)]
        row[0] += 1
        row[1] += r.verdict
        row[2] += r.verdict_main != r.verdict_cross
        if r.verdict:
            row[3] = max(row[3], r.residual)
    print(f"{'dims':>10} {'h':>2} {'p':>2} {'count':>6} {'beurling':>9} {'disagree':>9} {'max resid':>10}")
    for (dims, h, p), (n, b, d, res) in sorted(rows.items()):
        print(f"{str(dims):>10} {h:>2} {p:>2} {n:>6} {b:>9} {d:>9} {res:>10.2e}")

    print("\ncomplements of doubly commuting invariant subspaces")
    worst = 0.0
    corpus = dcs_corpus(args.seed, max(1, args.count // 4))
    for inst in corpus:
        r = bqs_test(inst.rep.tuple, inst.subspace.complement(), inst.rep.interior())
        worst = max(worst, r.residual)
    print(f"{len(corpus)} instances, worst residual {worst:.2e}")


if __name__ == "__main__":
    main()
