"""Compute reference values with the brute-force oracle path and print them.

The unit tests freeze these numbers. Everything here is built from basis
words and explicit loops (``bqslab.oracle``) or from plain 2x2 / 3x3 matrix
arithmetic, never from the fast assembly routines under test.
"""

import itertools

import numpy as np

from bqslab import oracle
from bqslab.tensor_core import swap_spec


def nonzero_positions(m):
    return sorted((int(r), int(c)) for r, c in zip(*np.nonzero(np.abs(m) > 0.5)))


def monomial(p, a, b):
    """Flat index of z1^a z2^b in the bidisc module (h = 1, all dims 1)."""
    return a * (p + 1) + b


def main():
    bidisc = swap_spec((1, 1))
    sq = swap_spec((2, 2))

    print("swap flip (2,2) ones:", nonzero_positions(oracle.extended_flip(sq, 0, (0, 1))))
    ef = oracle.extended_flip(sq, 0, (0, 2))
    print("extended flip (2,2) i=0 n=(0,2) ones:", nonzero_positions(ef))

    v1 = np.array([[0, 1], [0, 0]], dtype=complex)
    v2 = np.array([[0, 0], [1, 0]], dtype=complex)
    lhs, rhs = oracle.commutation_sides([v1, v2], bidisc, 2, 0, 1)
    print("commutation residual (shift, coshift):", np.linalg.norm(lhs - rhs))

    # doubly commuting defect V*V - VV* for V1 = V2 = shift, by hand
    print("doubly commuting residual (V1=V2=shift):", np.linalg.norm(v1.conj().T @ v1 - v1 @ v1.conj().T))

    a = 1 / np.sqrt(2)
    nil = np.array([[0, a], [0, 0]], dtype=complex)
    sq_def = oracle.alternating_defect([nil, nil], bidisc, 2)
    print("nilpotent defect square:", np.round(sq_def.real, 15).tolist())
    nine = np.array([[0, 0.9], [0, 0]], dtype=complex)
    print("0.9 defect min eigenvalue:", np.linalg.eigvalsh(oracle.alternating_defect([nine, nine], bidisc, 2))[0])
    blocks = oracle.dilation_blocks([nil, nil], bidisc, 2, 1, np.diag([0.0, 1.0]).astype(complex))
    for n, b in sorted(blocks.items()):
        print("nilpotent block", n, np.round(b.real, 15).tolist())
    pi = np.vstack([blocks[n] for n in sorted(blocks)])
    print("nilpotent isometry residual:", np.linalg.norm(pi.conj().T @ pi - np.eye(2), 2))

    # bidisc creation operators at p = 3 and p = 4, brute force
    for p in (3, 4):
        ops = oracle.creation_matrices(bidisc, 1, p)
        size = ops[0].shape[0]
        kq = np.zeros((size, 3), dtype=complex)
        for b in range(3):
            kq[monomial(p, 0, b), b] = 1.0
        qi = np.eye(size)[:, oracle.interior_rows(bidisc, 1, p, 1)]
        main, cross = oracle.bqs_matrices(ops, bidisc, kq, qi, 0, 1)
        print(f"K_q p={p}: main norm", np.linalg.norm(main, 2), "cross norm", np.linalg.norm(cross, 2))
        col = np.zeros((size, p + 1), dtype=complex)
        for b in range(p + 1):
            col[monomial(p, 0, b), b] = 1.0
        main, cross = oracle.bqs_matrices(ops, bidisc, col, qi, 0, 1)
        print(f"(z1 F)^perp p={p}: main norm", np.linalg.norm(main, 2), "cross norm", np.linalg.norm(cross, 2))
        t2 = kq.conj().T @ ops[1] @ kq
        t1 = kq.conj().T @ ops[0] @ kq
        print(f"compress to span{{1,z2,z2^2}} p={p}: T1 zero", not np.any(t1), "T2", t2.real.tolist())

    # K_q witness for the cross defect: zeta1 (x) z2^3 -> zeta2 (x) z1 z2^2 at p = 4
    p = 4
    ops = oracle.creation_matrices(bidisc, 1, p)
    size = ops[0].shape[0]
    kq = np.zeros((size, 3), dtype=complex)
    for b in range(3):
        kq[monomial(p, 0, b), b] = 1.0
    qi = np.eye(size)[:, oracle.interior_rows(bidisc, 1, p, 1)]
    _, cross = oracle.bqs_matrices(ops, bidisc, kq, qi, 0, 1)
    rows = oracle.interior_rows(bidisc, 1, p, 1)
    x = np.zeros(len(rows), dtype=complex)
    x[rows.index(monomial(p, 0, 3))] = 1.0
    y = cross @ x
    hit = [rows[r] for r in np.nonzero(np.abs(y) > 0.5)[0]]
    print("cross witness image positions:", hit, "expected", [monomial(p, 1, 2)])

    # Gram matrix of {z1 theta, z2 theta} for theta = (z1 + z2)/sqrt(2)
    p = 4
    ops = oracle.creation_matrices(bidisc, 1, p)
    size = ops[0].shape[0]
    theta = np.zeros(size, dtype=complex)
    theta[monomial(p, 1, 0)] = theta[monomial(p, 0, 1)] = 1 / np.sqrt(2)
    g = np.array([[np.vdot(ops[i] @ theta, ops[j] @ theta) for j in range(2)] for i in range(2)])
    print("two-vector gram eigenvalues:", np.linalg.eigvalsh(g).real.tolist())

    # brute-force S = z1 F + z2 F overlap at p = 3: z1 z2 is reached from both generators
    p = 3
    ops = oracle.creation_matrices(bidisc, 1, p)
    z1 = np.zeros(16, dtype=complex)
    z1[monomial(p, 1, 0)] = 1
    z2 = np.zeros(16, dtype=complex)
    z2[monomial(p, 0, 1)] = 1
    print("overlap <V2 z1, V1 z2>:", abs(np.vdot(ops[1] @ z1, ops[0] @ z2)))

    # restricted doubly commuting residual for z1 F + z2 F at p = 3, in brute-force coordinates
    idx = [monomial(p, a, b) for a, b in itertools.product(range(p + 1), repeat=2) if a + b >= 1]
    s = np.eye(16)[:, idx]
    r1, r2 = s.T @ ops[0] @ s, s.T @ ops[1] @ s
    inner = [monomial(p, a, b) for a, b in itertools.product(range(p), repeat=2) if a + b >= 1]
    dom = s.T @ np.eye(16)[:, inner]
    diff = r2.conj().T @ r1 - r1 @ r2.conj().T
    print("DC residual on z1F + z2F interior:", np.linalg.norm(diff @ dom, 2))


if __name__ == "__main__":
    main()
