"""Brute-force reference computations for cross-checking the fast assembly.

Everything here is rebuilt from basis words: a tensor is a dict mapping
tuples of ``(coordinate, letter)`` pairs to coefficients, flips act on
adjacent letters through their matrix entries, and ampliations are filled
in block by block. No routine from the fast path is reused for assembly;
only the flip matrices of the product system are read.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

ORACLE_MAX_DIM = 400


# ---------------------------------------------------------------------------
# words


def level_factors(spec, n):
    return [c for c in range(spec.k) for _ in range(n[c])]


def level_words(spec, n):
    """Basis words of ``E(n)``, last letter varying fastest."""
    fac = level_factors(spec, n)
    return [tuple(zip(fac, letters)) for letters in itertools.product(*[range(spec.dims[c]) for c in fac])]


def word_index(spec, word):
    idx = 0
    for c, a in word:
        idx = idx * spec.dims[c] + a
    return idx


def flip_letters(spec, comb, pos):
    """Apply the flip to the letters at ``pos, pos + 1`` of every word in ``comb``."""
    out = {}
    for word, coef in comb.items():
        (ci, a), (cj, b) = word[pos], word[pos + 1]
        t = spec.flip(ci, cj)
        col = a * spec.dims[cj] + b
        for row in range(t.shape[0]):
            z = t[row, col]
            if z == 0:
                continue
            b2, a2 = divmod(row, spec.dims[ci])
            new = word[:pos] + ((cj, b2), (ci, a2)) + word[pos + 2:]
            out[new] = out.get(new, 0) + coef * z
    return out


def move_letter(spec, comb, steps):
    """Move the first letter of every word ``steps`` places to the right."""
    for pos in range(steps):
        comb = flip_letters(spec, comb, pos)
    return comb


def extended_flip(spec, i, n):
    """``E_i (x) E(n) -> E(n) (x) E_i`` by moving a letter through each word."""
    words = level_words(spec, n)
    m = len(level_factors(spec, n))
    size = spec.dims[i] * len(words)
    out = np.zeros((size, size), dtype=complex)
    for a in range(spec.dims[i]):
        for w_idx, word in enumerate(words):
            col = a * len(words) + w_idx
            comb = move_letter(spec, {((i, a),) + word: 1.0}, m)
            for new, z in comb.items():
                out[word_index(spec, new), col] += z
    return out


# ---------------------------------------------------------------------------
# Fock modules and creation operators


def module_basis(spec, h_dim, p):
    """``(level, word, h coordinate)`` in module order."""
    out = []
    for n in itertools.product(range(p + 1), repeat=spec.k):
        for word in level_words(spec, n):
            for c in range(h_dim):
                out.append((n, word, c))
    return out


def creation_matrices(spec, h_dim, p):
    """Creation operators on the truncated Fock module, one basis column at a time."""
    basis = module_basis(spec, h_dim, p)
    where = {b: a for a, b in enumerate(basis)}
    size = len(basis)
    ops = []
    for i in range(spec.k):
        op = np.zeros((size, spec.dims[i] * size), dtype=complex)
        for a in range(spec.dims[i]):
            for col, (n, word, c) in enumerate(basis):
                if n[i] == p:
                    continue
                before = sum(n[:i])
                comb = move_letter(spec, {((i, a),) + word: 1.0}, before)
                m = tuple(x + (1 if q == i else 0) for q, x in enumerate(n))
                for new, z in comb.items():
                    op[where[(m, new, c)], a * size + col] += z
        ops.append(op)
    return ops


def interior_rows(spec, h_dim, p, g):
    return [a for a, (n, _, _) in enumerate(module_basis(spec, h_dim, p)) if max(n, default=0) <= p - g]


# ---------------------------------------------------------------------------
# dense helpers built by loops


def identity_times(d, a):
    """``I_d (x) A`` filled block by block."""
    r, c = a.shape
    out = np.zeros((d * r, d * c), dtype=complex)
    for b in range(d):
        out[b * r:(b + 1) * r, b * c:(b + 1) * c] = a
    return out


def times_identity(t, r):
    """``T (x) I_r`` filled entry by entry."""
    out = np.zeros((t.shape[0] * r, t.shape[1] * r), dtype=complex)
    for x in range(t.shape[0]):
        for y in range(t.shape[1]):
            if t[x, y] != 0:
                for s in range(r):
                    out[x * r + s, y * r + s] = t[x, y]
    return out


def apply_word(ops, dims, word, x):
    """``V~_n (xi_1 (x) ... (x) xi_m (x) x)`` for a basis word, innermost letter first."""
    h = x.shape[0]
    for c, a in reversed(word):
        x = ops[c][:, a * h:(a + 1) * h] @ x
    return x


def word_product(ops, spec, n, h_dim):
    """``V~_n`` as a matrix ``E(n) (x) H -> H``."""
    words = level_words(spec, n)
    out = np.zeros((h_dim, len(words) * h_dim), dtype=complex)
    eye = np.eye(h_dim, dtype=complex)
    for w_idx, word in enumerate(words):
        out[:, w_idx * h_dim:(w_idx + 1) * h_dim] = apply_word(ops, spec.dims, word, eye)
    return out


def commutation_sides(ops, spec, h_dim, i, j):
    """Both sides of the commutation relation evaluated on basis vectors."""
    di, dj = spec.dims[i], spec.dims[j]
    size = di * dj * h_dim
    lhs = np.zeros((h_dim, size), dtype=complex)
    rhs = np.zeros((h_dim, size), dtype=complex)
    t = spec.flip(i, j)
    for a in range(di):
        for b in range(dj):
            for c in range(h_dim):
                col = (a * dj + b) * h_dim + c
                x = np.zeros(h_dim, dtype=complex)
                x[c] = 1.0
                lhs[:, col] = apply_word(ops, spec.dims, ((i, a), (j, b)), x)
                for row in range(t.shape[0]):
                    if t[row, a * dj + b] == 0:
                        continue
                    b2, a2 = divmod(row, di)
                    rhs[:, col] += t[row, a * dj + b] * apply_word(ops, spec.dims, ((j, b2), (i, a2)), x)
    return lhs, rhs


def alternating_defect(ops, spec, h_dim):
    """``sum_u (-1)^{|u|} V~_{e(u)} V~_{e(u)}^*``."""
    acc = np.zeros((h_dim, h_dim), dtype=complex)
    for u in itertools.product((0, 1), repeat=spec.k):
        v = word_product(ops, spec, u, h_dim)
        acc += (-1) ** sum(u) * (v @ v.conj().T)
    return acc


def dilation_blocks(ops, spec, h_dim, p, root):
    """``(I (x) Delta_*) V~_n^*`` for ``max n_j <= p``."""
    out = {}
    for n in itertools.product(range(p + 1), repeat=spec.k):
        v = word_product(ops, spec, n, h_dim)
        out[n] = identity_times(v.shape[1] // h_dim, root) @ v.conj().T
    return out


def bqs_matrices(ops, spec, q, qi, i, j):
    """Interior-compressed main and cross matrices for the pair ``(i, j)``."""
    h, r = q.shape
    di, dj = spec.dims[i], spec.dims[j]
    img_i = ops[i] @ identity_times(di, q)
    img_j = ops[j] @ identity_times(dj, q)
    ti, tj = q.conj().T @ img_i, q.conj().T @ img_j
    defect_i = np.eye(di * r) - ti.conj().T @ ti
    defect_j = np.eye(dj * r) - tj.conj().T @ tj
    amap = qi.conj().T @ q
    flip = times_identity(spec.flip(i, j), r)
    left = identity_times(di, amap) @ defect_i
    right = defect_j @ identity_times(dj, amap.conj().T)
    main = identity_times(dj, left) @ flip @ identity_times(di, right)
    perp = np.eye(h) - q @ q.conj().T
    cl = qi.conj().T @ perp @ img_i
    cr = (perp @ img_j).conj().T @ qi
    cross = identity_times(dj, cl) @ flip @ identity_times(di, cr)
    return main, cross


def symbol_matrix(src_ops, tgt_ops, spec, src_h, p, theta):
    """``M_Theta`` on the induced source: ``word (x) w_c -> V~_word (Theta e_c)``."""
    basis = module_basis(spec, src_h, p)
    out = np.zeros((theta.shape[0], len(basis)), dtype=complex)
    for col, (n, word, c) in enumerate(basis):
        out[:, col] = apply_word(tgt_ops, spec.dims, word, theta[:, c])
    return out


# ---------------------------------------------------------------------------
# comparison driver


@dataclass(frozen=True)
class OracleReport:
    deviations: dict
    total_dim: int

    @property
    def max_deviation(self):
        return max(self.deviations.values(), default=0.0)


def _dev(a, b):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return float("inf")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def compare(instance, p=1, tol=None):
    """Oracle against the fast path for every construction the instance supports.

    ``p`` is the dilation level cap used for Brehmer tuples.
    """
    from . import beurling, covariant, dilation, fock_model, tensor_core
    from .analytic import from_symbol

    tol = tol or covariant.DEFAULT_TOL
    spec, tup = instance.spec, instance.tuple
    h = tup.h_dim
    if h > ORACLE_MAX_DIM:
        raise InputError(f"instance has dimension {h}, above the oracle bound {ORACLE_MAX_DIM}")
    dev = {}
    for i in range(spec.k):
        for n in itertools.product(range(3), repeat=spec.k):
            if math.prod(spec.dims[c] ** n[c] for c in range(spec.k)) * spec.dims[i] > 64:
                continue
            dev[f"extended_flip[{i}]"] = max(
                dev.get(f"extended_flip[{i}]", 0.0),
                _dev(extended_flip(spec, i, n), tensor_core.extended_flip(spec, i, n)),
            )
    if instance.rep is not None:
        m = instance.rep.module
        ops = creation_matrices(spec, m.h_dim, m.level_cap)
        dev["creation"] = max(_dev(ops[i], tup[i]) for i in range(spec.k))
    else:
        ops = [np.asarray(tup[i]) for i in range(spec.k)]
    for i, j in itertools.permutations(range(spec.k), 2):
        lhs, rhs = commutation_sides(ops, spec, h, i, j)
        fl, fr = covariant.commutation_lhs_rhs(tup, i, j)
        dev["commutation"] = max(dev.get("commutation", 0.0), _dev(lhs, fl), _dev(rhs, fr))
    if instance.rep is None:
        sq = alternating_defect(ops, spec, h)
        rep = covariant.defect(tup, tol)
        dev["defect"] = _dev(sq, rep.delta_star_sq)
        if rep.brehmer:
            lam, u = np.linalg.eigh((sq + sq.conj().T) / 2)
            root = (u * np.sqrt(np.where(lam <= tol.psd, 0.0, lam))) @ u.conj().T
            blocks = dilation_blocks(ops, spec, h, p, root)
            res = dilation.build_dilation(tup, p, 1, tol)
            dev["dilation"] = max(_dev(blocks[n], res.blocks[n]) for n in blocks)
    if instance.subspace is not None and instance.subspace.dim:
        q = instance.subspace.basis
        qi = instance.interior.basis if instance.interior is not None else np.eye(h)
        # the frame is built without the quotient check so any subspace can be compared
        fr = beurling.quotient_frame(tup, instance.subspace, instance.interior, dataclasses.replace(tol, exact=math.inf))
        for i, j in itertools.permutations(range(spec.k), 2):
            main, cross = bqs_matrices(ops, spec, q, qi, i, j)
            dev["bqs_main"] = max(dev.get("bqs_main", 0.0), _dev(main, beurling._main_matrix(fr, i, j)))
            dev["bqs_cross"] = max(
                dev.get("bqs_cross", 0.0), _dev(cross, beurling._cross_matrix(fr, i, j, instance.interior))
            )
    if instance.symbol is not None and instance.rep is not None:
        m = instance.rep.module
        theta = instance.symbol
        src = fock_model.induced_rep(spec, theta.shape[1], m.level_cap, m.guard)
        src_ops = creation_matrices(spec, theta.shape[1], m.level_cap)
        ref = symbol_matrix(src_ops, ops, spec, theta.shape[1], m.level_cap, theta)
        dev["symbol"] = _dev(ref, from_symbol(src, instance.rep, theta, tol=tol).m_theta)
    return OracleReport(dev, h)


__all__ = [
    "ORACLE_MAX_DIM",
    "OracleReport",
    "alternating_defect",
    "bqs_matrices",
    "commutation_sides",
    "compare",
    "creation_matrices",
    "dilation_blocks",
    "extended_flip",
    "identity_times",
    "interior_rows",
    "level_words",
    "module_basis",
    "symbol_matrix",
    "times_identity",
    "word_product",
]
