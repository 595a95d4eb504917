"""Seeded generators for quotient subspaces, doubly commuting invariant subspaces, pure tuples and symbols."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariant import CovariantTuple, adjoint_products, brehmer_check, v_tilde_products
from .fock_model import InducedRep, induced_rep
from .tensor_core import Subspace, enumerate_levels, orth, swap_spec


def _cnormal(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _unit(rng, n):
    v = _cnormal(rng, n)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# quotient subspaces


def adjoint_closure(tup, vectors, max_level):
    """Span of all ``V~_n^* x`` reshaped into ``H``, for the columns ``x`` and ``max n_j <= max_level``.

    Every ``V~_n^* x`` lies in ``E(n) (x) H``; its ``H`` slices are collected.
    """
    vectors = np.asarray(vectors, dtype=complex)
    levels = enumerate_levels(max_level, tup.k)
    adj = adjoint_products(tup, levels, vectors)
    cols = []
    for n in levels:
        y = adj[n]
        dn = tup.spec.tensor_dim(n)
        cols.append(y.reshape(dn, tup.h_dim, -1).transpose(1, 0, 2).reshape(tup.h_dim, -1))
    return Subspace(orth(np.hstack(cols)))


def random_qs(rep, rng, n_vectors=2, depth=None):
    """Quotient subspace spanned by the adjoint orbit of random vectors on levels ``max n_j <= depth``.

    ``depth`` defaults to ``p - g - 1`` so the subspace and its images under
    the creation operators stay inside the interior.
    """
    m = rep.module
    if depth is None:
        depth = m.level_cap - m.guard - 1
    idx = m.indices(lambda n: max(n, default=0) <= max(depth, 0))
    x = np.zeros((m.dim, n_vectors), dtype=complex)
    x[idx] = _cnormal(rng, idx.size, n_vectors)
    return adjoint_closure(rep.tuple, x, m.level_cap)


def monomial_qs(rep, levels):
    """Span of whole level blocks for a set of levels closed under lowering."""
    m = rep.module
    idx = m.indices(lambda n: n in set(map(tuple, levels)))
    return Subspace.coordinate(m.dim, idx)


# ---------------------------------------------------------------------------
# doubly commuting invariant subspaces


@dataclass(frozen=True, eq=False)
class DcsInstance:
    rep: InducedRep
    subspace: Subspace
    generators: np.ndarray
    levels: tuple


def random_dcs(rep, rng, n_generators=1, max_shift=2):
    """Invariant subspace generated by ``xi_l (x) u_l`` with ``xi_l`` a random unit tensor of a single level.

    The ``u_l`` are orthonormal in ``H``, so the subspace is an orthogonal sum
    of principal submodules of separate copies, hence doubly commuting.
    """
    m = rep.module
    spec = m.spec
    h = m.h_dim
    n_generators = min(n_generators, h)
    u = orth(_cnormal(rng, h, n_generators))
    gens, lv = [], []
    for l in range(n_generators):
        alpha = (0,) * spec.k
        while not any(alpha):
            alpha = tuple(int(a) for a in rng.integers(0, max_shift + 1, size=spec.k))
        xi = _unit(rng, spec.tensor_dim(alpha))
        gens.append(m.vector(alpha, xi, u[:, l]))
        lv.append(alpha)
    g = np.column_stack(gens)
    prods = v_tilde_products(rep.tuple, enumerate_levels(m.level_cap, spec.k), g)
    s = Subspace(orth(np.hstack(list(prods.values()))))
    return DcsInstance(rep, s, g, tuple(lv))


DCS_CONFIGS = (
    ((1, 1), 1),
    ((1, 1), 2),
    ((1, 1), 3),
    ((2, 1), 1),
    ((2, 2), 1),
    ((1, 1, 1), 1),
    ((2, 1, 1), 1),
)


def dcs_corpus(seed, count, p=4, g=1):
    """Seeded list of doubly commuting invariant subspaces cycling through small configurations."""
    rng = np.random.default_rng(seed)
    reps = {}
    out = []
    for a in range(count):
        dims, h = DCS_CONFIGS[a % len(DCS_CONFIGS)]
        key = (dims, h)
        if key not in reps:
            reps[key] = induced_rep(swap_spec(dims), h, p, g)
        out.append(random_dcs(reps[key], rng, n_generators=int(rng.integers(1, h + 1))))
    return out


QS_CONFIGS = (((1, 1), 1, 4), ((1, 1), 2, 4), ((2, 1), 1, 4), ((1, 1, 1), 1, 3), ((2, 2), 1, 3))


def qs_corpus(seed, count, g=1):
    """Seeded quotient subspaces: random adjoint orbits, lowered level sets and complements of DC subspaces."""
    rng = np.random.default_rng(seed)
    reps = {}
    out = []
    for a in range(count):
        dims, h, p = QS_CONFIGS[a % len(QS_CONFIGS)]
        key = (dims, h, p)
        if key not in reps:
            reps[key] = induced_rep(swap_spec(dims), h, p, g)
        rep = reps[key]
        kind = a % 3
        if kind == 0:
            k_sub = random_qs(rep, rng, n_vectors=int(rng.integers(1, 3)))
        elif kind == 1:
            top = tuple(int(x) for x in rng.integers(0, p - g, size=len(dims)))
            lv = [n for n in enumerate_levels(p, len(dims)) if all(x <= t for x, t in zip(n, top))]
            k_sub = monomial_qs(rep, lv)
        else:
            k_sub = random_dcs(rep, rng, n_generators=1).subspace.complement()
        out.append((rep, k_sub))
    return out


# ---------------------------------------------------------------------------
# tuples on matrix spaces


def random_pure_tuple(rng, k, h, spectral_radius=0.8, shrink=0.95):
    """Commuting tuple of polynomials in one upper triangular matrix.

    Each member is scaled to the given spectral radius (nilpotent members to
    that operator norm), then the whole tuple is shrunk geometrically until
    the Brehmer condition holds.
    """
    a = np.triu(_cnormal(rng, h, h))
    mats = []
    for _ in range(k):
        c = _cnormal(rng, h)
        mat = sum(c[q] * np.linalg.matrix_power(a, q) for q in range(h))
        sr = float(np.max(np.abs(np.linalg.eigvals(mat))))
        scale = spectral_radius / sr if sr > 1e-12 else spectral_radius / np.linalg.norm(mat, 2)
        mats.append(mat * scale)
    factor = 1.0
    tup = CovariantTuple.from_scalar_matrices(mats)
    while not brehmer_check(tup)[0]:
        factor *= shrink
        tup = CovariantTuple.from_scalar_matrices([m * factor for m in mats])
    return tup


def pure_corpus(seed, count, k=2, max_h=4):
    rng = np.random.default_rng(seed)
    return [random_pure_tuple(rng, k, int(rng.integers(1, max_h + 1))) for _ in range(count)]


def random_symbol(rep, rng, max_level=1):
    """Random unit vector on levels ``max n_j <= max_level`` of an induced module."""
    m = rep.module
    idx = m.indices(lambda n: max(n, default=0) <= max_level)
    v = np.zeros(m.dim, dtype=complex)
    v[idx] = _unit(rng, idx.size)
    return v


# ---------------------------------------------------------------------------
# factorization instances


@dataclass(frozen=True, eq=False)
class FactorInstance:
    rep: InducedRep
    theta: np.ndarray
    phi: np.ndarray
    psi_level: tuple
    phi_level: tuple
    family: str


FACTOR_FAMILIES = (
    ("k1-monomial", (1,), 8, 4, 4),
    ("k1-tensor", (2,), 6, 3, 3),
    ("bidisc-monomial", (1, 1), 6, 3, 3),
    ("d21-tensor", (2, 1), 4, 2, 2),
)


def factor_instance(rep, rng, theta_level, phi_level, family):
    """``Theta = T~_{alpha - beta}(psi (x) phi)`` with unit tensors ``psi``, ``phi`` on single levels."""
    m = rep.module
    spec = m.spec
    psi_level = tuple(a - b for a, b in zip(theta_level, phi_level))
    phase = np.exp(2j * np.pi * rng.random())
    phi = m.vector(phi_level, _unit(rng, spec.tensor_dim(phi_level)), [phase])
    psi = _unit(rng, spec.tensor_dim(psi_level))
    block = v_tilde_products(rep.tuple, [psi_level], phi[:, None])[psi_level]
    theta = block @ psi
    return FactorInstance(rep, theta, phi, psi_level, tuple(phi_level), family)


def factor_corpus(seed, count):
    """Seeded ``(Theta, Phi)`` pairs across the four families, trivial splits included."""
    rng = np.random.default_rng(seed)
    reps = {}
    out = []
    for a in range(count):
        family, dims, p, g, cap = FACTOR_FAMILIES[a % len(FACTOR_FAMILIES)]
        if family not in reps:
            reps[family] = induced_rep(swap_spec(dims), 1, p, g)
        rep = reps[family]
        k = len(dims)
        while True:
            alpha = tuple(int(x) for x in rng.integers(0, cap + 1, size=k))
            if sum(alpha) and max(alpha) <= g:
                break
        beta = tuple(int(rng.integers(0, x + 1)) for x in alpha)
        out.append(factor_instance(rep, rng, alpha, beta, family))
    return out


def factor_pair(inst, tol=None):
    """``(M_Theta, M_Phi, S)`` for an instance, with ``S = ran M_Phi (-) ran M_Theta``."""
    from .analytic import from_symbol
    from .covariant import DEFAULT_TOL

    tol = tol or DEFAULT_TOL
    theta_op = from_symbol(inst.rep, inst.rep, inst.theta, tol=tol)
    phi_op = from_symbol(inst.rep, inst.rep, inst.phi, tol=tol)
    rng_theta = orth(theta_op.m_theta, tol.rank)
    rng_phi = orth(phi_op.m_theta, tol.rank)
    diff = rng_phi - rng_theta @ (rng_theta.conj().T @ rng_phi)
    return theta_op, phi_op, Subspace(orth(diff, tol.rank, scale=1.0))


__all__ = [
    "adjoint_closure",
    "random_qs",
    "monomial_qs",
    "DcsInstance",
    "random_dcs",
    "dcs_corpus",
    "qs_corpus",
    "random_pure_tuple",
    "pure_corpus",
    "random_symbol",
    "FactorInstance",
    "factor_instance",
    "factor_corpus",
    "factor_pair",
]
