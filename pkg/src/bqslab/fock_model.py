"""Induced (creation-operator) tuples on truncated Fock modules and subspace tools.

Creation operators send the top level ``n_i = p`` to zero. Their adjoints
lower levels and are exact everywhere; isometry and the commutation relations
hold exactly on interior vectors.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .covariant import (
    DEFAULT_TOL,
    CovariantTuple,
    adjoint_products,
    compress,
    v_tilde_products,
)
from .errors import InputError, NotInvariantError
from .tensor_core import (
    op_norm,
    ProductSystemSpec,
    Subspace,
    TruncatedFockModule,
    enumerate_levels,
    left_kron_product,
    move_right,
    orth,
    right_kron_product,
)


@dataclass(frozen=True, eq=False)
class InducedRep:
    module: TruncatedFockModule
    tuple: CovariantTuple

    @property
    def spec(self):
        return self.module.spec

    def interior(self):
        return self.module.interior()

    def vacuum(self):
        """The level-0 block ``span{vacuum} (x) H``."""
        return self.module.level_subspace((0,) * self.spec.k)


def creation_block(spec, i, n):
    """Identification ``E_i (x) E(n) -> E(n + e_i)``.

    The new ``E_i`` factor moves right past the factors of coordinates
    before ``i`` and then joins the front of the ``E_i`` run.
    """
    before = []
    for j in range(i):
        before.extend([j] * n[j])
    u = move_right(spec, i, before)
    rest = spec.tensor_dim(n) // max(1, int(np.prod([spec.dims[j] for j in before])))
    return np.kron(u, np.eye(rest))


def induced_rep(spec, h_dim, p, g=1):
    """Creation operators on the truncated Fock module ``F_p (x) H``."""
    if p < 1:
        raise InputError("level cap must be at least 1")
    if not 1 <= g < p:
        raise InputError(f"guard must satisfy 1 <= g < p, got g={g}, p={p}")
    if spec.k >= 3:
        br = spec.braid_residual()
        if br > 1e-9:
            raise InputError(f"flips violate the braid relation (residual {br:.3e})")
    module = TruncatedFockModule(spec, h_dim, p, g)
    return InducedRep(module, creation_operators(module))


def creation_operators(module):
    """Truncated creation operators on any truncated module (no guard restriction)."""
    spec = module.spec
    p = module.level_cap
    h_dim = module.h_dim
    big_n = module.dim
    mats = []
    for i in range(spec.k):
        d = spec.dims[i]
        s = np.zeros((big_n, d * big_n), dtype=complex)
        for n in module.levels:
            if n[i] == p:
                continue
            m = n[:i] + (n[i] + 1,) + n[i + 1:]
            rows = np.arange(module.block_dim(m)) + module.offset(m)
            bd = module.block_dim(n)
            cols = (np.arange(d)[:, None] * big_n + module.offset(n) + np.arange(bd)[None, :]).ravel()
            block = np.kron(creation_block(spec, i, n), np.eye(h_dim))
            s[np.ix_(rows, cols)] = block
        mats.append(s)
    return CovariantTuple(spec, big_n, tuple(mats))


def wandering_subspace(tup, tol=DEFAULT_TOL):
    """``H`` minus the joint range of the ``V~^(i)``.

    The joint range is the range of ``sum_i V~^(i) V~^(i)*``, whose kernel is
    read off from a Hermitian eigendecomposition.
    """
    if tup.h_dim == 0:
        return Subspace.zero(0)
    g = np.zeros((tup.h_dim, tup.h_dim), dtype=complex)
    for i in range(tup.k):
        g += np.asarray((tup.op(i) @ tup.op_adj(i)).todense()) if hasattr(tup.op(i), "todense") else tup[i] @ tup[i].conj().T
    lam, u = np.linalg.eigh((g + g.conj().T) / 2)
    top = max(float(lam[-1]), 0.0)
    # the cut is on eigenvalues, not their square roots: rounding noise of
    # size eps * top would otherwise pass as singular values near 1e-8
    small = lam <= tol.rank * top
    if top == 0.0:
        return Subspace.full(tup.h_dim)
    return Subspace(orth(u[:, small]))


@dataclass(frozen=True)
class GwsReport:
    orthogonal: bool
    spanning: bool
    overlap: float
    spanning_residual: float
    block_dims: dict


def wandering_blocks(tup, w, p):
    """Orthonormal bases of ``V~_n (E(n) (x) W)`` for every level with ``max n_j <= p``."""
    levels = enumerate_levels(p, tup.k)
    prods = v_tilde_products(tup, levels, w.basis)
    return {n: orth(prods[n]) for n in levels}


def gws_check(tup, w, p, target=None, tol=DEFAULT_TOL):
    """Check that the blocks ``V~_n (E(n) (x) W)`` are mutually orthogonal and span ``target``.

    ``target`` defaults to the whole space.
    """
    blocks = wandering_blocks(tup, w, p)
    overlap = 0.0
    keys = [n for n in blocks if blocks[n].shape[1]]
    for a, b in itertools.combinations(keys, 2):
        overlap = max(overlap, float(np.linalg.norm(blocks[a].conj().T @ blocks[b], 2)))
    span = Subspace(orth(np.hstack([blocks[n] for n in blocks]), tol.rank)) if keys else Subspace.zero(tup.h_dim)
    if target is None:
        target = Subspace.full(tup.h_dim)
    resid = span.distance_to(target.basis) if target.dim else 0.0
    return GwsReport(
        orthogonal=overlap <= tol.exact,
        spanning=resid <= tol.exact,
        overlap=overlap,
        spanning_residual=resid,
        block_dims={n: blocks[n].shape[1] for n in blocks},
    )


@dataclass(frozen=True)
class SubspaceClass:
    invariant: bool
    coinvariant: bool
    reducing: bool
    quotient: bool
    invariant_residual: float
    coinvariant_residual: float
    quotient_residual: float
    touches_top: bool = False


def invariance_residual(tup, k_sub):
    """``max_i ||(I - P_K) V~^(i) (I (x) P_K)||``."""
    q = k_sub.basis
    worst = 0.0
    if q.shape[1] == 0:
        return 0.0
    for i in range(tup.k):
        img = right_kron_product(tup.op(i), q, tup.spec.dims[i])
        out = img - q @ (q.conj().T @ img)
        worst = max(worst, op_norm(out))
    return worst


def quotient_residual(tup, k_sub):
    """``max_i ||(I - I (x) P_K) V~^(i)* P_K||``."""
    q = k_sub.basis
    worst = 0.0
    if q.shape[1] == 0:
        return 0.0
    for i in range(tup.k):
        d = tup.spec.dims[i]
        img = tup.op_adj(i) @ q
        proj = left_kron_product(q, left_kron_product(q.conj().T, img, d), d)
        worst = max(worst, op_norm(img - proj))
    return worst


def classify_subspace(tup, k_sub, module=None, tol=DEFAULT_TOL):
    """Invariant / co-invariant / reducing / quotient flags with their residuals.

    With ``module`` given, a warning is issued when ``K`` has weight on a top level.
    """
    if k_sub.ambient_dim != tup.h_dim:
        raise InputError("subspace lives in a different space")
    inv = invariance_residual(tup, k_sub)
    comp = k_sub.complement(tol.rank)
    coinv = invariance_residual(tup, comp)
    quo = quotient_residual(tup, k_sub)
    top = False
    if module is not None and k_sub.dim:
        top_idx = module.indices(lambda n: max(n, default=0) == module.level_cap)
        top = bool(np.linalg.norm(k_sub.basis[top_idx, :]) > tol.exact)
        if top:
            warnings.warn("subspace has weight on the top truncation level", stacklevel=2)
    return SubspaceClass(
        invariant=inv <= tol.exact,
        coinvariant=coinv <= tol.exact,
        reducing=inv <= tol.exact and coinv <= tol.exact,
        quotient=quo <= tol.exact,
        invariant_residual=inv,
        coinvariant_residual=coinv,
        quotient_residual=quo,
        touches_top=top,
    )


def restrict(tup, s_sub, tol=DEFAULT_TOL):
    """Restriction to an invariant subspace, in the subspace's own basis."""
    res = invariance_residual(tup, s_sub)
    if res > tol.exact:
        raise NotInvariantError(f"subspace is not invariant (residual {res:.3e})", res)
    return compress(tup, s_sub, tol)


def multi_analytic_matrix(source, source_w, target, theta, levels):
    """``sum_n T~_n (I (x) Theta) V~_n^* P_n`` for the wandering decomposition of the source.

    ``source_w`` is the wandering subspace of the source and ``theta`` maps its
    coordinates into the target space. The source blocks ``V~_n (I (x) Q_W)``
    are isometries for a wandering decomposition, so their adjoints already
    contain the block projections ``P_n``.
    """
    theta = np.asarray(theta, dtype=complex)
    if theta.shape != (target.h_dim, source_w.dim):
        raise InputError(f"symbol has shape {theta.shape}, expected {(target.h_dim, source_w.dim)}")
    src_blocks = v_tilde_products(source, levels, source_w.basis)
    tgt_blocks = v_tilde_products(target, levels, theta)
    out = np.zeros((target.h_dim, source.h_dim), dtype=complex)
    for n in levels:
        b = src_blocks[n]
        if not b.size:
            continue
        out += tgt_blocks[n] @ b.conj().T
    return out


__all__ = [
    "InducedRep",
    "induced_rep",
    "creation_operators",
    "creation_block",
    "wandering_subspace",
    "wandering_blocks",
    "gws_check",
    "GwsReport",
    "classify_subspace",
    "SubspaceClass",
    "invariance_residual",
    "quotient_residual",
    "restrict",
    "multi_analytic_matrix",
    "adjoint_products",
    "ProductSystemSpec",
]
