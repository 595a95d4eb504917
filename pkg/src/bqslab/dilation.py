"""Regular dilation of a Brehmer tuple into creation operators on a truncated Fock module.

The dilation sends ``h`` to the blocks ``(I_{E(n)} (x) Delta_*) V~_n^* h``
for ``max n_j <= p``, written in an orthonormal basis of the defect space.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .beurling import BqsReport, bqs_test, op_norm
from .covariant import (
    DEFAULT_TOL,
    adjoint_products,
    alternating_gram_sum,
    compress,
    defect,
    purity_degree,
)
from .errors import BrehmerError, InputError, NotQuotientError
from .fock_model import creation_block, creation_operators, quotient_residual
from .tensor_core import (
    Subspace,
    TruncatedFockModule,
    enumerate_levels,
    left_kron_product,
    orth,
    scale_index,
    subset_index,
    subsets,
)


@dataclass(frozen=True, eq=False)
class DilationResult:
    """``pi`` maps ``H`` into ``F_p (x) D_*``; ``blocks[n]`` is ``(I (x) Delta_*) V~_n^*`` in ``H`` coordinates."""

    pi: np.ndarray
    blocks: dict
    module: TruncatedFockModule
    creation: object
    delta_star: np.ndarray
    d_star: Subspace
    isometry_residual: float
    intertwine_residuals: dict
    range: Subspace

    @property
    def max_intertwine(self):
        return max(self.intertwine_residuals.values(), default=0.0)


def build_dilation(tup, p, g=1, tol=DEFAULT_TOL):
    """Assemble the dilation for all levels ``max n_j <= p`` and measure its defects."""
    if p < 0:
        raise InputError("level cap must be non-negative")
    rep = defect(tup, tol)
    if not rep.brehmer or rep.delta_star is None:
        raise BrehmerError(
            f"alternating sum is not PSD (min eigenvalue {rep.min_eigenvalue:.6g})", -rep.min_eigenvalue
        )
    basis = rep.d_star_basis.basis
    delta_d = basis.conj().T @ rep.delta_star
    levels = enumerate_levels(p, tup.k)
    adj = adjoint_products(tup, levels)
    blocks, rows = {}, []
    for n in levels:
        dn = tup.spec.tensor_dim(n)
        blocks[n] = left_kron_product(rep.delta_star, adj[n], dn)
        rows.append(left_kron_product(delta_d, adj[n], dn))
    module = TruncatedFockModule(tup.spec, basis.shape[1], p, min(g, p))
    pi = np.vstack(rows) if rows else np.zeros((0, tup.h_dim), dtype=complex)
    iso = op_norm(pi.conj().T @ pi - np.eye(tup.h_dim))
    creation = creation_operators(module)
    inter = {}
    for i in range(tup.k):
        inter[i] = intertwining_residual(tup, pi, module, creation, i)
    rng = Subspace(orth(pi, tol.rank)) if pi.size else Subspace.zero(module.dim)
    return DilationResult(pi, blocks, module, creation, rep.delta_star, rep.d_star_basis, iso, inter, rng)


def intertwining_residual(tup, pi, module, creation, i):
    """``||(I (x) Pi) V~^(i)* - S~^(i)* Pi||`` on the rows ``E_i (x) {n : n_i <= p - 1}``.

    Rows with ``n_i = p`` are dropped because the truncated creation operator
    has no image from them.
    """
    d = tup.spec.dims[i]
    lhs = left_kron_product(pi, tup[i].conj().T, d)
    rhs = creation[i].conj().T @ pi
    keep = module.indices(lambda n: n[i] <= module.level_cap - 1)
    rows = (np.arange(d)[:, None] * module.dim + keep[None, :]).ravel()
    return op_norm(lhs[rows] - rhs[rows])


def block_recursion_residual(tup, result):
    """Worst ``||Pi^{n+e_i} - (U (x) I)(I_{E_i} (x) Pi^n) V~^(i)*||`` over stored blocks.

    ``U`` identifies ``E_i (x) E(n)`` with ``E(n + e_i)``.
    """
    worst = 0.0
    p = result.module.level_cap
    for n, block in result.blocks.items():
        for i in range(tup.k):
            if n[i] == p:
                continue
            m = n[:i] + (n[i] + 1,) + n[i + 1:]
            u = np.kron(creation_block(tup.spec, i, n), np.eye(tup.h_dim))
            pred = u @ left_kron_product(block, tup[i].conj().T, tup.spec.dims[i])
            worst = max(worst, op_norm(result.blocks[m] - pred))
    return worst


@dataclass(frozen=True)
class NormCheck:
    lhs: float
    rhs: float
    gap: float
    tail: float


def pi_norm_check(tup, h, p, tol=DEFAULT_TOL):
    """Both sides of the finite telescoping identity for ``||Pi h||^2``.

    ``lhs`` sums the block norms over ``max n_j <= p - 1`` and ``rhs`` is the
    alternating sum of ``||V~_{p e(u)}^* h||^2``; ``tail`` is ``|‖h‖^2 - rhs|``.
    """
    if p < 1:
        raise InputError("p must be at least 1")
    h = np.asarray(h, dtype=complex).reshape(-1)
    if h.shape[0] != tup.h_dim:
        raise InputError("vector has the wrong length")
    rep = defect(tup, tol)
    if not rep.brehmer:
        raise BrehmerError("alternating sum is not PSD", -rep.min_eigenvalue)
    levels = enumerate_levels(p - 1, tup.k)
    adj = adjoint_products(tup, levels, h)
    lhs = 0.0
    for n in levels:
        blk = left_kron_product(rep.delta_star, adj[n], tup.spec.tensor_dim(n))
        lhs += float(np.vdot(blk, blk).real)
    rhs = 0.0
    top = adjoint_products(tup, [scale_index(subset_index(u, tup.k), p) for u in subsets(tup.k)], h)
    for u in subsets(tup.k):
        v = top[scale_index(subset_index(u, tup.k), p)]
        rhs += (-1) ** len(u) * float(np.vdot(v, v).real)
    norm_sq = float(np.vdot(h, h).real)
    return NormCheck(lhs, rhs, abs(lhs - rhs), abs(norm_sq - rhs))


def tail_bound(tup, p):
    """``||sum_{u != 0} (-1)^{|u|} V~_{p e(u)} V~_{p e(u)}^*||``."""
    return op_norm(alternating_gram_sum(tup, power=p, skip_empty=True))


@dataclass(frozen=True, eq=False)
class CompressionTuple:
    tuple: object
    embedding: np.ndarray
    quotient_residual: float


def compression_tuple(induced, k_theta, tol=DEFAULT_TOL):
    """Compression of the creation operators to a quotient subspace, with its embedding."""
    tup = induced.tuple if hasattr(induced, "tuple") else induced
    res = quotient_residual(tup, k_theta)
    if res > tol.exact:
        raise NotQuotientError(f"subspace is not a quotient subspace (residual {res:.3e})", res)
    return CompressionTuple(compress(tup, k_theta, tol), k_theta.basis, res)


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    pure: bool
    purity_degrees: dict
    brehmer: bool
    min_eigenvalue: float
    bqs_of_range: BqsReport | None
    equivalence_residual: float | None
    dilation: DilationResult | None
    detail: str = ""

    @property
    def verdict(self):
        return bool(self.pure and self.brehmer and self.bqs_of_range is not None and self.bqs_of_range.verdict)


def beurling_equivalence_check(tup, p, g=1, p_max=256, tol=DEFAULT_TOL):
    """Purity, Brehmer positivity and the Beurling test of the dilated range.

    The range is tested inside ``F_p (x) D_*`` with guard ``g``; the quotient
    check there uses ``tau_thm`` since the range is a quotient only up to the
    tail beyond level ``p``.
    """
    pur = purity_degree(tup, p_max, tol)
    rep = defect(tup, tol)
    if not rep.brehmer:
        return EquivalenceReport(pur.pure, pur.degree, False, rep.min_eigenvalue, None, None, None, "not Brehmer")
    dil = build_dilation(tup, p, g, tol)
    interior = dil.module.interior()
    loose = dataclasses.replace(tol, exact=max(tol.exact, tol.thm))
    try:
        bqs = bqs_test(dil.creation, dil.range, interior, loose)
        detail = ""
    except NotQuotientError as exc:
        bqs = None
        detail = str(exc)
    equiv = 0.0
    for i in range(tup.k):
        d = tup.spec.dims[i]
        back = dil.pi.conj().T @ dil.creation[i]
        back = back.reshape(tup.h_dim, d, dil.module.dim) @ dil.pi
        equiv = max(equiv, op_norm(tup[i] - back.reshape(tup.h_dim, d * tup.h_dim)))
    return EquivalenceReport(pur.pure, pur.degree, True, rep.min_eigenvalue, bqs, equiv, dil, detail)


__all__ = [
    "DilationResult",
    "build_dilation",
    "intertwining_residual",
    "block_recursion_residual",
    "NormCheck",
    "pi_norm_check",
    "tail_bound",
    "CompressionTuple",
    "compression_tuple",
    "EquivalenceReport",
    "beurling_equivalence_check",
]
