"""Multi-analytic operators from symbols, inner/outer tests and factorization through invariant subspaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beurling import construct_model, dcs_test, op_norm
from .covariant import DEFAULT_TOL, CovariantTuple
from .errors import (
    HypothesisError,
    InputError,
    NotInvariantError,
    RangeInclusionError,
)
from .fock_model import (
    InducedRep,
    classify_subspace,
    gws_check,
    invariance_residual,
    multi_analytic_matrix,
    wandering_subspace,
)
from .tensor_core import Subspace, enumerate_levels, orth, right_kron_product


def _parts(x):
    """Tuple and interior subspace (``None`` for the whole space) of a tuple or induced rep."""
    if isinstance(x, InducedRep):
        return x.tuple, x.interior()
    if isinstance(x, CovariantTuple):
        return x, None
    raise InputError(f"expected a tuple or induced representation, got {type(x).__name__}")


def _basis(interior, dim):
    return interior.basis if interior is not None else np.eye(dim, dtype=complex)


@dataclass(frozen=True, eq=False)
class MultiAnalyticOperator:
    source: object
    source_w: Subspace
    target: object
    theta: np.ndarray
    m_theta: np.ndarray
    intertwine_residuals: dict
    symbol_residual: float

    @property
    def source_tuple(self):
        return _parts(self.source)[0]

    @property
    def target_tuple(self):
        return _parts(self.target)[0]

    @property
    def source_interior(self):
        return _parts(self.source)[1]

    @property
    def target_interior(self):
        return _parts(self.target)[1]


def from_symbol(source, target, theta, p=None, tol=DEFAULT_TOL):
    """``M_Theta = sum_n T~_n (I (x) Theta) V~_n^*`` on the wandering decomposition of the source.

    ``source`` and ``target`` are induced representations or plain tuples. For
    a plain source tuple ``p`` bounds the levels and the wandering subspace
    must generate the whole space.
    """
    src, src_int = _parts(source)
    tgt, _ = _parts(target)
    if src.spec is not tgt.spec and (src.spec.dims != tgt.spec.dims):
        raise InputError("source and target live over different product systems")
    if isinstance(source, InducedRep):
        w = source.vacuum()
        p = source.module.level_cap
    else:
        if p is None:
            raise InputError("level bound p is required for a plain source tuple")
        w = wandering_subspace(src, tol)
        rep = gws_check(src, w, p, tol=tol)
        if not (rep.orthogonal and rep.spanning):
            raise HypothesisError(
                f"source has no generating wandering subspace (overlap {rep.overlap:.3e},"
                f" spanning residual {rep.spanning_residual:.3e})",
                max(rep.overlap, rep.spanning_residual),
            )
    theta = np.asarray(theta, dtype=complex)
    if theta.ndim == 1:
        theta = theta[:, None]
    levels = enumerate_levels(p, src.k)
    m = multi_analytic_matrix(src, w, tgt, theta, levels)
    q_in = _basis(src_int, src.h_dim)
    inter = {}
    for i in range(src.k):
        d = src.spec.dims[i]
        lhs = m @ right_kron_product(src[i], q_in, d)
        rhs = right_kron_product(tgt[i], m @ q_in, d)
        inter[i] = op_norm(lhs - rhs)
    sym = op_norm(m @ w.basis - theta)
    return MultiAnalyticOperator(source, w, target, theta, m, inter, sym)


@dataclass(frozen=True)
class AnalyticClass:
    inner: bool
    outer: bool
    isometry_residual: float
    interior_rank: int
    interior_dim: int

    @property
    def unitary(self):
        return self.inner and self.outer


def classify(op, tol=DEFAULT_TOL):
    """Inner: isometric on the source interior. Outer: full rank on the target interior rows."""
    m = op.m_theta
    q_src = _basis(op.source_interior, m.shape[1])
    mq = m @ q_src
    iso = op_norm(mq.conj().T @ mq - np.eye(q_src.shape[1]))
    q_tgt = _basis(op.target_interior, m.shape[0])
    rows = q_tgt.conj().T @ m
    rank = orth(rows, tol.rank).shape[1] if rows.size else 0
    return AnalyticClass(iso <= tol.thm, rank == q_tgt.shape[1], iso, rank, q_tgt.shape[1])


@dataclass(frozen=True, eq=False)
class DouglasSolution:
    z: np.ndarray
    inclusion_residual: float
    residual: float
    norm: float


def douglas_solve(m_phi, m_theta, rows=None, cols=None, tol=DEFAULT_TOL):
    """``Z = M_Phi^* M_Theta`` after checking ``ran M_Theta`` lies in ``ran M_Phi``.

    ``rows`` and ``cols`` restrict the checks to interior subspaces of the
    target and of the source of ``M_Theta``.
    """
    m_phi = np.asarray(m_phi, dtype=complex)
    m_theta = np.asarray(m_theta, dtype=complex)
    if m_phi.shape[0] != m_theta.shape[0]:
        raise InputError("operators have different targets")
    q_rows = _basis(rows, m_theta.shape[0])
    q_cols = _basis(cols, m_theta.shape[1])
    rng = orth(m_phi, tol.rank)
    mt = m_theta @ q_cols
    outside = q_rows.conj().T @ (mt - rng @ (rng.conj().T @ mt))
    incl = op_norm(outside)
    if incl > tol.thm:
        raise RangeInclusionError(f"range inclusion fails (violation {incl:.6g})", incl)
    z = m_phi.conj().T @ m_theta
    res = op_norm(q_rows.conj().T @ (m_phi @ z - m_theta) @ q_cols)
    return DouglasSolution(z, incl, res, op_norm(z @ q_cols))


# ---------------------------------------------------------------------------
# invariant subspaces of the model space and factorizations


def model_space(op, tol=DEFAULT_TOL):
    """``K_Theta``: the complement of the range of ``M_Theta`` and that range."""
    rng = Subspace(orth(op.m_theta, tol.rank))
    return rng.complement(tol.rank), rng


def compressed_invariance_residual(tgt, k_theta, s_sub):
    """``max_i ||P_{K_Theta - S} T~^(i) (I (x) P_S)||`` for ``S`` inside ``K_Theta``."""
    if s_sub.dim == 0:
        return 0.0
    rest = k_theta.basis - s_sub.basis @ (s_sub.basis.conj().T @ k_theta.basis)
    worst = 0.0
    for i in range(tgt.k):
        img = right_kron_product(tgt[i], s_sub.basis, tgt.spec.dims[i])
        worst = max(worst, op_norm(rest.conj().T @ img))
    return worst


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    phi: MultiAnalyticOperator
    psi: MultiAnalyticOperator
    middle: InducedRep
    z: np.ndarray
    residual: float
    s_prime: Subspace
    invariance_residual: float
    dcs_residual: float

    @property
    def middle_tuple(self):
        return self.middle.tuple


def factor_from_invariant(op, s_sub, tol=DEFAULT_TOL):
    """Factor ``Theta = Phi Psi`` through ``S (+) ran M_Theta``.

    ``op`` must have an induced representation as its target.
    """
    if not isinstance(op.target, InducedRep):
        raise InputError("factorization needs an induced target")
    tgt = op.target.tuple
    module = op.target.module
    interior = op.target.interior()
    k_theta, rng = model_space(op, tol)
    outside = k_theta.complement(tol.rank).basis.conj().T @ s_sub.basis if s_sub.dim else np.zeros((0, 0))
    if op_norm(outside) > tol.thm:
        raise NotInvariantError("subspace is not contained in the model space", op_norm(outside))
    inv = compressed_invariance_residual(tgt, k_theta, s_sub)
    if inv > tol.thm:
        raise NotInvariantError(f"subspace is not invariant for the compressed tuple (residual {inv:.3e})", inv)
    s_prime = s_sub.sum(rng, tol.rank)
    dcs_res = 0.0
    if tgt.k >= 2:
        dcs_res = dcs_test(tgt, s_prime, interior, tol).max_residual
        if dcs_res > tol.thm:
            raise HypothesisError(f"S (+) ran M_Theta is not doubly commuting (residual {dcs_res:.3e})", dcs_res)
    model = construct_model(tgt, s_prime, module.level_cap, module.guard, interior, check_dcs=False, tol=tol)
    middle = model.source
    phi = from_symbol(middle, op.target, model.theta, tol=tol)
    sol = douglas_solve(phi.m_theta, op.m_theta, rows=interior, cols=op.source_interior, tol=tol)
    psi_symbol = sol.z @ op.source_w.basis
    psi = from_symbol(op.source, middle, psi_symbol, tol=tol)
    q_cols = _basis(op.source_interior, op.m_theta.shape[1])
    res = op_norm((op.m_theta - phi.m_theta @ psi.m_theta) @ q_cols)
    return FactorizationResult(phi, psi, middle, sol.z, res, s_prime, inv, dcs_res)


@dataclass(frozen=True, eq=False)
class RecoveredSubspace:
    subspace: Subspace
    factor_residual: float
    invariance_residual: float
    dcs_residual: float


def invariant_from_factor(theta_op, phi_op, psi_op, tol=DEFAULT_TOL):
    """``S = ran M_Phi (-) ran M_Theta`` with its invariance and doubly commuting checks."""
    q_cols = _basis(theta_op.source_interior, theta_op.m_theta.shape[1])
    res = op_norm((theta_op.m_theta - phi_op.m_theta @ psi_op.m_theta) @ q_cols)
    if res > tol.thm:
        raise HypothesisError(f"factorization residual {res:.3e} too large", res)
    rng_theta = orth(theta_op.m_theta, tol.rank)
    rng_phi = orth(phi_op.m_theta, tol.rank)
    diff = rng_phi - rng_theta @ (rng_theta.conj().T @ rng_phi)
    s_sub = Subspace(orth(diff, tol.rank, scale=1.0))
    tgt = theta_op.target_tuple
    k_theta, rng = model_space(theta_op, tol)
    inv = compressed_invariance_residual(tgt, k_theta, s_sub)
    dcs_res = 0.0
    if tgt.k >= 2:
        dcs_res = dcs_test(tgt, s_sub.sum(rng, tol.rank), theta_op.target_interior, tol).max_residual
    return RecoveredSubspace(s_sub, res, inv, dcs_res)


@dataclass(frozen=True)
class NonunitaryReport:
    nontrivial_is: bool
    s_is_beurling: bool
    k_minus_s_reduces: bool
    detail: dict

    @property
    def verdict(self):
        return self.nontrivial_is and not self.s_is_beurling and not self.k_minus_s_reduces


def nonunitary_classify(theta_op, s_sub, tol=DEFAULT_TOL):
    """The three conditions predicting that both factors through ``S`` are non-unitary."""
    tgt = theta_op.target_tuple
    interior = theta_op.target_interior
    k_theta, _ = model_space(theta_op, tol)
    nontrivial = 0 < s_sub.dim < k_theta.dim
    detail = {"dim_s": s_sub.dim, "dim_k_theta": k_theta.dim}
    beurling = False
    if s_sub.dim:
        inv = invariance_residual(tgt, s_sub)
        detail["invariance_residual"] = inv
        if inv <= tol.thm:
            dcs = dcs_test(tgt, s_sub, interior, tol).max_residual if tgt.k >= 2 else 0.0
            detail["dcs_residual"] = dcs
            if dcs <= tol.thm:
                module = theta_op.target.module
                model = construct_model(
                    tgt, s_sub, module.level_cap, module.guard, interior, check_dcs=False, tol=tol
                )
                detail["model_isometry_residual"] = model.isometry_residual
                beurling = model.isometry_residual <= tol.thm
    else:
        beurling = True
    rest = Subspace(
        orth(k_theta.basis - s_sub.basis @ (s_sub.basis.conj().T @ k_theta.basis), tol.rank, scale=1.0)
    ) if k_theta.dim else k_theta
    loose = type(tol)(exact=tol.thm, thm=tol.thm, rank=tol.rank, psd=tol.psd, pure=tol.pure)
    cls = classify_subspace(tgt, rest, tol=loose)
    detail["reducing_residual"] = max(cls.invariant_residual, cls.coinvariant_residual)
    return NonunitaryReport(nontrivial, beurling, cls.reducing, detail)


__all__ = [
    "MultiAnalyticOperator",
    "from_symbol",
    "AnalyticClass",
    "classify",
    "DouglasSolution",
    "douglas_solve",
    "model_space",
    "compressed_invariance_residual",
    "FactorizationResult",
    "factor_from_invariant",
    "RecoveredSubspace",
    "invariant_from_factor",
    "NonunitaryReport",
    "nonunitary_classify",
]
