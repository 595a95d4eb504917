"""Cross-defects, the Beurling quotient subspace test and the Beurling model of a DC subspace.

All quantities are computed in the orthonormal basis ``Q`` of the quotient
subspace ``K``. Interior compression replaces a ``K`` coordinate slot by
``A = Q_int^* Q``, which keeps only the ambient interior part of a vector.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .covariant import (
    CovariantTuple,
    DEFAULT_TOL,
    adjoint_products,
    compress,
    is_doubly_commuting,
    v_tilde_of,
)
from .errors import HypothesisError, InputError, NotDoublyCommutingError, NotQuotientError
from .fock_model import (
    induced_rep,
    invariance_residual,
    multi_analytic_matrix,
    quotient_residual,
    restrict,
    wandering_subspace,
)
from .tensor_core import (
    Subspace,
    ampliate,
    enumerate_levels,
    extended_flip,
    op_norm,
    left_kron_product,
    right_kron_product,
    unit_index,
)


def flip_sandwich(left, flip, right, d_i, d_j, r):
    """``(I_{E_j} (x) L)(t_{i,j} (x) I_r)(I_{E_i} (x) R)``.

    ``L`` acts on ``E_i (x) C^r`` and ``R`` maps into ``E_j (x) C^r``.
    """
    a, b = left.shape[0], right.shape[1]
    if left.shape[1] != d_i * r or right.shape[0] != d_j * r:
        raise InputError("factor shapes do not match the flip")
    out = np.zeros((d_j * a, d_i * b), dtype=complex)
    r_blocks = right.reshape(d_j, r * b)
    for beta in range(d_j):
        for alpha in range(d_i):
            c = flip[beta * d_i:(beta + 1) * d_i, alpha * d_j:(alpha + 1) * d_j]
            if not np.any(c):
                continue
            mid = (c @ r_blocks).reshape(d_i * r, b)
            out[beta * a:(beta + 1) * a, alpha * b:(alpha + 1) * b] = left @ mid
    return out


@dataclass(frozen=True, eq=False)
class QuotientFrame:
    """A quotient subspace with its compressed tuple and interior map."""

    tup: object
    k_sub: Subspace
    compressed: object
    interior_map: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "_cache", {})

    @property
    def q(self):
        return self.k_sub.basis

    @property
    def r(self):
        return self.k_sub.dim

    def perp(self, m):
        """``P_{K^perp} M``."""
        return m - self.q @ (self.q.conj().T @ m)

    def image(self, i):
        """``V~^(i) (I (x) Q)``, cached."""
        key = ("image", i)
        if key not in self._cache:
            self._cache[key] = right_kron_product(self.tup.op(i), self.q, self.tup.spec.dims[i])
        return self._cache[key]

    def perp_image(self, i):
        """``P_{K^perp} V~^(i) (I (x) Q)``, cached."""
        key = ("perp", i)
        if key not in self._cache:
            self._cache[key] = self.perp(self.image(i))
        return self._cache[key]

    def defect_sq(self, i):
        """``(I (x) P_K) - T~^(i)* T~^(i)`` in ``K`` coordinates."""
        t = self.compressed[i]
        return np.eye(t.shape[1], dtype=complex) - t.conj().T @ t

    def cross(self, m, i):
        """``(I (x) Q^*) V~_m^* P_{K^perp} V~^(i) (I (x) Q)``, a map ``E_i (x) K -> E(m) (x) K``."""
        y = adjoint_products(self.tup, [tuple(m)], self.perp_image(i))[tuple(m)]
        return left_kron_product(self.q.conj().T, y, self.tup.spec.tensor_dim(m))

    def out(self, m, left_dim):
        """Interior compression of an output ``C^left_dim (x) K`` slot."""
        return left_kron_product(self.interior_map, m, left_dim)

    def inp(self, m, right_dim):
        """Interior compression of an input ``C^right_dim (x) K`` slot."""
        return right_kron_product(m, self.interior_map.conj().T, right_dim)


def quotient_frame(tup, k_sub, interior=None, tol=DEFAULT_TOL):
    """Check that ``K`` is a quotient subspace and set up its coordinates."""
    if k_sub.ambient_dim != tup.h_dim:
        raise InputError("subspace lives in a different space")
    res = quotient_residual(tup, k_sub)
    if res > tol.exact:
        raise NotQuotientError(f"subspace is not a quotient subspace (residual {res:.3e})", res)
    if interior is None:
        a = np.eye(k_sub.dim, dtype=complex)
    else:
        a = interior.basis.conj().T @ k_sub.basis
    fr = QuotientFrame(tup, k_sub, None, a, res)
    q = k_sub.basis
    mats = tuple(q.conj().T @ fr.image(i) for i in range(tup.k))
    object.__setattr__(fr, "compressed", CovariantTuple(tup.spec, k_sub.dim, mats))
    return fr


def cross_defect(tup, k_sub, i, j, tol=DEFAULT_TOL):
    """``X_{i,j}`` as a map ``E_i (x) H -> E_j (x) H`` in ambient coordinates."""
    if i == j:
        raise InputError("cross defect needs distinct coordinates")
    fr = quotient_frame(tup, k_sub, None, tol)
    return _cross_matrix(fr, i, j, interior=None)


def _cross_matrix(fr, i, j, interior):
    tup, q = fr.tup, fr.q
    d = tup.spec.dims
    left = fr.perp_image(i)
    # (I (x) Q^*) V~^(j)* P_perp, formed as the adjoint of P_perp V~^(j) (I (x) Q)
    right = fr.perp_image(j).conj().T
    if interior is not None:
        qi = interior.basis
        left = qi.conj().T @ left
        right = right @ qi
    return flip_sandwich(left, tup.spec.flip(i, j), right, d[i], d[j], fr.r)


def _main_matrix(fr, i, j, roots=False, tol=DEFAULT_TOL):
    d = fr.tup.spec.dims
    di = fr.defect_sq(i)
    dj = fr.defect_sq(j)
    if roots:
        di = psd_root(di, tol)
        dj = psd_root(dj, tol)
    left = fr.out(di, d[i])
    right = fr.inp(dj, d[j])
    return flip_sandwich(left, fr.tup.spec.flip(i, j), right, d[i], d[j], fr.r)


def psd_root(a, tol=DEFAULT_TOL):
    """PSD square root, zeroing eigenvalues at most ``tau_psd``."""
    a = (a + a.conj().T) / 2
    if a.size == 0:
        return a
    lam, u = np.linalg.eigh(a)
    lam = np.where(lam <= tol.psd, 0.0, lam)
    return (u * np.sqrt(lam)) @ u.conj().T


@dataclass(frozen=True)
class BqsReport:
    main: dict
    cross: dict
    tol: float
    quotient_residual: float

    @property
    def max_main(self):
        return max(self.main.values(), default=0.0)

    @property
    def max_cross(self):
        return max(self.cross.values(), default=0.0)

    @property
    def verdict_main(self):
        return self.max_main <= self.tol

    @property
    def verdict_cross(self):
        return self.max_cross <= self.tol

    @property
    def verdict(self):
        return self.verdict_main and self.verdict_cross

    @property
    def residual(self):
        return max(self.max_main, self.max_cross)


def bqs_test(tup, k_sub, interior=None, tol=DEFAULT_TOL):
    """Commutator condition on the defects and norms of all ``X_{i,j}``, interior-compressed."""
    fr = quotient_frame(tup, k_sub, interior, tol)
    main, cross = {}, {}
    # the (j, i) matrices are adjoints of the (i, j) ones, so their norms agree
    for i, j in itertools.combinations(range(tup.k), 2):
        if fr.r:
            main[(i, j)] = op_norm(_main_matrix(fr, i, j))
            cross[(i, j)] = op_norm(_cross_matrix(fr, i, j, interior))
        else:
            main[(i, j)] = cross[(i, j)] = 0.0
        main[(j, i)] = main[(i, j)]
        cross[(j, i)] = cross[(i, j)]
    return BqsReport(main, cross, tol.thm, fr.residual)


# ---------------------------------------------------------------------------
# commutator identities


def _check_hat(tup, i, m_hat):
    m_hat = tuple(int(a) for a in m_hat)
    if len(m_hat) != tup.k or any(a < 0 for a in m_hat):
        raise InputError(f"bad multi-index {m_hat}")
    if m_hat[i] != 0:
        raise InputError(f"multi-index {m_hat} must vanish in slot {i}")
    return m_hat


def commutator_sides(fr, i, m_hat):
    """Both sides of ``[T~^(i), T~_m^*] = (I (x) P_K) V~_m^* P_{K^perp} V~^(i) (I (x) P_K)`` in ``K`` coordinates."""
    tup = fr.tup
    m_hat = _check_hat(tup, i, m_hat)
    d = tup.spec.dims[i]
    dm = tup.spec.tensor_dim(m_hat)
    t_i = fr.compressed[i]
    t_m = v_tilde_of(fr.compressed, m_hat)
    flip = np.kron(extended_flip(tup.spec, i, m_hat), np.eye(fr.r))
    lhs = left_kron_product(t_i, flip @ ampliate(t_m.conj().T, d), dm)
    lhs = lhs - t_m.conj().T @ t_i
    rhs = fr.cross(m_hat, i)
    return lhs, rhs


def commutator_identity_residual(tup, k_sub, i, m_hat, tol=DEFAULT_TOL):
    """``||[T~^(i), T~_m^*] - (I (x) P_K) V~_m^* P_{K^perp} V~^(i) (I (x) P_K)||`` for ``m_i = 0``."""
    fr = quotient_frame(tup, k_sub, None, tol)
    lhs, rhs = commutator_sides(fr, i, m_hat)
    return op_norm(lhs - rhs)


@dataclass(frozen=True, eq=False)
class DouglasResult:
    x: np.ndarray
    residual: float
    norm: float


def solve_against_root(c, d_sq, tol=DEFAULT_TOL):
    """Minimal-norm ``X`` with ``X sqrt(D) = C``, zero on the kernel of ``D``."""
    d_sq = (d_sq + d_sq.conj().T) / 2
    lam, u = np.linalg.eigh(d_sq)
    keep = lam > tol.psd
    root = (u * np.sqrt(np.where(keep, lam, 0.0))) @ u.conj().T
    inv = np.zeros_like(lam)
    inv[keep] = 1.0 / np.sqrt(lam[keep])
    x = c @ ((u * inv) @ u.conj().T)
    return x, op_norm(x @ root - c)


def douglas_contraction(tup, k_sub, i, m_hat, tol=DEFAULT_TOL):
    """Contraction ``X`` with ``[T~^(i), T~_m^*] = X Delta(T^(i))``."""
    fr = quotient_frame(tup, k_sub, None, tol)
    lhs, _ = commutator_sides(fr, i, m_hat)
    x, res = solve_against_root(lhs, fr.defect_sq(i), tol)
    if res > tol.thm:
        raise HypothesisError(f"commutator is not dominated by the defect (residual {res:.3e})", res)
    return DouglasResult(x, res, op_norm(x))


@dataclass(frozen=True)
class ProductsReport:
    hypothesis: float
    holds: bool
    products: dict


def vanishing_products(tup, k_sub, i, j, m_hat, n_hat, interior=None, tol=DEFAULT_TOL):
    """Hypothesis residual and the three products that vanish when it holds.

    ``m_hat`` vanishes in slot ``i`` and ``n_hat`` in slot ``j``. Products are
    only evaluated (key present) when the hypothesis holds to ``tau_thm``.
    """
    if i == j:
        raise InputError("need distinct coordinates")
    fr = quotient_frame(tup, k_sub, interior, tol)
    m_hat = _check_hat(tup, i, m_hat)
    n_hat = _check_hat(tup, j, n_hat)
    if fr.r == 0:
        return ProductsReport(0.0, True, {1: 0.0, 2: 0.0, 3: 0.0})
    hyp = op_norm(_main_matrix(fr, i, j, roots=True, tol=tol))
    holds = hyp <= tol.thm
    prods = {}
    if holds:
        spec = tup.spec
        d = spec.dims
        e_i, e_j = unit_index(i, tup.k), unit_index(j, tup.k)
        flip = spec.flip(i, j)
        dm, dn = spec.tensor_dim(m_hat), spec.tensor_dim(n_hat)
        left_m = fr.out(fr.cross(m_hat, i), dm)
        left_i = fr.out(fr.cross(e_i, i), d[i])
        right_n = fr.inp(fr.cross(n_hat, j).conj().T, dn)
        right_j = fr.inp(fr.cross(e_j, j).conj().T, d[j])
        prods[1] = op_norm(flip_sandwich(left_m, flip, right_n, d[i], d[j], fr.r))
        prods[2] = op_norm(flip_sandwich(left_i, flip, right_n, d[i], d[j], fr.r))
        prods[3] = op_norm(flip_sandwich(left_m, flip, right_j, d[i], d[j], fr.r))
    return ProductsReport(hyp, holds, prods)


# ---------------------------------------------------------------------------
# doubly commuting invariant subspaces and their model


@dataclass(frozen=True)
class DcsReport:
    residuals: dict
    invariance_residual: float
    tol: float

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)

    @property
    def ok(self):
        return self.max_residual <= self.tol


def dcs_test(tup, s_sub, interior=None, tol=DEFAULT_TOL):
    """Doubly commuting residuals of the restriction to ``S``, on the interior part of ``S``."""
    inv = invariance_residual(tup, s_sub)
    rest = restrict(tup, s_sub, tol)
    domain = None
    if interior is not None:
        domain = s_sub.coordinates_of(s_sub.intersect(interior))
    rep = is_doubly_commuting(rest, domain, tol, ord=2)
    return DcsReport(rep.residuals, inv, tol.thm)


@dataclass(frozen=True, eq=False)
class BeurlingModel:
    w_s: Subspace
    theta: np.ndarray
    source: object
    m_theta: np.ndarray
    isometry_residual: float
    projection_residual: float
    tol: float

    @property
    def ok(self):
        return max(self.isometry_residual, self.projection_residual) <= self.tol


def construct_model(tup, s_sub, p, g=1, interior=None, check_dcs=True, tol=DEFAULT_TOL):
    """``M_Theta`` from the abstract Fock module over the wandering subspace of ``S`` onto ``S``.

    ``p`` and ``g`` set the truncation of the source module. Verification is
    ``||M^* M - I||`` on the source interior and ``||P_S - M M^*||`` on
    ``interior`` (the whole space when omitted).
    """
    if check_dcs and tup.k >= 2:
        rep = dcs_test(tup, s_sub, interior, tol)
        if not rep.ok:
            raise NotDoublyCommutingError(
                f"subspace is not doubly commuting (residual {rep.max_residual:.3e})", rep.max_residual
            )
    rest = restrict(tup, s_sub, tol)
    w_s = s_sub.lift(wandering_subspace(rest, tol))
    theta = w_s.basis
    source = induced_rep(tup.spec, w_s.dim, p, g)
    levels = enumerate_levels(p, tup.k)
    m = multi_analytic_matrix(source.tuple, source.vacuum(), tup, theta, levels)
    q_src = source.interior().basis
    mq = m @ q_src
    iso = op_norm(mq.conj().T @ mq - np.eye(q_src.shape[1]))
    qi = interior.basis if interior is not None else np.eye(tup.h_dim)
    ps = s_sub.basis.conj().T @ qi
    mi = m.conj().T @ qi
    proj = op_norm(ps.conj().T @ ps - mi.conj().T @ mi)
    return BeurlingModel(w_s, theta, source, m, iso, proj, tol.thm)


__all__ = [
    "op_norm",
    "flip_sandwich",
    "QuotientFrame",
    "quotient_frame",
    "cross_defect",
    "BqsReport",
    "bqs_test",
    "commutator_sides",
    "commutator_identity_residual",
    "DouglasResult",
    "douglas_contraction",
    "solve_against_root",
    "ProductsReport",
    "vanishing_products",
    "DcsReport",
    "dcs_test",
    "BeurlingModel",
    "construct_model",
    "psd_root",
]
