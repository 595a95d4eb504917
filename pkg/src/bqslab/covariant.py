"""Covariant tuples ``V~^(i): E_i (x) H -> H`` and their standard checks.

Every tuple is a list of dense complex matrices of shape ``h x (d_i h)``.
Identities on ``E_i (x) H`` can be compressed to a subspace ``D`` of ``H``
(the ``domain`` argument), meaning ``(I (x) Q_D)^* M (I (x) Q_D)``; the
truncated models use this to look at interior vectors only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import InputError, NumericalError
from .tensor_core import (
    TOL_EXACT,
    ProductSystemSpec,
    Subspace,
    add_index,
    left_kron_product,
    orth,
    right_kron_product,
    scale_index,
    subset_index,
    subsets,
    unit_index,
    zero_index,
)


@dataclass(frozen=True)
class Tolerances:
    exact: float = 1e-9
    thm: float = 1e-7
    rank: float = 1e-8
    psd: float = 1e-10
    pure: float = 1e-8


DEFAULT_TOL = Tolerances()

# large induced tuples are permutation-like; sparse storage speeds their products
SPARSE_MIN_DIM = 128
SPARSE_DENSITY = 0.02


@dataclass(frozen=True, eq=False)
class CovariantTuple:
    spec: ProductSystemSpec
    h_dim: int
    v_tilde: tuple

    def __post_init__(self):
        if len(self.v_tilde) != self.spec.k:
            raise InputError(f"expected {self.spec.k} operators, got {len(self.v_tilde)}")
        mats = []
        for i, v in enumerate(self.v_tilde):
            v = np.array(v, dtype=complex)
            if v.ndim == 1 and self.h_dim == 0:
                v = v.reshape(0, 0)
            want = (self.h_dim, self.spec.dims[i] * self.h_dim)
            if v.shape != want:
                raise InputError(f"operator {i} has shape {v.shape}, expected {want}")
            v.setflags(write=False)
            mats.append(v)
        object.__setattr__(self, "v_tilde", tuple(mats))
        object.__setattr__(self, "_cache", {})

    @property
    def k(self):
        return self.spec.k

    def __getitem__(self, i):
        return self.v_tilde[i]

    def _use_sparse(self, i):
        key = ("sparse?", i)
        if key not in self._cache:
            v = self.v_tilde[i]
            self._cache[key] = self.h_dim >= SPARSE_MIN_DIM and np.count_nonzero(v) <= SPARSE_DENSITY * v.size
        return self._cache[key]

    def op(self, i):
        """``V~^(i)`` as a CSC matrix when it is large and sparse, else dense."""
        if not self._use_sparse(i):
            return self.v_tilde[i]
        key = ("op", i)
        if key not in self._cache:
            self._cache[key] = scipy.sparse.csc_matrix(self.v_tilde[i])
        return self._cache[key]

    def op_adj(self, i):
        """``V~^(i)*``, sparse under the same rule as :meth:`op`."""
        key = ("adj", i)
        if key not in self._cache:
            v = self.v_tilde[i].conj().T
            self._cache[key] = scipy.sparse.csr_matrix(v) if self._use_sparse(i) else v
        return self._cache[key]

    @classmethod
    def from_scalar_matrices(cls, mats, spec=None):
        """Tuple with all ``d_i = 1`` from ordinary square matrices."""
        mats = [np.asarray(m, dtype=complex) for m in mats]
        spec = spec or ProductSystemSpec((1,) * len(mats))
        return cls(spec, mats[0].shape[0], tuple(mats))


@dataclass(frozen=True)
class ResidualReport:
    """Per-key residuals, the tolerance used and the resulting verdict."""

    residuals: dict
    tol: float
    ok: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ok", all(r <= self.tol for r in self.residuals.values()))

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)


def _norm(m, ord):
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, ord))


def _compress(m, domain, d_out, d_in):
    """``(I_{d_out} (x) Q)^* M (I_{d_in} (x) Q)`` for an operator ``E_in (x) H -> E_out (x) H``."""
    if domain is None:
        return m
    q = domain.basis
    m = right_kron_product(m, q, d_in)
    return left_kron_product(q.conj().T, m, d_out)


def _check_domain(tup, domain):
    if domain is not None and domain.ambient_dim != tup.h_dim:
        raise InputError("domain lives in a different space")


def commutation_lhs_rhs(tup, i, j):
    """Both sides of the commutation relation as maps ``E_i (x) E_j (x) H -> H``."""
    d = tup.spec.dims
    lhs = right_kron_product(tup[i], tup[j], d[i])
    rhs = right_kron_product(tup[j], tup[i], d[j])
    flip = np.kron(tup.spec.flip(i, j), np.eye(tup.h_dim))
    return lhs, rhs @ flip


def validate(tup, tol=DEFAULT_TOL):
    """Frobenius residual of the commutation relation for every ordered pair ``i != j``."""
    res = {}
    for i, j in itertools.permutations(range(tup.k), 2):
        lhs, rhs = commutation_lhs_rhs(tup, i, j)
        res[(i, j)] = _norm(lhs - rhs, "fro")
    return ResidualReport(res, tol.exact)


def is_isometric(tup, domain=None, tol=DEFAULT_TOL):
    """Operator-norm residual ``||V~^(i)* V~^(i) - I||`` for each ``i``."""
    _check_domain(tup, domain)
    res = {}
    for i in range(tup.k):
        d = tup.spec.dims[i]
        g = tup[i].conj().T @ tup[i] - np.eye(d * tup.h_dim)
        res[i] = _norm(_compress(g, domain, d, d), 2)
    return ResidualReport(res, tol.exact)


def doubly_commuting_difference(tup, i, j):
    """``V~^(j)* V~^(i) - (I (x) V~^(i))(t_{i,j} (x) I)(I (x) V~^(j)*)``, a map ``E_i (x) H -> E_j (x) H``."""
    d = tup.spec.dims
    h = tup.h_dim
    lhs = tup[j].conj().T @ tup[i]
    inner = left_kron_product(tup[j].conj().T, np.eye(d[i] * h, dtype=complex), d[i])
    inner = np.kron(tup.spec.flip(i, j), np.eye(h)) @ inner
    rhs = left_kron_product(tup[i], inner, d[j])
    return lhs - rhs


def is_doubly_commuting(tup, domain=None, tol=DEFAULT_TOL, ord="fro"):
    """Residual of the doubly commuting identity for each unordered pair ``i < j``."""
    _check_domain(tup, domain)
    res = {}
    for i, j in itertools.combinations(range(tup.k), 2):
        diff = doubly_commuting_difference(tup, i, j)
        res[(i, j)] = _norm(_compress(diff, domain, tup.spec.dims[j], tup.spec.dims[i]), ord)
    return ResidualReport(res, tol.exact)


# ---------------------------------------------------------------------------
# ordered products


def _first_nonzero(n):
    for i, a in enumerate(n):
        if a:
            return i
    return None


def _last_nonzero(n):
    for i in range(len(n) - 1, -1, -1):
        if n[i]:
            return i
    return None


def _closure(levels):
    """All multi-indices below some member of ``levels`` (needed by the recursions)."""
    out = set()
    stack = [tuple(n) for n in levels]
    while stack:
        n = stack.pop()
        if n in out:
            continue
        out.add(n)
        for i, a in enumerate(n):
            if a:
                stack.append(n[:i] + (a - 1,) + n[i + 1:])
    return sorted(out)


def v_tilde_products(tup, levels, right=None):
    """``V~_n (I_{E(n)} (x) R)`` for every ``n`` in ``levels``.

    Uses ``V~_n = V~^(i) (I_{E_i} (x) V~_{n - e_i})`` with ``i`` the first
    non-zero coordinate of ``n``. ``R`` defaults to the identity on ``H``.
    """
    if right is None:
        right = np.eye(tup.h_dim, dtype=complex)
    right = np.asarray(right, dtype=complex)
    want = set(tuple(n) for n in levels)
    out = {}
    for n in _closure(levels):
        i = _first_nonzero(n)
        if i is None:
            out[n] = right
            continue
        prev = n[:i] + (n[i] - 1,) + n[i + 1:]
        out[n] = right_kron_product(tup.op(i), out[prev], tup.spec.dims[i])
    return {n: out[n] for n in want}


def adjoint_products(tup, levels, y=None):
    """``V~_n^* Y`` for every ``n`` in ``levels``, each of shape ``(dim E(n) * h, cols)``.

    Uses ``V~_n = V~_{n - e_l} (I (x) V~^(l))`` with ``l`` the last non-zero
    coordinate, so the adjoint acts on the trailing ``H`` slot.
    """
    if y is None:
        y = np.eye(tup.h_dim, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if y.ndim == 1:
        y = y[:, None]
    want = set(tuple(n) for n in levels)
    out = {}
    for n in _closure(levels):
        l = _last_nonzero(n)
        if l is None:
            out[n] = y
            continue
        prev = n[:l] + (n[l] - 1,) + n[l + 1:]
        d_prev = tup.spec.tensor_dim(prev)
        out[n] = left_kron_product(tup.op_adj(l), out[prev], d_prev)
    return {n: out[n] for n in want}


def v_tilde_of(tup, m):
    """The ordered product ``V~_m: E(m) (x) H -> H``; ``V~_0`` is the identity."""
    m = tuple(m)
    if len(m) != tup.k or any(a < 0 for a in m):
        raise InputError(f"bad multi-index {m}")
    return v_tilde_products(tup, [m])[m]


def gram(tup, m):
    """``V~_m V~_m^*`` computed by the recursion ``G -> V~^(i) (I (x) G) V~^(i)*``."""
    g = np.eye(tup.h_dim, dtype=complex)
    for i in range(tup.k - 1, -1, -1):
        for _ in range(m[i]):
            g = right_kron_product(tup[i], g, tup.spec.dims[i]) @ tup[i].conj().T
    return g


@dataclass(frozen=True)
class PurityReport:
    norms: dict
    degree: dict
    p_max: int

    @property
    def pure(self):
        return all(v is not None for v in self.degree.values())


def purity_degree(tup, p_max, tol=DEFAULT_TOL):
    """Smallest ``p <= p_max`` with ``||V~^(j)_p|| <= tau_pure`` for each ``j`` (None if never)."""
    norms = {}
    deg = {}
    for j in range(tup.k):
        # carry an h x h factor L with L L^* = V~_p V~_p^*; taking norms of L
        # directly avoids the sqrt(eps) noise floor of Gram eigenvalues
        factor = np.eye(tup.h_dim, dtype=complex)
        seq = []
        deg[j] = None
        for p in range(1, p_max + 1):
            f = right_kron_product(tup[j], factor, tup.spec.dims[j])
            val = float(np.linalg.norm(f, 2)) if tup.h_dim else 0.0
            if tup.h_dim:
                factor = scipy.linalg.qr(f.conj().T, mode="r")[0][: tup.h_dim].conj().T
            seq.append(val)
            if val <= tol.pure:
                deg[j] = p
                break
        norms[j] = seq
    return PurityReport(norms, deg, p_max)


# ---------------------------------------------------------------------------
# defect


@dataclass(frozen=True, eq=False)
class DefectReport:
    delta_star_sq: np.ndarray
    delta_star: np.ndarray | None
    min_eigenvalue: float
    d_star_basis: Subspace
    brehmer: bool


def alternating_gram_sum(tup, power=1, skip_empty=False):
    """``sum_u (-1)^{|u|} V~_{p e(u)} V~_{p e(u)}^*`` over subsets ``u`` of the coordinates."""
    acc = np.zeros((tup.h_dim, tup.h_dim), dtype=complex)
    for u in subsets(tup.k):
        if skip_empty and not u:
            continue
        acc += (-1) ** len(u) * gram(tup, scale_index(subset_index(u, tup.k), power))
    return acc


def defect(tup, tol=DEFAULT_TOL):
    """Alternating sum, its clamped PSD square root and the defect space."""
    sq = alternating_gram_sum(tup)
    scale = max(1.0, float(np.linalg.norm(sq)))
    herm = float(np.linalg.norm(sq - sq.conj().T))
    if herm > tol.exact * scale:
        raise NumericalError(f"defect assembly is not Hermitian (residual {herm:.3e})", herm)
    sq = (sq + sq.conj().T) / 2
    if tup.h_dim == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return DefectReport(sq, empty, 0.0, Subspace.zero(0), True)
    lam, u = np.linalg.eigh(sq)
    lam_min = float(lam[0])
    ok = lam_min >= -tol.psd
    d_basis = Subspace(orth(u[:, lam > tol.psd]) if np.any(lam > tol.psd) else np.zeros((tup.h_dim, 0)))
    root = None
    if ok:
        # eigenvalues within tau_psd of zero are roundoff; zeroing them keeps
        # the root consistent with the defect space (eigenvalues > tau_psd)
        clamped = np.where(lam <= tol.psd, 0.0, lam)
        root = (u * np.sqrt(clamped)) @ u.conj().T
    return DefectReport(sq, root, lam_min, d_basis, ok)


def brehmer_check(tup, tol=DEFAULT_TOL):
    """True iff the alternating sum is PSD up to ``tau_psd``; also the minimal eigenvalue."""
    rep = defect(tup, tol)
    return rep.brehmer, rep.min_eigenvalue


# ---------------------------------------------------------------------------
# compression


def compress(tup, k_sub, tol=DEFAULT_TOL):
    """``P_K V~^(i) (I (x) P_K)`` written in the orthonormal basis of ``K``."""
    if k_sub.ambient_dim != tup.h_dim:
        raise InputError("subspace lives in a different space")
    q = k_sub.basis
    gram_res = np.linalg.norm(q.conj().T @ q - np.eye(q.shape[1])) if q.shape[1] else 0.0
    if gram_res > tol.exact * max(1.0, np.sqrt(q.shape[1])):
        raise InputError("subspace basis is not orthonormal")
    mats = []
    for i in range(tup.k):
        mats.append(q.conj().T @ right_kron_product(tup.op(i), q, tup.spec.dims[i]))
    return CovariantTuple(tup.spec, q.shape[1], tuple(mats))


def embedding(k_sub):
    """The inclusion ``K -> H`` as a matrix."""
    return k_sub.basis


def defect_square(tup, i):
    """``I - V~^(i)* V~^(i)`` on ``E_i (x) H``."""
    d = tup.spec.dims[i]
    return np.eye(d * tup.h_dim, dtype=complex) - tup[i].conj().T @ tup[i]


def psd_sqrt(a, tol=DEFAULT_TOL):
    a = (a + a.conj().T) / 2
    if a.size == 0:
        return a
    lam, u = np.linalg.eigh(a)
    if lam[0] < -max(tol.psd, tol.exact * max(1.0, abs(lam[-1]))):
        raise NumericalError(f"matrix is not PSD (min eigenvalue {lam[0]:.3e})", float(-lam[0]))
    lam = np.clip(lam, 0.0, None)
    return (u * np.sqrt(lam)) @ u.conj().T


__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "CovariantTuple",
    "ResidualReport",
    "validate",
    "is_isometric",
    "is_doubly_commuting",
    "doubly_commuting_difference",
    "v_tilde_of",
    "v_tilde_products",
    "adjoint_products",
    "gram",
    "purity_degree",
    "PurityReport",
    "defect",
    "DefectReport",
    "brehmer_check",
    "compress",
    "embedding",
    "alternating_gram_sum",
    "defect_square",
    "psd_sqrt",
    "unit_index",
    "zero_index",
    "add_index",
]
