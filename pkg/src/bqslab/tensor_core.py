"""Multi-indices, flip unitaries and the basis algebra of truncated Fock modules.

Conventions used by every other module:

* coordinates are 0-based, so the first correspondence is ``E_0``;
* multi-indices are plain tuples of non-negative ints;
* tensor coordinates vary rightmost-fastest (the ``np.kron`` convention), so
  in ``E_i (x) E_j`` the flat index of ``e_a (x) e_b`` is ``a * d_j + b``;
* the block of level ``n`` holds ``E_0^{n_0} (x) ... (x) E_{k-1}^{n_{k-1}} (x) H``
  and blocks are stored in lexicographic order of ``n``.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from math import prod

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import InputError

TOL_EXACT = 1e-9
TOL_RANK = 1e-8

MultiIndex = tuple


# ---------------------------------------------------------------------------
# multi-index arithmetic


def zero_index(k):
    return (0,) * k


def unit_index(i, k):
    """The multi-index with a single 1 in slot ``i``."""
    return tuple(1 if j == i else 0 for j in range(k))


def subset_index(u, k):
    """Indicator multi-index of a subset ``u`` of ``range(k)``."""
    return tuple(1 if j in u else 0 for j in range(k))


def add_index(n, m):
    return tuple(a + b for a, b in zip(n, m))


def scale_index(n, c):
    return tuple(c * a for a in n)


def degree(n):
    return sum(n)


def support(n):
    return tuple(j for j, a in enumerate(n) if a > 0)


def subsets(k):
    """All subsets of ``range(k)``, smallest first."""
    out = []
    for r in range(k + 1):
        out.extend(itertools.combinations(range(k), r))
    return out


def enumerate_levels(p, k):
    """All multi-indices with every entry at most ``p``, in lexicographic order."""
    if p < 0:
        raise InputError("level cap must be non-negative")
    return [tuple(n) for n in itertools.product(range(p + 1), repeat=k)]


def indices_up_to_degree(k, max_degree, zero_slot=None):
    """Multi-indices of total degree at most ``max_degree``.

    With ``zero_slot`` set, only indices whose entry in that slot is zero.
    """
    out = []
    for n in itertools.product(range(max_degree + 1), repeat=k):
        if sum(n) > max_degree:
            continue
        if zero_slot is not None and n[zero_slot] != 0:
            continue
        out.append(tuple(n))
    return out


# ---------------------------------------------------------------------------
# flips


def default_swap_flip(d_i, d_j):
    """Permutation ``E_i (x) E_j -> E_j (x) E_i`` sending ``e_a (x) e_b`` to ``e_b (x) e_a``."""
    if d_i < 1 or d_j < 1:
        raise InputError("dimensions must be positive")
    out = np.zeros((d_j * d_i, d_i * d_j), dtype=complex)
    for a in range(d_i):
        for b in range(d_j):
            out[b * d_i + a, a * d_j + b] = 1.0
    return out


def _unitary_residual(u):
    return np.linalg.norm(u.conj().T @ u - np.eye(u.shape[1]))


@dataclass(frozen=True, eq=False)
class ProductSystemSpec:
    """Dimensions ``d_i`` of the correspondences and the flips ``t_{i,j}`` for ``i < j``.

    ``flip(j, i)`` for ``i < j`` is the inverse (adjoint) of ``flip(i, j)`` and
    ``flip(i, i)`` is the identity.
    """

    dims: tuple
    flips: dict = field(default_factory=dict)
    tol: float = TOL_EXACT

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InputError(f"dims must be a non-empty tuple of positive ints, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        norm = {}
        for (i, j), t in dict(self.flips).items():
            if not (0 <= i < len(dims) and 0 <= j < len(dims)) or i == j:
                raise InputError(f"bad flip key {(i, j)}")
            t = np.array(t, dtype=complex)
            shape = (dims[j] * dims[i], dims[i] * dims[j])
            if i > j:
                t = t.conj().T
                i, j = j, i
                shape = (dims[j] * dims[i], dims[i] * dims[j])
            if t.shape != shape:
                raise InputError(f"flip {(i, j)} has shape {t.shape}, expected {shape}")
            res = _unitary_residual(t)
            if res > self.tol * max(1.0, np.sqrt(t.shape[0])):
                raise InputError(f"flip {(i, j)} is not unitary (residual {res:.3e})")
            t.setflags(write=False)
            norm[(i, j)] = t
        for i, j in itertools.combinations(range(len(dims)), 2):
            if (i, j) not in norm:
                t = default_swap_flip(dims[i], dims[j])
                t.setflags(write=False)
                norm[(i, j)] = t
        object.__setattr__(self, "flips", norm)

    @property
    def k(self):
        return len(self.dims)

    def flip(self, i, j):
        """``t_{i,j}: E_i (x) E_j -> E_j (x) E_i``."""
        if i == j:
            return np.eye(self.dims[i] ** 2, dtype=complex)
        if i < j:
            return self.flips[(i, j)]
        return self.flips[(j, i)].conj().T

    def tensor_dim(self, n):
        """Dimension of ``E(n)``."""
        if len(n) != self.k:
            raise InputError(f"multi-index {n} has length {len(n)}, expected {self.k}")
        return prod(d**a for d, a in zip(self.dims, n))

    def factors(self, n):
        """Coordinate of each tensor factor of ``E(n)``, left to right."""
        if len(n) != self.k:
            raise InputError(f"multi-index {n} has length {len(n)}, expected {self.k}")
        out = []
        for j, a in enumerate(n):
            out.extend([j] * a)
        return out

    def braid_residual(self):
        """Worst violation of the braid relation over ordered triples of distinct coordinates.

        Only needed for k >= 3, where the induced representation relies on it.
        Swap flips satisfy it exactly.
        """
        worst = 0.0
        for i, j, l in itertools.permutations(range(self.k), 3):
            seq = [i, j, l]
            a = _flip_at(self, seq, 0)
            s1 = [j, i, l]
            b = _flip_at(self, s1, 1)
            s2 = [j, l, i]
            c = _flip_at(self, s2, 0)
            left = c @ b @ a
            a2 = _flip_at(self, seq, 1)
            s1 = [i, l, j]
            b2 = _flip_at(self, s1, 0)
            s2 = [l, i, j]
            c2 = _flip_at(self, s2, 1)
            right = c2 @ b2 @ a2
            worst = max(worst, float(np.linalg.norm(left - right)))
        return worst


def swap_spec(dims):
    """Product system with coordinate-swap flips."""
    return ProductSystemSpec(tuple(dims))


def _flip_at(spec, seq, pos):
    """Flip of the adjacent factors at ``pos, pos + 1`` inside the factor sequence ``seq``."""
    left = prod(spec.dims[c] for c in seq[:pos])
    right = prod(spec.dims[c] for c in seq[pos + 2:])
    t = spec.flip(seq[pos], seq[pos + 1])
    return np.kron(np.kron(np.eye(left), t), np.eye(right))


def move_right(spec, i, seq):
    """Unitary ``E_i (x) F_1 (x) ... (x) F_m -> F_1 (x) ... (x) F_m (x) E_i``.

    ``seq`` lists the coordinates of the factors ``F``. The ``E_i`` factor is
    moved one place at a time, each step applying an elementary flip.
    """
    cur = [i] + list(seq)
    total = prod(spec.dims[c] for c in cur)
    out = np.eye(total, dtype=complex)
    for pos in range(len(seq)):
        out = _flip_at(spec, cur, pos) @ out
        cur[pos], cur[pos + 1] = cur[pos + 1], cur[pos]
    return out


def extended_flip(spec, i, n):
    """``t_{i,n}: E_i (x) E(n) -> E(n) (x) E_i`` built from elementary flips."""
    if not 0 <= i < spec.k:
        raise InputError(f"coordinate {i} out of range for k={spec.k}")
    return move_right(spec, i, spec.factors(n))


# ---------------------------------------------------------------------------
# ampliation


def ampliate(a, left_dim):
    """``I_{left_dim} (x) A``."""
    if left_dim < 1:
        raise InputError("left_dim must be positive")
    a = np.asarray(a)
    return np.kron(np.eye(left_dim, dtype=a.dtype), a)


def op_norm(m):
    """Spectral norm; 0 for empty matrices."""
    if m.size == 0:
        return 0.0
    if min(m.shape) > 64:
        g = m.conj().T @ m if m.shape[0] >= m.shape[1] else m @ m.conj().T
        n = g.shape[0]
        top = scipy.linalg.eigvalsh(g, subset_by_index=[n - 1, n - 1])[0]
        return float(np.sqrt(max(top, 0.0)))
    return float(np.linalg.norm(m, 2))


def right_kron_product(a, b, d):
    """``A @ (I_d (x) B)`` without forming the Kronecker product.

    ``A`` may be a scipy sparse matrix (CSC is fastest).
    """
    m = a.shape[0]
    n = b.shape[0]
    if a.shape[1] != d * n:
        raise InputError(f"shape mismatch {a.shape} vs I_{d} (x) {b.shape}")
    if scipy.sparse.issparse(a):
        a = a.tocsc()
        return np.hstack([a[:, c * n:(c + 1) * n] @ b for c in range(d)])
    out = a.reshape(m, d, n) @ b
    return out.reshape(m, d * b.shape[1])


def left_kron_product(b, a, d):
    """``(I_d (x) B) @ A`` without forming the Kronecker product.

    ``B`` may be a scipy sparse matrix.
    """
    n = b.shape[1]
    if a.shape[0] != d * n:
        raise InputError(f"shape mismatch I_{d} (x) {b.shape} vs {a.shape}")
    m = a.shape[1]
    b0 = b.shape[0]
    if scipy.sparse.issparse(b):
        wide = a.reshape(d, n, m).transpose(1, 0, 2).reshape(n, d * m)
        out = b @ wide
        return np.asarray(out).reshape(b0, d, m).transpose(1, 0, 2).reshape(d * b0, m)
    out = np.matmul(b, a.reshape(d, n, m))
    return out.reshape(d * b0, m)


# ---------------------------------------------------------------------------
# subspaces


def _fix_phases(q, tol):
    for c in range(q.shape[1]):
        col = q[:, c]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size:
            ph = col[nz[0]] / abs(col[nz[0]])
            q[:, c] = col / ph
    return q


def orth(m, rtol=TOL_RANK, scale=None):
    """Orthonormal basis of the column span, in canonical form.

    Columns come from the SVD in order of descending singular value; the
    first entry above ``rtol`` of each column is made real positive.
    Singular values below ``rtol`` times ``scale`` are discarded; ``scale``
    defaults to the largest singular value. Pass ``scale=1`` for residual
    matrices such as projected orthonormal columns, where a relative cut
    would keep pure rounding noise.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise InputError("orth expects a matrix")
    if m.shape[1] == 0 or m.shape[0] == 0 or not np.any(m):
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    r = int(np.sum(s > rtol * (s[0] if scale is None else scale)))
    return _fix_phases(u[:, :r].copy(), rtol)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of ``C^ambient_dim`` held as a matrix with orthonormal columns."""

    basis: np.ndarray
    tol: float = TOL_EXACT

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex)
        if b.ndim != 2:
            raise InputError("basis must be a matrix")
        if b.shape[1]:
            res = np.linalg.norm(b.conj().T @ b - np.eye(b.shape[1]))
            if res > self.tol * max(1.0, np.sqrt(b.shape[1])):
                raise InputError(f"basis is not orthonormal (residual {res:.3e})")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.conj().T

    @classmethod
    def span(cls, vectors, rtol=TOL_RANK):
        """Span of the columns of ``vectors``."""
        return cls(orth(vectors, rtol))

    @classmethod
    def zero(cls, ambient_dim):
        return cls(np.zeros((ambient_dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient_dim):
        return cls(np.eye(ambient_dim, dtype=complex))

    @classmethod
    def coordinate(cls, ambient_dim, indices):
        idx = np.asarray(indices, dtype=int)
        b = np.zeros((ambient_dim, idx.size), dtype=complex)
        b[idx, np.arange(idx.size)] = 1.0
        return cls(b)

    def complement(self, rtol=TOL_RANK):
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        if self.dim == self.ambient_dim:
            return Subspace.zero(self.ambient_dim)
        q, _ = np.linalg.qr(self.basis, mode="complete")
        return Subspace(_fix_phases(q[:, self.dim:].copy(), rtol))

    def sum(self, other, rtol=TOL_RANK):
        return Subspace.span(np.hstack([self.basis, other.basis]), rtol)

    def intersect(self, other, rtol=TOL_RANK):
        """Intersection via the null space of ``(I - P_other) Q_self``."""
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient_dim)
        resid = self.basis - other.basis @ (other.basis.conj().T @ self.basis)
        _, s, vh = np.linalg.svd(resid, full_matrices=True)
        keep = np.ones(self.dim, dtype=bool)
        keep[: s.size] = s <= rtol * max(1.0, s[0] if s.size else 0.0)
        null = vh.conj().T[:, keep]
        return Subspace.span(self.basis @ null, rtol)

    def coordinates_of(self, other):
        """Express ``other`` (a subspace of this one) in this subspace's basis."""
        return Subspace(orth(self.basis.conj().T @ other.basis))

    def lift(self, inner):
        """Embed a subspace given in this subspace's coordinates into the ambient space."""
        return Subspace(self.basis @ inner.basis)

    def distance_to(self, vectors):
        """Norm of the part of ``vectors`` outside this subspace."""
        v = np.asarray(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        return float(np.linalg.norm(v - self.basis @ (self.basis.conj().T @ v), 2))


def max_principal_angle(a, b):
    """Largest principal angle between two subspaces (pi/2 if dimensions differ)."""
    if a.dim != b.dim:
        return float(np.pi / 2)
    if a.dim == 0:
        return 0.0
    return float(np.max(scipy.linalg.subspace_angles(a.basis, b.basis)))


# ---------------------------------------------------------------------------
# truncated Fock module


@dataclass(frozen=True, eq=False)
class TruncatedFockModule:
    """Basis bookkeeping for the direct sum of ``E(n) (x) H`` over ``max n_j <= p``.

    ``guard`` levels at the top are excluded from the interior, so a vector
    is interior when every ``n_j <= p - guard``.
    """

    spec: ProductSystemSpec
    h_dim: int
    level_cap: int
    guard: int = 1

    def __post_init__(self):
        if self.h_dim < 0:
            raise InputError("h_dim must be non-negative")
        if self.level_cap < 0:
            raise InputError("level cap must be non-negative")
        if not 0 <= self.guard <= self.level_cap:
            raise InputError(f"guard {self.guard} must lie in [0, p={self.level_cap}]")
        levels = enumerate_levels(self.level_cap, self.spec.k)
        offsets = []
        pos = 0
        for n in levels:
            offsets.append(pos)
            pos += self.spec.tensor_dim(n) * self.h_dim
        object.__setattr__(self, "levels", tuple(levels))
        object.__setattr__(self, "_offsets", tuple(offsets))
        object.__setattr__(self, "_index", {n: a for a, n in enumerate(levels)})
        object.__setattr__(self, "dim", pos)

    @property
    def p(self):
        return self.level_cap

    def block_dim(self, n):
        return self.spec.tensor_dim(n) * self.h_dim

    def offset(self, n):
        return self._offsets[self._index[tuple(n)]]

    def block_slice(self, n):
        o = self.offset(n)
        return slice(o, o + self.block_dim(n))

    def position(self, n, t, c):
        """Flat position of ``(tensor coordinate t in E(n)) (x) (coordinate c in H)``."""
        n = tuple(n)
        if n not in self._index:
            raise InputError(f"level {n} outside the truncation")
        if not 0 <= t < self.spec.tensor_dim(n) or not 0 <= c < self.h_dim:
            raise InputError("coordinate out of range")
        return self.offset(n) + t * self.h_dim + c

    def locate(self, pos):
        """Inverse of :meth:`position`."""
        if not 0 <= pos < self.dim:
            raise InputError(f"position {pos} out of range")
        a = bisect.bisect_right(self._offsets, pos) - 1
        while self.block_dim(self.levels[a]) == 0:
            a -= 1
        rem = pos - self._offsets[a]
        return self.levels[a], rem // self.h_dim, rem % self.h_dim

    def is_interior(self, n):
        return max(n, default=0) <= self.level_cap - self.guard

    def indices(self, predicate):
        out = []
        for n in self.levels:
            if predicate(n):
                o = self.offset(n)
                out.extend(range(o, o + self.block_dim(n)))
        return np.asarray(out, dtype=int)

    def interior_indices(self):
        return self.indices(self.is_interior)

    def interior(self):
        return Subspace.coordinate(self.dim, self.interior_indices())

    def level_subspace(self, n):
        return Subspace.coordinate(self.dim, self.indices(lambda m: m == tuple(n)))

    def vector(self, n, tensor, h):
        """Ambient vector ``tensor (x) h`` placed in the block of level ``n``."""
        out = np.zeros(self.dim, dtype=complex)
        out[self.block_slice(n)] = np.kron(np.asarray(tensor, dtype=complex), np.asarray(h, dtype=complex))
        return out

    def closed_form_dim(self):
        return self.h_dim * prod(
            sum(d**a for a in range(self.level_cap + 1)) for d in self.spec.dims
        )


__all__ = [
    "zero_index",
    "unit_index",
    "subset_index",
    "add_index",
    "scale_index",
    "degree",
    "support",
    "subsets",
    "enumerate_levels",
    "indices_up_to_degree",
    "default_swap_flip",
    "ProductSystemSpec",
    "swap_spec",
    "move_right",
    "extended_flip",
    "ampliate",
    "op_norm",
    "right_kron_product",
    "left_kron_product",
    "orth",
    "Subspace",
    "max_principal_angle",
    "TruncatedFockModule",
    "TOL_EXACT",
    "TOL_RANK",
]
