import itertools
from math import prod

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bqslab.errors import InputError
from bqslab.tensor_core import (
    ProductSystemSpec,
    Subspace,
    TruncatedFockModule,
    add_index,
    ampliate,
    default_swap_flip,
    enumerate_levels,
    extended_flip,
    max_principal_angle,
    orth,
    swap_spec,
)

from conftest import random_unitary


def ones(m):
    return sorted((int(r), int(c)) for r, c in zip(*np.nonzero(np.abs(m) > 0.5)))


# ---------------------------------------------------------------- swap flips


def test_swap_flip_scalars():
    assert np.array_equal(default_swap_flip(1, 1), np.eye(1))


def test_swap_flip_with_scalar_slot_is_identity():
    assert np.array_equal(default_swap_flip(2, 1), np.eye(2))


def test_swap_flip_two_by_two_positions():
    # frozen from scripts/derive_oracle_values.py
    assert ones(default_swap_flip(2, 2)) == [(0, 0), (1, 2), (2, 1), (3, 3)]


def test_swap_flip_rejects_zero_dim():
    with pytest.raises(InputError):
        default_swap_flip(0, 2)


# ---------------------------------------------------------------- extended flips


def test_extended_flip_scalar_dims_is_identity():
    assert np.allclose(extended_flip(swap_spec((1, 1)), 1, (0, 3)), np.eye(1))


@pytest.mark.parametrize("dims", [(1, 1), (2, 2), (2, 1, 3)])
def test_extended_flip_empty_level_is_identity(dims):
    spec = swap_spec(dims)
    for i in range(spec.k):
        assert np.allclose(extended_flip(spec, i, (0,) * spec.k), np.eye(dims[i]))


def test_extended_flip_two_by_two_permutation():
    spec = swap_spec((2, 2))
    t = extended_flip(spec, 0, (0, 2))
    # frozen from scripts/derive_oracle_values.py
    assert ones(t) == [(0, 0), (1, 4), (2, 1), (3, 5), (4, 2), (5, 6), (6, 3), (7, 7)]
    assert np.allclose(t.conj().T @ t, np.eye(8))
    t12 = spec.flip(0, 1)
    composed = np.kron(np.eye(2), t12) @ np.kron(t12, np.eye(2))
    assert np.allclose(t, composed)
    # undoing with the reverse moves: E(n) (x) E_i -> E_i (x) E(n)
    back = np.kron(t12.conj().T, np.eye(2)) @ np.kron(np.eye(2), t12.conj().T)
    assert np.allclose(back @ t, np.eye(8))


def test_extended_flip_bad_coordinate():
    with pytest.raises(InputError):
        extended_flip(swap_spec((1, 1)), 2, (0, 0))
    with pytest.raises(InputError):
        extended_flip(swap_spec((1, 1)), 0, (0, 0, 1))


# ---------------------------------------------------------------- ampliation and levels


def test_ampliate_examples():
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(ampliate(a, 1), a)
    assert np.array_equal(ampliate(np.zeros((1, 1)), 3), np.zeros((3, 3)))
    want = np.zeros((4, 4), dtype=complex)
    want[:2, :2] = a
    want[2:, 2:] = a
    assert np.array_equal(ampliate(a, 2), want)


def test_enumerate_levels_examples():
    assert enumerate_levels(1, 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert enumerate_levels(0, 3) == [(0, 0, 0)]
    assert enumerate_levels(2, 1) == [(0,), (1,), (2,)]


# ---------------------------------------------------------------- specs


def test_spec_rejects_non_unitary_flip():
    with pytest.raises(InputError):
        ProductSystemSpec((2, 2), {(0, 1): np.ones((4, 4))})


def test_spec_rejects_wrong_flip_shape():
    with pytest.raises(InputError):
        ProductSystemSpec((2, 2), {(0, 1): np.eye(3)})


def test_spec_reverse_flip_is_adjoint_and_diagonal_is_identity():
    rng = np.random.default_rng(0)
    u = random_unitary(rng, 6)
    spec = ProductSystemSpec((2, 3), {(0, 1): u})
    assert np.allclose(spec.flip(1, 0), u.conj().T)
    assert np.allclose(spec.flip(0, 0), np.eye(4))


def test_spec_accepts_flip_given_for_reverse_pair():
    rng = np.random.default_rng(1)
    u = random_unitary(rng, 6)
    spec = ProductSystemSpec((2, 3), {(1, 0): u})
    assert np.allclose(spec.flip(1, 0), u)


dims_st = st.lists(st.integers(1, 2), min_size=1, max_size=3).map(tuple)


@given(dims_st, st.integers(0, 2**32 - 1))
def test_flip_pairs_are_mutually_inverse(dims, seed):
    rng = np.random.default_rng(seed)
    flips = {
        (i, j): random_unitary(rng, dims[i] * dims[j])
        for i, j in itertools.combinations(range(len(dims)), 2)
    }
    spec = ProductSystemSpec(dims, flips)
    for i, j in itertools.permutations(range(len(dims)), 2):
        n = dims[i] * dims[j]
        assert np.linalg.norm(spec.flip(i, j) @ spec.flip(j, i) - np.eye(n)) <= 1e-9


@given(
    st.lists(st.integers(1, 2), min_size=2, max_size=3).map(tuple),
    st.integers(0, 2**32 - 1),
    st.data(),
)
def test_extended_flip_composes_over_concatenation(dims, seed, data):
    """Moving E_i past F(n) then F(m) equals moving it past F(n) F(m) in one go."""
    rng = np.random.default_rng(seed)
    k = len(dims)
    flips = {(i, j): random_unitary(rng, dims[i] * dims[j]) for i, j in itertools.combinations(range(k), 2)}
    spec = ProductSystemSpec(dims, flips)
    i = data.draw(st.integers(0, k - 1))
    # n occupies the leading coordinates, m the trailing ones, so that
    # the factor list of n + m is the factor list of n followed by m
    cut = data.draw(st.integers(0, k))
    n = tuple(data.draw(st.integers(0, 1)) if c < cut else 0 for c in range(k))
    m = tuple(data.draw(st.integers(0, 1)) if c >= cut else 0 for c in range(k))
    dn, dm = spec.tensor_dim(n), spec.tensor_dim(m)
    first = np.kron(extended_flip(spec, i, n), np.eye(dm))
    second = np.kron(np.eye(dn), extended_flip(spec, i, m))
    assert np.allclose(extended_flip(spec, i, add_index(n, m)), second @ first, atol=1e-12)


# ---------------------------------------------------------------- truncated module


module_st = st.tuples(
    st.lists(st.integers(1, 2), min_size=1, max_size=3).map(tuple),
    st.integers(1, 3),
    st.integers(1, 3),
)


@given(module_st)
def test_module_dimension_closed_form(args):
    dims, p, h = args
    mod = TruncatedFockModule(swap_spec(dims), h, p, 1)
    want = h * prod(sum(d**a for a in range(p + 1)) for d in dims)
    assert mod.dim == want
    assert mod.dim == sum(prod(d**a for d, a in zip(dims, n)) * h for n in enumerate_levels(p, len(dims)))


@given(module_st)
def test_module_position_round_trip(args):
    dims, p, h = args
    mod = TruncatedFockModule(swap_spec(dims), h, p, 1)
    for pos in range(mod.dim):
        assert mod.position(*mod.locate(pos)) == pos


def test_module_basis_order():
    mod = TruncatedFockModule(swap_spec((2, 1)), 2, 1, 1)
    assert mod.levels == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert [mod.offset(n) for n in mod.levels] == [0, 2, 4, 8]
    # e_1 in E_0, h-coordinate 1 at level (1,0): offset 4 + 1*2 + 1
    assert mod.position((1, 0), 1, 1) == 7


def test_module_guard_bounds():
    with pytest.raises(InputError):
        TruncatedFockModule(swap_spec((1,)), 1, 2, 3)


def test_module_interior():
    mod = TruncatedFockModule(swap_spec((1, 1)), 1, 3, 1)
    assert mod.interior().dim == 9
    assert all(max(mod.locate(int(q))[0]) <= 2 for q in mod.interior_indices())


# ---------------------------------------------------------------- subspaces


def test_orth_drops_noise_with_absolute_scale():
    m = np.array([[1.0, 0.0], [0.0, 1e-12]])
    assert orth(m).shape[1] == 1
    assert orth(np.array([[1e-12], [0.0]]), scale=1.0).shape[1] == 0


def test_subspace_complement_and_sum():
    rng = np.random.default_rng(4)
    s = Subspace.span(rng.standard_normal((6, 2)))
    c = s.complement()
    assert c.dim == 4
    assert np.allclose(s.basis.conj().T @ c.basis, 0)
    assert s.sum(c).dim == 6


def test_subspace_intersection():
    a = Subspace.coordinate(4, [0, 1])
    b = Subspace.coordinate(4, [1, 2])
    assert max_principal_angle(a.intersect(b), Subspace.coordinate(4, [1])) < 1e-12


def test_subspace_rejects_non_orthonormal():
    with pytest.raises(InputError):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))
