import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bqslab.beurling import (
    bqs_test,
    commutator_sides,
    construct_model,
    cross_defect,
    dcs_test,
    douglas_contraction,
    commutator_identity_residual,
    vanishing_products,
    quotient_frame,
)
from bqslab.corpus import dcs_corpus, qs_corpus, random_qs
from bqslab.covariant import DEFAULT_TOL
from bqslab.errors import InputError, NotDoublyCommutingError, NotInvariantError, NotQuotientError
from bqslab.fock_model import induced_rep
from bqslab.tensor_core import Subspace, indices_up_to_degree, op_norm, swap_spec

from conftest import monomial

BIDISC = swap_spec((1, 1))


def bidisc(p, g=1):
    return induced_rep(BIDISC, 1, p, g)


def z2_powers(rep, top):
    p = rep.module.level_cap
    return Subspace.coordinate(rep.module.dim, [monomial(p, 0, b) for b in range(top + 1)])


# ---------------------------------------------------------------- cross defects


def test_cross_defect_zero_subspace():
    rep = bidisc(3)
    x = cross_defect(rep.tuple, Subspace.zero(rep.module.dim), 0, 1)
    assert not np.any(x)


def test_cross_defect_kq_witness():
    p = 4
    rep = bidisc(p)
    x = cross_defect(rep.tuple, z2_powers(rep, 2), 0, 1)
    # frozen from scripts/derive_oracle_values.py: z2^3 -> z1 z2^2 with unit weight
    assert op_norm(x) == pytest.approx(1.0, abs=1e-12)
    assert abs(x[monomial(p, 1, 2), monomial(p, 0, 3)]) == pytest.approx(1.0, abs=1e-12)


def test_cross_defect_z1_perp_interior():
    p = 4
    rep = bidisc(p)
    r = bqs_test(rep.tuple, z2_powers(rep, p), rep.interior())
    assert r.max_cross <= 1e-12


def test_cross_defect_needs_distinct_pair():
    rep = bidisc(3)
    with pytest.raises(InputError):
        cross_defect(rep.tuple, Subspace.zero(rep.module.dim), 1, 1)


def test_cross_defect_rejects_non_quotient():
    p = 3
    rep = bidisc(p)
    with pytest.raises(NotQuotientError):
        cross_defect(rep.tuple, Subspace.coordinate(rep.module.dim, [monomial(p, 1, 0)]), 0, 1)


# ---------------------------------------------------------------- BQS test


def test_bqs_zero_subspace():
    rep = bidisc(4)
    r = bqs_test(rep.tuple, Subspace.zero(rep.module.dim), rep.interior())
    assert r.verdict and r.residual == 0.0


def test_bqs_kq_fails():
    rep = bidisc(4)
    r = bqs_test(rep.tuple, z2_powers(rep, 2), rep.interior())
    # frozen from scripts/derive_oracle_values.py
    assert r.max_main == pytest.approx(1.0, abs=1e-9)
    assert r.max_cross == pytest.approx(1.0, abs=1e-9)
    assert not r.verdict


def test_bqs_z1_perp_passes():
    rep = bidisc(4)
    r = bqs_test(rep.tuple, z2_powers(rep, 4), rep.interior())
    assert r.verdict and r.residual <= 1e-12


def test_bqs_report_is_symmetric():
    rep = bidisc(4)
    r = bqs_test(rep.tuple, z2_powers(rep, 2), rep.interior())
    assert r.main[(0, 1)] == r.main[(1, 0)] and r.cross[(0, 1)] == r.cross[(1, 0)]
    assert all(v >= 0 for v in list(r.main.values()) + list(r.cross.values()))


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.integers(0, 14))
def test_main_and_cross_verdicts_agree(seed, offset):
    rep, k_sub = qs_corpus(seed, offset + 1)[offset]
    r = bqs_test(rep.tuple, k_sub, rep.interior())
    assert r.verdict_main == r.verdict_cross


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1))
def test_dcs_complement_is_bqs(seed):
    inst = dcs_corpus(seed, 1)[0]
    rep = inst.rep
    assert dcs_test(rep.tuple, inst.subspace, rep.interior()).ok
    r = bqs_test(rep.tuple, inst.subspace.complement(), rep.interior())
    assert r.verdict


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.integers(0, 14))
def test_bqs_complement_is_dcs(seed, offset):
    rep, k_sub = qs_corpus(seed, offset + 1)[offset]
    r = bqs_test(rep.tuple, k_sub, rep.interior())
    if r.verdict:
        # the complement is invariant, so it is its own generated submodule
        assert dcs_test(rep.tuple, k_sub.complement(), rep.interior()).ok


# ---------------------------------------------------------------- commutator identities


def test_commutator_identity_zero_index():
    rep = bidisc(3)
    assert commutator_identity_residual(rep.tuple, z2_powers(rep, 3), 0, (0, 0)) == 0.0


def test_commutator_identity_column_subspace():
    rep = bidisc(3)
    assert commutator_identity_residual(rep.tuple, z2_powers(rep, 3), 0, (0, 1)) <= 1e-12


def test_commutator_identity_rejects_bad_index():
    rep = bidisc(3)
    with pytest.raises(InputError):
        commutator_identity_residual(rep.tuple, z2_powers(rep, 3), 0, (1, 0))


@given(st.integers(0, 2**32 - 1))
def test_commutator_identity_random_qs(seed):
    rep = bidisc(4)
    k_sub = random_qs(rep, np.random.default_rng(seed))
    assert commutator_identity_residual(rep.tuple, k_sub, 0, (0, 2)) <= DEFAULT_TOL.exact


def test_douglas_column_subspace():
    rep = bidisc(3)
    k_sub = z2_powers(rep, 3)
    fr = quotient_frame(rep.tuple, k_sub)
    assert not np.any(fr.compressed[0])
    lhs, _ = commutator_sides(fr, 0, (0, 1))
    dc = douglas_contraction(rep.tuple, k_sub, 0, (0, 1))
    assert np.allclose(dc.x, lhs)
    assert dc.norm <= 1.0 + DEFAULT_TOL.thm


def test_douglas_zero_commutator():
    rep = bidisc(3)
    dc = douglas_contraction(rep.tuple, Subspace.full(rep.module.dim), 0, (0, 1))
    assert not np.any(dc.x)


@given(st.integers(0, 2**32 - 1), st.sampled_from([(0, (0, 1)), (0, (0, 2)), (1, (1, 0)), (1, (2, 0))]))
def test_douglas_contraction_bound(seed, case):
    i, m_hat = case
    rep = bidisc(4)
    k_sub = random_qs(rep, np.random.default_rng(seed))
    if commutator_identity_residual(rep.tuple, k_sub, i, m_hat) <= DEFAULT_TOL.thm:
        assert douglas_contraction(rep.tuple, k_sub, i, m_hat).norm <= 1.0 + DEFAULT_TOL.thm


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.integers(0, 14))
def test_vanishing_products_vanish(seed, offset):
    rep, k_sub = qs_corpus(seed, offset + 1)[offset]
    k = rep.spec.k
    for m_hat in indices_up_to_degree(k, 2, zero_slot=0):
        for n_hat in indices_up_to_degree(k, 2, zero_slot=1)[:3]:
            r = vanishing_products(rep.tuple, k_sub, 0, 1, m_hat, n_hat, rep.interior())
            if r.holds:
                bound = DEFAULT_TOL.thm * np.sqrt(rep.module.dim)
                assert all(v <= bound for v in r.products.values())
            else:
                assert r.products == {}


# ---------------------------------------------------------------- DCS test and model


def test_dcs_principal_submodule():
    rep = bidisc(3)
    m = rep.module
    s_sub = Subspace.coordinate(m.dim, m.indices(lambda n: n[0] >= 1))
    assert dcs_test(rep.tuple, s_sub, rep.interior()).max_residual <= 1e-12


def test_dcs_non_principal_ideal():
    rep = bidisc(3)
    m = rep.module
    s_sub = Subspace.coordinate(m.dim, m.indices(lambda n: n != (0, 0)))
    r = dcs_test(rep.tuple, s_sub, rep.interior())
    # frozen from scripts/derive_oracle_values.py
    assert r.max_residual == pytest.approx(1.0, abs=1e-12)
    assert not r.ok


def test_dcs_full_space():
    rep = bidisc(3)
    assert dcs_test(rep.tuple, Subspace.full(rep.module.dim), rep.interior()).max_residual == 0.0


def test_dcs_rejects_non_invariant():
    p = 3
    rep = bidisc(p)
    with pytest.raises(NotInvariantError):
        dcs_test(rep.tuple, Subspace.coordinate(rep.module.dim, [monomial(p, 0, 0)]))


def test_model_principal_submodule():
    p = 3
    rep = bidisc(p)
    m = rep.module
    s_sub = Subspace.coordinate(m.dim, m.indices(lambda n: n[0] >= 1))
    model = construct_model(rep.tuple, s_sub, p, 1, rep.interior())
    assert model.w_s.dim == 1
    assert model.w_s.distance_to(np.eye(m.dim)[:, monomial(p, 1, 0)]) <= 1e-12
    assert model.isometry_residual <= 1e-12 and model.projection_residual <= 1e-12
    # M_Theta sends z1^a z2^b to z1^(a+1) z2^b below the cap
    for a in range(p):
        for b in range(p + 1):
            col = model.m_theta[:, monomial(p, a, b)]
            assert np.allclose(col, np.eye(m.dim)[:, monomial(p, a + 1, b)])


def test_model_full_space_unitary():
    p = 3
    rep = bidisc(p)
    model = construct_model(rep.tuple, Subspace.full(rep.module.dim), p, 1, rep.interior())
    assert model.w_s.dim == 1
    assert model.ok and model.isometry_residual == 0.0 and model.projection_residual == 0.0


def test_model_one_variable_double_shift():
    p, g = 6, 2
    rep = induced_rep(swap_spec((1,)), 1, p, g)
    s_sub = Subspace.coordinate(rep.module.dim, list(range(2, p + 1)))
    model = construct_model(rep.tuple, s_sub, p, g, rep.interior())
    assert model.w_s.distance_to(np.eye(p + 1)[:, 2]) == 0.0
    for a in range(p - 1):
        assert np.allclose(model.m_theta[:, a], np.eye(p + 1)[:, a + 2])
    assert model.ok


def test_model_rejects_non_dcs():
    rep = bidisc(3)
    m = rep.module
    s_sub = Subspace.coordinate(m.dim, m.indices(lambda n: n != (0, 0)))
    with pytest.raises(NotDoublyCommutingError):
        construct_model(rep.tuple, s_sub, 3, 1, rep.interior())


@settings(max_examples=8)
@given(st.integers(0, 2**32 - 1))
def test_model_for_generated_dcs(seed):
    inst = dcs_corpus(seed, 1)[0]
    rep = inst.rep
    # source levels must stay below the cap after the shift by the generator level
    shift = max(max(n) for n in inst.levels)
    model = construct_model(rep.tuple, inst.subspace, rep.module.level_cap, 1 + shift, rep.interior())
    assert model.isometry_residual <= DEFAULT_TOL.thm
