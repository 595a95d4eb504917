import time

import numpy as np

from bqslab import instances, oracle
from bqslab.analytic import classify, factor_from_invariant, invariant_from_factor, nonunitary_classify
from bqslab.beurling import bqs_test, douglas_contraction, commutator_identity_residual, vanishing_products
from bqslab.corpus import (
    dcs_corpus,
    factor_corpus,
    factor_pair,
    pure_corpus,
    qs_corpus,
    random_dcs,
    random_qs,
    random_symbol,
)
from bqslab.covariant import CovariantTuple
from bqslab.dilation import build_dilation, pi_norm_check
from bqslab.fock_model import induced_rep
from bqslab.tensor_core import ProductSystemSpec, Subspace, indices_up_to_degree, max_principal_angle, op_norm, swap_spec

from conftest import DATA, monomial, random_unitary, record

HALF = 1 / np.sqrt(2)


def test_criterion_1_dcs_complements_are_bqs():
    start = time.perf_counter()
    worst, failures = 0.0, 0
    corpus = dcs_corpus(2024, 50)
    for inst in corpus:
        rep = inst.rep
        assert rep.module.dim <= 2500
        r = bqs_test(rep.tuple, inst.subspace.complement(), rep.interior())
        worst = max(worst, r.residual)
        failures += not (r.verdict and r.residual <= 1e-7)
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed <= 60
    record(1, ok, f"{len(corpus)} instances, worst residual {worst:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_2_kq_witness():
    p = 4
    rep = induced_rep(swap_spec((1, 1)), 1, p)
    k_sub = Subspace.coordinate(rep.module.dim, [monomial(p, 0, b) for b in range(3)])
    r = bqs_test(rep.tuple, k_sub, rep.interior())
    main_ref, cross_ref = oracle.bqs_matrices(
        [rep.tuple[i] for i in range(2)], rep.spec, k_sub.basis, rep.interior().basis, 0, 1
    )
    ok = (
        abs(r.max_main - 1) <= 1e-9
        and abs(r.cross[(0, 1)] - 1) <= 1e-9
        and abs(op_norm(main_ref) - 1) <= 1e-9
        and abs(op_norm(cross_ref) - 1) <= 1e-9
    )
    record(2, ok, f"main {r.max_main:.12f}, cross {r.cross[(0, 1)]:.12f}")
    assert ok


def test_criterion_3_main_and_cross_agree():
    corpus = qs_corpus(3, 200)
    agree = 0
    verdicts = 0
    for rep, k_sub in corpus:
        r = bqs_test(rep.tuple, k_sub, rep.interior())
        agree += r.verdict_main == r.verdict_cross
        verdicts += r.verdict_main
    ok = agree == len(corpus)
    record(3, ok, f"{agree}/{len(corpus)} agree, {verdicts} Beurling")
    assert ok


def test_criterion_4_commutator_identities():
    corpus = qs_corpus(4, 100)
    w22 = w24 = 0.0
    worst_norm = 0.0
    evaluated = 0
    for rep, k_sub in corpus:
        k = rep.spec.k
        for i in range(k):
            for m_hat in indices_up_to_degree(k, 3, zero_slot=i):
                w22 = max(w22, commutator_identity_residual(rep.tuple, k_sub, i, m_hat))
                worst_norm = max(worst_norm, douglas_contraction(rep.tuple, k_sub, i, m_hat).norm)
        for i in range(k):
            for j in range(k):
                if i == j:
                    continue
                for m_hat in indices_up_to_degree(k, 3, zero_slot=i):
                    for n_hat in indices_up_to_degree(k, 3, zero_slot=j):
                        r = vanishing_products(rep.tuple, k_sub, i, j, m_hat, n_hat, rep.interior())
                        if r.holds:
                            evaluated += 1
                            w24 = max(w24, *r.products.values())
    ok = w22 <= 1e-7 and w24 <= 1e-7 and worst_norm <= 1 + 1e-7
    record(4, ok, f"commutator {w22:.2e}, products {w24:.2e} over {evaluated} cases, max contraction norm {worst_norm:.12f}")
    assert ok


def test_criterion_5_dilation():
    nil = np.array([[0, HALF], [0, 0]], dtype=complex)
    d = build_dilation(CovariantTuple.from_scalar_matrices([nil, nil]), 1)
    want = {
        (0, 0): np.diag([0.0, 1.0]),
        (0, 1): np.array([[0, 0], [HALF, 0]]),
        (1, 0): np.array([[0, 0], [HALF, 0]]),
        (1, 1): np.zeros((2, 2)),
    }
    exact = d.isometry_residual <= 1e-12 and all(np.max(np.abs(d.blocks[n] - b)) <= 1e-12 for n, b in want.items())
    iso, inter = [], 0.0
    for tup in pure_corpus(5, 50):
        assert tup.h_dim <= 4
        for p in range(1, 9):
            res = build_dilation(tup, p)
            inter = max(inter, res.max_intertwine)
        iso.append(res.isometry_residual)
    within = sum(r <= 1e-6 for r in iso)
    ok = exact and within == len(iso) and inter <= 1e-9
    record(
        5,
        ok,
        f"closed form exact: {exact}; isometry at p=8 within 1e-6 on {within}/{len(iso)}, "
        f"worst {max(iso):.2e}; intertwining {inter:.2e}",
    )
    assert ok


def test_criterion_6_norm_formula():
    rng = np.random.default_rng(6)
    monotone = True
    worst_gap, worst_tail = 0.0, 0.0
    for tup in pure_corpus(5, 50):
        h = rng.standard_normal(tup.h_dim) + 1j * rng.standard_normal(tup.h_dim)
        checks = [pi_norm_check(tup, h, p) for p in range(2, 9)]
        gaps = [c.gap for c in checks]
        tails = [c.tail / np.vdot(h, h).real for c in checks]
        monotone &= all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
        monotone &= all(b <= a + 1e-12 for a, b in zip(tails, tails[1:]))
        worst_gap = max(worst_gap, gaps[-1])
        worst_tail = max(worst_tail, tails[-1])
    ok = monotone and worst_gap <= 1e-8
    record(6, ok, f"monotone: {monotone}; gap at p=8 {worst_gap:.2e}; relative tail at p=8 {worst_tail:.2e}")
    assert ok


def _factor_results():
    out = []
    for inst in factor_corpus(7, 50):
        theta_op, _, s_sub = factor_pair(inst)
        f = factor_from_invariant(theta_op, s_sub)
        back = invariant_from_factor(theta_op, f.phi, f.psi).subspace
        both = not classify(f.phi).unitary and not classify(f.psi).unitary
        out.append((f.residual, max_principal_angle(back, s_sub), nonunitary_classify(theta_op, s_sub).verdict, both))
    return out


FACTOR = []


def factor_results():
    if not FACTOR:
        FACTOR.extend(_factor_results())
    return FACTOR


def test_criterion_7_factorization_round_trip():
    res = factor_results()
    worst_res = max(r[0] for r in res)
    worst_angle = max(r[1] for r in res)
    ok = worst_res <= 1e-7 and worst_angle <= 1e-6
    record(7, ok, f"{len(res)} pairs, factorization {worst_res:.2e}, angle {worst_angle:.2e}")
    assert ok


def test_criterion_8_nonunitary_agreement():
    res = factor_results()
    agree = sum(r[2] == r[3] for r in res)
    ok = agree == len(res)
    record(8, ok, f"{agree}/{len(res)} agree, {sum(r[3] for r in res)} with both factors non-unitary")
    assert ok


def oracle_instances():
    objs = [instances.load(DATA / f"{name}.jsonl")[0].raw for name in (
        "kq", "z1_perp", "zero", "bidisc", "nilpotent", "point_nine", "unitary", "compressed_qs", "z2_factor",
    )]
    rng = np.random.default_rng(9)
    for dims, h, p in (((1, 1), 1, 3), ((2, 1), 1, 3), ((1, 1, 1), 1, 2), ((1, 1), 2, 2)):
        rep = induced_rep(swap_spec(dims), h, p)
        amb = {"kind": "induced", "h_dim": h, "p": p, "g": 1}
        objs.append(instances.instance_to_dict(rep.spec, amb, subspace=random_qs(rep, rng).basis))
        objs.append(instances.instance_to_dict(rep.spec, amb, subspace=random_dcs(rep, rng).subspace.basis))
    rep = induced_rep(swap_spec((1, 1)), 1, 3)
    objs.append(instances.instance_to_dict(
        rep.spec, {"kind": "induced", "h_dim": 1, "p": 3, "g": 1}, symbol=random_symbol(rep, rng)[:, None]))
    spec = ProductSystemSpec((2, 2), {(0, 1): random_unitary(rng, 4)})
    rep = induced_rep(spec, 1, 2)
    objs.append(instances.instance_to_dict(
        spec, {"kind": "induced", "h_dim": 1, "p": 2, "g": 1}, subspace=random_qs(rep, rng).basis))
    for tup in pure_corpus(9, 1, max_h=3):
        objs.append(instances.instance_to_dict(swap_spec((1, 1)), {"kind": "matrix", "h_dim": tup.h_dim},
                                               tuple_mats=tup.v_tilde))
    return [instances.loads(instances.dumps(o))[0] for o in objs]


def test_criterion_9_oracle():
    start = time.perf_counter()
    insts = oracle_instances()
    worst = 0.0
    paths = set()
    for inst in insts:
        assert inst.tuple.h_dim <= 400
        rep = oracle.compare(inst, p=3)
        worst = max(worst, rep.max_deviation)
        paths |= {name.split("[")[0] for name in rep.deviations}
    elapsed = time.perf_counter() - start
    ok = len(insts) == 20 and worst <= 1e-10 and elapsed <= 120
    record(9, ok, f"{len(insts)} instances, paths {sorted(paths)}, worst deviation {worst:.2e}, {elapsed:.1f} s")
    assert ok
