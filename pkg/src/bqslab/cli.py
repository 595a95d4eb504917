"""Command line front end: every command reads instance files and prints a JSON report.

Exit codes: 0 when every verdict holds, 1 when some verdict is false, 2 for
input errors and 3 when an assumed identity or hypothesis fails numerically.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import analytic, beurling, corpus, covariant, dilation, fock_model, instances, oracle
from .errors import BrehmerError, HypothesisError, InputError, NotPureError, NumericalError
from .tensor_core import TruncatedFockModule, swap_spec

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
ORACLE_TOL = 1e-10


class Section:
    """Collects checks (verdicts that set the exit code) and properties (reported flags)."""

    def __init__(self):
        self.checks = []
        self.properties = []
        self.values = {}

    def check(self, name, residual, tol, verdict=None):
        residual = float(residual)
        ok = residual <= tol if verdict is None else bool(verdict)
        self.checks.append({"name": name, "residual": residual, "tolerance": float(tol), "verdict": ok})
        return ok

    def prop(self, name, value, residual, tol=None):
        entry = {"name": name, "value": bool(value), "residual": float(residual)}
        if tol is not None:
            entry["tolerance"] = float(tol)
        self.properties.append(entry)

    def to_dict(self):
        return {"checks": self.checks, "properties": self.properties, "values": self.values}


def _tol(args):
    return covariant.Tolerances(
        exact=args.tol_exact, thm=args.tol_thm, rank=args.tol_rank, psd=args.tol_psd, pure=args.tol_pure
    )


def _interior(inst, guard):
    """Interior of an induced instance, with the guard overridden when given."""
    if inst.rep is None:
        return None
    m = inst.rep.module
    if guard is None or guard == m.guard:
        return m.interior()
    return TruncatedFockModule(m.spec, m.h_dim, m.level_cap, guard).interior()


# ---------------------------------------------------------------------------
# per-instance commands


def run_validate(inst, args, tol, sec):
    tup = inst.tuple
    dom = _interior(inst, args.guard)
    rep = covariant.validate(tup, tol)
    sec.check("commutation", rep.max_residual, tol.exact)
    iso = covariant.is_isometric(tup, dom, tol)
    # descriptive, not validity conditions: contractive tuples need neither
    sec.prop("isometric", iso.max_residual <= tol.exact, iso.max_residual, tol.exact)
    if tup.k >= 2:
        dc = covariant.is_doubly_commuting(tup, dom, tol)
        sec.prop("doubly_commuting", dc.max_residual <= tol.exact, dc.max_residual, tol.exact)
    ok, lam = covariant.brehmer_check(tup, tol)
    sec.check("brehmer", max(0.0, -lam), tol.psd, ok)
    sec.values["min_eigenvalue"] = lam
    pur = covariant.purity_degree(tup, args.p_max, tol)
    last = max((v[-1] for v in pur.norms.values() if v), default=0.0)
    sec.check("pure", last, tol.pure, pur.pure)
    sec.values["purity_degree"] = {str(j): d for j, d in pur.degree.items()}


def run_bqs(inst, args, tol, sec):
    if inst.subspace is None:
        raise InputError("bqs needs a subspace in the instance")
    tup, k_sub = inst.tuple, inst.subspace
    module = inst.rep.module if inst.rep is not None else None
    cls = fock_model.classify_subspace(tup, k_sub, None, tol)
    if module is not None and k_sub.dim:
        top = module.indices(lambda n: max(n, default=0) == module.level_cap)
        sec.values["top_level_weight"] = float(np.linalg.norm(k_sub.basis[top, :]))
    sec.check("quotient", cls.quotient_residual, tol.exact)
    sec.prop("invariant", cls.invariant, cls.invariant_residual, tol.exact)
    sec.prop("reducing", cls.reducing, max(cls.invariant_residual, cls.coinvariant_residual), tol.exact)
    interior = _interior(inst, args.guard)
    rep = beurling.bqs_test(tup, k_sub, interior, tol)
    for (i, j), v in sorted(rep.main.items()):
        sec.check(f"main[{i},{j}]", v, tol.thm)
    for (i, j), v in sorted(rep.cross.items()):
        sec.check(f"cross[{i},{j}]", v, tol.thm)
    sec.check("bqs", rep.residual, tol.thm)
    sec.values["main_cross_agreement"] = rep.verdict_main == rep.verdict_cross


def run_dilate(inst, args, tol, sec):
    tup = inst.tuple
    ok, lam = covariant.brehmer_check(tup, tol)
    if not ok:
        raise BrehmerError(f"alternating sum is not PSD (min eigenvalue {lam:.6g})", -lam)
    pur = covariant.purity_degree(tup, args.p_max, tol)
    if not pur.pure:
        tb = dilation.tail_bound(tup, args.p)
        raise NotPureError(f"Brehmer holds but tuple not pure; tail bound {round(tb, 12)}", tb)
    res = dilation.build_dilation(tup, args.p, args.guard or 1, tol)
    sec.check("isometry", res.isometry_residual, tol.thm)
    sec.check("intertwining", res.max_intertwine, tol.exact)
    sec.values["purity_degree"] = {str(j): d for j, d in pur.degree.items()}
    sec.values["tail_bound"] = dilation.tail_bound(tup, args.p)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(3):
        h = rng.normal(size=tup.h_dim) + 1j * rng.normal(size=tup.h_dim)
        h /= np.linalg.norm(h) or 1.0
        worst = max(worst, dilation.pi_norm_check(tup, h, max(args.p, 1), tol).gap)
    sec.check("norm_identity", worst, tol.thm)
    eq = dilation.beurling_equivalence_check(tup, args.p, args.guard or 1, args.p_max, tol)
    if eq.bqs_of_range is None:
        sec.check("range_quotient", float("inf"), tol.thm, False)
    else:
        sec.check("range_beurling", eq.bqs_of_range.residual, tol.thm)
    sec.check("equivalence", eq.equivalence_residual, tol.thm)


def run_factor(inst, args, tol, sec):
    if inst.rep is None or inst.symbol is None or inst.subspace is None:
        raise InputError("factor needs an induced instance with a symbol and a subspace")
    rep = inst.rep
    m = rep.module
    src = fock_model.induced_rep(inst.spec, inst.symbol.shape[1], m.level_cap, m.guard)
    op = analytic.from_symbol(src, rep, inst.symbol, tol=tol)
    sec.check("theta_intertwining", max(op.intertwine_residuals.values()), tol.exact)
    cls = analytic.classify(op, tol)
    sec.prop("theta_inner", cls.inner, cls.isometry_residual, tol.thm)
    sec.prop("theta_outer", cls.outer, cls.interior_dim - cls.interior_rank)
    fac = analytic.factor_from_invariant(op, inst.subspace, tol)
    sec.check("factorization", fac.residual, tol.thm)
    flags = {}
    for name, part in (("phi", fac.phi), ("psi", fac.psi)):
        c = analytic.classify(part, tol)
        flags[name] = c.unitary
        sec.prop(f"{name}_unitary", c.unitary, max(c.isometry_residual, c.interior_dim - c.interior_rank))
    nu = analytic.nonunitary_classify(op, inst.subspace, tol)
    sec.prop("both_nonunitary_predicted", nu.verdict, 0.0)
    agree = nu.verdict == (not flags["phi"] and not flags["psi"])
    sec.check("nonunitary_agreement", 0.0 if agree else 1.0, 0.5)
    sec.values["nonunitary_detail"] = {k: v for k, v in nu.detail.items() if isinstance(v, (int, float))}


def run_wold(inst, args, tol, sec):
    tup = inst.tuple
    p = args.p if inst.rep is None else inst.rep.module.level_cap
    w = fock_model.wandering_subspace(tup, tol)
    rep = fock_model.gws_check(tup, w, p, tol=tol)
    sec.check("wandering_orthogonal", rep.overlap, tol.exact, rep.orthogonal)
    sec.check("wandering_spanning", rep.spanning_residual, tol.exact, rep.spanning)
    sec.values["wandering_dim"] = w.dim


def run_oracle(inst, args, tol, sec):
    rep = oracle.compare(inst, p=max(args.p, 1), tol=tol)
    for name, v in sorted(rep.deviations.items()):
        sec.check(f"deviation[{name}]", v, ORACLE_TOL)
    sec.values["max_deviation"] = rep.max_deviation
    if rep.max_deviation > ORACLE_TOL:
        raise NumericalError(f"oracle deviation {rep.max_deviation:.3e} above {ORACLE_TOL:g}", rep.max_deviation)


def run_report(inst, args, tol, sec):
    """All applicable commands; each contributes a nested section."""
    parts = [("validate", run_validate), ("wold", run_wold)]
    if inst.subspace is not None:
        parts.append(("bqs", run_bqs))
    if inst.rep is None:
        parts.append(("dilate", run_dilate))
    if inst.symbol is not None and inst.subspace is not None:
        parts.append(("factor", run_factor))
    if inst.tuple.h_dim <= oracle.ORACLE_MAX_DIM:
        parts.append(("oracle", run_oracle))
    codes = []
    for name, fn in parts:
        sub = Section()
        out = _guarded(fn, inst, args, tol, sub)
        codes.append(out["exit_code"])
        sec.values[name] = out
    for name, code in zip([p[0] for p in parts], codes):
        sec.check(f"{name}_ok", 0.0 if code == EXIT_OK else 1.0, 0.5)


COMMANDS = {
    "validate": run_validate,
    "bqs": run_bqs,
    "dilate": run_dilate,
    "factor": run_factor,
    "wold": run_wold,
    "oracle": run_oracle,
    "report": run_report,
}


def _guarded(fn, inst, args, tol, sec):
    """Run one command on one instance and fold errors into the section."""
    err = None
    try:
        fn(inst, args, tol, sec)
        code = EXIT_OK if all(c["verdict"] for c in sec.checks) else EXIT_FALSE
    except InputError as exc:
        code, err = EXIT_INPUT, exc
    except (HypothesisError, NumericalError) as exc:
        code, err = EXIT_NUMERIC, exc
    out = sec.to_dict()
    out["exit_code"] = code
    if err is not None:
        out["error"] = {"type": type(err).__name__, "message": str(err)}
        if getattr(err, "residual", None) is not None:
            out["error"]["residual"] = float(err.residual)
    return out


def _combine(codes):
    for code in (EXIT_INPUT, EXIT_NUMERIC, EXIT_FALSE):
        if code in codes:
            return code
    return EXIT_OK


# ---------------------------------------------------------------------------
# random instances


def _dims(args):
    if args.dims:
        try:
            return tuple(int(x) for x in args.dims.split(","))
        except ValueError as exc:
            raise InputError(f"--dims must be comma separated integers, got {args.dims!r}") from exc
    return (1,) * args.k


def generate(args):
    """Seeded instance dictionaries for ``random``."""
    rng = np.random.default_rng(args.seed)
    dims = _dims(args)
    spec = swap_spec(dims)
    out = []
    if args.kind == "tuple":
        if any(d != 1 for d in dims):
            raise InputError("random tuples are generated for scalar correspondences (all dims 1)")
        for a in range(args.count):
            tup = corpus.random_pure_tuple(rng, len(dims), args.h, spectral_radius=args.spectral_radius)
            amb = {"kind": "matrix", "h_dim": args.h}
            out.append(instances.instance_to_dict(spec, amb, tuple_mats=tup.v_tilde, name=f"tuple-{args.seed}-{a}"))
        return out
    p = args.p
    g = args.guard or 1
    rep = fock_model.induced_rep(spec, args.h, p, g)
    amb = {"kind": "induced", "h_dim": args.h, "p": p, "g": g}
    for a in range(args.count):
        name = f"{args.kind}-{args.seed}-{a}"
        if args.kind == "qs":
            sub = corpus.random_qs(rep, rng)
            out.append(instances.instance_to_dict(spec, amb, subspace=sub.basis, name=name))
        elif args.kind == "dcs-invariant":
            sub = corpus.random_dcs(rep, rng, n_generators=int(rng.integers(1, args.h + 1))).subspace
            out.append(instances.instance_to_dict(spec, amb, subspace=sub.basis, name=name))
        else:
            sym = corpus.random_symbol(rep, rng)
            out.append(instances.instance_to_dict(spec, amb, symbol=sym[:, None], name=name))
    return out


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="bqslab", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=4, help="level cap for dilations and wandering checks")
    common.add_argument("--guard", type=int, default=None, help="guard band overriding the instance's")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--p-max", type=int, default=256, help="search bound for the purity degree")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    defaults = covariant.DEFAULT_TOL
    for name in ("exact", "thm", "rank", "psd", "pure"):
        common.add_argument(f"--tol-{name}", type=float, default=getattr(defaults, name))
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("file")
    rp = sub.add_parser("random", parents=[common])
    rp.add_argument("--kind", choices=["qs", "dcs-invariant", "symbol", "tuple"], required=True)
    rp.add_argument("--count", type=int, default=1)
    rp.add_argument("--k", type=int, default=2)
    rp.add_argument("--dims", default=None, help="comma separated correspondence dimensions")
    rp.add_argument("--h", type=int, default=1, help="dimension of the coefficient space")
    rp.add_argument("--spectral-radius", type=float, default=0.8)
    return ap


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "random":
        try:
            objs = generate(args)
        except InputError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        _emit("".join(instances.dumps(o) + "\n" for o in objs), args.out)
        return EXIT_OK
    start = time.perf_counter()
    tol = _tol(args)
    report = {
        "format": instances.FORMAT,
        "command": args.command,
        "seed": args.seed,
        "tolerances": {"exact": tol.exact, "thm": tol.thm, "rank": tol.rank, "psd": tol.psd, "pure": tol.pure},
        "flags": {"p": args.p, "guard": args.guard, "p_max": args.p_max},
    }
    try:
        insts = instances.load(args.file)
    except InputError as exc:
        report["error"] = {"type": "InputError", "message": str(exc)}
        report["exit_code"] = EXIT_INPUT
        report["wall_time"] = time.perf_counter() - start
        _emit(instances.dumps(report) + "\n", args.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    entries = []
    for inst in insts:
        out = _guarded(COMMANDS[args.command], inst, args, tol, Section())
        out["digest"] = inst.digest
        if inst.name:
            out["name"] = inst.name
        entries.append(out)
        if "error" in out:
            print(f"error: {out['error']['message']}", file=sys.stderr)
    code = _combine([e["exit_code"] for e in entries])
    report["instances"] = entries
    report["exit_code"] = code
    report["wall_time"] = time.perf_counter() - start
    _emit(instances.dumps(report) + "\n", args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "build_parser", "generate", "Section", "COMMANDS"]
