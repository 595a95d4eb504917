import json

import numpy as np
import pytest

from bqslab import cli, instances
from bqslab.errors import InputError

from conftest import DATA


def run(tmp_path, *argv):
    out = tmp_path / "out.json"
    code = cli.main([*map(str, argv), "--out", str(out)])
    return code, json.loads(out.read_text())


def check(entry, name):
    return next(c for c in entry["checks"] if c["name"] == name)


# ---------------------------------------------------------------- instance files


def test_dumps_is_deterministic():
    obj = {"b": [1.0, 0.1 + 0.2], "a": {"y": 2, "x": None}}
    assert instances.dumps(obj) == instances.dumps(json.loads(instances.dumps(obj)))
    assert instances.dumps(obj).index('"a"') < instances.dumps(obj).index('"b"')


def test_round_trip_of_fixture():
    inst = instances.load(DATA / "nilpotent.jsonl")[0]
    assert inst.tuple.h_dim == 2 and inst.spec.k == 2
    again = instances.loads(instances.dumps(instances.instance_to_dict(
        inst.spec, {"kind": "matrix", "h_dim": 2}, tuple_mats=inst.tuple.v_tilde, name="nilpotent")))[0]
    assert again.digest == inst.digest
    for a, b in zip(again.tuple.v_tilde, inst.tuple.v_tilde):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("line,needle", [
    ("{not json", "invalid JSON"),
    ('{"format": 9}', "unsupported format"),
    ('{"format": 1, "spec": {"dims": [1]}, "ambient": {"kind": "other"}}', "ambient.kind"),
])
def test_parse_errors_name_the_line(line, needle):
    with pytest.raises(InputError) as exc:
        instances.loads("\n" + line + "\n", source="f.jsonl")
    assert str(exc.value).startswith("f.jsonl:2:") and needle in str(exc.value)


def test_empty_file_rejected():
    with pytest.raises(InputError):
        instances.loads("\n\n")


def test_cli_input_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"format": 1}\n')
    code, report = run(tmp_path, "validate", bad)
    assert code == 2 and report["exit_code"] == 2
    assert "bad.jsonl:1" in capsys.readouterr().err


# ---------------------------------------------------------------- validate


def test_validate_nilpotent(tmp_path):
    code, report = run(tmp_path, "validate", DATA / "nilpotent.jsonl")
    e = report["instances"][0]
    assert code == 0
    assert check(e, "brehmer")["verdict"] and check(e, "pure")["verdict"]
    assert e["values"]["purity_degree"] == {"0": 2, "1": 2}
    props = {p["name"]: p["value"] for p in e["properties"]}
    assert not props["isometric"] and not props["doubly_commuting"]


def test_validate_bidisc(tmp_path):
    assert run(tmp_path, "validate", DATA / "bidisc.jsonl")[0] == 0


def test_validate_point_nine(tmp_path):
    code, report = run(tmp_path, "validate", DATA / "point_nine.jsonl")
    e = report["instances"][0]
    assert code == 1 and not check(e, "brehmer")["verdict"]
    assert e["values"]["min_eigenvalue"] == pytest.approx(-0.62)


# ---------------------------------------------------------------- bqs


def test_bqs_kq(tmp_path):
    code, report = run(tmp_path, "bqs", DATA / "kq.jsonl")
    e = report["instances"][0]
    assert code == 1
    assert check(e, "bqs")["residual"] == pytest.approx(1.0, abs=1e-9)
    assert e["values"]["main_cross_agreement"]


@pytest.mark.parametrize("name", ["z1_perp", "zero"])
def test_bqs_passes(tmp_path, name):
    assert run(tmp_path, "bqs", DATA / f"{name}.jsonl")[0] == 0


# ---------------------------------------------------------------- dilate


def test_dilate_nilpotent(tmp_path):
    code, report = run(tmp_path, "dilate", DATA / "nilpotent.jsonl", "--p", 1)
    e = report["instances"][0]
    assert check(e, "isometry")["residual"] <= 1e-12
    assert check(e, "equivalence")["residual"] <= 1e-12
    # the range span{1, (z1+z2)/sqrt2} has a complement that is not of Beurling type
    assert code == 1 and not check(e, "range_beurling")["verdict"]


def test_dilate_unitary_not_pure(tmp_path, capsys):
    code, report = run(tmp_path, "dilate", DATA / "unitary.jsonl")
    assert code == 3
    err = report["instances"][0]["error"]
    assert err["type"] == "NotPureError"
    assert err["message"] == "Brehmer holds but tuple not pure; tail bound 1.0"
    assert "not pure" in capsys.readouterr().err


def test_dilate_point_nine_brehmer(tmp_path):
    code, report = run(tmp_path, "dilate", DATA / "point_nine.jsonl")
    assert code == 3 and report["instances"][0]["error"]["type"] == "BrehmerError"


def test_dilate_compressed_quotient(tmp_path):
    code, report = run(tmp_path, "dilate", DATA / "compressed_qs.jsonl")
    assert check(report["instances"][0], "isometry")["residual"] <= 1e-8


# ---------------------------------------------------------------- factor


def test_factor_z_squared(tmp_path):
    code, report = run(tmp_path, "factor", DATA / "z2_factor.jsonl")
    e = report["instances"][0]
    assert code == 0
    assert check(e, "factorization")["residual"] <= 1e-12
    props = {p["name"]: p["value"] for p in e["properties"]}
    assert props["theta_inner"] and not props["phi_unitary"] and not props["psi_unitary"]
    assert props["both_nonunitary_predicted"]


@pytest.mark.parametrize("name,unitary", [("z2_factor_zero", "psi_unitary"), ("z2_factor_full", "phi_unitary")])
def test_factor_trivial_subspaces(tmp_path, name, unitary):
    code, report = run(tmp_path, "factor", DATA / f"{name}.jsonl")
    props = {p["name"]: p["value"] for p in report["instances"][0]["properties"]}
    assert code == 0 and props[unitary] and not props["both_nonunitary_predicted"]


# ---------------------------------------------------------------- random and report


def test_random_qs_is_quotient(tmp_path):
    gen = tmp_path / "qs.jsonl"
    assert cli.main(["random", "--kind", "qs", "--seed", "7", "--count", "2", "--out", str(gen)]) == 0
    assert len(gen.read_text().splitlines()) == 2
    code, report = run(tmp_path, "bqs", gen)
    for e in report["instances"]:
        assert check(e, "quotient")["residual"] <= 1e-12


def test_random_tuple_is_pure(tmp_path):
    gen = tmp_path / "t.jsonl"
    assert cli.main(["random", "--kind", "tuple", "--seed", "1", "--h", "3", "--out", str(gen)]) == 0
    code, report = run(tmp_path, "validate", gen)
    e = report["instances"][0]
    assert check(e, "pure")["verdict"] and check(e, "commutation")["verdict"]


def test_random_symbol_runs(tmp_path):
    gen = tmp_path / "s.jsonl"
    assert cli.main(["random", "--kind", "symbol", "--seed", "3", "--out", str(gen)]) == 0
    assert instances.load(gen)[0].symbol is not None


def test_random_is_seeded(tmp_path, capsys):
    cli.main(["random", "--kind", "qs", "--seed", "5"])
    first = capsys.readouterr().out
    cli.main(["random", "--kind", "qs", "--seed", "5"])
    assert capsys.readouterr().out == first and first.count("\n") == 1


def test_random_tuple_rejects_matrix_dims():
    assert cli.main(["random", "--kind", "tuple", "--dims", "2,1"]) == 2


def test_report_is_reproducible(tmp_path):
    texts = []
    for _ in range(2):
        _, report = run(tmp_path, "report", DATA / "kq.jsonl")
        report.pop("wall_time")
        texts.append(instances.dumps(report))
    assert texts[0] == texts[1]
    e = json.loads(texts[0])["instances"][0]
    assert {"validate", "wold", "bqs", "oracle"} <= set(e["values"])
