"""Write the small instance files used by the CLI tests and README examples."""

import pathlib
import sys

import numpy as np

from bqslab.covariant import compress
from bqslab.fock_model import induced_rep
from bqslab.instances import instance_to_dict, save
from bqslab.tensor_core import Subspace, swap_spec


def fixtures():
    out = {}
    bidisc = swap_spec((1, 1))
    a = 1 / np.sqrt(2)
    nil = np.array([[0, a], [0, 0]])
    out["nilpotent"] = instance_to_dict(bidisc, {"kind": "matrix", "h_dim": 2}, tuple_mats=[nil, nil], name="nilpotent")
    nine = np.array([[0, 0.9], [0, 0]])
    out["point_nine"] = instance_to_dict(bidisc, {"kind": "matrix", "h_dim": 2}, tuple_mats=[nine, nine], name="point-nine")
    out["unitary"] = instance_to_dict(swap_spec((1,)), {"kind": "matrix", "h_dim": 1}, tuple_mats=[np.eye(1)], name="unitary")
    rep = induced_rep(bidisc, 1, 4, 1)
    m = rep.module
    amb = {"kind": "induced", "h_dim": 1, "p": 4, "g": 1}
    out["bidisc"] = instance_to_dict(bidisc, amb, name="bidisc")
    kq = np.column_stack([m.vector((0, b), [1], [1]) for b in range(3)])
    out["kq"] = instance_to_dict(bidisc, amb, subspace=kq, name="k-q")
    perp = np.column_stack([m.vector((0, b), [1], [1]) for b in range(5)])
    out["z1_perp"] = instance_to_dict(bidisc, amb, subspace=perp, name="z1-perp")
    out["zero"] = instance_to_dict(bidisc, amb, subspace=np.zeros((m.dim, 0)), name="zero")
    # compression of the bidisc creation operators to K = span{z2^b : b <= 2}
    k_sub = Subspace(kq)
    ct = compress(rep.tuple, k_sub)
    out["compressed_qs"] = instance_to_dict(bidisc, {"kind": "matrix", "h_dim": 3}, tuple_mats=ct.v_tilde, name="compressed-qs")
    disc = swap_spec((1,))
    rep1 = induced_rep(disc, 1, 8, 4)
    m1 = rep1.module
    amb1 = {"kind": "induced", "h_dim": 1, "p": 8, "g": 4}
    z2 = m1.vector((2,), [1], [1])[:, None]
    z1 = m1.vector((1,), [1], [1])[:, None]
    out["z2_factor"] = instance_to_dict(disc, amb1, subspace=z1, symbol=z2, name="z-squared")
    out["z2_factor_zero"] = instance_to_dict(disc, amb1, subspace=np.zeros((m1.dim, 0)), symbol=z2, name="z-squared-zero")
    kt = np.column_stack([m1.vector((0,), [1], [1]), z1])
    out["z2_factor_full"] = instance_to_dict(disc, amb1, subspace=kt, symbol=z2, name="z-squared-full")
    return out


def main(target):
    target = pathlib.Path(target)
    target.mkdir(parents=True, exist_ok=True)
    for name, obj in fixtures().items():
        save(target / f"{name}.jsonl", [obj])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parents[1] / "tests" / "data")
