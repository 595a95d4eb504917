"""Instance files and reports as JSON text with explicit ``[re, im]`` number pairs.

An instance file holds one JSON object per line. Each object names the
product system, the ambient space (explicit matrices or an induced
truncated Fock module) and optionally a subspace and a symbol.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .covariant import CovariantTuple
from .errors import InputError
from .fock_model import InducedRep, induced_rep
from .tensor_core import ProductSystemSpec, Subspace, orth

FORMAT = 1


# ---------------------------------------------------------------------------
# deterministic text output


def _fmt_float(x):
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    s = format(x, ".17g")
    if all(c not in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj):
    """Compact JSON with floats at 17 significant digits and sorted keys."""
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def encode_matrix(m):
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def encode_vectors(v):
    """Columns of ``v`` as a list of vectors."""
    v = np.asarray(v, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    return [[[float(z.real), float(z.imag)] for z in col] for col in v.T]


def _decode_number(x, where):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(a, (int, float)) for a in x):
        return complex(x[0], x[1])
    raise InputError(f"{where}: expected a number or an [re, im] pair, got {x!r}")


def decode_matrix(rows, where):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputError(f"{where}: expected a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputError(f"{where}: ragged rows")
    return np.array([[_decode_number(x, where) for x in r] for r in rows], dtype=complex)


def decode_vectors(vectors, length, where):
    if not isinstance(vectors, list):
        raise InputError(f"{where}: expected a list of vectors")
    cols = []
    for a, vec in enumerate(vectors):
        if not isinstance(vec, list) or len(vec) != length:
            raise InputError(f"{where}: vector {a} must have length {length}")
        cols.append([_decode_number(x, where) for x in vec])
    if not cols:
        return np.zeros((length, 0), dtype=complex)
    return np.array(cols, dtype=complex).T


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True, eq=False)
class Instance:
    """A parsed instance; ``rep`` is set for induced ambients."""

    spec: ProductSystemSpec
    tuple: CovariantTuple
    rep: InducedRep | None
    subspace: Subspace | None
    symbol: np.ndarray | None
    raw: dict
    name: str = ""

    @property
    def interior(self):
        return self.rep.interior() if self.rep is not None else None

    @property
    def digest(self):
        return hashlib.sha256(dumps(self.raw).encode()).hexdigest()


def _spec_from(obj, where):
    if not isinstance(obj, dict) or "dims" not in obj:
        raise InputError(f"{where}: spec needs 'dims'")
    dims = obj["dims"]
    if "k" in obj and obj["k"] != len(dims):
        raise InputError(f"{where}: k={obj['k']} does not match dims {dims}")
    flips = {}
    for f in obj.get("flips", []) or []:
        try:
            key = (int(f["i"]), int(f["j"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{where}: flip entries need integer 'i' and 'j'") from exc
        flips[key] = decode_matrix(f.get("matrix"), f"{where}: flip {key}")
    return ProductSystemSpec(tuple(dims), flips)


def instance_from_dict(obj, where="instance"):
    """Build an :class:`Instance`, checking every shape before any computation."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object")
    if obj.get("format", FORMAT) != FORMAT:
        raise InputError(f"{where}: unsupported format {obj.get('format')}")
    spec = _spec_from(obj.get("spec"), where)
    amb = obj.get("ambient")
    if not isinstance(amb, dict) or amb.get("kind") not in ("matrix", "induced"):
        raise InputError(f"{where}: ambient.kind must be 'matrix' or 'induced'")
    rep = None
    if amb["kind"] == "induced":
        try:
            h, p, g = int(amb["h_dim"]), int(amb["p"]), int(amb.get("g", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{where}: induced ambient needs integer h_dim, p and g") from exc
        rep = induced_rep(spec, h, p, g)
        tup = rep.tuple
    else:
        try:
            h = int(amb["h_dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{where}: matrix ambient needs integer h_dim") from exc
        mats = obj.get("tuple")
        if not isinstance(mats, list) or len(mats) != spec.k:
            raise InputError(f"{where}: 'tuple' must list {spec.k} matrices")
        ops = []
        for i, m in enumerate(mats):
            a = decode_matrix(m, f"{where}: tuple[{i}]")
            want = (h, spec.dims[i] * h)
            if a.shape != want:
                raise InputError(f"{where}: tuple[{i}] has shape {a.shape}, expected {want}")
            ops.append(a)
        tup = CovariantTuple(spec, h, tuple(ops))
    sub = None
    if obj.get("subspace") is not None:
        vecs = decode_vectors(obj["subspace"], tup.h_dim, f"{where}: subspace")
        sub = Subspace(orth(vecs)) if vecs.shape[1] else Subspace.zero(tup.h_dim)
    sym = None
    if obj.get("symbol") is not None:
        sym = decode_matrix(obj["symbol"], f"{where}: symbol")
        if sym.shape[0] != tup.h_dim:
            raise InputError(f"{where}: symbol has {sym.shape[0]} rows, expected {tup.h_dim}")
    return Instance(spec, tup, rep, sub, sym, obj, str(obj.get("name", "")))


def instance_to_dict(spec, ambient, tuple_mats=None, subspace=None, symbol=None, name=""):
    """Inverse of :func:`instance_from_dict` for freshly generated data."""
    obj = {"format": FORMAT, "spec": {"k": spec.k, "dims": list(spec.dims)}, "ambient": dict(ambient)}
    swap = ProductSystemSpec(spec.dims)
    flips = [
        {"i": i, "j": j, "matrix": encode_matrix(t)}
        for (i, j), t in sorted(spec.flips.items())
        if not np.array_equal(t, swap.flips[(i, j)])
    ]
    if flips:
        obj["spec"]["flips"] = flips
    if tuple_mats is not None:
        obj["tuple"] = [encode_matrix(m) for m in tuple_mats]
    if subspace is not None:
        obj["subspace"] = encode_vectors(subspace)
    if symbol is not None:
        obj["symbol"] = encode_matrix(np.asarray(symbol).reshape(len(symbol), -1))
    if name:
        obj["name"] = name
    return obj


def loads(text, source="<string>"):
    """Parse every non-blank line of an instance file."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        where = f"{source}:{lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"{where}: invalid JSON ({exc.msg} at column {exc.colno})") from exc
        out.append(instance_from_dict(obj, where))
    if not out:
        raise InputError(f"{source}: no instances found")
    return out


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return loads(text, str(path))


def save(path, objs):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(dumps(obj) + "\n")


__all__ = [
    "FORMAT",
    "Instance",
    "dumps",
    "encode_matrix",
    "encode_vectors",
    "decode_matrix",
    "decode_vectors",
    "instance_from_dict",
    "instance_to_dict",
    "loads",
    "load",
    "save",
]
