"""JSON encoding of points, windows, pseudometrics, entourages and certificates.

Every number that is not a small structural integer (``M``, ``k``, lattice
coordinates, indices) is written as an exact rational string, ``"p"`` or
``"p/q"``.  Decoders raise :class:`SpecError` carrying a JSON path.
"""
from __future__ import annotations

from fractions import Fraction

from .coarse import BoundCertificate, certify_ball, certify_paper_e
from .entourages import (
    BoundProfile,
    Compose,
    Diagonal,
    Entourage,
    Explicit,
    Inverse,
    MetricBall,
    PaperE,
    ProductBox,
    Union,
)
from .errors import SpecError
from .model import (
    Atom,
    CoordinateAbs,
    Discrete,
    ExplicitSet,
    LatticeBox,
    LatticeF0,
    LatticeFn,
    LatticePoint,
    Pseudometric,
    PseudometricFamily,
    SumWithDiscrete,
    VectorGrid,
    VectorPoint,
    Window,
    as_rational,
    format_rational,
    metrize,
)

GROUND_KINDS = ("lattice", "vector", "atoms")


def _fail(path, msg):
    raise SpecError(msg, path)


def _obj(value, path, keys=None):
    if not isinstance(value, dict):
        _fail(path, f"expected an object, got {type(value).__name__}")
    if keys is not None:
        extra = set(value) - set(keys)
        if extra:
            _fail(path, f"unknown field(s) {sorted(extra)}")
    return value


def _list(value, path):
    if not isinstance(value, list):
        _fail(path, f"expected a list, got {type(value).__name__}")
    return value


def _nat(value, path):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        _fail(path, f"expected a natural number >= 1, got {value!r}")
    return value


def _rat(value, path):
    if isinstance(value, float):
        _fail(path, f"floating-point literal {value!r} is not allowed; write it as a string like \"3/2\"")
    try:
        return as_rational(value)
    except (TypeError, ValueError) as exc:
        _fail(path, str(exc))


def _single(value, path, allowed):
    _obj(value, path)
    if len(value) != 1:
        _fail(path, f"expected exactly one of {list(allowed)}, got {sorted(value)}")
    (tag, body), = value.items()
    if tag not in allowed:
        _fail(path, f"unknown variant {tag!r}; expected one of {list(allowed)}")
    return tag, body


# ---------------------------------------------------------------------------
# Points and windows
# ---------------------------------------------------------------------------

def encode_point(p):
    if isinstance(p, LatticePoint):
        return [p.a, p.b]
    if isinstance(p, VectorPoint):
        return [format_rational(c) for c in p.coords]
    if isinstance(p, Atom):
        return p.id
    raise TypeError(f"not a point: {p!r}")


def decode_point(value, ground: dict, path: str):
    kind = ground["kind"]
    if kind == "lattice":
        v = _list(value, path)
        if len(v) != 2:
            _fail(path, "a lattice point is [a, b]")
        return LatticePoint(_nat(v[0], path + "[0]"), _nat(v[1], path + "[1]"))
    if kind == "vector":
        v = _list(value, path)
        dim = ground.get("dimension")
        if dim is not None and len(v) != dim:
            _fail(path, f"expected {dim} coordinates, got {len(v)}")
        return VectorPoint(tuple(_rat(c, f"{path}[{i}]") for i, c in enumerate(v)))
    if not isinstance(value, str):
        _fail(path, "an atom is a string id")
    return Atom(value)


def encode_window(w: Window):
    if isinstance(w, LatticeBox):
        return {"lattice_box": [w.a_max, w.b_max]}
    if isinstance(w, VectorGrid):
        return {"vector_grid": {"dimension": w.dimension, "values": [format_rational(v) for v in w.values]}}
    if isinstance(w, ExplicitSet):
        return {"explicit": [encode_point(p) for p in w.points()]}
    raise TypeError(f"cannot encode window {w!r}")


def decode_window(value, ground: dict, path: str) -> Window:
    tag, body = _single(value, path, ("lattice_box", "vector_grid", "explicit"))
    p = f"{path}.{tag}"
    if tag == "lattice_box":
        if ground["kind"] != "lattice":
            _fail(p, "lattice_box window needs a lattice ground set")
        b = _list(body, p)
        if len(b) != 2:
            _fail(p, "lattice_box is [a_max, b_max]")
        return LatticeBox(_nat(b[0], p + "[0]"), _nat(b[1], p + "[1]"))
    if tag == "vector_grid":
        if ground["kind"] != "vector":
            _fail(p, "vector_grid window needs a vector ground set")
        _obj(body, p, ("dimension", "values"))
        dim = _nat(body.get("dimension"), p + ".dimension")
        if ground.get("dimension") not in (None, dim):
            _fail(p + ".dimension", "window dimension differs from the ground set")
        vals = [_rat(v, f"{p}.values[{i}]") for i, v in enumerate(_list(body.get("values"), p + ".values"))]
        if not vals:
            _fail(p + ".values", "need at least one value")
        return VectorGrid(dim, tuple(vals))
    return ExplicitSet(tuple(decode_point(v, ground, f"{p}[{i}]") for i, v in enumerate(_list(body, p))))


def parse_window_descriptor(text: str, ground: dict) -> Window:
    """``"AxB"`` shorthand for a lattice box, otherwise a JSON window object."""
    import json
    import re

    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if m:
        return decode_window({"lattice_box": [int(m.group(1)), int(m.group(2))]}, ground, "--window-override")
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"bad window descriptor: {exc.msg}", f"--window-override:{exc.colno}")
    return decode_window(value, ground, "--window-override")


# ---------------------------------------------------------------------------
# Pseudometrics and families
# ---------------------------------------------------------------------------

def encode_metric(d: Pseudometric) -> dict:
    if isinstance(d, LatticeF0):
        return {"kind": "lattice_f0"}
    if isinstance(d, LatticeFn):
        return {"kind": "lattice_fn", "n": d.n}
    if isinstance(d, CoordinateAbs):
        return {"kind": "coordinate", "n": d.n}
    if isinstance(d, Discrete):
        return {"kind": "discrete"}
    if isinstance(d, SumWithDiscrete):
        return {"kind": "sum_discrete", "base": encode_metric(d.base)}
    raise TypeError(f"cannot encode pseudometric {d!r}")


def decode_metric(value, path: str) -> Pseudometric:
    _obj(value, path)
    kind = value.get("kind")
    if kind == "lattice_f0":
        _obj(value, path, ("kind",))
        return LatticeF0()
    if kind == "lattice_fn":
        _obj(value, path, ("kind", "n"))
        return LatticeFn(_nat(value.get("n"), path + ".n"))
    if kind == "coordinate":
        _obj(value, path, ("kind", "n"))
        return CoordinateAbs(_nat(value.get("n"), path + ".n"))
    if kind == "discrete":
        _obj(value, path, ("kind",))
        return Discrete()
    if kind == "sum_discrete":
        _obj(value, path, ("kind", "base"))
        return SumWithDiscrete(decode_metric(value.get("base"), path + ".base"))
    _fail(path + ".kind", f"unknown pseudometric kind {kind!r}")


def encode_family(D: PseudometricFamily) -> dict:
    if D.schema is not None:
        return {"schema": D.schema, "bound": D.bound}
    return {"members": [encode_metric(d) for d in D]}


def decode_family(value, path: str) -> PseudometricFamily:
    _obj(value, path, ("schema", "bound", "members", "metrize"))
    if "members" in value:
        if "schema" in value:
            _fail(path, "give either members or schema, not both")
        members = [decode_metric(m, f"{path}.members[{i}]") for i, m in enumerate(_list(value["members"], path + ".members"))]
        try:
            D = PseudometricFamily(tuple(members))
        except ValueError as exc:
            _fail(path + ".members", str(exc))
    else:
        schema = value.get("schema")
        if schema not in ("lattice", "coordinates"):
            _fail(path + ".schema", f"unknown schema {schema!r}")
        bound = value.get("bound")
        if isinstance(bound, bool) or not isinstance(bound, int) or bound < 0:
            _fail(path + ".bound", "bound must be a nonnegative integer")
        if schema == "coordinates":
            _nat(bound, path + ".bound")
        D = PseudometricFamily.materialize(schema, bound)
    metrized = value.get("metrize", False)
    if not isinstance(metrized, bool):
        _fail(path + ".metrize", "expected true or false")
    return metrize(D) if metrized else D


# ---------------------------------------------------------------------------
# Profiles, certificates, entourages
# ---------------------------------------------------------------------------

def encode_profile(S: BoundProfile) -> dict:
    return {"bounds": {str(k): format_rational(r) for k, r in S.explicit}, "default": format_rational(S.default)}


def decode_profile(value, path: str) -> BoundProfile:
    _obj(value, path, ("bounds", "default"))
    bounds = _obj(value.get("bounds", {}), path + ".bounds")
    items = []
    for k, r in bounds.items():
        if not k.isdigit() or int(k) < 1:
            _fail(f"{path}.bounds.{k}", "profile indices are naturals >= 1")
        r = _rat(r, f"{path}.bounds.{k}")
        if r < 0:
            _fail(f"{path}.bounds.{k}", "bounds must be >= 0")
        items.append((int(k), r))
    default = _rat(value.get("default", "0"), path + ".default")
    if default < 0:
        _fail(path + ".default", "bounds must be >= 0")
    return BoundProfile(tuple(items), default)


def _encode_index(k) -> str:
    return str(k)


def _decode_index(k: str):
    return int(k) if k.isdigit() else k


def encode_certificate(c: BoundCertificate) -> dict:
    out = {"bounds": {_encode_index(k): format_rational(r) for k, r in c.per_index}}
    if c.default is not None:
        out["default"] = format_rational(c.default)
    return out


def decode_certificate(value, path: str) -> BoundCertificate:
    _obj(value, path)
    if "derive" in value:
        _obj(value, path, ("derive", "M", "stripes", "metric", "radius"))
        how = value["derive"]
        if how == "paper_e":
            return certify_paper_e(_nat(value.get("M"), path + ".M"), decode_profile(value.get("stripes", {}), path + ".stripes"))
        if how == "ball":
            return certify_ball(decode_metric(value.get("metric"), path + ".metric"), _rat(value.get("radius"), path + ".radius"))
        _fail(path + ".derive", f"unknown derivation {how!r}")
    _obj(value, path, ("bounds", "default"))
    per = []
    for k, r in _obj(value.get("bounds", {}), path + ".bounds").items():
        r = _rat(r, f"{path}.bounds.{k}")
        if r < 0:
            _fail(f"{path}.bounds.{k}", "bounds must be >= 0")
        per.append((_decode_index(k), r))
    default = None
    if value.get("default") is not None:
        default = _rat(value["default"], path + ".default")
        if default < 0:
            _fail(path + ".default", "bounds must be >= 0")
    return BoundCertificate(tuple(per), default)


_ENTOURAGE_TAGS = ("explicit", "diagonal", "ball", "box", "paper_e", "union", "inverse", "compose", "ref")


def encode_entourage(E: Entourage):
    if isinstance(E, Explicit):
        pairs = sorted(([encode_point(x), encode_point(y)] for x, y in E.pairs), key=repr)
        return {"explicit": pairs}
    if isinstance(E, Diagonal):
        return {"diagonal": {}}
    if isinstance(E, MetricBall):
        return {"ball": {"metric": encode_metric(E.d), "radius": format_rational(E.r)}}
    if isinstance(E, ProductBox):
        return {"box": {"k": E.k, "bounds": encode_profile(E.bounds)}}
    if isinstance(E, PaperE):
        return {"paper_e": {"M": E.M, "stripes": encode_profile(E.stripes)}}
    if isinstance(E, Union):
        return {"union": [encode_entourage(F) for F in E.parts]}
    if isinstance(E, Inverse):
        return {"inverse": encode_entourage(E.inner)}
    if isinstance(E, Compose):
        return {"compose": [encode_entourage(E.left), encode_entourage(E.right)]}
    raise TypeError(f"cannot encode entourage {E!r}")


def decode_entourage(value, ground: dict, path: str, resolve=None) -> Entourage:
    """Decode one entourage; ``resolve(name, path)`` handles ``{"ref": name}``."""
    tag, body = _single(value, path, _ENTOURAGE_TAGS)
    p = f"{path}.{tag}"
    if tag == "ref":
        if resolve is None:
            _fail(p, "references are only allowed inside a spec document")
        return resolve(body, p)
    if tag == "explicit":
        pairs = []
        for i, pr in enumerate(_list(body, p)):
            pr = _list(pr, f"{p}[{i}]")
            if len(pr) != 2:
                _fail(f"{p}[{i}]", "a pair is [x, y]")
            pairs.append((decode_point(pr[0], ground, f"{p}[{i}][0]"), decode_point(pr[1], ground, f"{p}[{i}][1]")))
        return Explicit(frozenset(pairs))
    if tag == "diagonal":
        _obj(body, p, ())
        return Diagonal()
    if tag == "ball":
        _obj(body, p, ("metric", "radius"))
        r = _rat(body.get("radius"), p + ".radius")
        if r < 0:
            _fail(p + ".radius", "radius must be >= 0")
        return MetricBall(decode_metric(body.get("metric"), p + ".metric"), r)
    if tag == "box":
        _obj(body, p, ("k", "bounds"))
        return ProductBox(_nat(body.get("k"), p + ".k"), decode_profile(body.get("bounds", {}), p + ".bounds"))
    if tag == "paper_e":
        _obj(body, p, ("M", "stripes"))
        return PaperE(_nat(body.get("M"), p + ".M"), decode_profile(body.get("stripes", {}), p + ".stripes"))
    if tag == "union":
        return Union(tuple(decode_entourage(F, ground, f"{p}[{i}]", resolve) for i, F in enumerate(_list(body, p))))
    if tag == "inverse":
        return Inverse(decode_entourage(body, ground, p, resolve))
    parts = _list(body, p)
    if len(parts) != 2:
        _fail(p, "compose takes exactly two entourages")
    return Compose(decode_entourage(parts[0], ground, p + "[0]", resolve), decode_entourage(parts[1], ground, p + "[1]", resolve))
