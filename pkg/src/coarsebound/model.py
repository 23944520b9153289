"""Ground sets, finite windows, exact arithmetic and pseudometric families.

Every distance is an exact :class:`fractions.Fraction`.  Window-wide
evaluation goes through :meth:`Pseudometric.pairwise`, which returns integer
numerators over one shared denominator so that bulk comparisons stay exact
while running on numpy arrays.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import BudgetExceededError, CoarseError, KindMismatchError

Rational = Fraction
IndexTag = Hashable

DEFAULT_BUDGET = 10**7

# int64 is used only while magnitudes stay below this; sums of two
# differences then still fit.
_INT64_SAFE = 2**60

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def as_rational(value) -> Fraction:
    """Coerce ``value`` to an exact rational.

    Accepts ints, Fractions and strings of the form ``"p"`` or ``"p/q"``.
    Floats are rejected because they are not exact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL_RE.match(value)
        if not m:
            raise ValueError(f"not an exact rational literal: {value!r}")
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den == 0:
            raise ValueError(f"zero denominator in {value!r}")
        return Fraction(int(m.group(1)), den)
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass a string like '3/2' or a Fraction")
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_rational(r: Fraction) -> str:
    r = Fraction(r)
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def nat_ceil(r) -> int:
    """Smallest natural number (naturals start at 1) that is >= ``r``."""
    return max(1, math.ceil(Fraction(r)))


class Budget:
    """Counter of pair evaluations shared by one logical operation."""

    def __init__(self, limit: int = DEFAULT_BUDGET):
        if limit < 0:
            raise ValueError("budget limit must be nonnegative")
        self.limit = int(limit)
        self.used = 0

    def charge(self, n: int, what: str = "") -> None:
        if self.used + n > self.limit:
            raise BudgetExceededError(n, self.used, self.limit, what)
        self.used += n

    def __repr__(self) -> str:
        return f"Budget(used={self.used}, limit={self.limit})"


def as_budget(budget: Budget | int | None) -> Budget:
    if budget is None:
        return Budget()
    if isinstance(budget, Budget):
        return budget
    return Budget(int(budget))


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------

def _check_natural(name: str, value) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValueError(f"{name} must be a natural number >= 1, got {value!r}")


@dataclass(frozen=True, order=True)
class LatticePoint:
    """A point ``(a, b)`` of N x N."""

    a: int
    b: int

    def __post_init__(self):
        _check_natural("a", self.a)
        _check_natural("b", self.b)

    def __repr__(self) -> str:
        return f"({self.a},{self.b})"


@dataclass(frozen=True)
class VectorPoint:
    """A point of R^N truncated to its first ``dimension`` coordinates."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(as_rational(c) for c in self.coords)
        if not coords:
            raise ValueError("a VectorPoint needs at least one coordinate")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *values) -> "VectorPoint":
        return cls(tuple(values))

    @classmethod
    def zero(cls, dimension: int) -> "VectorPoint":
        return cls((0,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def __repr__(self) -> str:
        return "(" + ",".join(format_rational(c) for c in self.coords) + ")"


@dataclass(frozen=True, order=True)
class Atom:
    """A named element of an explicit finite set."""

    id: str

    def __post_init__(self):
        if not isinstance(self.id, str):
            raise TypeError("Atom ids are strings")

    def __repr__(self) -> str:
        return self.id


Point = Union[LatticePoint, VectorPoint, Atom]
Pair = tuple


def point_key(p: Point) -> tuple:
    """Total lexicographic sort key across all point variants."""
    if isinstance(p, LatticePoint):
        return (0, p.a, p.b)
    if isinstance(p, VectorPoint):
        return (1, p.dimension, p.coords)
    if isinstance(p, Atom):
        return (2, p.id)
    raise TypeError(f"not a point: {p!r}")


# ---------------------------------------------------------------------------
# Windows
# ---------------------------------------------------------------------------

def _int_array(values: Iterable[int]) -> np.ndarray:
    values = list(values)
    if not values or max(abs(v) for v in values) < _INT64_SAFE:
        return np.asarray(values, dtype=np.int64)
    return np.asarray(values, dtype=object)


class PointTable:
    """Array view of a window's points used by the vectorized evaluators.

    For lattice windows ``a`` and ``b`` hold the coordinates.  For vector
    windows ``coords`` holds the coordinates scaled by ``denom`` so they are
    integers.
    """

    def __init__(self, points: Sequence[Point]):
        self.points = tuple(points)
        self.n = len(self.points)
        self.index = {p: i for i, p in enumerate(self.points)}
        self.kind = None
        self.a = self.b = self.coords = None
        self.denom = 1
        self.dimension = 0
        if self.points and all(isinstance(p, LatticePoint) for p in self.points):
            self.kind = "lattice"
            self.a = _int_array(p.a for p in self.points)
            self.b = _int_array(p.b for p in self.points)
        elif self.points and all(isinstance(p, VectorPoint) for p in self.points):
            dims = {p.dimension for p in self.points}
            if len(dims) != 1:
                raise KindMismatchError("vector points of mixed dimension in one window")
            self.kind = "vector"
            self.dimension = dims.pop()
            denom = 1
            for p in self.points:
                for c in p.coords:
                    denom = math.lcm(denom, c.denominator)
            self.denom = denom
            flat = [int(c * denom) for p in self.points for c in p.coords]
            self.coords = _int_array(flat).reshape(self.n, self.dimension)
        elif self.points and all(isinstance(p, Atom) for p in self.points):
            self.kind = "atom"
        elif self.points:
            self.kind = "mixed"

    def all_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Row-major index arrays over the full ``n x n`` grid."""
        idx = np.arange(self.n, dtype=np.int64)
        return np.repeat(idx, self.n), np.tile(idx, self.n)


class Window:
    """Finite enumerable region of a ground set (abstract)."""

    def points(self) -> tuple:
        raise NotImplementedError

    def __len__(self) -> int:
        return self.size

    @property
    def size(self) -> int:
        """Number of points, computed without enumerating them."""
        return len(self.points())

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points())

    def __contains__(self, p) -> bool:
        return p in self.table.index

    def on_boundary(self, p: Point) -> bool:
        return False

    @cached_property
    def table(self) -> PointTable:
        return PointTable(self.points())

    @property
    def max_a(self) -> int:
        """Largest first lattice coordinate present (0 if none)."""
        t = self.table
        return int(max(t.a)) if t.kind == "lattice" else 0


@dataclass(frozen=True)
class LatticeBox(Window):
    """``{1..a_max} x {1..b_max}`` enumerated in lexicographic order."""

    a_max: int
    b_max: int

    def __post_init__(self):
        _check_natural("a_max", self.a_max)
        _check_natural("b_max", self.b_max)

    def points(self) -> tuple:
        return self._points

    @cached_property
    def _points(self) -> tuple:
        return tuple(
            LatticePoint(a, b)
            for a in range(1, self.a_max + 1)
            for b in range(1, self.b_max + 1)
        )

    @property
    def size(self) -> int:
        return self.a_max * self.b_max

    def __contains__(self, p) -> bool:
        return isinstance(p, LatticePoint) and p.a <= self.a_max and p.b <= self.b_max

    def on_boundary(self, p: Point) -> bool:
        return isinstance(p, LatticePoint) and (p.a >= self.a_max or p.b >= self.b_max)

    @property
    def max_a(self) -> int:
        return self.a_max


@dataclass(frozen=True)
class VectorGrid(Window):
    """All vectors of length ``dimension`` with coordinates from ``values``."""

    dimension: int
    values: tuple

    def __post_init__(self):
        _check_natural("dimension", self.dimension)
        vals = tuple(sorted({as_rational(v) for v in self.values}))
        if not vals:
            raise ValueError("VectorGrid needs at least one coordinate value")
        object.__setattr__(self, "values", vals)

    def points(self) -> tuple:
        return self._points

    @cached_property
    def _points(self) -> tuple:
        return tuple(
            VectorPoint(c) for c in itertools.product(self.values, repeat=self.dimension)
        )

    @property
    def size(self) -> int:
        return len(self.values) ** self.dimension

    def __contains__(self, p) -> bool:
        return (
            isinstance(p, VectorPoint)
            and p.dimension == self.dimension
            and all(c in self.values for c in p.coords)
        )

    def on_boundary(self, p: Point) -> bool:
        lo, hi = self.values[0], self.values[-1]
        return isinstance(p, VectorPoint) and any(c in (lo, hi) for c in p.coords)


@dataclass(frozen=True)
class ExplicitSet(Window):
    """An explicitly listed finite set; duplicates are dropped and order is canonical."""

    members: tuple

    def __post_init__(self):
        pts = tuple(sorted(set(self.members), key=point_key))
        object.__setattr__(self, "members", pts)

    def points(self) -> tuple:
        return self.members


# ---------------------------------------------------------------------------
# Pseudometrics
# ---------------------------------------------------------------------------

def _abs_diff(f: np.ndarray, I: np.ndarray, J: np.ndarray) -> np.ndarray:
    out = f[I] - f[J]
    return np.abs(out) if out.dtype != object else np.array([abs(v) for v in out], dtype=object)


def _discrete_part(I: np.ndarray, J: np.ndarray) -> np.ndarray:
    # window points are distinct, so index inequality is point inequality
    return (I != J).astype(np.int64)


def _safe_add(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.dtype != object and y.dtype != object:
        hx = int(np.abs(x).max()) if x.size else 0
        hy = int(np.abs(y).max()) if y.size else 0
        if hx + hy < 2**62:
            return x + y
    return x.astype(object) + y.astype(object)


class Pseudometric:
    """Exact-valued distance on a ground set.

    Subclasses implement :meth:`distance`; the vectorized :meth:`pairwise`
    falls back to a Python loop when not overridden.
    """

    @property
    def index(self) -> IndexTag:
        raise NotImplementedError

    def distance(self, x: Point, y: Point) -> Fraction:
        raise NotImplementedError

    def __call__(self, x: Point, y: Point) -> Fraction:
        return self.distance(x, y)

    def pairwise(self, table: PointTable, I: np.ndarray, J: np.ndarray) -> tuple[np.ndarray, int]:
        """Distances of ``(points[I[k]], points[J[k]])`` as ``(numerators, denominator)``."""
        vals = [self.distance(table.points[i], table.points[j]) for i, j in zip(I.tolist(), J.tolist())]
        den = 1
        for v in vals:
            den = math.lcm(den, v.denominator)
        return _int_array(int(v * den) for v in vals), den


def _need_lattice(d, x, y):
    if not isinstance(x, LatticePoint) or not isinstance(y, LatticePoint):
        raise KindMismatchError(f"{d!r} is defined on lattice points, got {x!r}, {y!r}")


def _need_lattice_table(d, table: PointTable):
    if table.n and table.kind != "lattice":
        raise KindMismatchError(f"{d!r} is defined on lattice points, window holds {table.kind} points")


@dataclass(frozen=True)
class CoordinateAbs(Pseudometric):
    """``|x_n - y_n|`` on vector points."""

    n: int

    def __post_init__(self):
        _check_natural("n", self.n)

    @property
    def index(self):
        return self.n

    def _check(self, x, y):
        for p in (x, y):
            if not isinstance(p, VectorPoint):
                raise KindMismatchError(f"{self!r} is defined on vector points, got {p!r}")
            if p.dimension < self.n:
                raise KindMismatchError(f"{self!r} needs dimension >= {self.n}, got {p!r}")

    def distance(self, x, y):
        self._check(x, y)
        return abs(x.coords[self.n - 1] - y.coords[self.n - 1])

    def pairwise(self, table, I, J):
        if table.n == 0:
            return np.zeros(0, dtype=np.int64), 1
        if table.kind != "vector" or table.dimension < self.n:
            raise KindMismatchError(f"{self!r} cannot be evaluated on a {table.kind} window")
        return _abs_diff(table.coords[:, self.n - 1], I, J), table.denom

    def __repr__(self) -> str:
        return f"CoordinateAbs({self.n})"


@dataclass(frozen=True)
class LatticeF0(Pseudometric):
    """``|2^a - 2^a'|`` on lattice points."""

    @property
    def index(self):
        return 0

    def distance(self, x, y):
        _need_lattice(self, x, y)
        return Fraction(abs(2**x.a - 2**y.a))

    def pairwise(self, table, I, J):
        _need_lattice_table(self, table)
        if table.n == 0:
            return np.zeros(0, dtype=np.int64), 1
        return _abs_diff(_int_array(2 ** int(a) for a in table.a), I, J), 1

    def __repr__(self) -> str:
        return "LatticeF0()"


@dataclass(frozen=True)
class LatticeFn(Pseudometric):
    """``|f_n(x) - f_n(y)|`` with ``f_n(a, b) = b`` if ``a == n`` else ``0``."""

    n: int

    def __post_init__(self):
        _check_natural("n", self.n)

    @property
    def index(self):
        return self.n

    def f(self, p: LatticePoint) -> int:
        return p.b if p.a == self.n else 0

    def distance(self, x, y):
        _need_lattice(self, x, y)
        return Fraction(abs(self.f(x) - self.f(y)))

    def pairwise(self, table, I, J):
        _need_lattice_table(self, table)
        if table.n == 0:
            return np.zeros(0, dtype=np.int64), 1
        f = np.where(table.a == self.n, table.b, 0)
        return _abs_diff(f, I, J), 1

    def __repr__(self) -> str:
        return f"LatticeFn({self.n})"


@dataclass(frozen=True)
class Discrete(Pseudometric):
    """0 on equal points, 1 otherwise."""

    @property
    def index(self):
        return "rho"

    def distance(self, x, y):
        return Fraction(0 if x == y else 1)

    def pairwise(self, table, I, J):
        return _discrete_part(I, J), 1

    def __repr__(self) -> str:
        return "Discrete()"


@dataclass(frozen=True)
class SumWithDiscrete(Pseudometric):
    """``base + rho``; keeps the base index so certificates transfer by index."""

    base: Pseudometric

    @property
    def index(self):
        return self.base.index

    def distance(self, x, y):
        return self.base.distance(x, y) + (0 if x == y else 1)

    def pairwise(self, table, I, J):
        vals, den = self.base.pairwise(table, I, J)
        return _safe_add(vals, _discrete_part(I, J) * den), den

    def __repr__(self) -> str:
        return f"SumWithDiscrete({self.base!r})"


@dataclass(frozen=True, eq=False)
class FunctionPseudometric(Pseudometric):
    """Wraps an arbitrary callable; no axioms are assumed.

    Useful for checking candidate distance functions with
    :func:`check_pseudometric_axioms`.
    """

    func: Callable
    name: str = "f"

    @property
    def index(self):
        return self.name

    def distance(self, x, y):
        return as_rational(self.func(x, y))

    def __repr__(self) -> str:
        return f"FunctionPseudometric({self.name!r})"


def evaluate(d: Pseudometric, x: Point, y: Point) -> Fraction:
    """Exact value ``d(x, y)``."""
    return d.distance(x, y)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PseudometricFamily:
    """Finite indexed family of pseudometrics.

    ``schema``/``bound`` record how the family was materialized, e.g.
    ``("lattice", 12)`` for ``{LatticeF0, LatticeFn(1..12)}``.
    """

    members: tuple
    schema: str | None = None
    bound: int | None = None

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        seen = set()
        for d in members:
            if not isinstance(d, Pseudometric):
                raise TypeError(f"not a pseudometric: {d!r}")
            if d.index in seen:
                raise ValueError(f"duplicate pseudometric index {d.index!r}")
            seen.add(d.index)

    @classmethod
    def lattice(cls, n_max: int) -> "PseudometricFamily":
        """``{LatticeF0} + {LatticeFn(n) : 1 <= n <= n_max}``."""
        if n_max < 0:
            raise ValueError("n_max must be >= 0")
        return cls((LatticeF0(),) + tuple(LatticeFn(n) for n in range(1, n_max + 1)), "lattice", n_max)

    @classmethod
    def coordinates(cls, k: int) -> "PseudometricFamily":
        _check_natural("k", k)
        return cls(tuple(CoordinateAbs(n) for n in range(1, k + 1)), "coordinates", k)

    @classmethod
    def materialize(cls, schema: str, bound: int) -> "PseudometricFamily":
        if schema == "lattice":
            return cls.lattice(bound)
        if schema == "coordinates":
            return cls.coordinates(bound)
        raise ValueError(f"unknown family schema {schema!r}")

    @property
    def indices(self) -> tuple:
        return tuple(d.index for d in self.members)

    def get(self, index) -> Pseudometric:
        for d in self.members:
            if d.index == index:
                return d
        raise KeyError(index)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def lattice_family_for(window: Window) -> PseudometricFamily:
    """Lattice family large enough for ``window``.

    ``LatticeFn(n)`` vanishes identically on a window whose points all have
    ``a < n``, so materializing up to the largest ``a`` loses nothing.
    """
    return PseudometricFamily.lattice(window.max_a)


def metrize(family: PseudometricFamily) -> PseudometricFamily:
    """Add the discrete metric to every member; the result separates points."""
    return PseudometricFamily(tuple(SumWithDiscrete(d) for d in family))



# ---------------------------------------------------------------------------
# Axiom checking
# ---------------------------------------------------------------------------

def distance_matrix(d: Pseudometric, window: Window, budget: Budget | int | None = None) -> tuple[np.ndarray, int]:
    """Full ``n x n`` numerator matrix of ``d`` on ``window`` and its denominator."""
    budget = as_budget(budget)
    budget.charge(window.size**2, f"distance matrix of {d!r}")
    table = window.table
    I, J = table.all_pairs()
    vals, den = d.pairwise(table, I, J)
    return vals.reshape(table.n, table.n), den


def check_pseudometric_axioms(
    d: Pseudometric,
    window: Window,
    budget: Budget | int | None = None,
    max_evidence: int | None = 1000,
):
    """Exhaustively check nonnegativity, ``d(x,x) = 0``, symmetry and the
    triangle inequality over every pair and triple of ``window``.

    Each violation is recorded with its offending tuple; triangle witnesses
    are ``(x, y, z)`` with values ``(d(x,z), d(x,y), d(y,z))``.
    """
    from .reports import CheckReport, EvidenceLog

    budget = as_budget(budget)
    pts = window.points()
    D, den = distance_matrix(d, window, budget)
    n = len(pts)
    log = EvidenceLog(max_evidence)

    def q(v):
        return Fraction(int(v), den)

    for i, j in zip(*np.nonzero(D < 0)):
        log.add("nonnegativity", (pts[i], pts[j]), (q(D[i, j]),))
    for i in np.nonzero(np.diagonal(D) != 0)[0]:
        log.add("identity", (pts[i], pts[i]), (q(D[i, i]),))
    for i, j in zip(*np.nonzero(np.triu(D != D.T))):
        log.add("symmetry", (pts[i], pts[j]), (q(D[i, j]), q(D[j, i])))

    triangle = 0
    for x in range(n):
        # d(x,z) > d(x,y) + d(y,z) for all (y, z) at once
        bad = D[x, None, :] > D[x, :, None] + D
        if bad.dtype == object:
            bad = bad.astype(bool)
        ys, zs = np.nonzero(bad)
        triangle += len(ys)
        for y, z in zip(ys, zs):
            log.add("triangle", (pts[x], pts[y], pts[z]), (q(D[x, z]), q(D[x, y]), q(D[y, z])))

    counts = {"points": n, "pairs": n * n, "triples": n**3, "violations": log.total,
              "budget_used": budget.used}
    notes = [f"evidence truncated to {len(log.items)} of {log.total}"] if log.truncated else []
    return CheckReport(f"pseudometric_axioms[{d!r}]", log.total == 0, log.items, counts, notes)
