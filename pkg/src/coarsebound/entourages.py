"""Symbolic entourages (relations on X x X) and their window-restricted algebra.

Membership of a single pair is an exact predicate.  Window operations use
:meth:`Entourage.mask`, a vectorized membership test over index pairs of a
:class:`~coarsebound.model.PointTable`; composition takes its middle points
from that same table.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import KindMismatchError, WindowRequiredError
from .model import (
    Budget,
    CoordinateAbs,
    LatticePoint,
    PointTable,
    Pseudometric,
    VectorPoint,
    Window,
    _check_natural,
    as_budget,
    as_rational,
    format_rational,
)

_CLAMP = 2**62


def _le_bound(vals: np.ndarray, den: int, bound: Fraction) -> np.ndarray:
    """Exact ``vals / den <= bound`` for integer numerator arrays and ``bound >= 0``."""
    threshold = (bound.numerator * den) // bound.denominator
    if vals.dtype != object:
        return vals <= min(threshold, _CLAMP)
    return np.array([v <= threshold for v in vals], dtype=bool)


@dataclass(frozen=True)
class BoundProfile:
    """Nonnegative bounds ``R_n`` for every natural ``n``: finitely many listed
    values plus a default for the rest."""

    explicit: tuple = ()
    default: Fraction = Fraction(0)

    def __post_init__(self):
        items = self.explicit.items() if isinstance(self.explicit, dict) else self.explicit
        norm = {}
        for n, r in items:
            _check_natural("profile index", n)
            r = as_rational(r)
            if r < 0:
                raise ValueError(f"bound for index {n} must be >= 0, got {r}")
            norm[n] = r
        default = as_rational(self.default)
        if default < 0:
            raise ValueError("default bound must be >= 0")
        object.__setattr__(self, "explicit", tuple(sorted(norm.items())))
        object.__setattr__(self, "default", default)

    @classmethod
    def constant(cls, value) -> "BoundProfile":
        return cls((), value)

    @classmethod
    def from_sequence(cls, values, default=0) -> "BoundProfile":
        """``values[0]`` becomes ``R_1``, ``values[1]`` becomes ``R_2``, ..."""
        return cls(tuple((i + 1, v) for i, v in enumerate(values)), default)

    def __call__(self, n: int) -> Fraction:
        for k, r in self.explicit:
            if k == n:
                return r
        return self.default

    def as_dict(self) -> dict:
        return dict(self.explicit)

    def dominated_by(self, other: "BoundProfile") -> bool:
        keys = {k for k, _ in self.explicit} | {k for k, _ in other.explicit}
        return self.default <= other.default and all(self(k) <= other(k) for k in keys)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {format_rational(r)}" for k, r in self.explicit)
        return f"BoundProfile({{{body}}}, default={format_rational(self.default)})"


class Entourage:
    """A relation on the ground set (abstract)."""

    def contains(self, pair, window: Window | None = None) -> bool:
        raise NotImplementedError

    def mask(self, table: PointTable, I: np.ndarray, J: np.ndarray, budget: Budget | None = None) -> np.ndarray:
        """Membership of ``(points[I[k]], points[J[k]])`` for every ``k``.

        Middle points of compositions range over ``table``.
        """
        window = _TableWindow(table)
        return np.fromiter(
            (self.contains((table.points[i], table.points[j]), window) for i, j in zip(I.tolist(), J.tolist())),
            dtype=bool,
            count=len(I),
        )

    def needs_window(self) -> bool:
        return False

    def __contains__(self, pair) -> bool:
        return self.contains(pair)


class _TableWindow(Window):
    """Adapter exposing a table as a window for middle-point searches."""

    def __init__(self, table: PointTable):
        self.__dict__["table"] = table

    def points(self):
        return self.table.points


def _matrix(E: Entourage, table: PointTable, budget: Budget | None) -> np.ndarray:
    if budget is not None:
        budget.charge(table.n * table.n, f"membership matrix of {type(E).__name__}")
    I, J = table.all_pairs()
    return E.mask(table, I, J, budget).reshape(table.n, table.n)


@dataclass(frozen=True)
class Explicit(Entourage):
    """A finite set of pairs."""

    pairs: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(tuple(p) for p in self.pairs))

    def contains(self, pair, window=None):
        return tuple(pair) in self.pairs

    def mask(self, table, I, J, budget=None):
        M = np.zeros((table.n, table.n), dtype=bool)
        for x, y in self.pairs:
            i, j = table.index.get(x), table.index.get(y)
            if i is not None and j is not None:
                M[i, j] = True
        return M[I, J]

    def __repr__(self) -> str:
        return f"Explicit({sorted(self.pairs, key=repr)})"


@dataclass(frozen=True)
class Diagonal(Entourage):
    """``{(x, x)}``."""

    def contains(self, pair, window=None):
        x, y = pair
        return x == y

    def mask(self, table, I, J, budget=None):
        return I == J


@dataclass(frozen=True)
class MetricBall(Entourage):
    """``{(x, y) : d(x, y) <= r}``."""

    d: Pseudometric
    r: Fraction

    def __post_init__(self):
        r = as_rational(self.r)
        if r < 0:
            raise ValueError("ball radius must be >= 0")
        object.__setattr__(self, "r", r)

    def contains(self, pair, window=None):
        x, y = pair
        return self.d.distance(x, y) <= self.r

    def mask(self, table, I, J, budget=None):
        vals, den = self.d.pairwise(table, I, J)
        return _le_bound(vals, den, self.r)

    def __repr__(self) -> str:
        return f"MetricBall({self.d!r}, {format_rational(self.r)})"


@dataclass(frozen=True)
class ProductBox(Entourage):
    """``{(x, y) : |x_n - y_n| <= R_n for 1 <= n <= k}`` on vector points."""

    k: int
    bounds: BoundProfile

    def __post_init__(self):
        _check_natural("k", self.k)

    def contains(self, pair, window=None):
        x, y = pair
        for p in (x, y):
            if not isinstance(p, VectorPoint) or p.dimension < self.k:
                raise KindMismatchError(f"ProductBox({self.k}) needs vector points of dimension >= {self.k}, got {p!r}")
        return all(abs(x.coords[n - 1] - y.coords[n - 1]) <= self.bounds(n) for n in range(1, self.k + 1))

    def mask(self, table, I, J, budget=None):
        out = np.ones(len(I), dtype=bool)
        for n in range(1, self.k + 1):
            vals, den = CoordinateAbs(n).pairwise(table, I, J)
            out &= _le_bound(vals, den, self.bounds(n))
        return out


@dataclass(frozen=True)
class PaperE(Entourage):
    """Lattice entourage ``E_{M,{R_n}}``: pairs with all four coordinates
    ``<= M``, or on a common column ``a`` with ``|b - b'| <= R_a``."""

    M: int
    stripes: BoundProfile

    def __post_init__(self):
        _check_natural("M", self.M)

    def contains(self, pair, window=None):
        x, y = pair
        if not isinstance(x, LatticePoint) or not isinstance(y, LatticePoint):
            raise KindMismatchError(f"PaperE is a relation on lattice points, got {x!r}, {y!r}")
        if max(x.a, x.b, y.a, y.b) <= self.M:
            return True
        return x.a == y.a and abs(x.b - y.b) <= self.stripes(x.a)

    def in_box(self, pair) -> bool:
        x, y = pair
        return max(x.a, x.b, y.a, y.b) <= self.M

    def mask(self, table, I, J, budget=None):
        if table.n == 0:
            return np.zeros(len(I), dtype=bool)
        if table.kind != "lattice":
            raise KindMismatchError("PaperE is a relation on lattice points")
        a, b = table.a, table.b
        small = (a <= self.M) & (b <= self.M)
        box = small[I] & small[J]
        # integer b-differences: |db| <= R  iff  |db| <= floor(R)
        reach = np.array([int(self.stripes(int(ai))) for ai in a], dtype=np.int64)
        stripe = (a[I] == a[J]) & (np.abs(b[I] - b[J]) <= reach[I])
        return box | stripe

    def __repr__(self) -> str:
        return f"PaperE({self.M}, {self.stripes!r})"


@dataclass(frozen=True)
class Union(Entourage):
    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, pair, window=None):
        return any(E.contains(pair, window) for E in self.parts)

    def mask(self, table, I, J, budget=None):
        out = np.zeros(len(I), dtype=bool)
        for E in self.parts:
            out |= E.mask(table, I, J, budget)
        return out

    def needs_window(self):
        return any(E.needs_window() for E in self.parts)


@dataclass(frozen=True)
class Inverse(Entourage):
    inner: Entourage

    def contains(self, pair, window=None):
        x, y = pair
        return self.inner.contains((y, x), window)

    def mask(self, table, I, J, budget=None):
        return self.inner.mask(table, J, I, budget)

    def needs_window(self):
        return self.inner.needs_window()


@dataclass(frozen=True)
class Compose(Entourage):
    """``{(x, y) : exists z with (x, z) in left and (z, y) in right}``,
    with ``z`` searched over a finite window."""

    left: Entourage
    right: Entourage

    def contains(self, pair, window=None):
        if window is None:
            raise WindowRequiredError("composition membership needs a window of middle points")
        x, y = pair
        return any(
            self.left.contains((x, z), window) and self.right.contains((z, y), window)
            for z in window.points()
        )

    def mask(self, table, I, J, budget=None):
        L = _matrix(self.left, table, budget)
        R = _matrix(self.right, table, budget)
        # float32 counts are exact up to 2**24 middle points
        C = (L.astype(np.float32) @ R.astype(np.float32)) > 0
        return C[I, J]

    def needs_window(self):
        return True


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def contains(E: Entourage, pair, window: Window | None = None) -> bool:
    """Exact membership of ``pair`` in ``E``; compositions need ``window``."""
    return E.contains(tuple(pair), window)


def invert(E: Entourage) -> Entourage:
    return Inverse(E)


def unite(Es) -> Entourage:
    return Union(tuple(Es))


def compose(E: Entourage, F: Entourage) -> Entourage:
    return Compose(E, F)


def pairs_in(E: Entourage, window: Window, budget: Budget | int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (row-major order) of the window pairs that lie in ``E``."""
    budget = as_budget(budget)
    budget.charge(window.size**2, f"pairs of {type(E).__name__} on window")
    table = window.table
    I, J = table.all_pairs()
    m = E.mask(table, I, J, budget)
    return I[m], J[m]


@dataclass(frozen=True)
class SubsetResult:
    holds: bool
    witness: tuple | None = None
    pairs_checked: int = 0

    def __bool__(self) -> bool:
        return self.holds


def subset_on_window(E: Entourage, F: Entourage, window: Window, budget: Budget | int | None = None) -> SubsetResult:
    """Whether ``E`` is contained in ``F`` on ``window x window``; otherwise
    the first violating pair in enumeration order."""
    budget = as_budget(budget)
    I, J = pairs_in(E, window, budget)
    table = window.table
    inF = F.mask(table, I, J, budget)
    bad = np.nonzero(~inF)[0]
    if len(bad):
        k = bad[0]
        return SubsetResult(False, (table.points[I[k]], table.points[J[k]]), table.n * table.n)
    return SubsetResult(True, None, table.n * table.n)


@dataclass(frozen=True)
class SectionResult:
    base: object
    members: tuple
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        from .reports import jsonable

        return {"base": jsonable(self.base), "members": jsonable(self.members), "truncated": self.truncated}


def section(E: Entourage, base, window: Window, budget: Budget | int | None = None) -> SectionResult:
    """All ``y`` in ``window`` with ``(y, base)`` in ``E``.

    ``truncated`` is set when some member touches the window's outer
    boundary, i.e. the window may be clipping the true section.
    """
    budget = as_budget(budget)
    budget.charge(window.size, "section")
    table = window.table
    j = table.index.get(base)
    if j is not None:
        I = np.arange(table.n, dtype=np.int64)
        m = E.mask(table, I, np.full(table.n, j, dtype=np.int64), budget)
        members = tuple(table.points[i] for i in np.nonzero(m)[0])
    else:
        members = tuple(y for y in table.points if E.contains((y, base), window))
    truncated = any(window.on_boundary(y) for y in members)
    return SectionResult(base, members, truncated)
