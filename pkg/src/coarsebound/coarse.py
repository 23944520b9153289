"""Bound certificates for the bounded coarse structure of a pseudometric family.

A relation ``E`` is controlled for a family ``D`` exactly when every
``d`` in ``D`` is bounded on ``E``.  A :class:`BoundCertificate` names those
bounds; the functions here check certificates on finite windows, combine them
along the coarse-structure operations, and derive the lattice envelopes used
by the non-metrizability argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .entourages import (
    BoundProfile,
    Entourage,
    MetricBall,
    PaperE,
    _le_bound,
    pairs_in,
    section,
    subset_on_window,
)
from .errors import CertificateError
from .model import (
    Budget,
    LatticePoint,
    Pseudometric,
    PseudometricFamily,
    Window,
    as_budget,
    as_rational,
    format_rational,
    lattice_family_for,
    nat_ceil,
)
from .reports import CheckReport, EvidenceLog, jsonable


def _index_key(k):
    return (isinstance(k, str), k)


def _positive(r) -> Fraction:
    r = as_rational(r)
    if r < 0:
        raise ValueError(f"certificate bounds must be >= 0, got {r}")
    # d <= 0 implies d <= 1, so a zero bound is lifted to keep bounds positive
    return Fraction(1) if r == 0 else r


@dataclass(frozen=True)
class BoundCertificate:
    """Per-index positive bounds ``R_d``.

    Indices not listed fall back to ``default``; a ``None`` default means the
    certificate makes no claim about unlisted indices.
    """

    per_index: tuple = ()
    default: Fraction | None = None

    def __post_init__(self):
        items = self.per_index.items() if isinstance(self.per_index, dict) else self.per_index
        norm = {k: _positive(v) for k, v in items}
        object.__setattr__(self, "per_index", tuple(sorted(norm.items(), key=lambda kv: _index_key(kv[0]))))
        if self.default is not None:
            object.__setattr__(self, "default", _positive(self.default))

    @classmethod
    def constant(cls, value) -> "BoundCertificate":
        return cls((), value)

    def bound(self, index) -> Fraction | None:
        for k, r in self.per_index:
            if k == index:
                return r
        return self.default

    def indices(self) -> tuple:
        return tuple(k for k, _ in self.per_index)

    def shift(self, delta) -> "BoundCertificate":
        """Add ``delta`` to every bound, including the default."""
        delta = as_rational(delta)
        return BoundCertificate(
            tuple((k, r + delta) for k, r in self.per_index),
            None if self.default is None else self.default + delta,
        )

    def as_dict(self) -> dict:
        return dict(self.per_index)

    def to_dict(self) -> dict:
        return {
            "bounds": {str(k): format_rational(r) for k, r in self.per_index},
            "default": None if self.default is None else format_rational(self.default),
        }

    def __repr__(self) -> str:
        body = ", ".join(f"{k!r}: {format_rational(r)}" for k, r in self.per_index)
        tail = "" if self.default is None else f", default={format_rational(self.default)}"
        return f"BoundCertificate({{{body}}}{tail})"


@dataclass(frozen=True)
class Envelope:
    """Parameters ``(M, {R_n})`` of a lattice entourage containing a certified set."""

    M: int
    stripes: BoundProfile

    @property
    def entourage(self) -> PaperE:
        return PaperE(self.M, self.stripes)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "stripes": {str(k): format_rational(r) for k, r in self.stripes.explicit},
            "stripes_default": format_rational(self.stripes.default),
        }


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def verify_certificate(
    E: Entourage,
    cert: BoundCertificate,
    family: PseudometricFamily,
    window: Window,
    budget: Budget | int | None = None,
    max_evidence: int | None = 1000,
) -> CheckReport:
    """Check ``d(x, y) <= cert(d)`` for every ``d`` in ``family`` and every
    pair of ``E`` inside ``window x window``.

    Violations are reported as ``(index, value, bound)`` on the offending
    pair, in pair enumeration order.
    """
    budget = as_budget(budget)
    I, J = pairs_in(E, window, budget)
    table = window.table
    found = []
    for pos, d in enumerate(family):
        bound = cert.bound(d.index)
        if bound is None:
            if len(I):
                found.append((0, pos, "uncovered index", (table.points[I[0]], table.points[J[0]]), (d.index,)))
            continue
        vals, den = d.pairwise(table, I, J)
        for k in np.nonzero(~_le_bound(vals, den, bound))[0]:
            pair = (table.points[I[k]], table.points[J[k]])
            found.append((int(k), pos, "bound", pair, (d.index, Fraction(int(vals[k]), den), bound)))
    found.sort(key=lambda t: (t[0], t[1]))
    log = EvidenceLog(max_evidence)
    for _, _, claim, pair, values in found:
        log.add(claim, pair, values)
    counts = {
        "pairs_enumerated": table.n * table.n,
        "pairs_in_entourage": int(len(I)),
        "pseudometrics": len(family),
        "violations": log.total,
        "budget_used": budget.used,
    }
    notes = [f"evidence truncated to {len(log.items)} of {log.total}"] if log.truncated else []
    if E.needs_window():
        notes.append("composition membership searched middle points in the window only")
    return CheckReport("verify_certificate", log.total == 0, log.items, counts, notes)


def certificate_pairs(
    cert: BoundCertificate,
    family: PseudometricFamily,
    window: Window,
    budget: Budget | int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays of all window pairs satisfying ``cert`` for every member of ``family``."""
    budget = as_budget(budget)
    budget.charge(window.size**2, "pairs satisfying certificate")
    table = window.table
    I, J = table.all_pairs()
    for d in family:
        bound = cert.bound(d.index)
        if bound is None:
            continue
        vals, den = d.pairwise(table, I, J)
        keep = _le_bound(vals, den, bound)
        I, J = I[keep], J[keep]
    return I, J


# ---------------------------------------------------------------------------
# Derived certificates
# ---------------------------------------------------------------------------

def certify_paper_e(M: int, stripes: BoundProfile) -> BoundCertificate:
    """Certificate of ``PaperE(M, stripes)`` over ``{LatticeF0, LatticeFn(n)}``:
    ``2^(M+1)`` for index 0 and ``stripes(n) + 2M`` for ``n >= 1``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    per = {0: Fraction(2 ** (M + 1))}
    for n, r in stripes.explicit:
        per[n] = r + 2 * M
    return BoundCertificate(per, stripes.default + 2 * M)


def certify_ball(d: Pseudometric, r) -> BoundCertificate:
    return BoundCertificate({d.index: max(as_rational(r), Fraction(1))})


def certify_box(k: int, bounds) -> BoundCertificate:
    if not isinstance(bounds, BoundProfile):
        bounds = BoundProfile.from_sequence(bounds)
    return BoundCertificate({n: max(bounds(n), Fraction(1)) for n in range(1, k + 1)})


def _pointwise(c1: BoundCertificate, c2: BoundCertificate, op) -> BoundCertificate:
    per = {}
    for k in set(c1.indices()) | set(c2.indices()):
        b1, b2 = c1.bound(k), c2.bound(k)
        if b1 is not None and b2 is not None:
            per[k] = op(b1, b2)
    default = None
    if c1.default is not None and c2.default is not None:
        default = op(c1.default, c2.default)
    return BoundCertificate(per, default)


def cert_union(c1: BoundCertificate, c2: BoundCertificate) -> BoundCertificate:
    return _pointwise(c1, c2, max)


def cert_compose(c1: BoundCertificate, c2: BoundCertificate) -> BoundCertificate:
    # triangle inequality: d(x,z) <= d(x,y) + d(y,z)
    return _pointwise(c1, c2, lambda a, b: a + b)


def cert_inverse(c: BoundCertificate) -> BoundCertificate:
    return c


def cert_diagonal() -> BoundCertificate:
    return BoundCertificate.constant(1)


# ---------------------------------------------------------------------------
# Lattice envelopes and properness
# ---------------------------------------------------------------------------

def envelope(cert: BoundCertificate) -> Envelope:
    """Smallest-parameter ``PaperE`` containing every lattice pair that
    satisfies ``cert``.

    With ``M_0`` the least natural ``>= cert(0)``, two points in different
    columns satisfy ``a, a' <= M_0`` (since ``2^a - 2^a' >= 2^(a-1) >= a``),
    and their ``b`` values are then bounded by ``cert(a)``.
    """
    r0 = cert.bound(0)
    if r0 is None:
        raise ValueError("envelope needs a bound for index 0 (LatticeF0)")
    if cert.default is None:
        raise ValueError("envelope needs a default bound covering every lattice index")
    M0 = nat_ceil(r0)
    M = max([M0] + [nat_ceil(cert.bound(n)) for n in range(1, M0 + 1)])
    stripes = BoundProfile(tuple((k, r) for k, r in cert.per_index if isinstance(k, int) and k >= 1), cert.default)
    return Envelope(M, stripes)


def envelope_soundness_check(cert: BoundCertificate, window: Window, budget: Budget | int | None = None,
                             max_evidence: int | None = 1000) -> CheckReport:
    budget = as_budget(budget)
    env = envelope(cert)
    I, J = certificate_pairs(cert, lattice_family_for(window), window, budget)
    table = window.table
    inside = env.entourage.mask(table, I, J)
    log = EvidenceLog(max_evidence)
    for k in np.nonzero(~inside)[0]:
        log.add("pair satisfying certificate outside envelope", (table.points[I[k]], table.points[J[k]]))
    counts = {"pairs_enumerated": table.n * table.n, "pairs_satisfying": int(len(I)),
              "violations": log.total, "budget_used": budget.used}
    return CheckReport("envelope_soundness", log.total == 0, log.items, counts, [f"envelope M={env.M}"])


def properness_check(env: Envelope, base: LatticePoint, window: Window, budget: Budget | int | None = None) -> CheckReport:
    """Section of ``PaperE(env)`` at ``base`` lies in the ``M x M`` box plus
    the stripe ``{(a', y) : |y - b'| <= R_a'}`` and has at most
    ``M^2 + 2 floor(R_a') + 1`` points."""
    if not isinstance(base, LatticePoint):
        raise TypeError("properness_check needs a lattice base point")
    sec = section(env.entourage, base, window, budget)
    reach = env.stripes(base.a)
    bound = env.M**2 + 2 * math.floor(reach) + 1
    log = EvidenceLog()
    for y in sec.members:
        in_box = y.a <= env.M and y.b <= env.M
        in_stripe = y.a == base.a and abs(y.b - base.b) <= reach
        if not (in_box or in_stripe):
            log.add("section point outside box and stripe", (base, y))
    if len(sec) > bound:
        log.add("section larger than closed-form bound", (base,), (len(sec), bound))
    counts = {"section_size": len(sec), "cardinality_bound": bound, "violations": log.total}
    notes = ["section touches window boundary"] if sec.truncated else []
    ev = log.items or []
    return CheckReport(f"properness[{base!r}]", log.total == 0, ev, counts, notes)


# ---------------------------------------------------------------------------
# Strong generation
# ---------------------------------------------------------------------------

def strongly_generates_check(
    candidates,
    probes,
    family: PseudometricFamily,
    window: Window,
    budget: Budget | int | None = None,
) -> CheckReport:
    """Every certified probe must sit inside at least one candidate on ``window``.

    ``probes`` is a list of ``(entourage, certificate)``; each certificate is
    verified first and a failure raises :class:`CertificateError`.
    """
    budget = as_budget(budget)
    log = EvidenceLog(None)
    contained = []
    for p, (E, cert) in enumerate(probes):
        rep = verify_certificate(E, cert, family, window, budget)
        if not rep.passed:
            raise CertificateError(f"probe {p} is not certified on the window", rep)
        escapes = []
        for m, cand in enumerate(candidates):
            res = subset_on_window(E, cand, window, budget)
            if res:
                contained.append((p, m))
                break
            escapes.append((m, res.witness))
        else:
            for m, pair in escapes:
                log.add("probe escapes candidate", pair, (p, m))
            if not escapes:
                log.add("no candidates", (), (p,))
    counts = {"probes": len(probes), "candidates": len(candidates), "violations": log.total,
              "budget_used": budget.used}
    notes = [f"probe {p} contained in candidate {m}" for p, m in contained]
    return CheckReport("strongly_generates", log.total == 0, log.items, counts, notes)
