"""Diagonalization engines showing that a proposed generating list fails.

Given finitely many certified entourages, each engine builds a controlled set
that escapes every one of them together with explicit witness pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .coarse import (
    BoundCertificate,
    Envelope,
    certify_box,
    certify_paper_e,
    envelope,
    verify_certificate,
)
from .entourages import BoundProfile, Entourage, PaperE, ProductBox, contains
from .errors import CertificateError
from .model import (
    Budget,
    CoordinateAbs,
    LatticePoint,
    VectorPoint,
    Window,
    as_budget,
    lattice_family_for,
)
from .reports import CheckReport, jsonable


@dataclass(frozen=True)
class Witness:
    candidate_index: int
    pair: tuple
    in_escapee: bool
    not_in_candidate: bool
    values: tuple = ()

    @property
    def verified(self) -> bool:
        return self.in_escapee and self.not_in_candidate

    def to_dict(self) -> dict:
        return {
            "candidate": self.candidate_index,
            "pair": jsonable(self.pair),
            "in_escapee": self.in_escapee,
            "not_in_candidate": self.not_in_candidate,
            "values": jsonable(self.values),
        }


@dataclass
class DefeatReport:
    escapee: Entourage
    escapee_certificate: BoundCertificate
    witnesses: list
    all_verified: bool
    envelopes: list = field(default_factory=list)
    escapee_check: CheckReport | None = None

    @property
    def passed(self) -> bool:
        return self.all_verified and (self.escapee_check is None or self.escapee_check.passed)

    def to_dict(self) -> dict:
        from .codec import encode_entourage

        return {
            "escapee": encode_entourage(self.escapee),
            "escapee_certificate": self.escapee_certificate.to_dict(),
            "witnesses": [w.to_dict() for w in self.witnesses],
            "all_verified": self.all_verified,
            "envelopes": [e.to_dict() for e in self.envelopes],
            "escapee_check": None if self.escapee_check is None else self.escapee_check.to_dict(),
        }


def candidate_envelope(E: Entourage, cert: BoundCertificate) -> Envelope:
    """A ``PaperE`` candidate is its own envelope; anything else goes through
    the certificate."""
    if isinstance(E, PaperE):
        return Envelope(E.M, E.stripes)
    return envelope(cert)


def defeat_lattice(
    candidates,
    window: Window,
    n: int | None = None,
    budget: Budget | int | None = None,
) -> DefeatReport:
    """Escape the first ``n`` certified lattice candidates.

    For candidate ``m`` with envelope ``(M, {R_k})`` the escapee gets stripe
    bound ``R_m + 1`` in column ``m`` and the witness is
    ``((m, R_m + M + 2), (m, M + 1))``: inside the escapee's stripe, but
    outside the envelope's box and one step beyond its column-``m`` stripe.
    Rational stripe bounds are rounded up first so witnesses stay on the
    lattice.
    """
    budget = as_budget(budget)
    candidates = list(candidates)
    if n is None:
        n = len(candidates)
    if n > len(candidates):
        raise ValueError(f"asked for {n} candidates, got {len(candidates)}")
    family = lattice_family_for(window)

    envelopes, reach = [], {}
    for m, (E, cert) in enumerate(candidates[:n], start=1):
        rep = verify_certificate(E, cert, family, window, budget)
        if not rep.passed:
            raise CertificateError(f"candidate {m} fails its certificate on the window", rep)
        env = candidate_envelope(E, cert)
        envelopes.append(env)
        reach[m] = math.ceil(env.stripes(m))

    stripes = BoundProfile({m: r + 1 for m, r in reach.items()}, 1)
    escapee = PaperE(1, stripes)
    witnesses = []
    for m, env in enumerate(envelopes, start=1):
        x = LatticePoint(m, reach[m] + env.M + 2)
        y = LatticePoint(m, env.M + 1)
        pair = (x, y)
        in_escapee = contains(escapee, pair)
        outside = not contains(env.entourage, pair)
        witnesses.append(Witness(m, pair, in_escapee, outside, (env.M, env.stripes(m), x.b - y.b)))

    cert = certify_paper_e(1, stripes)
    check = verify_certificate(escapee, cert, family, window, budget)
    return DefeatReport(escapee, cert, witnesses, all(w.verified for w in witnesses), envelopes, check)


def defeat_product(candidates, k: int, n: int | None = None) -> DefeatReport:
    """Escape ``n`` coordinate-certified candidates in the first ``k``
    coordinates of R^N.

    The escapee doubles each candidate's own diagonal bound ``R^m_m`` and the
    witness pair is ``0`` versus ``(2R^1_1, ..., 2R^n_n, 0, ..., 0)``, which
    breaks candidate ``m`` at coordinate ``m``.
    """
    candidates = list(candidates)
    if n is None:
        n = len(candidates)
    if n > len(candidates):
        raise ValueError(f"asked for {n} candidates, got {len(candidates)}")
    if k < n:
        raise ValueError(f"dimension k={k} must be at least the number of candidates {n}")

    diag = {}
    for m, cert in enumerate(candidates[:n], start=1):
        r = cert.bound(m)
        if r is None or r <= 0:
            raise CertificateError(f"candidate {m} has no positive bound at coordinate {m}")
        diag[m] = r
    defaults = [c.default for c in candidates[:n] if c.default is not None]
    tail = 2 * max(defaults) if defaults else Fraction(2)
    bounds = BoundProfile({m: 2 * r for m, r in diag.items()}, tail)
    escapee = ProductBox(k, bounds)

    x = VectorPoint.zero(k)
    y = VectorPoint(tuple(2 * diag[i] if i in diag else 0 for i in range(1, k + 1)))
    pair = (x, y)
    in_escapee = contains(escapee, pair)
    witnesses = []
    for m, r in diag.items():
        value = CoordinateAbs(m).distance(x, y)
        witnesses.append(Witness(m, pair, in_escapee, value > r, (value, r)))
    return DefeatReport(escapee, certify_box(k, bounds), witnesses, all(w.verified for w in witnesses))
