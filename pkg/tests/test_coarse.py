import math
import random
from fractions import Fraction

import pytest

import factories
import oracles
from coarsebound import (
    BoundCertificate,
    BoundProfile,
    CertificateError,
    CoordinateAbs,
    Diagonal,
    Envelope,
    Explicit,
    LatticeBox,
    LatticeF0,
    LatticeFn,
    LatticePoint as L,
    MetricBall,
    PaperE,
    PseudometricFamily,
    cert_compose,
    cert_diagonal,
    cert_inverse,
    cert_union,
    certificate_pairs,
    certify_ball,
    certify_box,
    certify_paper_e,
    compose,
    envelope,
    envelope_soundness_check,
    invert,
    lattice_family_for,
    metrize,
    properness_check,
    strongly_generates_check,
    unite,
    verify_certificate,
    VectorGrid,
)

FAMILY_01 = PseudometricFamily((LatticeF0(), LatticeFn(1)))


# -- certificates -----------------------------------------------------------

def test_certificate_lifts_zero_and_rejects_negative():
    c = BoundCertificate({0: 0, 1: "3/2"})
    assert c.bound(0) == 1 and c.bound(1) == Fraction(3, 2)
    assert c.bound(7) is None
    with pytest.raises(ValueError):
        BoundCertificate({1: -1})


def test_certificate_shift():
    c = BoundCertificate({0: 2}, 3).shift(1)
    assert c.bound(0) == 3 and c.bound(9) == 4


# -- verify_certificate ---------------------------------------------------

PAIR = (L(1, 2), L(1, 5))


def test_verify_explicit_pass():
    rep = verify_certificate(Explicit({PAIR}), BoundCertificate({0: 1, 1: 4}), FAMILY_01, LatticeBox(2, 6))
    assert rep.passed
    # oracle: d_0 = 0 and d_1 = 3
    assert oracles.lattice_distances((1, 2), (1, 5), 1) == {0: 0, 1: 3}


def test_verify_explicit_fail_witness():
    rep = verify_certificate(Explicit({PAIR}), BoundCertificate({1: 2}), FAMILY_01, LatticeBox(2, 6))
    assert not rep.passed
    bound_ev = [e for e in rep.evidence if e.claim == "bound"]
    assert len(bound_ev) == 1
    assert bound_ev[0].witness == PAIR
    assert bound_ev[0].values == (1, 3, 2)
    # index 0 has no bound in this certificate and is reported as uncovered
    assert any(e.claim == "uncovered index" for e in rep.evidence)


def test_verify_diagonal_any_family():
    D = lattice_family_for(LatticeBox(4, 4))
    rep = verify_certificate(Diagonal(), BoundCertificate.constant(1), D, LatticeBox(4, 4))
    assert rep.passed and rep.counts["pairs_in_entourage"] == 16


def test_verify_vacuous_on_empty():
    rep = verify_certificate(Explicit(), BoundCertificate(), FAMILY_01, LatticeBox(3, 3))
    assert rep.passed


def test_verify_evidence_in_enumeration_order():
    E = PaperE(3, BoundProfile.constant(5))
    rep = verify_certificate(E, BoundCertificate({0: 1}, 1), lattice_family_for(LatticeBox(3, 4)), LatticeBox(3, 4))
    order = [e.witness for e in rep.evidence]
    pts = LatticeBox(3, 4).points()
    rank = {(x, y): i for i, (x, y) in enumerate((x, y) for x in pts for y in pts)}
    assert [rank[w] for w in order] == sorted(rank[w] for w in order)
    assert rep.counts["violations"] == len(rep.evidence)


# -- certify_* -------------------------------------------------------------

def test_certify_paper_e_published_instance():
    c = certify_paper_e(3, BoundProfile.constant(1))
    assert c.bound(0) == 16
    assert all(c.bound(n) == 7 for n in range(1, 50))


def test_certify_paper_e_substitution():
    c = certify_paper_e(1, BoundProfile({1: 2}, 2))
    assert c.bound(0) == 4 and c.bound(1) == 4 and c.bound(17) == 4


def test_certify_paper_e_m3_verifies():
    w = LatticeBox(10, 10)
    E = PaperE(3, BoundProfile.constant(1))
    assert verify_certificate(E, certify_paper_e(3, E.stripes), lattice_family_for(w), w).passed


def test_certify_paper_e_is_tight_at_index_zero_scale():
    # the box part reaches d_0 = 2^M - 2, strictly under 2^(M+1)
    M = 4
    worst = max(oracles.f0(p, q) for p in oracles.box(M, M) for q in oracles.box(M, M))
    assert worst == 2**M - 2 < certify_paper_e(M, BoundProfile()).bound(0)


def test_certify_ball_and_box():
    assert certify_ball(LatticeF0(), 5).as_dict() == {0: 5}
    assert certify_ball(LatticeFn(2), 0).as_dict() == {2: 1}
    assert certify_box(3, (1, 2, 3)).as_dict() == {1: 1, 2: 2, 3: 3}


def test_cert_algebra_examples():
    d = LatticeFn(1)
    assert cert_union(certify_ball(d, 2), certify_ball(d, 5)).as_dict() == {1: 5}
    assert cert_compose(certify_ball(d, 2), certify_ball(d, 5)).as_dict() == {1: 7}
    c = BoundCertificate({1: 3}, 2)
    assert cert_inverse(c) == c
    assert cert_diagonal().bound("anything") == 1


def test_cert_algebra_partial_keys():
    c = cert_union(BoundCertificate({1: 2}, 1), BoundCertificate({2: 5}))
    assert c.bound(1) is None and c.bound(2) == 5 and c.default is None


def test_verify_composed_balls_with_summed_certificate():
    d = LatticeFn(2)
    w = LatticeBox(3, 9)
    C = compose(MetricBall(d, 2), MetricBall(d, 5))
    c = cert_compose(certify_ball(d, 2), certify_ball(d, 5))
    assert c.as_dict() == {2: 7}
    rep = verify_certificate(C, c, PseudometricFamily((d,)), w)
    assert rep.passed
    assert any("middle points" in n for n in rep.notes)


@pytest.mark.parametrize("seed", range(25))
def test_certificate_algebra_soundness(seed):
    rng = random.Random(seed)
    (E, c1), (F, c2), D, w = factories.random_setting(rng)
    assert verify_certificate(E, c1, D, w).passed
    assert verify_certificate(F, c2, D, w).passed
    assert verify_certificate(unite([E, F]), cert_union(c1, c2), D, w).passed
    assert verify_certificate(compose(E, F), cert_compose(c1, c2), D, w).passed
    assert verify_certificate(invert(E), cert_inverse(c1), D, w).passed
    assert verify_certificate(Diagonal(), cert_diagonal(), D, w).passed


@pytest.mark.parametrize("seed", range(15))
def test_metrize_transfer_both_ways(seed):
    rng = random.Random(1000 + seed)
    (E, c), _, D, w = factories.random_setting(rng)
    assert verify_certificate(E, c, D, w).passed
    assert verify_certificate(E, c.shift(1), metrize(D), w).passed
    c2 = c.shift(1)
    assert verify_certificate(E, c2, metrize(D), w).passed
    assert verify_certificate(E, c2, D, w).passed


def test_family_antimonotone():
    w = LatticeBox(5, 5)
    E = PaperE(2, BoundProfile({3: 2}, 1))
    c = certify_paper_e(2, E.stripes)
    big = lattice_family_for(w)
    assert verify_certificate(E, c, big, w).passed
    for k in range(len(big)):
        sub = PseudometricFamily(big.members[:k])
        assert verify_certificate(E, c, sub, w).passed


# -- envelope ---------------------------------------------------------------

WORKED = BoundCertificate({0: 4, 1: 2, 2: 7, 3: 1}, 1)


def test_envelope_worked_example():
    env = envelope(WORKED)
    assert env.M == 7
    assert env.stripes == BoundProfile({1: 2, 2: 7, 3: 1}, 1)


def test_envelope_worked_example_brute_force():
    env = envelope(WORKED)
    pts = oracles.box(30, 30)
    for p in pts:
        for q in pts:
            if oracles.satisfies(WORKED.bound, p, q, 30):
                assert oracles.in_paper_e(env.M, env.stripes, p, q), (p, q)


def test_envelope_minimal():
    env = envelope(BoundCertificate({0: 1}, 1))
    assert env.M == 1


def test_envelope_m0_rounds_up():
    env = envelope(BoundCertificate({0: Fraction(7, 2), 2: Fraction(9, 2)}, 1))
    # M_0 = 4, then M = max(4, ceil(1), ceil(9/2), ceil(1), ceil(1)) = 5
    assert env.M == 5


def test_envelope_columns_forced_into_box():
    # any pair in different columns meeting d_0 <= R_0 has a, a' <= M
    cert = BoundCertificate({0: 12}, 3)
    env = envelope(cert)
    for p in oracles.box(8, 8):
        for q in oracles.box(8, 8):
            if p[0] != q[0] and oracles.satisfies(cert.bound, p, q, 8):
                assert max(p[0], q[0]) <= env.M


def test_envelope_requires_index_zero_and_default():
    with pytest.raises(ValueError):
        envelope(BoundCertificate({1: 1}))
    with pytest.raises(ValueError):
        envelope(BoundCertificate({0: 1}))
    # a default also covers index 0
    assert envelope(BoundCertificate({}, 2)).M == 2


@pytest.mark.parametrize("seed", range(10))
def test_envelope_soundness_random(seed):
    cert = factories.random_lattice_certificate(random.Random(seed))
    assert envelope_soundness_check(cert, LatticeBox(8, 14)).passed


def test_certificate_pairs_matches_oracle():
    cert = BoundCertificate({0: 6, 2: 3}, 2)
    I, J = certificate_pairs(cert, lattice_family_for(LatticeBox(4, 6)), LatticeBox(4, 6))
    want = sum(oracles.satisfies(cert.bound, p, q, 4) for p in oracles.box(4, 6) for q in oracles.box(4, 6))
    assert len(I) == want


# -- properness -------------------------------------------------------------

def test_properness_stripe_example():
    env = Envelope(2, BoundProfile({1: 3}, 0))
    rep = properness_check(env, L(1, 10), LatticeBox(20, 20))
    assert rep.passed
    assert rep.counts["section_size"] == 7
    assert rep.counts["cardinality_bound"] == 11


def test_properness_outside_box_singleton():
    rep = properness_check(Envelope(2, BoundProfile()), L(5, 5), LatticeBox(20, 20))
    assert rep.passed and rep.counts["section_size"] == 1


def test_properness_minimal():
    rep = properness_check(Envelope(1, BoundProfile()), L(1, 1), LatticeBox(4, 4))
    assert rep.passed and rep.counts["section_size"] == 1


def test_properness_inside_box_counts_box():
    rep = properness_check(Envelope(3, BoundProfile({2: Fraction(5, 2)})), L(2, 2), LatticeBox(10, 10))
    brute = [p for p in oracles.box(10, 10) if oracles.in_paper_e(3, lambda a: Fraction(5, 2) if a == 2 else 0, p, (2, 2))]
    assert rep.counts["section_size"] == len(brute)
    assert len(brute) <= 9 + 2 * math.floor(Fraction(5, 2)) + 1


# -- strong generation -----------------------------------------------------

def test_single_metric_balls_generate():
    # half-integer grid so that distance 15/2 is actually attained
    d = CoordinateAbs(1)
    D = PseudometricFamily((d,))
    w = VectorGrid(1, [Fraction(k, 2) for k in range(0, 21)])
    cands = [MetricBall(d, n) for n in range(1, 11)]
    probe = MetricBall(d, Fraction(15, 2))
    rep = strongly_generates_check(cands, [(probe, certify_ball(d, probe.r))], D, w)
    assert rep.passed
    assert rep.notes == ["probe 0 contained in candidate 7"]  # MetricBall(d, 8)


def test_integer_valued_metric_uses_floor_ball():
    d = LatticeFn(1)
    cands = [MetricBall(d, n) for n in range(1, 11)]
    probe = MetricBall(d, Fraction(15, 2))
    rep = strongly_generates_check(cands, [(probe, certify_ball(d, probe.r))], PseudometricFamily((d,)),
                                   LatticeBox(2, 20))
    assert rep.notes == ["probe 0 contained in candidate 6"]


def test_probe_equal_to_candidate():
    E = PaperE(2, BoundProfile.constant(1))
    w = LatticeBox(4, 4)
    rep = strongly_generates_check([E], [(E, certify_paper_e(2, E.stripes))], lattice_family_for(w), w)
    assert rep.passed


def test_uncertified_probe_rejected():
    d = LatticeFn(1)
    with pytest.raises(CertificateError):
        strongly_generates_check([MetricBall(d, 9)], [(MetricBall(d, 5), certify_ball(d, 2))],
                                 PseudometricFamily((d,)), LatticeBox(2, 9))


def test_escaping_probe_reports_per_candidate_pairs():
    d = LatticeFn(1)
    cands = [MetricBall(d, 1), MetricBall(d, 2)]
    probe = MetricBall(d, 3)
    rep = strongly_generates_check(cands, [(probe, certify_ball(d, 3))], PseudometricFamily((d,)), LatticeBox(1, 5))
    assert not rep.passed
    assert [e.values for e in rep.evidence] == [(0, 0), (0, 1)]
    for e in rep.evidence:
        x, y = e.witness
        assert 2 < abs(x.b - y.b) <= 3 or abs(x.b - y.b) > 1
