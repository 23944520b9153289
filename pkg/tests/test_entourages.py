from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from coarsebound import (
    Atom,
    BoundProfile,
    Compose,
    Diagonal,
    Discrete,
    Explicit,
    ExplicitSet,
    Inverse,
    KindMismatchError,
    LatticeBox,
    LatticeF0,
    LatticeFn,
    LatticePoint as L,
    MetricBall,
    PaperE,
    ProductBox,
    VectorGrid,
    VectorPoint,
    WindowRequiredError,
    compose,
    contains,
    invert,
    pairs_in,
    section,
    subset_on_window,
    unite,
)


def all_pairs(w):
    pts = w.points()
    return [(x, y) for x in pts for y in pts]


def membership(E, w):
    table = w.table
    I, J = table.all_pairs()
    return E.mask(table, I, J)


# -- profiles ---------------------------------------------------------------

def test_bound_profile_lookup_is_total():
    S = BoundProfile({2: 7}, 1)
    assert S(2) == 7 and S(1) == 1 and S(10**6) == 1


def test_bound_profile_rejects_negative():
    with pytest.raises(ValueError):
        BoundProfile({1: -1})
    with pytest.raises(ValueError):
        BoundProfile({0: 1})


def test_profile_domination():
    assert BoundProfile({1: 2}, 1).dominated_by(BoundProfile({}, 2))
    assert not BoundProfile({1: 3}, 1).dominated_by(BoundProfile({}, 2))


# -- membership examples ----------------------------------------------------

def test_paper_e_stripe_member():
    E = PaperE(1, BoundProfile({2: 7}, 1))
    assert contains(E, (L(2, 3), L(2, 10)))
    # cross-check against explicit enumeration on LatticeBox(12,12)
    stripe = lambda a: Fraction(7) if a == 2 else Fraction(1)
    explicit = {(p, q) for p in oracles.box(12, 12) for q in oracles.box(12, 12) if oracles.in_paper_e(1, stripe, p, q)}
    assert ((2, 3), (2, 10)) in explicit


def test_paper_e_box_diagonal():
    assert contains(PaperE(1, BoundProfile.constant(0)), (L(1, 1), L(1, 1)))


def test_paper_e_different_columns_outside_box():
    E = PaperE(1, BoundProfile.constant(0))
    assert not contains(E, (L(2, 3), L(3, 3)))
    assert not oracles.in_paper_e(1, lambda a: 0, (2, 3), (3, 3))


def test_paper_e_rejects_vectors():
    with pytest.raises(KindMismatchError):
        contains(PaperE(1, BoundProfile()), (VectorPoint.of(1), VectorPoint.of(1)))


profiles = st.builds(
    lambda items, d: BoundProfile(tuple(items.items()), d),
    st.dictionaries(st.integers(1, 6), st.fractions(0, 8, max_denominator=3), max_size=4),
    st.fractions(0, 8, max_denominator=3),
)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), profiles)
def test_paper_e_mask_matches_oracle(M, S):
    w = LatticeBox(7, 9)
    got = membership(PaperE(M, S), w)
    want = [oracles.in_paper_e(M, S, (x.a, x.b), (y.a, y.b)) for x, y in all_pairs(w)]
    assert got.tolist() == want


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), profiles, st.integers(1, 4), profiles)
def test_paper_e_monotone(M, S, dM, dS):
    # PaperE(M, S) inside PaperE(M', S') whenever M <= M' and S <= S' pointwise
    M2 = M + dM - 1
    S2 = BoundProfile(tuple((k, S(k) + dS(k)) for k in {k for k, _ in S.explicit} | {k for k, _ in dS.explicit}),
                      S.default + dS.default)
    assert S.dominated_by(S2)
    assert subset_on_window(PaperE(M, S), PaperE(M2, S2), LatticeBox(6, 8))


def test_scalar_and_mask_agree_for_every_node():
    w = LatticeBox(4, 5)
    E = PaperE(2, BoundProfile({1: 2}, 1))
    F = MetricBall(LatticeF0(), 3)
    X = Explicit({(L(1, 1), L(4, 5)), (L(9, 9), L(1, 1))})
    for node in [E, F, X, Diagonal(), unite([E, X]), invert(X), compose(E, F), compose(X, invert(X))]:
        got = membership(node, w).tolist()
        want = [node.contains(p, w) for p in all_pairs(w)]
        assert got == want, node


def test_product_box_membership():
    B = ProductBox(2, BoundProfile.from_sequence([1, "1/2"]))
    assert contains(B, (VectorPoint.of(0, 0), VectorPoint.of(1, "1/2")))
    assert not contains(B, (VectorPoint.of(0, 0), VectorPoint.of(1, 1)))
    w = VectorGrid(2, [0, "1/2", 1, 2])
    got = membership(B, w).tolist()
    want = [all(oracles.coord_dist(n, x.coords, y.coords) <= B.bounds(n) for n in (1, 2)) for x, y in all_pairs(w)]
    assert got == want


def test_metric_ball_on_atoms_uses_generic_path():
    w = ExplicitSet((Atom("p"), Atom("q")))
    assert membership(MetricBall(Discrete(), Fraction(1, 2)), w).tolist() == [True, False, False, True]


# -- algebra ----------------------------------------------------------------

def test_invert_explicit():
    E = Explicit({(L(1, 2), L(3, 4))})
    assert contains(invert(E), (L(3, 4), L(1, 2)))
    assert not contains(invert(E), (L(1, 2), L(3, 4)))


def test_double_inverse_membership():
    E = PaperE(2, BoundProfile({3: 4}, 1))
    w = LatticeBox(5, 6)
    assert (membership(Inverse(Inverse(E)), w) == membership(E, w)).all()


def test_invert_swaps_pairs_everywhere():
    E = Explicit({(L(1, 2), L(3, 4)), (L(2, 2), L(2, 2))})
    w = LatticeBox(3, 4)
    for x, y in all_pairs(w):
        assert contains(invert(E), (x, y)) == contains(E, (y, x))


def test_union_idempotent():
    E = PaperE(1, BoundProfile({2: 3}))
    w = LatticeBox(4, 6)
    assert (membership(unite([E, E]), w) == membership(E, w)).all()


def test_union_is_or():
    E, F = PaperE(1, BoundProfile({2: 3})), MetricBall(LatticeFn(3), 1)
    w = LatticeBox(4, 5)
    assert (membership(unite([E, F]), w) == (membership(E, w) | membership(F, w))).all()


def test_compose_requires_window():
    C = compose(Diagonal(), Diagonal())
    with pytest.raises(WindowRequiredError):
        contains(C, (L(1, 1), L(1, 1)))
    assert contains(C, (L(1, 1), L(1, 1)), LatticeBox(1, 1))


@pytest.mark.parametrize("d", [LatticeF0(), LatticeFn(1), LatticeFn(2)])
def test_compose_balls_within_sum_ball(d):
    w = LatticeBox(4, 6)
    assert subset_on_window(compose(MetricBall(d, 1), MetricBall(d, 2)), MetricBall(d, 3), w)


def test_compose_brute_force_witness():
    w = LatticeBox(3, 4)
    E, F = MetricBall(LatticeFn(1), 1), MetricBall(LatticeFn(1), 2)
    got = membership(compose(E, F), w).tolist()
    pts = w.points()
    want = [any(E.contains((x, z)) and F.contains((z, y)) for z in pts) for x, y in all_pairs(w)]
    assert got == want


# -- subsets and sections --------------------------------------------------

def test_subset_reflexive():
    E = PaperE(3, BoundProfile({1: 2}))
    assert subset_on_window(E, E, LatticeBox(5, 5)).holds


def test_subset_paper_e_grows():
    small, big = PaperE(1, BoundProfile.constant(1)), PaperE(2, BoundProfile.constant(2))
    assert subset_on_window(small, big, LatticeBox(6, 6))
    res = subset_on_window(big, small, LatticeBox(6, 6))
    assert not res.holds
    # first violating pair in row-major order, found by brute force
    first = next(
        (x, y) for x, y in all_pairs(LatticeBox(6, 6))
        if oracles.in_paper_e(2, lambda a: 2, (x.a, x.b), (y.a, y.b))
        and not oracles.in_paper_e(1, lambda a: 1, (x.a, x.b), (y.a, y.b))
    )
    assert res.witness == first


def test_pairs_in_counts_match_oracle():
    S = BoundProfile({1: 3}, 0)
    I, J = pairs_in(PaperE(2, S), LatticeBox(5, 5))
    want = sum(oracles.in_paper_e(2, S, p, q) for p in oracles.box(5, 5) for q in oracles.box(5, 5))
    assert len(I) == want


def test_section_paper_e_stripe():
    E = PaperE(2, BoundProfile({1: 3}, 0))
    sec = section(E, L(1, 10), LatticeBox(20, 20))
    assert sec.members == tuple(L(1, y) for y in range(7, 14))
    assert len(sec) == 7
    assert not sec.truncated
    brute = [p for p in oracles.box(20, 20) if oracles.in_paper_e(2, E.stripes, p, (1, 10))]
    assert len(brute) == 7


def test_section_truncated_at_window_edge():
    sec = section(PaperE(1, BoundProfile({1: 5}, 0)), L(1, 4), LatticeBox(3, 6))
    assert sec.truncated


def test_section_empty_explicit():
    assert section(Explicit(), L(1, 1), LatticeBox(3, 3)).members == ()


def test_section_discrete_ball_is_singleton():
    w = ExplicitSet(tuple(Atom(s) for s in "abc"))
    assert section(MetricBall(Discrete(), Fraction(1, 2)), Atom("b"), w).members == (Atom("b"),)


def test_section_base_outside_window():
    sec = section(PaperE(1, BoundProfile({5: 2}, 0)), L(5, 10), LatticeBox(5, 9))
    assert sec.members == (L(5, 8), L(5, 9))
