from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from twistlab.bohr import (Arc, BernoulliSet, BohrSetSpec, ExplicitSet, FullSet, KroneckerSystem,
                           ProgressionSet, Status, banach_density_estimate,
                           difference_inclusion_witness, enumerate_members, golden_bohr,
                           golden_cube, kronecker_demo, member, product_bohr,
                           rational_spectrum_check)
from twistlab.reals import GOLDEN, SQRT2M1, frac_sqrt

mpmath.mp.dps = 60
PHI = (mpmath.sqrt(5) - 1) / 2
BETA = mpmath.sqrt(2) - 1


def mp_dist(x):
    f = x - mpmath.floor(x)
    return min(f, 1 - f)


def test_golden_membership_examples():
    E = golden_bohr()
    assert member(E, (0,)).status is Status.IN
    assert member(E, (1,)).status is Status.OUT
    assert member(E, (2,)).status is Status.OUT
    assert member(E, (5,)).status is Status.IN


def test_golden_enumeration():
    # points a in [0, 13] with dist(a * phi, Z) < 3/20, from mpmath at 60 digits
    assert [p[0] for p in golden_bohr().members((0,), (13,))] == [0, 3, 5, 8, 13]
    assert golden_bohr().members((5,), (4,)) == []


def test_golden_density_count():
    r = banach_density_estimate(golden_bohr(), 10_000)
    # count of |a| <= 10^4 with dist(a * phi, Z) < 3/20, from mpmath at 60 digits
    assert r.count == 6001
    assert r.limit_claim == Fraction(3, 10)
    assert r.gap() < 0.02


def test_density_of_progressions_and_full_sets():
    for n in (1, 7, 50):
        r = banach_density_estimate(ProgressionSet((2,), (0,)), n)
        assert r.ratio == Fraction(n + 1 if n % 2 == 0 else n, 2 * n + 1)
    assert banach_density_estimate(FullSet(2), 5).ratio == 1


def test_density_sup_over_offsets():
    E = ProgressionSet((2,), (0,))
    # F_1 + 1 = {0, 1, 2} holds two even numbers, F_1 holds one
    r = banach_density_estimate(E, 1, [(0,), (1,)])
    assert r.best_offset == (1,) and r.ratio == Fraction(2, 3)


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=5), st.integers(-50, 50))
@settings(max_examples=20, deadline=None)
def test_density_monotone_in_offsets(offsets, extra):
    E = golden_bohr()
    base = banach_density_estimate(E, 20, [(o,) for o in offsets])
    more = banach_density_estimate(E, 20, [(o,) for o in offsets] + [(extra,)])
    assert more.ratio >= base.ratio


def test_product_of_one_is_itself():
    g = golden_bohr()
    p = product_bohr([g])
    assert p.members((-30,), (30,)) == g.members((-30,), (30,))


def test_product_measure_is_multiplicative():
    a = golden_bohr()
    b = BohrSetSpec(KroneckerSystem(((SQRT2M1,),)), (Arc(Fraction(0), Fraction(1, 5)),))
    p = product_bohr([a, b, a])
    assert p.limit_claim() == a.limit_claim() * b.limit_claim() * a.limit_claim()
    assert p.N == 3


def test_golden_cube_is_product():
    E = golden_cube()
    axis = [p[0] for p in golden_bohr().members((-20,), (20,))]
    assert E.axis_members((-20,) * 3, (20,) * 3) == [axis] * 3
    assert E.contains((3, -5, 8)) and not E.contains((3, 1, 8))


def test_spectrum_scan():
    half = KroneckerSystem(((Fraction(1, 2),),))
    r = rational_spectrum_check(half, 2)
    assert not r.trivial and r.eta == (1,) and r.m == 2
    assert rational_spectrum_check(KroneckerSystem(((GOLDEN,),)), 50).trivial
    mixed = KroneckerSystem(((GOLDEN, Fraction(0)), (Fraction(0), Fraction(1, 3))))
    r = rational_spectrum_check(mixed, 5)
    assert not r.trivial and r.m == 3 and r.eta[0] == 0


def test_spectrum_sees_hidden_rational_combination():
    # golden and golden + 1/4 differ by a rational amount
    system = KroneckerSystem(((GOLDEN,), (GOLDEN + Fraction(1, 4),)))
    r = rational_spectrum_check(system, 6)
    assert not r.trivial and r.m == 4


def test_difference_witness_examples():
    B = golden_bohr()
    C = difference_inclusion_witness(B)
    assert C.arcs == (Arc(Fraction(0), Fraction(3, 40)),)
    cs = [p[0] for p in C.members((-200,), (200,))]
    assert all(B.contains((c,)) for c in cs)
    bad = [(c1, c2) for c1 in cs for c2 in cs if member(B, (c1 - c2,)).status is Status.OUT]
    assert bad == []


def test_difference_witness_off_center():
    B = BohrSetSpec(KroneckerSystem(((GOLDEN,),)), (Arc(Fraction(1, 20), Fraction(3, 20)),))
    C = difference_inclusion_witness(B)
    assert C.arcs[0].radius == Fraction(1, 20)
    cs = [p[0] for p in C.members((-300,), (300,))]
    assert all(B.contains((c1 - c2,)) for c1 in cs for c2 in cs)
    with pytest.raises(ValueError):
        difference_inclusion_witness(
            BohrSetSpec(KroneckerSystem(((GOLDEN,),)), (Arc(Fraction(1, 4), Fraction(1, 10)),)))


def test_boundary_is_reported_not_guessed():
    # |1 * (sqrt2 - 1)| equals the radius exactly; no finite precision decides it
    E = BohrSetSpec(KroneckerSystem(((SQRT2M1,),)), (Arc(Fraction(0), SQRT2M1),))
    assert member(E, (1,)).status is Status.BOUNDARY
    members, boundary = enumerate_members(E, (-3,), (3,))
    assert (1,) in boundary and (1,) not in members
    assert not E.contains((1,))


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
@settings(max_examples=200)
def test_demo_membership_matches_mpmath(x, y):
    d = mp_dist(x * PHI + y * BETA)
    if abs(d - mpmath.mpf(3) / 20) > mpmath.mpf(10) ** -30:
        assert kronecker_demo().contains((x, y)) == (d < mpmath.mpf(3) / 20)


@given(st.integers(-10**4, 10**4), st.integers(-10**4, 10**4), st.integers(1, 40))
@settings(max_examples=30, deadline=None)
def test_scan_agrees_with_member(x0, y0, w):
    E = kronecker_demo()
    lo, hi = (x0, y0), (x0 + w, y0 + 3)
    found, boundary = enumerate_members(E, lo, hi)
    direct = [(x, y) for x in range(lo[0], hi[0] + 1) for y in range(lo[1], hi[1] + 1)
              if member(E, (x, y)).status is Status.IN]
    assert found == direct and boundary == []
    assert E.count(lo, hi) == (len(direct), 0)


@given(st.integers(-10**5, 10**5), st.integers(-50, 50))
@settings(max_examples=50)
def test_membership_depends_only_on_image(x, k):
    # the second column of tau is an integer, so it never moves tau(a)
    E = BohrSetSpec(KroneckerSystem(((GOLDEN, Fraction(1)),)), (Arc(Fraction(0), Fraction(3, 20)),))
    assert member(E, (x, k)).status == member(golden_bohr(), (x,)).status


def test_shifted_scan_is_intersection_of_translates():
    E = kronecker_demo()
    shifts = [(1, 2), (-3, 0)]
    found, _ = enumerate_members(E, (-15, -15), (15, 15), shifts)
    direct = [(x, y) for x in range(-15, 16) for y in range(-15, 16)
              if all(E.contains((x + a, y + b)) for a, b in shifts)]
    assert found == direct


def test_irrational_arc_radius():
    arc = Arc(Fraction(0), frac_sqrt(3) * Fraction(1, 4))
    E = BohrSetSpec(KroneckerSystem(((GOLDEN,),)), (arc,))
    r = float(frac_sqrt(3)) / 4
    for a in range(-40, 41):
        assert E.contains((a,)) == (float(mp_dist(a * PHI)) < r)


def test_other_sources():
    P = ProgressionSet((2, 3), (0, 1))
    assert P.count((0, 0), (5, 5)) == (6, 0)
    assert len(P.members((0, 0), (5, 5))) == 6
    X = ExplicitSet.of([(1, 2), (3, 4)])
    assert X.members((0, 0), (2, 2)) == [(1, 2)]
    B1 = BernoulliSet(0.5, (0, 0), (9, 9), seed=3)
    B2 = BernoulliSet(0.5, (0, 0), (9, 9), seed=3)
    assert B1.members((0, 0), (9, 9)) == B2.members((0, 0), (9, 9))
    assert all(B1.contains(p) for p in B1.members((0, 0), (9, 9)))
    assert not B1.contains((10, 0))


def test_arc_validation():
    with pytest.raises(ValueError):
        Arc(Fraction(0), Fraction(1, 2))
    a = Arc.interval(Fraction(-3, 20), Fraction(3, 20))
    assert a.center == 0 and a.radius == Fraction(3, 20) and a.contains_zero
