import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from twistlab.matgroup import (GeneratorSystem, LatticeMatrix, NotInvertibleError,
                               OrbitCapExceeded, RepresentationSpec, adjoint_matrix, ball,
                               berggren, character_stabilizer_index, check_form_preserved,
                               dual_apply, irreducibility_certificate, sl2z, sl3z, sl_coords,
                               sl_matrix, span_closure, sym_coords, sym_matrix, symsquare_matrix)
from twistlab.reals import GOLDEN, TorusPoint

T = LatticeMatrix([[1, 1], [0, 1]])
B2 = LatticeMatrix([[1, 2, 2], [2, 1, 2], [2, 2, 3]])

words = st.lists(st.sampled_from(sl3z().labels), max_size=6)


def test_adjoint_of_identity():
    for d in (2, 3):
        assert adjoint_matrix(LatticeMatrix.identity(d)) == LatticeMatrix.identity(d * d - 1)


def test_adjoint_T_on_h():
    h = sl_coords([[1, 0], [0, -1]])
    e = sl_coords([[0, 1], [0, 0]])
    out = adjoint_matrix(T) @ h
    assert tuple(out) == tuple(x - 2 * y for x, y in zip(h, e))


def test_symsquare_swap():
    g = LatticeMatrix([[0, 1], [-1, 0]])
    A = sym_coords([[5, 0], [0, 7]])
    out = symsquare_matrix(g) @ A
    assert sym_matrix(2, out) == [[7, 0], [0, 5]]
    assert symsquare_matrix(LatticeMatrix.identity(3)) == LatticeMatrix.identity(6)


def test_non_invertible_rejected():
    with pytest.raises(NotInvertibleError):
        adjoint_matrix(LatticeMatrix([[2, 0], [0, 1]]))


def test_form_preservation():
    assert check_form_preserved(B2, (1, 1, -1))
    assert not check_form_preserved(T, (1, -1))
    assert check_form_preserved(LatticeMatrix.identity(3), (2, 5, -3))
    gens = berggren()
    assert all(check_form_preserved(m, (1, 1, -1)) for m in gens.matrices.values())


def test_ball_sizes():
    # brute-force dedup of products of {S, S^-1, T, T^-1}
    assert ball(sl2z(), 4).sizes == [1, 5, 16, 36, 68]
    assert set(ball(sl2z(), 0).words) == {LatticeMatrix.identity(2)}


def test_ball_words_certify_elements():
    gens = sl2z()
    b = ball(gens, 3)
    for g, w in b.words.items():
        assert gens.word(w) == g
        assert len(w) <= 3


def test_ball_cap_truncates():
    b = ball(sl3z(), 4, cap=50)
    assert b.truncated and len(b) <= 50


def test_generator_system_adds_inverses():
    gens = GeneratorSystem.from_matrices("t", {"T": [[1, 1], [0, 1]]})
    assert gens.labels == ("T", "T^-1")
    assert gens.matrices["T^-1"] == LatticeMatrix([[1, -1], [0, 1]])


def test_span_closure_examples():
    assert span_closure(RepresentationSpec("standard", 2), sl2z(), (1, 0))[0] == 2
    e = sl_coords([[0, 1], [0, 0]])
    assert span_closure(RepresentationSpec("adjoint", 2), sl2z(), e)[0] == 3
    with pytest.raises(ValueError):
        span_closure(RepresentationSpec("standard", 2), sl2z(), (0, 0))


def test_trivial_group_is_not_irreducible():
    triv = GeneratorSystem.from_matrices("triv", {"I": [[1, 0], [0, 1]]})
    r = irreducibility_certificate(RepresentationSpec("adjoint", 2), triv, trials=5, seed=1)
    assert r.dims == [1] * 5 and not r.full


def test_adjoint3_restricted_to_berggren_is_reducible():
    # so(2,1) is a 3-dimensional invariant subspace of sl_3 under the orthogonal group
    rot = sl_coords([[0, -1, 0], [1, 0, 0], [0, 0, 0]])
    boost = sl_coords([[0, 0, 1], [0, 0, 0], [1, 0, 0]])
    rep = RepresentationSpec("adjoint", 3)
    assert span_closure(rep, berggren(), rot)[0] == 3
    assert span_closure(rep, berggren(), boost)[0] == 3
    assert span_closure(rep, sl3z(), rot)[0] == 8


@pytest.mark.parametrize("variant,d,gens", [("adjoint", 2, sl2z), ("symsquare", 2, sl2z),
                                            ("adjoint", 3, sl3z), ("standard", 3, berggren)])
def test_irreducible_examples(variant, d, gens):
    assert irreducibility_certificate(RepresentationSpec(variant, d), gens(), 5, seed=2).full


def test_dual_apply_examples():
    x = TorusPoint.of("1/2", 0)
    assert dual_apply(LatticeMatrix.identity(2), x) == x
    assert dual_apply(T, x) == TorusPoint.of("1/2", "1/2")


def test_orbit_of_half_zero():
    orbit = character_stabilizer_index(sl2z(), TorusPoint.of("1/2", 0))
    assert orbit.index == 3
    assert set(orbit.points) == {TorusPoint.of("1/2", 0), TorusPoint.of(0, "1/2"),
                                 TorusPoint.of("1/2", "1/2")}
    assert orbit.is_closed(sl2z())
    assert character_stabilizer_index(sl2z(), TorusPoint.of(0, 0)).index == 1


def test_orbit_coset_words():
    gens = sl2z()
    chi = TorusPoint.of("1/3", "2/3")
    orbit = character_stabilizer_index(gens, chi)
    for p, w in zip(orbit.points, orbit.coset_reps):
        assert dual_apply(gens.word(w), chi) == p


def test_irrational_orbit_hits_cap():
    with pytest.raises(OrbitCapExceeded):
        character_stabilizer_index(sl2z(), TorusPoint((GOLDEN, Fraction(0))), cap=500)


@given(st.integers(1, 12), st.integers(0, 11), st.integers(0, 11))
@settings(max_examples=40, deadline=None)
def test_rational_orbits_are_closed_and_bounded(q, a, b):
    chi = TorusPoint.of(Fraction(a % q, q), Fraction(b % q, q))
    orbit = character_stabilizer_index(sl2z(), chi, cap=q * q)
    assert orbit.is_closed(sl2z())
    assert orbit.index <= q * q


@given(words, words)
@settings(max_examples=30, deadline=None)
def test_representations_are_homomorphisms(w1, w2):
    gens = sl3z()
    g, h = gens.word(w1), gens.word(w2)
    for rep in (RepresentationSpec("adjoint", 3), RepresentationSpec("symsquare", 3)):
        assert rep.image(g @ h) == rep.image(g) @ rep.image(h)


@given(words)
@settings(max_examples=30, deadline=None)
def test_dual_action_is_a_left_action(w):
    gens = sl3z()
    rng = random.Random(len(w))
    x = TorusPoint(tuple(Fraction(rng.randrange(7), 7) for _ in range(3)))
    g, h = gens.word(w), gens.word(tuple(reversed(w)))
    assert dual_apply(g @ h, x) == dual_apply(g, dual_apply(h, x))


@given(st.lists(st.integers(-9, 9), min_size=8, max_size=8))
def test_sl_coordinates_roundtrip(v):
    m = sl_matrix(3, v)
    assert sum(m[i][i] for i in range(3)) == 0
    assert tuple(sl_coords(m)) == tuple(v)
