import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from twistlab.bohr import FullSet, ProgressionSet, Status, golden_cube, member
from twistlab.matgroup import (RepresentationSpec, berggren, sl2z, sl3z, sl_coords, sl_matrix,
                               sym_coords)
from twistlab.patterns import (C2, C3, S3, CharPoly, Determinant, GaloisLabel, GaloisLabelMap,
                               IncompatibleRepresentation, QuadraticForm, bohr_surjectivity_check,
                               charpoly, difference_pattern_check, galois_label,
                               galois_translate_check, lift_F, parse_psi, psi_invariance_check,
                               realizable_labels, represent_q3, scaling_check,
                               twisted_pattern_search, window)

Q3 = QuadraticForm((1, 1), (1,))


def red(pattern):
    return GaloisLabel("Reducible", pattern)


# labels for degree-3 polynomials (1, a, b, c), cross-checked with sympy's galois_group
CUBIC_LABELS = [
    ((1, 0, -3, 1), C3), ((1, 0, 0, -2), S3), ((1, 0, -7, 7), C3), ((1, 1, -2, -1), C3),
    ((1, 0, -1, 0), red("1+1+1")), ((1, 0, -3, 2), red("1+1+1")), ((1, 0, 1, 0), red("1+2")),
    ((1, 3, 4, -8), red("1+2")), ((1, -1, 7, 6), S3), ((1, 7, -5, 0), red("1+2")),
    ((1, 1, -7, -3), red("1+2")), ((1, -7, -7, 1), red("1+2")), ((1, 6, 1, -2), S3),
    ((1, -4, 1, 4), S3), ((1, 9, -2, 0), red("1+2")), ((1, -5, 8, 5), S3),
]


def test_quadratic_form_values():
    assert Q3((3, 0, 2)) == 5
    assert QuadraticForm((2, 1), (1,))((1, 1, 2)) == -1
    assert Q3.name == "Q(2,1)"
    with pytest.raises(ValueError):
        Q3((1, 2))


def test_determinant_values():
    assert Determinant(2)(sym_coords([[2, 1], [1, 3]])) == 5
    assert Determinant(3)(sym_coords([[1, 0, 0], [0, 2, 0], [0, 0, 3]])) == 6


def test_charpoly_examples():
    assert CharPoly(2)(sl_coords([[1, 2], [3, -1]])) == (1, 0, -7)
    assert CharPoly(3)(sl_coords([[0, 0, -1], [1, 0, 3], [0, 1, 0]])) == (1, 0, -3, 1)


@given(st.lists(st.integers(-30, 30), min_size=8, max_size=8))
def test_fast_cubic_charpoly_matches_general(v):
    assert CharPoly(3)(v) == charpoly(sl_matrix(3, v))


@pytest.mark.parametrize("poly,label", CUBIC_LABELS)
def test_cubic_labels(poly, label):
    assert galois_label(poly) == label


def test_quadratic_labels():
    assert galois_label((1, 0, -1)) == red("1+1")
    assert galois_label((1, 0, -2)) == C2
    assert galois_label((1, 0, 0)) == red("1+1")
    with pytest.raises(ValueError):
        galois_label((2, 0, 1))


def test_realizable_labels_have_companion_witnesses():
    psi = GaloisLabelMap(3)
    examples = {red("1+1+1"): [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
                red("1+2"): [[0, 0, 0], [0, 0, -1], [0, 1, 0]],
                C3: [[0, 0, -1], [1, 0, 3], [0, 1, 0]],
                S3: [[0, 0, 2], [1, 0, 0], [0, 1, 0]]}
    assert sorted(examples) == sorted(realizable_labels(3))
    for lab, m in examples.items():
        assert psi(sl_coords(m)) == lab
    assert GaloisLabelMap(2)(sl_coords([[0, 2], [1, 0]])) == C2


def test_galois_labels_invariant_on_sl2_window():
    psi, gens = GaloisLabelMap(2), sl2z()
    rep = RepresentationSpec("adjoint", 2)
    for v in itertools.product(range(-3, 4), repeat=3):
        lab = psi(v)
        for g in gens.matrices.values():
            assert psi(rep.image(g) @ v) == lab
        assert psi(tuple(3 * x for x in v)) == lab


def test_invariance_pairings():
    for psi, gens in [(Q3, berggren()), (CharPoly(2), sl2z()), (Determinant(3), sl3z()),
                      (GaloisLabelMap(3), sl3z())]:
        assert psi_invariance_check(psi, gens, psi.default_rep(), samples=30, seed=1).ok


def test_incompatible_pairing_rejected():
    with pytest.raises(IncompatibleRepresentation):
        psi_invariance_check(CharPoly(2), sl2z(), RepresentationSpec("symsquare", 2))


@given(st.lists(st.integers(-50, 50), min_size=6, max_size=6), st.integers(1, 9))
def test_scaling_laws(v, k):
    assert scaling_check(QuadraticForm((2, 3), (5,)), v[:3], k)
    assert scaling_check(Determinant(3), v, k)
    assert scaling_check(Determinant(2), v[:3], k)
    assert scaling_check(CharPoly(2), v[:3], k)


@given(st.lists(st.integers(-20, 20), min_size=8, max_size=8), st.integers(1, 9))
@settings(max_examples=50)
def test_galois_label_scale_invariant(v, k):
    psi = GaloisLabelMap(3)
    assert psi(tuple(k * x for x in v)) == psi(v)
    assert scaling_check(CharPoly(3), v, k)


def test_represent_q3_examples():
    assert represent_q3(5) == (3, 0, 2)
    assert represent_q3(0) == (0, 1, 1)
    assert lift_F([]) == []
    assert lift_F([5]) == [(3, 0, 2)]


@given(st.integers(-10**12, 10**12))
def test_represent_q3_identity(n):
    u, v, w = represent_q3(n)
    assert u * u + v * v - w * w == n


@given(st.sets(st.integers(-10**6, 10**6), max_size=30))
def test_lift_is_injective(F):
    out = lift_F(F)
    assert len(out) == len(set(out)) == len(F)


def test_parse_psi():
    assert parse_psi("Q(1,1;1)") == QuadraticForm((1, 1), (1,))
    assert parse_psi("charpoly(3)") == CharPoly(3)
    assert parse_psi("det(2)") == Determinant(2)
    assert parse_psi("galois(2)") == GaloisLabelMap(2)
    with pytest.raises(ValueError):
        parse_psi("trace(3)")


def test_pattern_zero_is_always_found():
    E = ProgressionSet((3, 3, 3), (1, 1, 1))
    rep = twisted_pattern_search(Q3, E, [(0, 0, 0)], 1, window(-3, 3, 3), window(-3, 3, 3))
    assert rep.success and rep.k == 1
    assert rep.witnesses[(0, 0, 0)] == rep.b
    assert rep.verify(Q3, E)


def test_pattern_on_even_lattice_needs_even_k():
    E = ProgressionSet((2, 2, 2), (0, 0, 0))
    rep = twisted_pattern_search(Q3, E, [(1, 0, 0)], 3, window(-2, 2, 3), window(-6, 6, 3))
    assert rep.success and rep.k == 2
    assert rep.verify(Q3, E)


def test_pattern_on_golden_cube_with_k_one():
    E = golden_cube()
    F = lift_F(range(-3, 4))
    rep = twisted_pattern_search(Q3, E, F, 1, window(0, 0, 3), window(-2048, 2048, 3))
    assert rep.certifies == "k=1, b=0"
    assert rep.verify(Q3, E)


def test_failed_search_reports_frontier():
    E = ProgressionSet((2, 2, 2), (0, 0, 0))
    rep = twisted_pattern_search(Q3, E, [(1, 0, 0)], 1, window(-2, 2, 3), window(-4, 4, 3))
    assert not rep.success and rep.certifies == "none"
    assert "k <= 1" in rep.frontier()
    assert rep.missing == [(1, 0, 0)]


def test_surjectivity_examples():
    E = golden_cube()
    rep = bohr_surjectivity_check(Q3, E, [0, 5, -7])
    assert rep.witnesses[0] == (0, 0, 0)
    for t, w in rep.witnesses.items():
        assert Q3(w) == t and member(E, w).status is Status.IN
    assert rep.spectrum.startswith("Trivial")
    det = bohr_surjectivity_check(Determinant(2), E, [-1])
    x, y, z = det.witnesses[-1]
    assert x * y - z * z == -1 and E.contains((x, y, z))


def test_surjectivity_unresolved_is_not_a_claim():
    E = ProgressionSet((2, 2, 2), (0, 0, 0))
    rep = bohr_surjectivity_check(Q3, E, [1, 4], max_steps=2)
    assert rep.unresolved == [1]
    assert Q3(rep.witnesses[4]) == 4


def test_difference_coverage():
    E = golden_cube()
    pts = lift_F(range(-10, 11))
    rep = difference_pattern_check(Q3, E, 1, pts, window(-96, 96, 3))
    assert rep.ok
    for a, (e1, e2) in rep.covered.items():
        assert E.contains(e1) and E.contains(e2)
        assert Q3(tuple(x - y for x, y in zip(e1, e2))) == Q3(a)
    zero = difference_pattern_check(Q3, E, 1, [(0, 0, 0)], window(-5, 5, 3))
    assert zero.ok


def test_difference_coverage_even_lattice():
    E = ProgressionSet((2, 2, 2), (0, 0, 0))
    pts = list(itertools.product(range(-2, 3), repeat=3))
    assert difference_pattern_check(Q3, E, 2, pts, window(-12, 12, 3)).ok
    assert not difference_pattern_check(Q3, E, 1, [(1, 0, 0)], window(-12, 12, 3)).ok


def test_galois_translate_full_lattice():
    rep = galois_translate_check(3, None, window(0, 0, 8), window(-1, 1, 8))
    assert rep.complete and rep.b == (0,) * 8
    psi = GaloisLabelMap(3)
    for lab, e in rep.found.items():
        assert psi(e) == lab
    assert galois_translate_check(2, FullSet(3), window(0, 0, 3), window(-2, 2, 3)).complete


def test_scaled_values_stay_integral():
    v = (1, 2, 3)
    assert CharPoly(2).scaled(CharPoly(2)(v), 4) == CharPoly(2)(tuple(4 * x for x in v))
    assert all(isinstance(c, int) for c in CharPoly(2)(v))
    assert Fraction(Q3((2, 2, 2)), 4) == Q3((1, 1, 1))
