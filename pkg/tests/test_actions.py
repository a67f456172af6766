"""Free-group actions: evaluation, orbits, traces, and Schreier balls."""

from fractions import Fraction

import numpy as np
import pytest

from irslab import (
    FiniteSpace,
    FullGroupElement,
    Homomorphism,
    ball,
    balls_isomorphic,
    derive_rng,
    empirical_irs,
    evaluate,
    hom_metric,
    index_distribution,
    invariance_defect,
    orbit,
    orbits,
    parse_word,
    random_full_group_element,
    random_homomorphism,
    random_reduced_word,
    schreier_ball,
    stabilizer_trace,
    trace_code_matrix,
)
from irslab.rng import STREAM_TEST


def odometer_hom(n, rank=2):
    sp = FiniteSpace.single_class(n)
    gens = [FullGroupElement.odometer(sp)]
    gens.extend(FullGroupElement.identity(sp) for _ in range(rank - 1))
    return Homomorphism(sp, tuple(gens))


def torus_hom(side=5):
    # two commuting shifts on a side x side grid; free up to short words
    n = side * side
    sp = FiniteSpace.single_class(n, levels=None)
    idx = np.arange(n)
    x, y = idx // side, idx % side
    s1 = FullGroupElement.from_forward(sp, ((x + 1) % side) * side + y)
    s2 = FullGroupElement.from_forward(sp, x * side + (y + 1) % side)
    return Homomorphism(sp, (s1, s2))


def test_homomorphism_validation():
    sp = FiniteSpace.single_class(4)
    with pytest.raises(ValueError):
        Homomorphism(sp, ())
    other = FullGroupElement.identity(FiniteSpace.single_class(8))
    with pytest.raises(ValueError):
        Homomorphism(sp, (other,))


def test_generator_and_letter_image():
    hom = odometer_hom(4)
    assert hom.generator(1)(0) == 1
    assert hom.generator(-1)(0) == 3
    assert hom.letter_image(-1, 0) == 3
    assert hom.letter_image(2, 3) == 3
    with pytest.raises(ValueError):
        hom.generator(0)
    with pytest.raises(ValueError):
        hom.generator(3)


def test_evaluate_applies_rightmost_letter_first():
    hom = odometer_hom(4)
    assert evaluate(hom, parse_word("s1 s1", 2), 0) == 2
    assert evaluate(hom, parse_word("", 2), 3) == 3
    assert evaluate(hom, parse_word("s1^-1", 2), 0) == 3
    # s2 fixes everything here, so conjugating by s1 changes nothing
    assert evaluate(hom, parse_word("s1^-1 s2 s1", 2), 2) == 2
    with pytest.raises(ValueError):
        evaluate(hom, parse_word("s1", 1), 0)


def test_element_of_is_a_homomorphism():
    sp = FiniteSpace.single_class(12)
    rng = derive_rng(3, STREAM_TEST, 3)
    hom = random_homomorphism(sp, 2, rng)
    for _ in range(25):
        u = random_reduced_word(2, int(rng.integers(0, 6)), rng)
        v = random_reduced_word(2, int(rng.integers(0, 6)), rng)
        assert hom.element_of(u * v) == hom.element_of(u) * hom.element_of(v)
        assert hom.element_of(u.inverse()) == hom.element_of(u).inv()
        for x in range(12):
            assert hom.element_of(u)(x) == evaluate(hom, u, x)


def test_is_lean_aperiodic():
    assert odometer_hom(8).is_lean_aperiodic
    sp = FiniteSpace.single_class(8)
    e = FullGroupElement.identity(sp)
    assert not Homomorphism(sp, (e, e)).is_lean_aperiodic


def test_hom_metric():
    hom = odometer_hom(4)
    assert hom_metric(hom, hom) == 0
    swapped = hom.replace_generator(1, FullGroupElement.from_forward(hom.space, [1, 0, 2, 3]))
    assert hom_metric(hom, swapped) == Fraction(1, 2)
    with pytest.raises(ValueError):
        hom_metric(hom, odometer_hom(8))
    with pytest.raises(ValueError):
        hom_metric(hom, odometer_hom(4, rank=3))


def test_orbits_and_index_distribution():
    hom = odometer_hom(8)
    assert orbit(hom, 3) == frozenset(range(8))
    assert orbits(hom) == [tuple(range(8))]
    assert index_distribution(hom) == {8: Fraction(1)}

    sp = FiniteSpace.single_class(4, levels=None)
    swap = FullGroupElement.from_forward(sp, [1, 0, 2, 3])
    ident = FullGroupElement.identity(sp)
    split = Homomorphism(sp, (swap, ident))
    assert orbits(split) == [(0, 1), (2,), (3,)]
    assert index_distribution(split) == {1: Fraction(1, 2), 2: Fraction(1, 2)}
    assert sum(index_distribution(split).values()) == 1


def test_stabilizer_trace_swap_example():
    sp = FiniteSpace.single_class(2, levels=None)
    swap = FullGroupElement.from_forward(sp, [1, 0])
    hom = Homomorphism(sp, (swap, FullGroupElement.identity(sp)))
    trace = stabilizer_trace(hom, 0, 1)
    fixing = {str(w) for w in trace.words()}
    assert fixing == {"", "s2", "s2^-1"}
    assert trace.contains(parse_word("s2", 2))
    assert not trace.contains(parse_word("s1", 2))

    deeper = stabilizer_trace(hom, 0, 2)
    fixing2 = {str(w) for w in deeper.words()}
    assert fixing2 == {"", "s2", "s2^-1", "s1 s1", "s1^-1 s1^-1",
                       "s2 s2", "s2^-1 s2^-1"}


def test_trace_is_closed_under_inverses_and_contains_identity():
    sp = FiniteSpace.single_class(16)
    rng = derive_rng(4, STREAM_TEST, 4)
    hom = random_homomorphism(sp, 2, rng)
    for atom in range(0, 16, 3):
        trace = stabilizer_trace(hom, atom, 2)
        words = set(trace.words())
        assert parse_word("", 2) in words
        assert {w.inverse() for w in words} == words


def test_torus_action_has_trivial_short_trace():
    hom = torus_hom(5)
    for atom in (0, 7, 24):
        trace = stabilizer_trace(hom, atom, 2)
        assert [str(w) for w in trace.words()] == [""]
    # at radius 4 the commutator word fixes every atom
    longer = stabilizer_trace(hom, 0, 4)
    assert longer.contains(parse_word("s1 s2 s1^-1 s2^-1", 2))


def test_trace_code_matrix_matches_single_traces():
    sp = FiniteSpace.from_class_sizes([6, 10], levels=None)
    rng = derive_rng(5, STREAM_TEST, 5)
    hom = random_homomorphism(sp, 2, rng)
    codes = trace_code_matrix(hom, 2, chunk=5)
    for atom in range(sp.n_atoms):
        assert codes[atom].tobytes() == stabilizer_trace(hom, atom, 2).bits


def test_empirical_irs_weights():
    hom = odometer_hom(8)
    irs = empirical_irs(hom, 2)
    assert sum(w for _, w in irs.weights) == 1
    for _, weight in irs.weights:
        assert (weight * 8).denominator == 1
    # transitive action with one trace everywhere
    assert len(irs.weights) == 1
    assert irs.as_dict()[irs.weights[0][0]] == 1

    sp = FiniteSpace.single_class(4, levels=None)
    swap = FullGroupElement.from_forward(sp, [1, 0, 2, 3])
    split = Homomorphism(sp, (swap, FullGroupElement.identity(sp)))
    mixed = empirical_irs(split, 1)
    assert len(mixed.weights) == 2
    assert sorted(w for _, w in mixed.weights) == [Fraction(1, 2), Fraction(1, 2)]


def test_invariance_defect_is_zero():
    rng = derive_rng(6, STREAM_TEST, 6)
    for space in (FiniteSpace.single_class(64), FiniteSpace.from_class_sizes([16, 48])):
        for rank in (2, 3):
            hom = random_homomorphism(space, rank, rng)
            assert invariance_defect(hom, 2) == 0


def test_schreier_ball_structure():
    hom = odometer_hom(8, rank=1)
    b = schreier_ball(hom, 0, 2)
    assert b.root == 0 and b.radius == 2
    assert b.vertices == (0, 1, 2, 6, 7)
    # one edge per signed letter per vertex, plus reverses for the two exits
    assert len(b.edges) == 2 * len(b.vertices) + 2
    assert (0, 1, 1) in b.edges and (0, -1, 7) in b.edges
    assert (3, -1, 2) in b.edges and (5, 1, 6) in b.edges
    assert b.code == stabilizer_trace(hom, 0, 5)


def test_schreier_ball_radius_zero():
    hom = odometer_hom(4, rank=2)
    b = schreier_ball(hom, 2, 0)
    assert b.vertices == (2,)
    outgoing = [e for e in b.edges if e[0] == 2]
    assert len(outgoing) == 4


def brute_ball_iso(a, x, b, y, radius):
    """Pairwise word-collision oracle for rooted ball isomorphism."""
    outer = ball(a.rank, radius + 1).words
    for u in outer:
        for v in outer:
            if len(u) > radius and len(v) > radius:
                continue
            same_a = evaluate(a, u, x) == evaluate(a, v, x)
            same_b = evaluate(b, u, y) == evaluate(b, v, y)
            if same_a != same_b:
                return False
    return True


def test_balls_isomorphic_cycles():
    eight = odometer_hom(8, rank=1)
    sp = FiniteSpace.single_class(8, levels=None)
    two_fours = Homomorphism(
        sp, (FullGroupElement.from_forward(sp, [1, 2, 3, 0, 5, 6, 7, 4]),)
    )
    assert balls_isomorphic(eight, 0, two_fours, 0, 1)
    assert not balls_isomorphic(eight, 0, two_fours, 0, 2)
    with pytest.raises(ValueError):
        balls_isomorphic(eight, 0, odometer_hom(8, rank=2), 0, 1)


def test_balls_isomorphic_matches_brute_oracle():
    rng = derive_rng(7, STREAM_TEST, 7)
    sp = FiniteSpace.single_class(8, levels=None)
    seen = set()
    for _ in range(15):
        a = random_homomorphism(sp, 2, rng)
        b = random_homomorphism(sp, 2, rng)
        x = int(rng.integers(8))
        y = int(rng.integers(8))
        got = balls_isomorphic(a, x, b, y, 1)
        assert got == brute_ball_iso(a, x, b, y, 1)
        seen.add(got)
        # conjugating the whole action relabels the ball, an exact positive
        c = random_full_group_element(sp, rng)
        conj = Homomorphism(sp, tuple(c * g * c.inv() for g in a.gens))
        assert balls_isomorphic(a, x, conj, c(x), 1)
        assert brute_ball_iso(a, x, conj, c(x), 1)
    assert seen == {True, False}
