from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapecont import Transform, TransformGroup, apply, enumerate_matches, part_of
from shapecont.transforms import TransformError, is_determinate_image
from shapecont.textio import parse_shape

from strategies import nonempty_u1

P = parse_shape
SQUARE = P("u1{ (0 0 1 0) (1 0 1 1) (0 1 1 1) (0 0 0 1) }")


def test_singular_transform_rejected():
    with pytest.raises(TransformError):
        Transform(1, 2, 2, 4, 0, 0)


def test_inverse_and_composition():
    t = Transform(0, -1, 1, 0, 3, Fraction(1, 2))
    assert t.then(t.inverse()) == Transform.identity()
    assert t.inverse().then(t) == Transform.identity()
    assert apply(t, apply(t.inverse(), SQUARE)) == SQUARE


def test_irrational_rotation_refused():
    with pytest.raises(TransformError):
        TransformGroup.rotations([45])


def test_rotations_by_right_angles():
    g = TransformGroup.rotations([0, 90, 180, 270])
    assert len(g.linear_parts) == 4


def test_unknown_group_name():
    with pytest.raises(TransformError):
        TransformGroup.named("projective")


def test_square_matches_itself_once_under_isometries():
    # eight symmetries, one image
    ms = enumerate_matches(SQUARE, SQUARE)
    assert len(ms) == 1
    assert len(ms[0].alternatives) == 7


def test_square_in_a_grid_of_squares():
    grid = P("u1{ (0 0 2 0) (0 1 2 1) (0 2 2 2) (0 0 0 2) (1 0 1 2) (2 0 2 2) }")
    assert len(enumerate_matches(SQUARE, grid, TransformGroup.translations_only())) == 4
    big = enumerate_matches(SQUARE, grid, TransformGroup.similarities([1, 2]))
    assert len(big) == 5


def test_emergent_match_is_not_determinate():
    # a free square plus a ladder whose rungs make an emergent square
    host = SQUARE + P("u1{ (5 0 7 0) (5 1 7 1) (5 0 5 1) (6 0 6 1) }")
    ms = enumerate_matches(SQUARE, host, TransformGroup.translations_only())
    assert [(m.transform.e, m.determinate) for m in ms] == [(0, True), (5, False)]


def test_determinate_filter():
    host = P("u1{ (0 0 3 0) (0 1 3 1) (0 0 0 1) (1 0 1 1) }")
    ms = enumerate_matches(SQUARE, host, TransformGroup.translations_only())
    assert len(ms) == 1 and not ms[0].determinate
    assert enumerate_matches(SQUARE, host, TransformGroup.translations_only(), determinate=True) == []


def test_parallel_only_left_side_registers_endpoints():
    bar = P("u1{ (0 0 1 0) }")
    host = P("u1{ (0 0 2 0) }")
    ms = enumerate_matches(bar, host, TransformGroup.translations_only())
    assert {m.image for m in ms} == {P("u1{ (0 0 1 0) }"), P("u1{ (1 0 2 0) }")}


def test_u0_matching_respects_labels():
    a = P("u0{ (0 0):p (1 0):q }")
    s = P("u0{ (5 5):p (6 5):q (7 5):p }")
    ms = enumerate_matches(a, s, TransformGroup.translations_only())
    assert [m.transform for m in ms] == [Transform.translation(5, 5)]


def test_empty_left_side_rejected():
    with pytest.raises(TransformError):
        enumerate_matches(P("u1{}"), SQUARE)


@settings(max_examples=150, deadline=None)
@given(nonempty_u1(3), st.sampled_from(range(8)), st.integers(-3, 3), st.integers(-3, 3))
def test_a_placed_copy_is_always_found(a, k, dx, dy):
    from shapecont.transforms import _D4

    t = Transform.linear(_D4[k], dx, dy)
    host = apply(t, a) + P("u1{ (10 10 11 10) }")
    ms = enumerate_matches(a, host)
    assert apply(t, a) in {m.image for m in ms}
    for m in ms:
        assert part_of(m.image, host)
        assert is_determinate_image(m.image, host) == m.determinate
