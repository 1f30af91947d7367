import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_points
from ffrestrict.counting import (
    PointSet2,
    additive_energy_plane,
    b_quantity,
    count,
    count_corners,
    count_rectangles_bruteforce,
    count_rectangles_energy,
    count_trapezoids_bruteforce,
    count_trapezoids_directional,
    is_corner,
    is_rectangle,
    is_trapezoid,
)
from ffrestrict.errors import InputTooLarge, MinusOneIsSquare
from ffrestrict.field import make_field


def test_corner_examples(F7):
    assert is_corner(F7, (0, 0), (1, 0), (1, 1))
    assert is_corner(F7, (2, 3), (2, 3), (2, 3))
    assert not is_corner(F7, (0, 0), (1, 1), (2, 2))


def test_rectangle_examples(F7):
    assert is_rectangle(F7, (0, 0), (1, 0), (1, 1), (0, 1))
    assert is_rectangle(F7, (4, 4), (4, 4), (4, 4), (4, 4))
    assert not is_rectangle(F7, (0, 0), (1, 0), (2, 0), (3, 0))


def test_trapezoid_examples(F7):
    assert is_trapezoid(F7, (1, 1), (1, 1), (2, 3), (5, 6))
    assert not is_trapezoid(F7, (0, 0), (1, 0), (3, 3), (3, 3))
    assert is_trapezoid(F7, (0, 0), (2, 4), (0, 0), (1, 2))


def test_rectangle_counts(F7):
    assert count_rectangles_bruteforce(F7, [(3, 4)]) == 1
    assert count_rectangles_energy(F7, [(3, 4)]) == 1
    two = [(0, 0), (1, 0)]
    assert count_rectangles_bruteforce(F7, two) == count_rectangles_energy(F7, two)
    grid = [(x, y) for x in range(3) for y in range(3)]
    r = count_rectangles_bruteforce(F7, grid)
    assert r >= 81 and r == count_rectangles_energy(F7, grid)
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert count_rectangles_energy(F7, square) == count_rectangles_bruteforce(F7, square)


def test_rectangle_energy_random_f11(F11, rng):
    for _ in range(5):
        A = random_points(11, 30, rng)
        assert count_rectangles_energy(F11, A) == count_rectangles_bruteforce(F11, A)


def test_rectangle_energy_refuses_square_minus_one():
    F5 = make_field(5)
    with pytest.raises(MinusOneIsSquare):
        count_rectangles_energy(F5, [(0, 0)])
    assert count_rectangles_energy(F5, [(0, 0)], allow_square_minus_one=True) == 1


def test_bruteforce_cap(F11, rng):
    with pytest.raises(InputTooLarge):
        count_rectangles_bruteforce(F11, random_points(11, 81, rng))


def test_trapezoid_counts(F7, F11, rng):
    assert count_trapezoids_bruteforce(F7, [(1, 2)], [(3, 4)]) == 1
    line2 = [(0, 0), (1, 1)]
    assert count_trapezoids_bruteforce(F7, line2, line2) == count_trapezoids_directional(F7, line2, line2)
    for _ in range(5):
        A, B = random_points(11, 20, rng), random_points(11, 20, rng)
        assert count_trapezoids_directional(F11, A, B) == count_trapezoids_bruteforce(F11, A, B)


def test_trapezoid_closed_forms(F7):
    A = random_points(7, 9, np.random.default_rng(3))
    assert count_trapezoids_directional(F7, A, [(2, 2)]) == 9
    for k in range(1, 8):
        line = [(x, (3 * x + 1) % 7) for x in range(k)]
        want = k**3 + (k * (k - 1)) ** 2
        assert count_trapezoids_directional(F7, line, line) == want
        assert count_trapezoids_bruteforce(F7, line, line) == want


def test_full_line_is_near_trivial_bound(F11):
    line = [(x, 2 * x % 11) for x in range(11)]
    T = count_trapezoids_directional(F11, line, line)
    assert T <= 11**4 and T / 11**4 >= 0.5


def test_symmetric_variant_matches_bruteforce(F7, rng):
    for _ in range(10):
        A, B = random_points(7, 8, rng), random_points(7, 6, rng)
        assert count_trapezoids_directional(F7, A, B, symmetric=True) == count_trapezoids_bruteforce(
            F7, A, B, symmetric=True
        )


def test_corner_counts(F7):
    assert count_corners(F7, [(5, 5)]) == 1
    A = [(0, 0), (1, 0), (0, 1)]
    by_hand = sum(is_corner(F7, *t) for t in itertools.product(A, repeat=3))
    assert count_corners(F7, A) == by_hand == 17
    # a non-isotropic line only carries degenerate corners (x0 = x1 or x1 = x2)
    line = [(x, (2 * x) % 7) for x in range(5)]
    assert count_corners(F7, line) == sum(is_corner(F7, *t) for t in itertools.product(line, repeat=3))
    assert count_corners(F7, line) == 2 * 5**2 - 5


def test_additive_energy_plane(F3, F7, rng):
    assert additive_energy_plane(F7, [(1, 1)]) == 1
    full = [(x, y) for x in range(3) for y in range(3)]
    # a finite group G has E(G) = |G|^3
    assert additive_energy_plane(F3, full) == 729
    A = random_points(7, 12, rng)
    pts = [tuple(p) for p in A]
    brute = sum(
        ((a[0] + b[0] - c[0] - d[0]) % 7, (a[1] + b[1] - c[1] - d[1]) % 7) == (0, 0)
        for a, b, c, d in itertools.product(pts, repeat=4)
    )
    assert additive_energy_plane(F7, A) == brute


def test_b_quantity(F11):
    rec = b_quantity(F11, [(0, 0)], [(0, 0)])
    assert (rec.T, rec.R_A, rec.R_B, rec.which_min) == (1, 1, 1, "T")
    line = [(x, x) for x in range(11)]
    rec = b_quantity(F11, line, line)
    assert rec.which_min == "R" and rec.T == 11**3 + 110**2
    grid = [(x, y) for x in range(3) for y in range(3)]
    rec = b_quantity(F11, grid, grid)
    assert rec.which_min == "T" and rec.value == rec.T


def test_pointset_validation_and_csv(F7, F27):
    with pytest.raises(ValueError):
        PointSet2(F7, [(0, 0), (0, 0)])
    with pytest.raises(ValueError):
        PointSet2(F7, [(7, 0)])
    A = PointSet2(F7, [(1, 2), (3, 4)])
    assert PointSet2.from_csv(F7, "# comment\n" + A.to_csv()) == A
    B = PointSet2(F27, [(5, 26), (0, 13)])
    text = B.to_csv()
    assert "2;2;2" in text
    assert PointSet2.from_csv(F27, text) == B
    assert PointSet2.from_csv(F27, "5,2;2;2\n0,13\n") == B
    with pytest.raises(ValueError):
        PointSet2.from_csv(F27, "27,0\n")
    with pytest.raises(ValueError):
        PointSet2.from_csv(F7, "1,2,3\n")


def test_count_dispatch(F7):
    grid = [(x, y) for x in range(3) for y in range(3)]
    rep = count(F7, "rect", grid, oracle=True)
    assert rep.value == rep.oracle_value
    rep = count(F7, "energy", grid, oracle=True)
    assert rep.value == rep.oracle_value
    with pytest.raises(ValueError):
        count(F7, "volume", grid)


point7 = st.tuples(st.integers(0, 6), st.integers(0, 6))
sets7 = st.sets(point7, min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(sets7, sets7)
def test_trapezoid_swap_identity(A, B):
    F7 = make_field(7)
    A, B = sorted(A), sorted(B)
    lhs = count_trapezoids_directional(F7, A, B) - len(A) * len(B) ** 2
    rhs = count_trapezoids_directional(F7, B, A) - len(B) * len(A) ** 2
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(sets7, point7)
def test_counters_monotone(A, extra):
    F7 = make_field(7)
    small = sorted(A)
    big = sorted(A | {extra})
    assert count_rectangles_energy(F7, small) <= count_rectangles_energy(F7, big)
    assert count_trapezoids_directional(F7, small, small) <= count_trapezoids_directional(F7, big, big)
    assert additive_energy_plane(F7, small) <= additive_energy_plane(F7, big)
    assert count_corners(F7, small) <= count_corners(F7, big)


@settings(max_examples=40, deadline=None)
@given(sets7, point7)
def test_counters_translation_invariant(A, v):
    F7 = make_field(7)
    A = sorted(A)
    moved = [((x + v[0]) % 7, (y + v[1]) % 7) for x, y in A]
    assert count_rectangles_energy(F7, A) == count_rectangles_energy(F7, moved)
    assert count_trapezoids_directional(F7, A, A) == count_trapezoids_directional(F7, moved, moved)
