import cmath
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ffrestrict.errors import DivisionByZero, EvenCharacteristic, MinusOneIsSquare, NonPrime, TooLarge
from ffrestrict.field import (
    additive_character,
    dot2,
    field_arith,
    gauss_constant,
    is_irreducible,
    lowest_irreducible,
    make_field,
    quadratic_character,
)


def poly_mul_oracle(a, b, p, modulus):
    """Schoolbook product of coefficient lists reduced by a monic modulus (pure Python)."""
    n = len(modulus) - 1
    prod = [0] * (2 * n - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    for k in range(2 * n - 2, n - 1, -1):
        c = prod[k]
        for i in range(n + 1):
            prod[k - n + i] = (prod[k - n + i] - c * modulus[i]) % p
    return prod[:n]


def test_make_field_examples(F27):
    assert make_field(3).q == 3 and not make_field(3).minus_one_is_square
    assert make_field(5).minus_one_is_square
    assert F27.q == 27 and not F27.minus_one_is_square
    # x^3 + 2x + 1, low degree first
    assert F27.modulus == (1, 2, 0, 1)


def test_minus_one_flag_matches_squares():
    for p, n in [(3, 1), (5, 1), (7, 1), (11, 1), (13, 1), (3, 2), (3, 3), (5, 2), (7, 2)]:
        ctx = make_field(p, n)
        x = ctx.elements()
        squares = set(np.asarray(ctx.mul(x, x)).tolist())
        assert ctx.minus_one_is_square == (ctx.neg(1) in squares)
        assert ctx.minus_one_is_square == (quadratic_character(ctx, ctx.neg(1)) == 1)


def test_make_field_errors():
    with pytest.raises(NonPrime):
        make_field(4)
    with pytest.raises(NonPrime):
        make_field(1)
    with pytest.raises(EvenCharacteristic):
        make_field(2)
    with pytest.raises(TooLarge):
        make_field(3, 10)


def test_lowest_irreducible():
    assert lowest_irreducible(3, 2) == (1, 0, 1)  # x^2 + 1
    assert is_irreducible([1, 2, 0, 1], 3)
    assert not is_irreducible([0, 0, 1], 3)
    assert lowest_irreducible(7, 1) == (0, 1)


def test_arith_examples(F7):
    assert field_arith(F7, "inv", 3) == 5
    assert field_arith(F7, "neg", 0) == 0
    assert field_arith(F7, "div", 1, 3) == 5
    assert field_arith(F7, "sub", 2, 5) == 4
    with pytest.raises(DivisionByZero):
        field_arith(F7, "inv", 0)
    with pytest.raises(ValueError):
        field_arith(F7, "pow", 1, 2)


def test_f27_multiplication_matches_polynomial_oracle(F27):
    for a, b in itertools.product(range(27), repeat=2):
        want = F27.from_coeffs(poly_mul_oracle(F27.to_coeffs(a), F27.to_coeffs(b), 3, F27.modulus))
        assert F27.mul(a, b) == want


def test_inverse_exhaustive():
    for p, n in [(3, 1), (7, 1), (3, 3), (5, 2), (11, 2)]:
        ctx = make_field(p, n)
        x = ctx.elements()[1:]
        assert np.all(np.asarray(ctx.mul(x, ctx.inv(x))) == 1)


def test_dot2_examples(F3, F7):
    assert dot2(F7, (1, 2), (3, 4)) == 4
    assert dot2(F7, (0, 0), (5, 6)) == 0
    assert dot2(F3, (1, 1), (1, 2)) == 0


def test_character_examples(F7, F27):
    assert additive_character(F7, 0) == pytest.approx(1)
    assert additive_character(F7, 1) == pytest.approx(cmath.exp(2j * cmath.pi / 7))
    assert abs(sum(additive_character(F27, a) for a in range(27))) < 1e-9


@pytest.mark.parametrize("p,n", [(3, 1), (7, 1), (5, 2), (7, 2)])
def test_character_is_homomorphism(p, n):
    ctx = make_field(p, n)
    x = ctx.elements()
    s = np.asarray(ctx.add(x[:, None], x[None, :]))
    e = ctx.character_table
    assert np.max(np.abs(e[s] - e[:, None] * e[None, :])) < 1e-12


@pytest.mark.parametrize("p,n", [(3, 1), (7, 1), (3, 3)])
def test_character_orthogonality(p, n):
    ctx = make_field(p, n)
    sums = ctx.char_matrix.sum(axis=1)
    want = np.zeros(ctx.q)
    want[0] = ctx.q
    assert np.max(np.abs(sums - want)) < 1e-9 * ctx.q


def test_quadratic_character(F7, F27):
    assert quadratic_character(F7, 2) == 1
    assert quadratic_character(F7, 6) == -1
    assert quadratic_character(F7, 0) == 0
    x = F27.elements()
    squares = set(np.asarray(F27.mul(x, x)).tolist())
    for a in range(1, 27):
        assert quadratic_character(F27, a) == (1 if a in squares else -1)
    for a, b in itertools.product(range(1, 27), repeat=2):
        assert F27.chi(F27.mul(a, b)) == F27.chi(a) * F27.chi(b)


def test_gauss_constant():
    for p, n in [(3, 1), (7, 1), (11, 1), (3, 3)]:
        assert abs(gauss_constant(make_field(p, n)) + 1) < 1e-9
    s5 = gauss_constant(make_field(5))
    assert abs(abs(s5) - 1) < 1e-9 and abs(s5 - 1) < 1e-9


def test_require_nonsquare():
    make_field(7).require_minus_one_nonsquare()
    with pytest.raises(MinusOneIsSquare):
        make_field(5).require_minus_one_nonsquare()
    make_field(5).require_minus_one_nonsquare(allow=True)


def test_to_json(F27):
    assert F27.to_json() == {"p": 3, "n": 3, "modulus_coeffs": [1, 2, 0, 1], "q": 27, "minus_one_is_square": False}


elem27 = st.integers(0, 26)


@settings(max_examples=200, deadline=None)
@given(elem27, elem27, elem27)
def test_f27_ring_axioms(a, b, c):
    ctx = make_field(3, 3)
    assert ctx.mul(a, ctx.add(b, c)) == ctx.add(ctx.mul(a, b), ctx.mul(a, c))
    assert ctx.mul(ctx.mul(a, b), c) == ctx.mul(a, ctx.mul(b, c))
    assert ctx.add(a, ctx.neg(a)) == 0
    # the trace is additive and the character a homomorphism
    tr = ctx.trace_table
    assert tr[ctx.add(a, b)] == (tr[a] + tr[b]) % 3


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 120), st.integers(1, 120))
def test_f121_division(a, b):
    ctx = make_field(11, 2)
    assert ctx.mul(ctx.div(a, b), b) == a


def test_frobenius_is_field_automorphism(F27):
    x = F27.elements()
    fx = np.asarray(F27.pow(x, 3))
    assert sorted(fx.tolist()) == list(range(27))
    y = x[::-1]
    assert np.array_equal(np.asarray(F27.pow(F27.mul(x, y), 3)), np.asarray(F27.mul(fx, F27.pow(y, 3))))
