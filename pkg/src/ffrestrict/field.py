"""Finite fields F_q, q = p^n with p an odd prime.

Elements are encoded as integers in ``[0, q)``: the coefficient vector
``(c_0, ..., c_{n-1})`` of a polynomial over Z_p reduced modulo the field's
modulus maps to ``c_0 + c_1 p + ... + c_{n-1} p^(n-1)``.  For ``n = 1`` this is
the ordinary residue.  Every arithmetic method accepts Python ints or numpy
integer arrays and broadcasts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DivisionByZero,
    EvenCharacteristic,
    MinusOneIsSquare,
    NoIrreducibleFound,
    NonPrime,
    TooLarge,
)

DEFAULT_MAX_ORDER = 2**14
# add/mul lookup tables are built for extension fields up to this order
_TABLE_MAX_ORDER = 256


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def _poly_rem(a: list[int], b: list[int], p: int) -> list[int]:
    """Remainder of a by monic b over Z_p (coefficients low -> high)."""
    a = [c % p for c in a]
    db = len(b) - 1
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k]
        if c:
            for i in range(db + 1):
                a[k - db + i] = (a[k - db + i] - c * b[i]) % p
    return a[:db]


def is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    n = len(coeffs) - 1
    if n <= 1:
        return n == 1
    for d in range(1, n // 2 + 1):
        for enc in range(p**d):
            div = [(enc // p**i) % p for i in range(d)] + [1]
            if not any(_poly_rem(list(coeffs), div, p)):
                return False
    return True


def lowest_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree n, ordered by c_0 + c_1 p + ... ."""
    if n == 1:
        return (0, 1)
    for enc in range(p**n):
        coeffs = [(enc // p**i) % p for i in range(n)] + [1]
        if is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise NoIrreducibleFound(f"no irreducible polynomial of degree {n} over F_{p}")


def _out(x):
    if isinstance(x, np.ndarray) and x.ndim == 0:
        return int(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass(frozen=True)
class FieldCtx:
    """An odd-characteristic finite field with its characters.

    Build instances with :func:`make_field`; the constructor trusts its
    arguments.
    """

    p: int
    n: int
    modulus: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p**self.n

    @property
    def minus_one_is_square(self) -> bool:
        return self.q % 4 == 1

    def __repr__(self) -> str:
        return f"FieldCtx(q={self.q}={self.p}^{self.n})"

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "modulus_coeffs": list(self.modulus),
            "q": self.q,
            "minus_one_is_square": self.minus_one_is_square,
        }

    # -- encoding ---------------------------------------------------------

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def const(self, k: int) -> int:
        """The image of the integer k in the prime subfield."""
        return k % self.p

    def to_coeffs(self, a: int) -> list[int]:
        return [(int(a) // self.p**i) % self.p for i in range(self.n)]

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) != self.n or any(not 0 <= c < self.p for c in coeffs):
            raise ValueError(f"need {self.n} coefficients in [0, {self.p})")
        return sum(int(c) * self.p**i for i, c in enumerate(coeffs))

    @cached_property
    def _powers(self) -> np.ndarray:
        return self.p ** np.arange(self.n, dtype=np.int64)

    def _digits(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] // self._powers) % self.p

    def _undigits(self, d: np.ndarray) -> np.ndarray:
        return (d * self._powers).sum(axis=-1)

    # -- raw polynomial arithmetic (n > 1) --------------------------------

    def _poly_add(self, a, b):
        return self._undigits((self._digits(a) + self._digits(b)) % self.p)

    def _poly_neg(self, a):
        return self._undigits((-self._digits(a)) % self.p)

    def _poly_mul(self, a, b):
        p, n = self.p, self.n
        da, db = np.broadcast_arrays(self._digits(a), self._digits(b))
        prod = np.zeros(da.shape[:-1] + (2 * n - 1,), dtype=np.int64)
        for i in range(n):
            prod[..., i : i + n] += da[..., i : i + 1] * db
        prod %= p
        mod = np.asarray(self.modulus[:n], dtype=np.int64)
        for k in range(2 * n - 2, n - 1, -1):
            c = prod[..., k : k + 1]
            prod[..., k - n : k] = (prod[..., k - n : k] - c * mod) % p
        return self._undigits(prod[..., :n])

    @cached_property
    def _tables(self):
        if self.n == 1 or self.q > _TABLE_MAX_ORDER:
            return None
        x = self.elements()
        return self._poly_add(x[:, None], x[None, :]), self._poly_mul(x[:, None], x[None, :])

    # -- field operations -------------------------------------------------

    def add(self, a, b):
        if self.n == 1:
            return _out((np.asarray(a) + np.asarray(b)) % self.p) if _is_arr(a, b) else (a + b) % self.p
        t = self._tables
        return _out(t[0][a, b] if t is not None else self._poly_add(a, b))

    def neg(self, a):
        if self.n == 1:
            return _out((-np.asarray(a)) % self.p) if _is_arr(a) else (-a) % self.p
        return _out(self._neg_table[a])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.n == 1:
            return _out((np.asarray(a) * np.asarray(b)) % self.p) if _is_arr(a, b) else (a * b) % self.p
        t = self._tables
        return _out(t[1][a, b] if t is not None else self._poly_mul(a, b))

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise DivisionByZero("zero has no inverse")
        return _out(self._inv_table[a])

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, k: int):
        """a**k for k >= 0 by square-and-multiply (vectorized)."""
        result = np.ones_like(np.asarray(a, dtype=np.int64))
        base = np.asarray(a, dtype=np.int64)
        while k:
            if k & 1:
                result = np.asarray(self.mul(result, base))
            base = np.asarray(self.mul(base, base))
            k >>= 1
        return _out(result)

    @cached_property
    def _neg_table(self) -> np.ndarray:
        x = self.elements()
        return x if self.q == 1 else np.asarray(self._poly_neg(x) if self.n > 1 else (-x) % self.p)

    @cached_property
    def _inv_table(self) -> np.ndarray:
        x = self.elements()
        inv = np.asarray(self.pow(x, self.q - 2))
        inv[0] = 0
        return inv

    # -- characters -------------------------------------------------------

    @cached_property
    def trace_table(self) -> np.ndarray:
        """Absolute trace Tr_{F_q/F_p}, as residues in [0, p)."""
        x = self.elements()
        acc = x.copy()
        frob = x
        for _ in range(self.n - 1):
            frob = np.asarray(self.pow(frob, self.p))
            acc = np.asarray(self.add(acc, frob))
        if np.any(acc >= self.p):
            raise AssertionError("trace left the prime subfield")
        return acc

    @cached_property
    def character_table(self) -> np.ndarray:
        """e(a) = exp(2 pi i Tr(a) / p) for every element a."""
        return np.exp(2j * np.pi * self.trace_table / self.p)

    @cached_property
    def char_matrix(self) -> np.ndarray:
        """W[a, b] = e(a * b), the 1-D Fourier matrix of the field."""
        x = self.elements()
        return self.character_table[np.asarray(self.mul(x[:, None], x[None, :]))]

    def e(self, a):
        val = self.character_table[np.asarray(a, dtype=np.int64)]
        return complex(val) if np.ndim(val) == 0 else val

    @cached_property
    def chi_table(self) -> np.ndarray:
        x = self.elements()
        squares = np.zeros(self.q, dtype=bool)
        squares[np.asarray(self.mul(x, x))] = True
        chi = np.where(squares, 1, -1).astype(np.int64)
        chi[0] = 0
        return chi

    def chi(self, a):
        return _out(self.chi_table[np.asarray(a, dtype=np.int64)])

    @cached_property
    def gauss_constant(self) -> complex:
        x = self.elements()
        g = self.character_table[np.asarray(self.mul(x, x))].sum()
        return complex(g * g / self.q)

    def require_minus_one_nonsquare(self, allow: bool = False) -> None:
        if self.minus_one_is_square and not allow:
            raise MinusOneIsSquare(
                f"-1 is a square in F_{self.q}; pass allow_square_minus_one=True to override"
            )


def _is_arr(*xs) -> bool:
    return any(isinstance(x, np.ndarray) or isinstance(x, np.integer) for x in xs)


def make_field(p: int, n: int = 1, max_order: int = DEFAULT_MAX_ORDER) -> FieldCtx:
    if not is_prime(p):
        raise NonPrime(f"{p} is not prime")
    if p == 2:
        raise EvenCharacteristic("characteristic 2 is not supported")
    if n < 1:
        raise ValueError("extension degree must be >= 1")
    if p**n > max_order:
        raise TooLarge(f"q = {p}^{n} exceeds the cap {max_order}")
    return FieldCtx(p=p, n=n, modulus=lowest_irreducible(p, n))


_OPS = {"add", "sub", "mul", "neg", "inv", "div"}


def field_arith(ctx: FieldCtx, op: str, a, b=None):
    if op not in _OPS:
        raise ValueError(f"unknown op {op!r}")
    if op in ("neg", "inv"):
        return getattr(ctx, op)(a)
    if b is None:
        raise ValueError(f"{op} needs two operands")
    return getattr(ctx, op)(a, b)


def dot2(ctx: FieldCtx, a, b):
    """a . b for vectors along the last axis (length 2)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return ctx.add(ctx.mul(a[..., 0], b[..., 0]), ctx.mul(a[..., 1], b[..., 1]))


def additive_character(ctx: FieldCtx, a):
    return ctx.e(a)


def quadratic_character(ctx: FieldCtx, a):
    return ctx.chi(a)


def gauss_constant(ctx: FieldCtx) -> complex:
    """sigma_F = q^-1 (sum_y e(y^2))^2, the unimodular constant of the kernel."""
    return ctx.gauss_constant
