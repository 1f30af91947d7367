"""Exact bookkeeping of piecewise bounds |G|^a |F|^b over ranges of gamma = log_|F| |G|.

A bound |G|^a |F|^b is the linear function a*gamma + b of gamma.  Tables
are lists of such terms with closed gamma-ranges; the universal |G|^(1/2)
term is an extra row on [0, 3].  Everything is done in ``Fraction``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import Infeasible, ParallelTerms, SchemaError, TableMismatch

F = Fraction
GAMMA_MAX = F(3)


@dataclass(frozen=True, order=True)
class Exponent:
    """The monomial |G|^a |F|^b."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", F(self.a))
        object.__setattr__(self, "b", F(self.b))

    def at(self, gamma) -> Fraction:
        return self.a * F(gamma) + self.b

    def __str__(self) -> str:
        return f"|G|^({self.a}) |F|^({self.b})"


@dataclass(frozen=True)
class Row:
    term: Exponent
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", F(self.lo))
        object.__setattr__(self, "hi", F(self.hi))
        if self.lo > self.hi:
            raise SchemaError(f"empty range [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class PiecewiseBound:
    rows: tuple[Row, ...]
    name: str = ""

    def terms(self) -> list[Exponent]:
        return [r.term for r in self.rows]

    def boundaries(self) -> list[Fraction]:
        return [r.hi for r in self.rows[:-1]]

    def covers(self, lo=0, hi=GAMMA_MAX) -> bool:
        rows = sorted(self.rows, key=lambda r: r.lo)
        if not rows or rows[0].lo > lo:
            return False
        reach = rows[0].hi
        for r in rows[1:]:
            if r.lo > reach:
                return False
            reach = max(reach, r.hi)
        return reach >= hi

    def row_for(self, gamma) -> Row:
        for r in self.rows:
            if r.lo <= gamma <= r.hi:
                return r
        raise ValueError(f"gamma={gamma} outside the table")

    def with_universal(self) -> "PiecewiseBound":
        return PiecewiseBound(self.rows + (Row(Exponent(F(1, 2), 0), 0, GAMMA_MAX),), self.name)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "rows": [
                {"a": str(r.term.a), "b": str(r.term.b), "lo": str(r.lo), "hi": str(r.hi)} for r in self.rows
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseBound":
        try:
            rows = tuple(
                Row(Exponent(F(r["a"]), F(r["b"])), F(r["lo"]), F(r["hi"])) for r in data["rows"]
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad table: {exc}") from None
        if not rows:
            raise SchemaError("table has no rows")
        return cls(rows, data.get("name", ""))

    @classmethod
    def load(cls, path) -> "PiecewiseBound":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: {exc}") from None
        return cls.from_json(data)


@dataclass(frozen=True)
class RestrictionExponent:
    r_prime: Fraction
    r: Fraction

    @classmethod
    def from_r_prime(cls, r_prime: Fraction) -> "RestrictionExponent":
        return cls(r_prime, r_prime / (r_prime - 1))


TABLE_IDS = ("mt", "prime", "new")


def load_table(table_id: str) -> PiecewiseBound:
    if table_id not in TABLE_IDS:
        raise SchemaError(f"unknown table {table_id!r}; expected one of {TABLE_IDS}")
    text = resources.files("ffrestrict.data").joinpath(f"table_{table_id}.json").read_text(encoding="utf-8")
    return PiecewiseBound.from_json(json.loads(text))


# -- the calculus -------------------------------------------------------------------------


def dominates(term: Exponent, rng: tuple, target: Exponent) -> bool:
    """term <= target on the whole range; linear in gamma, so the endpoints decide."""
    lo, hi = F(rng[0]), F(rng[1])
    if lo > hi:
        raise ValueError("empty range")
    return all(term.at(g) <= target.at(g) for g in (lo, hi))


def implied_restriction_exponent(table: PiecewiseBound, include_universal: bool = True) -> RestrictionExponent:
    """Smallest 1/r' with |G|^a |F|^b <= |G|^(1/r') on every row.

    This is the max over rows and range endpoints gamma > 0 of a + b/gamma;
    an endpoint at gamma = 0 only requires b <= 0.
    """
    if include_universal:
        table = table.with_universal()
    if not table.covers():
        raise SchemaError("table rows must cover [0, 3]")
    best = None
    for row in table.rows:
        for g in (row.lo, row.hi):
            if g == 0:
                if row.term.b > 0:
                    raise Infeasible(f"{row.term} grows without bound as |G| -> 1")
                continue
            v = row.term.a + row.term.b / g
            best = v if best is None or v > best else best
    if best is None or best <= 0 or best >= 1:
        raise Infeasible(f"1/r' = {best} out of range")
    return RestrictionExponent.from_r_prime(1 / best)


def crossover(t1: Exponent, t2: Exponent) -> Fraction:
    if t1.a == t2.a:
        raise ParallelTerms(f"{t1} and {t2} never cross")
    return (t2.b - t1.b) / (t1.a - t2.a)


def crossover_points(terms: Sequence[Exponent]) -> list[Fraction]:
    if len(terms) < 2:
        raise ValueError("need at least two terms")
    return [crossover(t1, t2) for t1, t2 in zip(terms, terms[1:])]


def verify_crossovers(table: PiecewiseBound) -> list[tuple[Fraction, Fraction]]:
    """(stated boundary, computed intersection) for adjacent rows."""
    return list(zip(table.boundaries(), crossover_points(table.terms())))


def lower_envelope(bounds: Iterable[Sequence[Exponent]], lo=0, hi=GAMMA_MAX) -> PiecewiseBound:
    """min over bounds of (max over each bound's terms), as a table.

    Each bound is a list of terms whose sum (equivalently, up to constants,
    maximum) is a valid estimate for every gamma.
    """
    bounds = [tuple(b) for b in bounds]
    lo, hi = F(lo), F(hi)
    cuts = {lo, hi}
    all_terms = {t for b in bounds for t in b}
    for t1 in all_terms:
        for t2 in all_terms:
            if t1.a != t2.a:
                g = crossover(t1, t2)
                if lo < g < hi:
                    cuts.add(g)
    cuts = sorted(cuts)

    def active(g):
        vals = [max(b, key=lambda t: (t.at(g), t.a)) for b in bounds]
        return min(vals, key=lambda t: (t.at(g), -t.a))

    rows: list[Row] = []
    for a, b in zip(cuts, cuts[1:]):
        term = active((a + b) / 2)
        if rows and rows[-1].term == term:
            rows[-1] = Row(term, rows[-1].lo, b)
        else:
            rows.append(Row(term, a, b))
    return PiecewiseBound(tuple(rows), "envelope")


# -- transcribed estimates ------------------------------------------------------------------

DECAY = Exponent(1, F(-1, 2))
MT = Exponent(F(11, 16), F(1, 16))
VINH = Exponent(F(5, 8), F(3, 16))
PARSEVAL = Exponent(F(1, 2), F(1, 2))
PRIOR_ESTIMATES = (DECAY, MT, VINH, PARSEVAL)

# Bracket terms of the updated estimate after w <= |F|, as transcribed.
TRANSCRIBED_BRACKET_TERMS = (
    Exponent(F(11, 16), F(-1, 8)),
    Exponent(F(13, 16), F(-3, 16)),
    Exponent(F(17, 24), 0),
    Exponent(F(5, 8), F(1, 8)),
)

# Min-bound on B(A, B) for |A| ~ |B| ~ m: terms m^c |F|^d, keyed (c, d).
PROP_MIN_TERMS = ((F(8, 3), F(2, 3)), (F(7, 2), F(0)))
HYPOTHETICAL_CUBIC = ((F(3), F(0)),)


@dataclass(frozen=True)
class Monomial:
    """|G|^G |F|^F w^w m^m with rational exponents."""

    G: Fraction = F(0)
    Fe: Fraction = F(0)
    w: Fraction = F(0)
    m: Fraction = F(0)

    def __mul__(self, o: "Monomial") -> "Monomial":
        return Monomial(self.G + o.G, self.Fe + o.Fe, self.w + o.w, self.m + o.m)

    def __pow__(self, k) -> "Monomial":
        k = F(k)
        return Monomial(self.G * k, self.Fe * k, self.w * k, self.m * k)

    def substitute_m(self) -> "Monomial":
        """m = |G| w^-1."""
        return Monomial(self.G + self.m, self.Fe, self.w - self.m, F(0))

    def maximize_w(self) -> "Monomial":
        """1 <= w <= |F|: a nonnegative w-power is largest at w = |F|."""
        if self.m:
            raise ValueError("substitute m first")
        if self.w >= 0:
            return Monomial(self.G, self.Fe + self.w, F(0), F(0))
        return Monomial(self.G, self.Fe, F(0), F(0))

    def as_exponent(self) -> Exponent:
        if self.w or self.m:
            raise ValueError("free w or m left")
        return Exponent(self.G, self.Fe)


def bracket_terms(prop_terms=PROP_MIN_TERMS) -> list[Monomial]:
    """The bracket sum_z R^1/2 + q^-1/2 sum_{z!=z'} B^1/2 + sum |G_z|^1/2|G_z'|^1/2.

    The diagonal uses R <= |G_z|^(5/2) and sum_z |G_z|^(5/4) <= |G|^(5/4);
    each off-diagonal B-term m^c |F|^d contributes |F|^-1/2 w^2 m^(c/2) |F|^(d/2);
    the last sum is at most q |G|.
    """
    out = [Monomial(G=F(5, 4))]
    for c, d in prop_terms:
        out.append(Monomial(Fe=F(-1, 2), w=F(2)) * Monomial(m=c / 2, Fe=d / 2))
    out.append(Monomial(G=F(1), Fe=F(1)))
    return out


def derive_bracket_terms(prop_terms=PROP_MIN_TERMS) -> list[Exponent]:
    """Push the bracket through m = |G|/w, w <= |F|, the 1/4 power and the prefactor."""
    prefactor = Monomial(G=F(3, 8), Fe=F(-1, 8))
    return [
        (prefactor * (mono.substitute_m().maximize_w() ** F(1, 4))).as_exponent()
        for mono in bracket_terms(prop_terms)
    ]


def derive_updated_table(prop_terms=PROP_MIN_TERMS) -> PiecewiseBound:
    """Rebuild the updated table from the derived terms and the prior estimates.

    The derived terms must equal the transcribed bracket; the table keeps the
    transcribed row sequence (decay, the two new terms, Vinh, Parseval) and its
    range boundaries are recomputed as crossovers of adjacent rows.  The
    result is compared row by row with the shipped transcription.
    """
    derived = derive_bracket_terms(prop_terms)
    if sorted(derived) != sorted(TRANSCRIBED_BRACKET_TERMS):
        raise TableMismatch(f"derived {list(map(str, derived))} != transcribed bracket")
    new_terms = [t for t in derived if t in (Exponent(F(13, 16), F(-3, 16)), Exponent(F(17, 24), 0))]
    new_terms.sort(key=lambda t: -t.a)
    sequence = [DECAY, *new_terms, VINH, PARSEVAL]
    cuts = [F(0)] + crossover_points(sequence) + [GAMMA_MAX]
    table = PiecewiseBound(
        tuple(Row(t, lo, hi) for t, lo, hi in zip(sequence, cuts, cuts[1:])), "new-derived"
    )
    shipped = load_table("new")
    if [(r.term, r.lo, r.hi) for r in table.rows] != [(r.term, r.lo, r.hi) for r in shipped.rows]:
        raise TableMismatch("derived table differs from the transcription")
    return table


# Interface name kept for callers that follow the published API.
derive_section5_table = derive_updated_table


def envelope_exponent(prop_terms=PROP_MIN_TERMS) -> tuple[PiecewiseBound, RestrictionExponent]:
    """Exponent from min(prior estimates, sum of derived terms) at every gamma.

    Unlike the shipped table, this keeps every derived term alive on the
    whole range, since the new estimate is their sum.
    """
    derived = derive_bracket_terms(prop_terms)
    env = lower_envelope([(t,) for t in PRIOR_ESTIMATES] + [tuple(derived)])
    return env, implied_restriction_exponent(env)


def cubic_remark_exponent() -> RestrictionExponent:
    """Exponent reached if the leading term of the min-bound were m^3."""
    return envelope_exponent(HYPOTHETICAL_CUBIC)[1]


def describe(table: PiecewiseBound) -> dict:
    """Report for one table: exponent, winning term per range and crossovers."""
    exp = implied_restriction_exponent(table)
    return {
        "table": table.name,
        "r": str(exp.r),
        "r_prime": str(exp.r_prime),
        "rows": table.to_json()["rows"],
        "crossovers": [
            {"stated": str(s), "computed": str(c), "match": s == c} for s, c in verify_crossovers(table)
        ],
    }
