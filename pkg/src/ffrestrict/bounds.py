"""Set families and a sweep harness measuring the constants of the estimates.

Each check turns one instance into one or more :class:`InstanceRow` records
``(check, q, family, params, lhs, rhs, ratio)``.  Rows come in three kinds:

* ``exact``: lhs <= rhs must hold per instance (up to ``tolerance``);
* ``identity``: lhs == rhs up to ``tolerance`` relative to 1 + |lhs|;
* ``bound``: an estimate with an unspecified constant; the ratio is compared
  against a frozen ceiling.

:func:`run_suite` aggregates the maximum ratio per (check, q) and decides the
exit status.  Everything is deterministic given the seeds.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .counting import (
    PointSet2,
    additive_energy_plane,
    as_pointset,
    count_trapezoids_directional,
    paraboloid_energy,
)
from .errors import ClassMismatch, FFRestrictError, InfeasibleSpec, NotRegular, SizeMismatch
from .exponents import derive_bracket_terms, load_table
from .extension import (
    FunctionF3,
    convolve_K,
    mt_chain_check,
    norm_Lq_P,
    restrict_fourier,
)
from .field import FieldCtx, make_field
from .regularity import (
    LineF2,
    RegularPart,
    SlicedFunction,
    decompose_k_regular,
    is_irregular,
    regularize_function,
    validate_k_regular,
    validate_regular_function,
)

log = logging.getLogger(__name__)

DEFAULT_CEILING = 16.0
DEFAULT_TOLERANCE = 1e-9
CSV_COLUMNS = ("check", "q", "family", "params", "lhs", "rhs", "ratio")

# -- families ---------------------------------------------------------------------------

PLANAR_KINDS = ("random", "parallel_lines", "grid", "few_directions", "single_line")
SPATIAL_KINDS = ("paraboloid_subset", "product_slices", "random3")
KINDS = PLANAR_KINDS + SPATIAL_KINDS


@dataclass(frozen=True)
class FamilySpec:
    """A set family and its size parameters.

    random(m); parallel_lines(lines, per_line, slope=1); grid(a, b);
    few_directions(directions, per_line); single_line(n, slope=1);
    paraboloid_subset(m); random3(m); product_slices(w, inner=<planar
    kind>, ...inner params).
    """

    kind: str
    params: tuple = ()
    seed: int = 0

    @classmethod
    def make(cls, kind: str, seed: int = 0, **params) -> "FamilySpec":
        if kind not in KINDS:
            raise InfeasibleSpec(f"unknown family {kind!r}")
        return cls(kind, tuple(sorted(params.items())), seed)

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    def label(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.params)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}


def _rng(ctx: FieldCtx, spec: FamilySpec, rng):
    return rng if rng is not None else np.random.default_rng([spec.seed, ctx.q])


def _need(cond: bool, msg: str):
    if not cond:
        raise InfeasibleSpec(msg)


def _line_groups(ctx: FieldCtx, spec: FamilySpec, rng) -> list[tuple[LineF2, np.ndarray]]:
    q = ctx.q
    if spec.kind in ("parallel_lines", "single_line"):
        lines = 1 if spec.kind == "single_line" else int(spec.get("lines"))
        n = int(spec.get("n" if spec.kind == "single_line" else "per_line"))
        slope = int(spec.get("slope", 1))
        _need(1 <= lines <= q and 1 <= n <= q and 0 <= slope < q, f"{spec} does not fit in F_{q}")
        x = ctx.elements()[:n]
        return [
            (LineF2(slope, c), np.stack([x, np.asarray(ctx.add(ctx.mul(slope, x), c))], axis=1))
            for c in range(lines)
        ]
    if spec.kind == "grid":
        a, b = int(spec.get("a")), int(spec.get("b"))
        _need(1 <= a <= q and 1 <= b <= q, f"grid {a}x{b} does not fit in F_{q}")
        x = ctx.elements()[:a]
        return [(LineF2(0, c), np.stack([x, np.full(a, c)], axis=1)) for c in range(b)]
    if spec.kind == "few_directions":
        d, n = int(spec.get("directions")), int(spec.get("per_line"))
        _need(1 <= d <= q and 1 <= n <= q - 1, f"{spec} does not fit in F_{q}")
        x = ctx.elements()[1 : n + 1]
        return [(LineF2(s, 0), np.stack([x, np.asarray(ctx.mul(s, x))], axis=1)) for s in range(d)]
    raise InfeasibleSpec(f"{spec.kind} is not a union of lines")


def generate(ctx: FieldCtx, spec: FamilySpec, rng=None) -> PointSet2 | FunctionF3:
    """Deterministic instance of a family (seeded by spec.seed and q unless rng is given)."""
    rng = _rng(ctx, spec, rng)
    q = ctx.q
    if spec.kind == "random":
        m = int(spec.get("m"))
        _need(0 <= m <= q * q, f"random set of size {m} does not fit in F_{q}^2")
        idx = np.sort(rng.choice(q * q, size=m, replace=False))
        return PointSet2(ctx, np.stack([idx // q, idx % q], axis=1))
    if spec.kind in PLANAR_KINDS:
        groups = _line_groups(ctx, spec, rng)
        return PointSet2(ctx, np.concatenate([g for _, g in groups]))
    if spec.kind == "random3":
        m = int(spec.get("m"))
        _need(0 <= m <= q**3, f"random set of size {m} does not fit in F_{q}^3")
        idx = np.sort(rng.choice(q**3, size=m, replace=False))
        return FunctionF3.indicator(ctx, np.stack([idx // (q * q), (idx // q) % q, idx % q], axis=1))
    if spec.kind == "paraboloid_subset":
        m = int(spec.get("m"))
        _need(0 <= m <= q * q, f"paraboloid subset of size {m} exceeds q^2")
        idx = np.sort(rng.choice(q * q, size=m, replace=False))
        x, y = idx // q, idx % q
        z = np.asarray(ctx.add(ctx.mul(x, x), ctx.mul(y, y)))
        return FunctionF3.indicator(ctx, np.stack([x, y, z], axis=1))
    if spec.kind == "product_slices":
        w = int(spec.get("w"))
        _need(1 <= w <= q, f"{w} slices do not fit in F_{q}")
        inner = FamilySpec(spec.get("inner", "random"), tuple((k, v) for k, v in spec.params if k not in ("w", "inner")))
        heights = np.sort(rng.choice(q, size=w, replace=False))
        vals = np.zeros((q, q, q), dtype=complex)
        for z in heights:
            S = generate(ctx, inner, rng)
            vals[S.pts[:, 0], S.pts[:, 1], int(z)] = 1
        return FunctionF3(ctx, vals)
    raise InfeasibleSpec(f"unknown family {spec.kind!r}")


def generate_part(ctx: FieldCtx, spec: FamilySpec, rng=None) -> RegularPart:
    """The family as a k-regular part whose frame is its defining lines."""
    part = RegularPart.from_lines(ctx, _line_groups(ctx, spec, _rng(ctx, spec, rng)))
    counts = part.line_counts()
    part.band = max(counts).bit_length() - 1 if counts else -1
    return part


# -- rows and reports --------------------------------------------------------------------------


@dataclass(frozen=True)
class InstanceRow:
    check: str
    q: int
    family: str
    params: str
    lhs: float
    rhs: float
    kind: str = "bound"

    @property
    def ratio(self) -> float:
        if self.kind == "identity":
            return abs(self.lhs - self.rhs) / (1 + abs(self.lhs))
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs <= 0 else math.inf

    def csv_fields(self) -> list[str]:
        return [self.check, str(self.q), self.family, self.params, _fmt(self.lhs), _fmt(self.rhs), _fmt(self.ratio)]


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass
class SweepReport:
    rows: list[InstanceRow] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    ceilings: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOLERANCE

    def extend(self, other: "SweepReport") -> None:
        self.rows.extend(other.rows)
        self.errors.extend(other.errors)

    def max_ratios(self) -> dict[tuple[str, int], float]:
        out: dict[tuple[str, int], float] = {}
        for r in self.rows:
            key = (r.check, r.q)
            out[key] = max(out.get(key, 0.0), r.ratio)
        return out

    def kinds(self) -> dict[str, str]:
        return {r.check: r.kind for r in self.rows}

    def ceiling(self, check: str) -> float:
        kind = self.kinds().get(check, "bound")
        if kind == "exact":
            return 1.0 + self.tolerance
        if kind == "identity":
            return self.tolerance
        return float(self.ceilings.get(check, DEFAULT_CEILING))

    def violations(self) -> list[dict]:
        out = []
        for (check, q), ratio in sorted(self.max_ratios().items()):
            ceil = self.ceiling(check)
            if not ratio <= ceil:
                out.append({"check": check, "q": q, "max_ratio": ratio, "ceiling": ceil})
        return out

    def stability(self, slack: float = 1.25, base_q: int = 7) -> dict[str, bool]:
        """Per bound check: max ratio at each q > base_q within slack of the previous q >= base_q."""
        mr = self.max_ratios()
        out = {}
        for check, kind in sorted(self.kinds().items()):
            if kind != "bound":
                continue
            qs = sorted(q for c, q in mr if c == check and q >= base_q)
            out[check] = all(mr[(check, b)] <= slack * mr[(check, a)] for a, b in zip(qs, qs[1:]))
        return out

    @property
    def ok(self) -> bool:
        return not self.violations()

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.config, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def summary(self) -> dict:
        mr = self.max_ratios()
        kinds = self.kinds()
        return {
            "version": __version__,
            "config": self.config,
            "tolerance": self.tolerance,
            "instances": len(self.rows),
            "checks": {
                check: {
                    "kind": kinds[check],
                    "ceiling": self.ceiling(check),
                    "max_ratio": {str(q): mr[(c, q)] for c, q in sorted(mr) if c == check},
                }
                for check in sorted(kinds)
            },
            "stability": self.stability(),
            "violations": self.violations(),
            "errors": self.errors,
            "verdict": "ok" if self.ok else "violation",
        }


# -- counters (overridable for the harness self-test) -----------------------------------------


@dataclass(frozen=True)
class Counters:
    rect: Callable = paraboloid_energy
    trap: Callable = count_trapezoids_directional
    energy_plane: Callable = additive_energy_plane


DEFAULT_COUNTERS = Counters()


def _b_value(ctx, A, B, counters: Counters) -> tuple[float, int, int, int]:
    T = counters.trap(ctx, A, B)
    ra, rb = counters.rect(ctx, A), counters.rect(ctx, B)
    return min(float(T), ctx.q * math.sqrt(ra * rb)), T, ra, rb


# -- checks -------------------------------------------------------------------------------


def _part_points(x) -> PointSet2:
    return x.points if isinstance(x, RegularPart) else x


def _require_regular(ctx, part: RegularPart) -> None:
    if not validate_k_regular(ctx, part):
        raise NotRegular(f"part with k={part.k} and {len(part.points)} points is not k-regular")


def check_energy_bounds(ctx: FieldCtx, A, family="", params="", counters=DEFAULT_COUNTERS) -> SweepReport:
    """R(A) against |A|^(5/2) and q^-1 |A|^3 + |A|^2 q^(1/2)."""
    A = as_pointset(ctx, A)
    n, q = len(A), ctx.q
    R = counters.rect(ctx, A)
    return SweepReport(
        [
            InstanceRow("energy_elementary", q, family, params, R, n**2.5),
            InstanceRow("energy_incidence", q, family, params, R, n**3 / q + n**2 * math.sqrt(q)),
        ]
    )


def check_kregular_rectangles(ctx: FieldCtx, part: RegularPart, family="", params="", counters=DEFAULT_COUNTERS) -> SweepReport:
    """R(A) against |A|^2 k."""
    _require_regular(ctx, part)
    n = len(part.points)
    R = counters.rect(ctx, part.points)
    return SweepReport([InstanceRow("kregular_rect", ctx.q, family, f"{params};k={part.k}".strip(";"), R, n * n * part.k)])


def trapezoid_lemma_bound(A1, A2) -> float:
    n1, n2 = len(_part_points(A1)), len(_part_points(A2))
    if isinstance(A1, RegularPart) and isinstance(A2, RegularPart):
        k1, k2 = A1.k, A2.k
        return n1 * n1 * n2 * k2 + n1 * n2 * n2 * k1 + (n1 * n2) ** 2 / (k1 * k2)
    return min(n1**1.5 * n2**2, n2**1.5 * n1**2)


def check_trapezoid_lemma(ctx: FieldCtx, A1, A2, family="", params="", counters=DEFAULT_COUNTERS) -> SweepReport:
    """T(A1, A2) against the k-regular three-term bound, or the irregular bound.

    Pass two RegularParts for the regular case and two PointSet2 that are
    irregular for the other.  The trivial T <= |A1|^2 |A2|^2 is recorded as
    an exact row.
    """
    regular = isinstance(A1, RegularPart), isinstance(A2, RegularPart)
    if all(regular):
        _require_regular(ctx, A1)
        _require_regular(ctx, A2)
        tag = f"k1={A1.k};k2={A2.k}"
    elif not any(regular):
        A1, A2 = as_pointset(ctx, A1), as_pointset(ctx, A2)
        if not (is_irregular(ctx, A1) and is_irregular(ctx, A2)):
            raise NotRegular("both sets must be irregular")
        tag = "irregular"
    else:
        raise NotRegular("mixed regular and irregular arguments")
    P1, P2 = _part_points(A1), _part_points(A2)
    T = counters.trap(ctx, P1, P2)
    n1, n2 = len(P1), len(P2)
    params = f"{params};{tag}".strip(";")
    return SweepReport(
        [
            InstanceRow("trapezoid_lemma", ctx.q, family, params, T, trapezoid_lemma_bound(A1, A2)),
            InstanceRow("trapezoid_trivial", ctx.q, family, params, T, (n1 * n2) ** 2, "exact"),
        ]
    )


def regularity_class(ctx: FieldCtx, A) -> tuple:
    """("irregular",), ("regular", floor(log2 k)) or ("mixed",)."""
    if isinstance(A, RegularPart):
        return ("regular", A.k.bit_length() - 1)
    A = as_pointset(ctx, A)
    if is_irregular(ctx, A):
        return ("irregular",)
    dec = decompose_k_regular(ctx, A, threshold="residual")
    if len(dec.parts) == 1 and not len(dec.remainder) and validate_k_regular(ctx, dec.parts[0]):
        return ("regular", dec.parts[0].k.bit_length() - 1)
    return ("mixed",)


def prop_min_bound(q: int, m: float) -> float:
    return m ** (8 / 3) * q ** (2 / 3) + m**3.5


def check_prop_min(ctx: FieldCtx, A, B, family="", params="", counters=DEFAULT_COUNTERS) -> SweepReport:
    """min{q (R(A) R(B))^(1/2), T(A, B)} against m^(8/3) q^(2/3) + m^(7/2), m = (|A||B|)^(1/2)."""
    ca, cb = regularity_class(ctx, A), regularity_class(ctx, B)
    if ca != cb or ca == ("mixed",):
        raise ClassMismatch(f"classes {ca} and {cb} do not match")
    A, B = _part_points(A), _part_points(B)
    na, nb = len(A), len(B)
    if not (na <= 2 * nb and nb <= 2 * na):
        raise SizeMismatch(f"sizes {na} and {nb} are not within a factor 2")
    value, T, _, _ = _b_value(ctx, A, B, counters)
    m = math.sqrt(na * nb)
    params = f"{params};class={'-'.join(map(str, ca))}".strip(";")
    return SweepReport(
        [
            InstanceRow("prop_min", ctx.q, family, params, value, prop_min_bound(ctx.q, m)),
            InstanceRow("min_le_trapezoids", ctx.q, family, params, value, T, "exact"),
        ]
    )


def check_l4(ctx: FieldCtx, A, family="", params="", counters=DEFAULT_COUNTERS, z: int = 0) -> SweepReport:
    """||G*K||_4^4 for G = 1_{A x {z}}: identity, upper and lower envelope versus q^-1 R(A)."""
    A = as_pointset(ctx, A)
    q = ctx.q
    G = FunctionF3.slice_indicator(ctx, A, z)
    lhs = float((np.abs(convolve_K(ctx, G).values) ** 4).sum())
    R = counters.rect(ctx, A)
    E = counters.energy_plane(ctx, A)
    return SweepReport(
        [
            InstanceRow("l4_identity", q, family, params, lhs, R / q - E / q**2, "identity"),
            InstanceRow("l4_upper", q, family, params, lhs, R / q, "exact"),
            # ratio <= 4 is q ||G*K||^4 / R(A) >= 1/4
            InstanceRow("l4_lower", q, family, params, R / q, lhs),
        ]
    )


def check_mt_chain(ctx: FieldCtx, E, family="", params="", counters=DEFAULT_COUNTERS) -> SweepReport:
    rep = mt_chain_check(ctx, E)
    rows = [
        InstanceRow(f"chain_{c.name}", ctx.q, family, params, c.lhs, c.rhs, "exact" if c.exact else "bound")
        for c in rep.checks
    ]
    if rep.cauchy_schwarz:
        worst = max(rep.cauchy_schwarz, key=lambda c: c.constant)
        rows.append(InstanceRow("cauchy_schwarz", ctx.q, family, params, worst.lhs, worst.rhs, "exact"))
    return SweepReport(rows)


def check_bilinear(ctx: FieldCtx, A, B, z: int, zp: int, family="", params="", counters=DEFAULT_COUNTERS) -> SweepReport:
    """||g_z*K g_z'*K||_2^2 against q^-1 |A||B| + q^-2 T(A, B), plus the Cauchy-Schwarz step."""
    A, B = as_pointset(ctx, A), as_pointset(ctx, B)
    if z == zp:
        raise ValueError("heights must differ")
    q = ctx.q
    a = convolve_K(ctx, FunctionF3.slice_indicator(ctx, A, z)).values
    b = convolve_K(ctx, FunctionF3.slice_indicator(ctx, B, zp)).values
    bil2 = float((np.abs(a * b) ** 2).sum())
    T = counters.trap(ctx, A, B)
    l4a = math.sqrt((np.abs(a) ** 4).sum())
    l4b = math.sqrt((np.abs(b) ** 4).sum())
    return SweepReport(
        [
            InstanceRow("bilinear_prop", q, family, params, bil2, len(A) * len(B) / q + T / q**2),
            InstanceRow("cauchy_schwarz", q, family, params, bil2, l4a * l4b, "exact"),
        ]
    )


@dataclass
class FinalTableEval:
    """The quantities behind the updated table for one function."""

    size: int
    gamma: float
    w: int
    m: int
    lhs: float
    table_rhs: float
    bracket: float
    bracket_rhs: float
    terms_rhs: float


def _slices(g: FunctionF3) -> dict[int, PointSet2]:
    return {z: g.slice_support(z) for z in g.heights()}


def evaluate_final_table(ctx: FieldCtx, g, counters=DEFAULT_COUNTERS) -> FinalTableEval:
    if isinstance(g, SlicedFunction):
        g = g.to_function()
    q = ctx.q
    slices = _slices(g)
    size = sum(len(s) for s in slices.values())
    lhs = norm_Lq_P(restrict_fourier(ctx, g), 2)
    if size == 0:
        return FinalTableEval(0, 0.0, 0, 0, lhs, 0.0, 0.0, 0.0, 0.0)
    gamma = math.log(size) / math.log(q)
    row = load_table("new").row_for(Fraction(gamma).limit_denominator(10**9))
    table_rhs = size**0.5 + size ** float(row.term.a) * q ** float(row.term.b)
    heights = sorted(slices)
    R = {z: counters.rect(ctx, slices[z]) for z in heights}
    bracket = sum(math.sqrt(R[z]) for z in heights)
    for z, zp in product(heights, heights):
        if z != zp:
            T = counters.trap(ctx, slices[z], slices[zp])
            B = min(float(T), q * math.sqrt(R[z] * R[zp]))
            bracket += math.sqrt(B / q) + math.sqrt(len(slices[z]) * len(slices[zp]))
    bracket_rhs = size**0.5 + size**0.375 * q**-0.125 * bracket**0.25
    terms_rhs = size**0.5 + sum(size ** float(t.a) * q ** float(t.b) for t in derive_bracket_terms())
    return FinalTableEval(
        size, gamma, len(heights), min(len(s) for s in slices.values()), lhs, table_rhs, bracket, bracket_rhs, terms_rhs
    )


def check_final_table(ctx: FieldCtx, g, family="", params="", counters=DEFAULT_COUNTERS) -> SweepReport:
    """||ghat||_{L2(P)} against the updated table, the bracket it came from and its four terms."""
    ev = evaluate_final_table(ctx, g, counters)
    params = f"{params};w={ev.w};m={ev.m};gamma={ev.gamma:.4f}".strip(";")
    q = ctx.q
    return SweepReport(
        [
            InstanceRow("final_table", q, family, params, ev.lhs, ev.table_rhs),
            InstanceRow("final_bracket", q, family, params, ev.lhs, ev.bracket_rhs),
            InstanceRow("final_terms", q, family, params, ev.lhs, ev.terms_rhs),
        ]
    )


# -- plans and presets -------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepItem:
    """``instances`` draws of ``check`` on ``family`` (and ``pair`` for two-set checks)."""

    check: str
    family: FamilySpec
    instances: int = 1
    pair: FamilySpec | None = None

    def to_json(self) -> dict:
        out = {"check": self.check, "family": self.family.to_json(), "instances": self.instances}
        if self.pair is not None:
            out["pair"] = self.pair.to_json()
        return out


CHECKS = ("energy", "kregular_rect", "trapezoid", "prop_min", "l4", "chain", "bilinear", "final_table")


def _regular_piece(ctx: FieldCtx, g: FunctionF3) -> SlicedFunction:
    """The largest validated regular piece of g (ties broken by the grouping order)."""
    pieces = [sf for sf in regularize_function(g) if validate_regular_function(sf)]
    if not pieces:
        raise NotRegular("no regular piece")
    return max(pieces, key=lambda sf: sf.support_size)


def _irregular_set(ctx: FieldCtx, spec: FamilySpec, rng, tries: int = 20) -> PointSet2:
    """A draw that is irregular, else the greedy remainder of a draw (irregular by construction)."""
    for _ in range(tries):
        A = generate(ctx, spec, rng)
        if is_irregular(ctx, A):
            return A
    rest = decompose_k_regular(ctx, A, threshold="residual").remainder
    if len(rest) and is_irregular(ctx, rest):
        return rest
    raise InfeasibleSpec(f"no irregular draw of {spec.label()} in {tries} tries")


def run_item(ctx: FieldCtx, item: SweepItem, rng, counters=DEFAULT_COUNTERS) -> SweepReport:
    fam = spec = item.family
    label = spec.kind if item.pair is None else f"{spec.kind}+{item.pair.kind}"
    params = spec.label() if item.pair is None else f"{spec.label()}|{item.pair.label()}"
    kw = dict(family=label, params=params, counters=counters)
    if item.check == "energy":
        return check_energy_bounds(ctx, generate(ctx, fam, rng), **kw)
    if item.check == "kregular_rect":
        if fam.kind == "random":
            out = SweepReport()
            for part in decompose_k_regular(ctx, generate(ctx, fam, rng)).parts:
                if validate_k_regular(ctx, part):
                    out.extend(check_kregular_rectangles(ctx, part, **kw))
            return out
        return check_kregular_rectangles(ctx, generate_part(ctx, fam, rng), **kw)
    if item.check in ("trapezoid", "prop_min"):
        other = item.pair or fam
        if fam.kind == "random":
            A, B = _irregular_set(ctx, fam, rng), _irregular_set(ctx, other, rng)
        else:
            A, B = generate_part(ctx, fam, rng), generate_part(ctx, other, rng)
        fn = check_trapezoid_lemma if item.check == "trapezoid" else check_prop_min
        return fn(ctx, A, B, **kw)
    if item.check == "l4":
        return check_l4(ctx, generate(ctx, fam, rng), **kw)
    if item.check == "chain":
        return check_mt_chain(ctx, generate(ctx, fam, rng), **kw)
    if item.check == "bilinear":
        A, B = generate(ctx, fam, rng), generate(ctx, item.pair or fam, rng)
        z, zp = (int(v) for v in rng.choice(ctx.q, size=2, replace=False))
        return check_bilinear(ctx, A, B, z, zp, **kw)
    if item.check == "final_table":
        g = generate(ctx, fam, rng)
        return check_final_table(ctx, _regular_piece(ctx, g), **kw)
    raise InfeasibleSpec(f"unknown check {item.check!r}")


def preset_plan(q: int, scale: int = 1) -> list[SweepItem]:
    """Families sized to F_q; ``scale`` multiplies the random instance counts."""
    F = FamilySpec.make
    r = lambda n: max(1, n * scale)  # noqa: E731
    sizes = sorted({1, q, int(q**1.5), q * q // 2})
    sizes = [s for s in sizes if s >= 1]
    small = [s for s in sizes if s <= min(30, q * q)]
    plan: list[SweepItem] = []
    for m in sizes:
        plan.append(SweepItem("energy", F("random", m=m), r(12)))
    plan.append(SweepItem("energy", F("random", m=q * q)))
    plan += [
        SweepItem("energy", F("grid", a=q // 2 + 1, b=q // 2 + 1)),
        SweepItem("energy", F("parallel_lines", lines=2, per_line=q)),
        SweepItem("energy", F("single_line", n=q)),
    ]
    for lines in sorted({1, 2, max(1, q // 3), q}):
        plan.append(SweepItem("kregular_rect", F("parallel_lines", lines=lines, per_line=q)))
    plan += [
        SweepItem("kregular_rect", F("grid", a=q, b=3 if q >= 3 else q)),
        SweepItem("kregular_rect", F("few_directions", directions=min(3, q), per_line=q - 1)),
        SweepItem("kregular_rect", F("random", m=q * q // 2), r(10)),
    ]
    for lines in sorted({1, 2, max(1, q // 3)}):
        plan.append(SweepItem("trapezoid", F("parallel_lines", lines=lines, per_line=q)))
        plan.append(SweepItem("prop_min", F("parallel_lines", lines=lines, per_line=q)))
    plan += [
        SweepItem("trapezoid", F("grid", a=q, b=min(3, q))),
        SweepItem("prop_min", F("grid", a=q, b=min(3, q)), pair=F("grid", a=q, b=min(3, q))),
    ]
    # irregular sets need every line to meet them in <= sqrt(m) points; rare below q^1.5
    for m in sorted({int(q**1.5), q * q // 2, int(q**1.75)}):
        plan.append(SweepItem("trapezoid", F("random", m=m), r(12)))
        plan.append(SweepItem("prop_min", F("random", m=m), r(12)))
    for m in small:
        plan.append(SweepItem("l4", F("random", m=m), r(12)))
        plan.append(SweepItem("bilinear", F("random", m=m), r(12)))
    plan += [
        SweepItem("l4", F("grid", a=(q + 1) // 2, b=(q + 1) // 2)),
        SweepItem("l4", F("parallel_lines", lines=2, per_line=q)),
        SweepItem("bilinear", F("parallel_lines", lines=2, per_line=q)),
    ]
    chain_sizes = sorted({1, q, q * q, min(q**3 // 2, 2 * q * q)})
    for m in chain_sizes:
        plan.append(SweepItem("chain", F("random3", m=m), r(12)))
    plan.append(SweepItem("chain", F("paraboloid_subset", m=q * q // 2), r(2)))
    for m in sorted({1, q, q * q, q**3 // 2}):
        plan.append(SweepItem("final_table", F("random3", m=m), r(11)))
    plan += [
        SweepItem("final_table", F("random3", m=q**3)),
        SweepItem("final_table", F("product_slices", w=max(1, q // 2), inner="parallel_lines", lines=2, per_line=q)),
        SweepItem("final_table", F("product_slices", w=q, inner="grid", a=q, b=min(3, q))),
        SweepItem("final_table", F("product_slices", w=max(1, q // 2), inner="random", m=q), r(3)),
    ]
    return plan


# preset -> (field orders, instance-count scale)
PRESETS = {"desk": ((3, 7, 11), 4), "extended": ((3, 7, 11, 19, 23), 2)}


def load_ceilings() -> dict[str, float]:
    text = resources.files("ffrestrict.data").joinpath("ceilings.json").read_text(encoding="utf-8")
    return {k: float(v) for k, v in json.loads(text)["ceilings"].items()}


def run_suite(
    fields: Sequence[FieldCtx],
    plans: dict[int, list[SweepItem]] | None = None,
    scale: int = 1,
    checks: Sequence[str] | None = None,
    seed: int = 0,
    ceilings: dict[str, float] | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    counters: Counters = DEFAULT_COUNTERS,
    config: dict | None = None,
) -> SweepReport:
    """Run every plan item for every field and aggregate.

    ``plans`` maps q to its items (``preset_plan(q, scale)`` when omitted).  Instance
    i of item j over F_q draws from ``default_rng([seed, q, j, i])``.
    Per-instance errors are collected in the report, not raised.
    """
    merged_ceilings = load_ceilings()
    merged_ceilings.update(ceilings or {})
    report = SweepReport(
        config=dict(config or {}, seed=seed, version=__version__, fields=[c.q for c in fields]),
        ceilings=merged_ceilings,
        tolerance=tolerance,
    )
    for ctx in fields:
        items = plans.get(ctx.q, []) if plans is not None else preset_plan(ctx.q, scale)
        for j, item in enumerate(items):
            if checks is not None and item.check not in checks:
                continue
            for i in range(item.instances):
                rng = np.random.default_rng([seed, ctx.q, j, i])
                try:
                    report.extend(run_item(ctx, item, rng, counters))
                except FFRestrictError as exc:
                    report.errors.append(
                        {"q": ctx.q, "item": item.to_json(), "instance": i, "error": f"{type(exc).__name__}: {exc}"}
                    )
    return report


def run_preset(name: str, seed: int = 0, **kw) -> SweepReport:
    if name not in PRESETS:
        raise InfeasibleSpec(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    orders, scale = PRESETS[name]
    fields = [make_field(q) for q in orders]
    return run_suite(fields, scale=scale, seed=seed, config={"preset": name, "scale": scale}, **kw)
