"""Greedy k-regular decomposition of planar sets and regular pieces of functions on F^3.

Conventions: "~" means within a factor of 2 (every validator takes the
slack as a parameter); lines are ordered non-vertical first by
(slope, intercept), then vertical lines by x-coordinate, and ties in
richness are broken by that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .counting import PointSet2, as_pointset
from .errors import EmptySet, TooLarge, ZeroFunction
from .field import FieldCtx

if TYPE_CHECKING:
    from .extension import FunctionF3

ALL_LINES_MAX_ORDER = 2**7


def ceil_sqrt(m: int) -> int:
    return 0 if m <= 0 else math.isqrt(m - 1) + 1


@dataclass(frozen=True, order=True)
class LineF2:
    """y = slope * x + offset, or the vertical line x = offset when slope is None."""

    slope: int | None
    offset: int

    @property
    def vertical(self) -> bool:
        return self.slope is None

    def index(self, q: int) -> int:
        return q * q + self.offset if self.slope is None else self.slope * q + self.offset

    @classmethod
    def from_index(cls, idx: int, q: int) -> "LineF2":
        idx = int(idx)
        if idx >= q * q:
            return cls(None, idx - q * q)
        return cls(idx // q, idx % q)

    def points(self, ctx: FieldCtx) -> np.ndarray:
        t = ctx.elements()
        if self.slope is None:
            return np.stack([np.full(ctx.q, self.offset), t], axis=1)
        return np.stack([t, np.asarray(ctx.add(ctx.mul(self.slope, t), self.offset))], axis=1)

    def contains(self, ctx: FieldCtx, pt) -> bool:
        x, y = int(pt[0]), int(pt[1])
        if self.slope is None:
            return x == self.offset
        return y == ctx.add(ctx.mul(self.slope, x), self.offset)

    def to_json(self):
        return {"vertical": True, "x": self.offset} if self.slope is None else {
            "slope": self.slope,
            "intercept": self.offset,
        }


def all_lines(ctx: FieldCtx) -> list[LineF2]:
    if ctx.q > ALL_LINES_MAX_ORDER:
        raise TooLarge(f"refusing to enumerate {ctx.q**2 + ctx.q} lines")
    return [LineF2.from_index(i, ctx.q) for i in range(ctx.q * ctx.q + ctx.q)]


def line_ids(ctx: FieldCtx, pts: np.ndarray) -> np.ndarray:
    """ids[i, s] = index of the s-th line through pts[i] (q slopes, then the vertical)."""
    pts = np.asarray(pts, dtype=np.int64).reshape(-1, 2)
    q = ctx.q
    slopes = ctx.elements()
    icpt = np.asarray(ctx.sub(pts[:, 1:2], ctx.mul(slopes[None, :], pts[:, 0:1])))
    ids = np.empty((len(pts), q + 1), dtype=np.int64)
    ids[:, :q] = slopes[None, :] * q + icpt
    ids[:, q] = q * q + pts[:, 0]
    return ids


def line_counts(ctx: FieldCtx, pts: np.ndarray) -> np.ndarray:
    """|l cap pts| for every line l, indexed by line index."""
    return np.bincount(line_ids(ctx, pts).ravel(), minlength=ctx.q * ctx.q + ctx.q)


def max_line_intersection(ctx: FieldCtx, A) -> tuple[LineF2, int]:
    A = as_pointset(ctx, A)
    if len(A) == 0:
        raise EmptySet("no points")
    counts = line_counts(ctx, A.pts)
    best = int(np.argmax(counts))
    return LineF2.from_index(best, ctx.q), int(counts[best])


# -- k-regular decomposition ---------------------------------------------------


@dataclass
class RegularPart:
    k: int
    frame: list[LineF2]
    points: PointSet2
    assignment: list[int]  # assignment[i] = frame index of points.pts[i]
    band: int = -1  # floor(log2 richness) of the extracted lines

    def line_counts(self) -> list[int]:
        return np.bincount(np.asarray(self.assignment, dtype=np.int64), minlength=len(self.frame)).tolist()

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "band": self.band,
            "frame": [ln.to_json() for ln in self.frame],
            "points": self.points.to_list(),
            "assignment": list(self.assignment),
        }

    @classmethod
    def from_lines(cls, ctx: FieldCtx, groups: list[tuple[LineF2, np.ndarray]], k: int | None = None) -> "RegularPart":
        """Build a part from (line, points on it) groups; k defaults to the number of lines."""
        pts, assign = [], []
        for i, (line, gp) in enumerate(groups):
            for pt in np.asarray(gp).reshape(-1, 2):
                pts.append(pt)
                assign.append(i)
        return cls(
            k=len(groups) if k is None else k,
            frame=[g[0] for g in groups],
            points=PointSet2(ctx, np.asarray(pts, dtype=np.int64).reshape(-1, 2)),
            assignment=assign,
        )


@dataclass
class RegularDecomposition:
    parts: list[RegularPart]
    remainder: PointSet2
    threshold: int

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "parts": [p.to_json() for p in self.parts],
            "remainder": self.remainder.to_list(),
        }


def _label(counts: list[int]) -> int:
    total = sum(counts)
    gmean = math.exp(sum(math.log(c) for c in counts) / len(counts))
    return max(1, math.floor(total / gmean + 0.5))


def decompose_k_regular(ctx: FieldCtx, A, threshold: str = "original") -> RegularDecomposition:
    """Greedy decomposition into dyadic k-regular parts plus an irregular remainder.

    While the richest line meets the residual set in more than
    ceil(sqrt(|A|)) points, its residual points are extracted and filed
    under floor(log2 richness).  ``threshold="residual"`` recomputes the
    cutoff from the residual size at each step.
    """
    if threshold not in ("original", "residual"):
        raise ValueError("threshold must be 'original' or 'residual'")
    A = as_pointset(ctx, A)
    m = len(A)
    if m == 0:
        raise EmptySet("cannot decompose the empty set")
    ids = line_ids(ctx, A.pts)
    counts = np.bincount(ids.ravel(), minlength=ctx.q * ctx.q + ctx.q)
    alive = np.ones(m, dtype=bool)
    thr = ceil_sqrt(m)
    buckets: dict[int, list[tuple[int, np.ndarray]]] = {}
    while True:
        if threshold == "residual":
            thr = ceil_sqrt(int(alive.sum()))
        best = int(np.argmax(counts))
        rich = int(counts[best])
        if rich <= thr:
            break
        members = np.flatnonzero(alive & np.any(ids == best, axis=1))
        counts -= np.bincount(ids[members].ravel(), minlength=len(counts))
        alive[members] = False
        buckets.setdefault(rich.bit_length() - 1, []).append((best, members))

    parts = []
    for band, lines in buckets.items():
        idx = np.concatenate([mem for _, mem in lines])
        assign = np.concatenate([np.full(len(mem), i) for i, (_, mem) in enumerate(lines)])
        parts.append(
            RegularPart(
                k=_label([len(mem) for _, mem in lines]),
                frame=[LineF2.from_index(b, ctx.q) for b, _ in lines],
                points=PointSet2(ctx, A.pts[idx]),
                assignment=assign.tolist(),
                band=band,
            )
        )
    return RegularDecomposition(parts=parts, remainder=A.subset(alive), threshold=thr)


def validate_k_regular(ctx: FieldCtx, part: RegularPart, slack: float = 2.0) -> bool:
    """Frame size ~ k and every frame line carries ~ |part| / k points."""
    if slack < 1:
        raise ValueError("slack must be >= 1")
    frame, k, n = part.frame, part.k, len(part.points)
    if k < 1 or not frame or len(set(frame)) != len(frame) or len(part.assignment) != n:
        return False
    for pt, a in zip(part.points, part.assignment):
        if not frame[a].contains(ctx, pt):
            return False
    if not k / slack <= len(frame) <= k * slack:
        return False
    lo, hi = n / (k * slack), n * slack / k
    return all(c >= 1 and lo <= c <= hi for c in part.line_counts())


def is_irregular(ctx: FieldCtx, A, slack: float = 1.0) -> bool:
    """Every line meets A in at most ceil(slack * sqrt(|A|)) points.

    The ceiling matches the greedy decomposition's stopping rule, so its
    remainder always passes at slack 1.
    """
    A = as_pointset(ctx, A)
    if len(A) == 0:
        return True
    cap = ceil_sqrt(len(A)) if slack == 1 else math.ceil(slack * math.sqrt(len(A)))
    return max_line_intersection(ctx, A)[1] <= cap


def frame_exclusion_ratio(ctx: FieldCtx, part: RegularPart) -> float:
    """max over lines outside the frame of |l cap part| / k."""
    counts = line_counts(ctx, part.points.pts)
    for ln in part.frame:
        counts[ln.index(ctx.q)] = 0
    return float(counts.max()) / part.k


def kregular_violations(ctx: FieldCtx, part: RegularPart) -> list[str]:
    """Conditions of the k-regular definition the greedy output does not guarantee."""
    out = []
    if part.k > math.sqrt(len(part.points)):
        out.append(f"k={part.k} exceeds sqrt(|part|)={math.sqrt(len(part.points)):.3f}")
    ratio = frame_exclusion_ratio(ctx, part)
    if ratio > 2:
        out.append(f"a non-frame line meets the part in {ratio:.2f} k points")
    return out


def check_partition(ctx: FieldCtx, A, dec: RegularDecomposition) -> bool:
    A = as_pointset(ctx, A)
    keys = [p.points.keys() for p in dec.parts] + [dec.remainder.keys()]
    allk = np.concatenate(keys) if keys else np.empty(0, dtype=np.int64)
    return len(allk) == len(A) and np.array_equal(np.sort(allk), np.sort(A.keys()))


# -- functions on F^3 ------------------------------------------------------------


@dataclass
class DyadicPieces:
    pieces: list[tuple[float, "FunctionF3"]]
    remainder: "FunctionF3"


def dyadic_decompose_function(g: "FunctionF3", cutoff_exponent: int = 10) -> DyadicPieces:
    """Split g by the bands |g| in [2^i, 2^(i+1)).

    Values with |g| <= q^-cutoff_exponent * max|g| go to the remainder.
    """
    from .extension import FunctionF3

    mag = np.abs(g.values)
    top = mag.max()
    if top == 0:
        raise ZeroFunction("g vanishes identically")
    small = mag <= top * float(g.ctx.q) ** (-cutoff_exponent)
    live = (mag > 0) & ~small
    band = np.full(mag.shape, np.iinfo(np.int64).min, dtype=np.int64)
    band[live] = np.floor(np.log2(mag[live])).astype(np.int64)
    pieces = []
    for i in sorted(set(band[live].tolist()), reverse=True):
        sel = live & (band == i)
        pieces.append((2.0**i, FunctionF3(g.ctx, np.where(sel, g.values, 0))))
    return DyadicPieces(pieces, FunctionF3(g.ctx, np.where(small, g.values, 0)))


@dataclass
class SlicedFunction:
    """A function on F^3 stored by horizontal slices.

    ``k`` is the common dyadic regularity class of the slices, or None when
    every slice is irregular.  ``m`` is the smallest slice size.
    """

    ctx: FieldCtx
    slices: dict[int, tuple[PointSet2, np.ndarray]] = field(default_factory=dict)
    k: int | None = None
    m: int = 0
    parts: dict[int, RegularPart] = field(default_factory=dict)

    @property
    def w(self) -> int:
        return len(self.slices)

    @property
    def support_size(self) -> int:
        return sum(len(s) for s, _ in self.slices.values())

    def to_function(self) -> "FunctionF3":
        from .extension import FunctionF3

        vals = np.zeros((self.ctx.q,) * 3, dtype=complex)
        for z, (pts, v) in self.slices.items():
            if len(pts):
                vals[pts.pts[:, 0], pts.pts[:, 1], z] = v
        return FunctionF3(self.ctx, vals)


def regularize_function(g: "FunctionF3") -> list[SlicedFunction]:
    """Partition the support of an amplitude-band piece into regular functions.

    Each slice is decomposed with the residual-threshold greedy so that its
    remainder is irregular relative to its own size; pieces are then grouped
    by (regularity class, richness band, dyadic piece size).
    """
    ctx = g.ctx
    groups: dict[tuple, SlicedFunction] = {}
    for z in g.heights():
        S = g.slice_support(z)
        vals = g.values[:, :, z]
        dec = decompose_k_regular(ctx, S, threshold="residual")
        pieces = [(("reg", p.k.bit_length() - 1, p.band), p.points, p) for p in dec.parts]
        if len(dec.remainder):
            pieces.append((("irr",), dec.remainder, None))
        for key, pts, part in pieces:
            full = key + (len(pts).bit_length() - 1,)
            sf = groups.setdefault(full, SlicedFunction(ctx, k=None if part is None else 2 ** key[1]))
            sf.slices[z] = (pts, vals[pts.pts[:, 0], pts.pts[:, 1]])
            if part is not None:
                sf.parts[z] = part
    out = []
    for key in sorted(groups, key=str):
        sf = groups[key]
        sf.m = min(len(p) for p, _ in sf.slices.values())
        out.append(sf)
    return out


def validate_regular_function(sf: SlicedFunction, slack: float = 2.0) -> bool:
    """The three regularity conditions, each up to a factor ``slack``."""
    ctx = sf.ctx
    if not sf.slices:
        return False
    mags = np.concatenate([np.abs(v) for _, v in sf.slices.values()])
    if mags.min() <= 0 or mags.max() > slack * mags.min():
        return False
    sizes = [len(p) for p, _ in sf.slices.values()]
    if max(sizes) > slack * min(sizes):
        return False
    if sf.k is None:
        return all(is_irregular(ctx, p, slack) for p, _ in sf.slices.values())
    labels = [part.k for part in sf.parts.values()]
    if len(sf.parts) != len(sf.slices) or max(labels) > slack * min(labels):
        return False
    return all(validate_k_regular(ctx, part, slack) for part in sf.parts.values())
