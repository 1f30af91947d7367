"""Exact counters for corners, rectangles, trapezoids and additive energies.

Every quantity has a slow counter that evaluates the definition on all
ordered tuples and a fast counter based on hashing; the two are kept
independent so their agreement is meaningful.  All tuples are ordered and
degenerate tuples (repeated points) are counted.
"""

from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputTooLarge
from .field import FieldCtx, dot2

RECT_BRUTE_MAX = 80
TRAP_BRUTE_MAX_PRODUCT = 3600
CORNER_MAX = 400


class PointSet2:
    """An ordered, duplicate-free set of points of F_q^2.

    Points are stored as an ``(m, 2)`` int64 array of encoded field elements.
    """

    def __init__(self, ctx: FieldCtx, points: Iterable[Sequence[int]] = ()):
        arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= ctx.q):
            raise ValueError(f"coordinates must lie in [0, {ctx.q})")
        keys = arr[:, 0] * ctx.q + arr[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise ValueError("duplicate points")
        self.ctx = ctx
        self.pts = arr
        self.pts.flags.writeable = False

    def __len__(self) -> int:
        return len(self.pts)

    def __iter__(self):
        return (tuple(int(c) for c in row) for row in self.pts)

    def __contains__(self, pt) -> bool:
        return bool(np.any((self.pts[:, 0] == pt[0]) & (self.pts[:, 1] == pt[1])))

    def __eq__(self, other) -> bool:
        return isinstance(other, PointSet2) and self.ctx == other.ctx and set(self) == set(other)

    def __repr__(self) -> str:
        return f"PointSet2(q={self.ctx.q}, size={len(self)})"

    def keys(self) -> np.ndarray:
        return self.pts[:, 0] * self.ctx.q + self.pts[:, 1]

    def subset(self, mask) -> "PointSet2":
        return PointSet2(self.ctx, self.pts[np.asarray(mask)])

    def to_list(self) -> list[list[int]]:
        return self.pts.tolist()

    # CSV: one point per line; for n > 1 a coordinate is its coefficient
    # vector joined with ';' (low degree first).
    def to_csv(self) -> str:
        out = io.StringIO()
        for x, y in self:
            out.write(f"{self._fmt(x)},{self._fmt(y)}\n")
        return out.getvalue()

    def _fmt(self, a: int) -> str:
        if self.ctx.n == 1:
            return str(a)
        return ";".join(str(c) for c in self.ctx.to_coeffs(a))

    @classmethod
    def from_csv(cls, ctx: FieldCtx, text: str) -> "PointSet2":
        pts = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if len(fields) != 2:
                raise ValueError(f"line {lineno}: expected 2 coordinates, got {len(fields)}")
            pts.append([_parse_coord(ctx, f, lineno) for f in fields])
        return cls(ctx, pts)

    @classmethod
    def load(cls, ctx: FieldCtx, path) -> "PointSet2":
        return cls.from_csv(ctx, Path(path).read_text(encoding="utf-8"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8", newline="\n")


def _parse_coord(ctx: FieldCtx, field: str, lineno: int) -> int:
    parts = field.strip().split(";")
    try:
        vals = [int(v) for v in parts]
    except ValueError:
        raise ValueError(f"line {lineno}: bad coordinate {field!r}") from None
    if ctx.n == 1:
        if len(vals) != 1:
            raise ValueError(f"line {lineno}: prime field coordinates are single integers")
        if not 0 <= vals[0] < ctx.p:
            raise ValueError(f"line {lineno}: {vals[0]} not in [0, {ctx.p})")
        return vals[0]
    if len(vals) == 1:
        # a bare integer is the element's encoding
        if not 0 <= vals[0] < ctx.q:
            raise ValueError(f"line {lineno}: {vals[0]} not in [0, {ctx.q})")
        return vals[0]
    try:
        return ctx.from_coeffs(vals)
    except ValueError as exc:
        raise ValueError(f"line {lineno}: {exc}") from None


def as_pointset(ctx: FieldCtx, A) -> PointSet2:
    return A if isinstance(A, PointSet2) else PointSet2(ctx, A)


def _vsub(ctx: FieldCtx, a, b) -> np.ndarray:
    return np.asarray(ctx.sub(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)))


# -- predicates --------------------------------------------------------------


def is_corner(ctx: FieldCtx, x0, x1, x2) -> bool:
    return dot2(ctx, _vsub(ctx, x1, x0), _vsub(ctx, x2, x1)) == 0


def is_rectangle(ctx: FieldCtx, x0, x1, x2, x3) -> bool:
    xs = [x0, x1, x2, x3]
    return all(is_corner(ctx, xs[i], xs[(i + 1) % 4], xs[(i + 2) % 4]) for i in range(4))


def is_trapezoid(ctx: FieldCtx, x1, x2, x3, x4, symmetric: bool = False) -> bool:
    """Whether x1 - x2 = lam (x3 - x4) for some lam in F, tried for every lam.

    With ``symmetric=True`` the roles of the two differences may also be
    swapped, so x1 != x2 with x3 == x4 counts as well.
    """
    d1 = _vsub(ctx, x1, x2)
    d2 = _vsub(ctx, x3, x4)
    lam = ctx.elements()
    hit = np.any(np.all(np.asarray(ctx.mul(lam[:, None], d2[None, :])) == d1[None, :], axis=1))
    if symmetric and not hit:
        hit = np.any(np.all(np.asarray(ctx.mul(lam[:, None], d1[None, :])) == d2[None, :], axis=1))
    return bool(hit)


# -- rectangles ---------------------------------------------------------------


def _corner_tensor(ctx: FieldCtx, pts: np.ndarray) -> np.ndarray:
    """C[i, j, k] = (x_j - x_i) . (x_k - x_j) == 0."""
    diff = _vsub(ctx, pts[None, :, :], pts[:, None, :])  # diff[i, j] = x_j - x_i
    return np.asarray(dot2(ctx, diff[:, :, None, :], diff[None, :, :, :])) == 0


def count_rectangles_bruteforce(ctx: FieldCtx, A, max_size: int = RECT_BRUTE_MAX) -> int:
    """R(A) by testing all four cyclic corner conditions on every quadruple."""
    A = as_pointset(ctx, A)
    m = len(A)
    if m > max_size:
        raise InputTooLarge(f"|A| = {m} exceeds brute-force cap {max_size}")
    if m == 0:
        return 0
    C = _corner_tensor(ctx, A.pts)
    total = 0
    for i in range(m):
        # sum over j, k, l of C[i,j,k] C[j,k,l] C[k,l,i] C[l,i,j]
        t = C[i][:, :, None] & C & C[:, :, i][None, :, :] & C[:, i, :].T[:, None, :]
        total += int(np.count_nonzero(t))
    return total


def count_rectangles_energy(ctx: FieldCtx, A, allow_square_minus_one: bool = False) -> int:
    """R(A) as the paraboloid additive energy.

    Counts ordered (x, y, z, w) with x + y = z + w and
    x.x + y.y = z.z + w.w by hashing pairs.  The count equals R(A) only when
    -1 is a non-square, hence the guard.
    """
    ctx.require_minus_one_nonsquare(allow_square_minus_one)
    return paraboloid_energy(ctx, A)


def paraboloid_energy(ctx: FieldCtx, A) -> int:
    A = as_pointset(ctx, A)
    if len(A) == 0:
        return 0
    pts = A.pts
    q = ctx.q
    s = np.asarray(ctx.add(pts[:, None, :], pts[None, :, :]))
    nrm = np.asarray(dot2(ctx, pts, pts))
    t = np.asarray(ctx.add(nrm[:, None], nrm[None, :]))
    keys = (s[..., 0] * q + s[..., 1]) * q + t
    _, counts = np.unique(keys.ravel(), return_counts=True)
    return int((counts.astype(np.int64) ** 2).sum())


def additive_energy_plane(ctx: FieldCtx, A) -> int:
    """#{(x, y, z, w) in A^4 : x + y = z + w}."""
    A = as_pointset(ctx, A)
    if len(A) == 0:
        return 0
    pts = A.pts
    s = np.asarray(ctx.add(pts[:, None, :], pts[None, :, :]))
    _, counts = np.unique((s[..., 0] * ctx.q + s[..., 1]).ravel(), return_counts=True)
    return int((counts.astype(np.int64) ** 2).sum())


# -- trapezoids ----------------------------------------------------------------


def _pair_differences(ctx: FieldCtx, pts: np.ndarray) -> np.ndarray:
    return _vsub(ctx, pts[:, None, :], pts[None, :, :]).reshape(-1, 2)


def count_trapezoids_bruteforce(
    ctx: FieldCtx, A, B, symmetric: bool = False, max_product: int = TRAP_BRUTE_MAX_PRODUCT
) -> int:
    """T(A, B) over all of A^2 x B^2 using a 2x2 determinant for parallelism."""
    A = as_pointset(ctx, A)
    B = as_pointset(ctx, B)
    if len(A) * len(B) > max_product:
        raise InputTooLarge(f"|A||B| = {len(A) * len(B)} exceeds brute-force cap {max_product}")
    if len(A) == 0 or len(B) == 0:
        return 0
    d1 = _pair_differences(ctx, A.pts)
    d2 = _pair_differences(ctx, B.pts)
    z1 = np.all(d1 == 0, axis=1)
    z2 = np.all(d2 == 0, axis=1)
    total = 0
    chunk = max(1, 2_000_000 // max(len(d2), 1))
    for start in range(0, len(d1), chunk):
        a = d1[start : start + chunk]
        det = np.asarray(
            ctx.sub(ctx.mul(a[:, None, 0], d2[None, :, 1]), ctx.mul(a[:, None, 1], d2[None, :, 0]))
        )
        za = z1[start : start + chunk][:, None]
        zb = z2[None, :]
        if symmetric:
            ok = za | zb | (det == 0)
        else:
            ok = za | (~zb & (det == 0))
        total += int(np.count_nonzero(ok))
    return total


def direction_ids(ctx: FieldCtx, d: np.ndarray) -> np.ndarray:
    """Projective direction of nonzero vectors: slope m -> m, vertical -> q."""
    d = np.asarray(d, dtype=np.int64).reshape(-1, 2)
    ids = np.full(len(d), ctx.q, dtype=np.int64)
    nv = d[:, 0] != 0
    if np.any(nv):
        ids[nv] = np.asarray(ctx.div(d[nv, 1], d[nv, 0]))
    return ids


def _direction_counts(ctx: FieldCtx, pts: np.ndarray) -> np.ndarray:
    d = _pair_differences(ctx, pts)
    d = d[np.any(d != 0, axis=1)]
    return np.bincount(direction_ids(ctx, d), minlength=ctx.q + 1).astype(np.int64)


def count_trapezoids_directional(ctx: FieldCtx, A, B, symmetric: bool = False) -> int:
    """T(A, B) = |A||B|^2 + sum_d N_A(d) N_B(d).

    N_S(d) counts ordered pairs of distinct points of S whose difference has
    direction d.  The symmetric variant also admits x3 == x4.
    """
    A = as_pointset(ctx, A)
    B = as_pointset(ctx, B)
    a, b = len(A), len(B)
    if a == 0 or b == 0:
        return 0
    total = a * b * b + int((_direction_counts(ctx, A.pts) * _direction_counts(ctx, B.pts)).sum())
    if symmetric:
        total += (a * a - a) * b
    return total


# -- corners -------------------------------------------------------------------


def count_corners(ctx: FieldCtx, A, max_size: int = CORNER_MAX) -> int:
    A = as_pointset(ctx, A)
    m = len(A)
    if m > max_size:
        raise InputTooLarge(f"|A| = {m} exceeds corner-count cap {max_size}")
    total = 0
    for j in range(m):
        u = _vsub(ctx, A.pts[j], A.pts)  # x1 - x0 for every x0
        v = _vsub(ctx, A.pts, A.pts[j])  # x2 - x1 for every x2
        total += int(np.count_nonzero(np.asarray(dot2(ctx, u[:, None, :], v[None, :, :])) == 0))
    return total


# -- B(A, B) ---------------------------------------------------------------------


@dataclass(frozen=True)
class BRecord:
    T: int
    R_A: int
    R_B: int
    q: int
    which_min: str  # "T" or "R"

    @property
    def value(self) -> float:
        if self.which_min == "T":
            return float(self.T)
        return self.q * float(np.sqrt(float(self.R_A) * float(self.R_B)))

    def to_json(self) -> dict:
        return {**asdict(self), "value": self.value}


def b_quantity(ctx: FieldCtx, A, B, allow_square_minus_one: bool = False) -> BRecord:
    """min{T(A,B), q (R(A) R(B))^(1/2)}, with the branch decided on squares."""
    T = count_trapezoids_directional(ctx, A, B)
    ra = count_rectangles_energy(ctx, A, allow_square_minus_one)
    rb = count_rectangles_energy(ctx, B, allow_square_minus_one)
    which = "T" if T * T <= ctx.q**2 * ra * rb else "R"
    return BRecord(T=T, R_A=ra, R_B=rb, q=ctx.q, which_min=which)


# -- reports -------------------------------------------------------------------


@dataclass
class CountReport:
    quantity: str
    value: int
    algorithm: str
    sizes: list[int]
    q: int
    oracle_value: int | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


QUANTITIES = ("rect", "trap", "corners", "energy", "b")


def count(ctx: FieldCtx, quantity: str, A, B=None, oracle: bool = False) -> CountReport | BRecord:
    """Dispatch used by the command line; ``oracle`` forces a brute-force cross-check."""
    A = as_pointset(ctx, A)
    B = A if B is None else as_pointset(ctx, B)
    if quantity == "rect":
        value = count_rectangles_energy(ctx, A)
        ref = count_rectangles_bruteforce(ctx, A) if oracle else None
        return CountReport("rect", value, "energy-hash", [len(A)], ctx.q, ref)
    if quantity == "trap":
        value = count_trapezoids_directional(ctx, A, B)
        ref = count_trapezoids_bruteforce(ctx, A, B) if oracle else None
        return CountReport("trap", value, "directional", [len(A), len(B)], ctx.q, ref)
    if quantity == "corners":
        return CountReport("corners", count_corners(ctx, A), "per-vertex", [len(A)], ctx.q)
    if quantity == "energy":
        value = additive_energy_plane(ctx, A)
        ref = _energy_plane_bruteforce(ctx, A) if oracle else None
        return CountReport("energy", value, "sum-hash", [len(A)], ctx.q, ref)
    if quantity == "b":
        return b_quantity(ctx, A, B)
    raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")


def _energy_plane_bruteforce(ctx: FieldCtx, A, max_size: int = RECT_BRUTE_MAX) -> int:
    A = as_pointset(ctx, A)
    if len(A) > max_size:
        raise InputTooLarge(f"|A| = {len(A)} exceeds brute-force cap {max_size}")
    if len(A) == 0:
        return 0
    s = np.asarray(ctx.add(A.pts[:, None, :], A.pts[None, :, :]))
    sk = s[..., 0] * ctx.q + s[..., 1]
    total = 0
    for i in range(len(A)):
        total += int(np.count_nonzero(sk[i][:, None, None] == sk[None, :, :]))
    return total
