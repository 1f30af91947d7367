"""Fourier analysis on F^3 around the paraboloid P = {(x, x.x) : x in F^2}.

Functions on F^3 are held densely as ``(q, q, q)`` complex arrays indexed by
encoded coordinates, functions on P as ``(q, q)`` arrays over the parameter
plane.  Sign conventions: extension uses e(+x.xi), restriction e(-x.xi),
and the adjointness check is the contract tying them together.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np

from .counting import PointSet2, additive_energy_plane, as_pointset, paraboloid_energy
from .errors import NotASlice, TooLarge
from .field import FieldCtx, dot2

log = logging.getLogger(__name__)

KERNEL_DENSE_MAX_ENTRIES = 2**21


class FunctionF3:
    """A complex function on F^3 (dense storage; the support is the nonzero set)."""

    def __init__(self, ctx: FieldCtx, values=None):
        q = ctx.q
        self.ctx = ctx
        if values is None:
            values = np.zeros((q, q, q), dtype=complex)
        self.values = np.asarray(values, dtype=complex)
        if self.values.shape != (q, q, q):
            raise ValueError(f"expected shape {(q, q, q)}, got {self.values.shape}")

    @classmethod
    def from_dict(cls, ctx: FieldCtx, mapping: dict) -> "FunctionF3":
        g = cls(ctx)
        for x, v in mapping.items():
            g.values[tuple(int(c) for c in x)] = v
        return g

    @classmethod
    def indicator(cls, ctx: FieldCtx, points) -> "FunctionF3":
        g = cls(ctx)
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 3)
        g.values[pts[:, 0], pts[:, 1], pts[:, 2]] = 1.0
        return g

    @classmethod
    def slice_indicator(cls, ctx: FieldCtx, A, z: int) -> "FunctionF3":
        A = as_pointset(ctx, A)
        g = cls(ctx)
        if len(A):
            g.values[A.pts[:, 0], A.pts[:, 1], z] = 1.0
        return g

    def support(self) -> np.ndarray:
        return np.argwhere(self.values != 0)

    def support_size(self) -> int:
        return int(np.count_nonzero(self.values))

    def heights(self) -> list[int]:
        return np.flatnonzero(np.any(self.values != 0, axis=(0, 1))).tolist()

    def slice_support(self, z: int) -> PointSet2:
        return PointSet2(self.ctx, np.argwhere(self.values[:, :, z] != 0))

    def slice(self, z: int) -> "FunctionF3":
        g = FunctionF3(self.ctx)
        g.values[:, :, z] = self.values[:, :, z]
        return g

    def __add__(self, other: "FunctionF3") -> "FunctionF3":
        return FunctionF3(self.ctx, self.values + other.values)

    def __mul__(self, c) -> "FunctionF3":
        return FunctionF3(self.ctx, self.values * c)

    __rmul__ = __mul__

    def to_jsonl(self) -> str:
        lines = []
        for x in self.support():
            v = self.values[tuple(x)]
            lines.append(json.dumps({"x": [int(c) for c in x], "re": float(v.real), "im": float(v.imag)}))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_jsonl(cls, ctx: FieldCtx, text: str) -> "FunctionF3":
        g = cls(ctx)
        for line in text.splitlines():
            if line.strip():
                rec = json.loads(line)
                g.values[tuple(rec["x"])] = complex(rec["re"], rec["im"])
        return g


class FunctionP:
    """A complex function on P, identified with its parameter plane F^2."""

    def __init__(self, ctx: FieldCtx, values=None):
        q = ctx.q
        self.ctx = ctx
        self.values = np.zeros((q, q), dtype=complex) if values is None else np.asarray(values, dtype=complex)
        if self.values.shape != (q, q):
            raise ValueError(f"expected shape {(q, q)}, got {self.values.shape}")

    @classmethod
    def ones(cls, ctx: FieldCtx) -> "FunctionP":
        return cls(ctx, np.ones((ctx.q, ctx.q), dtype=complex))

    @classmethod
    def from_dict(cls, ctx: FieldCtx, mapping: dict) -> "FunctionP":
        f = cls(ctx)
        for x, v in mapping.items():
            f.values[int(x[0]), int(x[1])] = v
        return f


def paraboloid_heights(ctx: FieldCtx) -> np.ndarray:
    """N[a, b] = a^2 + b^2, the third coordinate of the lifted point."""
    x = ctx.elements()
    sq = np.asarray(ctx.mul(x, x))
    return np.asarray(ctx.add(sq[:, None], sq[None, :]))


def fourier3(ctx: FieldCtx, values: np.ndarray, sign: int = -1) -> np.ndarray:
    """sum_x values(x) e(sign * x.xi), one axis at a time."""
    W = ctx.char_matrix if sign > 0 else ctx.char_matrix.conj()
    out = np.tensordot(W, values, axes=([1], [0]))
    out = np.tensordot(W, out, axes=([1], [1])).transpose(1, 0, 2)
    return np.tensordot(out, W, axes=([2], [1]))


def extend(ctx: FieldCtx, f: FunctionP) -> FunctionF3:
    """(f dsigma)^v(x) = q^-2 sum_{xi in P} f(xi) e(x.xi)."""
    q = ctx.q
    W = ctx.char_matrix
    N = paraboloid_heights(ctx)
    out = np.empty((q, q, q), dtype=complex)
    for x3 in range(q):
        weighted = f.values * W[x3][N]
        out[:, :, x3] = W @ weighted @ W.T
    return FunctionF3(ctx, out / q**2)


def restrict_fourier(ctx: FieldCtx, g: FunctionF3) -> FunctionP:
    """ghat(xi) = sum_x g(x) e(-x.xi) at the paraboloid points."""
    full = fourier3(ctx, g.values, sign=-1)
    a = ctx.elements()
    N = paraboloid_heights(ctx)
    return FunctionP(ctx, full[a[:, None], a[None, :], N])


def inner_F3(g: FunctionF3, h: FunctionF3) -> complex:
    return complex(np.vdot(h.values, g.values))


def inner_P(f: FunctionP, h: FunctionP) -> complex:
    q = f.ctx.q
    return complex(np.vdot(h.values, f.values) / q**2)


def adjointness_residual(ctx: FieldCtx, f: FunctionP, g: FunctionF3) -> float:
    lhs = inner_F3(extend(ctx, f), g)
    rhs = inner_P(f, restrict_fourier(ctx, g))
    return abs(lhs - rhs)


# -- kernel -------------------------------------------------------------------------


def surface_kernel(ctx: FieldCtx, x) -> np.ndarray | complex:
    """Closed form of (dsigma)^v: 1 at 0, 0 on x3 = 0 elsewhere, sigma_F q^-1 e(x.x / (-4 x3))."""
    x = np.asarray(x, dtype=np.int64)
    scalar = x.ndim == 1
    x = x.reshape(-1, 3)
    out = np.zeros(len(x), dtype=complex)
    zero = np.all(x == 0, axis=1)
    out[zero] = 1.0
    off = x[:, 2] != 0
    if np.any(off):
        minus4 = ctx.neg(ctx.const(4))
        denom = np.asarray(ctx.mul(minus4, x[off, 2]))
        phase = np.asarray(ctx.div(dot2(ctx, x[off, :2], x[off, :2]), denom))
        out[off] = ctx.gauss_constant / ctx.q * ctx.character_table[phase]
    return complex(out[0]) if scalar else out


def direct_surface_sum(ctx: FieldCtx, x) -> np.ndarray | complex:
    """q^-2 sum_{xi in P} e(x.xi), summed term by term."""
    x = np.asarray(x, dtype=np.int64)
    scalar = x.ndim == 1
    x = x.reshape(-1, 3)
    a = ctx.elements()
    xi = np.stack(np.meshgrid(a, a, indexing="ij"), axis=-1).reshape(-1, 2)
    xi3 = np.asarray(dot2(ctx, xi, xi))
    out = np.empty(len(x), dtype=complex)
    for i, pt in enumerate(x):
        d = np.asarray(ctx.add(dot2(ctx, xi, pt[:2]), ctx.mul(int(pt[2]), xi3)))
        out[i] = ctx.character_table[d].sum() / ctx.q**2
    return complex(out[0]) if scalar else out


def all_points3(ctx: FieldCtx) -> np.ndarray:
    a = ctx.elements()
    return np.stack(np.meshgrid(a, a, a, indexing="ij"), axis=-1).reshape(-1, 3)


@dataclass
class KernelTable:
    """(dsigma)^v and K = (dsigma)^v - delta, dense when small enough."""

    ctx: FieldCtx
    dual: np.ndarray | None
    K: np.ndarray | None

    @property
    def dense(self) -> bool:
        return self.K is not None

    def __call__(self, x):
        x = np.asarray(x, dtype=np.int64)
        if self.dense:
            return self.K[x[..., 0], x[..., 1], x[..., 2]]
        vals = np.asarray(surface_kernel(self.ctx, x.reshape(-1, 3)))
        vals[np.all(x.reshape(-1, 3) == 0, axis=1)] = 0
        return vals.reshape(x.shape[:-1]) if x.ndim > 1 else complex(vals[0])


_kernel_cache: dict[FieldCtx, KernelTable] = {}


def kernel_K(ctx: FieldCtx, max_entries: int = KERNEL_DENSE_MAX_ENTRIES, strict: bool = False) -> KernelTable:
    q = ctx.q
    if q**3 > max_entries:
        if strict:
            raise TooLarge(f"q^3 = {q**3} exceeds the dense kernel cap {max_entries}")
        log.warning("kernel table for q=%d falls back to the closed-form evaluator", q)
        return KernelTable(ctx, None, None)
    if ctx in _kernel_cache and max_entries == KERNEL_DENSE_MAX_ENTRIES:
        return _kernel_cache[ctx]
    dual = np.asarray(surface_kernel(ctx, all_points3(ctx))).reshape(q, q, q)
    K = dual.copy()
    K[0, 0, 0] = 0
    dual.flags.writeable = False
    K.flags.writeable = False
    table = KernelTable(ctx, dual, K)
    _kernel_cache[ctx] = table
    return table


def _shifted(ctx: FieldCtx, table: np.ndarray, y) -> np.ndarray:
    """table(x - y) as an array over x."""
    a = ctx.elements()
    idx = [np.asarray(ctx.sub(a, int(c))) for c in y]
    return table[np.ix_(*idx)]


def convolve_K(ctx: FieldCtx, g: FunctionF3, method: str = "direct") -> FunctionF3:
    """(g * K)(x) = sum_y g(y) K(x - y).

    ``direct`` sums shifted kernels over the support of g; ``frequency``
    multiplies Fourier transforms.
    """
    kt = kernel_K(ctx, strict=True)
    if method == "direct":
        out = np.zeros_like(g.values)
        for y in g.support():
            out += g.values[tuple(y)] * _shifted(ctx, kt.K, y)
        return FunctionF3(ctx, out)
    if method == "frequency":
        Khat = fourier3(ctx, kt.K, sign=-1)
        ghat = fourier3(ctx, g.values, sign=-1)
        return FunctionF3(ctx, fourier3(ctx, ghat * Khat, sign=+1) / ctx.q**3)
    raise ValueError(f"unknown method {method!r}")


# -- norms ----------------------------------------------------------------------------


def norm_Lr(g: FunctionF3, r) -> float:
    r = float(r)
    if r < 1:
        raise ValueError("r must be >= 1")
    return float((np.abs(g.values) ** r).sum() ** (1 / r))


def norm_Lq_P(f: FunctionP, s) -> float:
    s = float(s)
    if s < 1:
        raise ValueError("s must be >= 1")
    q = f.ctx.q
    return float(((np.abs(f.values) ** s).sum() / q**2) ** (1 / s))


def check_convolution_identity(ctx: FieldCtx, g: FunctionF3) -> float:
    """| ||ghat||_{L2(P)} - |<g, g * (dsigma)^v>|^(1/2) |."""
    lhs = norm_Lq_P(restrict_fourier(ctx, g), 2)
    gd = g.values + convolve_K(ctx, g).values
    rhs = math.sqrt(abs(np.vdot(gd, g.values)))
    return abs(lhs - rhs)


# -- slices and the bilinear operator ---------------------------------------------------


def _single_height(g: FunctionF3) -> int | None:
    hs = g.heights()
    if len(hs) > 1:
        raise NotASlice(f"support spans heights {hs}")
    return hs[0] if hs else None


def bilinear_slice_norm(ctx: FieldCtx, g_z: FunctionF3, g_zp: FunctionF3) -> float:
    """|| (g_z * K)(g_z' * K) ||_{L2(F^3)} for functions on single horizontal planes."""
    if _single_height(g_z) is None or _single_height(g_zp) is None:
        return 0.0
    a = convolve_K(ctx, g_z).values
    b = a if g_zp is g_z else convolve_K(ctx, g_zp).values
    return float(np.sqrt((np.abs(a * b) ** 2).sum()))


@dataclass
class L4Report:
    q: int
    size: int
    lhs: float
    energy_formula: float
    r_estimate: float
    R: int
    E_plane: int

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.energy_formula)

    @property
    def relative_residual(self) -> float:
        return self.residual / (1 + self.lhs)

    @property
    def paper_estimate(self) -> float:
        """Alias of r_estimate under its interface name."""
        return self.r_estimate

    @property
    def ratio(self) -> float:
        """q ||G*K||_4^4 / R(A)."""
        return self.lhs / self.r_estimate if self.r_estimate else 0.0


def l4_identity_check(ctx: FieldCtx, A, z: int = 0) -> L4Report:
    """||G*K||_4^4 for G = 1_{A x {z}} against q^-1 R(A) - q^-2 E_plane(A)."""
    A = as_pointset(ctx, A)
    G = FunctionF3.slice_indicator(ctx, A, z)
    lhs = float((np.abs(convolve_K(ctx, G).values) ** 4).sum())
    R = paraboloid_energy(ctx, A)
    E = additive_energy_plane(ctx, A)
    q = ctx.q
    return L4Report(q, len(A), lhs, R / q - E / q**2, R / q, R, E)


def pseudoconformal_sum(ctx: FieldCtx, A) -> float:
    """q^-4 sum_{u in F^2, t != 0} |sum_{y in A} e(u.y + t y.y)|^4."""
    A = as_pointset(ctx, A)
    q = ctx.q
    if len(A) == 0:
        return 0.0
    W = ctx.char_matrix
    yy = np.asarray(dot2(ctx, A.pts, A.pts))
    total = 0.0
    for t in range(1, q):
        H = np.zeros((q, q), dtype=complex)
        H[A.pts[:, 0], A.pts[:, 1]] = ctx.character_table[np.asarray(ctx.mul(t, yy))]
        S = W @ H @ W.T
        total += float((np.abs(S) ** 4).sum())
    return total / q**4


def pseudoconformal_check(ctx: FieldCtx, A) -> float:
    """|| ||G*K||_4^4 in original variables - the transformed sum |."""
    A = as_pointset(ctx, A)
    G = FunctionF3.slice_indicator(ctx, A, 0)
    direct = float((np.abs(convolve_K(ctx, G).values) ** 4).sum())
    return abs(direct - pseudoconformal_sum(ctx, A))


# -- the Mockenhaupt-Tao chain ------------------------------------------------------------


@dataclass
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    exact: bool

    @property
    def constant(self) -> float:
        if self.rhs > 0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs <= 1e-12 else math.inf


@dataclass
class ChainReport:
    q: int
    size: int
    lhs: float
    checks: list[BoundCheck] = field(default_factory=list)
    cauchy_schwarz: list[BoundCheck] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "size": self.size,
            "lhs": self.lhs,
            "checks": [asdict(c) | {"constant": c.constant} for c in self.checks],
        }


def mt_chain_check(ctx: FieldCtx, E) -> ChainReport:
    """Evaluate ||ghat||_{L2(P)} for g = 1_E against the chain of upper bounds.

    decay: |E|^1/2 + q^-1/2 |E|; parseval: q^1/2 |E|^1/2;
    mt: |E|^1/2 + |E|^3/8 q^-1/8 (sum_z R(E_z)^1/4)^1/2;
    bilinear: |E|^1/2 + |E|^3/8 (sum_z ||g_z*K||_4^2 + sum_{z!=z'} ||g_z*K g_z'*K||_2)^1/4.
    The decay, Parseval and bilinear forms hold with constant 1 for indicators.
    """
    q = ctx.q
    g = E if isinstance(E, FunctionF3) else FunctionF3.indicator(ctx, E)
    size = g.support_size()
    lhs = norm_Lq_P(restrict_fourier(ctx, g), 2)
    rep = ChainReport(q, size, lhs)
    rep.checks.append(BoundCheck("decay", lhs, size**0.5 + size / math.sqrt(q), True))
    rep.checks.append(BoundCheck("parseval", lhs, math.sqrt(q * size), True))
    heights = g.heights()
    rsum = sum(paraboloid_energy(ctx, g.slice_support(z)) ** 0.25 for z in heights)
    rep.checks.append(BoundCheck("mt", lhs, size**0.5 + size**0.375 * q**-0.125 * math.sqrt(rsum), False))
    conv = {z: convolve_K(ctx, g.slice(z)).values for z in heights}
    l4sq = {z: math.sqrt((np.abs(c) ** 4).sum()) for z, c in conv.items()}
    bil = 0.0
    for z, zp in product(heights, heights):
        if z == zp:
            continue
        val = float(np.sqrt((np.abs(conv[z] * conv[zp]) ** 2).sum()))
        bil += val
        rep.cauchy_schwarz.append(BoundCheck("cauchy_schwarz", val, math.sqrt(l4sq[z] * l4sq[zp]), True))
    inner = sum(l4sq.values()) + bil
    rep.checks.append(BoundCheck("bilinear", lhs, size**0.5 + size**0.375 * inner**0.25, True))
    return rep
