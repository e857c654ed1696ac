"""Deterministic adaptive cubature on the complex plane.

Integrals are computed over parameter boxes, each mapped to the plane by one
of four maps:

* axis-parallel tiles (identity map),
* Duffy triangles with a singular vertex, graded radially by
  ``u = exp(1 - 1/v)`` so that ``|z|^-2 log^-2``-type densities become smooth,
* polar cells of a disc around a regular pole,
* polar cells of a disc around a singular pole (same radial grading).

Every box gets a tensor Gauss-Legendre rule; the error indicator is the
difference between the box value and the sum over its four children.  Boxes
are refined level by level, so the order in which work is done never depends
on timing, and group totals are reduced with ``math.fsum`` (correctly rounded,
hence independent of summation order and of the number of workers).
"""

from __future__ import annotations

import dataclasses
import functools
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfcx
from scipy import integrate as _sp_integrate

from .errors import NumericalFailure, UsageError

__all__ = [
    "CPoint",
    "Region",
    "QuadSpec",
    "IntegrandMeta",
    "QuadResult",
    "as_complex",
    "integrate_plane",
    "integrate_plane_many",
    "integrate_region",
    "integrate_regions",
    "integrate_gaussian_many",
    "truncation_radius",
    "tail_bound",
    "lattice_points",
    "compensated_sum",
]

GL_ORDER = 8
_GX, _GW = np.polynomial.legendre.leggauss(GL_ORDER)
_GX = 0.5 * (_GX + 1.0)
_GW = 0.5 * _GW
_NODE_V = np.repeat(_GX, GL_ORDER)
_NODE_W = np.tile(_GX, GL_ORDER)
_NODE_WT = np.outer(_GW, _GW).ravel()

_RECT, _DUFFY, _POLAR, _POLAR_EXP = 0, 1, 2, 3
_NPAR = 7
_CHUNK = 2048
_EPS = float(np.finfo(float).eps)
# below this grading parameter the radial factor exp(1 - 1/v) is < 1e-120
_V_MIN = 1.0 / (1.0 + 120 * math.log(10.0))
_EXTRAP_AT = (1.0, 1.5, 2.0, 2.5)
_GH_ORDERS = (24, 48)
_SNAP = 2.0**-10


# ---------------------------------------------------------------------------
# Small types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CPoint:
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise UsageError("CPoint coordinates must be finite")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def of(cls, z) -> "CPoint":
        z = as_complex(z)
        return cls(z.real, z.imag)


def as_complex(z) -> complex:
    if isinstance(z, CPoint):
        return z.z
    return complex(z)


@dataclass(frozen=True)
class Region:
    """Axis-parallel square ``Q_side(center)`` or disc ``D(center, radius)``."""

    kind: str
    center: complex
    size: float

    def __post_init__(self):
        if self.kind not in ("square", "disc"):
            raise UsageError(f"unknown region kind {self.kind!r}")
        if not self.size > 0:
            raise UsageError("region size must be positive")
        object.__setattr__(self, "center", as_complex(self.center))

    @classmethod
    def square(cls, center, side) -> "Region":
        return cls("square", as_complex(center), float(side))

    @classmethod
    def disc(cls, center, radius) -> "Region":
        return cls("disc", as_complex(center), float(radius))

    @property
    def side(self) -> float:
        if self.kind != "square":
            raise AttributeError("discs have no side")
        return self.size

    @property
    def radius(self) -> float:
        if self.kind != "disc":
            raise AttributeError("squares have no radius")
        return self.size

    @property
    def area(self) -> float:
        if self.kind == "square":
            return self.size * self.size
        return math.pi * self.size * self.size

    def contains(self, z, closed=True):
        z = np.asarray(z, dtype=complex)
        d = z - self.center
        if self.kind == "square":
            h = 0.5 * self.size
            m = np.maximum(np.abs(d.real), np.abs(d.imag))
        else:
            h = self.size
            m = np.abs(d)
        return m <= h if closed else m < h

    def translated(self, a) -> "Region":
        return Region(self.kind, self.center + as_complex(a), self.size)

    def describe(self) -> str:
        c = self.center
        if self.kind == "square":
            return f"Q_{self.size:g}({c.real:g}{c.imag:+g}i)"
        return f"D({c.real:g}{c.imag:+g}i,{self.size:g})"


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature policy.

    ``workers`` only changes scheduling; results are bit-identical for any
    value, so it is excluded from the fingerprint.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-13
    base_tile: float = 1.0
    max_refine: int = 12
    truncation_margin: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if not (0 < self.rel_tol < 1 and 0 < self.abs_tol < 1):
            raise UsageError("rel_tol and abs_tol must lie in (0, 1)")
        if not self.base_tile > 0 or not self.truncation_margin > 0:
            raise UsageError("base_tile and truncation_margin must be positive")
        if int(self.max_refine) != self.max_refine or self.max_refine < 1:
            raise UsageError("max_refine must be an integer >= 1")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")

    def replace(self, **kw) -> "QuadSpec":
        return dataclasses.replace(self, **kw)

    def tightened(self, factor: float = 10.0) -> "QuadSpec":
        return self.replace(rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("workers")
        return d

    def fingerprint(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class IntegrandMeta:
    """Envelope ``(1+|z-c|)^d exp(g|z-c| - (decay - growth)|z-c|^2)``.

    ``singular_points`` lists points where the integrand is singular or merely
    non-smooth; cells containing them get the graded polar treatment.
    """

    gaussian_decay_rate: float = 0.0
    poly_growth_degree: float = 0.0
    singular_points: tuple = ()
    center: complex = 0j
    exp_growth: float = 0.0
    gaussian_growth: float = 0.0

    def __post_init__(self):
        if self.gaussian_decay_rate < 0:
            raise UsageError("gaussian_decay_rate must be >= 0")
        object.__setattr__(self, "center", as_complex(self.center))
        object.__setattr__(
            self, "singular_points", tuple(as_complex(s) for s in self.singular_points)
        )

    @property
    def effective_decay(self) -> float:
        return self.gaussian_decay_rate - self.gaussian_growth


@dataclass
class QuadResult:
    values: np.ndarray
    errors: np.ndarray
    converged: np.ndarray
    levels: np.ndarray
    traces: np.ndarray = field(repr=False)

    def scalar(self, i=0):
        return self.values[i]


def compensated_sum(values) -> float:
    """Correctly rounded sum; the result does not depend on the order."""
    return math.fsum(values)


# ---------------------------------------------------------------------------
# Truncation
# ---------------------------------------------------------------------------


def tail_bound(R: float, decay_rate: float, poly_degree: float = 0.0, exp_rate: float = 0.0) -> float:
    """Upper bound for ``int_{|z|>R} (1+|z|)^d exp(g|z| - b|z|^2) dA``.

    Uses ``log(1+r) <= log(1+R) + (r-R)/(1+R)`` and the closed form of
    ``int_R^inf r exp(-b r^2 + k r) dr``; exact when ``d = g = 0``.
    """
    b = float(decay_rate)
    d = max(float(poly_degree), 0.0)
    g = max(float(exp_rate), 0.0)
    kappa = g + d / (1.0 + R)
    m = kappa / (2 * b)
    inner = 1.0 / (2 * b) + m * math.sqrt(math.pi) / (2 * math.sqrt(b)) * float(erfcx(math.sqrt(b) * (R - m)))
    logv = math.log(2 * math.pi) + d * math.log1p(R) - b * R * R + g * R + math.log(inner)
    return math.exp(logv) if logv < 700 else math.inf


def truncation_radius(decay_rate: float, poly_degree: float, tol: float, exp_rate: float = 0.0) -> float:
    """Smallest ``R`` (to 1e-12) beyond the envelope peak with tail bound below ``tol``."""
    if not decay_rate > 0:
        raise UsageError("truncation_radius needs a positive decay rate")
    if not 0 < tol < 1:
        raise UsageError("tol must lie in (0, 1)")
    g, d = max(exp_rate, 0.0), max(poly_degree, 0.0)
    lo = (g + math.sqrt(g * g + 8 * decay_rate * d)) / (4 * decay_rate)
    if tail_bound(lo, decay_rate, poly_degree, exp_rate) < tol:
        return lo
    hi = lo + 1.0
    while tail_bound(hi, decay_rate, poly_degree, exp_rate) >= tol:
        hi = lo + 2 * (hi - lo)
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if tail_bound(mid, decay_rate, poly_degree, exp_rate) < tol:
            hi = mid
        else:
            lo = mid
    return hi


def _envelope_mass(meta: IntegrandMeta) -> float:
    b = meta.effective_decay
    d = max(meta.poly_growth_degree, 0.0)
    g = max(meta.exp_growth, 0.0)
    rmax = g / b + 40.0 / math.sqrt(b) + 10.0
    val, _ = _sp_integrate.quad(
        lambda r: 2 * math.pi * r * math.exp(d * math.log1p(r) + g * r - b * r * r - _env_shift(b, d, g)),
        0.0,
        rmax,
        limit=200,
    )
    return val


def _env_shift(b, d, g):
    # peak of the log-envelope, subtracted to keep quad in range
    r = (g + math.sqrt(g * g + 8 * b * d)) / (4 * b) if b > 0 else 0.0
    return d * math.log1p(r) + g * r - b * r * r


def _plane_radius(meta: IntegrandMeta, spec: QuadSpec) -> float:
    return _plane_radius_cached(
        meta.effective_decay, max(meta.poly_growth_degree, 0.0), max(meta.exp_growth, 0.0), spec.rel_tol
    ) + spec.truncation_margin


@functools.lru_cache(maxsize=4096)
def _plane_radius_cached(b: float, d: float, g: float, rel_tol: float) -> float:
    meta = IntegrandMeta(b, d, (), 0j, g)
    mass = _envelope_mass(meta)
    tol = 1e-2 * rel_tol * mass
    # tail_bound is not shifted; compare on the shifted scale
    shift = _env_shift(b, d, g)
    log_tol = math.log(tol) + shift
    if log_tol >= 0:
        R = truncation_radius(b, d, 0.5, g)
    elif log_tol < -700:
        R = _radius_log(b, d, g, log_tol)
    else:
        R = truncation_radius(b, d, math.exp(log_tol), g)
    return R


def _radius_log(b, d, g, log_tol):
    lo, hi = 0.0, 1.0
    while math.log(max(tail_bound(hi, b, d, g), 1e-300)) >= log_tol and hi < 1e6:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.log(max(tail_bound(mid, b, d, g), 1e-300)) < log_tol:
            hi = mid
        else:
            lo = mid
    return hi


def lattice_points(spacing: float, radius: float) -> list:
    """Points of ``spacing * Z^2`` within ``radius``, lexicographic in (k1, k2)."""
    if not spacing > 0:
        raise UsageError("spacing must be positive")
    if radius < 0:
        return []
    K = int(math.floor(radius / spacing + 1e-12))
    out = []
    r2 = radius * radius * (1 + 1e-14)
    for k1 in range(-K, K + 1):
        for k2 in range(-K, K + 1):
            x, y = spacing * k1, spacing * k2
            if x * x + y * y <= r2:
                out.append(CPoint(x, y))
    return out


# ---------------------------------------------------------------------------
# Cell construction
# ---------------------------------------------------------------------------


class _Cells:
    """Growable set of parameter boxes with their map data (insertion order)."""

    def __init__(self):
        self.blocks = []
        self.rows = []

    def add(self, box, kind, par, gid, share):
        self.rows.append((box, kind, par, gid, share))

    def _flush(self):
        if self.rows:
            box, kind, par, gid, share = zip(*self.rows)
            self.blocks.append(
                (
                    np.array(box, dtype=float),
                    np.array(kind, dtype=int),
                    np.array(par, dtype=float),
                    np.array(gid, dtype=int),
                    np.array(share, dtype=float),
                )
            )
            self.rows = []

    def add_rects(self, boxes, gid, share):
        self._flush()
        n = len(boxes)
        self.blocks.append(
            (np.asarray(boxes, dtype=float), np.zeros(n, int), np.zeros((n, _NPAR)), np.full(n, gid), np.full(n, share))
        )

    def arrays(self):
        self._flush()
        if not self.blocks:
            return (np.zeros((0, 4)), np.zeros(0, int), np.zeros((0, _NPAR)), np.zeros(0, int), np.zeros(0))
        return tuple(np.concatenate([blk[k] for blk in self.blocks]) for k in range(5))


_ZPAR = (0.0,) * _NPAR


def _square_pieces(x0, x1, y0, y1, sing, depth=0):
    """Split a tile until each piece holds at most one singular point."""
    inside = [s for s in sing if x0 <= s.real <= x1 and y0 <= s.imag <= y1]
    if len(inside) <= 1 or depth > 24:
        return [(x0, x1, y0, y1, inside[:1])]
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    out = []
    for a, b, c, d in ((x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)):
        out.extend(_square_pieces(a, b, c, d, inside, depth + 1))
    return out


def _add_square(cells, x0, x1, y0, y1, sing, gid, share):
    pieces = _square_pieces(x0, x1, y0, y1, sing)
    share_piece = share / len(pieces)
    for a, b, c, d, ins in pieces:
        if not ins:
            cells.add((a, b, c, d), _RECT, _ZPAR, gid, share_piece)
            continue
        s = ins[0]
        corners = [complex(a, c), complex(b, c), complex(b, d), complex(a, d)]
        tris = []
        for i in range(4):
            c0, c1 = corners[i], corners[(i + 1) % 4]
            e1, e2 = c0 - s, c1 - c0
            cross = abs(e1.real * e2.imag - e1.imag * e2.real)
            if cross > 1e-300 and cross > 1e-14 * abs(e2) * (b - a):
                tris.append((e1, e2, cross))
        for e1, e2, cross in tris:
            par = (s.real, s.imag, e1.real, e1.imag, e2.real, e2.imag, cross)
            cells.add((0.0, 1.0, 0.0, 1.0), _DUFFY, par, gid, share_piece / len(tris))


def _add_region(cells, region: Region, sing, spec: QuadSpec, gid):
    if region.kind == "square":
        h = 0.5 * region.size
        n = max(1, int(math.ceil(region.size / spec.base_tile - 1e-9)))
        step = region.size / n
        x0, y0 = region.center.real - h, region.center.imag - h
        x1, y1 = x0 + region.size, y0 + region.size
        local = []
        for s in sing:
            cs = complex(min(max(s.real, x0), x1), min(max(s.imag, y0), y1))
            # a point just outside still spoils convergence; treat it as on the boundary
            if abs(s - cs) <= _SNAP * region.size:
                local.append(cs)
        for i in range(n):
            for j in range(n):
                _add_square(
                    cells,
                    x0 + i * step,
                    x0 + (i + 1) * step if i < n - 1 else x0 + region.size,
                    y0 + j * step,
                    y0 + (j + 1) * step if j < n - 1 else y0 + region.size,
                    local,
                    gid,
                    1.0 / (n * n),
                )
        return
    c, t = region.center, region.size
    inside = []
    for s in sing:
        dist = abs(s - c)
        if dist <= t:
            inside.append(s)
        elif dist <= t * (1 + _SNAP):
            inside.append(c + (s - c) * (t / dist))
    pole, kind = c, _POLAR
    if len(inside) == 1:
        pole, kind = inside[0], _POLAR_EXP
    elif any(abs(s - c) <= 1e-14 * t for s in inside):
        kind = _POLAR_EXP
    d = pole - c
    nr = max(1, int(math.ceil(t / spec.base_tile - 1e-9)))
    nt = max(4, 4 * nr)
    par = (pole.real, pole.imag, d.real, d.imag, t, 0.0, 0.0)
    share = 1.0 / (nr * nt)
    for i in range(nr):
        for j in range(nt):
            box = (i / nr, (i + 1) / nr, 2 * math.pi * j / nt, 2 * math.pi * (j + 1) / nt)
            cells.add(box, kind, par, gid, share)


def _add_plane(cells, meta: IntegrandMeta, spec: QuadSpec, gid, radius=None):
    if radius is None:
        radius = _plane_radius(meta, spec)
    c = meta.center
    h = spec.base_tile
    K = int(math.ceil(radius / h)) + 1
    k = np.arange(-K, K + 1)
    X, Y = np.meshgrid(k, k, indexing="ij")
    off = h * (X + 1j * Y).ravel()
    off = off[np.maximum(np.abs(off) - h / math.sqrt(2), 0.0) <= radius]
    tiles = c + off
    share = 1.0 / len(tiles)
    sing = np.array(meta.singular_points, dtype=complex)
    hit = np.zeros(len(tiles), dtype=bool)
    if sing.size:
        d = sing[None, :] - tiles[:, None]
        hit = np.any((np.abs(d.real) <= h / 2) & (np.abs(d.imag) <= h / 2), axis=1)
    plain = tiles[~hit]
    cells.add_rects(
        np.stack([plain.real - h / 2, plain.real + h / 2, plain.imag - h / 2, plain.imag + h / 2], axis=1), gid, share
    )
    for tc in tiles[hit]:
        _add_square(cells, tc.real - h / 2, tc.real + h / 2, tc.imag - h / 2, tc.imag + h / 2, list(sing), gid, share)
    return radius


# ---------------------------------------------------------------------------
# Rule evaluation
# ---------------------------------------------------------------------------


def _radial_exp(v):
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        U = np.exp(1.0 - 1.0 / v)
        dU = U / (v * v)
    return U, dU


def _map(kind, v, w, par):
    if kind == _RECT:
        return v + 1j * w, np.ones_like(v)
    p = [par[:, k : k + 1] for k in range(_NPAR)]
    if kind == _DUFFY:
        s = p[0] + 1j * p[1]
        e1 = p[2] + 1j * p[3]
        e2 = p[4] + 1j * p[5]
        U, dU = _radial_exp(v)
        z = s + U * (e1 + w * e2)
        return z, U * dU * p[6]
    pole = p[0] + 1j * p[1]
    dre, dim, t = p[2], p[3], p[4]
    cos, sin = np.cos(w), np.sin(w)
    b = dre * cos + dim * sin
    rho = -b + np.sqrt(np.maximum(b * b + t * t - dre * dre - dim * dim, 0.0))
    if kind == _POLAR:
        U, dU = v, np.ones_like(v)
    else:
        U, dU = _radial_exp(v)
    z = pole + rho * U * (cos + 1j * sin)
    return z, rho * rho * U * dU


def _eval_kind(f, k, v, w, par, gid):
    z, jac = _map(k, v, w, par)
    with np.errstate(all="ignore"):
        vals = np.asarray(f(z, gid))
        if vals.shape != z.shape:
            vals = np.broadcast_to(vals, z.shape)
        # zero-length rays (pole on the boundary) carry no measure
        g = np.where(jac == 0, 0.0, vals * jac)
    if k in (_DUFFY, _POLAR_EXP):
        # Near the singular vertex the graded map underflows; there the
        # transformed integrand is smooth in v, so extrapolate it from
        # representable abscissae instead of evaluating it.
        low = v < _V_MIN
        rows = np.flatnonzero(low.any(axis=1))
        if rows.size:
            vr, wr, pr, gr = v[rows], w[rows], par[rows], gid[rows]
            samples = []
            for c in _EXTRAP_AT:
                zc, jc = _map(k, np.full_like(vr, c * _V_MIN), wr, pr)
                with np.errstate(all="ignore"):
                    fc = np.asarray(f(zc, gr))
                    if fc.shape != zc.shape:
                        fc = np.broadcast_to(fc, zc.shape)
                    samples.append(np.where(jc == 0, 0.0, fc * jc))
            x = vr / _V_MIN
            ext = np.zeros_like(samples[0])
            for i, ci in enumerate(_EXTRAP_AT):
                li = np.ones_like(x)
                for j, cj in enumerate(_EXTRAP_AT):
                    if j != i:
                        li = li * (x - cj) / (ci - cj)
                ext = ext + samples[i] * li
            sub = g[rows]
            g = g.copy() if not g.flags.writeable else g
            g[rows] = np.where(low[rows], ext, sub)
    return g


def _eval_chunk(f, box, kind, par, gid, complex_values):
    B = box.shape[0]
    dv = (box[:, 1] - box[:, 0])[:, None]
    dw = (box[:, 3] - box[:, 2])[:, None]
    v = box[:, 0:1] + dv * _NODE_V[None, :]
    w = box[:, 2:3] + dw * _NODE_W[None, :]
    wt = dv * dw * _NODE_WT[None, :]
    dtype = complex if complex_values else float
    out = np.zeros(B, dtype=dtype)
    absout = np.zeros(B)
    for k in np.unique(kind):
        sel = kind == k
        g = _eval_kind(f, k, v[sel], w[sel], par[sel], gid[sel][:, None])
        prod = g * wt[sel]
        if not complex_values:
            prod = prod.real if np.iscomplexobj(prod) else prod
        out[sel] = prod.sum(axis=1)
        absout[sel] = np.abs(prod).sum(axis=1)
    return out, absout


def _rule(f, box, kind, par, gid, complex_values, workers):
    n = box.shape[0]
    if n == 0:
        dtype = complex if complex_values else float
        return np.zeros(0, dtype=dtype), np.zeros(0)
    bounds = [(i, min(i + _CHUNK, n)) for i in range(0, n, _CHUNK)]

    def job(b):
        i, j = b
        return _eval_chunk(f, box[i:j], kind[i:j], par[i:j], gid[i:j], complex_values)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, bounds))
    else:
        parts = [job(b) for b in bounds]
    vals = np.concatenate([p[0] for p in parts])
    absv = np.concatenate([p[1] for p in parts])
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure("integrand produced non-finite values")
    return vals, absv


def _split(box):
    v0, v1, w0, w1 = box[:, 0], box[:, 1], box[:, 2], box[:, 3]
    vm, wm = 0.5 * (v0 + v1), 0.5 * (w0 + w1)
    kids = np.stack(
        [
            np.stack([v0, vm, w0, wm], 1),
            np.stack([vm, v1, w0, wm], 1),
            np.stack([v0, vm, wm, w1], 1),
            np.stack([vm, v1, wm, w1], 1),
        ],
        axis=1,
    )
    return kids.reshape(-1, 4)


def _run(f, cells: _Cells, n_groups, spec: QuadSpec, complex_values=False) -> QuadResult:
    box, kind, par, gid, share = cells.arrays()
    dtype = complex if complex_values else float
    coarse, _ = _rule(f, box, kind, par, gid, complex_values, spec.workers)
    acc_vals, acc_gid = [], []
    acc_running = np.zeros(n_groups, dtype=dtype)
    acc_abs = np.zeros(n_groups)
    err_total = np.zeros(n_groups)
    converged = np.ones(n_groups, dtype=bool)
    levels = np.zeros(n_groups, dtype=int)
    traces = []
    for level in range(spec.max_refine + 1):
        if box.shape[0] == 0:
            break
        kids = _split(box)
        rep = lambda a: np.repeat(a, 4, axis=0)  # noqa: E731
        kkind, kpar, kgid = rep(kind), rep(par), rep(gid)
        kvals, kabs = _rule(f, kids, kkind, kpar, kgid, complex_values, spec.workers)
        fine = kvals.reshape(-1, 4).sum(axis=1)
        fine_abs = kabs.reshape(-1, 4).sum(axis=1)
        err = np.abs(fine - coarse)
        est = acc_running + np.bincount(gid, weights=fine.real, minlength=n_groups)
        if complex_values:
            est = est + 1j * np.bincount(gid, weights=fine.imag, minlength=n_groups)
        est_abs = acc_abs + np.bincount(gid, weights=fine_abs, minlength=n_groups)
        traces.append(est.copy())
        scale = np.maximum(np.abs(est), 0.0)
        target = np.maximum(spec.abs_tol, np.maximum(spec.rel_tol * scale, 4e-15 * est_abs))
        # a box whose indicator is at its own rounding level cannot improve
        ok = (err <= target[gid] * share) | (err <= 64 * _EPS * fine_abs)
        # groups whose whole error budget already fits stop refining (this is
        # what resolves isolated kinks, where per-box shares are too strict)
        group_err = err_total + np.bincount(gid, weights=err, minlength=n_groups)
        ok |= (group_err <= target)[gid]
        last = level == spec.max_refine
        if last:
            bad_groups = np.unique(gid[~ok])
            converged[bad_groups] = False
            ok = np.ones_like(ok)
        acc_vals.append(fine[ok])
        acc_gid.append(gid[ok])
        np.add.at(acc_running, gid[ok], fine[ok])
        np.add.at(acc_abs, gid[ok], fine_abs[ok])
        np.add.at(err_total, gid[ok], err[ok])
        if np.any(~ok):
            levels[np.unique(gid[~ok])] = level + 1
        keep = ~ok
        keep4 = np.repeat(keep, 4)
        box, kind, par, gid = kids[keep4], kkind[keep4], kpar[keep4], kgid[keep4]
        share = np.repeat(share[keep] / 4.0, 4)
        coarse = kvals[keep4]
    vals = np.concatenate(acc_vals) if acc_vals else np.zeros(0, dtype=dtype)
    gids = np.concatenate(acc_gid) if acc_gid else np.zeros(0, dtype=int)
    out = np.zeros(n_groups, dtype=dtype)
    order = np.argsort(gids, kind="stable")
    vals, gids = vals[order], gids[order]
    edges = np.searchsorted(gids, np.arange(n_groups + 1))
    for g in range(n_groups):
        seg = vals[edges[g] : edges[g + 1]]
        if complex_values:
            out[g] = complex(compensated_sum(seg.real), compensated_sum(seg.imag))
        else:
            out[g] = compensated_sum(seg)
    tr = np.array(traces) if traces else np.zeros((0, n_groups), dtype=dtype)
    return QuadResult(out, err_total, converged, levels, tr)


def _wrap(f):
    def g(z, gid):
        return f(z)

    return g


# ---------------------------------------------------------------------------
# Public integration entry points
# ---------------------------------------------------------------------------


def _check_plane_meta(meta: IntegrandMeta):
    if not meta.effective_decay > 0:
        raise UsageError("unbounded support needs a positive net gaussian decay rate")


def integrate_plane_many(f, metas: Sequence[IntegrandMeta], spec: QuadSpec, complex_values=False) -> QuadResult:
    """Integrate ``f(z, gid)`` over the plane once per entry of ``metas``."""
    cells = _Cells()
    for g, meta in enumerate(metas):
        _check_plane_meta(meta)
        _add_plane(cells, meta, spec, g)
    return _run(f, cells, len(metas), spec, complex_values)


def integrate_plane(
    f: Callable,
    meta: IntegrandMeta,
    spec: QuadSpec,
    support: Region | None = None,
    complex_values: bool = False,
):
    """Integral of ``f`` over the plane (or over ``support`` when given).

    ``f`` takes a complex ndarray of points and returns values of the same
    shape.  Raises NumericalFailure if ``max_refine`` levels do not suffice.
    """
    if support is not None:
        return integrate_region(f, support, spec, meta, complex_values=complex_values)
    _check_plane_meta(meta)
    res = integrate_plane_many(_wrap(f), [meta], spec, complex_values)
    return _unpack(res)


def integrate_regions(
    f, regions: Sequence[Region], spec: QuadSpec, singular_points=(), complex_values=False
) -> QuadResult:
    """Integrate ``f(z, gid)`` over each region (group ``gid`` = index)."""
    cells = _Cells()
    sing = [as_complex(s) for s in singular_points]
    for g, region in enumerate(regions):
        _add_region(cells, region, sing, spec, g)
    return _run(f, cells, len(regions), spec, complex_values)


def integrate_region(f, region: Region, spec: QuadSpec, meta: IntegrandMeta | None = None, complex_values=False):
    sing = meta.singular_points if meta is not None else ()
    res = integrate_regions(_wrap(f), [region], spec, sing, complex_values)
    return _unpack(res)


def _unpack(res: QuadResult):
    if not res.converged[0]:
        raise NumericalFailure(
            "adaptive cubature did not converge",
            estimate=res.values[0],
            error=float(res.errors[0]),
            trace=list(res.traces[:, 0]),
        )
    v = res.values[0]
    return complex(v) if np.iscomplexobj(res.values) else float(v)


def integrate_gaussian_many(
    f,
    centers: Sequence[complex],
    rate: float,
    spec: QuadSpec,
    fallback_meta: Callable[[int], IntegrandMeta] | None = None,
    singular_points=(),
) -> QuadResult:
    """``int exp(-rate |u - c_g|^2) f(u, g) dA(u)`` for each center ``c_g``.

    Tensor Gauss-Hermite rules of two orders are compared; groups where they
    disagree (or with a singular point near the center) fall back to the
    adaptive plane routine with the Gaussian folded into the integrand.
    """
    if not rate > 0:
        raise UsageError("rate must be positive")
    centers = np.asarray([as_complex(c) for c in centers], dtype=complex)
    n = len(centers)
    sing = np.asarray([as_complex(s) for s in singular_points], dtype=complex)
    est = []
    for m in _GH_ORDERS:
        x, w = np.polynomial.hermite.hermgauss(m)
        nodes = (x[:, None] + 1j * x[None, :]).ravel() / math.sqrt(rate)
        wt = np.outer(w, w).ravel() / rate
        vals = np.zeros(n)
        for i in range(0, n, 256):
            c = centers[i : i + 256]
            gid = np.arange(i, i + len(c))[:, None]
            with np.errstate(all="ignore"):
                fv = np.asarray(f(c[:, None] + nodes[None, :], gid), dtype=float)
            vals[i : i + len(c)] = fv @ wt
        est.append(vals)
    lo, hi = est
    err = np.abs(hi - lo)
    ok = np.isfinite(hi) & (err <= np.maximum(spec.abs_tol, spec.rel_tol * np.abs(hi)))
    if sing.size:
        near = np.min(np.abs(centers[:, None] - sing[None, :]), axis=1) < 3.0 / math.sqrt(rate)
        ok &= ~near
    values = hi.copy()
    converged = ok.copy()
    levels = np.zeros(n, dtype=int)
    bad = np.flatnonzero(~ok)
    if bad.size:
        if fallback_meta is None:
            converged[bad] = False
        else:
            def g(z, gid):
                real = bad[gid]
                return np.exp(-rate * np.abs(z - centers[real]) ** 2) * f(z, real)

            sub = integrate_plane_many(g, [fallback_meta(int(i)) for i in bad], spec)
            values[bad] = sub.values
            err[bad] = sub.errors
            converged[bad] = sub.converged
            levels[bad] = sub.levels
    return QuadResult(values, err, converged, levels, np.array([lo, hi]))
