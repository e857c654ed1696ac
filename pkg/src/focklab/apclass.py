"""Weight-class diagnostics on squares and discs.

Everything here reduces to region measures of a weight and of its conjugate
dual, computed in batches so that sup-searches over thousands of squares stay
cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, UsageError
from .quadcore import IntegrandMeta, QuadSpec, Region, as_complex, integrate_gaussian_many
from .weights import Weight, derive_weight, weight_measure, weight_measures

__all__ = [
    "ApReport",
    "KTReport",
    "BerezinReport",
    "ap_quotient",
    "ap_constant",
    "muckenhoupt_disc_quotient",
    "local_integrability_probe",
    "berezin",
    "berezin_many",
    "berezin_sup_condition",
    "kt_check",
    "lattice_comparability",
    "disc_doubling",
]

_INF_SAMPLE = 64
_KT_DELTAS = tuple(k / 20 for k in range(1, 20))


@dataclass
class ApReport:
    p: float
    r: float
    constant_estimate: float
    argmax_square: Region | None
    search_radius: float
    refinement_trace: list = field(default_factory=list)
    infinite: bool = False
    note: str = ""


@dataclass
class KTReport:
    r: float
    delta: float | None
    C_r: float | None
    witness_set: str
    feasible: bool
    table: list = field(default_factory=list)


@dataclass
class BerezinReport:
    value: float
    argmax: complex
    trace: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# A_p quotients
# ---------------------------------------------------------------------------


def _grid(center: complex, spacing: float, radius: float) -> np.ndarray:
    K = int(math.floor(radius / spacing + 1e-9))
    k = np.arange(-K, K + 1)
    X, Y = np.meshgrid(k, k, indexing="ij")
    pts = spacing * (X + 1j * Y).ravel()
    pts = pts[np.abs(pts) <= radius * (1 + 1e-12)]
    return center + pts


def _ess_inf(w: Weight, squares) -> np.ndarray:
    n = _INF_SAMPLE
    t = (np.arange(n) + 0.5) / n - 0.5
    off = (t[:, None] + 1j * t[None, :]).ravel()
    out = np.empty(len(squares))
    for i in range(0, len(squares), 64):
        chunk = squares[i : i + 64]
        c = np.array([q.center for q in chunk])[:, None]
        s = np.array([q.size for q in chunk])[:, None]
        out[i : i + 64] = np.min(w.eval(c + s * off[None, :]), axis=1)
    return out


def _quotients(w: Weight, p: float, squares, spec: QuadSpec) -> np.ndarray:
    area = np.array([q.area for q in squares])
    mw = weight_measures(w, squares, spec) / area
    if p == 1:
        with np.errstate(divide="ignore"):
            return mw / _ess_inf(w, squares)
    dual = derive_weight(w, "dual", p)
    md = weight_measures(dual, squares, spec) / area
    return mw * md ** (p - 1.0)


def ap_quotient(w: Weight, p: float, square: Region, spec: QuadSpec) -> float:
    """A_p-type quotient of ``w`` on one square (p = 1 uses a sampled infimum)."""
    if p < 1:
        raise UsageError("p must be >= 1")
    return float(_quotients(w, p, [square], spec)[0])


def local_integrability_probe(h, point: complex, depths=(8, 16, 32), n_rad=16, n_ang=32) -> dict:
    """Dyadic-annulus masses of ``h`` around ``point``.

    Returns the cumulative mass of the annuli ``2^-j-1 < |z - point| < 2^-j``
    up to each depth and a divergence flag: the increment from the middle to
    the last depth is at least 1.5 times the increment before it.
    """
    point = as_complex(point)
    xr, wr = np.polynomial.legendre.leggauss(n_rad)
    xr, wr = 0.5 * (xr + 1), 0.5 * wr
    th = 2 * math.pi * (np.arange(n_ang) + 0.5) / n_ang
    e = np.exp(1j * th)
    masses = []
    for j in range(max(depths) + 1):
        r0 = 2.0 ** (-j - 1)
        rho = r0 * 2.0**xr  # log-uniform radial nodes
        jac = rho * rho * math.log(2.0)
        z = point + rho[:, None] * e[None, :]
        with np.errstate(all="ignore"):
            v = np.asarray(h(z), dtype=float)
        m = float(np.sum(wr[:, None] * jac[:, None] * v) * (2 * math.pi / n_ang))
        masses.append(m)
    cum = np.cumsum(masses)
    d0, d1, d2 = depths
    inc_a = cum[d1] - cum[d0]
    inc_b = cum[d2] - cum[d1]
    diverges = (not np.isfinite(inc_b)) or (inc_b > 0 and inc_b >= 1.5 * inc_a)
    return {"cumulative": [float(cum[d]) for d in depths], "diverges": bool(diverges)}


def _inf_probe(w: Weight, p: float, center: complex, reach: float) -> str:
    for s in w.meta.singular_points:
        if abs(s - center) > reach:
            continue
        if p == 1:
            inv = lambda z: 1.0 / w.eval(z)  # noqa: E731
            sups = []
            for j in (16, 32):
                rr = 2.0 ** (-j)
                th = np.linspace(0, 2 * math.pi, 64, endpoint=False)
                with np.errstate(all="ignore"):
                    sups.append(float(np.max(inv(s + rr * np.exp(1j * th)))))
            if not np.isfinite(sups[1]) or sups[1] >= 2.0 * sups[0]:
                return f"essential infimum vanishes at {s}"
        else:
            dual = derive_weight(w, "dual", p)
            if local_integrability_probe(dual.eval, s)["diverges"]:
                return f"conjugate weight not locally integrable at {s}"
            if local_integrability_probe(w.eval, s)["diverges"]:
                return f"weight not locally integrable at {s}"
    return ""


def ap_constant(
    w: Weight,
    p: float,
    r: float,
    search_radius: float,
    spec: QuadSpec,
    search_center=0j,
) -> ApReport:
    """Sup of the A_{p,r} quotient over squares of side ``r``.

    Centers range over a grid of spacing r/4 in the disc of radius
    ``search_radius`` about ``search_center``; a second pass at spacing r/8
    covers the 5x5 neighborhood of the first-pass maximizer.
    """
    if p < 1:
        raise UsageError("p must be >= 1")
    if not r > 0:
        raise UsageError("r must be positive")
    if search_radius < r:
        raise UsageError("search_radius must be >= r")
    c0 = as_complex(search_center)
    reach = search_radius + r * math.sqrt(2) / 2
    why = _inf_probe(w, p, c0, reach)
    if why:
        return ApReport(p, r, math.inf, None, search_radius, [(r / 4, math.inf)], True, why)
    centers = _grid(c0, r / 4, search_radius)
    squares = [Region("square", complex(c), r) for c in centers]
    q = _quotients(w, p, squares, spec)
    i = int(np.argmax(q))
    best, arg = float(q[i]), complex(centers[i])
    trace = [(r / 4, best)]
    k = np.arange(-2, 3)
    nb = (arg + (r / 8) * (k[:, None] + 1j * k[None, :])).ravel()
    sq2 = [Region("square", complex(c), r) for c in nb]
    q2 = _quotients(w, p, sq2, spec)
    j = int(np.argmax(q2))
    if q2[j] > best:
        best, arg = float(q2[j]), complex(nb[j])
    trace.append((r / 8, best))
    infinite = not math.isfinite(best)
    return ApReport(p, r, best, Region("square", arg, r), search_radius, trace, infinite)


def muckenhoupt_disc_quotient(w: Weight, p: float, radius: float, spec: QuadSpec, center=0j) -> float:
    """Full A_p quotient of ``w`` over the disc ``D(center, radius)``."""
    if p <= 1:
        raise UsageError("disc quotient needs p > 1")
    D = Region.disc(center, radius)
    mw = weight_measure(w, D, spec) / D.area
    md = weight_measure(derive_weight(w, "dual", p), D, spec) / D.area
    return mw * md ** (p - 1.0)


# ---------------------------------------------------------------------------
# Berezin transform
# ---------------------------------------------------------------------------


def _berezin_meta(w: Weight, alpha: float):
    m = w.meta
    if m.gaussian_growth >= alpha:
        raise UsageError("weight grows too fast for this Berezin transform")

    def fallback(_i, c):
        return IntegrandMeta(
            alpha,
            max(m.poly_growth_degree, 0.0),
            m.singular_points,
            c,
            max(m.exp_growth, 0.0) + 2 * max(m.gaussian_growth, 0.0) * abs(c),
            max(m.gaussian_growth, 0.0),
        )

    return fallback


def berezin_many(w: Weight, alpha: float, points, spec: QuadSpec) -> np.ndarray:
    """Berezin transform of ``w`` at each of ``points``."""
    if not alpha > 0:
        raise UsageError("alpha must be positive")
    pts = np.asarray([as_complex(z) for z in np.atleast_1d(points)], dtype=complex)
    fb = _berezin_meta(w, alpha)
    ev = w.eval
    res = integrate_gaussian_many(
        lambda z, g: ev(z),
        pts,
        alpha,
        spec,
        fallback_meta=lambda i: fb(i, pts[i]),
        singular_points=w.meta.singular_points,
    )
    if not np.all(res.converged):
        i = int(np.flatnonzero(~res.converged)[0])
        raise NumericalFailure(
            f"Berezin transform did not converge at {pts[i]}", estimate=float(res.values[i]), error=float(res.errors[i])
        )
    return (alpha / math.pi) * res.values


def berezin(w: Weight, alpha: float, z, spec: QuadSpec) -> float:
    return float(berezin_many(w, alpha, [as_complex(z)], spec)[0])


def berezin_sup_condition(
    w: Weight, p: float, alpha: float, gamma: float, grid_radius: float, spec: QuadSpec, spacing: float = 0.25
) -> BerezinReport:
    """Sup over a grid of the Berezin-side class condition.

    p = 1: ``B_alpha(w)(z) / w(z)``; p > 1: ``B_alpha(w)(z) * B_gamma(w')(z)^(p-1)``
    with ``w'`` the conjugate dual.  The trace lists the running sup over
    radii R/4, R/2, R and then after a finer pass around the maximizer.
    """
    if p < 1:
        raise UsageError("p must be >= 1")
    if not grid_radius > 0:
        raise UsageError("grid_radius must be positive")
    pts = _grid(0j, spacing, grid_radius)

    def cond(z):
        b = berezin_many(w, alpha, z, spec)
        if p == 1:
            with np.errstate(divide="ignore", invalid="ignore"):
                v = b / w.eval(z)
            return np.where(np.isnan(v), np.inf, v)
        dual = derive_weight(w, "dual", p)
        return b * berezin_many(dual, gamma, z, spec) ** (p - 1.0)

    vals = cond(pts)
    trace = []
    for frac in (0.25, 0.5, 1.0):
        sel = np.abs(pts) <= frac * grid_radius * (1 + 1e-12)
        trace.append((frac * grid_radius, float(np.max(vals[sel])) if np.any(sel) else 0.0))
    i = int(np.argmax(vals))
    best, arg = float(vals[i]), complex(pts[i])
    if math.isfinite(best):
        k = np.arange(-2, 3)
        nb = (arg + (spacing / 2) * (k[:, None] + 1j * k[None, :])).ravel()
        nb = nb[np.abs(nb) <= grid_radius * (1 + 1e-12)]
        v2 = cond(nb)
        j = int(np.argmax(v2))
        if v2[j] > best:
            best, arg = float(v2[j]), complex(nb[j])
    trace.append(("refined", best))
    return BerezinReport(best, arg, trace)


# ---------------------------------------------------------------------------
# Kerman-Torchinsky search
# ---------------------------------------------------------------------------


def _dyadic_cells(Q: Region, n: int):
    h = Q.size / 2**n
    x0 = Q.center - complex(Q.size / 2, Q.size / 2)
    return [
        Region("square", x0 + complex((i + 0.5) * h, (j + 0.5) * h), h) for i in range(2**n) for j in range(2**n)
    ]


def kt_check(
    w: Weight,
    r: float,
    squares,
    spec: QuadSpec,
    seed: int = 0,
    c_max: float = 10.0,
    chain_tol: float = 1.05,
) -> KTReport:
    """Search for the KT exponent over a fixed, seeded subset family.

    A delta is accepted when ``max |E|/|Q| / (w(E)/w(Q))^delta <= c_max`` and
    no nested disc chain keeps growing at its smallest radii (ratio of the last
    two links <= ``chain_tol``).
    """
    squares = list(squares)
    if not squares:
        raise UsageError("kt_check needs at least one square")
    for Q in squares:
        if Q.kind != "square" or abs(Q.size - r) > 1e-12 * r:
            raise UsageError("all squares must have side r")
    rng = np.random.default_rng(seed)
    a_all, b_all, names = [], [], []
    chains = []  # (indices into a_all for j=1..6)
    for qi, Q in enumerate(squares):
        wq = weight_measure(w, Q, spec)
        if not wq > 0:
            raise NumericalFailure("square has zero weight", estimate=wq)
        sets, labels = [Q], [f"Q{qi}"]
        level3 = None
        for n in (1, 2, 3):
            cells = _dyadic_cells(Q, n)
            sets += cells
            labels += [f"Q{qi}/dyadic{n}[{k}]" for k in range(len(cells))]
            if n == 3:
                level3 = (len(sets) - len(cells), len(cells))
        t = (np.arange(5) + 0.5) / 5 - 0.5
        centers = [Q.center + Q.size * complex(x, y) for x in t for y in t]
        centers += [s for s in w.meta.singular_points if Q.contains(s)]
        chain_specs = []
        for c in centers:
            idx = []
            for j in range(1, 7):
                D = Region.disc(c, r * 2.0**-j)
                d = D.center - Q.center
                h = Q.size / 2
                if max(abs(d.real), abs(d.imag)) + D.size <= h * (1 + 1e-12):
                    idx.append(len(sets))
                    sets.append(D)
                    labels.append(f"Q{qi}/disc({c.real:.4g}{c.imag:+.4g}i,{D.size:.4g})")
            if len(idx) >= 2:
                chain_specs.append(idx)
        meas = np.empty(len(sets))
        meas[0] = wq
        meas[1:] = weight_measures(w, sets[1:], spec)
        base = len(a_all)
        for E, m, lab in zip(sets, meas, labels):
            a_all.append(E.area / Q.area)
            b_all.append(m / wq)
            names.append(lab)
        for idx in chain_specs:
            chains.append([base + k for k in idx])
        s3, n3 = level3
        cell_a = np.array([sets[s3 + k].area for k in range(n3)]) / Q.area
        cell_b = meas[s3 : s3 + n3] / wq
        for u in range(32):
            k = int(rng.integers(1, n3))
            pick = np.sort(rng.choice(n3, size=k, replace=False))
            a_all.append(float(cell_a[pick].sum()))
            b_all.append(float(cell_b[pick].sum()))
            names.append(f"Q{qi}/union{u}[{k} cells]")
    a = np.array(a_all)
    b = np.maximum(np.array(b_all), 1e-300)
    table = []
    best = None
    for delta in _KT_DELTAS:
        ratio = a / b**delta
        k = int(np.argmax(ratio))
        C = float(ratio[k])
        chain_ok = True
        for ch in chains:
            if ratio[ch[-1]] > chain_tol * ratio[ch[-2]]:
                chain_ok = False
                break
        ok = C <= c_max and chain_ok
        table.append((delta, C, ok))
        if ok:
            best = (delta, C, names[k])
    if best is None:
        return KTReport(r, None, None, "no tested delta is feasible", False, table)
    return KTReport(r, best[0], best[1], best[2], True, table)


# ---------------------------------------------------------------------------
# Lattice and doubling comparability
# ---------------------------------------------------------------------------


def _on_lattice(z: complex, r: float) -> bool:
    k = z / r
    return abs(k.real - round(k.real)) < 1e-9 and abs(k.imag - round(k.imag)) < 1e-9


def lattice_comparability(w: Weight, r: float, nu, nu_prime, spec: QuadSpec):
    """``(w(Q_r(nu)) / w(Q_r(nu')), ratio^(1/|nu - nu'|))``."""
    nu, nup = as_complex(nu), as_complex(nu_prime)
    if not (_on_lattice(nu, r) and _on_lattice(nup, r)):
        raise UsageError("nu and nu_prime must lie on the lattice r Z^2")
    m = weight_measures(w, [Region.square(nu, r), Region.square(nup, r)], spec)
    ratio = float(m[0] / m[1])
    dist = abs(nu - nup)
    fit = ratio ** (1.0 / dist) if dist > 0 else 1.0
    return ratio, fit


def disc_doubling(w: Weight, a, t: float, N: float, spec: QuadSpec) -> float:
    """``w(D(a, N t)) / w(D(a, t))``."""
    if not (t > 0 and N >= 1):
        raise UsageError("need t > 0 and N >= 1")
    a = as_complex(a)
    m = weight_measures(w, [Region.disc(a, N * t), Region.disc(a, t)], spec)
    return float(m[0] / m[1])
