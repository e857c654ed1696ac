"""Positive measures, Carleson condition functions and pointwise multipliers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericalFailure, UsageError
from .fockcore import EntireFn, FockParams, fock_integrals, fock_norm, parse_function
from .minilang import head_args, parse_complex, parse_real, split_top, strip_parens
from .quadcore import IntegrandMeta, QuadSpec, Region, as_complex, integrate_plane_many, integrate_regions, lattice_points
from .weights import Weight, derive_weight, parse_weight, weight_measures

__all__ = [
    "PositiveMeasure",
    "CarlesonReport",
    "MultClass",
    "measure_norm",
    "measure_integral",
    "carleson_condition",
    "carleson_condition_many",
    "condition_sup",
    "condition_H_norm",
    "carleson_diagnose",
    "kernel_embedding_ratios",
    "multiplier_condition",
    "multiplier_condition_many",
    "multiplier_reduce",
    "multiplier_empirical_norm",
    "zero_multiplier_falsifier",
    "mult_classify",
    "mu_g",
    "parse_measure",
]

GRID_SPACING = 0.5


@dataclass(frozen=True)
class PositiveMeasure:
    """Atoms plus an optional density ``weight(z) exp(gaussian_exponent |z|^2) dA``."""

    atoms: tuple = ()
    density: tuple | None = None
    label: str = ""

    def __post_init__(self):
        atoms = tuple((as_complex(z), float(m)) for z, m in self.atoms)
        for _, m in atoms:
            if not m > 0:
                raise UsageError("atom masses must be positive")
        object.__setattr__(self, "atoms", atoms)
        if self.density is not None:
            w, g = self.density
            if not isinstance(w, Weight):
                raise UsageError("density needs a Weight")
            if not float(g) + max(w.meta.gaussian_growth, 0.0) < 0:
                raise UsageError("density part must have net Gaussian decay (gaussian_exponent < 0)")
            object.__setattr__(self, "density", (w, float(g)))

    @classmethod
    def atom(cls, z=0j, mass=1.0) -> "PositiveMeasure":
        return cls(((z, mass),))

    @classmethod
    def with_density(cls, w: Weight, gaussian_exponent: float) -> "PositiveMeasure":
        return cls((), (w, gaussian_exponent))

    def scaled(self, c: float) -> "PositiveMeasure":
        if not c > 0:
            raise UsageError("scale must be positive")
        dens = None
        if self.density is not None:
            dens = (self.density[0].scaled(c), self.density[1])
        return PositiveMeasure(tuple((z, c * m) for z, m in self.atoms), dens, self.label)

    def __add__(self, other: "PositiveMeasure") -> "PositiveMeasure":
        if self.density is not None and other.density is not None:
            (w1, g1), (w2, g2) = self.density, other.density
            # exp factors differ in general; fold each into its weight
            e1, e2 = w1.eval, w2.eval
            g = max(g1, g2)
            meta = IntegrandMeta(
                0.0,
                max(w1.meta.poly_growth_degree, w2.meta.poly_growth_degree),
                tuple(dict.fromkeys(w1.meta.singular_points + w2.meta.singular_points)),
                0j,
                max(w1.meta.exp_growth, w2.meta.exp_growth),
                max(w1.meta.gaussian_growth, w2.meta.gaussian_growth),
            )

            def ev(z):
                r2 = np.abs(z) ** 2
                return e1(z) * np.exp((g1 - g) * r2) + e2(z) * np.exp((g2 - g) * r2)

            dens = (Weight(ev, meta, f"({w1.label})+({w2.label})"), g)
        else:
            dens = self.density if self.density is not None else other.density
        return PositiveMeasure(self.atoms + other.atoms, dens)


def _density_fn(mu: PositiveMeasure, extra_gauss: float = 0.0) -> Callable:
    w, g = mu.density
    ev = w.eval
    e = g + extra_gauss
    return lambda z: ev(z) * np.exp(e * (z.real**2 + z.imag**2))


# ---------------------------------------------------------------------------
# Integrals against mu
# ---------------------------------------------------------------------------


def measure_integral(f: EntireFn, mu: PositiveMeasure, q: float, spec: QuadSpec) -> float:
    """``int |f|^q dmu``."""
    if not q > 0:
        raise UsageError("q must be positive")
    total = math.fsum(m * abs(complex(f(np.array([z]))[0])) ** q for z, m in mu.atoms)
    if mu.density is not None:
        w, g = mu.density
        # |f|^q e^{g|z|^2} = (|f| e^{-a|z|^2/2})^q with a = -2g/q
        a = -2.0 * g / q
        if not a > 0:
            raise NumericalFailure("density integral diverges (no Gaussian decay)")
        total += float(fock_integrals([f], q, a, w, spec)[0])
    return total


def measure_norm(f: EntireFn, mu: PositiveMeasure, q: float, spec: QuadSpec) -> float:
    """``||f||_{L^q(mu)}``."""
    return measure_integral(f, mu, q, spec) ** (1.0 / q)


# ---------------------------------------------------------------------------
# Carleson condition functions
# ---------------------------------------------------------------------------


@dataclass
class CarlesonReport:
    case: str
    condition_value: float
    empirical_norm: float
    C_mu_n: float
    verdict: str
    evidence: dict = field(default_factory=dict)


def _disc_masses(mu: PositiveMeasure, centers, q: float, alpha: float, spec: QuadSpec) -> np.ndarray:
    """``int_{D(c,1)} e^{q alpha |z|^2 / 2} dmu`` for each center."""
    centers = np.asarray(centers, dtype=complex)
    out = np.zeros(len(centers))
    for z, m in mu.atoms:
        hit = np.abs(centers - z) < 1.0
        out[hit] += m * math.exp(q * alpha * abs(z) ** 2 / 2)
    if mu.density is not None:
        w = mu.density[0]
        f = _density_fn(mu, q * alpha / 2)
        res = integrate_regions(lambda z, g: f(z), [Region.disc(c, 1.0) for c in centers], spec, w.meta.singular_points)
        if not np.all(res.converged):
            raise NumericalFailure("disc integral of the measure did not converge")
        out += res.values
    return out


def _omega_np(w: Weight, n: int, p: float) -> Weight:
    return derive_weight(w, "distort", n * p) if n != 0 else w


def carleson_condition_many(mu, p, q, alpha, w: Weight, n: int, points, spec: QuadSpec) -> np.ndarray:
    """G (p <= q) or H (q < p) at each point, built on ``w_{np}``."""
    for v in (p, q, alpha):
        if not v > 0:
            raise UsageError("p, q, alpha must be positive")
    pts = np.asarray([as_complex(z) for z in np.atleast_1d(points)], dtype=complex)
    wn = _omega_np(w, n, p)
    num = _disc_masses(mu, pts, q, alpha, spec)
    den = weight_measures(wn, [Region.disc(c, 1.0) for c in pts], spec)
    if p <= q:
        return num / den ** (q / p)
    return num / den


def carleson_condition(mu, p, q, alpha, w, n, eval_at, spec) -> float:
    return float(carleson_condition_many(mu, p, q, alpha, w, n, [as_complex(eval_at)], spec)[0])


def _grid(radius: float, spacing: float = GRID_SPACING) -> np.ndarray:
    return np.array([c.z for c in lattice_points(spacing, radius)])


def condition_sup(mu, p, q, alpha, w, n, grid_radius, spec, spacing=GRID_SPACING):
    """``sup G`` over the grid of spacing 1/2 in ``|a| <= grid_radius``."""
    if p > q:
        raise UsageError("the sup reducer applies to p <= q")
    pts = _grid(grid_radius, spacing)
    vals = carleson_condition_many(mu, p, q, alpha, w, n, pts, spec)
    i = int(np.argmax(vals))
    return float(vals[i]), complex(pts[i])


def _disc_measure_fn(w: Weight, spec: QuadSpec, n_r: int = 24, n_t: int = 48):
    """Vectorized ``u -> w(D(u, 1))`` by a fixed polar product rule."""
    if w.is_constant:
        c = float(w.eval(np.zeros(1))[0])
        return lambda u: np.full(np.shape(u), math.pi * c)
    x, wt = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * (x + 1)
    wr = 0.5 * wt * r
    th = 2 * math.pi * (np.arange(n_t) + 0.5) / n_t
    off = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    ww = np.repeat(wr, n_t) * (2 * math.pi / n_t)
    ev = w.eval

    def fn(u):
        u = np.asarray(u, dtype=complex)
        flat = u.ravel()
        out = np.empty(flat.shape)
        for i in range(0, flat.size, 256):
            blk = flat[i : i + 256]
            out[i : i + 256] = ev(blk[:, None] + off[None, :]) @ ww
        return out.reshape(u.shape)

    return fn


def condition_H_norm(mu, p, q, alpha, w, n, grid_radius, spec, spacing=GRID_SPACING):
    """``||H||_{L^{p/(p-q)}(w_{np})}``.

    Atoms-only measures are integrated piecewise over each atom's unit disc
    (dividing by the number of atom discs covering the point, so overlaps
    are counted once).  Measures with a density use the grid values of ``H``
    with the cell-area weight ``spacing^2``.
    """
    if not q < p:
        raise UsageError("the H-norm reducer applies to q < p")
    s = p / (p - q)
    wn = _omega_np(w, n, p)
    if mu.density is None:
        if not mu.atoms:
            return 0.0
        centers = np.array([z for z, _ in mu.atoms])
        amps = np.array([m * math.exp(q * alpha * abs(z) ** 2 / 2) for z, m in mu.atoms])
        dm = _disc_measure_fn(wn, spec)
        wev = wn.eval

        def F(u, gid):
            d = np.abs(u[..., None] - centers) < 1.0
            cover = d.sum(axis=-1)
            H = (d * amps).sum(axis=-1) / dm(u)
            return H**s * wev(u) / np.maximum(cover, 1)

        res = integrate_regions(F, [Region.disc(c, 1.0) for c in centers], spec, wn.meta.singular_points)
        if not np.all(res.converged):
            raise NumericalFailure("H-norm integral did not converge")
        return math.fsum(res.values) ** (1.0 / s)
    pts = _grid(grid_radius, spacing)
    H = carleson_condition_many(mu, p, q, alpha, w, n, pts, spec)
    wv = wn.eval(pts)
    return float(math.fsum(H**s * wv * spacing**2) ** (1.0 / s))


def kernel_embedding_ratios(mu, p, q, alpha, w, n, points, spec) -> np.ndarray:
    """``||K_a||^q_{L^q(mu)} / ||K_a||^q_{F^p_{alpha, w_{np}}}`` for each ``a``."""
    pts = [as_complex(a) for a in points]
    wn = _omega_np(w, n, p)
    ks = [EntireFn.kernel(alpha, a) for a in pts]
    fp = fock_integrals(ks, p, alpha, wn, spec)
    out = np.empty(len(pts))
    for i, K in enumerate(ks):
        out[i] = measure_integral(K, mu, q, spec) / fp[i] ** (q / p)
    return out


def _c_mu_n(mu, q, n, spec) -> float:
    if n >= 0:
        return 0.0
    return max(measure_integral(EntireFn.monomial(k), mu, q, spec) for k in range(-n))


def _moment_check(mu, q, spec, kmax=16):
    vals = [measure_integral(EntireFn.monomial(k), mu, q, spec) ** (1 / q) for k in range(kmax + 1)]
    return vals


def carleson_diagnose(
    mu,
    p,
    q,
    alpha,
    w,
    n,
    spec,
    radii=(2.0, 6.0),
    kernel_spacing=1.0,
    growth_factor=2.0,
) -> CarlesonReport:
    """Condition value vs. empirical kernel embedding norm on two grid radii.

    Verdict: ``bounded`` when both columns change by less than 10% between the
    radii, ``unbounded-evidence`` when both grow by ``growth_factor`` or more,
    ``inconclusive`` otherwise.
    """
    case = "p<=q" if p <= q else "q<p"
    cond, emp = [], []
    for R in radii:
        if p <= q:
            cond.append(condition_sup(mu, p, q, alpha, w, n, R, spec)[0])
        else:
            cond.append(condition_H_norm(mu, p, q, alpha, w, n, R, spec))
        pts = [c.z for c in lattice_points(kernel_spacing, R)]
        emp.append(float(np.max(kernel_embedding_ratios(mu, p, q, alpha, w, n, pts, spec))))
    C = _c_mu_n(mu, q, n, spec)
    evidence = {"radii": list(radii), "condition": cond, "empirical": emp}
    if n < 0:
        evidence["moments"] = _moment_check(mu, q, spec)
    gc, ge = cond[-1] / cond[0], emp[-1] / emp[0]
    if gc < 1.1 and ge < 1.1:
        verdict = "bounded"
    elif gc >= growth_factor and ge >= growth_factor:
        verdict = "unbounded-evidence"
    else:
        verdict = "inconclusive"
    return CarlesonReport(case, cond[-1], emp[-1], C, verdict, evidence)


# ---------------------------------------------------------------------------
# Multipliers
# ---------------------------------------------------------------------------


def multiplier_condition_many(g: EntireFn, p, q, alpha, beta, w: Weight, eta: Weight, points, spec) -> np.ndarray:
    """``G(u) = w(D(u,1))^-1 int_{D(u,1)} |g|^q e^{-q(beta-alpha)|z|^2/2} eta dA``."""
    for v in (p, q, alpha, beta):
        if not v > 0:
            raise UsageError("p, q, alpha, beta must be positive")
    pts = np.asarray([as_complex(z) for z in np.atleast_1d(points)], dtype=complex)
    c = beta - alpha
    eev = eta.eval
    kinks = g.known_zeros() if q % 2 else ()

    def F(z, gid):
        return g.weighted_abs_pow(z, c, q) * eev(z) if c != 0 else np.abs(g(z)) ** q * eev(z)

    res = integrate_regions(F, [Region.disc(u, 1.0) for u in pts], spec, tuple(eta.meta.singular_points) + kinks)
    if not np.all(res.converged):
        raise NumericalFailure("multiplier condition integral did not converge")
    den = weight_measures(w, [Region.disc(u, 1.0) for u in pts], spec)
    return res.values / den


def multiplier_condition(g, p, q, alpha, beta, w, eta, eval_at, spec) -> float:
    return float(multiplier_condition_many(g, p, q, alpha, beta, w, eta, [as_complex(eval_at)], spec)[0])


def multiplier_reduce(g, p, q, alpha, beta, w, eta, grid_radius, spec, spacing=GRID_SPACING) -> float:
    """``sup G / w(D(u,1))^{(q-p)/p}`` for p <= q, else ``||G||_{L^{p/(p-q)}(w)}``."""
    pts = _grid(grid_radius, spacing)
    G = multiplier_condition_many(g, p, q, alpha, beta, w, eta, pts, spec)
    if p <= q:
        if q == p:
            return float(np.max(G))
        den = weight_measures(w, [Region.disc(u, 1.0) for u in pts], spec)
        return float(np.max(G / den ** ((q - p) / p)))
    s = p / (p - q)
    return float(math.fsum(G**s * w.eval(pts) * spacing**2) ** (1.0 / s))


def multiplier_empirical_norm(
    g: EntireFn, p, q, alpha, beta, w: Weight, spec, radius=6.0, spacing=1.0, eta: Weight | None = None
):
    """``sup_a ||g K_a||_{F^q_{beta, eta}} / ||K_a||_{F^p_{alpha, w}}`` over a lattice."""
    eta = eta if eta is not None else w
    pts = [c.z for c in lattice_points(spacing, radius)]
    ks = [EntireFn.kernel(alpha, a) for a in pts]
    num = fock_integrals([g * K for K in ks], q, beta, eta, spec) ** (1.0 / q)
    den = fock_integrals(ks, p, alpha, w, spec) ** (1.0 / p)
    r = num / den
    i = int(np.argmax(r))
    return float(r[i]), complex(pts[i]), r


def zero_multiplier_falsifier(alpha, p, q, w: Weight, spec, radii=(1.0, 2.0, 3.0, 4.0), beta=None, delta=None):
    """Norm ratios ``||K||_{F^q_beta} / ||K||_{F^p_alpha}`` for ``K = K_{a, alpha - delta}``.

    Defaults: ``beta = alpha/2``, ``delta = (alpha - beta)/4``, ``a`` on the
    positive real axis.
    """
    beta = alpha / 2 if beta is None else beta
    delta = (alpha - beta) / 4 if delta is None else delta
    out = []
    for r in radii:
        K = EntireFn.kernel(alpha - delta, r)
        num = fock_norm(K, FockParams(q, beta), w, spec)
        den = fock_norm(K, FockParams(p, alpha), w, spec)
        out.append(num / den)
    return out


@dataclass
class MultClass:
    p: float
    q: float
    alpha: float
    beta: float
    verdict: str
    checkable_condition: str
    exponent: float | None = None
    evaluator: Callable | None = field(default=None, repr=False)


def mult_classify(p, q, alpha, beta) -> MultClass:
    """Multiplier class for source ``(p, alpha)`` and target ``(q, beta)``."""
    for v in (p, q, alpha, beta):
        if not v > 0:
            raise UsageError("p, q, alpha, beta must be positive")
    if beta < alpha:
        return MultClass(p, q, alpha, beta, "zero_only", "g = 0", None, lambda g, *a, **k: float(g.is_zero))
    if p == q and alpha == beta:
        return MultClass(
            p, q, alpha, beta, "constants_only", "g constant", None, lambda g, *a, **k: float(g.derivative().is_zero)
        )
    if p == q:

        def ev_inf(g, w, spec, radius=6.0):
            z = _grid(radius, 0.25)
            return float(np.max(g.weighted_abs_pow(z, beta - alpha, 1.0)))

        return MultClass(
            p, q, alpha, beta, "F_infty(beta-alpha)", "sup |g(u)| e^{-(beta-alpha)|u|^2/2} < inf", None, ev_inf
        )
    if q > p:
        ex = (q - p) / (p * q)

        def ev_growth(g, w, spec, radius=6.0):
            z = _grid(radius, GRID_SPACING)
            lhs = np.abs(g(z)) * np.exp((alpha - beta) / 2 * np.abs(z) ** 2)
            den = weight_measures(w, [Region.disc(u, 1.0) for u in z], spec) ** ex
            return float(np.max(lhs / den))

        return MultClass(
            p,
            q,
            alpha,
            beta,
            "growth_condition",
            f"|g(u)| e^{{(alpha-beta)|u|^2/2}} <~ w(D(u,1))^{ex:g}",
            ex,
            ev_growth,
        )
    s = p * q / (p - q)
    if alpha < beta:

        def ev_fock(g, w, spec):
            return float(fock_integrals([g], s, beta - alpha, w, spec)[0] ** (1 / s))

        return MultClass(p, q, alpha, beta, "integrability_condition", f"g in F^{s:g}_(beta-alpha),w", s, ev_fock)

    def ev_int(g, w, spec):
        # a nonzero entire function is never in L^s(w) for the weights handled here
        return 0.0 if g.is_zero else math.inf

    return MultClass(
        p, q, alpha, beta, "integrability_condition", f"g entire and in L^{s:g}(w) (only g = 0 for A_inf weights)", s, ev_int
    )


# ---------------------------------------------------------------------------
# Mini-language
# ---------------------------------------------------------------------------


def mu_g(g: EntireFn, q: float, beta: float, eta: Weight) -> PositiveMeasure:
    """``|g|^q e^{-q beta |z|^2 / 2} eta dA`` as a density measure."""
    ex = g.exponents
    eev = eta.eval
    meta = IntegrandMeta(
        0.0,
        max(eta.meta.poly_growth_degree, 0.0) + q * g.degree,
        tuple(eta.meta.singular_points) + (g.known_zeros() if q % 2 else ()),
        0j,
        max(eta.meta.exp_growth, 0.0) + q * max((abs(b) for b in ex), default=0.0),
        eta.meta.gaussian_growth,
    )
    w = Weight(lambda z: np.abs(g(z)) ** q * eev(z), meta, f"|g|^{q:g}*{eta.label}")
    return PositiveMeasure((), (w, -q * beta / 2), "mu_g")


def _merge_kv(text: str, keys) -> dict:
    """Split ``k=v,...`` at top-level commas, gluing pieces whose key is not expected."""
    out, cur = {}, None
    for tok in split_top(text, ","):
        k = tok.split("=", 1)[0].strip() if "=" in tok else None
        if k in keys and k not in out:
            cur = k
            out[k] = tok.split("=", 1)[1].strip()
        elif cur is not None:
            out[cur] += "," + tok
        else:
            raise UsageError(f"unexpected token {tok!r}")
    return out


def parse_measure(text: str, alpha: float | None = None) -> PositiveMeasure:
    """``atoms:(x+yi:m;...)``, ``density:weight=<w>,gauss=G``, ``mu_g:g=<f>,q=Q,beta=B,eta=<w>``."""
    name, args = head_args(text)
    if name == "atoms":
        atoms = []
        for tok in split_top(strip_parens(args), ";"):
            if ":" not in tok:
                raise UsageError(f"atom needs point:mass, got {tok!r}")
            z, m = tok.rsplit(":", 1)
            atoms.append((parse_complex(z), parse_real(m, "mass")))
        return PositiveMeasure(tuple(atoms), None, text)
    if name == "density":
        kv = _merge_kv(args, ("weight", "gauss"))
        if "gauss" not in kv:
            raise UsageError("density needs gauss=G")
        w = parse_weight(kv.get("weight", "constant"))
        return PositiveMeasure((), (w, parse_real(kv["gauss"], "gauss")), text)
    if name == "mu_g":
        kv = _merge_kv(args, ("g", "q", "beta", "eta"))
        for k in ("g", "q", "beta"):
            if k not in kv:
                raise UsageError(f"mu_g needs {k}")
        g = parse_function(kv["g"], alpha)
        eta = parse_weight(kv.get("eta", "constant"))
        return mu_g(g, parse_real(kv["q"], "q"), parse_real(kv["beta"], "beta"), eta)
    raise UsageError(f"unknown measure family {name!r}")
