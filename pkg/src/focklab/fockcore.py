"""Exact entire functions, Fock norms, projections and related experiments.

``EntireFn`` stores finite sums ``sum_b p_b(z) exp(b z)`` with Gaussian
rational coefficients and exponents, so derivatives, antiderivatives from 0
and Taylor data are computed without rounding.  Conversion to floating point
happens only at evaluation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import NumericalFailure, UsageError
from .minilang import head_args, parse_complex, parse_kv, parse_real, split_top, strip_parens
from .quadcore import (
    IntegrandMeta,
    QuadSpec,
    Region,
    as_complex,
    integrate_gaussian_many,
    integrate_plane_many,
    integrate_regions,
)
from .weights import Weight, derive_weight, make_weight, weight_measures

__all__ = [
    "GQ",
    "EntireFn",
    "SampledFn",
    "FockParams",
    "RatioReport",
    "parse_function",
    "diff_antidiff",
    "fock_integral",
    "fock_integrals",
    "fock_norm",
    "project",
    "project_many",
    "project_derivative",
    "growth_gamma",
    "growth_bound",
    "lp_ratio",
    "lp_test_family",
    "kernel_norm_check",
    "remainder_check",
    "remainder_many",
    "lp_ratios",
    "kernel_norm_checks",
    "pointwise_bound_check",
]


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


class GQ:
    """Exact complex rational ``re + i im``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def of(cls, x) -> "GQ":
        if isinstance(x, GQ):
            return x
        if isinstance(x, Fraction) or isinstance(x, int):
            return cls(x, 0)
        z = complex(x)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise UsageError("coefficients must be finite")
        return cls(Fraction(z.real), Fraction(z.imag))

    def __add__(self, o):
        o = GQ.of(o)
        return GQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GQ.of(o)
        return GQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GQ.of(o) - self

    def __mul__(self, o):
        o = GQ.of(o)
        return GQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GQ.of(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero")
        return GQ((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def __neg__(self):
        return GQ(-self.re, -self.im)

    def conj(self):
        return GQ(self.re, -self.im)

    def __eq__(self, o):
        if not isinstance(o, GQ):
            try:
                o = GQ.of(o)
            except (TypeError, ValueError, UsageError):
                return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def key(self):
        return (self.re, self.im)

    def __repr__(self):
        return f"GQ({complex(self)})"


_ZERO = GQ(0)


# ---------------------------------------------------------------------------
# Entire functions
# ---------------------------------------------------------------------------


def _trim(coeffs):
    c = list(coeffs)
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def _padd(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else _ZERO) + (b[i] if i < len(b) else _ZERO) for i in range(n)])


def _pmul(a, b):
    if not a or not b:
        return ()
    out = [_ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return _trim(out)


class EntireFn:
    """Finite sum ``sum_b p_b(z) exp(b z)`` with exact coefficients.

    The reproducing kernel ``K_a(z) = exp(alpha conj(a) z)`` is the term with
    ``b = alpha conj(a)`` and constant polynomial 1.
    """

    __slots__ = ("_terms", "_num")

    def __init__(self, terms=None):
        acc = {}
        for b, coeffs in (terms or {}).items() if isinstance(terms, dict) else (terms or ()):
            b = GQ.of(b)
            cs = tuple(GQ.of(c) for c in coeffs)
            acc[b] = _padd(acc.get(b, ()), cs)
        self._terms = {b: c for b, c in acc.items() if c}
        self._num = None

    # construction ---------------------------------------------------------

    @classmethod
    def poly(cls, coeffs) -> "EntireFn":
        return cls({GQ(0): tuple(coeffs)})

    @classmethod
    def monomial(cls, m: int, c=1) -> "EntireFn":
        if int(m) != m or m < 0:
            raise UsageError("monomial degree must be a nonnegative integer")
        return cls.poly([0] * int(m) + [c])

    @classmethod
    def constant(cls, c) -> "EntireFn":
        return cls.poly([c])

    @classmethod
    def kernel(cls, alpha: float, a, c=1) -> "EntireFn":
        if not alpha > 0:
            raise UsageError("kernel needs alpha > 0")
        b = GQ.of(alpha) * GQ.of(as_complex(a)).conj()
        return cls({b: (c,)})

    @classmethod
    def exponential(cls, b, c=1) -> "EntireFn":
        """``c exp(b z)``."""
        return cls({GQ.of(b): (c,)})

    # views ---------------------------------------------------------------

    @property
    def terms(self):
        return tuple(sorted(self._terms.items(), key=lambda kv: kv[0].key()))

    @property
    def poly_coeffs(self) -> list:
        return [complex(c) for c in self._terms.get(_ZERO, ())]

    def kernel_terms(self, alpha: float) -> list:
        """``(c, alpha, a)`` for each term ``c exp(alpha conj(a) z)``; needs constant coefficients."""
        out = []
        for b, cs in self.terms:
            if not b:
                continue
            if len(cs) != 1:
                raise UsageError("term has a non-constant polynomial factor")
            out.append((complex(cs[0]), alpha, complex(b).conjugate() / alpha))
        return out

    @property
    def exponents(self) -> list:
        return [complex(b) for b, _ in self.terms]

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_polynomial(self) -> bool:
        return all(not b for b in self._terms)

    @property
    def degree(self) -> int:
        return max((len(c) - 1 for c in self._terms.values()), default=0)

    # arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, EntireFn):
            other = EntireFn.constant(other)
        t = dict(self._terms)
        for b, c in other._terms.items():
            t[b] = _padd(t.get(b, ()), c)
        return EntireFn(t)

    __radd__ = __add__

    def __neg__(self):
        return EntireFn({b: tuple(-x for x in c) for b, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, EntireFn) else EntireFn.constant(-complex(other)))

    def __mul__(self, other):
        if isinstance(other, EntireFn):
            t = {}
            for b1, c1 in self._terms.items():
                for b2, c2 in other._terms.items():
                    b = b1 + b2
                    t[b] = _padd(t.get(b, ()), _pmul(c1, c2))
            return EntireFn(t)
        k = GQ.of(other)
        return EntireFn({b: tuple(k * x for x in c) for b, c in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, EntireFn):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def derivative(self, n: int = 1) -> "EntireFn":
        f = self
        for _ in range(n):
            t = {}
            for b, c in f._terms.items():
                dc = [c[j + 1] * (j + 1) for j in range(len(c) - 1)]
                nc = _padd(tuple(dc), tuple(b * x for x in c))
                t[b] = nc
            f = EntireFn(t)
        return f

    def antiderivative(self, n: int = 1) -> "EntireFn":
        """``n``-fold antiderivative vanishing to order ``n`` at 0."""
        f = self
        for _ in range(n):
            t = {}
            const = _ZERO
            for b, c in f._terms.items():
                if not b:
                    q = (_ZERO,) + tuple(c[j] / (j + 1) for j in range(len(c)))
                    t[b] = _padd(t.get(b, ()), q)
                    continue
                # Q' + b Q = p, solved from the top coefficient down
                deg = len(c) - 1
                q = [_ZERO] * (deg + 1)
                q[deg] = c[deg] / b
                for j in range(deg - 1, -1, -1):
                    q[j] = (c[j] - q[j + 1] * (j + 1)) / b
                t[b] = _padd(t.get(b, ()), tuple(q))
                const = const - q[0]
            if const:
                t[_ZERO] = _padd(t.get(_ZERO, ()), (const,))
            f = EntireFn(t)
        return f

    def taylor_coeffs(self, m: int) -> list:
        """Exact Taylor coefficients of degree 0..m at 0 (as GQ)."""
        out = [_ZERO] * (m + 1)
        for b, c in self._terms.items():
            ek = [GQ(1)]
            for j in range(1, m + 1):
                ek.append(ek[-1] * b / j)
            for i, ci in enumerate(c):
                if i > m or not ci:
                    continue
                for j in range(m + 1 - i):
                    out[i + j] = out[i + j] + ci * ek[j]
        return out

    def taylor(self, m: int) -> "EntireFn":
        return EntireFn.poly(self.taylor_coeffs(m))

    def derivative_at_zero(self, k: int) -> complex:
        c = self.taylor_coeffs(k)[k]
        return complex(c * math.factorial(k))

    # evaluation ----------------------------------------------------------

    def _numeric(self):
        if self._num is None:
            self._num = [(complex(b), np.array([complex(x) for x in c][::-1])) for b, c in self.terms]
        return self._num

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for b, c in self._numeric():
            v = np.polyval(c, z)
            out = out + (v if b == 0 else v * np.exp(b * z))
        return out

    def scaled(self, z, alpha: float):
        """``f(z) exp(-alpha |z|^2 / 2)`` without intermediate overflow."""
        z = np.asarray(z, dtype=complex)
        g = -0.5 * alpha * (z.real**2 + z.imag**2)
        out = np.zeros(z.shape, dtype=complex)
        for b, c in self._numeric():
            out = out + np.polyval(c, z) * np.exp(b * z + g)
        return out

    def weighted_abs_pow(self, z, alpha: float, p: float):
        """``|f(z)|^p exp(-p alpha |z|^2 / 2)``."""
        return np.abs(self.scaled(z, alpha)) ** p

    def envelope(self, alpha: float, p: float) -> dict:
        """Gaussian envelope of ``|f|^p exp(-p alpha |z|^2/2)``: decay ``p alpha/2``."""
        num = self._numeric()
        deg = max((len(c) - 1 for _, c in num), default=0)
        if not num:
            return {"center": 0j, "poly": 0.0, "exp": 0.0}
        if len(num) == 1:
            b = num[0][0]
            return {"center": b.conjugate() / alpha, "poly": p * deg, "exp": 0.0}
        return {"center": 0j, "poly": p * deg, "exp": p * max(abs(b) for b, _ in num)}

    def over_power(self, k: int, order: int = 48) -> Callable:
        """Callable for ``f(z) / z^k`` when ``f`` vanishes to order ``k`` at 0.

        Inside the unit disc the exact Taylor expansion is used, which avoids
        the cancellation of evaluating ``f`` near its zero.
        """
        tc = self.taylor_coeffs(order + k)
        if any(tc[j] for j in range(k)):
            raise UsageError("function does not vanish to the requested order at 0")
        near = np.array([complex(c) for c in tc[k:]][::-1])

        def h(z):
            z = np.asarray(z, dtype=complex)
            inside = np.abs(z) < 1.0
            out = np.empty(z.shape, dtype=complex)
            out[inside] = np.polyval(near, z[inside])
            zo = z[~inside]
            out[~inside] = self(zo) / zo**k
            return out

        return h

    def poly_roots(self) -> tuple:
        if not self.is_polynomial or self.degree < 1:
            return ()
        c = self.poly_coeffs[::-1]
        return tuple(complex(r) for r in np.roots(c))

    def known_zeros(self) -> tuple:
        """Zeros of ``p(z) exp(bz)`` when there is a single term, else ``()``."""
        if len(self._terms) != 1:
            return ()
        (c,) = self._terms.values()
        if len(c) < 2:
            return ()
        return tuple(complex(r) for r in np.roots([complex(x) for x in c[::-1]]))

    def describe(self) -> str:
        parts = []
        for b, c in self.terms:
            poly = "+".join(f"({complex(x):g})z^{j}" for j, x in enumerate(c) if x)
            parts.append(poly if not b else f"[{poly}]exp(({complex(b):g})z)")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"EntireFn({self.describe()})"


@dataclass(frozen=True)
class SampledFn:
    """Callable with declared growth ``|g(z)| <~ (1+|z|)^d exp(beta |z|^2 / 2)``."""

    func: Callable
    beta: float = 0.0
    poly_degree: float = 0.0
    singular_points: tuple = ()
    label: str = "sampled"

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))


def diff_antidiff(f: EntireFn, n: int) -> EntireFn:
    """``f^(n)`` for n >= 0, the |n|-fold antiderivative from 0 for n < 0."""
    if int(n) != n:
        raise UsageError("order must be an integer")
    return f.derivative(int(n)) if n >= 0 else f.antiderivative(-int(n))


def parse_function(text: str, alpha: float | None = None) -> EntireFn:
    """``poly:c0,c1,..``, ``monomial:m``, ``kernel:alpha=A,a=X+Yi``, ``sum:(f;g)``."""
    name, args = head_args(text)
    if name == "poly":
        if not args:
            raise UsageError("poly needs coefficients")
        return EntireFn.poly([parse_complex(c) for c in split_top(args, ",")])
    if name == "monomial":
        try:
            m = int(args)
        except ValueError:
            raise UsageError(f"bad monomial degree {args!r}") from None
        return EntireFn.monomial(m)
    if name == "kernel":
        kv = parse_kv(args, {"alpha": parse_real, "a": parse_complex, "c": parse_complex})
        a_ = kv.get("alpha", alpha)
        if a_ is None:
            raise UsageError("kernel needs alpha")
        if "a" not in kv:
            raise UsageError("kernel needs a")
        return EntireFn.kernel(a_, kv["a"], kv.get("c", 1))
    if name == "sum":
        parts = [parse_function(s, alpha) for s in split_top(strip_parens(args), ";")]
        out = EntireFn()
        for p in parts:
            out = out + p
        return out
    raise UsageError(f"unknown function family {name!r}")


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockParams:
    p: float
    alpha: float
    k: int = 0
    normalized: bool = False

    def __post_init__(self):
        if not (self.p > 0 and self.alpha > 0):
            raise UsageError("need p > 0 and alpha > 0")
        if int(self.k) != self.k or self.k < 0:
            raise UsageError("k must be a nonnegative integer")


@dataclass
class RatioReport:
    case: str
    lhs: float
    rhs: float
    ratio: float
    levels: int = 0
    error: float = 0.0
    extra: dict = field(default_factory=dict)


def _integrand_meta(center, decay, poly, expg, w: Weight | None, extra_sing=()):
    sing = tuple(extra_sing)
    if w is not None:
        m = w.meta
        if m.gaussian_growth >= decay:
            raise UsageError("weight grows too fast for this Gaussian envelope")
        poly += max(m.poly_growth_degree, 0.0)
        expg += max(m.exp_growth, 0.0) + 2 * max(m.gaussian_growth, 0.0) * abs(center)
        sing = sing + m.singular_points
        return IntegrandMeta(decay, poly, sing, center, expg, max(m.gaussian_growth, 0.0))
    return IntegrandMeta(decay, poly, sing, center, expg)


def _kinks(f: EntireFn, p: float) -> tuple:
    # |f|^p is smooth at simple zeros only when p is an even integer
    if p % 2 == 0:
        return ()
    return f.known_zeros()


def _fail(res, what, i=0):
    raise NumericalFailure(
        f"{what} did not converge",
        estimate=complex(res.values[i]) if np.iscomplexobj(res.values) else float(res.values[i]),
        error=float(res.errors[i]),
        trace=list(res.traces[:, i]) if res.traces.size else [],
    )


def fock_integrals(fs, p: float, alpha: float, w: Weight | None, spec: QuadSpec) -> np.ndarray:
    """``int |f|^p exp(-p alpha |z|^2/2) w dA`` for each ``f`` (batched)."""
    fs = list(fs)
    metas = []
    for f in fs:
        env = f.envelope(alpha, p)
        metas.append(_integrand_meta(env["center"], p * alpha / 2, env["poly"], env["exp"], w, _kinks(f, p)))
    wev = w.eval if w is not None else None

    def F(z, gid):
        out = np.empty(z.shape)
        for g in np.unique(gid):
            rows = gid[:, 0] == g
            out[rows] = fs[g].weighted_abs_pow(z[rows], alpha, p)
        return out if wev is None else out * wev(z)

    res = integrate_plane_many(F, metas, spec)
    if not np.all(res.converged):
        _fail(res, "Fock norm integral", int(np.flatnonzero(~res.converged)[0]))
    return res.values


def fock_integral(f: EntireFn, params: FockParams, w: Weight | None, spec: QuadSpec) -> float:
    """p-th power of the (Sobolev-order ``params.k``) weighted Fock norm."""
    g = f.derivative(params.k) if params.k else f
    val = float(fock_integrals([g], params.p, params.alpha, w, spec)[0])
    if params.normalized:
        val *= params.p * params.alpha / (2 * math.pi)
    for j in range(params.k):
        val += abs(f.derivative_at_zero(j)) ** params.p
    return val


def fock_norm(f: EntireFn, params: FockParams, w: Weight | None, spec: QuadSpec) -> float:
    return fock_integral(f, params, w, spec) ** (1.0 / params.p)


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------


def growth_gamma(alpha: float, beta: float | None = None) -> float:
    """``alpha^2 / (2 alpha - beta)``; beta defaults to ``alpha + 0.1``."""
    if beta is None:
        beta = alpha + 0.1
    if not 0 < beta < 2 * alpha:
        raise UsageError("need 0 < beta < 2 alpha")
    return alpha * alpha / (2 * alpha - beta)


def _proj_center(g, alpha, z):
    if isinstance(g, EntireFn):
        ex = g.exponents
        bbar = ex[0].conjugate() if len(ex) == 1 else 0j
        return (bbar + alpha * z) / (2 * alpha)
    return alpha * z / (2 * alpha - g.beta)


def _check_growth(g, alpha):
    if isinstance(g, EntireFn):
        return
    if not g.beta < 2 * alpha:
        raise UsageError("projection needs growth exponent beta < 2 alpha")


def project_many(g, alpha: float, zs, positive_mode: bool, spec: QuadSpec) -> np.ndarray:
    """``P_alpha(g)`` (or the positive majorant applied to ``|g|``) at each point."""
    if not alpha > 0:
        raise UsageError("alpha must be positive")
    _check_growth(g, alpha)
    zs = np.asarray([as_complex(z) for z in np.atleast_1d(zs)], dtype=complex)
    centers = np.array([_proj_center(g, alpha, z) for z in zs])
    if isinstance(g, EntireFn):
        ex = g.exponents
        sing = g.known_zeros() if positive_mode else ()
        poly = g.degree
        expg = 0.0 if len(ex) <= 1 else max(abs(b) for b in ex)
    else:
        sing, poly, expg = tuple(g.singular_points), g.poly_degree, 0.0

    def h(u, gid):
        # integrand divided by exp(-alpha |u - c|^2)
        z = zs[gid]
        c = centers[gid]
        if positive_mode:
            expo = alpha * (np.conj(u) * z).real - alpha * np.abs(u) ** 2 + alpha * np.abs(u - c) ** 2
            if isinstance(g, EntireFn):
                return np.abs(g.scaled(u, 0.0)) * np.exp(expo)
            return np.abs(g(u)) * np.exp(expo)
        expo = alpha * np.conj(u) * z - alpha * np.abs(u) ** 2 + alpha * np.abs(u - c) ** 2
        if isinstance(g, EntireFn):
            return g.scaled(u, 0.0) * np.exp(expo)
        return g(u) * np.exp(expo)

    decay = alpha if isinstance(g, EntireFn) else alpha - g.beta / 2

    def fallback(i):
        return IntegrandMeta(decay, poly, sing, centers[i], expg)

    if isinstance(g, EntireFn):
        res = _gauss_complex(h, centers, alpha, spec, fallback, sing, not positive_mode)
    else:
        res = _plane_direct(h, centers, alpha, fallback, spec, not positive_mode, len(zs))
    if not np.all(res.converged):
        _fail(res, "projection", int(np.flatnonzero(~res.converged)[0]))
    vals = (alpha / math.pi) * res.values
    return vals.real if positive_mode else vals


def _gauss_complex(h, centers, rate, spec, fallback, sing, complex_values):
    if not complex_values:
        return integrate_gaussian_many(h, centers, rate, spec, fallback, sing)
    re = integrate_gaussian_many(lambda u, g: h(u, g).real, centers, rate, spec, fallback, sing)
    im = integrate_gaussian_many(lambda u, g: h(u, g).imag, centers, rate, spec, fallback, sing)
    re.values = re.values + 1j * im.values
    re.errors = re.errors + im.errors
    re.converged = re.converged & im.converged
    re.levels = np.maximum(re.levels, im.levels)
    return re


def _plane_direct(h, centers, rate, fallback, spec, complex_values, n):
    def F(u, gid):
        return np.exp(-rate * np.abs(u - centers[gid]) ** 2) * h(u, gid)

    return integrate_plane_many(F, [fallback(i) for i in range(n)], spec, complex_values)


def project(g, alpha: float, z, positive_mode: bool, spec: QuadSpec):
    v = project_many(g, alpha, [as_complex(z)], positive_mode, spec)[0]
    return float(v) if positive_mode else complex(v)


def project_derivative(g: EntireFn, alpha: float, k: int, zs, spec: QuadSpec) -> np.ndarray:
    """``alpha^k P_alpha(conj(u)^k g(u))`` at each point."""
    if int(k) != k or k < 0:
        raise UsageError("k must be a nonnegative integer")
    zs = np.asarray([as_complex(z) for z in np.atleast_1d(zs)], dtype=complex)
    if k == 0:
        return project_many(g, alpha, zs, False, spec)
    env_b = g.exponents[0].conjugate() if len(g.exponents) == 1 else 0j
    centers = (env_b + alpha * zs) / (2 * alpha)
    expg = 0.0 if len(g.exponents) <= 1 else max(abs(b) for b in g.exponents)

    def h(u, gid):
        z = zs[gid]
        c = centers[gid]
        expo = alpha * np.conj(u) * z - alpha * np.abs(u) ** 2 + alpha * np.abs(u - c) ** 2
        return np.conj(u) ** k * g.scaled(u, 0.0) * np.exp(expo)

    res = _gauss_complex(
        h, centers, alpha, spec, lambda i: IntegrandMeta(alpha, g.degree + k, (), centers[i], expg), (), True
    )
    if not np.all(res.converged):
        _fail(res, "derivative projection", int(np.flatnonzero(~res.converged)[0]))
    return alpha**k * (alpha / math.pi) * res.values


def growth_bound(g: EntireFn, alpha: float, z, spec: QuadSpec, beta: float | None = None):
    """``(P+_alpha(|g|)(z), (alpha/pi) exp(gamma |z|^2 / 2) ||g||_{F^1_beta})``.

    The right side carries the ``alpha/pi`` factor of the projection so that
    the inequality holds with constant one.
    """
    if beta is None:
        beta = alpha + 0.1
    gam = growth_gamma(alpha, beta)
    z = as_complex(z)
    lhs = project(g, alpha, z, True, spec)
    norm1 = float(fock_integrals([g], 1.0, beta, None, spec)[0])
    rhs = (alpha / math.pi) * math.exp(gam * abs(z) ** 2 / 2) * norm1
    return lhs, rhs


# ---------------------------------------------------------------------------
# Littlewood-Paley, kernels, remainder, pointwise bounds
# ---------------------------------------------------------------------------


def lp_test_family(alpha: float, seed: int = 0, n_random: int = 3) -> list:
    """Monomials z^m (m <= 8), kernels K_a for a in {0.5, 1, 2, 1+i}, random quintics."""
    fam = [(f"z^{m}", EntireFn.monomial(m)) for m in range(9)]
    for a in (0.5, 1.0, 2.0, 1 + 1j):
        fam.append((f"K[{a}]", EntireFn.kernel(alpha, a)))
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        fam.append((f"rand5[{i}]", EntireFn.poly(c)))
    return fam


def lp_ratios(fs, params: FockParams, w: Weight, spec: QuadSpec) -> list:
    """Batched ``lp_ratio`` over a list of ``(name, f)``."""
    if params.k < 1:
        raise UsageError("Littlewood-Paley ratios need order k >= 1")
    p, alpha, k = params.p, params.alpha, params.k
    names = [n for n, _ in fs]
    funcs = [f for _, f in fs]
    for f in funcs:
        if f.is_zero:
            raise UsageError("f must be nonzero")
    lhs = fock_integrals(funcs, p, alpha, w, spec)
    dw = derive_weight(w, "distort", k * p)
    ders = [f.derivative(k) for f in funcs]
    nz = [i for i, d in enumerate(ders) if not d.is_zero]
    rhs_int = np.zeros(len(funcs))
    if nz:
        rhs_int[nz] = fock_integrals([ders[i] for i in nz], p, alpha, dw, spec)
    out = []
    for i, f in enumerate(funcs):
        head = sum(abs(f.derivative_at_zero(j)) ** p for j in range(k))
        rhs = head + rhs_int[i]
        out.append(RatioReport(names[i], float(lhs[i]), float(rhs), float(lhs[i] / rhs)))
    return out


def lp_ratio(f: EntireFn, params: FockParams, w: Weight, spec: QuadSpec) -> RatioReport:
    return lp_ratios([("f", f)], params, w, spec)[0]


def kernel_norm_checks(points, params: FockParams, w: Weight, spec: QuadSpec) -> list:
    p, alpha = params.p, params.alpha
    pts = [as_complex(a) for a in points]
    # int |K_a|^p e^{-p alpha|z|^2/2} w = e^{p alpha |a|^2/2} int e^{-p alpha |z-a|^2/2} w
    metas = [_integrand_meta(a, p * alpha / 2, 0.0, 0.0, w) for a in pts]
    arr = np.array(pts)
    wev = w.eval
    res = integrate_plane_many(lambda z, g: np.exp(-0.5 * p * alpha * np.abs(z - arr[g]) ** 2) * wev(z), metas, spec)
    if not np.all(res.converged):
        _fail(res, "kernel norm", int(np.flatnonzero(~res.converged)[0]))
    disc = weight_measures(w, [Region.disc(a, 1.0) for a in pts], spec)
    out = []
    for i, a in enumerate(pts):
        scale = math.exp(p * alpha * abs(a) ** 2 / 2)
        lhs, rhs = res.values[i] * scale, disc[i] * scale
        out.append(RatioReport(f"K[{a}]", float(lhs), float(rhs), float(res.values[i] / disc[i]), int(res.levels[i])))
    return out


def kernel_norm_check(a, params: FockParams, w: Weight, spec: QuadSpec) -> RatioReport:
    """``(||K_a||^p, e^{p alpha |a|^2/2} w(D(a,1)), ratio)``."""
    return kernel_norm_checks([a], params, w, spec)[0]


def remainder_many(f: EntireFn, k: int, alpha: float, zs, spec: QuadSpec):
    """Remainder of the order-``2k`` representation formula at each point.

    Returns ``(lhs, rhs)`` arrays with ``lhs = f - T_{2k-1} f`` evaluated
    exactly and ``rhs`` the quadrature value of the remainder integral.
    """
    if int(k) != k or k < 1:
        raise UsageError("k must be a positive integer")
    zs = np.asarray([as_complex(z) for z in np.atleast_1d(zs)], dtype=complex)
    g = f - f.taylor(2 * k - 1)
    lhs = g(zs)
    if g.is_zero:
        return lhs, np.zeros(len(zs), dtype=complex)
    gk = g.derivative(k)
    ex = gk.exponents
    bbar = ex[0].conjugate() if len(ex) == 1 else 0j
    centers = (bbar + alpha * zs) / (2 * alpha)
    expg = 0.0 if len(ex) <= 1 else max(abs(b) for b in ex)

    hk = gk.over_power(k)

    def F(u, gid):
        z = zs[gid]
        r2 = u.real**2 + u.imag**2
        # bounded rewrite: g_k(u) / conj(u)^k = (g_k(u) / u^k) (u / |u|)^{2k}
        with np.errstate(all="ignore"):
            phase = np.where(r2 > 0, u / np.abs(u), 1.0) ** (2 * k)
        return hk(u) * phase * np.exp(alpha * z * np.conj(u) - alpha * r2)

    metas = [IntegrandMeta(alpha, gk.degree, (0j,), c, expg) for c in centers]
    res = integrate_plane_many(F, metas, spec, complex_values=True)
    if not np.all(res.converged):
        _fail(res, "remainder integral", int(np.flatnonzero(~res.converged)[0]))
    rhs = alpha ** (1 - k) / math.pi * res.values
    return lhs, rhs


def remainder_check(f: EntireFn, k: int, alpha: float, z, spec: QuadSpec):
    lhs, rhs = remainder_many(f, k, alpha, [as_complex(z)], spec)
    return complex(lhs[0]), complex(rhs[0]), float(abs(lhs[0] - rhs[0]))


def pointwise_bound_check(f: EntireFn, p: float, alpha: float, w: Weight, t: float, z, spec: QuadSpec):
    """Both sides of the local sub-mean-value bound with constant one.

    ``lhs = |f(z)|^p e^{-p alpha |z|^2/2}``; ``rhs`` is the ``w``-average of
    the same quantity over ``D(z, t)``; ``margin = rhs / lhs`` (inf at zeros).
    """
    if not (p > 0 and t > 0 and alpha >= 0):
        raise UsageError("need p > 0, t > 0, alpha >= 0")
    z = as_complex(z)
    lhs = float(f.weighted_abs_pow(np.array([z]), alpha, p)[0])
    D = Region.disc(z, t)
    wev = w.eval
    sing = tuple(w.meta.singular_points) + _kinks(f, p)
    res = integrate_regions(lambda u, g: f.weighted_abs_pow(u, alpha, p) * wev(u), [D], spec, sing)
    if not res.converged[0]:
        _fail(res, "pointwise bound integral")
    mass = float(weight_measures(w, [D], spec)[0])
    rhs = float(res.values[0]) / mass
    margin = math.inf if lhs == 0 else rhs / lhs
    return lhs, rhs, margin


def constant_weight() -> Weight:
    return make_weight("constant")
