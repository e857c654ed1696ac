"""Weight catalog, weight algebra and region measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import UsageError
from .minilang import fmt_complex, head_args, parse_complex, parse_kv, parse_real, split_top, strip_parens
from .quadcore import IntegrandMeta, QuadSpec, Region, as_complex, integrate_region, integrate_regions

__all__ = [
    "Weight",
    "ApParams",
    "make_weight",
    "weight_measure",
    "weight_measures",
    "derive_weight",
    "parse_weight",
    "FAMILIES",
    "ALIASES",
]

_LOG_EDGE = math.exp(-1.0)


@dataclass(frozen=True)
class Weight:
    """Nonnegative function on the plane with an envelope description.

    ``meta`` is an IntegrandMeta with zero decay whose signed fields describe
    ``log w(z) <= const + poly_growth_degree*log(1+|z|) + exp_growth*|z|
    + gaussian_growth*|z|^2``.  ``singular_points`` lists points where ``w``
    blows up, vanishes or has a kink.
    """

    eval: Callable
    meta: IntegrandMeta
    label: str

    def __call__(self, z):
        if hasattr(z, "re") and hasattr(z, "im"):
            z = as_complex(z)
        z = np.asarray(z, dtype=complex)
        return self.eval(z)

    def scaled(self, c: float) -> "Weight":
        if not c > 0:
            raise UsageError("weights can only be scaled by positive constants")
        f = self.eval
        return Weight(lambda z: c * f(z), self.meta, f"{c:g}*({self.label})")

    @property
    def is_constant(self) -> bool:
        return self.label.startswith("constant") and "|" not in self.label


@dataclass(frozen=True)
class ApParams:
    p: float
    p_conj: float = math.nan

    def __post_init__(self):
        if not self.p >= 1:
            raise UsageError("p must be >= 1")
        conj = math.inf if self.p == 1 else self.p / (self.p - 1)
        object.__setattr__(self, "p_conj", conj)

    @property
    def dual_exponent(self) -> float:
        """Exponent ``p'/p`` of the conjugate weight ``w^{-p'/p}``."""
        if self.p == 1:
            raise UsageError("the conjugate weight needs p > 1")
        return 1.0 / (self.p - 1.0)


def _meta(deg=0.0, sing=(), exp_growth=0.0, gauss=0.0):
    return IntegrandMeta(0.0, float(deg), tuple(sing), 0j, float(exp_growth), float(gauss))


def _c(v):
    return parse_complex(v) if isinstance(v, str) else complex(v)


def _r(v):
    return parse_real(v) if isinstance(v, str) else float(v)


def _constant(c=1.0):
    c = _r(c)
    if not c > 0:
        raise UsageError("constant weight needs c > 0")
    return Weight(lambda z: np.full(np.shape(z), c), _meta(), "constant" if c == 1 else f"constant:c={c:g}")


def _power(gamma):
    g = _r(gamma)
    return Weight(lambda z: (1.0 + np.abs(z)) ** g, _meta(g, (0j,)), f"power:gamma={g:g}")


def _shifted_power(gamma, z0=0j):
    g, z0 = _r(gamma), _c(z0)
    return Weight(
        lambda z: (1.0 + np.abs(z + z0)) ** g,
        _meta(g, (-z0,)),
        f"shifted_power:gamma={g:g},z0={fmt_complex(z0)}",
    )


def _exp_abs(gamma, z0=0j):
    g, z0 = _r(gamma), _c(z0)
    return Weight(
        lambda z: np.exp(g * np.abs(z + z0)),
        _meta(0.0, (-z0,), g),
        f"exp_abs:gamma={g:g},z0={fmt_complex(z0)}",
    )


def _muck(p):
    p = _r(p)
    if not p >= 1:
        raise UsageError("muck needs p >= 1")
    return Weight(lambda z: (1.0 + np.abs(z) ** 2) ** (p - 1.0), _meta(2 * (p - 1)), f"muck:p={p:g}")


def _power_pure(delta):
    d = _r(delta)
    if not d > 0:
        raise UsageError("power_pure needs delta > 0 for local integrability")
    e = 2.0 * (d - 1.0)
    return Weight(lambda z: np.abs(z) ** e, _meta(e, (0j,)), f"power_pure:delta={d:g}")


def _log_neg():
    def ev(z):
        r = np.minimum(np.abs(z), _LOG_EDGE)
        with np.errstate(divide="ignore"):
            L = -np.log(r)
            return 1.0 / (r * r * L * L)

    return Weight(ev, _meta(0.0, (0j,)), "log_neg")


def _log_pos():
    def ev(z):
        r = np.minimum(np.abs(z), _LOG_EDGE)
        with np.errstate(divide="ignore", invalid="ignore"):
            L = -np.log(r)
            out = r * r * L * L
        return np.where(r > 0, out, 0.0)

    return Weight(ev, _meta(0.0, (0j,)), "log_pos")


def _exp_re(gamma=1.0):
    g = _r(gamma)
    return Weight(lambda z: np.exp(g * z.real), _meta(0.0, (), abs(g)), f"exp_re:gamma={g:g}")


def _gauss(gamma=1.0):
    g = _r(gamma)
    return Weight(lambda z: np.exp(g * np.abs(z) ** 2), _meta(0.0, (), 0.0, g), f"gauss:gamma={g:g}")


def _product(factors):
    if isinstance(factors, str):
        factors = [parse_weight(s) for s in split_top(strip_parens(factors), ";")]
    factors = list(factors)
    if len(factors) < 1:
        raise UsageError("product needs at least one factor")
    evs = [w.eval for w in factors]

    def ev(z):
        out = evs[0](z)
        for e in evs[1:]:
            out = out * e(z)
        return out

    sing = []
    for w in factors:
        for s in w.meta.singular_points:
            if s not in sing:
                sing.append(s)
    meta = _meta(
        sum(w.meta.poly_growth_degree for w in factors),
        sing,
        sum(w.meta.exp_growth for w in factors),
        sum(w.meta.gaussian_growth for w in factors),
    )
    return Weight(ev, meta, "product:(" + ";".join(w.label for w in factors) + ")")


FAMILIES = {
    "constant": (_constant, {"c": _r}),
    "power": (_power, {"gamma": _r}),
    "shifted_power": (_shifted_power, {"gamma": _r, "z0": parse_complex}),
    "exponential_abs": (_exp_abs, {"gamma": _r, "z0": parse_complex}),
    "muckenhoupt_violating": (_muck, {"p": _r}),
    "power_pure": (_power_pure, {"delta": _r}),
    "log_negative": (_log_neg, {}),
    "log_positive": (_log_pos, {}),
    "product": (_product, {}),
    "exp_re": (_exp_re, {"gamma": _r}),
    "gauss": (_gauss, {"gamma": _r}),
}

ALIASES = {
    "exp_abs": "exponential_abs",
    "muck": "muckenhoupt_violating",
    "log_neg": "log_negative",
    "log_pos": "log_positive",
}

# parameter that has no default
_REQUIRED = {
    "power": ("gamma",),
    "shifted_power": ("gamma",),
    "exponential_abs": ("gamma",),
    "muckenhoupt_violating": ("p",),
    "power_pure": ("delta",),
    "product": ("factors",),
}


def make_weight(family: str, params: dict | None = None) -> Weight:
    """Build a catalog weight, e.g. ``make_weight("power", {"gamma": 2})``."""
    params = dict(params or {})
    fam = ALIASES.get(family, family)
    if fam not in FAMILIES:
        raise UsageError(f"unknown weight family {family!r}")
    builder, allowed = FAMILIES[fam]
    allowed = dict(allowed)
    if fam == "product":
        allowed = {"factors": lambda x: x}
    extra = set(params) - set(allowed)
    if extra:
        raise UsageError(f"unknown parameters {sorted(extra)} for weight family {fam}")
    missing = [k for k in _REQUIRED.get(fam, ()) if k not in params]
    if missing:
        raise UsageError(f"weight family {fam} needs parameters {missing}")
    try:
        return builder(**params)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"invalid parameters for {fam}: {exc}") from None


def weight_measure(w: Weight, region: Region, spec: QuadSpec) -> float:
    """``w(region)``, the integral of ``w`` over a square or disc."""
    return integrate_region(w.eval, region, spec, w.meta)


def weight_measures(w: Weight, regions, spec: QuadSpec) -> np.ndarray:
    """Batched ``weight_measure``; raises NumericalFailure on any failure."""
    from .errors import NumericalFailure

    regions = list(regions)
    if not regions:
        return np.zeros(0)
    ev = w.eval
    res = integrate_regions(lambda z, g: ev(z), regions, spec, w.meta.singular_points)
    if not np.all(res.converged):
        i = int(np.flatnonzero(~res.converged)[0])
        raise NumericalFailure(
            f"weight measure did not converge on {regions[i].describe()}",
            estimate=float(res.values[i]),
            error=float(res.errors[i]),
            trace=list(res.traces[:, i]),
        )
    return res.values


def derive_weight(w: Weight, mode, value=None) -> Weight:
    """Distortion, translation or conjugate dual of ``w``.

    ``mode`` is ``"distort"``, ``"translate"`` or ``"dual"``; a
    ``(mode, value)`` tuple is accepted as well.
    """
    if value is None and isinstance(mode, tuple):
        mode, value = mode
    m = w.meta
    ev = w.eval
    if mode == "distort":
        g = float(value)
        sing = m.singular_points if 0j in m.singular_points else m.singular_points + (0j,)
        meta = replace(m, singular_points=sing, poly_growth_degree=m.poly_growth_degree - g)
        return Weight(lambda z: ev(z) / (1.0 + np.abs(z)) ** g, meta, f"{w.label}|distort:{g:g}")
    if mode == "translate":
        a = as_complex(value)
        meta = replace(m, singular_points=tuple(s - a for s in m.singular_points))
        return Weight(lambda z: ev(np.asarray(z) + a), meta, f"{w.label}|translate:{fmt_complex(a)}")
    if mode == "dual":
        p = float(value)
        if not p > 1:
            raise UsageError("the dual weight needs p > 1")
        e = 1.0 / (p - 1.0)
        meta = replace(
            m,
            poly_growth_degree=-e * m.poly_growth_degree,
            exp_growth=-e * m.exp_growth,
            gaussian_growth=-e * m.gaussian_growth,
        )

        def dual(z):
            with np.errstate(divide="ignore"):
                return ev(z) ** (-e)

        return Weight(dual, meta, f"{w.label}|dual:{p:g}")
    raise UsageError(f"unknown derive mode {mode!r}")


def parse_weight(text: str) -> Weight:
    """Parse the weight mini-language, e.g. ``power:gamma=2|distort:1``."""
    parts = split_top(text.strip(), "|")
    if not parts[0]:
        raise UsageError("empty weight spec")
    name, args = head_args(parts[0])
    fam = ALIASES.get(name, name)
    if fam == "product":
        w = _product(args)
    else:
        if fam not in FAMILIES:
            raise UsageError(f"unknown weight family {name!r}")
        w = make_weight(fam, parse_kv(args, FAMILIES[fam][1]))
    for suf in parts[1:]:
        mode, arg = head_args(suf)
        if mode == "translate":
            w = derive_weight(w, mode, parse_complex(arg))
        elif mode in ("distort", "dual"):
            w = derive_weight(w, mode, parse_real(arg, mode))
        else:
            raise UsageError(f"unknown weight transform {mode!r}")
    return w
