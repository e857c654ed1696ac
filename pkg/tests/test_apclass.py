import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from focklab import QuadSpec, Region, UsageError
from focklab.apclass import (
    ap_constant,
    ap_quotient,
    berezin,
    berezin_many,
    berezin_sup_condition,
    disc_doubling,
    kt_check,
    lattice_comparability,
    local_integrability_probe,
    muckenhoupt_disc_quotient,
)
from focklab.weights import derive_weight, make_weight, parse_weight

EXP_RE_ORACLE = (2 * math.sinh(0.5)) ** 2

FINITE = ["constant", "power:gamma=2", "power:gamma=-1", "exp_re:gamma=1", "exp_abs:gamma=1", "muck:p=2"]


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("r", [0.5, 1, 2])
def test_constant_weight_is_one(p, r, spec, one):
    rep = ap_constant(one, p, r, 2 * r, spec)
    assert rep.constant_estimate == pytest.approx(1.0, abs=1e-6)
    assert not rep.infinite


def test_exp_re_closed_form(spec):
    w = make_weight("exp_re", {"gamma": 1})
    rep = ap_constant(w, 2, 1, 3, spec)
    assert rep.constant_estimate == pytest.approx(EXP_RE_ORACLE, rel=1e-8)
    # constant in the square center
    for c in (0, 2 + 1j, -1.5j):
        assert ap_quotient(w, 2, Region.square(c, 1), spec) == pytest.approx(EXP_RE_ORACLE, rel=1e-8)


def test_trace_nondecreasing(spec):
    rep = ap_constant(make_weight("power", {"gamma": 2}), 2, 1, 4, spec)
    vals = [v for _, v in rep.refinement_trace]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert rep.argmax_square.side == 1


def test_non_integrable_dual_flags_infinity(spec):
    sq = make_weight("power_pure", {"delta": 2})  # |z|^2, dual |z|^{-2} not locally integrable
    for p in (2, 1):
        rep = ap_constant(sq, p, 1, 2, spec)
        assert rep.infinite and rep.constant_estimate == math.inf and rep.note


def test_local_integrability_probe():
    good = local_integrability_probe(lambda z: np.abs(z) ** -1.0, 0j)
    bad = local_integrability_probe(lambda z: np.abs(z) ** -2.0, 0j)
    assert not good["diverges"] and bad["diverges"]


def test_usage_errors(spec, one):
    with pytest.raises(UsageError):
        ap_constant(one, 0.5, 1, 2, spec)
    with pytest.raises(UsageError):
        ap_constant(one, 2, 1, 0.5, spec)
    with pytest.raises(UsageError):
        berezin(make_weight("gauss", {"gamma": 1.0}), 1.0, 0, spec)
    with pytest.raises(UsageError):
        lattice_comparability(one, 1, 0.5, 0, spec)


@pytest.mark.parametrize("text", FINITE)
def test_estimate_at_least_one(text, spec):
    for p in (1, 2):
        assert ap_constant(parse_weight(text), p, 1, 2, spec).constant_estimate >= 1 - 1e-9


@given(ax=st.floats(-3, 3), ay=st.floats(-3, 3), which=st.sampled_from(FINITE[1:]))
def test_translation_invariance(ax, ay, which):
    spec = QuadSpec()
    w = parse_weight(which)
    a = complex(ax, ay)
    c1 = ap_constant(w, 2, 1, 2, spec, search_center=a).constant_estimate
    c2 = ap_constant(derive_weight(w, "translate", a), 2, 1, 2, spec).constant_estimate
    assert abs(c1 - c2) <= 2 * spec.rel_tol * c1 + 1e-12


@pytest.mark.parametrize("text", FINITE)
def test_monotone_in_p(text, spec):
    w = parse_weight(text)
    vals = [ap_constant(w, p, 1, 2, spec).constant_estimate for p in (1, 1.5, 2, 3, 5)]
    for a, b in zip(vals, vals[1:]):
        assert b <= a + 1e-6


@given(p=st.floats(1.2, 5.0), cx=st.floats(-3, 3), cy=st.floats(-3, 3), which=st.sampled_from(FINITE[1:]))
def test_duality_on_a_square(p, cx, cy, which):
    spec = QuadSpec()
    w = parse_weight(which)
    pc = p / (p - 1)
    Q = Region.square(complex(cx, cy), 1.0)
    lhs = ap_quotient(derive_weight(w, "dual", p), pc, Q, spec)
    rhs = ap_quotient(w, p, Q, spec) ** (pc / p)
    assert lhs == pytest.approx(rhs, rel=1e-7)


@pytest.mark.parametrize("text", FINITE + ["power_pure:delta=2", "power_pure:delta=0.3"])
def test_duality_finiteness(text, spec):
    w = parse_weight(text)
    p = 2.5
    a = ap_constant(w, p, 1, 2, spec).infinite
    b = ap_constant(derive_weight(w, "dual", p), p / (p - 1), 1, 2, spec).infinite
    assert a == b


def test_berezin_examples(spec, one):
    z = np.array([0, 1 + 1j, -2.5, 3j])
    np.testing.assert_allclose(berezin_many(one, 1.0, z, spec), 1.0, rtol=1e-12)
    sq = make_weight("power_pure", {"delta": 2})
    for alpha in (1.0, 2.0):
        np.testing.assert_allclose(berezin_many(sq, alpha, z, spec), np.abs(z) ** 2 + 1 / alpha, rtol=1e-10)
    er = make_weight("exp_re", {"gamma": 1})
    np.testing.assert_allclose(berezin_many(er, 1.0, z, spec), np.exp(z.real + 0.25), rtol=1e-10)


@given(c=st.floats(0.01, 100.0), x=st.floats(-4, 4), which=st.sampled_from(FINITE))
def test_berezin_linearity(c, x, which):
    spec = QuadSpec()
    w = parse_weight(which)
    assert berezin(w.scaled(c), 1.0, x, spec) == pytest.approx(c * berezin(w, 1.0, x, spec), rel=1e-9)


def test_berezin_sup_examples(spec, one):
    assert berezin_sup_condition(one, 2, 1.0, 0.7, 3, spec).value == pytest.approx(1.0, abs=1e-9)
    sq = make_weight("power_pure", {"delta": 2})
    rep = berezin_sup_condition(sq, 1, 1.0, 1.0, 2, spec)
    assert rep.value > 1e6


def test_kt_constant(spec, one):
    rep = kt_check(one, 1, [Region.square(0, 1), Region.square(2 + 1j, 1)], spec)
    assert rep.feasible and rep.delta == pytest.approx(0.95) and rep.C_r == pytest.approx(1.0, abs=1e-9)
    assert all(ok for _, _, ok in rep.table)


def test_kt_power_pure_delta_half(spec):
    rep = kt_check(make_weight("power_pure", {"delta": 2}), 1, [Region.square(0, 1)], spec)
    assert rep.feasible and rep.delta <= 0.5 + 0.05


def test_kt_gauss_degrades_with_distance(spec):
    w = make_weight("gauss", {"gamma": 1.0})
    ds = [kt_check(w, 1, [Region.square(x, 1)], spec).delta for x in (5.0, 10.0, 20.0)]
    assert ds[0] > ds[1] > ds[2]


@pytest.mark.parametrize("text", FINITE)
@pytest.mark.parametrize("p", [2, 4])
def test_kt_feasible_at_one_over_p(text, p, spec):
    w = parse_weight(text)
    assert math.isfinite(ap_constant(w, p, 1, 2, spec).constant_estimate)
    rep = kt_check(w, 1, [Region.square(0, 1), Region.square(1.5 - 2j, 1)], spec)
    row = [ok for d, _, ok in rep.table if abs(d - 1 / p) < 1e-12]
    assert row == [True]


def test_kt_is_seeded(spec):
    w = make_weight("power", {"gamma": 3})
    a = kt_check(w, 1, [Region.square(1, 1)], spec, seed=3)
    b = kt_check(w, 1, [Region.square(1, 1)], spec, seed=3)
    assert a.table == b.table


def test_lattice_examples(spec, one):
    assert lattice_comparability(one, 1, 0, 3 + 1j, spec) == pytest.approx((1.0, 1.0))
    er = make_weight("exp_re", {"gamma": 1})
    for k in (1, 2, 4):
        ratio, fit = lattice_comparability(er, 1, 0, k, spec)
        assert ratio == pytest.approx(math.exp(-k), rel=1e-9)
        assert fit == pytest.approx(math.exp(-1), rel=1e-9)
    assert disc_doubling(one, 1 - 1j, 1, 2, spec) == pytest.approx(4.0, rel=1e-12)


def test_disc_quotient_oracle(spec):
    w = make_weight("muck", {"p": 2})
    for r in (1.0, 4.0):
        exact = (1 + r * r / 2) * math.log(1 + r * r) / (r * r)
        assert muckenhoupt_disc_quotient(w, 2, r, spec) == pytest.approx(exact, rel=1e-8)
