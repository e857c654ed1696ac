import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from focklab import QuadSpec, UsageError
from focklab.carleson_mult import (
    PositiveMeasure,
    carleson_condition,
    carleson_condition_many,
    carleson_diagnose,
    condition_H_norm,
    condition_sup,
    kernel_embedding_ratios,
    measure_norm,
    mu_g,
    mult_classify,
    multiplier_condition,
    multiplier_condition_many,
    multiplier_empirical_norm,
    multiplier_reduce,
    parse_measure,
    zero_multiplier_falsifier,
)
from focklab.fockcore import EntireFn
from focklab.weights import make_weight, parse_weight


def bounded_measure(q, alpha, w=None):
    return PositiveMeasure.with_density(w or make_weight("constant"), -q * alpha / 2)


def unbounded_measure(q, alpha):
    return PositiveMeasure.with_density(make_weight("power", {"gamma": 3}), -q * alpha / 2)


# -- measures ------------------------------------------------------------------


def test_measure_norm_examples(spec):
    K = EntireFn.kernel(1.0, 2 - 1j)
    for q in (0.5, 1, 3):
        assert measure_norm(K, PositiveMeasure.atom(0, 1), q, spec) == pytest.approx(1)
    mu = PositiveMeasure(((0, 1.0), (1, 1.0)))
    assert measure_norm(EntireFn.monomial(1), mu, 2, spec) == pytest.approx(1)
    dens = PositiveMeasure.with_density(make_weight("constant"), -1.0)
    assert measure_norm(EntireFn.constant(1), dens, 1, spec) == pytest.approx(math.pi, rel=1e-10)


def test_measure_validation(one):
    with pytest.raises(UsageError):
        PositiveMeasure(((0, -1.0),))
    with pytest.raises(UsageError):
        PositiveMeasure.with_density(one, 0.0)
    with pytest.raises(UsageError):
        parse_measure("cloud:1")
    with pytest.raises(UsageError):
        parse_measure("atoms:(1+i)")


def test_parse_measure_forms(spec):
    mu = parse_measure("atoms:(0:1;1+i:2.5)")
    assert mu.atoms == ((0j, 1.0), (1 + 1j, 2.5))
    d = parse_measure("density:weight=power:gamma=2|distort:2,gauss=-1")
    assert measure_norm(EntireFn.constant(1), d, 1, spec) == pytest.approx(math.pi, rel=1e-10)
    g = parse_measure("mu_g:g=poly:2,q=2,beta=1,eta=constant")
    # |2|^2 e^{-|z|^2} -> 4 pi
    assert measure_norm(EntireFn.constant(1), g, 1, spec) == pytest.approx(4 * math.pi, rel=1e-10)
    k = parse_measure("mu_g:g=kernel:alpha=1,a=1,q=1,beta=2", alpha=1.0)
    assert k.density is not None


# -- condition functions ---------------------------------------------------------


def test_atom_G_and_H(spec, one):
    mu = PositiveMeasure.atom(0, 1)
    for a in (0, 0.5, 0.3 - 0.6j):
        assert carleson_condition(mu, 2, 2, 1, one, 0, a, spec) == pytest.approx(1 / math.pi)
    for a in (1.2, 3j):
        assert carleson_condition(mu, 2, 2, 1, one, 0, a, spec) == 0
    assert condition_sup(mu, 2, 2, 1, one, 0, 4, spec)[0] == pytest.approx(1 / math.pi)
    assert condition_H_norm(mu, 2, 1, 1, one, 0, 4, spec) == pytest.approx(math.pi**-0.5, rel=1e-10)


@pytest.mark.parametrize("p,q,alpha", [(2, 2, 1.0), (1, 1, 2.0), (1.5, 1.5, 0.5)])
def test_density_G_is_one(p, q, alpha, spec, one):
    mu = bounded_measure(q, alpha)
    vals = carleson_condition_many(mu, p, q, alpha, one, 0, [0, 1 + 1j, -3, 4.5j], spec)
    np.testing.assert_allclose(vals, 1.0, rtol=1e-10)


def test_diagnose_bounded_and_unbounded(spec, one):
    b = carleson_diagnose(bounded_measure(2, 1.0), 2, 2, 1.0, one, 0, spec)
    assert b.verdict == "bounded" and b.condition_value == pytest.approx(1.0)
    assert 1 / 50 < b.empirical_norm / b.condition_value < 50
    u = carleson_diagnose(unbounded_measure(2, 1.0), 2, 2, 1.0, one, 0, spec)
    assert u.verdict == "unbounded-evidence"
    c, e = u.evidence["condition"], u.evidence["empirical"]
    assert c[1] >= 8 * c[0] and e[1] >= 8 * e[0]


def test_c_mu_n(spec, one):
    rep = carleson_diagnose(PositiveMeasure.atom(0, 1), 1, 1, 1.0, one, -1, spec, radii=(2.0, 3.0))
    assert rep.C_mu_n == pytest.approx(1.0)
    assert carleson_diagnose(PositiveMeasure.atom(0, 1), 1, 1, 1.0, one, 0, spec, radii=(2.0, 3.0)).C_mu_n == 0
    assert len(rep.evidence["moments"]) == 17


atoms = st.lists(
    st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 5)), min_size=1, max_size=4
).map(lambda xs: PositiveMeasure(tuple((complex(x, y), m) for x, y, m in xs)))


@given(atoms, atoms, st.tuples(st.floats(-2.5, 2.5), st.floats(-2.5, 2.5)))
def test_G_additive_in_atoms(m1, m2, xy):
    spec = QuadSpec()
    one = make_weight("constant")
    a = complex(*xy)
    s = carleson_condition(m1 + m2, 2, 3, 1.0, one, 0, a, spec)
    t = carleson_condition(m1, 2, 3, 1.0, one, 0, a, spec) + carleson_condition(m2, 2, 3, 1.0, one, 0, a, spec)
    assert s == pytest.approx(t, rel=1e-12, abs=1e-300)


@given(atoms, st.floats(0.1, 20), st.sampled_from([(2, 2), (2, 1), (3, 1.5)]))
def test_scaling(mu, c, pq):
    spec = QuadSpec()
    one = make_weight("constant")
    p, q = pq
    pts = [0, 1 - 1j, 2]
    g0 = carleson_condition_many(mu, p, q, 1.0, one, 0, pts, spec)
    g1 = carleson_condition_many(mu.scaled(c), p, q, 1.0, one, 0, pts, spec)
    np.testing.assert_allclose(g1, c * g0, rtol=1e-12)
    e0 = kernel_embedding_ratios(mu, p, q, 1.0, one, 0, pts, spec)
    e1 = kernel_embedding_ratios(mu.scaled(c), p, q, 1.0, one, 0, pts, spec)
    np.testing.assert_allclose(e1, c * e0, rtol=1e-10)


def test_scaling_density_H(spec, one):
    mu = PositiveMeasure.with_density(make_weight("power", {"gamma": -6}), -1.0)
    h0 = condition_H_norm(mu, 2, 1, 1.0, one, 0, 3, spec)
    h1 = condition_H_norm(mu.scaled(3.0), 2, 1, 1.0, one, 0, 3, spec)
    assert h1 == pytest.approx(3 * h0, rel=1e-9)


@pytest.mark.parametrize("n", [-1, 0, 1])
def test_kernel_test_consistency(n, spec, one):
    from focklab.weights import derive_weight

    p = q = 2
    wn = derive_weight(one, "distort", n * p) if n else one
    b = carleson_diagnose(bounded_measure(q, 1.0, wn), p, q, 1.0, one, n, spec)
    assert 1 / 50 < b.empirical_norm / b.condition_value < 50 and b.verdict == "bounded"


# -- multipliers -----------------------------------------------------------------


def test_constant_multiplier(spec):
    w = make_weight("power", {"gamma": 2})
    g = EntireFn.constant(2 - 1j)
    for q in (1, 2):
        for u in (0, 1 + 1j, -3):
            assert multiplier_condition(g, q, q, 1, 1, w, w, u, spec) == pytest.approx(abs(2 - 1j) ** q, rel=1e-9)
        assert multiplier_reduce(g, q, q, 1, 1, w, w, 3, spec) == pytest.approx(abs(2 - 1j) ** q, rel=1e-9)
    val, _, _ = multiplier_empirical_norm(g, 2, 2, 1.0, 1.0, w, spec, radius=3)
    assert abs(val - abs(2 - 1j)) <= 2 * spec.rel_tol * abs(2 - 1j)


def test_identity_multiplier_grows(spec, one):
    z = EntireFn.monomial(1)
    for q in (1, 2):
        a, b = (multiplier_reduce(z, q, q, 1, 1, one, one, R, spec) for R in (2, 6))
        assert b >= 2**q * a


def test_bounded_witness_stable(spec, one):
    g = EntireFn.exponential(0.6 - 0.3j)  # (beta - alpha) conj(c) z with beta - alpha = 1
    a, b = (multiplier_reduce(g, 2, 2, 1, 2, one, one, R, spec) for R in (2, 6))
    assert b == pytest.approx(a, rel=0.1)


@given(st.sampled_from([EntireFn.constant(1), EntireFn.monomial(2), EntireFn.kernel(1, 0.5)]), st.floats(1.2, 4))
def test_multiplier_G_matches_carleson_H_of_mu_g(g, p):
    # the multiplier condition is the H function of |g|^q e^{-q beta |z|^2/2} eta dA
    spec = QuadSpec()
    w = make_weight("power", {"gamma": 1})
    eta = make_weight("exp_re", {"gamma": 0.5})
    q, alpha, beta = 1.0, 1.0, 1.5
    pts = [0, 1 + 1j, -2]
    lhs = multiplier_condition_many(g, p, q, alpha, beta, w, eta, pts, spec)
    rhs = carleson_condition_many(mu_g(g, q, beta, eta), p, q, alpha, w, 0, pts, spec)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-8)


def test_falsifier(spec, one):
    r = zero_multiplier_falsifier(1.0, 2, 2, one, spec)
    assert r[-1] / r[0] >= 10
    assert all(b > a for a, b in zip(r, r[1:]))


TABLE = [
    ((2, 2, 1, 0.5), "zero_only"),
    ((1, 3, 2, 1), "zero_only"),
    ((2, 2, 1, 1), "constants_only"),
    ((2, 2, 1, 2), "F_infty(beta-alpha)"),
    ((2, 3, 1, 1), "growth_condition"),
    ((2, 3, 1, 2), "growth_condition"),
    ((3, 2, 1, 2), "integrability_condition"),
    ((3, 2, 1, 1), "integrability_condition"),
]


@pytest.mark.parametrize("args,verdict", TABLE)
def test_classify_table(args, verdict):
    c = mult_classify(*args)
    assert c.verdict == verdict
    p, q = args[0], args[1]
    if verdict == "growth_condition":
        assert c.exponent == pytest.approx((q - p) / (p * q))
    if verdict == "integrability_condition":
        assert c.exponent == pytest.approx(p * q / (p - q))


def test_classify_evaluators(spec, one):
    assert mult_classify(2, 2, 1, 0.5).evaluator(EntireFn()) == 1.0
    assert mult_classify(2, 2, 1, 1).evaluator(EntireFn.constant(3)) == 1.0
    assert mult_classify(2, 2, 1, 1).evaluator(EntireFn.monomial(1)) == 0.0
    ev = mult_classify(2, 2, 1, 2).evaluator
    assert ev(EntireFn.exponential(0.5), one, spec) < 2
    g = mult_classify(2, 3, 1, 2).evaluator(EntireFn.constant(1), one, spec)
    assert 0 < g < 1
    f = mult_classify(3, 2, 1, 2).evaluator(EntireFn.constant(1), one, spec)
    assert f == pytest.approx((2 * math.pi / (6 * 1)) ** (1 / 6), rel=1e-8)
    assert mult_classify(3, 2, 1, 1).evaluator(EntireFn.constant(1), one, spec) == math.inf


def test_classify_rejects_nonpositive():
    with pytest.raises(UsageError):
        mult_classify(0, 1, 1, 1)
