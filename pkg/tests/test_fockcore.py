import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import integrate

from focklab import QuadSpec, UsageError
from focklab.fockcore import (
    EntireFn,
    FockParams,
    SampledFn,
    diff_antidiff,
    fock_norm,
    growth_bound,
    growth_gamma,
    kernel_norm_check,
    lp_ratio,
    lp_test_family,
    parse_function,
    pointwise_bound_check,
    project,
    project_derivative,
    project_many,
    remainder_check,
)
from focklab.weights import make_weight, parse_weight

small_int = st.integers(-4, 4)
gauss_int = st.tuples(small_int, small_int).map(lambda t: complex(*t))


@st.composite
def entire_fns(draw, max_terms=2, max_deg=3):
    f = EntireFn()
    for _ in range(draw(st.integers(1, max_terms))):
        b = draw(st.sampled_from([0, 1, -1, 1j, 0.5 - 0.5j, 2]))
        coeffs = draw(st.lists(gauss_int, min_size=1, max_size=max_deg + 1))
        f = f + EntireFn({b: tuple(coeffs)})
    return f


# -- exact calculus ------------------------------------------------------------


def test_diff_antidiff_examples():
    z2 = EntireFn.monomial(2)
    assert diff_antidiff(z2, 1) == EntireFn.poly([0, 2])
    assert diff_antidiff(EntireFn.constant(2), -2) == z2
    K = EntireFn.kernel(2.0, 1 + 1j)
    assert diff_antidiff(K, 1) == K * complex(2 * (1 - 1j))


@given(entire_fns(), st.integers(1, 3))
def test_roundtrip_is_exact(f, n):
    assert diff_antidiff(diff_antidiff(f, -n), n) == f
    g = diff_antidiff(f, -n)
    assert all(g.derivative_at_zero(j) == 0 for j in range(n))


@given(entire_fns(), st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_taylor_matches_evaluation(f, xy):
    z = complex(*xy) * 0.3
    assert complex(f.taylor(40)(np.array([z]))[0]) == pytest.approx(complex(f(np.array([z]))[0]), rel=1e-9, abs=1e-9)


def test_parse_function():
    assert parse_function("poly:1,0,2") == EntireFn.poly([1, 0, 2])
    assert parse_function("monomial:3") == EntireFn.monomial(3)
    assert parse_function("kernel:alpha=2,a=1-i") == EntireFn.kernel(2, 1 - 1j)
    assert parse_function("kernel:a=1", alpha=1.5) == EntireFn.kernel(1.5, 1)
    assert parse_function("sum:(monomial:1;poly:1)") == EntireFn.poly([1, 1])
    for bad in ("kernel:a=1", "mystery:1", "monomial:x", "poly:"):
        with pytest.raises(UsageError):
            parse_function(bad)


# -- norms ---------------------------------------------------------------------


def test_fock_norm_examples(spec, one):
    assert fock_norm(EntireFn.constant(1), FockParams(2, 2), one, spec) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)
    for p, a in ((1, 1), (2, 0.5), (3.5, 2)):
        assert fock_norm(EntireFn.constant(1), FockParams(p, a, normalized=True), one, spec) == pytest.approx(1, rel=1e-10)
    for p, alpha, a in ((1, 1, 1 + 1j), (2, 2, -0.5), (3, 0.5, 2j)):
        K = EntireFn.kernel(alpha, a)
        exact = (math.exp(p * alpha * abs(a) ** 2 / 2) * 2 * math.pi / (p * alpha)) ** (1 / p)
        assert fock_norm(K, FockParams(p, alpha), one, spec) == pytest.approx(exact, rel=1e-9)


def test_sobolev_mode_adds_head_terms(spec, one):
    f = EntireFn.poly([3, 2])
    v = fock_norm(f, FockParams(2, 1, k=1), one, spec) ** 2
    assert v == pytest.approx(9 + 4 * math.pi, rel=1e-10)


@given(entire_fns(), st.floats(0.1, 10), st.sampled_from([1.0, 2.0, 3.0]))
def test_homogeneity(f, c, p):
    spec = QuadSpec()
    w = make_weight("power", {"gamma": 1})
    a = fock_norm(f * c, FockParams(p, 1.5), w, spec)
    b = fock_norm(f, FockParams(p, 1.5), w, spec)
    assert a == pytest.approx(c * b, rel=1e-8)


CATALOG = ["constant", "power:gamma=2", "power:gamma=-3", "exp_abs:gamma=1", "muck:p=2", "power_pure:delta=0.5", "log_neg", "log_pos", "exp_re:gamma=1"]


@pytest.mark.parametrize("text", CATALOG)
def test_embedding_sanity(text, spec):
    w = parse_weight(text)
    for name, f in lp_test_family(1.0, n_random=1):
        for p in (1, 2):
            v = fock_norm(f, FockParams(p, 1.0), w, spec)
            assert math.isfinite(v) and v > 0, name


# -- projections ---------------------------------------------------------------


def test_projection_examples(spec):
    one = EntireFn.constant(1)
    for z in (0, 1 + 1j, -2, 1.5j):
        assert project(one, 1.3, z, False, spec) == pytest.approx(1, rel=1e-10)
        assert abs(project_derivative(one, 1.3, 1, [z], spec)[0]) < 1e-10
        assert project(one, 1.0, z, True, spec) == pytest.approx(math.exp(abs(z) ** 2 / 4), rel=1e-10)


def test_derivative_identity(spec):
    g = EntireFn.poly([1, -2, 0, 1j])
    zs = [0.5, 1 - 1j, -1j]
    for k in (1, 2):
        lhs = project_derivative(g, 1.0, k, zs, spec)
        np.testing.assert_allclose(lhs, g.derivative(k)(np.array(zs)), atol=1e-9)


POLYS = st.lists(gauss_int, min_size=1, max_size=7).map(EntireFn.poly)
KERNELS = st.tuples(st.floats(-1.4, 1.4), st.floats(-1.4, 1.4)).map(lambda t: EntireFn.exponential(complex(*t)))


@given(st.one_of(POLYS, KERNELS), st.sampled_from([1.0, 2.0]))
def test_reproducing_property(g, alpha):
    spec = QuadSpec()
    x = np.linspace(-2, 2, 5)
    zs = (x[:, None] + 1j * x[None, :]).ravel()
    zs = zs[np.abs(zs) <= 2]
    err = np.abs(project_many(g, alpha, zs, False, spec) - g(zs))
    assert err.max() < 1e-6 * max(1.0, np.abs(g(zs)).max())


@given(st.one_of(POLYS, KERNELS), st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_majorization(g, xy):
    spec = QuadSpec()
    z = complex(*xy)
    assert abs(project(g, 1.0, z, False, spec)) <= project(g, 1.0, z, True, spec) * (1 + 1e-9) + 1e-12


def test_subordination_constant_is_stable():
    # [P+_a(|g|)]^t <~ P+_{t a}(|g|^t), with |g|^t written as |h| for an exact h
    alpha = 1.0
    cases = {
        "one": (EntireFn.constant(1), {0.5: EntireFn.constant(1)}),
        "K1": (EntireFn.kernel(alpha, 1), {0.5: EntireFn.kernel(alpha, 0.5)}),
        "z2": (EntireFn.monomial(2), {0.5: EntireFn.monomial(1)}),
    }
    zs = [0, 1, 1 + 1j, -2, 3j]
    worst = []
    for spec in (QuadSpec(), QuadSpec().tightened(10)):
        m = 0.0
        for g, roots in cases.values():
            for theta in (0.5, 1.0):
                h = g if theta == 1.0 else roots[theta]
                lhs = project_many(g, alpha, zs, True, spec) ** theta
                rhs = project_many(h, theta * alpha, zs, True, spec)
                m = max(m, float(np.max(lhs / rhs)))
        worst.append(m)
    assert all(math.isfinite(v) for v in worst)
    assert worst[1] == pytest.approx(worst[0], rel=1e-6)


def test_sampled_function_projection(spec):
    g = SampledFn(lambda z: np.ones(z.shape), beta=0.0)
    assert project(g, 1.0, 0.5, False, spec) == pytest.approx(1, rel=1e-10)
    with pytest.raises(UsageError):
        project(SampledFn(lambda z: z, beta=3.0), 1.0, 0, False, spec)


@pytest.mark.parametrize("g", [EntireFn.constant(1), EntireFn.kernel(1, 1), EntireFn.monomial(2)])
def test_growth_bound(g, spec):
    for z in (0, 1, 2 + 1j):
        lhs, rhs = growth_bound(g, 1.0, z, spec)
        assert lhs <= rhs
    assert growth_gamma(1.0) == pytest.approx(1 / 0.9)
    with pytest.raises(UsageError):
        growth_gamma(1.0, 2.5)


# -- Littlewood-Paley and kernels ---------------------------------------------------


def test_lp_examples(spec, one):
    r = lp_ratio(EntireFn.constant(1), FockParams(2, 2, k=1), one, spec)
    assert (r.lhs, r.rhs, r.ratio) == pytest.approx((math.pi / 2, 1, math.pi / 2), rel=1e-10)
    r = lp_ratio(EntireFn.monomial(1), FockParams(2, 2, k=1), one, spec)
    oracle = 2 * math.pi * integrate.quad(lambda t: t * math.exp(-2 * t * t) / (1 + t) ** 2, 0, np.inf, epsabs=1e-14)[0]
    assert r.lhs == pytest.approx(math.pi / 4, rel=1e-10)
    assert r.rhs == pytest.approx(oracle, rel=1e-9)


@given(entire_fns(), st.tuples(st.floats(0.1, 5), st.floats(-3, 3)))
def test_lp_scale_invariance(f, c):
    assume(not f.is_zero)
    spec = QuadSpec()
    w = make_weight("power", {"gamma": 2})
    c = complex(*c)
    a = lp_ratio(f, FockParams(2, 1, k=1), w, spec).ratio
    b = lp_ratio(f * c, FockParams(2, 1, k=1), w, spec).ratio
    assert b == pytest.approx(a, rel=1e-8)


def test_kernel_norm_examples(spec, one):
    r = kernel_norm_check(0, FockParams(2, 2), one, spec)
    assert (r.lhs, r.rhs, r.ratio) == pytest.approx((math.pi / 2, math.pi, 0.5), rel=1e-10)
    for p, alpha in ((1, 1), (2, 0.5)):
        for a in (1, 2 - 1j):
            assert kernel_norm_check(a, FockParams(p, alpha), one, spec).ratio == pytest.approx(2 / (p * alpha), rel=1e-9)
    w = make_weight("power", {"gamma": 2})
    rs = [kernel_norm_check(a, FockParams(2, 1), w, spec).ratio for a in range(6)]
    assert max(rs) / min(rs) < 10


# -- remainder and pointwise bounds ---------------------------------------------


def test_remainder_examples(spec):
    lhs, rhs, err = remainder_check(EntireFn.monomial(2), 1, 1.0, 1, spec)
    assert lhs == pytest.approx(1) and err < 1e-6
    lhs, rhs, err = remainder_check(EntireFn.poly([2, -1]), 1, 1.0, 1 + 1j, spec)
    assert lhs == 0 and rhs == 0
    K = EntireFn.kernel(1.0, 1 + 0.5j)
    for z in (0, 1, 1j, 1 + 1j):
        assert remainder_check(K, 1, 1.0, z, spec)[2] < 1e-6


def test_pointwise_examples(spec, one):
    lhs, rhs, m = pointwise_bound_check(EntireFn.constant(1), 2, 0.0, one, 1, 0.3, spec)
    assert (lhs, rhs, m) == pytest.approx((1, 1, 1), rel=1e-10)
    assert pointwise_bound_check(EntireFn.monomial(1), 2, 1.0, one, 1, 0, spec)[2] == math.inf
    margins = [pointwise_bound_check(EntireFn.kernel(2, 1), 2, 2.0, one, 1, 1, s, )[2] for s in (QuadSpec(), QuadSpec().tightened())]
    assert margins[0] > 0 and margins[1] == pytest.approx(margins[0], rel=1e-6)
