import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint
from scipy.stats import norm

from conftest import make_network
from sensewall import DetectorParams, FusionRule, UncertaintyBound, pd_avg, pf_avg, pf_fixed
from sensewall.errors import DomainError, RuleMismatchError
from sensewall.fusion import (
    hard_qd,
    hard_qf,
    network_qd,
    network_qf,
    poisson_binomial_tail,
    soft_average,
    soft_qd_avg,
    soft_qd_fixed,
    soft_qf_avg,
    soft_qf_fixed,
)
from sensewall.numerics import g_p, k_p
from sensewall.uncertainty import beta_bounds, beta_pdf


def enumerate_tail(probs, k):
    total = 0.0
    for outcome in itertools.product((0, 1), repeat=len(probs)):
        if sum(outcome) >= k:
            total += math.prod(q if o else 1 - q for q, o in zip(probs, outcome))
    return total


def two_sensor_direct(lam, b1, b2, g1, g2, p, N, w1=1.0, w2=1.0):
    """Fused statistic (T1 + T2)/2 against (lam/2)(w1 + w2), written in true-noise units."""
    h = p / 2
    s1, s2 = w1**h * b1**-h, w2**h * b2**-h  # sigma_i^p with sigma_i^2 = nominal_i / beta_i
    m1, m2 = (1 + b1 * g1) ** h, (1 + b2 * g2) ** h
    mean = g_p(p) / 2 * (m1 * s1 + m2 * s2)
    var = k_p(p) / (4 * N) * ((m1 * s1) ** 2 + (m2 * s2) ** 2)
    return norm.sf((lam / 2 * (w1**h + w2**h) - mean) / math.sqrt(var))


def test_tail_examples():
    assert poisson_binomial_tail([0.1, 0.2, 0.3], 1) == pytest.approx(0.496, abs=1e-15)
    assert poisson_binomial_tail([0.1, 0.2, 0.3], 2) == pytest.approx(0.098, abs=1e-15)
    assert poisson_binomial_tail([0.1, 0.2, 0.3], 3) == pytest.approx(0.006, abs=1e-15)


def test_tail_domain():
    with pytest.raises(DomainError):
        poisson_binomial_tail([0.5, 0.5], 0)
    with pytest.raises(DomainError):
        poisson_binomial_tail([0.5, 0.5], 3)
    with pytest.raises(DomainError):
        poisson_binomial_tail([1.2], 1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=6))
def test_tail_matches_enumeration(probs):
    for k in range(1, len(probs) + 1):
        assert poisson_binomial_tail(probs, k) == pytest.approx(enumerate_tail(probs, k), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=8))
def test_tail_or_and_identities_and_monotone(probs):
    M = len(probs)
    assert poisson_binomial_tail(probs, 1) == pytest.approx(1 - math.prod(1 - q for q in probs), abs=1e-14)
    assert poisson_binomial_tail(probs, M) == pytest.approx(math.prod(probs), abs=1e-14)
    tails = [poisson_binomial_tail(probs, k) for k in range(1, M + 1)]
    assert all(a >= b - 1e-15 for a, b in zip(tails, tails[1:]))
    bumped = [min(1.0, probs[0] + 0.1)] + probs[1:]
    assert all(poisson_binomial_tail(bumped, k) >= t - 1e-15 for k, t in zip(range(1, M + 1), tails))


def test_rule_validation():
    with pytest.raises(DomainError):
        FusionRule("xor")
    with pytest.raises(DomainError):
        FusionRule.k_of_m(0)
    with pytest.raises(DomainError):
        make_network([1, 1], [0, 0], FusionRule.k_of_m(3))
    assert FusionRule.OR().required_count(4) == 1
    assert FusionRule.AND().required_count(4) == 4
    assert FusionRule.soft().required_count(4) is None


def test_hard_or_two_sensor_structure():
    net = make_network([1.0, 0.5], [0.2, 0.3676], FusionRule.OR(), N=2000)
    lam = 1.1
    f = [pf_avg(lam, s.bound, net.params) for s in net.sensors]
    d = [pd_avg(lam, s.bound, s.snr, net.params) for s in net.sensors]
    assert hard_qf(net, lam) == pytest.approx(f[0] + f[1] - f[0] * f[1], abs=1e-15)
    assert hard_qd(net, lam) == pytest.approx(d[0] + d[1] - d[0] * d[1], abs=1e-15)


def test_single_sensor_rules_agree():
    for rule in (FusionRule.OR(), FusionRule.AND(), FusionRule.k_of_m(1)):
        net = make_network([0.7], [0.25], rule, N=3000)
        assert hard_qf(net, 1.05) == pytest.approx(pf_avg(1.05, UncertaintyBound(0.7), net.params), abs=1e-15)
    soft = make_network([0.7], [0.25], FusionRule.soft(), N=3000)
    assert soft_qf_avg(1.05, soft) == pytest.approx(pf_avg(1.05, UncertaintyBound(0.7), soft.params), abs=1e-9)
    assert soft_qd_avg(1.05, soft) == pytest.approx(pd_avg(1.05, UncertaintyBound(0.7), 0.25, soft.params), abs=1e-9)
    assert soft_qf_fixed(1.05, [1.1], soft) == pytest.approx(pf_fixed(1.05, 1.1, soft.params), abs=1e-15)


def test_kofm_boundaries_equal_or_and():
    Ls, g = [1.0, 0.7, 0.5], [0.3, 0.1, 0.05]
    for lam in (0.9, 1.05, 1.2):
        assert hard_qd(make_network(Ls, g, FusionRule.k_of_m(1)), lam) == hard_qd(make_network(Ls, g, FusionRule.OR()), lam)
        assert hard_qd(make_network(Ls, g, FusionRule.k_of_m(3)), lam) == hard_qd(make_network(Ls, g, FusionRule.AND()), lam)


def test_rule_mismatch():
    soft = make_network([1.0, 0.5], [0.1, 0.1], FusionRule.soft())
    hard = make_network([1.0, 0.5], [0.1, 0.1], FusionRule.OR())
    with pytest.raises(RuleMismatchError):
        hard_qf(soft, 1.0)
    with pytest.raises(RuleMismatchError):
        soft_qf_avg(1.0, hard)
    with pytest.raises(DomainError):
        soft_qf_fixed(1.0, [1.0], soft)


def test_soft_fixed_examples():
    net = make_network([1.0, 0.5], [0, 0], FusionRule.soft(), N=1000)
    assert soft_qf_fixed(1.0, [1.0, 1.0], net) == pytest.approx(0.5, abs=1e-15)
    hi = make_network([1.0, 0.5], [0.3, 0.3954], FusionRule.soft(), N=10**6)
    assert soft_qd_fixed(1.2, [1.0, 1.0], [0.3, 0.3954], hi) >= 0.999
    assert soft_qd_fixed(1.05, [1.1, 0.9], [0, 0], net) == soft_qf_fixed(1.05, [1.1, 0.9], net)


def test_soft_generic_equals_two_sensor_form():
    r = np.random.default_rng(7)
    for _ in range(1000):
        p = float(r.choice([1.0, 2.0, 3.0, r.uniform(0.5, 4)]))
        N = int(r.integers(100, 10**6))
        b = r.uniform(0.6, 1.6, 2)
        gam = r.uniform(0, 1, 2)
        w = r.uniform(0.5, 2.0, 2)
        net = make_network([1.0, 0.5], list(gam), FusionRule.soft(), p=p, N=N, powers=list(w))
        lam = float(r.uniform(0.5, 1.5)) * g_p(p)
        assert soft_qf_fixed(lam, b, net) == pytest.approx(two_sensor_direct(lam, *b, 0, 0, p, N, *w), abs=1e-12)
        assert soft_qd_fixed(lam, b, gam, net) == pytest.approx(two_sensor_direct(lam, *b, *gam, p, N, *w), abs=1e-12)


@pytest.mark.parametrize("p", [2, 3])
def test_soft_quadrature_against_scipy_dblquad(p):
    net = make_network([1.0, 0.5], [10**-0.5, 10**-1.5], FusionRule.soft(), p=p, N=5000)
    lam = 1.1 * g_p(p)
    (a1, b1), (a2, b2) = beta_bounds(UncertaintyBound(1.0)), beta_bounds(UncertaintyBound(0.5))
    pdf1, pdf2 = UncertaintyBound(1.0), UncertaintyBound(0.5)

    def oracle(g1, g2):
        f = lambda y, x: two_sensor_direct(lam, x, y, g1, g2, p, 5000) * beta_pdf(x, pdf1) * beta_pdf(y, pdf2)
        return sint.dblquad(f, a1, b1, a2, b2, epsabs=1e-11, epsrel=1e-10)[0]

    assert soft_qf_avg(lam, net) == pytest.approx(oracle(0, 0), abs=1e-8)
    assert soft_qd_avg(lam, net) == pytest.approx(oracle(10**-0.5, 10**-1.5), abs=1e-8)


def test_soft_quadrature_matches_sampling():
    net = make_network([1.0, 0.7, 0.5], [0.3, 0.1, 0.03], FusionRule.soft(), p=3, N=2000)
    lam = 1.05 * g_p(3)
    for detect in (False, True):
        quad = soft_average(lam, net, detect, method="quadrature")
        samp = soft_average(lam, net, detect, rng=np.random.default_rng(3), method="sampling")
        assert quad.std_error == 0.0
        assert abs(quad.value - samp.value) <= 3 * samp.std_error


def test_soft_many_sensors_uses_sampling():
    net = make_network([1.0, 0.8, 0.6, 0.4], [0.2] * 4, FusionRule.soft(), N=2000)
    est = soft_average(1.05, net, True)
    assert est.std_error > 0
    # a certain sensor drops out of the integration dimension count
    net3 = make_network([1.0, 0.8, 0.0, 0.4], [0.2] * 4, FusionRule.soft(), N=2000)
    assert soft_average(1.05, net3, True).std_error == 0.0


def test_soft_no_uncertainty_is_fixed_value():
    net = make_network([0.0, 0.0], [0.2, 0.1], FusionRule.soft(), N=1000)
    assert soft_qd_avg(1.1, net) == soft_qd_fixed(1.1, [1, 1], [0.2, 0.1], net)


@pytest.mark.parametrize("rule", [FusionRule.OR(), FusionRule.k_of_m(2), FusionRule.soft()])
def test_permutation_invariance(rule):
    Ls, g = [1.0, 0.7, 0.5], [0.3, 0.1, 0.05]
    a = make_network(Ls, g, rule, N=3000)
    b = make_network(Ls[::-1], g[::-1], rule, N=3000)
    for lam in (1.05,):
        assert network_qf(a, lam) == pytest.approx(network_qf(b, lam), abs=1e-10)
        assert network_qd(a, lam) == pytest.approx(network_qd(b, lam), abs=1e-10)


@pytest.mark.parametrize("rule", [FusionRule.AND(), FusionRule.soft()])
def test_network_monotone_in_lambda(rule):
    net = make_network([1.0, 0.5], [0.3, 0.4], rule, p=3, N=4000)
    grid = np.linspace(1.0, 2.4, 40)
    qf = [network_qf(net, x) for x in grid]
    qd = [network_qd(net, x) for x in grid]
    assert all(b <= a + 1e-9 for a, b in zip(qf, qf[1:]))
    assert all(b <= a + 1e-9 for a, b in zip(qd, qd[1:]))


def test_three_sensor_quadrature_regression():
    # this point once stalled: an inner panel was accepted with an error far
    # above tolerance, so the outer integrand jumped
    net = make_network([1.0, 0.7, 0.5], [0.3, 0.1, 0.05], FusionRule.soft(), p=2, N=3000)
    est = soft_average(0.9571428571428572, net, False)
    samp = soft_average(0.9571428571428572, net, False, rng=np.random.default_rng(11), method="sampling")
    assert abs(est.value - samp.value) <= 3 * samp.std_error
