import math

import mpmath
import numpy as np
import pytest

from lossgbs.nonclassicality import (
    TestParameters,
    classical_simulability_lhs,
    depth_tradeoff,
    epsilon0,
    passes_nonclassicality_test,
    postselected_epsilon0,
    postselected_parameters,
)
from lossgbs.postselection import equivalent_transmission


def lhs_mp(r, eta, q):
    mpmath.mp.dps = 50
    r, eta, q = mpmath.mpf(r), mpmath.mpf(eta), mpmath.mpf(q)
    x = mpmath.log((1 - 2 * q) / (eta * mpmath.e ** (-2 * r) + 1 - eta))
    return mpmath.sech(max(x, 0) / 2)


def test_parameter_validation():
    for bad in [(0.0, 0.5, 5, 0.0), (1.0, 0.0, 5, 0.0), (1.0, 0.5, 0, 0.0), (1.0, 0.5, 5, 0.5), (1.0, 0.5, 2.5, 0.0)]:
        with pytest.raises(ValueError):
            TestParameters(*bad)


def test_lhs_example_high_precision():
    p = TestParameters(1.0, 0.1, 50, 1e-4)
    assert classical_simulability_lhs(p) == pytest.approx(0.998983, abs=1e-6)
    assert classical_simulability_lhs(p) == pytest.approx(float(lhs_mp(1.0, 0.1, 1e-4)), rel=1e-14)


def test_lhs_clamped_by_ramp():
    # dark counts so high that the logarithm is negative
    p = TestParameters(0.05, 0.1, 50, 0.3)
    assert classical_simulability_lhs(p) == 1.0
    assert epsilon0(p) == 0.0


@pytest.mark.parametrize("r", [0.2, 1.0, 2.5])
@pytest.mark.parametrize("eta", [0.01, 0.3, 1.0])
def test_lhs_range(r, eta):
    assert 0 < classical_simulability_lhs(TestParameters(r, eta, 10, 1e-3)) <= 1


def test_epsilon0_worked_points():
    assert epsilon0(TestParameters(1.0, 0.1, 50, 1e-4)) == pytest.approx(0.451, abs=1e-3)
    assert epsilon0(TestParameters(1.5, 0.15, 50, 1e-4)) == pytest.approx(0.767, abs=1e-3)


def test_epsilon0_consistent_with_lhs():
    p = TestParameters(1.2, 0.4, 30, 1e-4)
    assert math.exp(-epsilon0(p) ** 2 / (4 * p.K)) == pytest.approx(classical_simulability_lhs(p), rel=1e-12)


def test_epsilon0_stable_for_large_argument():
    p = TestParameters(20.0, 1.0, 100, 0.0)
    eps = epsilon0(p)
    assert math.isfinite(eps) and eps > 1


def test_postselected_epsilon0_examples():
    a = TestParameters(1.0, 0.1, 50, 1e-4)
    assert postselected_epsilon0(a, 2.5) == pytest.approx(1.80, abs=0.01)
    assert passes_nonclassicality_test(postselected_parameters(a, 2.5))
    assert not passes_nonclassicality_test(a)
    b = TestParameters(1.5, 0.15, 50, 1e-4)
    assert postselected_epsilon0(b, 2.5) > 1
    with pytest.raises(ValueError):
        postselected_epsilon0(a, 0.9)


def test_postselected_parameters_chain():
    p = TestParameters(1.0, 0.1, 50, 1e-4)
    q = postselected_parameters(p, 2.5)
    c = math.tanh(1.0) / math.tanh(2.5)
    assert q.eta == pytest.approx(equivalent_transmission(0.1, c))
    assert q.q_dark == pytest.approx(3.954e-4, abs=1e-7)


def test_postselected_epsilon0_continuous_at_c_one():
    p = TestParameters(1.0, 0.1, 50, 1e-4)
    # r' with c = 1 - 1e-6
    r_prime = math.atanh(math.tanh(1.0) / (1 - 1e-6))
    assert postselected_epsilon0(p, r_prime) == pytest.approx(epsilon0(p), abs=1e-4)


def test_epsilon0_monotone():
    # less loss makes the device harder to simulate, so eps0 grows with eta
    etas = np.linspace(0.05, 0.9, 30)
    eps = [epsilon0(TestParameters(1.0, e, 50, 1e-4)) for e in etas]
    assert all(a < b for a, b in zip(eps, eps[1:]))
    ks = [epsilon0(TestParameters(1.0, 0.2, k, 1e-4)) for k in (5, 10, 50, 200)]
    assert all(a < b for a, b in zip(ks, ks[1:]))


@pytest.mark.parametrize("r", [1.0, 1.5])
def test_postselection_raises_epsilon0_on_grid(r):
    for eta in np.linspace(0.01, 1.0, 100):
        p = TestParameters(r, float(eta), 50, 1e-4)
        assert postselected_epsilon0(p, 2.5) >= epsilon0(p) - 1e-12


def test_depth_tradeoff():
    assert depth_tradeoff(0.5, 2, 1.0, 2.5) == pytest.approx(0.421, abs=1e-3)
    c = math.tanh(1.0) / math.tanh(2.5)
    assert depth_tradeoff(0.5, 1, 1.0, 2.5) == pytest.approx(equivalent_transmission(0.5, c))
    assert depth_tradeoff(0.5, 500, 1.0, 2.5) == pytest.approx(1 - c, abs=1e-12)
    with pytest.raises(ValueError):
        depth_tradeoff(1.0, 2, 1.0, 2.5)
    with pytest.raises(ValueError):
        depth_tradeoff(0.5, 0, 1.0, 2.5)
