import math

import numpy as np
import pytest
from scipy.special import gamma

from fracwave.errors import InvalidOrder, TooFewNodes
from fracwave.frac_calculus import (
    TestFunctionParams, TimeSamples, bump, caputo_left, caputo_right, caputo_right_testfn,
    check_integration_by_parts, graded_nodes, min_test_exponent, rl_deriv_left, rl_deriv_right,
    rl_integral)


def samples(fn, n=400, T=1.0, grading=1.0):
    return TimeSamples.sample(fn, graded_nodes(T, n, grading))


def test_time_samples_validation():
    with pytest.raises(ValueError):
        TimeSamples(np.array([0.1, 0.5, 1.0]), np.zeros(3), 1.0)
    with pytest.raises(ValueError):
        TimeSamples(np.array([0.0, 0.5, 0.5, 1.0]), np.zeros(4), 1.0)
    with pytest.raises(ValueError):
        TimeSamples(np.array([0.0, 0.5, 1.0]), np.zeros(3), 2.0)


def test_rl_integral_of_constant_and_linear():
    a = 0.35
    f = samples(np.ones_like, n=10)
    assert np.allclose(rl_integral(f, a).values, f.nodes ** a / gamma(1 + a), rtol=1e-13, atol=1e-15)
    g = samples(lambda t: t, n=10, grading=2.0)
    assert np.allclose(rl_integral(g, a).values, g.nodes ** (1 + a) / gamma(2 + a), rtol=1e-12, atol=1e-15)


def test_rl_integral_rejects_orders():
    f = samples(np.ones_like, n=10)
    for a in (0.0, 1.0, 1.5):
        with pytest.raises(InvalidOrder):
            rl_integral(f, a)


def test_caputo_left_of_powers():
    f = samples(lambda t: t ** 2, n=2000)
    d = caputo_left(f, 0.6).values
    exact = 2 / gamma(2.4) * f.nodes ** 1.4
    assert np.max(np.abs(d - exact)[1:]) < 2e-4
    d2 = caputo_left(samples(lambda t: t ** 3, n=2000), 1.5).values
    exact2 = 6 / gamma(2.5) * f.nodes ** 1.5
    assert np.max(np.abs(d2 - exact2)) < 5e-3


def test_caputo_kills_linear_part_for_orders_above_one():
    f = samples(lambda t: 3 - 2 * t, n=50)
    assert np.max(np.abs(caputo_left(f, 1.4).values)) < 1e-10


def test_caputo_errors():
    with pytest.raises(InvalidOrder):
        caputo_left(samples(np.ones_like, n=20), 1.0)
    with pytest.raises(TooFewNodes):
        caputo_left(samples(np.ones_like, n=4), 0.5)


@pytest.mark.parametrize("l,alpha", [(2, 1.5), (3, 1.2), (4, 0.5)])
def test_caputo_right_test_function(l, alpha):
    T = 2.0
    p = TestFunctionParams(l=l, lam=0.5, T=T)
    f = TimeSamples.sample(p.temporal, np.linspace(0, T, 2049))
    got = caputo_right(f, alpha).values
    exact = np.array([caputo_right_testfn(p, alpha, t) for t in f.nodes])
    interior = slice(1, -1)
    assert np.max(np.abs(got - exact)[interior] / np.abs(exact[interior]).max()) < 0.01


def test_test_function_pieces():
    p = TestFunctionParams(l=3, lam=0.75, T=16.0)
    assert p.temporal(20.0) == 0.0
    assert p.spatial(np.array([[0.0, 0.0], [100.0, 0.0]])).tolist() == [1.0, 0.0]
    assert bump(np.array([0.5, 1.5, 2.5]))[[0, 2]].tolist() == [1.0, 0.0]
    assert 0 < bump(np.array([1.5]))[0] < 1
    assert min_test_exponent(1.5, 1.5, 2, 2) == 2.0


def test_rl_derivatives_reduce_to_caputo_plus_boundary():
    a = 0.4
    f = samples(lambda t: 1 + t ** 2, n=800)
    rl = rl_deriv_left(f, a).values
    t = f.nodes[5:]
    exact = t ** -a / gamma(1 - a) + 2 / gamma(3 - a) * t ** (2 - a)
    assert np.allclose(rl[5:], exact, rtol=2e-3)
    r = rl_deriv_right(f, a).values
    assert np.isinf(r[-1]) and np.isfinite(r[:-1]).all()


def test_integration_by_parts_boundary_forms():
    # f vanishes at both ends of [0, T] apart from f(0); g(0) = 0
    T, a = 1.0, 0.5
    nodes = graded_nodes(T, 1200, 1.5)
    f = TimeSamples.sample(lambda t: (1 - t / T) ** 3, nodes)
    g = TimeSamples.sample(lambda t: t ** 2 + t, nodes)
    frozen = check_integration_by_parts(f, g, a, "frozen")
    product = check_integration_by_parts(f, g, a, "product")
    assert product < 5e-3
    assert frozen > 10 * product
    with pytest.raises(ValueError):
        check_integration_by_parts(f, g, a, "other")
