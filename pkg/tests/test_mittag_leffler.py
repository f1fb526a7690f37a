import math

import mpmath as mp
import numpy as np
import pytest

from fracwave.errors import AccuracyLoss, NonFiniteInput, UnsupportedOrder
from fracwave.mittag_leffler import MLParams, ml_deriv_reduction, ml_eval, ml_table, mittag_leffler
from oracles.mittag_leffler_mp import cut_integral, series


def test_frozen_grid(ml_reference):
    a, b, z, ref = ml_reference.T
    got = np.array([ml_eval(MLParams(*row)) for row in ml_reference[:, :3]])
    assert np.max(np.abs(got - ref) / np.abs(ref)) <= 1e-10


@pytest.mark.parametrize("alpha,beta,z", [
    (0.5, 1.0, -400.0), (1.5, 1.0, -1e4), (1.9, 2.0, -2000.0), (0.7, 0.7, 12.0), (1.2, 1.5, -60.0)])
def test_outside_grid(alpha, beta, z):
    ref = float(cut_integral(alpha, beta, z)) if abs(z) ** (1 / alpha) > 150 else float(series(alpha, beta, z))
    assert ml_eval(MLParams(alpha, beta, z)) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_oracle_branches_agree():
    for a, b, z in [(1.5, 1.0, -30.0), (0.9, 2.0, -47.25), (1.9, 1.9, -10.0)]:
        assert float(series(a, b, z)) == pytest.approx(float(cut_integral(a, b, z)), rel=1e-14)


def test_elementary_cases():
    assert ml_eval(MLParams(1, 1, 1)) == pytest.approx(math.e, rel=1e-15)
    assert ml_eval(MLParams(2, 1, -4.0)) == pytest.approx(math.cos(2.0), rel=1e-12)
    assert ml_eval(MLParams(0.5, 1, -1.5)) == pytest.approx(math.exp(2.25) * math.erfc(1.5), rel=1e-12)
    assert ml_eval(MLParams(1.3, 2.5, 0.0)) == pytest.approx(1 / math.gamma(2.5), rel=1e-15)


def test_shift_identity():
    z = np.linspace(-50, 5, 101)
    for a in (0.3, 1.1, 1.9):
        for b in (0.5, 1.0, 2.0):
            lhs = mittag_leffler(a, b, z)
            rhs = 1 / math.gamma(b) + z * mittag_leffler(a, a + b, z)
            assert np.all(np.abs(lhs - rhs) <= 1e-10 * np.maximum(1, np.abs(lhs)))


def test_vectorised_matches_scalar():
    z = np.array([[-3.0, 0.0], [2.5, -80.0]])
    v = mittag_leffler(1.4, 1.2, z)
    assert v.shape == z.shape
    for idx in np.ndindex(z.shape):
        assert v[idx] == ml_eval(MLParams(1.4, 1.2, z[idx]))


def test_errors():
    with pytest.raises(UnsupportedOrder):
        ml_eval(MLParams(2.5, 1, 0.1))
    with pytest.raises(UnsupportedOrder):
        ml_eval(MLParams(0.0, 1, 0.1))
    with pytest.raises(NonFiniteInput):
        ml_eval(MLParams(1.5, 1, math.nan))
    with pytest.raises(AccuracyLoss):
        ml_eval(MLParams(0.5, 1, 40.0))


def test_deriv_reduction():
    a, b, lam, t, h = 1.5, 2.0, -2.0, 0.8, 1e-5
    f = lambda s: ml_deriv_reduction(a, b, s, lam, 0)
    num = (f(t + h) - f(t - h)) / (2 * h)
    assert ml_deriv_reduction(a, b, t, lam, 1) == pytest.approx(num, rel=1e-8)
    with pytest.raises(UnsupportedOrder):
        ml_deriv_reduction(a, b, t, lam, 2)
    with pytest.raises(UnsupportedOrder):
        ml_deriv_reduction(a, 1.0, t, lam, 1)


@pytest.mark.parametrize("alpha,beta", [(1.2, 1.0), (1.5, 2.0), (1.8, 2.8), (1.5, 1.5)])
def test_table_matches_direct(alpha, beta):
    x = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 3000)])
    got = ml_table(alpha, beta)(x)
    ref = mittag_leffler(alpha, beta, -x)
    assert np.max(np.abs(got - ref)) <= 1e-12


def test_table_against_mpmath_sample():
    with mp.workdps(40):
        for x in (0.3, 7.0, 55.0):
            ref = float(series(1.5, 2.5, -x))
            assert ml_table(1.5, 2.5)(np.array([x]))[0] == pytest.approx(ref, rel=1e-11, abs=1e-15)
