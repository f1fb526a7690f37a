import math

import numpy as np
import pytest

from fracwave.errors import AliasWarning, BlowUpDetected, GeometryMismatch, NoConvergence, WindowTooSmall
from fracwave.mild_solver import (
    NORM_COLUMNS, SolutionHistory, SystemConfig, Termination, TimeMesh, fit_decay_rate, linear_reference,
    picard_refine, step_mild_system, write_outputs, zero_mode_weight)
from fracwave.spectral_grid import BoxGeometry, GridFunction, gaussian, single_mode

GEOM = BoxGeometry(1, 64.0, 64)


def const(value, geom=GEOM):
    return GridFunction(geom, np.full(geom.shape, float(value)))


def system(u0, u1, v0, v1, **kw):
    base = dict(gamma1=1.5, gamma2=1.5, p=2, q=2, geometry=u0.geometry)
    base.update(kw)
    return SystemConfig(u0=u0, u1=u1, v0=v0, v1=v1, **base)


def test_config_validation():
    z = const(0)
    with pytest.raises(ValueError):
        system(z, z, z, z, gamma1=1.0)
    with pytest.raises(ValueError):
        system(z, z, z, z, p=1, q=1)
    with pytest.raises(ValueError):
        system(z, z, z, z, f_form="cubic")
    with pytest.raises(GeometryMismatch):
        system(z, z, z, const(0, BoxGeometry(1, 64.0, 32)))


def test_mesh():
    m = TimeMesh(2.0, 10, 1.5)
    assert m.nodes[0] == 0 and m.nodes[-1] == 2.0 and np.all(np.diff(m.nodes) > 0)
    with pytest.raises(ValueError):
        TimeMesh(1.0, 10, 0.5)


@pytest.mark.parametrize("gamma", [1.2, 1.8])
def test_uncoupled_modes_are_exact(gamma):
    g = BoxGeometry(1, 50.0, 128)
    ks = range(1, 8)
    u0 = sum((single_mode(g, k, 1.0 / k) for k in ks), const(0, g))
    u1 = sum((single_mode(g, k, (-1) ** k * 0.3) for k in ks), const(0, g))
    cfg = system(u0, u1, u0, u1, gamma1=gamma, gamma2=gamma, f_form="none", g_form="none")
    mesh = TimeMesh(3.0, 20)
    hist = step_mild_system(cfg, mesh, snapshots=range(21))
    x = g.axis()
    for i, t in enumerate(mesh.nodes):
        mu = [(2 * math.pi * k / g.L) ** 2 for k in ks]
        exact = sum(linear_reference(gamma, m, t, 1.0 / k, (-1) ** k * 0.3) * np.cos(2 * math.pi * k * x / g.L)
                    for m, k in zip(mu, ks))
        assert np.max(np.abs(hist.snapshots[i][0] - exact)) <= 1e-12


def test_zero_mode_weight():
    assert zero_mode_weight(1.5, 0.0, 1.0) == pytest.approx(1 / math.gamma(2.5))
    assert zero_mode_weight(1.2, 2.0, 3.0) == pytest.approx((3 ** 1.2 - 2 ** 1.2) / math.gamma(2.2))


def scalar_volterra(gamma, c, T, n):
    """x(t) = c + int_0^t (t-s)^(g-1)/Gamma(g) x(s)^2 ds, left-point product rule."""
    t = T * (np.arange(n + 1) / n)
    x = np.empty(n + 1)
    x[0] = c
    for i in range(1, n + 1):
        w = ((t[i] - t[:i]) ** gamma - (t[i] - t[1:i + 1]) ** gamma) / math.gamma(gamma + 1)
        x[i] = c + w @ x[:i] ** 2
    return t, x


def test_constant_data_reduces_to_scalar_equation():
    c = 0.4
    cfg = system(const(c), const(0), const(c), const(0))
    hist = step_mild_system(cfg, TimeMesh(1.0, 40))
    t, x = scalar_volterra(1.5, c, 1.0, 40)
    assert np.allclose(hist.column("norm_u_inf"), x, rtol=1e-12)


def test_blowup_of_constant_data():
    cfg = system(const(2.0), const(0), const(2.0), const(0))
    hist = step_mild_system(cfg, TimeMesh(3.0, 300))
    assert hist.termination.kind == "blew_up"
    assert hist.times[-1] < hist.termination.t_est <= 3.0
    with pytest.raises(BlowUpDetected) as info:
        step_mild_system(cfg, TimeMesh(3.0, 300), raise_on_blowup=True)
    assert info.value.t_est == hist.termination.t_est
    assert info.value.history.times.size == hist.times.size


def test_time_limit_aborts():
    cfg = system(gaussian(GEOM), const(0), gaussian(GEOM), const(0))
    hist = step_mild_system(cfg, TimeMesh(1.0, 50), max_seconds=0.0)
    assert hist.termination.kind == "aborted"


def test_alias_warning_for_long_horizon():
    cfg = system(gaussian(GEOM), const(0), gaussian(GEOM), const(0), data_scale=0.01)
    with pytest.warns(AliasWarning):
        step_mild_system(cfg, TimeMesh(100.0, 10))


def test_picard_sweeps():
    cfg = system(gaussian(GEOM, 0.5, 3.0), const(0), gaussian(GEOM, 0.5, 3.0), const(0))
    mesh = TimeMesh(1.0, 50)
    a = step_mild_system(cfg, mesh)
    b = picard_refine(cfg, mesh, 0)
    assert np.array_equal(a.norms, b.norms)
    c2, c3 = picard_refine(cfg, mesh, 2), picard_refine(cfg, mesh, 3)
    assert np.max(np.abs(c2.norms - c3.norms)) < np.max(np.abs(a.norms - c3.norms))
    with pytest.raises(ValueError):
        picard_refine(cfg, mesh, -1)


def test_picard_reports_nonconvergence():
    cfg = system(const(2.0), const(0), const(2.0), const(0))
    with pytest.raises(NoConvergence):
        picard_refine(cfg, TimeMesh(3.0, 30), 3, tol=1e-12)


def test_midpoint_order():
    cfg = system(const(0.5), const(0), const(0.5), const(0))
    ref = picard_refine(cfg, TimeMesh(1.0, 800), 3, tol=1e-6).column("norm_u_inf")[-1]
    errs = [abs(picard_refine(cfg, TimeMesh(1.0, n), 3, tol=1e-6).column("norm_u_inf")[-1] - ref)
            for n in (25, 50, 100)]
    left = [abs(step_mild_system(cfg, TimeMesh(1.0, n)).column("norm_u_inf")[-1] - ref) for n in (25, 50, 100)]
    assert math.log2(errs[0] / errs[1]) > 1.3
    assert errs[-1] < left[-1]


def synthetic(times, values):
    norms = np.tile(np.asarray(values)[:, None], (1, len(NORM_COLUMNS)))
    return SolutionHistory(TimeMesh(float(times[-1]), len(times) - 1), np.asarray(times), norms,
                           Termination("completed"))


def test_fit_decay_rate():
    t = np.linspace(0, 50, 60)
    slope, r2 = fit_decay_rate(synthetic(t, 3 * (1 + t) ** -0.7), (5, 50))
    assert slope == pytest.approx(-0.7, abs=1e-12) and r2 == pytest.approx(1.0)
    with pytest.raises(WindowTooSmall):
        fit_decay_rate(synthetic(t, (1 + t) ** -1.0), (5, 8))


def test_history_roundtrip(tmp_path):
    cfg = system(gaussian(GEOM, 0.1), const(0), gaussian(GEOM, 0.1), const(0))
    hist = step_mild_system(cfg, TimeMesh(1.0, 12))
    text = hist.to_csv()
    back = SolutionHistory.from_csv(text)
    assert np.array_equal(back.norms, hist.norms) and back.to_csv() == text
    summary = write_outputs(hist, tmp_path, {"note": "x"})
    assert (tmp_path / "history.csv").read_text() == text
    assert summary["recorded_nodes"] == 13 and summary["note"] == "x"
    with pytest.raises(ValueError):
        SolutionHistory.from_csv("a,b\n1,2\n")
