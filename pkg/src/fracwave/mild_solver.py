"""Time stepping for the coupled fractional wave system in mild form.

Each unknown is advanced through its Duhamel formula

    u(t) = E_{g,1}(t) u0 + t E_{g,2}(t) u1 + int_0^t (t-s)^(g-1) E_{g,g}(t-s) f(v(s)) ds

mode by mode.  The nonlinearity is frozen on each history interval, and the
kernel is integrated exactly over it.  With

    G(s) = s^g E_{g,g+1}(-mu s^g),   G'(s) = s^(g-1) E_{g,g}(-mu s^g),

the weight of the interval [tau_j, tau_{j+1}] at time t is
G(t - tau_j) - G(t - tau_{j+1}).
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn

from . import kernels
from .errors import (AliasWarning, BlowUpDetected, GeometryMismatch,
                     NoConvergence, WindowTooSmall)
from .mittag_leffler import ml_table
from .spectral_grid import BoxGeometry, GridFunction, box_validity, lp_norm

FORMS = ("signed_power", "absolute_power", "none")
NORM_COLUMNS = ("norm_u_s1", "norm_v_s2", "norm_u_inf", "norm_v_inf", "norm_u_1", "norm_v_1")
BLOWUP_CAP = 1e6


@dataclass(frozen=True)
class SystemConfig:
    gamma1: float
    gamma2: float
    p: float
    q: float
    geometry: BoxGeometry
    u0: GridFunction
    u1: GridFunction
    v0: GridFunction
    v1: GridFunction
    f_form: str = "signed_power"
    g_form: str = "signed_power"
    sign_f: int = 1
    sign_g: int = 1
    data_scale: float = 1.0
    s1: float = 2.0
    s2: float = 2.0
    blowup_cap: float = BLOWUP_CAP

    def __post_init__(self):
        for name in ("gamma1", "gamma2"):
            g = getattr(self, name)
            if not (1.0 < g < 2.0):
                raise ValueError(f"{name} must lie in (1, 2), got {g!r}")
        if not (self.p >= 1 and self.q >= 1 and self.p * self.q > 1):
            raise ValueError(f"need p, q >= 1 and pq > 1, got p={self.p!r}, q={self.q!r}")
        for name in ("f_form", "g_form"):
            if getattr(self, name) not in FORMS:
                raise ValueError(f"{name} must be one of {FORMS}")
        if self.sign_f not in (1, -1) or self.sign_g not in (1, -1):
            raise ValueError("sign_f and sign_g must be +1 or -1")
        if not (self.data_scale >= 0 and math.isfinite(self.data_scale)):
            raise ValueError(f"data_scale must be finite and >= 0, got {self.data_scale!r}")
        for name in ("u0", "u1", "v0", "v1"):
            if getattr(self, name).geometry != self.geometry:
                raise GeometryMismatch(f"{name} lives on {getattr(self, name).geometry}, not {self.geometry}")

    def f(self, v):
        return _power(v, self.p, self.f_form, self.sign_f)

    def g(self, u):
        return _power(u, self.q, self.g_form, self.sign_g)


def _power(x, exponent, form, sign):
    if form == "none":
        return np.zeros_like(x)
    a = np.abs(x)
    if form == "signed_power":
        return sign * a ** (exponent - 1) * x
    return sign * a ** exponent


@dataclass(frozen=True)
class TimeMesh:
    T: float
    n: int
    grading: float = 1.0

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive, got {self.T!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.grading >= 1:
            raise ValueError(f"grading must be >= 1, got {self.grading!r}")

    @classmethod
    def for_config(cls, config, T, n):
        """Mesh with the default grading 2 / min(gamma1, gamma2)."""
        return cls(T, n, 2.0 / min(config.gamma1, config.gamma2))

    @property
    def nodes(self):
        t = self.T * (np.arange(self.n + 1) / self.n) ** self.grading
        t[-1] = self.T
        return t


@dataclass(frozen=True)
class Termination:
    kind: str                   # completed | blew_up | aborted
    t_est: float | None = None
    reason: str | None = None

    def to_dict(self):
        return {"kind": self.kind, "t_est": self.t_est, "reason": self.reason}


@dataclass
class SolutionHistory:
    mesh: TimeMesh
    times: np.ndarray
    norms: np.ndarray           # rows follow NORM_COLUMNS
    termination: Termination
    snapshots: dict = field(default_factory=dict)   # node index -> (u, v) samples

    def column(self, name):
        return self.norms[:, NORM_COLUMNS.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t",) + NORM_COLUMNS)
        for t, row in zip(self.times, self.norms):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, mesh=None, termination=None):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != ("t",) + NORM_COLUMNS:
            raise ValueError("unexpected history header")
        data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, 7)
        times = data[:, 0]
        if mesh is None:
            mesh = TimeMesh(float(times[-1]) if times.size > 1 and times[-1] > 0 else 1.0, max(times.size - 1, 1))
        return cls(mesh, times, data[:, 1:], termination or Termination("completed"))

    def summary(self):
        return {
            "termination": self.termination.to_dict(),
            "mesh": {"T": self.mesh.T, "n": self.mesh.n, "grading": self.mesh.grading},
            "recorded_nodes": int(self.times.size),
            "final": {k: float(v) for k, v in zip(NORM_COLUMNS, self.norms[-1])},
        }


# -- the stepper ----------------------------------------------------------------

class _Equation:
    """Spectral data for one component: order, linear part and history."""

    def __init__(self, gamma, geometry, x0, x1, capacity):
        self.gamma = gamma
        self.geometry = geometry
        levels, self.index = geometry.mu_levels
        self.levels = levels
        self.index_flat = np.ascontiguousarray(self.index.ravel())
        self.hat0 = geometry.rfft(x0)
        self.hat1 = geometry.rfft(x1)
        self.e1 = ml_table(gamma, 1.0)
        self.e2 = ml_table(gamma, 2.0)
        self.kern = ml_table(gamma, gamma + 1.0)
        self.nmodes = self.hat0.size
        self.history = np.zeros((capacity, self.nmodes), dtype=complex)

    def primitive(self, s):
        """G(s) for an array of s >= 0, shape (len(s), levels)."""
        s = np.asarray(s, dtype=float)
        sg = s ** self.gamma
        x = np.multiply.outer(sg, self.levels)
        return sg[:, None] * self.kern(x.ravel()).reshape(x.shape)

    def linear(self, t):
        if t == 0:
            return self.hat0.copy()
        x = self.levels * t ** self.gamma
        m1 = self.e1(x)[self.index]
        m2 = self.e2(x)[self.index]
        return m1 * self.hat0 + t * m2 * self.hat1

    def state(self, t, breaks, count):
        """Spectrum at t from the first ``count`` stored history values.

        Value j is held on [breaks[j], breaks[j+1]]; breaks has count+1 entries
        and breaks[count] == t.
        """
        out = self.linear(t).ravel()
        if count:
            G = self.primitive(t - breaks)
            w = np.ascontiguousarray(G[:-1] - G[1:])
            kernels.history_accumulate(w, self.index_flat, self.history[:count], out)
        return self.geometry.irfft(out.reshape(self.hat0.shape))


def _norms(config, u, v):
    g = config.geometry
    U, V = GridFunction(g, u), GridFunction(g, v)
    return (lp_norm(U, config.s1), lp_norm(V, config.s2),
            float(np.abs(u).max()), float(np.abs(v).max()),
            lp_norm(U, 1), lp_norm(V, 1))


class _Run:
    def __init__(self, config, mesh, snapshots=(), max_seconds=None):
        self.config = config
        self.mesh = mesh
        self.t = mesh.nodes
        g = config.geometry
        eps = config.data_scale
        cap = mesh.n + 1
        self.eq_u = _Equation(config.gamma1, g, eps * config.u0.samples, eps * config.u1.samples, cap)
        self.eq_v = _Equation(config.gamma2, g, eps * config.v0.samples, eps * config.v1.samples, cap)
        self.snap_nodes = set(int(i) for i in snapshots)
        self.max_seconds = max_seconds
        self.times, self.rows, self.snaps = [], [], {}
        _check_window(config, mesh.T)

    def record(self, i, t, u, v):
        self.times.append(t)
        self.rows.append(_norms(self.config, u, v))
        if i in self.snap_nodes:
            self.snaps[i] = (u.copy(), v.copy())

    def push(self, j, u, v):
        g = self.config.geometry
        self.eq_u.history[j] = g.rfft(self.config.f(v)).ravel()
        self.eq_v.history[j] = g.rfft(self.config.g(u)).ravel()

    def evaluate(self, t, breaks, count):
        return self.eq_u.state(t, breaks, count), self.eq_v.state(t, breaks, count)

    def exceeded(self, u, v):
        s = np.abs(u).max() + np.abs(v).max()
        return not np.isfinite(s) or s > self.config.blowup_cap

    def blowup_time(self, n):
        """Bisect [t_{n-1}, t_n] once: the crossing lies in the half that ends first above the cap."""
        t = self.t
        mid = 0.5 * (t[n - 1] + t[n])
        breaks = np.append(t[:n], mid)
        with np.errstate(all="ignore"):
            u, v = self.evaluate(mid, breaks, n)
        return float(mid if self.exceeded(u, v) else t[n])

    def history(self, termination):
        return SolutionHistory(self.mesh, np.array(self.times), np.array(self.rows).reshape(-1, 6),
                               termination, self.snaps)


def _check_window(config, T):
    g = config.geometry
    gmax = max(config.gamma1, config.gamma2)
    if not box_validity(gmax, T, g.L):
        warnings.warn(f"horizon {T} leaves the box-validity window of L = {g.L}", AliasWarning, stacklevel=4)


def _initial(run):
    c = run.config
    eps = c.data_scale
    return eps * c.u0.samples, eps * c.v0.samples


def step_mild_system(config: SystemConfig, mesh: TimeMesh, snapshots=(), raise_on_blowup=False,
                     max_seconds=None) -> SolutionHistory:
    """March the mild formulation with the nonlinearity held at left end points."""
    run = _Run(config, mesh, snapshots, max_seconds)
    return _march(run, raise_on_blowup, sweeps=0)


def picard_refine(config: SystemConfig, mesh: TimeMesh, sweeps: int, tol=1e-4, snapshots=(),
                  raise_on_blowup=False, max_seconds=None) -> SolutionHistory:
    """March with the nonlinearity taken at interval midpoints, solved by fixed-point sweeps.

    Each step starts from the left-point prediction and applies ``sweeps``
    corrections.  With two or more sweeps the last two iterates must agree to
    ``tol`` relative to their size, otherwise NoConvergence is raised.
    """
    if int(sweeps) != sweeps or sweeps < 0:
        raise ValueError(f"sweeps must be a non-negative integer, got {sweeps!r}")
    run = _Run(config, mesh, snapshots, max_seconds)
    return _march(run, raise_on_blowup, sweeps=int(sweeps), tol=tol)


def _march(run, raise_on_blowup, sweeps, tol=0.0):
    t = run.t
    u, v = _initial(run)
    run.record(0, 0.0, u, v)
    start = time.perf_counter()
    prev = (u, v)
    for n in range(1, t.size):
        if run.max_seconds is not None and time.perf_counter() - start > run.max_seconds:
            return run.history(Termination("aborted", reason=f"time limit of {run.max_seconds} s reached"))
        run.push(n - 1, *prev)
        with np.errstate(all="ignore"):
            u, v = run.evaluate(t[n], t[:n + 1], n)
            if sweeps and not run.exceeded(u, v):
                u, v = _correct(run, n, prev, u, v, sweeps, tol)
        if run.exceeded(u, v):
            t_est = run.blowup_time(n) if sweeps == 0 else float(t[n])
            hist = run.history(Termination("blew_up", t_est=t_est))
            if raise_on_blowup:
                raise BlowUpDetected(t_est, hist)
            return hist
        run.record(n, float(t[n]), u, v)
        prev = (u, v)
    return run.history(Termination("completed"))


def _correct(run, n, prev, u, v, sweeps, tol):
    t = run.t
    u_old, v_old = prev
    diff = math.inf
    for k in range(sweeps):
        run.push(n - 1, 0.5 * (u_old + u), 0.5 * (v_old + v))
        un, vn = run.evaluate(t[n], t[:n + 1], n)
        scale = max(np.abs(un).max() + np.abs(vn).max(), 1e-300)
        diff = (np.abs(un - u).max() + np.abs(vn - v).max()) / scale
        u, v = un, vn
        if run.exceeded(u, v):
            return u, v
    if sweeps >= 2 and not diff <= tol:
        raise NoConvergence(f"fixed-point sweeps at t = {t[n]:.6g} still differ by {diff:.3g}")
    return u, v


# -- post-processing ------------------------------------------------------------

MIN_FIT_NODES = 8


def fit_decay_rate(history: SolutionHistory, window, which="norm_u_s1"):
    """Least-squares slope of log(norm) against log(1 + t) over the window.

    Returns (slope, r2).
    """
    lo, hi = window
    y_all = history.column(which)
    sel = (history.times >= lo) & (history.times <= hi)
    if sel.sum() < MIN_FIT_NODES:
        raise WindowTooSmall(f"{int(sel.sum())} nodes in [{lo}, {hi}], need {MIN_FIT_NODES}")
    x = np.log1p(history.times[sel])
    y = np.log(y_all[sel])
    if not np.isfinite(y).all():
        raise ValueError("norms in the fit window must be positive")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 if ss == 0 else float(1.0 - (resid ** 2).sum() / ss)
    return float(slope), r2


def linear_reference(gamma, mu, t, a0, a1):
    """Exact mode amplitude E_{g,1}(-mu t^g) a0 + t E_{g,2}(-mu t^g) a1."""
    from .mittag_leffler import MLParams, ml_eval

    z = -mu * t ** gamma
    return ml_eval(MLParams(gamma, 1.0, z)) * a0 + t * ml_eval(MLParams(gamma, 2.0, z)) * a1


def write_outputs(history: SolutionHistory, out_dir, extra=None):
    """history.csv and summary.json in out_dir."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "history.csv").write_text(history.to_csv())
    summary = history.summary()
    if extra:
        summary.update(extra)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def zero_mode_weight(gamma, a, b):
    """Kernel weight of the constant mode: (b^g - a^g) / Gamma(g + 1)."""
    return (b ** gamma - a ** gamma) / gamma_fn(gamma + 1.0)
