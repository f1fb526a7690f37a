"""Fractional integrals and derivatives of sampled functions of time.

All operators accept arbitrary strictly increasing node sets starting at 0.
Weakly singular kernels are handled by product integration: the kernel
(t - tau)^(a-1) is integrated exactly against the piecewise-linear
interpolant of the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gamma

from .errors import InvalidOrder, TooFewNodes

MIN_NODES = 8


@dataclass(frozen=True)
class TimeSamples:
    nodes: np.ndarray
    values: np.ndarray
    T: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or nodes.shape != values.shape:
            raise ValueError("nodes and values must be 1-d arrays of equal length >= 2")
        if nodes[0] != 0.0 or not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must start at 0 and increase strictly")
        if not math.isclose(nodes[-1], self.T, rel_tol=1e-12, abs_tol=0.0):
            raise ValueError("last node must equal the horizon T")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, fn, nodes):
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, fn(nodes), float(nodes[-1]))

    def with_values(self, values):
        return TimeSamples(self.nodes, values, self.T)


def graded_nodes(T, n, grading=1.0):
    """n+1 nodes t_j = T (j/n)^grading."""
    return T * (np.arange(n + 1) / n) ** grading


def bump(z):
    """Smooth cutoff: 1 on |z| <= 1, 0 on |z| >= 2."""
    a = np.abs(np.asarray(z, dtype=float))
    out = np.where(a <= 1.0, 1.0, 0.0)
    mid = (a > 1.0) & (a < 2.0)
    s = a[mid] - 1.0
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return out


@dataclass(frozen=True)
class TestFunctionParams:
    l: float
    lam: float
    T: float
    cutoff: Callable = bump

    __test__ = False  # not a pytest class

    def temporal(self, t):
        """(1 - t/T)_+^l"""
        return np.clip(1.0 - np.asarray(t, dtype=float) / self.T, 0.0, None) ** self.l

    def spatial(self, x):
        """cutoff(|x| / T^lam)^l for x of shape (..., N)."""
        r = np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float)), axis=-1)
        return self.cutoff(r / self.T ** self.lam) ** self.l


def min_test_exponent(gamma1, gamma2, p, q):
    """Lower bound on l for the test function used in the blow-up argument."""
    return max(1.0, q * gamma1 / (q - 1.0) - 1.0, p * gamma2 / (p - 1.0) - 1.0)


def _check_unit_order(alpha):
    if not (0.0 < alpha < 1.0):
        raise InvalidOrder(f"order must lie in (0, 1), got {alpha!r}")


def _product_weights(nodes, i, alpha):
    """Weights w with sum_j w_j f_j = int_0^{t_i} (t_i - tau)^(alpha-1) f(tau) dtau."""
    A = nodes[i] - nodes[:i]        # distance from left ends
    h = nodes[1:i + 1] - nodes[:i]
    rho = h / A
    # with tau = tau_j + h u:  m_k = h A^(alpha-1) int_0^1 (1 - rho u)^(alpha-1) u^k du
    with np.errstate(divide="ignore"):
        lg = np.log1p(-rho)     # -inf on the last interval, where rho = 1
    e0 = -np.expm1(alpha * lg) / alpha
    e1 = -np.expm1((alpha + 1) * lg) / (alpha + 1)
    i0 = e0 / rho
    i1 = (e0 - e1) / rho ** 2
    small = rho < 0.1
    if small.any():
        r = rho[small]
        c = np.ones_like(r)
        acc = c / 2.0
        for k in range(1, 20):
            c = c * (alpha - k) / k * -r
            acc += c / (k + 2)
        i1[small] = acc
    scale = h * A ** (alpha - 1)
    m0, m1 = scale * i0, scale * i1
    w = np.zeros(i + 1)
    w[:i] += m0 - m1
    w[1:] += m1
    return w


def rl_integral(f: TimeSamples, alpha: float) -> TimeSamples:
    """Riemann-Liouville integral J^alpha f at every node, 0 < alpha < 1."""
    _check_unit_order(alpha)
    return _fractional_integral(f, alpha)


def _fractional_integral(f, alpha):
    nodes, vals = f.nodes, f.values
    out = np.zeros_like(vals)
    for i in range(1, nodes.size):
        out[i] = _product_weights(nodes, i, alpha) @ vals[:i + 1]
    return f.with_values(out / gamma(alpha))


def _first_derivative(f):
    return np.gradient(f.values, f.nodes, edge_order=2)


def _second_derivative(f):
    t, y = f.nodes, f.values
    d2 = np.empty_like(y)
    h0 = t[1:-1] - t[:-2]
    h1 = t[2:] - t[1:-1]
    d2[1:-1] = 2.0 * ((y[2:] - y[1:-1]) / h1 - (y[1:-1] - y[:-2]) / h0) / (h0 + h1)
    # one-sided four-point stencils, exact for cubics
    for end, idx in ((0, [0, 1, 2, 3]), (-1, [-1, -2, -3, -4])):
        x = t[idx] - t[idx[0]]
        V = np.vander(x, 4, increasing=True).T
        rhs = np.array([0.0, 0.0, 2.0, 0.0])
        d2[end] = np.linalg.solve(V, rhs) @ y[idx]
    return d2


def caputo_left(f: TimeSamples, alpha: float) -> TimeSamples:
    """Left Caputo derivative J^(m-alpha) f^(m), m = ceil(alpha), for alpha in (0,1) U (1,2)."""
    if not (0.0 < alpha < 2.0) or alpha == 1.0:
        raise InvalidOrder(f"Caputo order must lie in (0,1) or (1,2), got {alpha!r}")
    if f.nodes.size < MIN_NODES:
        raise TooFewNodes(f"need at least {MIN_NODES} nodes, got {f.nodes.size}")
    m = math.ceil(alpha)
    deriv = _first_derivative(f) if m == 1 else _second_derivative(f)
    return _fractional_integral(f.with_values(deriv), m - alpha)


def _reflect(f):
    return TimeSamples(f.T - f.nodes[::-1], f.values[::-1], f.T)


def caputo_right(f: TimeSamples, alpha: float) -> TimeSamples:
    """Right Caputo derivative anchored at T, via t -> T - t."""
    # the (-1)^m of the right derivative cancels the one from d/dt = -d/ds
    g = caputo_left(_reflect(f), alpha)
    return f.with_values(g.values[::-1])


def caputo_right_testfn(params: TestFunctionParams, alpha: float, t: float) -> float:
    """Closed-form right Caputo derivative of (1 - t/T)_+^l."""
    if not (0.0 < alpha < 2.0):
        raise InvalidOrder(f"order must lie in (0, 2), got {alpha!r}")
    T, l = params.T, params.l
    if not (0.0 <= t <= T):
        raise ValueError(f"t must lie in [0, {T}], got {t!r}")
    return math.gamma(l + 1) / math.gamma(l + 1 - alpha) * T ** -alpha * (1.0 - t / T) ** (l - alpha)


def rl_deriv_left(f: TimeSamples, alpha: float) -> TimeSamples:
    """Left Riemann-Liouville derivative: f(0) t^-a / Gamma(1-a) + Caputo derivative."""
    _check_unit_order(alpha)
    c = caputo_left(f, alpha).values
    with np.errstate(divide="ignore"):
        head = f.values[0] * f.nodes ** -alpha / gamma(1.0 - alpha) if f.values[0] != 0 else 0.0
    return f.with_values(c + head)


def rl_deriv_right(f: TimeSamples, alpha: float) -> TimeSamples:
    """Right Riemann-Liouville derivative
    [f(T) (T-t)^-a - int_t^T f'(s) (s-t)^-a ds] / Gamma(1-a)."""
    _check_unit_order(alpha)
    c = caputo_right(f, alpha).values
    fT = f.values[-1]
    if fT == 0.0:
        return f.with_values(c)
    with np.errstate(divide="ignore"):
        head = fT * (f.T - f.nodes) ** -alpha / gamma(1.0 - alpha)
    return f.with_values(c + head)


def _power_weighted_integral(values, nodes, power):
    """int_0^T t^power * (piecewise-linear values) dt, exact, power > -1."""
    a, b = nodes[:-1], nodes[1:]
    h = b - a
    m0 = (b ** (power + 1) - a ** (power + 1)) / (power + 1)
    m1 = ((b ** (power + 2) - a ** (power + 2)) / (power + 2) - a * m0) / h
    return float(values[:-1] @ (m0 - m1) + values[1:] @ m1)


def check_integration_by_parts(f: TimeSamples, g: TimeSamples, alpha: float,
                               boundary: str = "frozen") -> float:
    """Residual of  int f D^a g = int g (C D_{t|T}^a f) + boundary  on [0, T].

    ``boundary="frozen"`` uses f(a) [(J^(1-a) g)(t)] evaluated between t=a
    and t=b; ``boundary="product"`` uses [f(t) (J^(1-a) g)(t)] between the
    same limits.  Returns the absolute residual.
    """
    _check_unit_order(alpha)
    if not np.array_equal(f.nodes, g.nodes):
        raise ValueError("f and g must share nodes")
    nodes = f.nodes
    # int f D^a g: the g(0) t^-a part is integrated exactly
    cg = caputo_left(g, alpha).values
    lhs = np.trapezoid(f.values * cg, nodes)
    if g.values[0] != 0.0:
        lhs += g.values[0] / gamma(1.0 - alpha) * _power_weighted_integral(f.values, nodes, -alpha)
    rhs = np.trapezoid(g.values * caputo_right(f, alpha).values, nodes)
    jg = _fractional_integral(g, 1.0 - alpha).values
    if boundary == "frozen":
        bterm = f.values[0] * (jg[-1] - jg[0])
    elif boundary == "product":
        bterm = f.values[-1] * jg[-1] - f.values[0] * jg[0]
    else:
        raise ValueError("boundary must be 'frozen' or 'product'")
    return abs(lhs - rhs - bterm)
