"""Two-parameter Mittag-Leffler function E_{a,b}(z) for real z and 0 < a <= 2.

Evaluation regimes, chosen per point from rho = |z|**(1/a):

* power series when rho is small (and for z > 0 as long as it converges),
* a real-line integral in the middle band: the Laplace inversion contour
  is collapsed onto the branch cut, the piece of the cut near the origin
  is summed with incomplete gamma functions and the rest is integrated
  with Gauss-Legendre panels in log r,
* the algebraic asymptotic expansion once rho is large.

For 1 < a <= 2 and z < 0 the two complex poles of s**(a-b) / (s**a - z)
contribute an oscillating residue term that is added in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .errors import AccuracyLoss, NonFiniteInput, UnsupportedOrder

SERIES_RADIUS = 1.5
ASYMPTOTIC_RADIUS = 40.0
SERIES_TOL = 1e-18
MAX_TERMS = 400

_HEAD_RATIO = 0.5
_HEAD_TERMS = 60
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_CHUNK = 1024


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float
    z: float


def _check_order(alpha):
    if not math.isfinite(alpha) or alpha <= 0.0 or alpha > 2.0:
        raise UnsupportedOrder(f"alpha must lie in (0, 2], got {alpha!r}")


def _series(alpha, beta, z, max_terms=MAX_TERMS, tol=SERIES_TOL):
    """Partial sums of sum z^k / Gamma(a k + b); returns (values, converged)."""
    n = z.size
    total = np.zeros(n)
    done = np.zeros(n, dtype=bool)
    absz = np.abs(z)
    logz = np.log(np.where(absz > 0, absz, 1.0))
    sign = np.where(z < 0, -1.0, 1.0)
    big = absz > 4.0
    k0 = 0
    while k0 < max_terms and not done.all():
        k = np.arange(k0, min(k0 + 64, max_terms))
        arg = alpha * k + beta
        rg = sp.rgamma(arg)
        # |z|^k overflows for large |z|; those rows go through logs
        terms = np.empty((n, k.size))
        if (~big).any():
            terms[~big] = np.power.outer(z[~big], k) * rg
        if big.any():
            lg = -sp.gammaln(arg)
            terms[big] = (np.sign(rg) * np.power.outer(sign[big], k)
                          * np.exp(np.outer(logz[big], k) + lg))
        partial = total[:, None] + np.cumsum(terms, axis=1)
        small = (np.abs(terms) < tol * np.abs(partial)) & (arg >= 1.0)
        done |= small.any(axis=1)
        total = partial[:, -1]
        k0 += k.size
    return total, done


def _residue(alpha, beta, x):
    """Contribution of the poles x^(1/a) e^(+-i pi/a) for z = -x < 0, 1 < a <= 2."""
    s = x ** (1.0 / alpha)
    phase = (1.0 - beta) * np.pi / alpha + s * np.sin(np.pi / alpha)
    return 2.0 / alpha * s ** (1.0 - beta) * np.exp(s * np.cos(np.pi / alpha)) * np.cos(phase)


def _dominant(alpha, beta, z):
    """Real pole z^(1/a) for z > 0."""
    s = z ** (1.0 / alpha)
    with np.errstate(over="ignore"):
        return s ** (1.0 - beta) * np.exp(s) / alpha


def _asymptotic(alpha, beta, z):
    x = np.abs(z)
    kmax = int(math.ceil(1.1 * ASYMPTOTIC_RADIUS / alpha)) + 5
    k = np.arange(1, kmax + 1)
    rg = sp.rgamma(beta - alpha * k)
    # envelope |1/Gamma(b - a k)| <= Gamma(a k - b + 1) / pi decides truncation
    lenv = sp.gammaln(np.maximum(alpha * k - beta + 1.0, 1e-300)) - np.log(np.pi)
    logx = np.log(x)
    env = np.exp(lenv[None, :] - np.outer(logx, k))
    grows = np.diff(env, axis=1, prepend=np.inf) > 0
    keep = np.cumsum(grows, axis=1) == 0
    with np.errstate(under="ignore"):
        terms = -np.power.outer(1.0 / z, k) * rg
    out = np.where(keep, terms, 0.0).sum(axis=1)
    neg = z < 0
    if alpha > 1.0 and neg.any():
        out[neg] += _residue(alpha, beta, x[neg])
    pos = ~neg
    if pos.any():
        out[pos] += _dominant(alpha, beta, z[pos])
    return out


def _cut_integral(alpha, beta, z):
    """Branch-cut representation; needs beta < alpha + 1 and alpha != 1."""
    x = -z
    ax = np.abs(x)
    a = alpha - beta
    c = (_HEAD_RATIO * ax) ** (1.0 / alpha)

    # [0, c]: expand 1/(s^a + x) geometrically, integrate e^-r r^(a + k alpha)
    head = np.zeros_like(x)
    for k in range(_HEAD_TERMS):
        s = alpha * (k + 1) - beta + 1.0
        coef = math.sin(math.pi * (s - 1.0)) * math.gamma(s)
        if coef == 0.0:
            continue
        head += (-1.0) ** k * coef * sp.gammainc(s, c) / x ** (k + 1)
    head *= -1.0 / math.pi

    # [c, inf): r = c e^v; the integrand is analytic in |Im v| < theta
    theta = math.pi * abs(1.0 - alpha) / alpha
    if (z > 0).any():
        theta = min(theta, math.pi * (2.0 - alpha) / alpha)
    h = max(min(0.5, 0.75 * theta), 2e-3)
    vmax = np.log1p((46.0 + 2.0 * max(a, 0.0)) / c)
    npan = int(math.ceil(vmax.max() / h))
    hp = vmax / npan
    u = (np.arange(npan)[:, None] + 0.5 * (1.0 + _GL_X)[None, :]).ravel()
    w = np.tile(_GL_W, npan)
    sb, sab, cb = math.sin(math.pi * beta), math.sin(math.pi * a), math.cos(math.pi * alpha)
    r = c[:, None] * np.exp(hp[:, None] * u[None, :])
    ra = r ** alpha
    xx = x[:, None]
    f = np.exp(-r) * r ** (a + 1.0) * (ra * sb - xx * sab) / (ra * ra + 2.0 * xx * ra * cb + xx * xx)
    tail = 0.5 * hp * (f @ w) / math.pi
    out = head + tail

    neg = z < 0
    if alpha > 1.0 and neg.any():
        out[neg] += _residue(alpha, beta, ax[neg])
    pos = ~neg
    if pos.any():
        out[pos] += _dominant(alpha, beta, z[pos])
    return out


def _middle(alpha, beta, z):
    if beta >= alpha + 1.0:
        # E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z
        return (_middle(alpha, beta - alpha, z) - sp.rgamma(beta - alpha)) / z
    out = np.empty_like(z)
    for i in range(0, z.size, _CHUNK):
        out[i:i + _CHUNK] = _cut_integral(alpha, beta, z[i:i + _CHUNK])
    return out


def _alpha_one(beta, z):
    if beta == 1.0:
        return np.exp(z)
    if beta <= 0.0:
        return sp.rgamma(beta) + z * _alpha_one(beta + 1.0, z)
    return sp.hyp1f1(1.0, beta, z) * sp.rgamma(beta)


def mittag_leffler(alpha, beta, z):
    """Vectorised E_{alpha,beta}(z) for real z; values that overflow come back as inf."""
    alpha = float(alpha)
    beta = float(beta)
    _check_order(alpha)
    if not math.isfinite(beta):
        raise NonFiniteInput("beta must be finite")
    z = np.asarray(z, dtype=float)
    if not np.isfinite(z).all():
        raise NonFiniteInput("z must be finite")
    shape = z.shape
    z = z.ravel()
    out = np.empty_like(z)

    if alpha == 1.0:
        out[:] = _alpha_one(beta, z)
        return out.reshape(shape)

    zero = z == 0.0
    out[zero] = sp.rgamma(beta)
    rho = np.abs(z) ** (1.0 / alpha)
    try_series = ~zero & ((rho <= SERIES_RADIUS) | ((z > 0) & (rho < ASYMPTOTIC_RADIUS)))
    rest = ~zero & ~try_series
    if try_series.any():
        vals, ok = _series(alpha, beta, z[try_series])
        idx = np.flatnonzero(try_series)
        out[idx[ok]] = vals[ok]
        rest[idx[~ok]] = True
    asym = rest & (rho >= ASYMPTOTIC_RADIUS)
    mid = rest & ~asym
    if asym.any():
        out[asym] = _asymptotic(alpha, beta, z[asym])
    if mid.any():
        out[mid] = _middle(alpha, beta, z[mid])
    return out.reshape(shape)


def ml_eval(params: MLParams) -> float:
    """E_{alpha,beta}(z) for a single real argument."""
    alpha, beta, z = float(params.alpha), float(params.beta), float(params.z)
    if not (math.isfinite(z) and math.isfinite(beta)):
        raise NonFiniteInput(f"non-finite input: beta={beta!r}, z={z!r}")
    _check_order(alpha)
    val = float(mittag_leffler(alpha, beta, np.array([z]))[0])
    if not math.isfinite(val):
        raise AccuracyLoss(f"E_{{{alpha},{beta}}}({z}) exceeds double range")
    return val


def ml_deriv_reduction(alpha, beta, t, lam, m):
    """t^(b-m-1) E_{a,b-m}(lam t^a): the m-th t-derivative of t^(b-1) E_{a,b}(lam t^a)."""
    if m not in (0, 1):
        raise UnsupportedOrder(f"m must be 0 or 1, got {m!r}")
    if beta - m <= 0:
        raise UnsupportedOrder(f"beta - m must be positive, got {beta - m!r}")
    if not t > 0:
        raise ValueError("t must be positive")
    return t ** (beta - m - 1) * ml_eval(MLParams(alpha, beta - m, lam * t ** alpha))


# -- tabulated E_{a,b}(-x), x >= 0, for the solver's inner loops ---------------

_TABLE_DEGREE = 16


class MLTable:
    """Fast E_{alpha,beta}(-x) for arrays of x >= 0.

    Below ``x_lo`` a fixed-length power series is used, above ``x_hi`` the
    asymptotic expansion, and in between piecewise Chebyshev interpolation in
    log x of the non-oscillating part (the residue term is added exactly).
    """

    def __init__(self, alpha, beta):
        _check_order(alpha)
        self.alpha = float(alpha)
        self.beta = float(beta)
        a, b = self.alpha, self.beta
        self.x_lo = SERIES_RADIUS ** a
        self.x_hi = ASYMPTOTIC_RADIUS ** a
        self.has_residue = a > 1.0

        k = np.arange(MAX_TERMS)
        bound = np.exp(a * k * math.log(SERIES_RADIUS) - sp.gammaln(np.maximum(a * k + b, 1e-300)))
        nser = int(np.argmax((bound < 1e-20) & (a * k + b > 1))) + 1
        self.series_coef = ((-1.0) ** k[:nser]) * sp.rgamma(a * k[:nser] + b)

        kmax = int(math.ceil(1.1 * ASYMPTOTIC_RADIUS / a)) + 5
        k = np.arange(1, kmax + 1)
        env = np.exp(sp.gammaln(np.maximum(a * k - b + 1.0, 1e-300)) - k * math.log(self.x_hi))
        nasy = int(np.argmin(env)) + 1
        # -(-x)^-k / Gamma(b - a k), stored as coefficients of (1/x)^k
        self.asym_coef = -((-1.0) ** k[:nasy]) * sp.rgamma(b - a * k[:nasy])

        dist = math.pi * min(abs(a - 1.0), 1.0)
        self.h = max(min(0.5, 0.5 * dist), 0.02)
        self.y0 = math.log(self.x_lo)
        span = math.log(self.x_hi) - self.y0
        self.npanels = int(math.ceil(span / self.h))
        self.h = span / self.npanels
        nodes = np.cos(np.pi * (np.arange(_TABLE_DEGREE + 1) + 0.5) / (_TABLE_DEGREE + 1))
        y = self.y0 + self.h * (np.arange(self.npanels)[:, None] + 0.5 * (1.0 + nodes[None, :]))
        x = np.exp(y).ravel()
        vals = mittag_leffler(a, b, -x)
        if self.has_residue:
            vals = vals - _residue(a, b, x)
        vals = vals.reshape(self.npanels, _TABLE_DEGREE + 1)
        self.cheb = np.polynomial.chebyshev.chebfit(nodes, vals.T, _TABLE_DEGREE).T.copy()

    def __call__(self, x):
        from . import kernels

        x = np.ascontiguousarray(x, dtype=float)
        return kernels.ml_table_eval(self, x)


@lru_cache(maxsize=64)
def ml_table(alpha, beta):
    return MLTable(alpha, beta)
