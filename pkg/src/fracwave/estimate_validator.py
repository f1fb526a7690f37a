"""Numerical checks of the smoothing and kernel estimates for the multiplier families.

A fixed probe f only shows how K(t)f decays for that f.  The worst case
over f, which is what the smoothing estimates bound, is reached by probes
dilated to the kernel's own length t^(alpha/2).  The default probes here are
therefore families indexed by a length scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidBeta, WindowViolation
from .spectral_grid import (BoxGeometry, GridFunction, MultiplierKind,
                            box_validity, lp_norm, multiplier_on_modes,
                            realize_kernel)

# probe length must stay within [MIN_CELLS * dx, L / (8 * BOX_SCALE)]
MIN_CELLS = 2.0
BOX_SCALE = 2.0
SLOPE_TOL = 0.10


def _inv(p):
    return 0.0 if p == math.inf else 1.0 / p


def smoothing_rate(family, alpha, p1, p2, N):
    """(predicted slope, lambda) for ||K(t) f||_p2 <~ t^slope ||f||_p1."""
    lam = N * (_inv(p1) - _inv(p2))
    slope = -(alpha / 2) * lam
    return (1.0 + slope if family == "E2" else slope), lam


def admissible(family, alpha, p1, p2, N):
    """(ok, reason) for the index pair under the smoothing estimates."""
    if not (1 < p1 <= p2):
        return False, f"need 1 < p1 <= p2, got p1={p1}, p2={p2}"
    _, lam = smoothing_rate(family, alpha, p1, p2, N)
    if p2 == math.inf:
        if p1 > N / 2:
            return True, "sup-norm bound, p1 > N/2"
        return False, f"sup-norm bound needs p1 > N/2 = {N / 2}"
    if lam == 0:
        return True, "uniform boundedness on L^p"
    lo = {"E1": -math.inf, "E2": 2 / alpha, "Ealpha": 2 - 2 / alpha}[family]
    if lo < lam < 2:
        return True, f"lambda = {lam:.6g} in ({max(lo, 0):.6g}, 2)"
    return False, f"lambda = {lam:.6g} outside ({max(lo, 0):.6g}, 2) for {family}"


# -- probes -------------------------------------------------------------------------

def gaussian_probe(geometry, length):
    r2 = geometry.radius2()
    return GridFunction(geometry, np.broadcast_to(np.exp(-r2 / (2 * length ** 2)), geometry.shape).copy())


def random_probe(seed=0, modes=4):
    """Dilatable random band-limited field: Gaussian envelope times a few random cosines."""
    rng = np.random.default_rng(seed)

    def make(geometry, length):
        d = geometry.dim
        k = rng_k[:, :d]
        ys = [c / length for c in geometry.coords()]
        env = np.exp(-sum(y * y for y in ys) / 2)
        wave = 1.0 + 0.5 * sum(a * np.cos(sum(kj[i] * ys[i] for i in range(d)) + ph)
                               for a, kj, ph in zip(amp, k, phase))
        return GridFunction(geometry, np.broadcast_to(env * wave, geometry.shape).copy())

    amp = rng.uniform(0.2, 1.0, modes)
    rng_k = rng.uniform(-1.5, 1.5, (modes, 3))
    phase = rng.uniform(0, 2 * np.pi, modes)
    return make


def default_geometry(N):
    n = {1: 4096, 2: 1024, 3: 128}[N]
    return BoxGeometry(N, float(n), n)


def log_times(alpha, geometry, count=17, min_cells=MIN_CELLS):
    """Log-spaced times whose kernel length t^(alpha/2) stays resolved and inside the box."""
    lo = (min_cells * geometry.dx) ** (2 / alpha)
    hi = (geometry.L / (8 * BOX_SCALE) * (1 - 1e-9)) ** (2 / alpha)
    return np.geomspace(lo, hi, count)


# -- smoothing rates ---------------------------------------------------------------

@dataclass
class SlopeFit:
    family: str
    alpha: float
    p1: float
    p2: float
    N: int
    times: np.ndarray
    values: np.ndarray
    fitted_slope: float
    predicted_slope: float
    max_ratio_deviation: float
    lam: float = 0.0

    @property
    def relative_error(self):
        d = abs(self.fitted_slope - self.predicted_slope)
        return d / abs(self.predicted_slope) if self.predicted_slope else d

    def passes(self, tol=SLOPE_TOL):
        return self.relative_error <= tol

    @property
    def decades(self):
        return float(np.log10(self.times[-1] / self.times[0]))

    def to_dict(self):
        return {"family": self.family, "alpha": self.alpha, "p1": _jsonable(self.p1), "p2": _jsonable(self.p2),
                "N": self.N, "lambda": self.lam, "times": self.times.tolist(), "values": self.values.tolist(),
                "fitted_slope": self.fitted_slope, "predicted_slope": self.predicted_slope,
                "relative_error": self.relative_error, "max_ratio_deviation": self.max_ratio_deviation,
                "decades": self.decades, "passes": self.passes()}


def _jsonable(p):
    return "inf" if p == math.inf else p


def _fit_line(x, y):
    slope, icpt = np.polyfit(x, y, 1)
    return float(slope), float(icpt)


def validate_smoothing(alpha, p1, p2, family, probe=None, geometry=None, times=None, N=None) -> SlopeFit:
    """Fit the decay of ||family(t) probe||_p2 / ||probe||_p1 in t.

    ``probe`` is either a callable (geometry, length) -> GridFunction, which is
    dilated to length t^(alpha/2) at each t, or a fixed GridFunction.
    """
    if geometry is None:
        geometry = probe.geometry if isinstance(probe, GridFunction) else default_geometry(N or 1)
    N = geometry.dim
    ok, reason = admissible(family, alpha, p1, p2, N)
    if not ok:
        raise WindowViolation(reason)
    if probe is None:
        probe = gaussian_probe
    if times is None:
        times = log_times(alpha, geometry)
    times = np.asarray(times, dtype=float)
    for t in times:
        if not box_validity(alpha, t, geometry.L, BOX_SCALE):
            raise WindowViolation(f"t = {t:.4g} leaves the box-validity window")
    pred, lam = smoothing_rate(family, alpha, p1, p2, N)

    ratios = np.empty_like(times)
    for i, t in enumerate(times):
        f = probe(geometry, t ** (alpha / 2)) if callable(probe) else probe
        kind = MultiplierKind(family, alpha, float(t))
        out = geometry.irfft(geometry.rfft(f.samples) * multiplier_on_modes(kind, geometry))
        ratios[i] = lp_norm(GridFunction(geometry, out), p2) / lp_norm(f, p1)

    lt, lr = np.log(times), np.log(ratios)
    slope, _ = _fit_line(lt, lr)
    b = float(np.mean(lr - pred * lt))
    dev = float(np.max(np.abs(np.expm1(lr - pred * lt - b))))
    return SlopeFit(family, alpha, p1, p2, N, times, ratios, slope, pred, dev, lam)


def boundedness_constants(alpha, family, p, geometry=None, times=None, probe=None):
    """max over t of ||E_{alpha,beta}(t) f||_p / ||f||_p for fixed and dilated probes.

    The multiplier is used without the factor t that the E2 family carries, so
    every family should stay bounded uniformly in t.
    """
    geometry = geometry or default_geometry(1)
    if times is None:
        times = np.geomspace(1e-2, 1e2, 9)
    probe = probe or gaussian_probe
    fixed = probe(geometry, 8 * geometry.dx)
    out = []
    for t in times:
        kind = MultiplierKind(family, alpha, float(t))
        mult = multiplier_on_modes(kind, geometry) / (t if family == "E2" else 1.0)
        vals = []
        for f in (fixed, probe(geometry, max(t ** (alpha / 2), MIN_CELLS * geometry.dx))):
            g = geometry.irfft(geometry.rfft(f.samples) * mult)
            vals.append(lp_norm(GridFunction(geometry, g), p) / lp_norm(f, p))
        out.append(max(vals))
    return np.asarray(times, dtype=float), np.array(out)


def kernel_mass(alpha, geometry, times):
    """L^1 norm of the E_{alpha,alpha} kernel at each t."""
    return np.array([lp_norm(realize_kernel(MultiplierKind("Ealpha", alpha, float(t)), geometry), 1)
                     for t in times])


# -- pointwise kernel bounds -------------------------------------------------------

@dataclass
class KernelReport:
    alpha: float
    N: int
    times: list
    near_constants: list          # per t: smallest C with |K| <= C * near-field shape
    near_constant: float
    near_spread: float            # max/min of the per-t constants
    far_rate: float               # fitted c in exp(-c R^(1/(2-alpha)))
    far_constant: float
    far_decreasing: bool
    far_concave: bool
    peak_slope: float
    peak_predicted: float
    violations: list = field(default_factory=list)

    def to_dict(self):
        return dict(self.__dict__)


def _near_shape(N, alpha, t, r, R):
    if N == 1:
        return np.full_like(r, t ** (-alpha * N / 2))
    if N == 2:
        return t ** -alpha * (1 + np.abs(np.log(R)))
    return r ** (2.0 - N) * t ** -alpha


NOISE_FLOOR = 1e-6     # relative level below which truncated-spectrum ringing dominates


def validate_pointwise_kernel(alpha, geometry: BoxGeometry, t_set) -> KernelReport:
    """Fit the constants in the near-field and far-field kernel bounds.

    Near field (R = |x|^2 t^-alpha < 1): |K| <= C * shape_N(t, x).
    Far field (R >= 1): |K| |x|^N <= C exp(-c R^(1/(2-alpha))).  C is fixed
    at twice the largest |K| |x|^N and c is then the largest rate that still
    covers every sample above the noise floor.  The upper envelope of
    log(|K| |x|^N) against R^(1/(2-alpha)) is reported as a shape diagnostic.
    """
    N = geometry.dim
    t_set = np.asarray(t_set, dtype=float)
    r = np.sqrt(geometry.radius2())
    near_c, peaks, far_z, far_y = [], [], [], []
    violations = []
    for t in t_set:
        if not box_validity(alpha, t, geometry.L):
            violations.append(f"t = {t:.4g} outside the box-validity window")
        K = np.abs(realize_kernel(MultiplierKind("Ealpha", alpha, float(t)), geometry).samples)
        peaks.append(K.max())
        R = r * r * t ** -alpha
        near = (R < 1) & (r > 0)
        if near.any():
            near_c.append(float((K[near] / _near_shape(N, alpha, t, r[near], R[near])).max()))
        far = (R >= 1) & (K > NOISE_FLOOR * K.max())
        far_z.append(R[far] ** (1 / (2 - alpha)))
        far_y.append(np.log(K[far]) + N * np.log(r[far]))

    z = np.concatenate(far_z)
    y = np.concatenate(far_y)
    edges = np.quantile(z, np.linspace(0, 1, 21))
    which = np.clip(np.searchsorted(edges, z, side="right") - 1, 0, edges.size - 2)
    zc, yc = [], []
    for k in range(edges.size - 1):
        sel = np.nonzero(which == k)[0]
        if sel.size:
            j = sel[np.argmax(y[sel])]
            zc.append(z[j])
            yc.append(y[j])
    zc, yc = np.array(zc), np.array(yc)
    far_constant = 2.0 * float(np.exp(y.max()))
    c = float(np.min((math.log(far_constant) - y) / z))
    dy = np.diff(yc)
    decreasing = bool(np.all(dy[len(dy) // 2:] < 0)) if dy.size else True
    concave = bool(np.polyfit(zc, yc, 2)[0] <= 0) if zc.size >= 3 else True

    peak_slope, _ = _fit_line(np.log(t_set), np.log(peaks))
    near_c = np.array(near_c)
    return KernelReport(
        alpha=alpha, N=N, times=[float(t) for t in t_set],
        near_constants=near_c.tolist(), near_constant=float(near_c.max()),
        near_spread=float(near_c.max() / near_c.min()),
        far_rate=float(c), far_constant=far_constant,
        far_decreasing=decreasing, far_concave=concave,
        peak_slope=float(peak_slope), peak_predicted=-alpha * N / 2,
        violations=violations)


# -- combining two decay regimes -----------------------------------------------------

@dataclass
class PoldecCheck:
    ok: bool
    first_violation: int | None
    hypothesis_ok: bool
    first_hypothesis_violation: int | None


def poldec_combine(c1, c2, alpha, beta, constant="sharp"):
    """Bound t -> C (1 + t)^-beta and a checker for norm histories.

    With ``constant="sharp"`` C = 2^beta max(c1, c2), the smallest constant
    that works for every history meeting the hypotheses (min(c1, c2 t^-alpha)
    with c1 = c2 attains it at t = 1).  ``constant="plain"`` uses max(c1, c2).

    The checker tests both the hypotheses (norm <= c1 on [0, 1], norm <= c2
    t^-alpha for t > 0) and the combined bound, and reports the first index
    at which each fails.
    """
    if not (0 < beta <= alpha):
        raise InvalidBeta(f"need 0 < beta <= alpha, got beta={beta}, alpha={alpha}")
    if constant not in ("sharp", "plain"):
        raise ValueError("constant must be 'sharp' or 'plain'")
    C = max(c1, c2) * (2.0 ** beta if constant == "sharp" else 1.0)

    def bound(t):
        return C * (1.0 + np.asarray(t, dtype=float)) ** -beta

    def check(times, values, rtol=1e-12):
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        bad = np.nonzero(v > bound(t) * (1 + rtol))[0]
        with np.errstate(divide="ignore"):
            h = np.where(t <= 1, v > c1 * (1 + rtol), False) | np.where(t > 0, v > c2 * t ** -alpha * (1 + rtol), False)
        hbad = np.nonzero(h)[0]
        return PoldecCheck(bad.size == 0, int(bad[0]) if bad.size else None,
                           hbad.size == 0, int(hbad[0]) if hbad.size else None)

    return bound, check
