"""Periodic boxes, grid functions and Mittag-Leffler Fourier multipliers.

Convention: the box is [-L/2, L/2)^N with n points per side, the discrete
frequencies are xi = 2 pi k / L and the Laplacian has symbol -|xi|^2.  The
multiplier of the family with parameter beta is therefore
E_{alpha,beta}(-|xi|^2 t^alpha); the (2 pi)^2 that appears when the Fourier
transform is written with e^{-2 pi i x.xi} is absorbed into xi here.
"""

from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.special import gamma

from .errors import AliasWarning, GeometryMismatch, InvalidExponent, NonzeroMean
from .kernels import thread_count
from .mittag_leffler import ml_table

FAMILIES = ("E1", "E2", "Ealpha")
DEFAULT_POINTS = {1: 4096, 2: 256, 3: 48}


@dataclass(frozen=True)
class BoxGeometry:
    dim: int
    L: float
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"L must be positive, got {self.L!r}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be even and >= 8, got {self.n!r}")

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def dx(self):
        return self.L / self.n

    @property
    def cell_volume(self):
        return self.dx ** self.dim

    @property
    def volume(self):
        return self.L ** self.dim

    def axis(self):
        return -self.L / 2 + self.dx * np.arange(self.n)

    def coords(self):
        """Tuple of broadcastable coordinate arrays."""
        ax = self.axis()
        return np.meshgrid(*([ax] * self.dim), indexing="ij", sparse=True)

    def radius2(self):
        return sum(c * c for c in self.coords())

    @cached_property
    def mu(self):
        """|xi|^2 on the real-to-complex frequency grid."""
        k = 2 * np.pi * sfft.fftfreq(self.n, d=self.dx)
        kr = 2 * np.pi * sfft.rfftfreq(self.n, d=self.dx)
        axes = [k] * (self.dim - 1) + [kr]
        grids = np.meshgrid(*axes, indexing="ij", sparse=True)
        return sum(g * g for g in grids)

    @cached_property
    def mu_levels(self):
        """(distinct |xi|^2 values, index of each rfft mode into them)."""
        # |k|^2 is an integer times (2 pi / L)^2, so the integers identify levels
        unit = (2 * np.pi / self.L) ** 2
        ints = np.rint(self.mu / unit).astype(np.int64)
        levels, index = np.unique(ints, return_inverse=True)
        return levels * unit, index.reshape(self.mu.shape).astype(np.intp)

    def rfft(self, a):
        return sfft.rfftn(a, workers=thread_count())

    def irfft(self, a):
        return sfft.irfftn(a, s=self.shape, workers=thread_count())


@dataclass(frozen=True)
class GridFunction:
    geometry: BoxGeometry
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.size != self.geometry.n ** self.geometry.dim:
            raise GeometryMismatch(f"expected {self.geometry.n}^{self.geometry.dim} samples, got {s.size}")
        s = s.reshape(self.geometry.shape)
        if not np.isfinite(s).all():
            raise ValueError("grid samples must be finite")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, geometry, fn):
        """Sample fn(*coords) on the grid."""
        vals = fn(*geometry.coords())
        return cls(geometry, np.broadcast_to(vals, geometry.shape).copy())

    def __add__(self, other):
        _same_geometry(self, other)
        return GridFunction(self.geometry, self.samples + other.samples)

    def __mul__(self, c):
        return GridFunction(self.geometry, self.samples * c)

    __rmul__ = __mul__

    def mean(self):
        return float(self.samples.mean())


def _same_geometry(f, g):
    if f.geometry != g.geometry:
        raise GeometryMismatch(f"{f.geometry} != {g.geometry}")


@dataclass(frozen=True)
class MultiplierKind:
    family: str
    alpha: float
    t: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not (1.0 < self.alpha < 2.0):
            raise ValueError(f"alpha must lie in (1, 2), got {self.alpha!r}")
        if not self.t >= 0:
            raise ValueError(f"t must be non-negative, got {self.t!r}")

    @property
    def beta(self):
        return {"E1": 1.0, "E2": 2.0, "Ealpha": self.alpha}[self.family]

    def symbol(self, mu):
        """Multiplier values at |xi|^2 = mu."""
        mu = np.asarray(mu, dtype=float)
        if self.t == 0:
            return np.full(mu.shape, 0.0 if self.family == "E2" else 1.0 / gamma(self.beta))
        vals = ml_table(self.alpha, self.beta)((mu * self.t ** self.alpha).ravel()).reshape(mu.shape)
        return vals * self.t if self.family == "E2" else vals


def box_validity(alpha, t, L, scale=1.0):
    """True while the kernel length t^(alpha/2) * scale stays below L/8."""
    return t ** (alpha / 2) * scale <= L / 8


def _warn_alias(kind, geometry, scale=1.0):
    if not box_validity(kind.alpha, kind.t, geometry.L, scale):
        warnings.warn(
            f"t^(alpha/2)*scale = {kind.t ** (kind.alpha / 2) * scale:.3g} exceeds L/8 = {geometry.L / 8:.3g}",
            AliasWarning, stacklevel=3)


def multiplier_on_modes(kind, geometry):
    """Multiplier on the rfft grid, evaluated once per distinct |xi|^2."""
    levels, index = geometry.mu_levels
    return kind.symbol(levels)[index]


def apply_multiplier(kind: MultiplierKind, f: GridFunction, geometry: BoxGeometry | None = None) -> GridFunction:
    if geometry is not None and geometry != f.geometry:
        raise GeometryMismatch(f"{geometry} != {f.geometry}")
    g = f.geometry
    if kind.t == 0:
        if kind.family == "E1":
            return GridFunction(g, f.samples.copy())
        if kind.family == "E2":
            return GridFunction(g, np.zeros(g.shape))
    _warn_alias(kind, g)
    spec = g.rfft(f.samples) * multiplier_on_modes(kind, g)
    return GridFunction(g, g.irfft(spec))


def delta(geometry: BoxGeometry) -> GridFunction:
    """Discrete delta at the origin with unit integral."""
    s = np.zeros(geometry.shape)
    s[(geometry.n // 2,) * geometry.dim] = 1.0 / geometry.cell_volume
    return GridFunction(geometry, s)


def realize_kernel(kind: MultiplierKind, geometry: BoxGeometry) -> GridFunction:
    """Physical-space kernel of the multiplier, centred at the origin."""
    if not kind.t > 0:
        raise ValueError("kernel realisation needs t > 0")
    return apply_multiplier(kind, delta(geometry))


def integrate(f: GridFunction) -> float:
    return float(f.samples.sum() * f.geometry.cell_volume)


def lp_norm(f: GridFunction, p) -> float:
    if p == math.inf or p == "inf":
        return float(np.abs(f.samples).max())
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise InvalidExponent(f"invalid exponent {p!r}") from None
    if not p >= 1 or math.isnan(p):
        raise InvalidExponent(f"exponent must be >= 1 or inf, got {p!r}")
    a = np.abs(f.samples)
    if p == 1.0:
        return float(a.sum() * f.geometry.cell_volume)
    m = a.max()
    if m == 0:
        return 0.0
    # scale by the max so large p does not overflow
    return float(m * ((a / m) ** p).sum() ** (1.0 / p) * f.geometry.cell_volume ** (1.0 / p))


def spectral_l2_norm(f: GridFunction) -> float:
    """L^2 norm from the Fourier coefficients (discrete Parseval)."""
    g = f.geometry
    F = g.rfft(f.samples)
    w = np.full(F.shape[-1], 2.0)
    w[0] = 1.0
    if g.n % 2 == 0:
        w[-1] = 1.0
    energy = (np.abs(F) ** 2 * w).sum()
    return float(np.sqrt(energy * g.cell_volume / g.n ** g.dim))


def sobolev_neg_norm(f: GridFunction, order: float, p_index) -> float:
    """L^p norm of the inverse transform of |xi|^-order * f_hat, zero mode dropped."""
    if not order > 0:
        raise ValueError("order must be positive")
    scale = np.abs(f.samples).max()
    if abs(f.mean()) > 1e-12 * scale:
        raise NonzeroMean(f"mean {f.mean():.3e} is not zero")
    g = f.geometry
    mu = g.mu
    with np.errstate(divide="ignore"):
        mult = np.where(mu > 0, mu ** (-order / 2), 0.0)
    return lp_norm(GridFunction(g, g.irfft(g.rfft(f.samples) * mult)), p_index)


# -- named data profiles -------------------------------------------------------

def gaussian(geometry, amplitude=1.0, width=1.0, center=0.0):
    c = np.broadcast_to(np.asarray(center, dtype=float), (geometry.dim,))
    return GridFunction.from_function(
        geometry, lambda *xs: amplitude * np.exp(-sum((x - ci) ** 2 for x, ci in zip(xs, c)) / (2 * width ** 2)))


def bump_profile(geometry, amplitude=1.0, radius=1.0):
    from .frac_calculus import bump

    return GridFunction.from_function(
        geometry, lambda *xs: amplitude * bump(np.sqrt(sum(x * x for x in xs)) / radius))


def single_mode(geometry, k=1, amplitude=1.0, axis=0):
    """amplitude * cos(2 pi k x_axis / L)"""
    return GridFunction.from_function(
        geometry, lambda *xs: amplitude * np.cos(2 * np.pi * k * xs[axis] / geometry.L))


PROFILES = {"gaussian": gaussian, "bump": bump_profile, "single_mode": single_mode}


# -- serialisation -------------------------------------------------------------

def dumps_grid(f: GridFunction) -> bytes:
    g = f.geometry
    header = json.dumps({"dim": g.dim, "n": g.n, "L": g.L}, sort_keys=True).encode() + b"\n"
    return header + f.samples.astype("<f8").tobytes()


def loads_grid(data: bytes) -> GridFunction:
    head, _, body = data.partition(b"\n")
    meta = json.loads(head)
    g = BoxGeometry(int(meta["dim"]), float(meta["L"]), int(meta["n"]))
    return GridFunction(g, np.frombuffer(body, dtype="<f8").copy())


def save_grid(f: GridFunction, path):
    with open(path, "wb") as fh:
        fh.write(dumps_grid(f))


def load_grid(path) -> GridFunction:
    with open(path, "rb") as fh:
        return loads_grid(fh.read())


def to_csv(f: GridFunction) -> str:
    if f.geometry.dim != 1:
        raise ValueError("CSV export is only defined for N = 1")
    buf = io.StringIO()
    buf.write("x,value\n")
    for x, v in zip(f.geometry.axis(), f.samples):
        buf.write(f"{float(x)!r},{float(v)!r}\n")
    return buf.getvalue()
