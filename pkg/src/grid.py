"""
Sampled functions on the periodic grid [-L, L)^n standing in for R^n (n = 1, 2).

Physical samples sit at x_m = (m - N/2) h with h = 2L/N. Frequencies are
xi = k pi / L for the integer FFT indices k, and the transform pair is scaled so
that Parseval holds exactly:

    sum |f|^2 h^n = sum |c|^2 (pi/L)^n.
"""
import os
import struct
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import config
from src.exception import DomainOverflow, GridMismatch, customException
from src.exponents import Rational, as_fraction
from src.utils import array_digest

MAGIC = b"LPQF"
_HEADER = struct.Struct("<4sBBIqq")


@dataclass(frozen=True)
class GridGeometry:
    """Dimension n, points per axis N (a power of two) and half-period L."""

    n: int
    points: int
    half_period: Fraction

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"only n = 1 or 2 is supported, got {self.n}")
        if self.points < 4 or self.points & (self.points - 1):
            raise ValueError(f"points per axis must be a power of two >= 4, got {self.points}")
        L = as_fraction(self.half_period)
        if L <= 0:
            raise ValueError("half period must be positive")
        object.__setattr__(self, "half_period", L)

    @classmethod
    def default(cls, n: int = 1) -> "GridGeometry":
        if n == 1:
            return cls(1, config.grid.points_1d, as_fraction(config.grid.half_period_1d))
        return cls(2, config.grid.points_2d, as_fraction(config.grid.half_period_2d))

    @classmethod
    def annulus_default(cls, n: int = 1) -> "GridGeometry":
        if n == 1:
            return cls(1, config.grid.annulus_points_1d, as_fraction(config.grid.annulus_half_period_1d))
        return cls(2, config.grid.annulus_points_2d, as_fraction(config.grid.annulus_half_period_2d))

    @classmethod
    def modulation_default(cls) -> "GridGeometry":
        return cls(1, config.grid.modulation_points_1d, as_fraction(config.grid.modulation_half_period_1d))

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points,) * self.n

    @property
    def spacing(self) -> float:
        return float(2 * self.half_period / self.points)

    @property
    def cell_volume_exact(self) -> Fraction:
        return (2 * self.half_period / self.points) ** self.n

    @property
    def cell_volume(self) -> float:
        return float(self.cell_volume_exact)

    @property
    def total_measure(self) -> Fraction:
        return (2 * self.half_period) ** self.n

    @property
    def frequency_step(self) -> float:
        return np.pi / float(self.half_period)

    @property
    def frequency_cell(self) -> float:
        return self.frequency_step ** self.n

    @property
    def nyquist(self) -> float:
        return (self.points // 2) * self.frequency_step

    def rescaled(self, k: int) -> "GridGeometry":
        """Geometry of f(2^k x) when the samples are kept: L becomes L / 2^k."""
        return GridGeometry(self.n, self.points, self.half_period / Fraction(2) ** k)

    def axis(self) -> np.ndarray:
        return _axis(self)

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        return _coordinates(self)

    def frequency_vectors(self) -> Tuple[np.ndarray, ...]:
        return _frequency_vectors(self)

    def frequency_magnitude(self) -> np.ndarray:
        return _frequency_magnitude(self)

    def frequency_indices(self) -> Tuple[np.ndarray, ...]:
        return _frequency_indices(self)

    def sample_indices(self) -> Tuple[np.ndarray, ...]:
        """Integer offsets m - N/2 of the physical samples, per axis."""
        return _sample_indices(self)

    def to_dict(self) -> Dict[str, object]:
        return {"n": self.n, "points": self.points, "half_period": str(self.half_period)}

    @classmethod
    def from_dict(cls, payload: Dict[str, object]) -> "GridGeometry":
        return cls(int(payload["n"]), int(payload["points"]), as_fraction(str(payload["half_period"])))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=64)
def _axis(g: GridGeometry) -> np.ndarray:
    return _frozen((np.arange(g.points) - g.points // 2) * g.spacing)


@lru_cache(maxsize=64)
def _coordinates(g: GridGeometry) -> Tuple[np.ndarray, ...]:
    ax = _axis(g)
    if g.n == 1:
        return (ax,)
    return tuple(_frozen(a) for a in np.meshgrid(ax, ax, indexing="ij"))


@lru_cache(maxsize=64)
def _sample_indices(g: GridGeometry) -> Tuple[np.ndarray, ...]:
    m = np.arange(g.points, dtype=np.int64) - g.points // 2
    if g.n == 1:
        return (_frozen(m),)
    return tuple(_frozen(a) for a in np.meshgrid(m, m, indexing="ij"))


@lru_cache(maxsize=64)
def _frequency_indices(g: GridGeometry) -> Tuple[np.ndarray, ...]:
    k = np.rint(np.fft.fftfreq(g.points, d=1.0 / g.points)).astype(np.int64)
    if g.n == 1:
        return (_frozen(k),)
    return tuple(_frozen(a) for a in np.meshgrid(k, k, indexing="ij"))


@lru_cache(maxsize=64)
def _frequency_vectors(g: GridGeometry) -> Tuple[np.ndarray, ...]:
    return tuple(_frozen(k * g.frequency_step) for k in _frequency_indices(g))


@lru_cache(maxsize=64)
def _frequency_magnitude(g: GridGeometry) -> np.ndarray:
    vecs = _frequency_vectors(g)
    if g.n == 1:
        return _frozen(np.abs(vecs[0]))
    return _frozen(np.sqrt(vecs[0] ** 2 + vecs[1] ** 2))


def _forward_scale(g: GridGeometry) -> float:
    return g.spacing ** g.n * (2 * np.pi) ** (-g.n / 2)


def _outer_strip(indices: Tuple[np.ndarray, ...], bound: float) -> np.ndarray:
    mask = np.zeros(indices[0].shape, dtype=bool)
    for idx in indices:
        mask |= np.abs(idx) >= bound
    return mask


def _strip_fraction() -> float:
    return float(as_fraction(config.grid.tail_strip))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex samples on a grid. Immutable once built."""

    geometry: GridGeometry
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.complex128)
        if arr.shape != self.geometry.shape:
            raise GridMismatch(f"samples of shape {arr.shape} do not fit grid {self.geometry.shape}")
        object.__setattr__(self, "samples", _frozen(arr))

    @property
    def n(self) -> int:
        return self.geometry.n

    @property
    def half_period(self) -> Fraction:
        return self.geometry.half_period

    @property
    def points(self) -> int:
        return self.geometry.points

    @property
    def cell_volume(self) -> float:
        return self.geometry.cell_volume

    def to_spectral(self) -> "SpectralFunction":
        return to_spectral(self)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.samples)

    def peak(self) -> float:
        return float(self.magnitude().max()) if self.samples.size else 0.0

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.cell_volume))

    def mean(self) -> complex:
        return complex(self.samples.mean())

    def scaled(self, c: complex) -> "SampledFunction":
        return SampledFunction(self.geometry, c * self.samples)

    def with_samples(self, samples: np.ndarray) -> "SampledFunction":
        return SampledFunction(self.geometry, samples)

    def zero_mean(self) -> "SampledFunction":
        """Zero-mean representative: the frequency-0 coefficient removed."""
        return SampledFunction(self.geometry, self.samples - self.samples.mean())

    def spatial_tail(self) -> float:
        peak = self.peak()
        if peak == 0.0:
            return 0.0
        bound = (1 - _strip_fraction()) * self.points / 2
        idx = self.geometry.sample_indices()
        strip = _outer_strip(idx, bound)
        return float(self.magnitude()[strip].max() / peak) if strip.any() else 0.0

    def spectral_tail(self) -> float:
        return self.to_spectral().spectral_tail()

    def tail_defect(self) -> float:
        """Largest of the spatial and spectral boundary ratios, relative to the peak."""
        return max(self.spatial_tail(), self.spectral_tail())


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """Coefficients c_k at xi = k pi / L, in FFT order."""

    geometry: GridGeometry
    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coefficients, dtype=np.complex128)
        if arr.shape != self.geometry.shape:
            raise GridMismatch(f"coefficients of shape {arr.shape} do not fit grid {self.geometry.shape}")
        object.__setattr__(self, "coefficients", _frozen(arr))

    def to_physical(self) -> SampledFunction:
        return to_physical(self)

    def multiply(self, symbol: np.ndarray) -> "SpectralFunction":
        return SpectralFunction(self.geometry, self.coefficients * symbol)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2) * self.geometry.frequency_cell))

    def peak(self) -> float:
        return float(np.abs(self.coefficients).max()) if self.coefficients.size else 0.0

    def spectral_tail(self) -> float:
        peak = self.peak()
        if peak == 0.0:
            return 0.0
        bound = (1 - _strip_fraction()) * self.geometry.points / 2
        strip = _outer_strip(self.geometry.frequency_indices(), bound)
        return float(np.abs(self.coefficients)[strip].max() / peak)

    def support_mask(self, threshold: float) -> np.ndarray:
        peak = self.peak()
        if peak == 0.0:
            return np.zeros(self.geometry.shape, dtype=bool)
        return np.abs(self.coefficients) > threshold * peak


def to_spectral(f: SampledFunction) -> SpectralFunction:
    g = f.geometry
    coeffs = np.fft.fftn(np.fft.ifftshift(f.samples)) * _forward_scale(g)
    return SpectralFunction(g, coeffs)


def to_physical(c: SpectralFunction) -> SampledFunction:
    g = c.geometry
    samples = np.fft.fftshift(np.fft.ifftn(c.coefficients)) / _forward_scale(g)
    return SampledFunction(g, samples)


def from_callable(geometry: GridGeometry, fn: Callable[..., np.ndarray]) -> SampledFunction:
    """Sample fn(x_1, ..., x_n) on the physical grid."""
    return SampledFunction(geometry, fn(*geometry.coordinates()))


def from_spectrum(geometry: GridGeometry, fn: Callable[..., np.ndarray]) -> SampledFunction:
    """Build f from its transform evaluated on the frequency grid, fn(xi_1, ..., xi_n)."""
    return to_physical(SpectralFunction(geometry, fn(*geometry.frequency_vectors())))


def _check_tolerance(name: str, ratio: float, tolerance: float, k: int):
    if ratio > tolerance:
        raise DomainOverflow(f"dilation by 2^{k} {name} beyond tolerance ({ratio:.3e} > {tolerance:.1e})")


def _subsample_axis(arr: np.ndarray, axis: int, k: int) -> np.ndarray:
    N = arr.shape[axis]
    m = np.arange(N)
    src = (m - N // 2) * 2 ** k + N // 2
    valid = (src >= 0) & (src < N)
    out = np.zeros_like(arr)
    dst = [slice(None)] * arr.ndim
    dst[axis] = m[valid]
    out[tuple(dst)] = np.take(arr, src[valid], axis=axis)
    return out


def _replicate_axis(arr: np.ndarray, axis: int, kappa: int) -> np.ndarray:
    N = arr.shape[axis]
    m = np.arange(N)
    src = np.floor_divide(m - N // 2, 2 ** kappa) + N // 2
    return np.take(arr, src, axis=axis)


def _along(ndim: int, axis: int, sl: slice) -> Tuple[slice, ...]:
    index = [slice(None)] * ndim
    index[axis] = sl
    return tuple(index)


def _interpolate_axis(arr: np.ndarray, axis: int, kappa: int) -> np.ndarray:
    """Trigonometric interpolant of one axis sampled at x_m / 2^kappa."""
    N = arr.shape[axis]
    M = N * 2 ** kappa
    half = N // 2
    nd = arr.ndim
    coeffs = np.fft.fft(np.fft.ifftshift(arr, axes=axis), axis=axis)
    shape = list(arr.shape)
    shape[axis] = M
    padded = np.zeros(shape, dtype=np.complex128)
    padded[_along(nd, axis, slice(0, half))] = coeffs[_along(nd, axis, slice(0, half))]
    padded[_along(nd, axis, slice(M - half + 1, M))] = coeffs[_along(nd, axis, slice(half + 1, N))]
    # the Nyquist bin is shared between +N/2 and -N/2
    nyquist = coeffs[_along(nd, axis, slice(half, half + 1))] / 2
    padded[_along(nd, axis, slice(half, half + 1))] = nyquist
    padded[_along(nd, axis, slice(M - half, M - half + 1))] = nyquist
    fine = np.fft.fftshift(np.fft.ifft(padded, axis=axis), axes=axis) * (M / N)
    return fine[_along(nd, axis, slice(M // 2 - half, M // 2 + half))]


DILATION_MODES = ("rescale", "resample", "bandlimited")


def dilate_pow2(f: SampledFunction, k: int, mode: str = "rescale",
                tolerance: Optional[float] = None) -> SampledFunction:
    """g(x) = f(2^k x).

    ``rescale`` keeps the samples and shrinks the half-period by 2^k, which is
    exact for every law that only sees the measure and the frequencies.
    ``resample`` keeps the geometry and remaps indices: subsampling for k >= 1,
    block replication for k <= 0. ``bandlimited`` subsamples the same way and
    spreads by evaluating the trigonometric interpolant. The fixed-grid modes
    raise DomainOverflow when the result aliases or leaves the torus.
    """
    k = int(k)
    if k == 0:
        return f
    if mode not in DILATION_MODES:
        raise ValueError(f"unknown dilation mode {mode!r}")
    if mode == "rescale":
        if abs(k) > config.grid.max_dilation:
            raise DomainOverflow(f"|k|={abs(k)} exceeds the configured limit {config.grid.max_dilation}")
        return SampledFunction(f.geometry.rescaled(k), f.samples)

    tol = config.grid.tail_tolerance if tolerance is None else tolerance
    g = f.geometry
    peak = f.peak()
    if peak == 0.0:
        return f
    if k > 0:
        spec = to_spectral(f)
        alias = _outer_strip(g.frequency_indices(), g.points / 2 ** (k + 1))
        _check_tolerance("aliases", float(np.abs(spec.coefficients)[alias].max() / spec.peak()), tol, k)
        out = f.samples
        for axis in range(g.n):
            out = _subsample_axis(out, axis, k)
        return SampledFunction(g, out)

    idx = g.sample_indices()
    outside = _outer_strip(idx, g.points / 2 ** (1 - k))
    if outside.any():
        _check_tolerance("truncates", float(f.magnitude()[outside].max() / peak), tol, k)
    out = f.samples
    for axis in range(g.n):
        out = _replicate_axis(out, axis, -k) if mode == "resample" else _interpolate_axis(out, axis, -k)
    return SampledFunction(g, out)


# Canonical profiles

def _edge(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u, dtype=float)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u) -> np.ndarray:
    """0 for u <= 0, 1 for u >= 1, smooth in between."""
    u = np.asarray(u, dtype=float)
    a = _edge(u)
    b = _edge(1.0 - u)
    return a / (a + b)


def bump_profile(t) -> np.ndarray:
    """e * exp(-1/(1 - t^2)) on |t| < 1, zero elsewhere; equals 1 at t = 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def psi0(xi_magnitude) -> np.ndarray:
    """Equal to 1 on |xi| <= 1 and to 0 on |xi| >= 3/2."""
    return smooth_step(3.0 - 2.0 * np.asarray(xi_magnitude, dtype=float))


def annulus_function(geometry: Optional[GridGeometry] = None, a: Rational = Fraction(19, 25),
                     b: Rational = Fraction(99, 100),
                     profile: Callable = bump_profile) -> SampledFunction:
    """f with f^ a smooth radial bump supported in the open annulus a < |xi| < b."""
    geometry = geometry or GridGeometry.annulus_default(1)
    a, b = as_fraction(a), as_fraction(b)
    if not (Fraction(3, 4) < a < b < 1):
        raise ValueError("the annulus must satisfy 3/4 < a < b < 1")
    centre, width = float(a + b) / 2, float(b - a) / 2
    if geometry.nyquist <= float(b):
        raise DomainOverflow("annulus does not fit under the Nyquist frequency")
    mag = geometry.frequency_magnitude()
    return to_physical(SpectralFunction(geometry, profile((mag - centre) / width)))


def _bump_radius(eps: Fraction, geometry: GridGeometry) -> float:
    if not (0 < eps < Fraction(1, 10)):
        raise ValueError(f"epsilon must lie in (0, 1/10), got {eps}")
    radius = float(eps) - geometry.frequency_step
    if radius <= 0:
        raise DomainOverflow(f"frequency step {geometry.frequency_step:.3e} too coarse for epsilon {eps}")
    return radius


def bump_transform(eps: Rational, geometry: GridGeometry, profile: Callable = bump_profile) -> SampledFunction:
    """psi^vee for the bump psi of radius eps - pi/L centred at the origin."""
    eps = as_fraction(eps)
    radius = _bump_radius(eps, geometry)
    return to_physical(SpectralFunction(geometry, profile(geometry.frequency_magnitude() / radius)))


def modulation_centres(count: int, geometry: GridGeometry) -> List[float]:
    """Grid frequencies nearest to 2^k, k = 1..count."""
    step = geometry.frequency_step
    return [round(2 ** k / step) * step for k in range(1, count + 1)]


def modulated_bump(a: Sequence[complex], eps: Rational, geometry: GridGeometry,
                   profile: Callable = bump_profile) -> SampledFunction:
    """f^(xi) = sum_k a_k psi(xi - c_k e_1), k = 1..len(a), with c_k on the grid next to 2^k."""
    eps = as_fraction(eps)
    radius = _bump_radius(eps, geometry)
    centres = modulation_centres(len(a), geometry)
    if centres and centres[-1] + float(eps) >= geometry.nyquist:
        raise DomainOverflow(f"2^{len(a)} + eps does not fit under the Nyquist frequency {geometry.nyquist:.3f}")
    vecs = geometry.frequency_vectors()
    coeffs = np.zeros(geometry.shape, dtype=np.complex128)
    for a_k, c_k in zip(a, centres):
        if a_k == 0:
            continue
        dist2 = (vecs[0] - c_k) ** 2
        for v in vecs[1:]:
            dist2 = dist2 + v ** 2
        coeffs += a_k * profile(np.sqrt(dist2) / radius)
    return to_physical(SpectralFunction(geometry, coeffs))


# Function banks

BANK_FAMILIES = ("compact-bandlimited", "gaussian-orbit", "indicator-sums", "random-bandlimited", "single-annulus")
BANK_ALIASES = {"remark31": "single-annulus"}


def canonical_family(family: str) -> str:
    return BANK_ALIASES.get(family, family)


@dataclass(frozen=True)
class BankSpec:
    family: str
    count: int
    n: int = 1
    seed: int = 0
    points: Optional[int] = None
    half_period: Optional[str] = None
    tail_tolerance: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))

    def geometry(self) -> GridGeometry:
        base = GridGeometry.annulus_default(self.n) if self.family == "single-annulus" else GridGeometry.default(self.n)
        return GridGeometry(
            self.n,
            self.points or base.points,
            as_fraction(self.half_period) if self.half_period is not None else base.half_period,
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "family": self.family, "count": self.count, "n": self.n, "seed": self.seed,
            "points": self.points, "half_period": self.half_period, "tail_tolerance": self.tail_tolerance,
        }


@dataclass(frozen=True, eq=False)
class FunctionBank:
    spec: BankSpec
    geometry: GridGeometry
    members: Tuple[SampledFunction, ...]
    tail_defects: Tuple[float, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i: int) -> SampledFunction:
        return self.members[i]

    def digest(self) -> str:
        return array_digest(m.samples for m in self.members)

    def descriptor(self) -> Dict[str, object]:
        return {
            "spec": self.spec.to_dict(),
            "grid": self.geometry.to_dict(),
            "digest": self.digest(),
            "max_tail_defect": max(self.tail_defects) if self.tail_defects else 0.0,
        }


def _gaussian_orbit(spec: BankSpec, g: GridGeometry, rng: np.random.Generator) -> List[np.ndarray]:
    r2 = sum(c ** 2 for c in g.coordinates())
    ks = [i - spec.count // 2 for i in range(spec.count)]
    return [np.exp(-(4.0 ** k) * r2 / 2) for k in ks]


def _indicator_sums(spec: BankSpec, g: GridGeometry, rng: np.random.Generator) -> List[np.ndarray]:
    N = g.points
    out = []
    for _ in range(spec.count):
        arr = np.zeros(g.shape)
        for _ in range(int(rng.integers(1, 5))):
            box = []
            for _ in range(g.n):
                length = int(rng.integers(1, max(2, N // 16)))
                start = int(rng.integers(N // 4, 3 * N // 4 - length))
                box.append(slice(start, start + length))
            arr[tuple(box)] += int(rng.integers(1, 6))
        out.append(arr)
    return out


def _wave_packets(spec: BankSpec, g: GridGeometry, rng: np.random.Generator, width_range: Tuple[float, float],
                  centre_box: float, speed_range: Tuple[float, float]) -> List[np.ndarray]:
    """Sums of three Gaussian wave packets with seeded widths, centres and carriers."""
    coords = g.coordinates()
    out = []
    for _ in range(spec.count):
        arr = np.zeros(g.shape, dtype=np.complex128)
        for _ in range(3):
            width = rng.uniform(*width_range)
            centre = rng.uniform(-centre_box, centre_box, size=g.n)
            speed = rng.uniform(*speed_range)
            direction = rng.normal(size=g.n)
            eta = speed * direction / np.linalg.norm(direction)
            amp = complex(rng.normal(), rng.normal())
            r2 = sum((c - x0) ** 2 for c, x0 in zip(coords, centre))
            phase = sum(e * c for e, c in zip(eta, coords))
            arr += amp * np.exp(-r2 / (2 * width ** 2)) * np.exp(1j * phase)
        out.append(arr)
    return out


def _random_bandlimited(spec: BankSpec, g: GridGeometry, rng: np.random.Generator) -> List[np.ndarray]:
    L = float(g.half_period)
    if g.n == 1:
        return _wave_packets(spec, g, rng, (3.0, 5.0), L / 4, (2.5, 4.0))
    return _wave_packets(spec, g, rng, (2.5, 3.0), L / 8, (2.5, 4.0))


def _compact_bandlimited(spec: BankSpec, g: GridGeometry, rng: np.random.Generator) -> List[np.ndarray]:
    # stays on the torus and below the top band along the audit orbit: 2^[-3, 3] in 1D, 2^[-1, 1] in 2D
    if g.n == 1:
        return _wave_packets(spec, g, rng, (0.9, 1.05), 0.4, (5.0, 8.0))
    return _wave_packets(spec, g, rng, (2.1, 2.3), 0.5, (1.9, 2.1))


def _annuli(spec: BankSpec, g: GridGeometry, rng: np.random.Generator) -> List[np.ndarray]:
    out = [annulus_function(g).samples]
    for _ in range(spec.count - 1):
        a = Fraction(int(rng.integers(76, 81)), 100)
        b = Fraction(int(rng.integers(95, 100)), 100)
        out.append(annulus_function(g, a, b).samples)
    return out


_BUILDERS = {
    "compact-bandlimited": _compact_bandlimited,
    "gaussian-orbit": _gaussian_orbit,
    "indicator-sums": _indicator_sums,
    "random-bandlimited": _random_bandlimited,
    "single-annulus": _annuli,
}


def function_bank(spec: BankSpec) -> FunctionBank:
    """Deterministic bank for a seed; every member passes the tail check."""
    if spec.family not in _BUILDERS:
        raise ValueError(f"unknown bank family {spec.family!r}; expected one of {BANK_FAMILIES}")
    if spec.count < 1:
        raise ValueError("bank count must be positive")
    g = spec.geometry()
    rng = np.random.default_rng(spec.seed)
    tol = config.grid.tail_tolerance if spec.tail_tolerance is None else spec.tail_tolerance
    members, defects = [], []
    for i, samples in enumerate(_BUILDERS[spec.family](spec, g, rng)):
        f = SampledFunction(g, samples)
        # simple functions are not band-limited; only their spatial tail is meaningful
        defect = f.spatial_tail() if spec.family == "indicator-sums" else f.tail_defect()
        if defect > tol:
            raise DomainOverflow(f"{spec.family} member {i} has tail defect {defect:.3e} > {tol:.1e}")
        members.append(f)
        defects.append(defect)
    return FunctionBank(spec, g, tuple(members), tuple(defects))


# Serialization

def save_function(file_path: str, f: SampledFunction) -> str:
    """Binary container: header (magic, version, n, N, L as num/den), then little-endian complex64."""
    try:
        dir_path = os.path.dirname(file_path)
        if dir_path:
            os.makedirs(dir_path, exist_ok=True)
        L = f.half_period
        with open(file_path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, 1, f.n, f.points, L.numerator, L.denominator))
            fh.write(f.samples.astype("<c8").tobytes())
        return file_path
    except Exception as e:
        raise customException(e, sys)


def load_function(file_path: str) -> SampledFunction:
    try:
        with open(file_path, "rb") as fh:
            raw = fh.read()
    except Exception as e:
        raise customException(e, sys)
    magic, _version, n, N, num, den = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{file_path} is not a function container")
    g = GridGeometry(n, N, Fraction(num, den))
    payload = np.frombuffer(raw, dtype="<c8", offset=_HEADER.size)
    return SampledFunction(g, payload.astype(np.complex128).reshape(g.shape))


def export_csv(file_path: str, f: SampledFunction, max_points: int = 4096) -> str:
    """Plot-ready CSV of (x..., re, im); refused for large grids."""
    if f.samples.size > max_points:
        raise ValueError(f"grid of {f.samples.size} points is too large for CSV export")
    cols = {f"x{i + 1}": c.ravel() for i, c in enumerate(f.geometry.coordinates())}
    cols["re"] = f.samples.real.ravel()
    cols["im"] = f.samples.imag.ravel()
    try:
        pd.DataFrame(cols).to_csv(file_path, index=False, float_format="%.17g")
        return file_path
    except Exception as e:
        raise customException(e, sys)
