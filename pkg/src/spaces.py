"""
Quasi-norm evaluators for the Triebel-Lizorkin-Lorentz, Besov-Lorentz and
Sobolev-Lorentz scales on sampled functions.

Homogeneous norms always act on the zero-mean representative, and every
result records that choice together with the family and its defects.
"""
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.config import config
from src.exception import ConventionViolation, GridMismatch, MeanModeViolation, UnresolvedTail
from src.exponents import ExtendedExponent, Rational, as_fraction
from src.grid import SampledFunction, SpectralFunction, to_physical, to_spectral
from src.littlewood_paley import FamilyKind, MultiplierFamily, band_stack, cached_family
from src.lorentz import (level_profile, lorentz_evaluate, lr_norm, pointwise_lr, profile_of_array)


class Scale(str, Enum):
    F = "F"
    B = "B"
    H = "H"
    W = "W"
    L = "L"


@dataclass(frozen=True)
class SpaceSpec:
    """A space label with its parameter slots. Scale L is the plain Lorentz space."""

    scale: Scale
    s: Fraction = Fraction(0)
    p: ExtendedExponent = ExtendedExponent.of(2)
    q: ExtendedExponent = ExtendedExponent.of(2)
    r: ExtendedExponent = ExtendedExponent.of(2)
    homogeneous: bool = False
    k: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "scale", Scale(self.scale))
        object.__setattr__(self, "s", as_fraction(self.s))
        for name in ("p", "q", "r"):
            object.__setattr__(self, name, ExtendedExponent.of(getattr(self, name)))
        if self.scale is Scale.F and self.p.is_infinite:
            raise ConventionViolation("F^{s,r}_{p,q} is defined for p < inf only")
        if self.scale is Scale.H and not (0 < self.p.reciprocal < 1):
            raise ConventionViolation("H^s_{p,q} needs 1 < p < inf")
        if self.scale is Scale.W:
            if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1:
                raise ValueError("W^{k,p,q} needs a positive integer k")

    @classmethod
    def of(cls, scale: Union[Scale, str], s: Rational = 0, p: Any = 2, q: Any = None, r: Any = 2,
           homogeneous: bool = False, k: Optional[int] = None) -> "SpaceSpec":
        return cls(Scale(scale), as_fraction(s), ExtendedExponent.of(p),
                   ExtendedExponent.of(p if q is None else q), ExtendedExponent.of(r), homogeneous, k)

    def label(self) -> str:
        dot = "dot" if self.homogeneous and self.scale is not Scale.L else ""
        if self.scale is Scale.L:
            return f"L[p={self.p},q={self.q}]"
        if self.scale is Scale.W:
            return f"W{dot}[k={self.k},p={self.p},q={self.q}]"
        if self.scale is Scale.H:
            return f"H{dot}[s={self.s},p={self.p},q={self.q}]"
        return f"{self.scale.value}{dot}[s={self.s},p={self.p},q={self.q},r={self.r}]"

    def to_dict(self) -> Dict[str, Any]:
        return {"scale": self.scale.value, "s": str(self.s), "p": str(self.p), "q": str(self.q),
                "r": str(self.r), "homogeneous": self.homogeneous, "k": self.k}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "SpaceSpec":
        return cls.of(payload["scale"], payload.get("s", 0), payload.get("p", 2), payload.get("q"),
                      payload.get("r", 2), bool(payload.get("homogeneous", False)), payload.get("k"))


@dataclass(frozen=True)
class NormResult:
    value: float
    family_id: Optional[str]
    j_range: Optional[Tuple[int, int]]
    truncation_defect: float
    tail_defect: float
    mean_stripped: bool = False
    convention_flag: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "family_id": self.family_id,
            "j_range": list(self.j_range) if self.j_range is not None else None,
            "truncation_defect": self.truncation_defect,
            "tail_defect": self.tail_defect,
            "mean_stripped": self.mean_stripped,
            "convention_flag": self.convention_flag,
        }


def _family(f: SampledFunction, homogeneous: bool, fam: Optional[MultiplierFamily]) -> MultiplierFamily:
    if fam is None:
        kind = FamilyKind.HOMOGENEOUS if homogeneous else FamilyKind.INHOMOGENEOUS
        return cached_family(kind.value, f.geometry)
    if fam.geometry != f.geometry:
        raise GridMismatch("family and function live on different grids")
    if fam.homogeneous != homogeneous:
        raise ValueError(f"{fam.family_id} does not match homogeneous={homogeneous}")
    return fam


def _weighted_bands(f: SampledFunction, s: Fraction, fam: MultiplierFamily) -> np.ndarray:
    js = np.array(list(fam.js()), dtype=float)
    weights = 2.0 ** (js * float(s))
    g = f.zero_mean() if fam.homogeneous else f
    stack = band_stack(g, fam)
    return stack * weights.reshape((-1,) + (1,) * f.n)


def _result(value: float, fam: MultiplierFamily, f: SampledFunction, flag: bool, strict: bool) -> NormResult:
    truncation = fam.truncation_defect(f)
    if strict and truncation > config.family.reconstruct_tolerance:
        raise UnresolvedTail(f"{fam.family_id} leaves {truncation:.3e} of the energy unresolved", truncation)
    return NormResult(value, fam.family_id, fam.j_range, truncation, f.tail_defect(),
                      mean_stripped=fam.homogeneous, convention_flag=flag)


def tl_norm(f: SampledFunction, s: Rational, p, q, r, homogeneous: bool = False,
            fam: Optional[MultiplierFamily] = None, strict: bool = False) -> NormResult:
    """||f||_{F^{s,r}_{p,q}}: Lorentz norm of the pointwise l^r sum of 2^{js} Delta_j f."""
    s = as_fraction(s)
    p, q, r = (ExtendedExponent.of(e) for e in (p, q, r))
    if p.is_infinite:
        raise ConventionViolation("F^{s,r}_{p,q} is defined for p < inf only")
    fam = _family(f, homogeneous, fam)
    aggregate = pointwise_lr(_weighted_bands(f, s, fam), r)
    lv = lorentz_evaluate(profile_of_array(aggregate, f.cell_volume), p, q)
    return _result(lv.value, fam, f, lv.infinite_by_convention, strict)


def besov_norm(f: SampledFunction, s: Rational, p, q, r, homogeneous: bool = False,
               fam: Optional[MultiplierFamily] = None, strict: bool = False) -> NormResult:
    """||f||_{B^{s,r}_{p,q}}: l^r over j of 2^{js} ||Delta_j f||_{L^{p,q}}."""
    s = as_fraction(s)
    p, q, r = (ExtendedExponent.of(e) for e in (p, q, r))
    fam = _family(f, homogeneous, fam)
    flag = False
    per_band = []
    for block in _weighted_bands(f, s, fam):
        lv = lorentz_evaluate(profile_of_array(block, f.cell_volume), p, q)
        flag |= lv.infinite_by_convention
        per_band.append(lv.value)
    return _result(lr_norm(per_band, r), fam, f, flag, strict)


class PotentialKind(str, Enum):
    BESSEL = "bessel"
    RIESZ = "riesz"


def potential_symbol(geometry, s: Rational, kind: Union[PotentialKind, str]) -> np.ndarray:
    """(1 + |xi|^2)^{s/2} or |xi|^s; the Riesz symbol is set to 0 at xi = 0 unless s = 0."""
    s = float(as_fraction(s))
    kind = PotentialKind(kind)
    mag = geometry.frequency_magnitude()
    if kind is PotentialKind.BESSEL:
        return (1.0 + mag ** 2) ** (s / 2)
    if s == 0:
        return np.ones_like(mag)
    out = np.zeros_like(mag)
    nz = mag > 0
    out[nz] = mag[nz] ** s
    return out


def potential(f: SampledFunction, s: Rational, kind: Union[PotentialKind, str] = PotentialKind.BESSEL,
              mean_tolerance: float = 1e-12) -> SampledFunction:
    """J^s f or Lambda^s f as a spectral multiplier."""
    kind = PotentialKind(kind)
    s = as_fraction(s)
    spec = to_spectral(f)
    if kind is PotentialKind.RIESZ and s < 0:
        zero_mode = abs(spec.coefficients.flat[0])
        if zero_mode > mean_tolerance * max(spec.peak(), 1e-300):
            raise MeanModeViolation(
                f"Lambda^{s} needs a zero-mean input; |f^(0)| = {zero_mode:.3e}"
            )
    return to_physical(spec.multiply(potential_symbol(f.geometry, s, kind)))


def _plain_result(value: float, flag: bool, f: SampledFunction, family_id: str, stripped: bool) -> NormResult:
    return NormResult(value, family_id, None, 0.0, f.tail_defect(), mean_stripped=stripped, convention_flag=flag)


def lorentz_space_norm(f: SampledFunction, p, q) -> NormResult:
    lv = lorentz_evaluate(level_profile(f), p, q)
    return _plain_result(lv.value, lv.infinite_by_convention, f, "lorentz", False)


def sobolev_lorentz_norm(f: SampledFunction, s: Rational, p, q, homogeneous: bool = False) -> NormResult:
    """||J^s f||_{L^{p,q}}, or ||Lambda^s f||_{L^{p,q}} on the zero-mean representative."""
    p, q = ExtendedExponent.of(p), ExtendedExponent.of(q)
    if not (0 < p.reciprocal < 1):
        raise ConventionViolation("H^s_{p,q} needs 1 < p < inf")
    kind = PotentialKind.RIESZ if homogeneous else PotentialKind.BESSEL
    g = f.zero_mean() if homogeneous else f
    image = potential(g, s, kind)
    lv = lorentz_evaluate(level_profile(image), p, q)
    return _plain_result(lv.value, lv.infinite_by_convention, f, f"{kind.value}-potential", homogeneous)


def multi_indices(n: int, k: int, exact: bool):
    """Multi-indices alpha in N^n with |alpha| = k (exact) or |alpha| <= k."""
    orders = [k] if exact else range(k + 1)
    for order in orders:
        for alpha in itertools.product(range(order + 1), repeat=n):
            if sum(alpha) == order:
                yield alpha


def derivative(f: SampledFunction, alpha: Tuple[int, ...]) -> SampledFunction:
    """D^alpha f computed spectrally."""
    spec = to_spectral(f)
    symbol = np.ones(f.geometry.shape, dtype=np.complex128)
    for axis_xi, order in zip(f.geometry.frequency_vectors(), alpha):
        if order:
            symbol = symbol * (1j * axis_xi) ** order
    return to_physical(SpectralFunction(f.geometry, spec.coefficients * symbol))


def wk_norm(f: SampledFunction, k: int, p, q, homogeneous: bool = False) -> NormResult:
    """Sum of ||D^alpha f||_{L^{p,q}} over |alpha| <= k, or |alpha| = k when homogeneous."""
    if not isinstance(k, int) or k < 1:
        raise ValueError("W^{k,p,q} needs a positive integer k")
    total, flag = 0.0, False
    for alpha in multi_indices(f.n, k, exact=homogeneous):
        lv = lorentz_evaluate(level_profile(derivative(f, alpha)), p, q)
        total += lv.value
        flag |= lv.infinite_by_convention
    return _plain_result(total, flag, f, "spectral-derivatives", False)


def space_norm(f: SampledFunction, spec: SpaceSpec, fam: Optional[MultiplierFamily] = None) -> NormResult:
    """Dispatch on the scale of a SpaceSpec."""
    if spec.scale is Scale.F:
        return tl_norm(f, spec.s, spec.p, spec.q, spec.r, spec.homogeneous, fam)
    if spec.scale is Scale.B:
        return besov_norm(f, spec.s, spec.p, spec.q, spec.r, spec.homogeneous, fam)
    if spec.scale is Scale.H:
        return sobolev_lorentz_norm(f, spec.s, spec.p, spec.q, spec.homogeneous)
    if spec.scale is Scale.W:
        return wk_norm(f, spec.k, spec.p, spec.q, spec.homogeneous)
    return lorentz_space_norm(f, spec.p, spec.q)


def is_finite_nonzero(result: NormResult) -> bool:
    return result.value > 0 and math.isfinite(result.value)
