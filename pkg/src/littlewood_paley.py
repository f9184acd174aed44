"""
Littlewood-Paley multiplier families and the block operators Delta_j.

All families are built by telescoping one frozen psi0 (equal to 1 on |xi| <= 1,
vanishing on |xi| >= 3/2):

    psi_j(xi) = psi0(2^-j xi) - psi0(2^-j+1 xi)

so psi_j is exactly 1 on 3*2^(j-2) <= |xi| <= 2^j and exactly 0 outside
2^(j-1) <= |xi| <= 3*2^(j-1).
"""
import logging
import math
import sys
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from fractions import Fraction
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.config import config
from src.exception import (BandOutOfRange, GridMismatch, GridTooCoarse, PartitionDefect, UnresolvedTail,
                           customException)
from src.exponents import Rational, as_fraction
from src.grid import GridGeometry, SampledFunction, SpectralFunction, psi0, smooth_step, to_physical, to_spectral
from src.lorentz import level_profile, lorentz_norm, profile_of_array

logger = logging.getLogger(__name__)

PSI0_NAME = "telescoped-smoothstep"


class FamilyKind(str, Enum):
    INHOMOGENEOUS = "inhomogeneous"
    HOMOGENEOUS = "homogeneous"
    NECESSITY = "necessity"


def geometric_range(geometry: GridGeometry) -> Tuple[int, int]:
    """Dyadic annuli the grid resolves: 2^(j+1) <= Nyquist and 2^j >= the lowest nonzero frequency."""
    j_max = math.floor(math.log2(geometry.nyquist)) - 1
    j_min = math.floor(math.log2(geometry.frequency_step))
    return j_min, j_max


def necessity_profile(t: np.ndarray, eps: Fraction) -> np.ndarray:
    """phi: 1 on [1 - eps, 1 + eps], 0 outside (1/2 + eps, 2 - eps)."""
    e = float(eps)
    rise = smooth_step((t - (0.5 + e)) / ((1 - e) - (0.5 + e)))
    fall = smooth_step(((2 - e) - t) / ((2 - e) - (1 + e)))
    return rise * fall


@dataclass(frozen=True, eq=False)
class MultiplierFamily:
    kind: FamilyKind
    geometry: GridGeometry
    j_range: Tuple[int, int]
    epsilon: Optional[Fraction] = None
    _symbols: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def family_id(self) -> str:
        eps = f"(eps={self.epsilon})" if self.kind is FamilyKind.NECESSITY else ""
        return f"{self.kind.value}{eps}/{PSI0_NAME}/j=[{self.j_range[0]},{self.j_range[1]}]"

    @property
    def homogeneous(self) -> bool:
        return self.kind is not FamilyKind.INHOMOGENEOUS

    def js(self) -> range:
        return range(self.j_range[0], self.j_range[1] + 1)

    def symbol(self, j: int) -> np.ndarray:
        if j not in self.js():
            raise BandOutOfRange(f"band {j} outside {self.family_id}")
        if j not in self._symbols:
            mag = self.geometry.frequency_magnitude()
            if self.kind is FamilyKind.NECESSITY:
                sym = necessity_profile(mag * 2.0 ** (-j), self.epsilon)
            elif self.kind is FamilyKind.INHOMOGENEOUS and j == 0:
                sym = psi0(mag)
            else:
                sym = psi0(mag * 2.0 ** (-j)) - psi0(mag * 2.0 ** (1 - j))
            sym.setflags(write=False)
            self._symbols[j] = sym
        return self._symbols[j]

    def coverage(self) -> np.ndarray:
        total = np.zeros(self.geometry.shape)
        for j in self.js():
            total = total + self.symbol(j)
        return total

    def resolved_mask(self) -> np.ndarray:
        """Frequencies on which the family must sum to one."""
        mag = self.geometry.frequency_magnitude()
        mask = mag <= 2.0 ** self.j_range[1]
        if self.homogeneous:
            mask &= (mag > 0) & (mag >= 0.75 * 2.0 ** self.j_range[0])
        return mask

    def partition_defect(self) -> float:
        if self.kind is FamilyKind.NECESSITY:
            raise ValueError("the necessity family is not a partition of unity")
        mask = self.resolved_mask()
        return float(np.max(np.abs(self.coverage()[mask] - 1.0)))

    def support_annulus(self, j: int) -> np.ndarray:
        mag = self.geometry.frequency_magnitude()
        if self.kind is FamilyKind.INHOMOGENEOUS and j == 0:
            return mag <= 2.0
        return (mag >= 2.0 ** (j - 1)) & (mag <= 2.0 ** (j + 1))

    def truncation_defect(self, f: SampledFunction) -> float:
        """Relative L^2 energy the truncated family misses."""
        g = f.zero_mean() if self.homogeneous else f
        coeffs = to_spectral(g).coefficients
        total = float(np.sum(np.abs(coeffs) ** 2))
        if total == 0.0:
            return 0.0
        missed = float(np.sum(np.abs((1.0 - self.coverage()) * coeffs) ** 2))
        return math.sqrt(missed / total)

    def export_symbols_csv(self, file_path: str) -> str:
        """Symbols along the positive first axis, one column per band."""
        k = self.geometry.frequency_indices()[0]
        if self.geometry.n == 1:
            pick = k >= 0
            xi = self.geometry.frequency_vectors()[0][pick]
            cols = {"xi": xi}
            for j in self.js():
                cols[f"psi_{j}"] = self.symbol(j)[pick]
        else:
            pick = k[:, 0] >= 0
            xi = self.geometry.frequency_vectors()[0][:, 0][pick]
            cols = {"xi": xi}
            for j in self.js():
                cols[f"psi_{j}"] = self.symbol(j)[:, 0][pick]
        df = pd.DataFrame(cols).sort_values("xi")
        try:
            df.to_csv(file_path, index=False, float_format="%.17g")
            return file_path
        except Exception as e:
            raise customException(e, sys)

    def to_dict(self) -> Dict[str, object]:
        return {"family_id": self.family_id, "kind": self.kind.value,
                "j_range": list(self.j_range), "grid": self.geometry.to_dict(),
                "epsilon": None if self.epsilon is None else str(self.epsilon)}


def build_family(kind: Union[FamilyKind, str], geometry: GridGeometry,
                 epsilon: Optional[Rational] = None,
                 j_range: Optional[Tuple[int, int]] = None) -> MultiplierFamily:
    """Telescoped family on the geometry; the partition of unity is verified here."""
    kind = FamilyKind(kind)
    j_min, j_max = geometric_range(geometry)
    if j_max - j_min + 1 < config.family.min_annuli:
        raise GridTooCoarse(
            f"grid resolves {j_max - j_min + 1} dyadic annuli, at least {config.family.min_annuli} needed"
        )

    eps = None
    if kind is FamilyKind.NECESSITY:
        eps = as_fraction(epsilon if epsilon is not None else config.family.necessity_epsilon)
        if not (0 < eps < Fraction(1, 10)):
            raise ValueError(f"necessity epsilon must lie in (0, 1/10), got {eps}")
        top = math.floor(math.log2(geometry.nyquist / (2 - float(eps))))
        default = (1, top)
    elif kind is FamilyKind.INHOMOGENEOUS:
        default = (0, j_max)
    else:
        default = (j_min, j_max)

    lo, hi = j_range if j_range is not None else default
    if hi < lo:
        raise GridTooCoarse(f"empty band range [{lo}, {hi}] for {kind.value} family")
    if kind is FamilyKind.INHOMOGENEOUS and lo != 0:
        raise ValueError("inhomogeneous families start at j = 0")

    fam = MultiplierFamily(kind, geometry, (lo, hi), eps)
    if kind is not FamilyKind.NECESSITY:
        defect = fam.partition_defect()
        if defect > config.family.partition_tolerance:
            raise PartitionDefect(f"{fam.family_id} misses the partition of unity by {defect:.3e}")
    logger.debug("built %s", fam.family_id)
    return fam


def _check_grid(f: SampledFunction, fam: MultiplierFamily):
    if f.geometry != fam.geometry:
        raise GridMismatch(f"function grid {f.geometry.to_dict()} differs from family grid {fam.geometry.to_dict()}")


def band(f: SampledFunction, j: int, fam: MultiplierFamily) -> SampledFunction:
    """Delta_j f = (psi_j f^)^vee."""
    _check_grid(f, fam)
    return to_physical(to_spectral(f).multiply(fam.symbol(j)))


def band_stack(f: SampledFunction, fam: MultiplierFamily, js: Optional[Iterable[int]] = None) -> np.ndarray:
    """All bands at once, stacked along axis 0 in the order of js."""
    _check_grid(f, fam)
    spec = to_spectral(f)
    js = list(fam.js() if js is None else js)
    out = np.empty((len(js),) + fam.geometry.shape, dtype=np.complex128)
    for i, j in enumerate(js):
        out[i] = to_physical(spec.multiply(fam.symbol(j))).samples
    return out


def reconstruct(f: SampledFunction, fam: MultiplierFamily,
                tolerance: Optional[float] = None) -> SampledFunction:
    """Sum of all bands; equals f (or f minus its mean) when f is resolved."""
    if fam.kind is FamilyKind.NECESSITY:
        raise ValueError("the necessity family does not reconstruct")
    _check_grid(f, fam)
    tol = config.family.reconstruct_tolerance if tolerance is None else tolerance
    target = f.zero_mean() if fam.homogeneous else f
    spec = to_spectral(f)
    out = to_physical(SpectralFunction(fam.geometry, spec.coefficients * fam.coverage()))
    ref = target.l2_norm()
    err = float(np.sqrt(np.sum(np.abs(out.samples - target.samples) ** 2) * f.cell_volume))
    leakage = err / ref if ref > 0 else err
    if leakage > tol:
        raise UnresolvedTail(f"reconstruction misses {leakage:.3e} of the L^2 norm", leakage)
    return out


@dataclass(frozen=True)
class BandBound:
    family_id: str
    p: str
    q: str
    value: float
    member: int
    band: int

    def to_dict(self) -> Dict[str, object]:
        return {"family_id": self.family_id, "p": self.p, "q": self.q,
                "value": self.value, "member": self.member, "band": self.band}


def band_bound(members: Iterable[SampledFunction], fam: MultiplierFamily, p, q) -> BandBound:
    """max_j ||Delta_j f||_{p,q} / ||f||_{p,q} over the members."""
    best = (0.0, -1, fam.j_range[0])
    for i, f in enumerate(members):
        base = lorentz_norm(level_profile(f), p, q)
        if base == 0.0:
            continue
        stack = band_stack(f, fam)
        for j, block in zip(fam.js(), stack):
            ratio = lorentz_norm(profile_of_array(block, f.cell_volume), p, q) / base
            if ratio > best[0]:
                best = (ratio, i, j)
    return BandBound(fam.family_id, str(p), str(q), best[0], best[1], best[2])


@lru_cache(maxsize=32)
def cached_family(kind: str, geometry: GridGeometry, epsilon: Optional[str] = None) -> MultiplierFamily:
    """Shared family per (kind, geometry); symbols are computed once per band."""
    return build_family(kind, geometry, epsilon)
