"""
Exact norm laws behind the necessity arguments.

Two constructions have closed-form norms on the grid:

* dyadic dilates of the single-annulus function, whose spectrum sits in the
  plateau of exactly one band, so every F/B norm collapses to one Lorentz norm;
* modulated bumps under the necessity family, whose bands are the individual
  bumps, so the norm factors into an l^r norm times ||psi^vee||_{L^{p,q}}.

The stage class below checks both laws over a parameter grid and also runs the
bank-level equivalence checks between the F, H and W scales.
"""
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import config
from src.exception import DegenerateInput, customException
from src.exponents import ExtendedExponent, Rational, as_fraction
from src.grid import (FunctionBank, GridGeometry, SampledFunction, annulus_function, bump_transform,
                      dilate_pow2, modulated_bump)
from src.littlewood_paley import FamilyKind, MultiplierFamily, build_family, cached_family, geometric_range
from src.logger import logging
from src.lorentz import level_profile, lorentz_norm, lr_norm
from src.spaces import (NormResult, Scale, SpaceSpec, besov_norm, sobolev_lorentz_norm, space_norm, tl_norm,
                        wk_norm)
from src.utils import artifact_metadata, write_csv, write_json


@lru_cache(maxsize=64)
def annulus_family(geometry: GridGeometry, homogeneous: bool = False) -> MultiplierFamily:
    """Family for dilates of the single-annulus function.

    On a rescaled grid whose Nyquist frequency drops below 2 the inhomogeneous
    range [0, j_max] is empty; psi_0 alone still covers every resolved frequency.
    """
    if homogeneous:
        return build_family(FamilyKind.HOMOGENEOUS, geometry)
    _, j_max = geometric_range(geometry)
    return build_family(FamilyKind.INHOMOGENEOUS, geometry, j_range=(0, max(j_max, 0)))


def _scale(scale: Union[Scale, str]) -> Scale:
    scale = Scale(scale)
    if scale not in (Scale.F, Scale.B):
        raise ValueError(f"norm laws are stated for the F and B scales, got {scale.value}")
    return scale


def annulus_norm(g: SampledFunction, s: Rational, p, q, r, scale: Union[Scale, str] = Scale.B,
                 homogeneous: bool = False) -> NormResult:
    """F or B norm of a dilate of the single-annulus function on its own grid."""
    scale = _scale(scale)
    fam = annulus_family(g.geometry, homogeneous)
    evaluate = tl_norm if scale is Scale.F else besov_norm
    return evaluate(g, s, p, q, r, homogeneous, fam)


def dilation_prediction(base: float, k: int, s: Rational, p, n: int, homogeneous: bool = False) -> float:
    """2^{-kn/p} base for k <= 0, 2^{k(s - n/p)} base for k >= 1; homogeneous spaces use the second form for all k."""
    inv_p = float(ExtendedExponent.of(p).reciprocal)
    if k <= 0 and not homogeneous:
        return 2.0 ** (-k * n * inv_p) * base
    return 2.0 ** (k * (float(as_fraction(s)) - n * inv_p)) * base


def dilation_norm_law(f0: SampledFunction, k: int, s: Rational, p, q, r,
                      scale: Union[Scale, str] = Scale.B, homogeneous: bool = False) -> Tuple[float, float]:
    """(predicted, computed) norm of f0(2^k x) in F^{s,r}_{p,q} or B^{s,r}_{p,q}."""
    base = lorentz_norm(level_profile(f0), p, q)
    predicted = dilation_prediction(base, k, s, p, f0.n, homogeneous)
    g = dilate_pow2(f0, k)
    computed = annulus_norm(g, s, p, q, r, scale, homogeneous).value
    return predicted, computed


def _necessity(geometry: GridGeometry, eps: Fraction) -> MultiplierFamily:
    return cached_family(FamilyKind.NECESSITY.value, geometry, str(eps))


def _modulation_setup(eps: Optional[Rational], geometry: Optional[GridGeometry]) -> Tuple[Fraction, GridGeometry]:
    eps = as_fraction(eps if eps is not None else config.family.necessity_epsilon)
    return eps, geometry or GridGeometry.modulation_default()


def modulation_norm_law(a: Sequence[complex], s: Rational, p, q, r, eps: Optional[Rational] = None,
                        geometry: Optional[GridGeometry] = None) -> float:
    """||{2^{js} a_j}||_{l^r} ||psi^vee||_{L^{p,q}} with a_j indexed from j = 1."""
    eps, geometry = _modulation_setup(eps, geometry)
    js = np.arange(1, len(a) + 1, dtype=float)
    weighted = 2.0 ** (js * float(as_fraction(s))) * np.abs(np.asarray(a, dtype=np.complex128))
    psi_vee = bump_transform(eps, geometry)
    return lr_norm(weighted, r) * lorentz_norm(level_profile(psi_vee), p, q)


def modulation_norm(a: Sequence[complex], s: Rational, p, q, r, scale: Union[Scale, str] = Scale.F,
                    eps: Optional[Rational] = None, geometry: Optional[GridGeometry] = None) -> NormResult:
    """Homogeneous F or B norm of the modulated bump built from a, under the necessity family."""
    scale = _scale(scale)
    eps, geometry = _modulation_setup(eps, geometry)
    f = modulated_bump(a, eps, geometry)
    evaluate = tl_norm if scale is Scale.F else besov_norm
    return evaluate(f, s, p, q, r, True, _necessity(geometry, eps))


def modulation_check(a: Sequence[complex], s: Rational, p, q, r, scale: Union[Scale, str] = Scale.F,
                     eps: Optional[Rational] = None,
                     geometry: Optional[GridGeometry] = None) -> Tuple[float, float]:
    """(predicted, computed) for a modulated bump."""
    predicted = modulation_norm_law(a, s, p, q, r, eps, geometry)
    computed = modulation_norm(a, s, p, q, r, scale, eps, geometry).value
    return predicted, computed


@dataclass(frozen=True)
class LawCheck:
    kind: str
    params: Dict[str, Any]
    predicted: float
    computed: float

    @property
    def relative_error(self) -> float:
        if self.predicted == self.computed:
            return 0.0
        if not (math.isfinite(self.predicted) and math.isfinite(self.computed)):
            return math.inf
        return abs(self.computed - self.predicted) / abs(self.predicted)

    def to_dict(self) -> Dict[str, Any]:
        row = {"kind": self.kind}
        row.update({k: str(v) for k, v in self.params.items()})
        row.update({"predicted": self.predicted, "computed": self.computed,
                    "relative_error": self.relative_error})
        return row


@dataclass(frozen=True)
class EquivalenceReport:
    """Spread of ||f||_X / ||f||_Y over a bank for two scales that coincide."""

    label: str
    s: str
    p: str
    q: str
    minimum: float
    maximum: float
    constant: float
    members: int

    @property
    def within(self) -> bool:
        return 1.0 / self.constant <= self.minimum and self.maximum <= self.constant

    def to_dict(self) -> Dict[str, Any]:
        return {"label": self.label, "s": self.s, "p": self.p, "q": self.q,
                "minimum": self.minimum, "maximum": self.maximum, "constant": self.constant,
                "members": self.members, "within": self.within}


def sobolev_equivalence(bank: FunctionBank, s: Rational, p, q, constant: float,
                        reference: Union[Scale, str] = Scale.F, homogeneous: bool = False) -> EquivalenceReport:
    """Ratios ||f||_{F^{s,2}_{p,q}} / ||f||_{H^s_{p,q}} (or W^{k,p,q} against H^k_{p,q}) over the bank."""
    reference = Scale(reference)
    s = as_fraction(s)
    if reference is Scale.W and s.denominator != 1:
        raise ValueError("W^{k,p,q} needs an integer order")
    ratios = []
    for f in bank:
        base = sobolev_lorentz_norm(f, s, p, q, homogeneous).value
        if reference is Scale.F:
            top = tl_norm(f, s, p, q, 2, homogeneous).value
        elif reference is Scale.W:
            top = wk_norm(f, int(s), p, q, homogeneous).value
        else:
            raise ValueError(f"no equivalence with H for the {reference.value} scale")
        if base == 0.0 or not math.isfinite(base):
            raise DegenerateInput(f"H^{s} norm of a bank member is {base}")
        ratios.append(top / base)
    label = f"{reference.value}{'dot' if homogeneous else ''}~H"
    return EquivalenceReport(label, str(s), str(ExtendedExponent.of(p)), str(ExtendedExponent.of(q)),
                             float(min(ratios)), float(max(ratios)), float(constant), len(ratios))


@dataclass(frozen=True)
class EmbeddingReport:
    """Bank estimate of the constant C in ||f||_target <= C ||f||_source."""

    source: str
    target: str
    constant: float
    minimum: float
    members: int
    seed: int

    def to_dict(self) -> Dict[str, Any]:
        return {"source": self.source, "target": self.target, "constant": self.constant,
                "minimum": self.minimum, "members": self.members, "seed": self.seed}


def embedding_constant(bank: FunctionBank, source: SpaceSpec, target: SpaceSpec) -> EmbeddingReport:
    """Largest ||f||_target / ||f||_source over the bank."""
    ratios = []
    for f in bank:
        base = space_norm(f, source).value
        if base == 0.0 or not math.isfinite(base):
            raise DegenerateInput(f"{source.label()} norm of a bank member is {base}")
        ratios.append(space_norm(f, target).value / base)
    if not ratios:
        raise DegenerateInput("embedding constant over an empty bank")
    return EmbeddingReport(source.label(), target.label(), float(max(ratios)), float(min(ratios)),
                           len(ratios), bank.spec.seed)


@dataclass
class NormLawReport:
    checks: List[LawCheck]
    tolerance: float
    equivalences: List[EquivalenceReport] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def max_relative_error(self) -> float:
        return max((c.relative_error for c in self.checks), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_relative_error <= self.tolerance and all(e.within for e in self.equivalences)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_relative_error": self.max_relative_error,
            "checks": [c.to_dict() for c in self.checks],
            "equivalences": [e.to_dict() for e in self.equivalences],
            "metadata": self.metadata,
        }


@dataclass
class NormLawConfig:
    report_dir: str = os.path.join(config.output.out_dir, "norm_laws")
    k_range: Tuple[int, int] = (-3, 4)
    tolerance: float = 1e-6


class NormLawAudit:
    def __init__(self, law_config: Optional[NormLawConfig] = None):
        self.config = law_config or NormLawConfig()

    def dilation_checks(self, points: Sequence[Tuple], n: int = 1) -> List[LawCheck]:
        f0 = annulus_function(GridGeometry.annulus_default(n))
        lo, hi = self.config.k_range
        checks = []
        for s, p, q, r in points:
            scales = [Scale.B] if ExtendedExponent.of(p).is_infinite else [Scale.B, Scale.F]
            for scale in scales:
                for k in range(lo, hi + 1):
                    predicted, computed = dilation_norm_law(f0, k, s, p, q, r, scale)
                    params = {"scale": scale.value, "n": n, "k": k, "s": s, "p": p, "q": q, "r": r}
                    checks.append(LawCheck("dilation", params, predicted, computed))
        return checks

    def modulation_checks(self, patterns: Sequence[Tuple]) -> List[LawCheck]:
        checks = []
        for a, (s, p, q, r) in patterns:
            predicted, computed = modulation_check(a, s, p, q, r)
            params = {"scale": "Fdot", "length": len(a), "s": s, "p": p, "q": q, "r": r,
                      "a": ";".join(f"{complex(c):.6g}" for c in a)}
            checks.append(LawCheck("modulation", params, predicted, computed))
        return checks

    def initiate_norm_law_audit(self, points: Optional[Sequence[Tuple]] = None,
                                patterns: Optional[Sequence[Tuple]] = None,
                                equivalence_bank: Optional[FunctionBank] = None,
                                write: bool = True, fmt: str = "json") -> NormLawReport:
        from src.components.fixtures import EQUIVALENCE_SETTINGS, LAW_GRID, SOBOLEV_CONSTANT, modulation_patterns

        logging.info("Starting norm law audit")
        points = LAW_GRID if points is None else points
        patterns = modulation_patterns() if patterns is None else patterns

        checks = self.dilation_checks(points)
        logging.info(f"dilation law: {len(checks)} checks over k in {self.config.k_range}")
        checks += self.modulation_checks(patterns)

        equivalences = []
        if equivalence_bank is not None:
            for s, p, q in EQUIVALENCE_SETTINGS:
                equivalences.append(sobolev_equivalence(equivalence_bank, s, p, q, SOBOLEV_CONSTANT))

        report = NormLawReport(
            checks, self.config.tolerance, equivalences,
            artifact_metadata(GridGeometry.annulus_default(1), seed=config.audit.seed,
                              modulation_grid=GridGeometry.modulation_default().to_dict(),
                              bank=None if equivalence_bank is None else equivalence_bank.descriptor()),
        )
        logging.info(f"norm law audit finished: max relative error {report.max_relative_error:.3e}, "
                     f"passed={report.passed}")
        if write:
            try:
                os.makedirs(self.config.report_dir, exist_ok=True)
                if fmt == "csv":
                    write_csv(os.path.join(self.config.report_dir, "norm_laws.csv"),
                              [c.to_dict() for c in report.checks])
                else:
                    write_json(os.path.join(self.config.report_dir, "norm_laws.json"), report.to_dict())
            except Exception as e:
                raise customException(e, sys)
        return report
