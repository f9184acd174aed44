"""
Standalone oracles for the small lemmas the interpolation proofs rest on:
the weighted sequence interpolation bound, the Bernstein inequality for
band-limited functions and the Lorentz Hölder inequality.
"""
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from src.config import config
from src.exception import EqualSmoothness, NotBandLimited, customException
from src.exponents import ExtendedExponent, Rational, as_fraction
from src.grid import FunctionBank, SampledFunction, dilate_pow2, to_spectral
from src.logger import logging
from src.lorentz import holder_defect, level_profile, lorentz_norm
from src.utils import artifact_metadata, write_json

SEQUENCE_SETTINGS: Tuple[Tuple[str, str, str], ...] = (
    ("0", "1", "1/2"),
    ("-1", "2", "1/3"),
    ("1/2", "-1/2", "3/4"),
)

# (p, p1, p2, q, q1, q2) with 1/p = 1/p1 + 1/p2 and 1/q <= 1/q1 + 1/q2
HOLDER_EXPONENTS: Tuple[Tuple[str, ...], ...] = (
    ("1", "2", "2", "1", "2", "2"),
    ("2", "4", "4", "2", "4", "4"),
    ("4/3", "2", "4", "1", "2", "2"),
    ("2", "4", "4", "inf", "inf", "inf"),
)


def sequence_constant(s1: Rational, s2: Rational, theta: Rational) -> float:
    """C = 1/(1 - 2^{-theta d}) + 1/(1 - 2^{-(1-theta) d}) with d = |s2 - s1|."""
    s1, s2, theta = as_fraction(s1), as_fraction(s2), as_fraction(theta)
    if s1 == s2:
        raise EqualSmoothness("the sequence bound needs s1 != s2")
    if not (0 < theta < 1):
        raise ValueError(f"theta={theta} must lie strictly between 0 and 1")
    d = float(abs(s2 - s1))
    th = float(theta)
    return 1.0 / (1.0 - 2.0 ** (-th * d)) + 1.0 / (1.0 - 2.0 ** (-(1.0 - th) * d))


@dataclass(frozen=True)
class SequenceBound:
    lhs: float
    rhs: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else math.inf)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound * self.rhs * (1.0 + 1e-12)

    def to_dict(self) -> Dict[str, float]:
        return {"lhs": self.lhs, "rhs": self.rhs, "bound": self.bound, "ratio": self.ratio, "holds": self.holds}


def sequence_interp_defect(a: Sequence[float], s1: Rational, s2: Rational, theta: Rational,
                           start: int = 0) -> SequenceBound:
    """sum_j 2^{j s*} |a_j| against (sup 2^{j s1}|a_j|)^{1-theta} (sup 2^{j s2}|a_j|)^theta, j = start, start+1, ..."""
    bound = sequence_constant(s1, s2, theta)
    s1, s2, theta = as_fraction(s1), as_fraction(s2), as_fraction(theta)
    s_star = (1 - theta) * s1 + theta * s2
    mags = np.abs(np.asarray(a, dtype=np.complex128))
    js = np.arange(start, start + mags.size, dtype=float)
    lhs = float(np.sum(2.0 ** (js * float(s_star)) * mags))
    left = float(np.max(2.0 ** (js * float(s1)) * mags, initial=0.0))
    right = float(np.max(2.0 ** (js * float(s2)) * mags, initial=0.0))
    th = float(theta)
    rhs = left ** (1.0 - th) * right ** th
    return SequenceBound(lhs, rhs, bound)


@dataclass(frozen=True)
class SequenceScan:
    s1: str
    s2: str
    theta: str
    count: int
    bound: float
    max_ratio: float
    violations: int

    def to_dict(self) -> Dict[str, Any]:
        return {"s1": self.s1, "s2": self.s2, "theta": self.theta, "count": self.count,
                "bound": self.bound, "max_ratio": self.max_ratio, "violations": self.violations}


def sequence_interp_scan(count: int = 10_000, settings: Sequence[Tuple[str, str, str]] = SEQUENCE_SETTINGS,
                         seed: Optional[int] = None, max_length: int = 24) -> List[SequenceScan]:
    """Random finitely supported sequences against the bound, one scan per (s1, s2, theta)."""
    rng = np.random.default_rng(config.audit.seed if seed is None else seed)
    out = []
    for s1, s2, theta in settings:
        bound = sequence_constant(s1, s2, theta)
        worst, violations = 0.0, 0
        for _ in range(count):
            length = int(rng.integers(1, max_length + 1))
            start = int(rng.integers(-8, 9))
            a = 2.0 ** rng.uniform(-12, 12, size=length)
            a[rng.random(length) < 0.3] = 0.0
            result = sequence_interp_defect(a, s1, s2, theta, start)
            if result.rhs == 0.0:
                continue
            worst = max(worst, result.ratio)
            violations += not result.holds
        out.append(SequenceScan(s1, s2, theta, count, bound, worst, violations))
    return out


def _min_width(f: SampledFunction) -> float:
    width = config.audit.bernstein_min_width
    return f.geometry.frequency_step if width is None else float(width)


def spectral_diameter(f: SampledFunction, threshold: Optional[float] = None) -> float:
    """Diameter of the coefficient support above threshold * peak, floored at the minimum band width."""
    threshold = config.audit.support_threshold if threshold is None else threshold
    spec = to_spectral(f)
    if spec.peak() == 0.0:
        raise NotBandLimited("the zero function has no spectral support")
    if spec.spectral_tail() > threshold:
        raise NotBandLimited(f"spectral support reaches the Nyquist strip (tail {spec.spectral_tail():.3e})")
    mask = spec.support_mask(threshold)
    vecs = f.geometry.frequency_vectors()
    points = np.stack([v[mask] for v in vecs], axis=1)
    if len(points) < 2:
        diameter = 0.0
    elif f.n == 1:
        diameter = float(points[:, 0].max() - points[:, 0].min())
    else:
        try:
            hull = ConvexHull(points)
            diameter = float(pdist(points[hull.vertices]).max())
        except QhullError:
            # collinear support
            diameter = float(pdist(points).max())
    return max(diameter, _min_width(f))


def bernstein_defect(f: SampledFunction, p, q, threshold: Optional[float] = None) -> float:
    """||f||_inf / (d^{n/p} ||f||_{L^{p,q}})."""
    p = ExtendedExponent.of(p)
    d = spectral_diameter(f, threshold)
    norm = lorentz_norm(level_profile(f), p, q)
    return f.peak() / (d ** (f.n * float(p.reciprocal)) * norm)


def bernstein_dilation_spread(f: SampledFunction, p, q, ks: Sequence[int] = range(0, 5),
                              threshold: Optional[float] = None,
                              mode: str = "rescale") -> Tuple[List[float], float]:
    """Defects of the dyadic spectral dilates and their relative spread.

    ``rescale`` moves the torus with the function, so the defect is invariant
    up to rounding. ``resample`` keeps the grid and measures how far the
    sampled diameter and sup norm drift from that invariance.
    """
    defects = [bernstein_defect(dilate_pow2(f, k, mode=mode), p, q, threshold) for k in ks]
    return defects, (max(defects) - min(defects)) / min(defects)


@dataclass(frozen=True)
class HolderAudit:
    exponents: Tuple[str, ...]
    max_defect: float
    pairs: int

    def to_dict(self) -> Dict[str, Any]:
        return {"exponents": list(self.exponents), "max_defect": self.max_defect, "pairs": self.pairs}


def holder_audit(bank: FunctionBank,
                 exponent_sets: Sequence[Tuple[str, ...]] = HOLDER_EXPONENTS) -> List[HolderAudit]:
    """max holder_defect over consecutive bank members, per exponent set."""
    out = []
    for exps in exponent_sets:
        worst = 0.0
        for f, g in zip(bank.members[:-1], bank.members[1:]):
            worst = max(worst, holder_defect(f, g, *exps))
        out.append(HolderAudit(tuple(exps), worst, max(len(bank) - 1, 0)))
    return out


@dataclass
class LemmaReport:
    sequence: List[SequenceScan]
    bernstein_max: Optional[float] = None
    bernstein_spread: Optional[float] = None
    bernstein_grid_spread: Optional[float] = None
    holder: List[HolderAudit] = field(default_factory=list)
    spread_tolerance: float = 1e-6
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if any(s.violations for s in self.sequence):
            return False
        if self.bernstein_max is not None and not math.isfinite(self.bernstein_max):
            return False
        if self.bernstein_spread is not None and self.bernstein_spread > self.spread_tolerance:
            return False
        if self.bernstein_grid_spread is not None and not math.isfinite(self.bernstein_grid_spread):
            return False
        return all(math.isfinite(h.max_defect) for h in self.holder)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "sequence": [s.to_dict() for s in self.sequence],
            "bernstein_max": self.bernstein_max,
            "bernstein_spread": self.bernstein_spread,
            "bernstein_grid_spread": self.bernstein_grid_spread,
            "holder": [h.to_dict() for h in self.holder],
            "metadata": self.metadata,
        }


@dataclass
class LemmaOracleConfig:
    report_path: str = os.path.join(config.output.out_dir, "lemmas", "lemmas.json")
    sequence_count: int = 10_000
    bernstein_p: str = "2"
    bernstein_q: str = "inf"
    spread_tolerance: float = 1e-6


class LemmaOracles:
    def __init__(self, oracle_config: Optional[LemmaOracleConfig] = None):
        self.config = oracle_config or LemmaOracleConfig()

    def initiate_lemma_oracles(self, bank: Optional[FunctionBank] = None, seed: Optional[int] = None,
                               write: bool = False) -> LemmaReport:
        logging.info(f"Starting lemma oracles ({self.config.sequence_count} sequences per setting)")
        seed = config.audit.seed if seed is None else seed
        report = LemmaReport(sequence_interp_scan(self.config.sequence_count, seed=seed),
                             spread_tolerance=self.config.spread_tolerance)
        if bank is not None:
            p, q = self.config.bernstein_p, self.config.bernstein_q
            report.bernstein_max = max(bernstein_defect(f, p, q) for f in bank)
            _, report.bernstein_spread = bernstein_dilation_spread(bank[0], p, q)
            _, report.bernstein_grid_spread = bernstein_dilation_spread(bank[0], p, q, mode="resample")
            report.holder = holder_audit(bank)
            report.metadata = artifact_metadata(bank.geometry, seed=seed, bank=bank.descriptor())
        else:
            report.metadata = artifact_metadata(seed=seed)
        logging.info(f"lemma oracles finished: passed={report.passed}")
        if write:
            try:
                write_json(self.config.report_path, report.to_dict())
            except Exception as e:
                raise customException(e, sys)
        return report
