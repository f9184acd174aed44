"""
Necessity witnesses: parametric families whose exact norm laws make the
interpolation (or embedding) ratio blow up outside the admissible region.

The dilation witness follows the single-annulus function along k -> +inf or
k -> -inf; the modulation witness stacks N modulated bumps and lets N grow.
"""
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.components.norm_laws import annulus_norm, modulation_norm
from src.config import config
from src.exception import DegenerateInput, ExponentMismatch, ToolkitError, customException
from src.exponents import Mode, ParamTuple, common_necessary, integrability_gap, smoothness_gap, star_values
from src.grid import GridGeometry, annulus_function, dilate_pow2
from src.logger import logging
from src.spaces import Scale
from src.utils import artifact_metadata, write_csv, write_json

DILATION = "dilation"
MODULATION = "modulation"
UP = "up"
DOWN = "down"


def dilation_direction(t: ParamTuple, homogeneous: bool = False) -> Tuple[str, Fraction]:
    """Direction along which the dilation ratio grows, and its rate per dyadic step.

    Upward the ratio behaves like 2^{k((s - n/p) - (s* - n/p*))}. Downward it
    behaves like 2^{|k| (n/p - n/p*)} for inhomogeneous spaces and like
    2^{|k| (s* - s - n/p* + n/p)} for homogeneous ones.
    """
    gs, gp = smoothness_gap(t), integrability_gap(t)
    if gp - gs > 0:
        return UP, gp - gs
    down = gs - gp if homogeneous else -gp
    if down > 0:
        return DOWN, down
    raise DegenerateInput(f"no dilation direction separates the norms of {t.key()}")


def modulation_exponent(t: ParamTuple, embedding: bool = False) -> Fraction:
    """Growth rate in N of the modulation ratio with a_j = 2^{-js}.

    For an interpolation triple it is 1/r - 1/r*; for an embedding of the first
    endpoint into the second it is 1/r2 - 1/r1.
    """
    if embedding:
        if t.s1 != t.s2:
            raise ExponentMismatch("the modulation witness for embeddings needs s1 = s2")
        return t.r2.reciprocal - t.r1.reciprocal
    if not (t.s == t.s1 == t.s2):
        raise ExponentMismatch("the modulation witness for interpolation needs s = s1 = s2")
    return t.r.reciprocal - star_values(t).r_star_recip


def fit_exponent(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Least-squares slope of y against x and the RMS residual."""
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), residual


@dataclass
class WitnessReport:
    tuple_json: Dict[str, Any]
    family: str
    direction: str
    indices: List[int]
    ratios: List[float]
    fitted_exponent: float
    predicted_exponent: Fraction
    residual: float
    monotone: bool
    fit_tolerance: float
    fit_residual: float
    necessary_region: Optional[bool]
    scale: str = "B"
    homogeneous: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        pred = float(self.predicted_exponent)
        if pred <= 0 or not self.monotone:
            return False
        return (abs(self.fitted_exponent - pred) <= self.fit_tolerance * abs(pred)
                and self.residual < self.fit_residual)

    def rows(self) -> List[Dict[str, Any]]:
        return [{"index": i, "ratio": r, "log2_ratio": math.log2(r)} for i, r in zip(self.indices, self.ratios)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tuple": self.tuple_json,
            "family": self.family,
            "direction": self.direction,
            "scale": self.scale,
            "homogeneous": self.homogeneous,
            "indices": self.indices,
            "ratios": self.ratios,
            "fitted_exponent": self.fitted_exponent,
            "predicted_exponent": str(self.predicted_exponent),
            "residual": self.residual,
            "monotone": self.monotone,
            "necessary_region": self.necessary_region,
            "passed": self.passed,
            "metadata": self.metadata,
        }


def _norms_ratio(values: Tuple[float, float, float], theta: Fraction) -> float:
    top, a, b = values
    # the ratio sequence is fitted in log2, so a zero anywhere is degenerate
    if 0.0 in values or not all(math.isfinite(v) for v in values):
        raise DegenerateInput(f"witness norms {values} are not finite and nonzero")
    th = float(theta)
    return top / (a ** (1.0 - th) * b ** th)


def _embedding_ratio(src: float, dst: float) -> float:
    if src == 0.0 or not math.isfinite(src):
        raise DegenerateInput(f"source norm is {src}")
    if dst == 0.0 or not math.isfinite(dst):
        raise DegenerateInput(f"target norm is {dst}")
    return dst / src


def _endpoint_params(t: ParamTuple):
    return ((t.s, t.p, t.q, t.r), (t.s1, t.p1, t.q1, t.r1), (t.s2, t.p2, t.q2, t.r2))


@dataclass
class WitnessConfig:
    report_dir: str = os.path.join(config.output.out_dir, "witness")
    steps: int = config.audit.witness_steps
    fit_tolerance: float = config.audit.fit_tolerance
    fit_residual: float = config.audit.fit_residual


class WitnessSearch:
    def __init__(self, witness_config: Optional[WitnessConfig] = None):
        self.config = witness_config or WitnessConfig()

    def dilation_ratios(self, t: ParamTuple, ks: List[int], scale: Scale, homogeneous: bool) -> List[float]:
        f0 = annulus_function(GridGeometry.annulus_default(t.n))
        ratios = []
        for k in ks:
            g = dilate_pow2(f0, k)
            values = tuple(annulus_norm(g, s, p, q, r, scale, homogeneous).value
                           for s, p, q, r in _endpoint_params(t))
            ratios.append(_norms_ratio(values, t.theta))
        return ratios

    def modulation_ratios(self, t: ParamTuple, counts: List[int], scale: Scale, embedding: bool) -> List[float]:
        ratios = []
        for count in counts:
            js = np.arange(1, count + 1)
            if embedding:
                a = 2.0 ** (-js * float(t.s1))
                src = modulation_norm(a, t.s1, t.p1, t.q1, t.r1, scale).value
                dst = modulation_norm(a, t.s2, t.p2, t.q2, t.r2, scale).value
                ratios.append(_embedding_ratio(src, dst))
            else:
                a = 2.0 ** (-js * float(t.s))
                values = tuple(modulation_norm(a, s, p, q, r, scale).value
                               for s, p, q, r in _endpoint_params(t))
                ratios.append(_norms_ratio(values, t.theta))
        return ratios

    def initiate_witness(self, t: ParamTuple, family: str = DILATION, scale: Union[Scale, str] = Scale.B,
                         homogeneous: bool = False, embedding: bool = False, steps: Optional[int] = None,
                         force: bool = False, write: bool = False, fmt: str = "json",
                         name: Optional[str] = None) -> WitnessReport:
        """Ratio sequence over the requested number of steps, fitted against log2 of the step parameter."""
        scale = Scale(scale)
        steps = self.config.steps if steps is None else steps
        if steps < 2:
            raise ValueError("a witness needs at least two steps to fit an exponent")
        mode = Mode.HOMOGENEOUS if homogeneous else Mode.INHOMOGENEOUS
        inside = common_necessary(t, mode)
        logging.info(f"Starting {family} witness for {t.key()} ({scale.value}, homogeneous={homogeneous})")

        if family == DILATION:
            if inside and not force:
                raise ExponentMismatch(f"{t.key()} satisfies the necessary condition; pass force=True to run anyway")
            try:
                direction, predicted = dilation_direction(t, homogeneous)
            except DegenerateInput:
                if not force:
                    raise
                direction, predicted = UP, integrability_gap(t) - smoothness_gap(t)
            ks = list(range(1, steps + 1)) if direction == UP else [-m for m in range(steps)]
            ratios = self.dilation_ratios(t, ks, scale, homogeneous)
            x = np.array([abs(k) for k in ks], dtype=float)
            indices = ks
            geometry = GridGeometry.annulus_default(t.n)
        elif family == MODULATION:
            predicted = modulation_exponent(t, embedding)
            if predicted <= 0 and not force:
                raise ExponentMismatch(f"modulation ratio does not grow for {t.key()}; pass force=True to run anyway")
            direction = UP
            indices = list(range(1, steps + 1))
            ratios = self.modulation_ratios(t, indices, scale, embedding)
            x = np.log2(np.array(indices, dtype=float))
            geometry = GridGeometry.modulation_default()
        else:
            raise ValueError(f"unknown witness family {family!r}")

        y = np.log2(np.array(ratios))
        fitted, residual = fit_exponent(x, y)
        monotone = bool(np.all(np.diff(y) > 0))
        report = WitnessReport(
            tuple_json=t.to_json(), family=family, direction=direction, indices=indices, ratios=ratios,
            fitted_exponent=fitted, predicted_exponent=predicted, residual=residual, monotone=monotone,
            fit_tolerance=self.config.fit_tolerance, fit_residual=self.config.fit_residual,
            necessary_region=None if embedding else inside, scale=scale.value, homogeneous=homogeneous,
            metadata=artifact_metadata(geometry, seed=config.audit.seed, embedding=embedding),
        )
        logging.info(f"{family} witness: fitted {fitted:.6f} vs predicted {predicted}, "
                     f"residual {residual:.2e}, passed={report.passed}")
        if write:
            self.write_report(report, name or family, fmt)
        return report

    def write_report(self, report: WitnessReport, name: str, fmt: str = "json") -> str:
        try:
            os.makedirs(self.config.report_dir, exist_ok=True)
            if fmt == "csv":
                return write_csv(os.path.join(self.config.report_dir, f"{name}.csv"), report.rows(),
                                 sort_by=("index",))
            return write_json(os.path.join(self.config.report_dir, f"{name}.json"), report.to_dict())
        except ToolkitError:
            raise
        except Exception as e:
            raise customException(e, sys)
