"""
Interpolation-ratio audits over seeded function banks.

For a triple (X; X1, X2; theta) the ratio ||f||_X / (||f||_X1^(1-theta) ||f||_X2^theta)
is evaluated on every bank member. When all three spaces are homogeneous and
their scaling exponents balance, the ratio is also evaluated along the dyadic
dilation orbit of each member and the spread max/min is reported.
"""
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from src.config import config
from src.exception import ConventionViolation, DegenerateInput, ToolkitError, customException
from src.exponents import ParamTuple, as_fraction
from src.grid import FunctionBank, SampledFunction, dilate_pow2
from src.logger import logging
from src.predicates import Verdict, evaluate
from src.spaces import NormResult, Scale, SpaceSpec, space_norm
from src.utils import artifact_metadata, write_csv, write_json


@dataclass(frozen=True)
class TripleSpec:
    """Target space X, endpoint spaces X1 and X2, and the interpolation parameter."""

    target: SpaceSpec
    left: SpaceSpec
    right: SpaceSpec
    theta: Fraction
    name: str = ""

    def __post_init__(self):
        theta = as_fraction(self.theta)
        if not (0 < theta < 1):
            raise ConventionViolation(f"theta={theta} must lie strictly between 0 and 1")
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_tuple(cls, t: ParamTuple, scale: Union[Scale, str], homogeneous: bool = False,
                   name: str = "") -> "TripleSpec":
        """The triple a theorem on one scale speaks about."""
        def space(s, p, q, r):
            return SpaceSpec.of(scale, s, p, q, r, homogeneous)
        return cls(space(t.s, t.p, t.q, t.r), space(t.s1, t.p1, t.q1, t.r1),
                   space(t.s2, t.p2, t.q2, t.r2), t.theta, name)

    def spaces(self) -> Tuple[SpaceSpec, SpaceSpec, SpaceSpec]:
        return self.target, self.left, self.right

    def scaling_gap(self, n: int) -> Optional[Fraction]:
        """Dilation exponent of the ratio; None when some space is inhomogeneous."""
        def order(sp: SpaceSpec) -> Optional[Fraction]:
            if sp.scale is Scale.L:
                return Fraction(0)
            if not sp.homogeneous:
                return None
            return Fraction(sp.k) if sp.scale is Scale.W else sp.s

        orders = [order(sp) for sp in self.spaces()]
        if any(o is None for o in orders):
            return None
        exps = [o - n * sp.p.reciprocal for o, sp in zip(orders, self.spaces())]
        return exps[0] - ((1 - self.theta) * exps[1] + self.theta * exps[2])

    def scale_invariant(self, n: int) -> bool:
        return self.scaling_gap(n) == 0

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "theta": str(self.theta), "target": self.target.to_dict(),
                "left": self.left.to_dict(), "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "TripleSpec":
        return cls(SpaceSpec.from_dict(payload["target"]), SpaceSpec.from_dict(payload["left"]),
                   SpaceSpec.from_dict(payload["right"]), as_fraction(payload["theta"]),
                   payload.get("name", ""))


@dataclass(frozen=True)
class RatioSample:
    value: float
    norms: Tuple[float, float, float]
    truncation_defect: float
    tail_defect: float


def _checked(result: NormResult, label: str, max_defect: float, denominator: bool) -> float:
    if denominator and (result.value == 0.0 or not math.isfinite(result.value)):
        raise DegenerateInput(f"{label} norm is {result.value}")
    if not math.isfinite(result.value):
        raise DegenerateInput(f"{label} norm is infinite")
    defect = max(result.truncation_defect, result.tail_defect)
    if defect > max_defect:
        raise DegenerateInput(f"{label} norm carries a defect {defect:.3e} > {max_defect:.1e}")
    return result.value


def ratio_sample(f: SampledFunction, spec: TripleSpec, max_defect: Optional[float] = None) -> RatioSample:
    max_defect = config.audit.max_defect if max_defect is None else max_defect
    results = [space_norm(f, sp) for sp in spec.spaces()]
    labels = [sp.label() for sp in spec.spaces()]
    top = _checked(results[0], labels[0], max_defect, denominator=False)
    a = _checked(results[1], labels[1], max_defect, denominator=True)
    b = _checked(results[2], labels[2], max_defect, denominator=True)
    theta = float(spec.theta)
    value = top / (a ** (1.0 - theta) * b ** theta)
    return RatioSample(value, (top, a, b),
                       max(r.truncation_defect for r in results), max(r.tail_defect for r in results))


def interpolation_ratio(f: SampledFunction, spec: TripleSpec, max_defect: Optional[float] = None) -> float:
    """||f||_X / (||f||_{X1}^{1-theta} ||f||_{X2}^theta)."""
    return ratio_sample(f, spec, max_defect).value


def orbit_spread(f: SampledFunction, spec: TripleSpec, orbit: Tuple[int, int],
                 max_defect: Optional[float] = None, mode: Optional[str] = None) -> float:
    """max/min of the ratio over the dilates f(2^k x), k in the orbit.

    The dilates stay on the grid of f by default, so a member that aliases or
    leaves the torus along the orbit raises DomainOverflow.
    """
    lo, hi = orbit
    max_defect = config.audit.max_defect if max_defect is None else max_defect
    mode = config.audit.orbit_mode if mode is None else mode
    values = [interpolation_ratio(dilate_pow2(f, k, mode=mode, tolerance=max_defect), spec, max_defect)
              for k in range(lo, hi + 1)]
    return max(values) / min(values)


def audit_status(theorem_id: Optional[str], t: Optional[ParamTuple]) -> str:
    """verified, evidence (open clause) or unsupported, from the catalog verdict of the triple."""
    if theorem_id is None or t is None:
        return "unchecked"
    verdict = evaluate(theorem_id, t).sufficient
    if verdict is Verdict.TRUE:
        return "verified"
    if verdict is Verdict.OPEN:
        return "evidence"
    return "unsupported"


@dataclass
class AuditReport:
    triple: TripleSpec
    bank: Dict[str, Any]
    seed: int
    rows: List[Dict[str, Any]]
    sup_ratio: float
    orbit_spread: Optional[float]
    max_truncation_defect: float
    max_tail_defect: float
    status: str
    theorem_id: Optional[str] = None
    tuple_json: Optional[Dict[str, Any]] = None
    ratio_limit: Optional[float] = None
    spread_limit: float = 1.01
    orbit_required: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def evaluated(self) -> int:
        return sum(1 for r in self.rows if r["ratio"] is not None)

    @property
    def passed(self) -> bool:
        if self.evaluated == 0 or not math.isfinite(self.sup_ratio):
            return False
        if self.ratio_limit is not None and self.sup_ratio > self.ratio_limit:
            return False
        if self.orbit_spread is not None and self.orbit_spread > self.spread_limit:
            return False
        if self.orbit_required and any(r["ratio"] is not None and r["orbit_spread"] is None for r in self.rows):
            return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "triple": self.triple.to_dict(),
            "theorem_id": self.theorem_id,
            "tuple": self.tuple_json,
            "status": self.status,
            "passed": self.passed,
            "bank": self.bank,
            "seed": self.seed,
            "evaluated": self.evaluated,
            "sup_ratio": self.sup_ratio,
            "orbit_spread": self.orbit_spread,
            "ratio_limit": self.ratio_limit,
            "spread_limit": self.spread_limit,
            "max_truncation_defect": self.max_truncation_defect,
            "max_tail_defect": self.max_tail_defect,
            "rows": self.rows,
            "metadata": self.metadata,
        }


@dataclass
class RatioAuditConfig:
    report_dir: str = os.path.join(config.output.out_dir, "audits")
    orbit: Tuple[int, int] = config.audit.orbit
    orbit_2d: Tuple[int, int] = config.audit.orbit_2d
    orbit_mode: str = config.audit.orbit_mode
    max_defect: float = config.audit.max_defect
    spread_limit: float = config.audit.orbit_spread_limit

    def orbit_for(self, n: int) -> Tuple[int, int]:
        return self.orbit if n == 1 else self.orbit_2d


class RatioAudit:
    def __init__(self, audit_config: Optional[RatioAuditConfig] = None, workers: Optional[int] = None):
        self.config = audit_config or RatioAuditConfig()
        self.workers = config.audit.workers if workers is None else workers

    def _member(self, index: int, f: SampledFunction, spec: TripleSpec, with_orbit: bool) -> Dict[str, Any]:
        """Ratio and orbit spread of one member; DomainOverflow from the orbit propagates."""
        row: Dict[str, Any] = {"member": index, "ratio": None, "orbit_spread": None,
                               "truncation_defect": None, "tail_defect": None, "error": None}
        try:
            sample = ratio_sample(f, spec, self.config.max_defect)
            row.update(ratio=sample.value, truncation_defect=sample.truncation_defect,
                       tail_defect=sample.tail_defect)
            if with_orbit:
                row["orbit_spread"] = orbit_spread(f, spec, self.config.orbit_for(f.geometry.n),
                                                   self.config.max_defect, self.config.orbit_mode)
        except DegenerateInput as e:
            # one degenerate member never aborts the batch
            row["error"] = e.code
            logging.warning(f"member {index} skipped: {e}")
        return row

    def initiate_ratio_audit(self, bank: FunctionBank, spec: TripleSpec, theorem_id: Optional[str] = None,
                             t: Optional[ParamTuple] = None, ratio_limit: Optional[float] = None,
                             write: bool = False, fmt: str = "json") -> AuditReport:
        logging.info(f"Starting ratio audit for {spec.name or spec.target.label()} over "
                     f"{len(bank)} members with {self.workers} worker(s)")
        with_orbit = spec.scale_invariant(bank.geometry.n)

        def job(item):
            return self._member(item[0], item[1], spec, with_orbit)

        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                rows = list(pool.map(job, enumerate(bank)))
        else:
            rows = [job(item) for item in enumerate(bank)]
        rows.sort(key=lambda r: r["member"])

        ratios = [r["ratio"] for r in rows if r["ratio"] is not None]
        spreads = [r["orbit_spread"] for r in rows if r["orbit_spread"] is not None]
        report = AuditReport(
            triple=spec,
            bank=bank.descriptor(),
            seed=bank.spec.seed,
            rows=rows,
            sup_ratio=max(ratios) if ratios else math.nan,
            orbit_spread=max(spreads) if with_orbit and spreads else None,
            max_truncation_defect=max((r["truncation_defect"] for r in rows if r["ratio"] is not None), default=0.0),
            max_tail_defect=max((r["tail_defect"] for r in rows if r["ratio"] is not None), default=0.0),
            status=audit_status(theorem_id, t),
            theorem_id=theorem_id,
            tuple_json=None if t is None else t.to_json(),
            ratio_limit=ratio_limit,
            spread_limit=self.config.spread_limit,
            orbit_required=with_orbit,
            metadata=artifact_metadata(bank.geometry, seed=bank.spec.seed,
                                       orbit=list(self.config.orbit_for(bank.geometry.n)) if with_orbit else None,
                                       orbit_mode=self.config.orbit_mode if with_orbit else None,
                                       scaling_gap=None if spec.scaling_gap(bank.geometry.n) is None
                                       else str(spec.scaling_gap(bank.geometry.n))),
        )
        logging.info(f"ratio audit {spec.name}: sup={report.sup_ratio:.6g}, spread={report.orbit_spread}, "
                     f"status={report.status}, passed={report.passed}")
        if write:
            self.write_report(report, fmt)
        return report

    def write_report(self, report: AuditReport, fmt: str = "json") -> str:
        name = report.triple.name or "triple"
        try:
            os.makedirs(self.config.report_dir, exist_ok=True)
            if fmt == "csv":
                return write_csv(os.path.join(self.config.report_dir, f"{name}.csv"), report.rows,
                                 sort_by=("member",))
            return write_json(os.path.join(self.config.report_dir, f"{name}.json"), report.to_dict())
        except ToolkitError:
            raise
        except Exception as e:
            raise customException(e, sys)
