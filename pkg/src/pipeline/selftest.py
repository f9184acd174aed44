"""
Acceptance suite behind ``lpq-audit selftest``.

Every check returns a pass flag and a small detail record; the whole report is
written to ``<out>/selftest.json``. Quick mode shrinks banks, grids of
parameters and scan sizes so the suite fits in a CI job.
"""
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.components.fixtures import (EMBEDDING_FIXTURES, EMBEDDING_SEED_SPREAD, EQUIVALENCE_SETTINGS, LAW_GRID,
                                     SOBOLEV_CONSTANT, SUFFICIENCY_FIXTURES, WITNESS_FIXTURES, modulation_patterns)
from src.components.lemma_oracles import LemmaOracleConfig, LemmaOracles, bernstein_defect
from src.components.norm_laws import NormLawAudit, NormLawConfig, embedding_constant, sobolev_equivalence
from src.components.ratio_audit import RatioAudit, RatioAuditConfig
from src.components.witness import DILATION, MODULATION, WitnessConfig, WitnessSearch
from src.config import config
from src.exception import ToolkitError, customException
from src.exponents import ExtendedExponent, ParamTuple
from src.grid import BankSpec, FunctionBank, GridGeometry, SampledFunction, dilate_pow2, function_bank
from src.littlewood_paley import cached_family, reconstruct
from src.logger import logging
from src.lorentz import level_profile, lorentz_norm, lorentz_norm_quadrature, profile_of_array
from src.predicates import ScanGrid, Verdict, consistency_scan, evaluate
from src.spaces import Scale
from src.utils import artifact_metadata, write_json

_CLOSED_FORM_EXPONENTS = (("1", "1"), ("3/2", "2"), ("2", "1"), ("3", "3/2"), ("4", "5"))
_DIAGONAL_EXPONENTS = ("1", "3/2", "2", "3")


@dataclass
class SelfTestCheck:
    name: str
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class SelfTestReport:
    checks: List[SelfTestCheck]
    path: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks], "metadata": self.metadata}


def _relative(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b else abs(a)


def _simple_samples(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """Few-valued simple function with a random support inside the middle half of the grid."""
    values = rng.integers(1, 8, size=shape).astype(float)
    values[rng.random(shape) < 0.6] = 0.0
    mask = np.zeros(shape, dtype=bool)
    mask[tuple(slice(s // 4, 3 * s // 4) for s in shape)] = True
    return np.where(mask, values, 0.0)


class SelfTest:
    def __init__(self, out_dir: str, seed: Optional[int] = None, workers: Optional[int] = None,
                 quick: bool = False):
        self.out_dir = out_dir
        self.seed = config.audit.seed if seed is None else seed
        self.workers = config.audit.workers if workers is None else workers
        self.quick = quick
        self._banks: Dict[Tuple[str, int, int], FunctionBank] = {}

    def _count(self, full: int, quick: int) -> int:
        return quick if self.quick else full

    def bank(self, family: str, n: int = 1, count: Optional[int] = None) -> FunctionBank:
        count = count or self._count(config.audit.bank_size, 8)
        key = (family, n, count)
        if key not in self._banks:
            self._banks[key] = function_bank(BankSpec(family, count, n, self.seed))
        return self._banks[key]

    def lorentz_closed_forms(self) -> SelfTestCheck:
        rng = np.random.default_rng(self.seed)
        worst = 0.0
        for _ in range(self._count(50, 10)):
            prof = profile_of_array(_simple_samples(rng, (64,)), 1.0 / 8)
            for p, q in _CLOSED_FORM_EXPONENTS:
                worst = max(worst, _relative(lorentz_norm(prof, p, q), lorentz_norm_quadrature(prof, p, q)))

        indicator = 0.0
        for m in (1, 3, 10, 64):
            prof = profile_of_array(np.ones(m), 1.0 / 4)
            for p, q in _CLOSED_FORM_EXPONENTS:
                pf, qf = float(ExtendedExponent.of(p).value()), float(ExtendedExponent.of(q).value())
                expected = (pf / qf) ** (1.0 / qf) * (m / 4) ** (1.0 / pf)
                indicator = max(indicator, _relative(lorentz_norm(prof, p, q), expected))
            indicator = max(indicator, _relative(lorentz_norm(prof, "2", "inf"), (m / 4) ** 0.5))
        return SelfTestCheck("lorentz-closed-forms", worst <= 1e-9 and indicator <= 1e-12,
                             {"quadrature_error": worst, "indicator_error": indicator})

    def lorentz_diagonal(self) -> SelfTestCheck:
        rng = np.random.default_rng(self.seed + 1)
        worst = 0.0
        for _ in range(self._count(100, 20)):
            samples = _simple_samples(rng, (64,))
            for p in _DIAGONAL_EXPONENTS:
                pf = float(ExtendedExponent.of(p).value())
                lebesgue = float(np.sum(np.abs(samples) ** pf) / 8) ** (1.0 / pf)
                worst = max(worst, _relative(lorentz_norm(profile_of_array(samples, 1.0 / 8), p, p), lebesgue))
        return SelfTestCheck("lorentz-diagonal", worst <= 1e-10, {"max_error": worst})

    def dilation_scaling(self) -> SelfTestCheck:
        rng = np.random.default_rng(self.seed + 2)
        worst = 0.0
        for geometry in (GridGeometry(1, 256, 16), GridGeometry(2, 64, 8)):
            f = SampledFunction(geometry, _simple_samples(rng, geometry.shape))
            base_prof = level_profile(f)
            for p, q in _CLOSED_FORM_EXPONENTS:
                base = lorentz_norm(base_prof, p, q)
                pf = float(ExtendedExponent.of(p).value())
                for k in range(-4, 5):
                    g = dilate_pow2(f, k)
                    expected = 2.0 ** (-k * geometry.n / pf) * base
                    worst = max(worst, _relative(lorentz_norm(level_profile(g), p, q), expected))
        return SelfTestCheck("dilation-scaling", worst <= 1e-12, {"max_error": worst})

    def partition(self) -> SelfTestCheck:
        defects = {}
        for n in (1, 2):
            geometry = GridGeometry.default(n)
            for kind in ("inhomogeneous", "homogeneous"):
                defects[f"{kind}-n{n}"] = cached_family(kind, geometry).partition_defect()
        bank = self.bank("random-bandlimited", count=self._count(10, 3))
        fam = cached_family("inhomogeneous", bank.geometry)
        worst = 0.0
        for f in bank:
            out = reconstruct(f, fam)
            err = float(np.sqrt(np.sum(np.abs(out.samples - f.samples) ** 2) * f.cell_volume))
            worst = max(worst, err / f.l2_norm())
        passed = max(defects.values()) <= config.family.partition_tolerance and \
            worst <= config.family.reconstruct_tolerance
        return SelfTestCheck("partition-reconstruction", passed, {"partition": defects, "reconstruction": worst})

    def norm_laws(self) -> SelfTestCheck:
        audit = NormLawAudit(NormLawConfig(report_dir=os.path.join(self.out_dir, "norm_laws")))
        points = LAW_GRID[:3] if self.quick else LAW_GRID
        patterns = modulation_patterns(self._count(20, 4), seed=self.seed)
        report = audit.initiate_norm_law_audit(points, patterns)
        return SelfTestCheck("norm-laws", report.passed, {"checks": len(report.checks),
                                                          "max_relative_error": report.max_relative_error})

    def modulation_witness(self) -> SelfTestCheck:
        # r1 > r2 with a = 1: the l^r2 sum outgrows the l^r1 sum like N
        t = ParamTuple.build(s1="0", s2="0", p1="2", p2="2", r1="inf", r2="1")
        search = WitnessSearch(WitnessConfig(report_dir=os.path.join(self.out_dir, "witness")))
        report = search.initiate_witness(t, MODULATION, Scale.F, embedding=True, write=True,
                                         name="modulation-embedding")
        return SelfTestCheck("modulation-witness", report.passed,
                             {"fitted": report.fitted_exponent, "predicted": str(report.predicted_exponent)})

    def lemmas(self) -> List[SelfTestCheck]:
        oracles = LemmaOracles(LemmaOracleConfig(report_path=os.path.join(self.out_dir, "lemmas.json"),
                                                 sequence_count=self._count(10_000, 500)))
        bank = self.bank("random-bandlimited")
        report = oracles.initiate_lemma_oracles(bank, seed=self.seed, write=True)
        sequence = SelfTestCheck("sequence-lemma", not any(s.violations for s in report.sequence),
                                 {"scans": [s.to_dict() for s in report.sequence]})

        # an independently rebuilt bank must give the same bits
        rebuilt = function_bank(bank.spec)
        p, q = oracles.config.bernstein_p, oracles.config.bernstein_q
        again = max(bernstein_defect(f, p, q) for f in rebuilt)
        reproducible = rebuilt.digest() == bank.digest() and again == report.bernstein_max
        bernstein_ok = (report.bernstein_max is not None and math.isfinite(report.bernstein_max)
                        and report.bernstein_spread is not None
                        and report.bernstein_spread <= oracles.config.spread_tolerance
                        and report.bernstein_grid_spread is not None
                        and math.isfinite(report.bernstein_grid_spread))
        bernstein = SelfTestCheck("bernstein", bernstein_ok and reproducible,
                                  {"max_defect": report.bernstein_max, "dilation_spread": report.bernstein_spread,
                                   "grid_dilation_spread": report.bernstein_grid_spread, "reproducible": reproducible,
                                   "holder": [h.to_dict() for h in report.holder]})
        return [sequence, bernstein]

    def sufficiency(self) -> SelfTestCheck:
        auditor = RatioAudit(RatioAuditConfig(report_dir=os.path.join(self.out_dir, "audits")), workers=self.workers)
        results = {}
        for fx in SUFFICIENCY_FIXTURES:
            bank = self.bank(fx.bank_family, fx.t.n)
            report = auditor.initiate_ratio_audit(bank, fx.triple, fx.theorem_id, fx.t, write=True)
            results[fx.name] = {"sup_ratio": report.sup_ratio, "orbit_spread": report.orbit_spread,
                                "status": report.status, "passed": report.passed}
        return SelfTestCheck("sufficiency-audits", all(r["passed"] for r in results.values()), results)

    def witnesses(self) -> SelfTestCheck:
        search = WitnessSearch(WitnessConfig(report_dir=os.path.join(self.out_dir, "witness")))
        steps = max(5, config.audit.witness_steps)
        chosen = WITNESS_FIXTURES[:3] if self.quick else WITNESS_FIXTURES
        results = {}
        for w in chosen:
            report = search.initiate_witness(w.t, DILATION, Scale.B, steps=steps, write=True, name=w.name)
            agrees = report.direction == w.direction and report.predicted_exponent == w.exponent
            results[w.name] = {"fitted": report.fitted_exponent, "predicted": str(report.predicted_exponent),
                               "direction": report.direction, "passed": report.passed and agrees}
        return SelfTestCheck("dilation-witnesses", all(r["passed"] for r in results.values()), results)

    def consistency(self) -> SelfTestCheck:
        grid = ScanGrid(count=self._count(10_000, 500), n=1, seed=self.seed)
        report = consistency_scan(grid, workers=self.workers, strict=False)
        return SelfTestCheck("predicate-consistency", report.ok,
                             {"tuples": report.tuples_checked, "verdicts": report.verdicts_evaluated,
                              "inconsistencies": report.inconsistencies[:10]})

    def sobolev(self) -> SelfTestCheck:
        bank = self.bank("random-bandlimited")
        reports = [sobolev_equivalence(bank, s, p, q, SOBOLEV_CONSTANT) for s, p, q in EQUIVALENCE_SETTINGS]
        return SelfTestCheck("sobolev-equivalence", all(r.within for r in reports),
                             {"settings": [r.to_dict() for r in reports]})

    def embeddings(self) -> SelfTestCheck:
        first = self.bank("random-bandlimited")
        second = function_bank(BankSpec("random-bandlimited", len(first), 1, self.seed + 1))
        results = {}
        for fx in EMBEDDING_FIXTURES:
            sufficient = evaluate(fx.theorem_id, fx.t).sufficient is Verdict.TRUE
            reports = [embedding_constant(bank, fx.source, fx.target) for bank in (first, second)]
            constants = [r.constant for r in reports]
            stable = all(math.isfinite(c) and c > 0 for c in constants) and \
                max(constants) <= EMBEDDING_SEED_SPREAD * min(constants)
            results[fx.name] = {"theorem": fx.theorem_id, "sufficient": sufficient,
                                "constants": [r.to_dict() for r in reports], "passed": sufficient and stable}
        return SelfTestCheck("embedding-constants", all(r["passed"] for r in results.values()), results)

    def _run(self, name: str, check: Callable[[], Any]) -> List[SelfTestCheck]:
        logging.info(f"selftest: {name}")
        try:
            out = check()
        except ToolkitError as e:
            logging.error(f"selftest {name} raised {e.code}: {e}")
            return [SelfTestCheck(name, False, e.to_dict())]
        out = out if isinstance(out, list) else [out]
        for c in out:
            logging.info(f"selftest {c.name}: passed={c.passed}")
        return out

    def initiate_selftest(self) -> SelfTestReport:
        logging.info(f"Starting selftest (seed={self.seed}, quick={self.quick})")
        stages = [
            ("lorentz-closed-forms", self.lorentz_closed_forms),
            ("lorentz-diagonal", self.lorentz_diagonal),
            ("dilation-scaling", self.dilation_scaling),
            ("partition-reconstruction", self.partition),
            ("norm-laws", self.norm_laws),
            ("modulation-witness", self.modulation_witness),
            ("lemmas", self.lemmas),
            ("sufficiency-audits", self.sufficiency),
            ("dilation-witnesses", self.witnesses),
            ("predicate-consistency", self.consistency),
            ("sobolev-equivalence", self.sobolev),
            ("embedding-constants", self.embeddings),
        ]
        checks: List[SelfTestCheck] = []
        for name, stage in stages:
            checks.extend(self._run(name, stage))

        report = SelfTestReport(checks, metadata=artifact_metadata(seed=self.seed, quick=self.quick))
        try:
            os.makedirs(self.out_dir, exist_ok=True)
            report.path = write_json(os.path.join(self.out_dir, "selftest.json"), report.to_dict())
        except Exception as e:
            raise customException(e, sys)
        logging.info(f"selftest finished: {sum(c.passed for c in checks)}/{len(checks)} checks passed")
        return report
