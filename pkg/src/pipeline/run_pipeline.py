import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.components.fixtures import SUFFICIENCY_FIXTURES, WITNESS_FIXTURES, sufficiency_fixture
from src.components.norm_laws import dilation_norm_law
from src.components.ratio_audit import RatioAudit, RatioAuditConfig, TripleSpec
from src.components.witness import WitnessConfig, WitnessSearch
from src.config import config
from src.exception import ToolkitError, customException
from src.exponents import ParamTuple
from src.grid import (BANK_FAMILIES, BankSpec, FunctionBank, GridGeometry, SampledFunction, annulus_function,
                      canonical_family, export_csv, function_bank, load_function, save_function)
from src.littlewood_paley import FamilyKind, band_stack, cached_family, reconstruct
from src.logger import logging
from src.predicates import ScanGrid, consistency_scan, evaluate, evaluate_all
from src.spaces import Scale, SpaceSpec, space_norm
from src.utils import artifact_metadata, load_object, save_object, write_csv, write_json

Command = Literal["norm", "decompose", "predicates", "audit", "witness", "selftest"]


class GridModel(BaseModel):
    """Grid geometry; unset fields fall back to the desk grid of dimension n."""
    model_config = ConfigDict(extra="forbid")

    n: int = Field(1, ge=1, le=2, description="Spatial dimension")
    points: Optional[int] = Field(None, ge=4, description="Points per axis (power of two)")
    half_period: Optional[str] = Field(None, description="Half period L as an exact rational")


class BankModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: str = Field("random-bandlimited", description="Bank family")
    count: int = Field(default_factory=lambda: config.audit.bank_size, ge=1, description="Number of members")
    index: int = Field(0, ge=0, description="Member used by single-function commands")

    @field_validator("family")
    @classmethod
    def known_family(cls, value: str) -> str:
        family = canonical_family(value)
        if family not in BANK_FAMILIES:
            raise ValueError(f"unknown bank family {value!r}; expected one of {BANK_FAMILIES}")
        return family


class SpaceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scale: Literal["F", "B", "H", "W", "L"] = Field("B", description="Space scale")
    s: str = Field("0", description="Smoothness")
    p: str = Field("2", description="Integrability exponent")
    q: Optional[str] = Field(None, description="Lorentz fine index, defaults to p")
    r: str = Field("2", description="Sequence index")
    homogeneous: bool = Field(False, description="Homogeneous space")
    k: Optional[int] = Field(None, ge=1, description="Derivative order for W")

    def spec(self) -> SpaceSpec:
        return SpaceSpec.of(self.scale, self.s, self.p, self.q, self.r, self.homogeneous, self.k)


class RunConfig(BaseModel):
    """Everything a run depends on; a run is reproducible from this document alone."""
    model_config = ConfigDict(extra="forbid")

    command: Command = Field(..., description="Subcommand")
    seed: int = Field(default_factory=lambda: config.audit.seed, ge=0, description="Seed for banks and scans")
    workers: int = Field(default_factory=lambda: config.audit.workers, ge=1, description="Worker threads")
    out_dir: str = Field(default_factory=lambda: config.output.out_dir, description="Artifact directory")
    fmt: Literal["json", "csv"] = Field(default_factory=lambda: config.output.fmt, description="Report format")

    grid: GridModel = Field(default_factory=GridModel)
    family: Optional[Literal["inhomogeneous", "homogeneous", "necessity"]] = Field(
        None, description="Littlewood-Paley family kind")
    epsilon: Optional[str] = Field(None, description="Necessity family epsilon")
    bank: BankModel = Field(default_factory=BankModel)
    input_path: Optional[str] = Field(None, description="Function container to load")
    space: SpaceModel = Field(default_factory=SpaceModel)

    params: Optional[Dict[str, Any]] = Field(None, description="One parameter tuple")
    tuples: Optional[List[Dict[str, Any]]] = Field(None, description="Explicit tuple grid")
    theorem: Optional[str] = Field(None, description="Theorem id or alias")
    scan: Optional[int] = Field(None, ge=1, description="Size of a random consistency scan")

    fixture: str = Field("all", description="Fixture name or 'all'")
    triple: Optional[Dict[str, Any]] = Field(None, description="Custom triple for an audit")
    witness_family: Literal["dilation", "modulation"] = Field("dilation")
    witness_scale: Literal["F", "B"] = Field("B")
    homogeneous: bool = Field(False, description="Homogeneous witness spaces")
    embedding: bool = Field(False, description="Modulation witness for an embedding")
    steps: Optional[int] = Field(None, ge=2, description="Witness steps")
    force: bool = Field(False, description="Run a witness inside the necessary region")
    quick: bool = Field(False, description="Reduced selftest")

    @field_validator("fmt", mode="before")
    @classmethod
    def lower_format(cls, value: Any) -> Any:
        return value.lower() if isinstance(value, str) else value

    def tuple_list(self) -> List[ParamTuple]:
        payloads = list(self.tuples or [])
        if self.params is not None:
            payloads.insert(0, self.params)
        return [ParamTuple.from_json(p) for p in payloads]


@dataclass
class RunOutcome:
    status: int
    artifacts: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)


class RunPipeline:
    def __init__(self, run_config: RunConfig):
        self.config = run_config
        self.artifacts: List[str] = []

    def _path(self, *parts: str) -> str:
        return os.path.join(self.config.out_dir, *parts)

    def _keep(self, path: str) -> str:
        self.artifacts.append(path)
        return path

    def _metadata(self, geometry: Optional[GridGeometry] = None, family=None, **extra) -> Dict[str, Any]:
        return artifact_metadata(geometry, family, seed=self.config.seed, **extra)

    # inputs

    def bank(self, spec: BankSpec) -> FunctionBank:
        """Seeded bank, cached under the output directory with dill."""
        key = hashlib.sha256(json.dumps(spec.to_dict(), sort_keys=True).encode()).hexdigest()[:16]
        cache = self._path("banks", f"{spec.family}-{key}.pkl")
        if os.path.exists(cache):
            bank = load_object(cache)
            logging.info(f"bank {spec.family} loaded from {cache}")
            return bank
        bank = function_bank(spec)
        save_object(cache, bank)
        return bank

    def input_function(self) -> Tuple[SampledFunction, Dict[str, Any]]:
        if self.config.input_path:
            return load_function(self.config.input_path), {"input_path": self.config.input_path}
        b = self.config.bank
        if b.family == "single-annulus" and b.index == 0:
            geometry = GridGeometry.annulus_default(self.config.grid.n)
            return annulus_function(geometry), {"function": "single-annulus"}
        spec = BankSpec(b.family, max(b.count, b.index + 1), self.config.grid.n, self.config.seed,
                        self.config.grid.points, self.config.grid.half_period)
        bank = self.bank(spec)
        return bank[b.index], {"bank": bank.descriptor(), "index": b.index}

    # commands

    def _run_norm(self) -> Tuple[bool, Dict[str, Any]]:
        f, source = self.input_function()
        spec = self.config.space.spec()
        fam = None
        if self.config.family == FamilyKind.NECESSITY.value and spec.scale in (Scale.F, Scale.B):
            fam = cached_family(FamilyKind.NECESSITY.value, f.geometry,
                                self.config.epsilon or config.family.necessity_epsilon)
        result = space_norm(f, spec, fam)
        payload: Dict[str, Any] = {"space": spec.to_dict(), "label": spec.label(), "result": result.to_dict(),
                                   "source": source}
        passed = True
        if source.get("function") == "single-annulus" and spec.scale in (Scale.F, Scale.B) and fam is None:
            predicted, computed = dilation_norm_law(f, 0, spec.s, spec.p, spec.q, spec.r, spec.scale,
                                                    spec.homogeneous)
            rel = abs(computed - predicted) / predicted if predicted else abs(computed)
            payload["law"] = {"k": 0, "predicted": predicted, "computed": computed, "relative_error": rel}
            passed = rel <= 1e-6
        payload["metadata"] = self._metadata(f.geometry, fam, family_id=result.family_id,
                                             j_range=None if result.j_range is None else list(result.j_range))
        if self.config.fmt == "csv":
            row = {"label": spec.label(), **result.to_dict()}
            self._keep(write_csv(self._path("norm.csv"), [row]))
        self._keep(write_json(self._path("norm.json"), payload))
        return passed, {"value": result.value, "label": spec.label()}

    def _run_decompose(self) -> Tuple[bool, Dict[str, Any]]:
        f, source = self.input_function()
        kind = self.config.family or FamilyKind.INHOMOGENEOUS.value
        eps = None
        if kind == FamilyKind.NECESSITY.value:
            eps = self.config.epsilon or config.family.necessity_epsilon
        fam = cached_family(kind, f.geometry, eps)
        bands = band_stack(f, fam)
        os.makedirs(self._path("bands"), exist_ok=True)
        files, rows = [], []
        for j, samples in zip(fam.js(), bands):
            block = SampledFunction(f.geometry, samples)
            # plot-ready CSV only for small grids; the binary container always
            if self.config.fmt == "csv" and block.samples.size <= 4096:
                files.append(self._keep(export_csv(self._path("bands", f"band_{j}.csv"), block)))
            else:
                files.append(self._keep(save_function(self._path("bands", f"band_{j}.lpq"), block)))
            rows.append({"j": j, "l2_norm": block.l2_norm(), "peak": block.peak()})
        self._keep(write_csv(self._path("bands", "bands.csv"), rows, sort_by=("j",)))
        leakage = None
        if fam.kind is not FamilyKind.NECESSITY:
            rebuilt = reconstruct(f, fam)
            target = f.zero_mean() if fam.homogeneous else f
            diff = SampledFunction(f.geometry, rebuilt.samples - target.samples)
            leakage = diff.l2_norm() / target.l2_norm() if target.l2_norm() > 0 else diff.l2_norm()
        symbols = self._keep(fam.export_symbols_csv(self._path("bands", "symbols.csv")))
        manifest = {"family": fam.to_dict(), "bands": files, "symbols": symbols, "reconstruction_error": leakage,
                    "source": source, "metadata": self._metadata(f.geometry, fam)}
        self._keep(write_json(self._path("decompose.json"), manifest))
        return True, {"bands": len(files), "family_id": fam.family_id}

    def _run_predicates(self) -> Tuple[bool, Dict[str, Any]]:
        if self.config.scan is not None:
            grid = ScanGrid(count=self.config.scan, n=self.config.grid.n, seed=self.config.seed)
            report = consistency_scan(grid, csv_path=self._path("scan.csv"), workers=self.config.workers,
                                      strict=False)
            self._keep(report.csv_path)
            self._keep(write_json(self._path("scan.json"), {**report.to_dict(), "metadata": self._metadata()}))
            return report.ok, {"tuples": report.tuples_checked, "inconsistencies": len(report.inconsistencies)}

        tuples = self.config.tuple_list()
        if not tuples:
            raise ValueError("predicates needs a tuple, a tuple grid or --scan")
        entries, rows = [], []
        for t in tuples:
            if self.config.theorem:
                verdicts = {self.config.theorem: evaluate(self.config.theorem, t)}
            else:
                verdicts = evaluate_all(t, applicable_only=True)
            entries.append({"tuple": t.to_json(), "verdicts": {k: v.to_dict() for k, v in verdicts.items()}})
            for v in verdicts.values():
                rows.append({"tuple": t.key(), "theorem": v.theorem_id, "clauses": ";".join(v.matched_clauses),
                             "sufficient": v.sufficient.value, "necessary": v.necessary_region_member.value,
                             "iff": v.iff_holds.value})
        if self.config.fmt == "csv":
            self._keep(write_csv(self._path("predicates.csv"), rows, sort_by=("tuple", "theorem")))
        self._keep(write_json(self._path("predicates.json"), {"results": entries, "metadata": self._metadata()}))
        return True, {"tuples": len(tuples), "verdicts": len(rows)}

    def _run_audit(self) -> Tuple[bool, Dict[str, Any]]:
        auditor = RatioAudit(RatioAuditConfig(report_dir=self._path("audits")), workers=self.config.workers)
        jobs = []
        if self.config.triple is not None:
            triple = TripleSpec.from_dict(self.config.triple)
            t = self.config.tuple_list()[0] if (self.config.params or self.config.tuples) else None
            spec = BankSpec(self.config.bank.family, self.config.bank.count, self.config.grid.n, self.config.seed,
                            self.config.grid.points, self.config.grid.half_period)
            jobs.append((triple, self.config.theorem, t, spec))
        else:
            chosen = SUFFICIENCY_FIXTURES if self.config.fixture == "all" else (sufficiency_fixture(self.config.fixture),)
            for fx in chosen:
                jobs.append((fx.triple, fx.theorem_id, fx.t, fx.bank_spec(self.config.bank.count, self.config.seed)))

        summary, passed = {}, True
        for triple, theorem_id, t, spec in jobs:
            report = auditor.initiate_ratio_audit(self.bank(spec), triple, theorem_id, t)
            self._keep(auditor.write_report(report, self.config.fmt))
            summary[triple.name or triple.target.label()] = {"sup_ratio": report.sup_ratio,
                                                             "orbit_spread": report.orbit_spread,
                                                             "status": report.status, "passed": report.passed}
            passed &= report.passed
        return passed, summary

    def _run_witness(self) -> Tuple[bool, Dict[str, Any]]:
        search = WitnessSearch(WitnessConfig(report_dir=self._path("witness")))
        jobs = []
        if self.config.params is not None or self.config.tuples:
            for i, t in enumerate(self.config.tuple_list()):
                jobs.append((f"tuple-{i}", t))
        else:
            chosen = [w for w in WITNESS_FIXTURES if self.config.fixture in ("all", w.name)]
            if not chosen:
                raise KeyError(f"unknown witness fixture {self.config.fixture!r}")
            jobs = [(w.name, w.t) for w in chosen]

        summary, passed = {}, True
        for name, t in jobs:
            report = search.initiate_witness(t, self.config.witness_family, self.config.witness_scale,
                                             self.config.homogeneous, self.config.embedding, self.config.steps,
                                             self.config.force, write=False)
            self._keep(search.write_report(report, name, self.config.fmt))
            summary[name] = {"fitted": report.fitted_exponent, "predicted": str(report.predicted_exponent),
                             "passed": report.passed}
            passed &= report.passed
        return passed, summary

    def _run_selftest(self) -> Tuple[bool, Dict[str, Any]]:
        from src.pipeline.selftest import SelfTest

        report = SelfTest(self._path("selftest"), seed=self.config.seed, workers=self.config.workers,
                          quick=self.config.quick).initiate_selftest()
        self._keep(report.path)
        return report.passed, {c.name: c.passed for c in report.checks}

    def run(self) -> RunOutcome:
        cfg = self.config
        os.makedirs(cfg.out_dir, exist_ok=True)
        logging.info(f"Run {cfg.command} (seed={cfg.seed}, workers={cfg.workers}, out={cfg.out_dir})")
        self._keep(write_json(self._path("run_config.json"), cfg.model_dump(mode="json")))
        handler: Callable[[], Tuple[bool, Dict[str, Any]]] = getattr(self, f"_run_{cfg.command}")
        try:
            passed, summary = handler()
        except ToolkitError as e:
            logging.error(f"{cfg.command} failed: {e}")
            return self._fail(e.to_dict())
        except Exception as e:
            wrapped = customException(e, sys)
            logging.error(str(wrapped))
            return self._fail({"error": "unexpected", "message": str(wrapped)})

        if not passed:
            logging.warning(f"{cfg.command} finished with failing assertions")
            return self._fail({"error": "assertion-failed", "message": f"{cfg.command} checks did not pass",
                               "summary": summary})
        logging.info(f"{cfg.command} passed")
        return RunOutcome(0, self.artifacts, summary)

    def _fail(self, error: Dict[str, Any]) -> RunOutcome:
        marker = self._path(config.output.failed_marker)
        with open(marker, "w", encoding="utf-8") as fh:
            fh.write(f"{self.config.command}\n")
        self.artifacts.append(marker)
        self._keep(write_json(self._path("error.json"), error))
        return RunOutcome(1, self.artifacts, error)
