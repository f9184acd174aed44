"""
Unit tests for interpolation-ratio audits.
"""
import pytest
import json
from fractions import Fraction
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.components.fixtures import SUFFICIENCY_FIXTURES, sufficiency_fixture
from src.components.ratio_audit import (AuditReport, RatioAudit, RatioAuditConfig, TripleSpec, audit_status,
                                        interpolation_ratio, orbit_spread)
from src.exception import ConventionViolation, DomainOverflow
from src.exponents import ParamTuple
from src.predicates import Verdict, evaluate
from src.spaces import Scale, SpaceSpec


@pytest.fixture
def lebesgue_triple():
    """L^2 between L^{4/3} and L^4 at theta = 1/2: balanced under dilation."""
    return TripleSpec(SpaceSpec.of("L", p="2"), SpaceSpec.of("L", p="4/3"), SpaceSpec.of("L", p="4"),
                      Fraction(1, 2), "lebesgue-holder")


class TestTripleSpec:
    """Test triple construction and its scaling exponent."""

    def test_theta_range(self):
        """Test theta must lie in (0, 1)."""
        sp = SpaceSpec.of("L", p="2")
        with pytest.raises(ConventionViolation):
            TripleSpec(sp, sp, sp, "3/2")

    def test_from_tuple_homogeneous(self, desk_tuple):
        """Test the critical-slope triple is dilation balanced."""
        triple = TripleSpec.from_tuple(desk_tuple, Scale.F, homogeneous=True)
        assert triple.target.label() == "Fdot[s=1/4,p=4,q=1,r=1]"
        assert triple.scaling_gap(1) == 0
        assert triple.scale_invariant(1)

    def test_inhomogeneous_gap(self, desk_tuple):
        """Test inhomogeneous triples have no scaling exponent."""
        assert TripleSpec.from_tuple(desk_tuple, "B").scaling_gap(1) is None

    def test_nonzero_gap(self):
        """Test an unbalanced homogeneous triple."""
        t = ParamTuple.build(s="1", s1="0", s2="0")
        assert TripleSpec.from_tuple(t, "B", homogeneous=True).scaling_gap(1) == 1

    def test_dict_round_trip(self, desk_tuple):
        """Test triples rebuild from their dict form."""
        triple = TripleSpec.from_tuple(desk_tuple, Scale.B, True, "desk")
        assert TripleSpec.from_dict(json.loads(json.dumps(triple.to_dict()))) == triple


class TestRatios:
    """Test single-function ratios."""

    def test_holder_bound(self, gaussian, lebesgue_triple):
        """Test the Lebesgue interpolation ratio never exceeds one."""
        assert 0.0 < interpolation_ratio(gaussian, lebesgue_triple) <= 1.0 + 1e-12

    def test_orbit_spread_is_flat(self, gaussian, lebesgue_triple):
        """Test a balanced triple gives the same ratio along the fixed-grid dilation orbit."""
        assert orbit_spread(gaussian, lebesgue_triple, (-1, 1)) == pytest.approx(1.0, abs=1e-10)

    def test_orbit_leaving_the_torus(self, gaussian, lebesgue_triple):
        """Test an orbit that spreads the function past the grid is refused."""
        with pytest.raises(DomainOverflow, match="truncates"):
            orbit_spread(gaussian, lebesgue_triple, (-2, 2))

    def test_rescaled_orbit_is_exact(self, gaussian, lebesgue_triple):
        """Test the moving-torus orbit reproduces the ratio to rounding."""
        assert orbit_spread(gaussian, lebesgue_triple, (-4, 4), mode="rescale") == pytest.approx(1.0, abs=1e-12)


class TestAuditStatus:
    """Test the catalog-backed audit status."""

    def test_statuses(self, desk_tuple):
        """Test verified, evidence, unsupported and unchecked."""
        assert audit_status("3.8", desk_tuple) == "verified"
        open_tuple = ParamTuple.build(s="1/2", s1="0", s2="1", q="1", q1="inf", q2="inf",
                                      r="1", r1="inf", r2="inf")
        assert audit_status("4.10", open_tuple) == "evidence"
        assert audit_status("3.1", ParamTuple.build(s="1")) == "unsupported"
        assert audit_status(None, desk_tuple) == "unchecked"

    @pytest.mark.parametrize("fx", SUFFICIENCY_FIXTURES, ids=lambda fx: fx.name)
    def test_fixtures_are_sufficient(self, fx):
        """Test every frozen fixture sits on a firm sufficient clause."""
        assert evaluate(fx.theorem_id, fx.t).sufficient is Verdict.TRUE

    def test_unknown_fixture(self):
        """Test fixture lookup by name."""
        assert sufficiency_fixture("nash").theorem_id == "5.10"
        with pytest.raises(KeyError):
            sufficiency_fixture("missing")


class TestRatioAudit:
    """Test the ratio audit stage."""

    def test_sobolev_triple(self, tmp_path, small_bank):
        """Test F^{1/2}_{2,2} between L^2-type and F^1_{2,2} is bounded by one."""
        fx = sufficiency_fixture("tl-inhomogeneous-flat")
        audit = RatioAudit(RatioAuditConfig(report_dir=str(tmp_path)))
        report = audit.initiate_ratio_audit(small_bank, fx.triple, fx.theorem_id, fx.t, ratio_limit=1.0 + 1e-9)
        assert report.status == "verified"
        assert report.orbit_spread is None
        assert report.evaluated > 0
        assert report.sup_ratio <= 1.0 + 1e-9
        assert report.passed

    def test_orbit_and_report(self, tmp_path, compact_bank, lebesgue_triple):
        """Test balanced triples record a fixed-grid orbit spread and write JSON and CSV."""
        audit = RatioAudit(RatioAuditConfig(report_dir=str(tmp_path)), workers=2)
        report = audit.initiate_ratio_audit(compact_bank, lebesgue_triple, write=True)
        assert report.status == "unchecked"
        assert all(r["orbit_spread"] is not None for r in report.rows)
        assert 1.0 <= report.orbit_spread <= 1.01
        assert report.passed
        with open(tmp_path / "lebesgue-holder.json") as fh:
            payload = json.load(fh)
        assert payload["metadata"]["scaling_gap"] == "0"
        assert payload["metadata"]["orbit"] == [-3, 3]
        assert payload["metadata"]["orbit_mode"] == "bandlimited"
        assert payload["seed"] == compact_bank.spec.seed
        csv_path = audit.write_report(report, fmt="csv")
        with open(csv_path) as fh:
            assert len(fh.read().splitlines()) == len(compact_bank) + 1

    def test_orbit_overflow_propagates(self, tmp_path, small_bank, lebesgue_triple):
        """Test wide members that leave the torus along the orbit fail the audit loudly."""
        audit = RatioAudit(RatioAuditConfig(report_dir=str(tmp_path), orbit=(-3, 3)))
        with pytest.raises(DomainOverflow):
            audit.initiate_ratio_audit(small_bank, lebesgue_triple)

    def test_missing_orbit_fails(self, lebesgue_triple):
        """Test a member without an orbit spread fails an orbit-audited report."""
        rows = [{"member": 0, "ratio": 0.9, "orbit_spread": 1.0},
                {"member": 1, "ratio": 0.8, "orbit_spread": None}]
        report = AuditReport(lebesgue_triple, {}, 0, rows, 0.9, 1.0, 0.0, 0.0, "unchecked", orbit_required=True)
        assert not report.passed
        report.orbit_required = False
        assert report.passed

    def test_orbit_per_dimension(self):
        """Test the 2D orbit is configured separately."""
        cfg = RatioAuditConfig()
        assert cfg.orbit_for(1) == (-3, 3)
        assert cfg.orbit_for(2) == (-1, 1)

    def test_homogeneous_fixtures_use_compact_bank(self):
        """Test orbit-audited fixtures draw from the compact bank."""
        for fx in SUFFICIENCY_FIXTURES:
            expected = "compact-bandlimited" if fx.triple.scale_invariant(fx.t.n) else "random-bandlimited"
            assert fx.bank_family == expected
            assert fx.bank_spec(2, 1).family == expected
