"""
Unit tests for the dilation and modulation norm laws.
"""
import pytest
import math
import json
import sys
import os
import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.components.fixtures import EMBEDDING_FIXTURES, EMBEDDING_SEED_SPREAD, LAW_GRID, SOBOLEV_CONSTANT
from src.components.norm_laws import (EquivalenceReport, LawCheck, NormLawAudit, NormLawConfig, annulus_norm,
                                      dilation_norm_law, dilation_prediction, embedding_constant,
                                      modulation_check, sobolev_equivalence)
from src.exception import DegenerateInput
from src.grid import BankSpec, FunctionBank, GridGeometry, SampledFunction, annulus_function, function_bank
from src.predicates import Verdict, evaluate
from src.spaces import Scale, SpaceSpec


@pytest.fixture(scope="module")
def annulus():
    return annulus_function(GridGeometry.annulus_default(1))


class TestDilationLaw:
    """Test the single-annulus dilation law."""

    def test_prediction(self):
        """Test both branches of the predicted scaling."""
        assert dilation_prediction(1.0, -2, 1, 2, 1) == pytest.approx(2.0)
        assert dilation_prediction(1.0, 2, 1, 2, 1) == pytest.approx(2.0)
        assert dilation_prediction(1.0, -2, 1, 2, 1, homogeneous=True) == pytest.approx(0.5)
        assert dilation_prediction(3.0, 0, "1/2", "inf", 1) == 3.0

    @pytest.mark.parametrize("k", [-2, 0, 1, 3])
    @pytest.mark.parametrize("point", [LAW_GRID[0], LAW_GRID[3]])
    def test_law_on_besov_scale(self, annulus, k, point):
        """Test computed norms of dilates match the closed form."""
        s, p, q, r = point
        predicted, computed = dilation_norm_law(annulus, k, s, p, q, r, "B")
        assert computed == pytest.approx(predicted, rel=1e-6)

    def test_law_on_tl_scale(self, annulus):
        """Test the F scale collapses to the same Lorentz norm."""
        predicted, computed = dilation_norm_law(annulus, 2, "1", "2", "1", "1", "F")
        assert computed == pytest.approx(predicted, rel=1e-6)

    def test_scale_restricted(self, annulus):
        """Test the laws are stated for F and B only."""
        with pytest.raises(ValueError, match="F and B"):
            annulus_norm(annulus, 0, 2, 2, 2, scale="H")


class TestModulationLaw:
    """Test the modulated-bump factorization."""

    @pytest.mark.parametrize("a", [(1.0,), (1.0, 0.0, 2.0), (0.5j, 1.0)])
    def test_factorization(self, a):
        """Test the norm is an l^r norm times the bump's Lorentz norm."""
        predicted, computed = modulation_check(a, "0", "2", "2", "2")
        assert computed == pytest.approx(predicted, rel=1e-6)

    def test_smoothness_weight(self):
        """Test raising s weights later bumps more."""
        low, _ = modulation_check((0.0, 1.0), "0", "2", "2", "2")
        high, _ = modulation_check((0.0, 1.0), "1", "2", "2", "2")
        assert high == pytest.approx(4.0 * low)


class TestLawCheck:
    """Test relative errors of law checks."""

    def test_relative_error(self):
        """Test finite, equal infinite and mixed infinite cases."""
        assert LawCheck("dilation", {}, 2.0, 2.1).relative_error == pytest.approx(0.05)
        assert LawCheck("dilation", {}, math.inf, math.inf).relative_error == 0.0
        assert math.isinf(LawCheck("dilation", {}, 1.0, math.inf).relative_error)

    def test_row(self):
        """Test rows stringify the parameters."""
        row = LawCheck("modulation", {"s": "1/2", "k": 3}, 1.0, 1.0).to_dict()
        assert row["kind"] == "modulation" and row["k"] == "3" and row["relative_error"] == 0.0


class TestEquivalence:
    """Test the bank-level scale equivalences."""

    def test_tl_matches_sobolev(self, small_bank):
        """Test F^{0,2}_{2,2} against L^2 stays within the frozen constant."""
        report = sobolev_equivalence(small_bank, "0", "2", "2", SOBOLEV_CONSTANT)
        assert report.members == len(small_bank)
        assert report.within
        assert 0.5 <= report.minimum <= report.maximum <= 1.0 + 1e-9

    def test_integer_order_for_w(self, small_bank):
        """Test W needs an integer order."""
        with pytest.raises(ValueError, match="integer order"):
            sobolev_equivalence(small_bank, "1/2", "2", "2", SOBOLEV_CONSTANT, reference="W")

    def test_within(self):
        """Test the two-sided bound."""
        inside = EquivalenceReport("F~H", "0", "2", "2", 0.5, 2.0, 2.0, 3)
        outside = EquivalenceReport("F~H", "0", "2", "2", 0.4, 2.0, 2.0, 3)
        assert inside.within and not outside.within


@pytest.fixture(scope="module")
def reseeded_bank():
    return function_bank(BankSpec("random-bandlimited", 4, 1, 8))


class TestEmbeddingConstant:
    """Test bank estimates of sufficient embedding constants."""

    @pytest.mark.parametrize("fx", EMBEDDING_FIXTURES, ids=lambda fx: fx.name)
    def test_fixtures_are_sufficient(self, fx):
        """Test every embedding fixture is matched by its sufficiency clause."""
        assert evaluate(fx.theorem_id, fx.t).sufficient is Verdict.TRUE

    def test_smoothness_drop_is_contractive(self, small_bank):
        """Test dropping smoothness on the inhomogeneous scale never increases the norm."""
        fx = EMBEDDING_FIXTURES[0]
        report = embedding_constant(small_bank, fx.source, fx.target)
        assert report.members == len(small_bank)
        assert report.seed == 7
        assert 0 < report.minimum <= report.constant <= 1.0 + 1e-12

    @pytest.mark.parametrize("fx", EMBEDDING_FIXTURES, ids=lambda fx: fx.name)
    def test_stable_across_seeds(self, small_bank, reseeded_bank, fx):
        """Test the recorded constant barely moves when the bank is reseeded."""
        constants = [embedding_constant(bank, fx.source, fx.target).constant
                     for bank in (small_bank, reseeded_bank)]
        assert all(math.isfinite(c) and c > 0 for c in constants)
        assert max(constants) <= EMBEDDING_SEED_SPREAD * min(constants)

    def test_vanishing_source_norm(self, small_geometry):
        """Test a zero member cannot bound an embedding constant."""
        zero = SampledFunction(small_geometry, np.zeros(small_geometry.shape))
        bank = FunctionBank(BankSpec("random-bandlimited", 1, 1, 0), small_geometry, (zero,))
        source = SpaceSpec.of(Scale.F, s="1", p="2")
        target = SpaceSpec.of(Scale.F, s="0", p="2")
        with pytest.raises(DegenerateInput, match="norm of a bank member"):
            embedding_constant(bank, source, target)

    def test_row(self, small_bank):
        """Test the report serializes its labels."""
        fx = EMBEDDING_FIXTURES[1]
        row = json.loads(json.dumps(embedding_constant(small_bank, fx.source, fx.target).to_dict()))
        assert row["source"] == fx.source.label()
        assert row["target"] == fx.target.label()
        assert row["members"] == 4


class TestNormLawAudit:
    """Test the norm law stage."""

    def test_audit_passes_and_writes(self, tmp_path):
        """Test a small audit passes and writes its JSON report."""
        audit = NormLawAudit(NormLawConfig(report_dir=str(tmp_path), k_range=(-1, 1)))
        patterns = [((1.0, 2.0), ("0", "2", "2", "2"))]
        report = audit.initiate_norm_law_audit(points=LAW_GRID[:2], patterns=patterns)
        assert report.passed
        # two points, B and F each, three dilations, plus one modulation pattern
        assert len(report.checks) == 2 * 2 * 3 + 1
        with open(tmp_path / "norm_laws.json") as fh:
            payload = json.load(fh)
        assert payload["passed"] is True
        assert payload["metadata"]["seed"] is not None

    def test_audit_csv(self, tmp_path):
        """Test the CSV report has one row per check."""
        audit = NormLawAudit(NormLawConfig(report_dir=str(tmp_path), k_range=(0, 0)))
        report = audit.initiate_norm_law_audit(points=LAW_GRID[:1], patterns=[], fmt="csv")
        with open(tmp_path / "norm_laws.csv") as fh:
            assert len(fh.read().splitlines()) == len(report.checks) + 1
