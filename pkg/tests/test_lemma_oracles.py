"""
Unit tests for the sequence, Bernstein and Hölder oracles.
"""
import pytest
import numpy as np
import math
import json
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.components.lemma_oracles import (HOLDER_EXPONENTS, LemmaOracleConfig, LemmaOracles, bernstein_defect,
                                          bernstein_dilation_spread, holder_audit, sequence_constant,
                                          sequence_interp_defect, sequence_interp_scan, spectral_diameter)
from src.exception import DomainOverflow, EqualSmoothness, NotBandLimited
from src.grid import SampledFunction


class TestSequenceBound:
    """Test the weighted sequence interpolation bound."""

    def test_constant(self):
        """Test the closed-form constant."""
        assert sequence_constant(0, 1, "1/2") == pytest.approx(2.0 / (1.0 - 2.0 ** -0.5))
        assert sequence_constant(1, 0, "1/2") == sequence_constant(0, 1, "1/2")

    def test_equal_smoothness(self):
        """Test s1 = s2 is refused."""
        with pytest.raises(EqualSmoothness):
            sequence_constant("1/2", "1/2", "1/3")
        with pytest.raises(ValueError, match="theta"):
            sequence_constant(0, 1, 1)

    def test_single_entry(self):
        """Test a single nonzero entry attains ratio one."""
        result = sequence_interp_defect([0.0, 0.0, 1.0], 0, 1, "1/2")
        assert result.lhs == pytest.approx(2.0)
        assert result.rhs == pytest.approx(2.0)
        assert result.ratio == pytest.approx(1.0)
        assert result.holds

    def test_zero_sequence(self):
        """Test the zero sequence has ratio zero."""
        assert sequence_interp_defect([0.0, 0.0], 0, 1, "1/2").ratio == 0.0

    def test_scan_has_no_violations(self):
        """Test seeded random sequences never break the bound."""
        scans = sequence_interp_scan(count=500, seed=1)
        assert len(scans) == 3
        for scan in scans:
            assert scan.violations == 0
            assert 0.0 < scan.max_ratio <= scan.bound


class TestBernstein:
    """Test spectral diameters and the Bernstein defect."""

    def test_gaussian_diameter(self, gaussian):
        """Test the thresholded support of exp(-xi^2/2)."""
        expected = 2.0 * math.sqrt(2.0 * math.log(1e12))
        assert spectral_diameter(gaussian, 1e-12) == pytest.approx(expected, abs=0.5)

    def test_not_band_limited(self, simple_function, small_geometry):
        """Test jumps and the zero function are refused."""
        with pytest.raises(NotBandLimited, match="Nyquist"):
            spectral_diameter(simple_function)
        with pytest.raises(NotBandLimited, match="zero function"):
            spectral_diameter(SampledFunction(small_geometry, np.zeros(small_geometry.shape)))

    def test_defect_positive(self, gaussian):
        """Test the defect is finite and positive."""
        assert 0.0 < bernstein_defect(gaussian, 2, "inf") < math.inf

    def test_dilation_invariance(self, gaussian):
        """Test spectral dilates share one defect."""
        defects, spread = bernstein_dilation_spread(gaussian, 2, "inf", ks=range(0, 4))
        assert len(defects) == 4
        assert spread < 1e-9

    def test_fixed_grid_dilation(self, gaussian):
        """Test dilates kept on the sampling grid drift from the invariant only by quantisation."""
        exact, _ = bernstein_dilation_spread(gaussian, 2, "inf", ks=range(0, 4))
        defects, spread = bernstein_dilation_spread(gaussian, 2, "inf", ks=range(0, 4), mode="resample")
        assert defects[0] == exact[0]
        assert all(math.isfinite(d) and d > 0.0 for d in defects)
        assert 0.0 < spread < 0.5

    def test_fixed_grid_dilation_aliases(self, gaussian):
        """Test compressing past the grid resolution is refused."""
        with pytest.raises(DomainOverflow, match="aliases"):
            bernstein_dilation_spread(gaussian, 2, "inf", ks=range(0, 8), mode="resample")


class TestHolderAndStage:
    """Test the Hölder audit and the lemma stage."""

    def test_holder_audit(self, small_bank):
        """Test one entry per exponent set over consecutive pairs."""
        audits = holder_audit(small_bank, HOLDER_EXPONENTS[:2])
        assert [a.exponents for a in audits] == [tuple(e) for e in HOLDER_EXPONENTS[:2]]
        assert all(a.pairs == len(small_bank) - 1 for a in audits)
        assert all(0.0 < a.max_defect < math.inf for a in audits)

    def test_stage_writes_report(self, tmp_path, small_bank):
        """Test the stage passes on the bank and writes its JSON."""
        path = str(tmp_path / "lemmas.json")
        oracles = LemmaOracles(LemmaOracleConfig(report_path=path, sequence_count=200))
        report = oracles.initiate_lemma_oracles(small_bank, seed=3, write=True)
        assert report.passed
        assert report.bernstein_spread is not None
        assert report.bernstein_grid_spread is not None and math.isfinite(report.bernstein_grid_spread)
        with open(path) as fh:
            payload = json.load(fh)
        assert payload["metadata"]["seed"] == 3
        assert payload["bernstein_grid_spread"] == report.bernstein_grid_spread
        assert len(payload["holder"]) == len(HOLDER_EXPONENTS)

    def test_stage_without_bank(self):
        """Test the sequence part runs alone."""
        report = LemmaOracles(LemmaOracleConfig(sequence_count=50)).initiate_lemma_oracles()
        assert report.bernstein_max is None
        assert report.holder == []
