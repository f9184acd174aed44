"""
Unit tests for the acceptance suite checks.
"""
import pytest
import json
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.pipeline.selftest import SelfTest, SelfTestCheck, SelfTestReport


@pytest.fixture
def quick_suite(out_dir):
    return SelfTest(str(out_dir), seed=3, workers=1, quick=True)


class TestSelfTestChecks:
    """Test individual acceptance checks in quick mode."""

    def test_lorentz_closed_forms(self, quick_suite):
        """Test closed-form Lorentz norms agree with quadrature and indicator formulas."""
        check = quick_suite.lorentz_closed_forms()
        assert check.name == "lorentz-closed-forms"
        assert check.passed, check.detail

    def test_lorentz_diagonal(self, quick_suite):
        """Test L^{p,p} matches the Lebesgue norm."""
        assert quick_suite.lorentz_diagonal().passed

    def test_dilation_scaling(self, quick_suite):
        """Test Lorentz norms scale exactly under dyadic dilation."""
        check = quick_suite.dilation_scaling()
        assert check.passed, check.detail

    def test_consistency(self, quick_suite):
        """Test the quick catalog scan finds no inconsistency."""
        check = quick_suite.consistency()
        assert check.passed
        assert check.detail["tuples"] == 500

    def test_embedding_constants(self, quick_suite):
        """Test embedding constants are recorded for two seeds and agree."""
        check = quick_suite.embeddings()
        assert check.name == "embedding-constants"
        assert check.passed, check.detail
        for result in check.detail.values():
            assert [c["seed"] for c in result["constants"]] == [3, 4]

    def test_bank_is_memoised(self, quick_suite):
        """Test repeated bank requests reuse the same bank."""
        assert quick_suite.bank("gaussian-orbit") is quick_suite.bank("gaussian-orbit")
        assert len(quick_suite.bank("gaussian-orbit")) == 8


class TestSelfTestReport:
    """Test the report aggregation."""

    def test_passed_needs_checks(self):
        """Test an empty report never passes."""
        assert not SelfTestReport([]).passed

    def test_one_failure_fails(self):
        """Test a single failing check fails the report."""
        report = SelfTestReport([SelfTestCheck("a", True), SelfTestCheck("b", False, {"why": 1})])
        assert not report.passed
        assert json.loads(json.dumps(report.to_dict()))["checks"][1]["detail"] == {"why": 1}

    def test_stage_errors_become_failed_checks(self, quick_suite):
        """Test a domain error inside a stage is recorded, not raised."""
        from src.exception import UnknownTheorem

        def broken():
            raise UnknownTheorem("no such entry")

        out = quick_suite._run("broken", broken)
        assert len(out) == 1 and not out[0].passed
        assert out[0].detail["error"] == "unknown-theorem"
