"""
Unit tests for the theorem catalog and the consistency scan.
"""
import pytest
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src import predicates
from src.exception import InconsistencyFound, UnknownTheorem
from src.exponents import ParamTuple
from src.predicates import (CATALOG, ScanGrid, StatementKind, Verdict, consistency_scan, evaluate, evaluate_all,
                            export_catalog, get_theorem, random_tuple_grid)


class TestCatalog:
    """Test theorem lookup."""

    @pytest.mark.parametrize("key", ["3.8", "Thm 3.8", "thm-3.8", "tl-interpolation-homogeneous"])
    def test_lookup(self, key):
        """Test ids, prefixed ids and aliases resolve to the same entry."""
        assert get_theorem(key).theorem_id == "3.8"

    def test_unknown(self):
        """Test unknown ids raise."""
        with pytest.raises(UnknownTheorem, match="9.99"):
            get_theorem("9.99")

    def test_catalog_kinds(self):
        """Test the characterization entries carry open clauses."""
        for tid in ("3.4", "3.7", "4.9", "4.10"):
            thm = CATALOG[tid]
            assert thm.kind is StatementKind.CHARACTERIZATION
            assert thm.to_dict()["open_clauses"]

    def test_export_catalog(self, tmp_path):
        """Test the catalog exports one row per theorem."""
        path = export_catalog(str(tmp_path / "catalog.csv"))
        with open(path) as fh:
            rows = fh.read().splitlines()
        assert len(rows) == len(CATALOG) + 1


class TestEvaluate:
    """Test verdicts on hand-checked tuples."""

    def test_desk_tuple_critical_slope(self, desk_tuple):
        """Test the homogeneous TL tuple is matched by clause (v) only."""
        v = evaluate("3.8", desk_tuple)
        assert v.sufficient is Verdict.TRUE
        assert v.matched_clauses == ("3.8(v)",)
        assert v.necessary_region_member is Verdict.TRUE
        assert v.to_dict()["matched_clauses"] == ["3.8(v)"]

    def test_inhomogeneous_counterpart(self, desk_tuple):
        """Test the same tuple satisfies the inhomogeneous statement."""
        v = evaluate("3.1", desk_tuple)
        assert v.sufficient is Verdict.TRUE
        assert "3.1(vii)" in v.matched_clauses

    def test_outside_region(self):
        """Test a smoothness excess fails sufficiency and necessity."""
        t = ParamTuple.build(s="1", s1="0", s2="0", p="2", p1="2", p2="2")
        v = evaluate("3.1", t)
        assert v.sufficient is Verdict.FALSE
        assert v.necessary_region_member is Verdict.FALSE

    def test_shape_guard(self, desk_tuple):
        """Test statements for fixed fine indices are not applicable elsewhere."""
        v = evaluate("3.2", desk_tuple)
        assert v.sufficient is Verdict.NOT_APPLICABLE
        assert not v.applicable

    def test_iff_embedding(self):
        """Test an embedding with a smoothness drop at equal p."""
        t = ParamTuple.build(s1="1", s2="0", p1="2", p2="2")
        v = evaluate("2.9", t)
        assert v.sufficient is Verdict.TRUE and v.iff_holds is Verdict.TRUE
        assert "2.9(ii)" in v.matched_clauses

    def test_characterization_open(self):
        """Test an open clause gives an open verdict."""
        t = ParamTuple.build(s="1/2", s1="0", s2="1", p="2", p1="2", p2="2", q="1", q1="inf", q2="inf",
                             r="1", r1="inf", r2="inf")
        v = evaluate("4.10", t)
        assert v.sufficient is Verdict.OPEN
        assert v.necessary_region_member is Verdict.TRUE
        assert v.headline is Verdict.OPEN

    def test_characterization_firm(self, desk_tuple):
        """Test a firm clause resolves a characterization."""
        v = evaluate("4.10", desk_tuple)
        assert v.sufficient is Verdict.TRUE
        assert v.matched_clauses == ("4.10(ii)",)

    def test_evaluate_all(self, desk_tuple):
        """Test the applicable filter."""
        everything = evaluate_all(desk_tuple)
        applicable = evaluate_all(desk_tuple, applicable_only=True)
        assert set(everything) == set(CATALOG)
        assert set(applicable) < set(everything)
        assert all(v.applicable for v in applicable.values())


class TestConsistencyScan:
    """Test the catalog coherence scan."""

    def test_random_grid_deterministic(self):
        """Test the seeded grid is reproducible."""
        assert random_tuple_grid(50, seed=3) == random_tuple_grid(50, seed=3)

    def test_scan_clean(self, tmp_path):
        """Test a seeded scan finds no inconsistencies and writes its CSV."""
        report = consistency_scan(ScanGrid(count=300, seed=5), csv_path=str(tmp_path / "scan.csv"))
        assert report.ok
        assert report.tuples_checked == 300
        assert report.verdicts_evaluated > 0
        assert os.path.exists(report.csv_path)

    def test_scan_parallel_matches_serial(self, tmp_path):
        """Test worker count does not change the rows."""
        serial = consistency_scan(ScanGrid(count=100, seed=9), workers=1)
        parallel = consistency_scan(ScanGrid(count=100, seed=9), workers=4)
        assert serial.rows == parallel.rows

    def test_scan_explicit_tuples(self, desk_tuple):
        """Test explicit tuple lists are accepted."""
        report = consistency_scan([desk_tuple, desk_tuple.swap()])
        assert report.ok
        assert report.grid["explicit"]

    def test_scan_raises_on_disagreement(self, monkeypatch):
        """Test a declared coincidence that disagrees on a tuple stops a strict scan."""
        # q1 > q2 blocks the TL critical clause while r1 = r2 keeps the Besov one
        t = ParamTuple.build(s1="1/4", s2="0", p1="2", p2="4", q1="4", q2="2")
        assert evaluate("2.9", t).sufficient is Verdict.FALSE
        assert evaluate("2.10", t).sufficient is Verdict.TRUE
        monkeypatch.setattr(predicates, "COINCIDENCES", (("2.9", "2.10"),))
        with pytest.raises(InconsistencyFound) as exc:
            consistency_scan([t], workers=1)
        assert exc.value.code == "inconsistency-found"
        clash = [p for p in exc.value.detail if p["check"] == "coincidence"]
        assert clash and clash[0]["detail"] == "2.9=false but 2.10=true"
        assert clash[0]["tuple"] == t.to_json()

    def test_lenient_scan_reports_disagreement(self, monkeypatch):
        """Test strict=False returns the inconsistencies instead of raising."""
        t = ParamTuple.build(s1="1/4", s2="0", p1="2", p2="4", q1="4", q2="2")
        monkeypatch.setattr(predicates, "COINCIDENCES", (("2.9", "2.10"),))
        report = consistency_scan([t], workers=1, strict=False)
        assert not report.ok
        assert any(p["check"] == "coincidence" for p in report.inconsistencies)
