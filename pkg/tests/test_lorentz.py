"""
Unit tests for level-set profiles and Lorentz quasi-norms.
"""
import pytest
import numpy as np
import math
from fractions import Fraction
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.exception import ConventionViolation, DegenerateInput, ExponentMismatch, GridMismatch
from src.grid import GridGeometry, SampledFunction
from src.lorentz import (MixedOrder, holder_defect, level_profile, lorentz_evaluate, lorentz_norm,
                         lorentz_norm_of, lorentz_norm_quadrature, lr_norm, mixed_norm, pointwise_lr,
                         profile_of_array)


class TestLevelProfile:
    """Test the exact distribution function of a simple function."""

    def test_profile(self, simple_function):
        """Test distinct values and tail measures."""
        prof = level_profile(simple_function)
        assert list(prof.values) == [1.0, 2.0, 3.0]
        assert list(prof.counts) == [40, 1, 20]
        assert prof.support_measure == pytest.approx(61 / 32)

    def test_distribution_is_right_continuous(self, simple_function):
        """Test mu(alpha) counts |f| > alpha."""
        prof = level_profile(simple_function)
        assert prof.distribution(0.5) == pytest.approx(61 / 32)
        assert prof.distribution(1.0) == pytest.approx(21 / 32)
        assert prof.distribution(3.0) == 0.0

    def test_empty_profile(self, small_geometry):
        """Test the zero function has an empty profile and zero norms."""
        prof = level_profile(SampledFunction(small_geometry, np.zeros(small_geometry.shape)))
        assert prof.is_empty
        assert lorentz_norm(prof, 2, 1) == 0.0

    def test_profile_csv(self, tmp_path, simple_function):
        """Test the profile exports through pandas."""
        path = level_profile(simple_function).export_csv(str(tmp_path / "profile.csv"))
        with open(path) as fh:
            assert fh.readline().strip() == "value,tail_measure"


class TestLorentzNorm:
    """Test the closed-form Lorentz evaluation."""

    @pytest.mark.parametrize("p, q", [("1", "1"), ("3/2", "2"), ("2", "1"), ("3", "3/2"), ("4", "5")])
    def test_matches_quadrature(self, simple_function, p, q):
        """Test the closed form against adaptive quadrature."""
        prof = level_profile(simple_function)
        assert lorentz_norm(prof, p, q) == pytest.approx(lorentz_norm_quadrature(prof, p, q), rel=1e-9)

    @pytest.mark.parametrize("p, q", [("1", "1"), ("2", "1"), ("3", "7/2"), ("5/4", "inf")])
    def test_indicator_formula(self, p, q):
        """Test ||1_E||_{p,q} = (p/q)^{1/q} |E|^{1/p}."""
        m = 0.75
        prof = profile_of_array(np.ones(3), 0.25)
        pf = float(Fraction(p))
        if q == "inf":
            expected = m ** (1 / pf)
        else:
            qf = float(Fraction(q))
            expected = (pf / qf) ** (1 / qf) * m ** (1 / pf)
        assert lorentz_norm(prof, p, q) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("p", ["1", "3/2", "2", "3"])
    def test_diagonal_is_lebesgue(self, simple_function, p):
        """Test L^{p,p} = L^p."""
        pf = float(Fraction(p))
        lebesgue = (np.sum(simple_function.magnitude() ** pf) * simple_function.cell_volume) ** (1 / pf)
        assert lorentz_norm(level_profile(simple_function), p, p) == pytest.approx(lebesgue, rel=1e-10)

    def test_weak_norm(self, simple_function):
        """Test L^{p,inf} is sup alpha mu(alpha)^{1/p}."""
        expected = max(1 * math.sqrt(61 / 32), 2 * math.sqrt(21 / 32), 3 * math.sqrt(20 / 32))
        assert lorentz_norm(level_profile(simple_function), 2, "inf") == pytest.approx(expected, rel=1e-14)

    def test_infinite_p(self, simple_function):
        """Test L^{inf,inf} is the peak and L^{inf,q} is infinite by convention."""
        prof = level_profile(simple_function)
        assert lorentz_norm(prof, "inf", "inf") == 3.0
        value = lorentz_evaluate(prof, "inf", 2)
        assert math.isinf(value.value) and value.infinite_by_convention
        with pytest.raises(ConventionViolation, match="contains only 0"):
            lorentz_norm(prof, "inf", 2, require_finite=True)

    def test_q_monotone(self, simple_function):
        """Test the norm decreases in q."""
        prof = level_profile(simple_function)
        values = [lorentz_norm(prof, 2, q) for q in ("1", "3/2", "2", "4", "inf")]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_homogeneity(self, simple_function):
        """Test ||c f|| = |c| ||f||."""
        base = lorentz_norm(level_profile(simple_function), 3, 2)
        scaled = lorentz_norm(level_profile(simple_function.scaled(-2.5j)), 3, 2)
        assert scaled == pytest.approx(2.5 * base, rel=1e-13)

    def test_norm_of_values(self):
        """Test the array entry point agrees with the profile one."""
        values = np.array([0.0, 1.0, 1.0, 4.0])
        assert lorentz_norm_of(values, 0.5, 2, 1) == lorentz_norm(profile_of_array(values, 0.5), 2, 1)


class TestMixedNorms:
    """Test sequence norms and the two mixed orders."""

    def test_lr_norm(self):
        """Test finite and infinite l^r norms."""
        assert lr_norm([3.0, 4.0], 2) == pytest.approx(5.0)
        assert lr_norm([3.0, -4.0], "inf") == 4.0
        assert lr_norm([], 1) == 0.0

    def test_pointwise_lr(self):
        """Test pointwise l^r over the first axis."""
        stack = np.array([[3.0, 0.0], [4.0, 0.0]])
        assert np.allclose(pointwise_lr(stack, 2), [5.0, 0.0])

    def test_mixed_orders(self, small_geometry):
        """Test both orders coincide on disjointly supported pieces with r = q = p."""
        a = np.zeros(small_geometry.shape)
        b = np.zeros(small_geometry.shape)
        a[100:110] = 1.0
        b[200:230] = 2.0
        fs = [SampledFunction(small_geometry, a), SampledFunction(small_geometry, b)]
        inner = mixed_norm(fs, 2, 2, 2, MixedOrder.LORENTZ_OF_LR)
        outer = mixed_norm(fs, 2, 2, 2, "lr_of_lorentz")
        assert inner == pytest.approx(outer, rel=1e-13)

    def test_mixed_grid_mismatch(self, small_geometry, simple_function):
        """Test sequences must share one grid."""
        other = SampledFunction(GridGeometry(1, 1024, 8), simple_function.samples)
        with pytest.raises(GridMismatch):
            mixed_norm([simple_function, other], 2, 2, 2)


class TestHolder:
    """Test the Lorentz Hölder defect."""

    def test_defect_bounded(self, simple_function, gaussian):
        """Test the defect of a simple function against a Gaussian stays finite."""
        value = holder_defect(simple_function, gaussian, 1, 2, 2, 1, 2, 2)
        assert 0.0 < value < math.inf

    def test_exponent_relation(self, simple_function, gaussian):
        """Test 1/p = 1/p1 + 1/p2 is required."""
        with pytest.raises(ExponentMismatch):
            holder_defect(simple_function, gaussian, 2, 2, 2, 2, 2, 2)

    def test_zero_factor(self, simple_function, small_geometry):
        """Test a zero factor is degenerate."""
        zero = SampledFunction(small_geometry, np.zeros(small_geometry.shape))
        with pytest.raises(DegenerateInput):
            holder_defect(simple_function, zero, 1, 2, 2, 1, 2, 2)
