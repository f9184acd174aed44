"""
Unit tests for grids, sampled functions, dilations and banks.
"""
import pytest
import numpy as np
from fractions import Fraction
import sys
import os

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.exception import DomainOverflow, GridMismatch
from src.grid import (BankSpec, GridGeometry, SampledFunction, annulus_function, bump_profile, dilate_pow2,
                      export_csv, function_bank, load_function, modulated_bump, modulation_centres, psi0,
                      save_function, smooth_step, to_physical, to_spectral)
from src.lorentz import level_profile, lorentz_norm


class TestGridGeometry:
    """Test grid geometry bookkeeping."""

    def test_rejects_bad_sizes(self):
        """Test N must be a power of two and n must be 1 or 2."""
        with pytest.raises(ValueError, match="power of two"):
            GridGeometry(1, 100, 8)
        with pytest.raises(ValueError, match="n = 1 or 2"):
            GridGeometry(3, 64, 8)

    def test_exact_volumes(self, small_geometry):
        """Test cell volume and total measure are exact."""
        assert small_geometry.cell_volume_exact == Fraction(32, 1024)
        assert small_geometry.total_measure == Fraction(32)
        assert small_geometry.nyquist == pytest.approx(512 * np.pi / 16)

    def test_rescaled(self, small_geometry):
        """Test rescaling divides the half period by 2^k."""
        assert small_geometry.rescaled(2).half_period == Fraction(4)
        assert small_geometry.rescaled(-1).half_period == Fraction(32)

    def test_dict_round_trip(self):
        """Test geometry serializes with an exact half period."""
        g = GridGeometry(2, 64, Fraction(17, 2))
        assert GridGeometry.from_dict(g.to_dict()) == g


class TestSampledFunction:
    """Test transforms and tail tracking."""

    def test_shape_checked(self, small_geometry):
        """Test samples must match the grid."""
        with pytest.raises(GridMismatch):
            SampledFunction(small_geometry, np.zeros(10))

    def test_samples_frozen(self, simple_function):
        """Test samples are immutable."""
        with pytest.raises(ValueError):
            simple_function.samples[0] = 1.0

    def test_fft_round_trip_and_plancherel(self, gaussian):
        """Test the transform pair inverts and preserves the L2 norm."""
        spec = to_spectral(gaussian)
        back = to_physical(spec)
        assert np.allclose(back.samples, gaussian.samples, atol=1e-12)
        assert spec.l2_norm() == pytest.approx(gaussian.l2_norm(), rel=1e-12)

    def test_gaussian_transform(self, gaussian):
        """Test the unitary transform of exp(-x^2/2) is exp(-xi^2/2)."""
        spec = to_spectral(gaussian)
        xi = gaussian.geometry.frequency_vectors()[0]
        assert np.allclose(spec.coefficients, np.exp(-xi ** 2 / 2), atol=1e-10)

    def test_tail_defect(self, gaussian, small_geometry):
        """Test a resolved Gaussian has a tiny tail and a flat function does not."""
        assert gaussian.tail_defect() < 1e-10
        flat = SampledFunction(small_geometry, np.ones(small_geometry.shape))
        assert flat.spatial_tail() == pytest.approx(1.0)

    def test_zero_mean(self, simple_function):
        """Test the zero-mean representative has no frequency-0 coefficient."""
        assert abs(to_spectral(simple_function.zero_mean()).coefficients[0]) < 1e-12


class TestDilation:
    """Test the realizations of f(2^k x)."""

    @pytest.mark.parametrize("k", [-3, -1, 1, 4])
    def test_rescale_scales_measure(self, simple_function, k):
        """Test rescaling multiplies Lorentz norms by 2^{-k/p}."""
        g = dilate_pow2(simple_function, k)
        base = lorentz_norm(level_profile(simple_function), "3/2", "2")
        assert lorentz_norm(level_profile(g), "3/2", "2") == pytest.approx(2.0 ** (-k / 1.5) * base, rel=1e-12)

    def test_rescale_limit(self, simple_function):
        """Test the configured dilation limit is enforced."""
        with pytest.raises(DomainOverflow, match="exceeds"):
            dilate_pow2(simple_function, 40)

    def test_resample_replicates(self, simple_function):
        """Test k = -1 resampling doubles every level set."""
        g = dilate_pow2(simple_function, -1, mode="resample")
        assert g.geometry == simple_function.geometry
        base = lorentz_norm(level_profile(simple_function), 2, 2)
        assert lorentz_norm(level_profile(g), 2, 2) == pytest.approx(np.sqrt(2) * base, rel=1e-12)

    def test_resample_subsamples_band_limited(self, gaussian):
        """Test k = 1 resampling of a band-limited function gives exp(-2x^2)."""
        g = dilate_pow2(gaussian, 1, mode="resample")
        x = gaussian.geometry.axis()
        assert np.allclose(g.samples, np.exp(-2 * x ** 2), atol=1e-12)

    def test_unknown_mode(self, simple_function):
        """Test unknown modes are refused."""
        with pytest.raises(ValueError, match="mode"):
            dilate_pow2(simple_function, 1, mode="stretch")

    def test_resample_aliases(self, simple_function):
        """Test subsampling a function that is not band-limited is refused."""
        with pytest.raises(DomainOverflow, match="aliases"):
            dilate_pow2(simple_function, 1, mode="resample")

    @pytest.mark.parametrize("mode", ["resample", "bandlimited"])
    def test_spreading_truncates(self, simple_function, mode):
        """Test spreading past the torus is refused on a fixed grid."""
        with pytest.raises(DomainOverflow, match="truncates"):
            dilate_pow2(simple_function, -3, mode=mode)

    def test_bandlimited_spreads_gaussian(self, gaussian):
        """Test k = -1 band-limited spreading gives exp(-x^2/8) on the same grid."""
        g = dilate_pow2(gaussian, -1, mode="bandlimited")
        x = gaussian.geometry.axis()
        assert g.geometry == gaussian.geometry
        assert np.allclose(g.samples, np.exp(-x ** 2 / 8), atol=1e-10)

    def test_bandlimited_round_trip(self, gaussian):
        """Test spreading then compressing a resolved function returns it."""
        back = dilate_pow2(dilate_pow2(gaussian, -1, mode="bandlimited"), 1, mode="bandlimited")
        assert np.allclose(back.samples, gaussian.samples, atol=1e-10)

    @pytest.mark.parametrize("k", [-5, -1, 2, 7])
    def test_rescale_inverse_is_exact(self, simple_function, k):
        """Test f(2^k .) dilated back by 2^-k is f, bit for bit."""
        back = dilate_pow2(dilate_pow2(simple_function, k), -k)
        assert back.geometry == simple_function.geometry
        assert np.array_equal(back.samples, simple_function.samples)


class TestProfiles:
    """Test the canonical smooth profiles."""

    def test_smooth_step(self):
        """Test the smooth step is 0 below 0 and 1 above 1."""
        u = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
        out = smooth_step(u)
        assert out[0] == 0.0 and out[1] == 0.0
        assert out[2] == pytest.approx(0.5)
        assert out[3] == 1.0 and out[4] == 1.0

    def test_bump_and_psi0(self):
        """Test the bump peaks at 1 and psi0 has the right plateau."""
        assert bump_profile(0.0) == pytest.approx(1.0)
        assert bump_profile(1.0) == 0.0
        assert np.all(psi0(np.array([0.0, 0.5, 1.0])) == 1.0)
        assert np.all(psi0(np.array([1.5, 3.0])) == 0.0)

    def test_annulus_function_support(self):
        """Test the annulus function lives strictly inside 3/4 < |xi| < 1."""
        f = annulus_function()
        spec = to_spectral(f)
        mag = f.geometry.frequency_magnitude()
        outside = (mag <= 0.76) | (mag >= 0.99)
        assert np.abs(spec.coefficients[outside]).max() < 1e-12 * spec.peak()
        with pytest.raises(ValueError, match="annulus"):
            annulus_function(a=Fraction(1, 2))

    def test_modulated_bump_centres(self):
        """Test centres sit on the grid next to 2^k."""
        g = GridGeometry.modulation_default()
        centres = modulation_centres(3, g)
        assert all(abs(c - 2 ** (k + 1)) <= g.frequency_step / 2 for k, c in enumerate(centres))
        f = modulated_bump([1.0, 0.0, 2.0], "1/12", g)
        assert f.geometry == g

    def test_modulated_bump_overflow(self):
        """Test a pattern above the Nyquist frequency is refused."""
        with pytest.raises(DomainOverflow, match="Nyquist"):
            modulated_bump([1.0] * 12, "1/12", GridGeometry.modulation_default())


class TestBanks:
    """Test seeded function banks."""

    def test_bank_is_deterministic(self):
        """Test the same seed gives the same digest."""
        spec = BankSpec("random-bandlimited", 3, 1, 11)
        assert function_bank(spec).digest() == function_bank(spec).digest()
        other = BankSpec("random-bandlimited", 3, 1, 12)
        assert function_bank(other).digest() != function_bank(spec).digest()

    def test_bank_descriptor(self, small_bank):
        """Test the descriptor records spec, grid and digest."""
        desc = small_bank.descriptor()
        assert desc["spec"]["family"] == "random-bandlimited"
        assert desc["grid"]["points"] == small_bank.geometry.points
        assert len(desc["digest"]) == 64
        assert desc["max_tail_defect"] <= 1e-10

    @pytest.mark.parametrize("family", ["compact-bandlimited", "gaussian-orbit", "indicator-sums", "single-annulus"])
    def test_other_families(self, family):
        """Test the remaining desk families build."""
        bank = function_bank(BankSpec(family, 3, 1, 5))
        assert len(bank) == 3

    def test_unknown_family(self):
        """Test unknown families are refused."""
        with pytest.raises(ValueError, match="unknown bank family"):
            function_bank(BankSpec("noise", 2))

    def test_remark31_alias(self):
        """Test the remark31 bank resolves to the single-annulus function."""
        spec = BankSpec("remark31", 1, 1, 0)
        assert spec.family == "single-annulus"
        bank = function_bank(spec)
        assert len(bank) == 1
        f = bank[0]
        coeffs = np.abs(to_spectral(f).coefficients)
        mag = f.geometry.frequency_magnitude()
        outside = (mag <= 0.75) | (mag >= 1.0)
        assert coeffs[outside].max() < 1e-12 * coeffs.max()
        assert bank.descriptor()["spec"]["family"] == "single-annulus"

    @pytest.mark.parametrize("k", [-3, -1, 1, 3])
    def test_compact_bank_survives_orbit(self, compact_bank, k):
        """Test compact members stay on the torus and unaliased along the audit orbit."""
        for f in compact_bank:
            g = dilate_pow2(f, k, mode="bandlimited", tolerance=1e-6)
            assert g.geometry == f.geometry
            assert g.tail_defect() < 1e-6

    def test_compact_bank_2d_orbit(self):
        """Test a 2D compact member survives the 2D audit orbit on the default grid."""
        bank = function_bank(BankSpec("compact-bandlimited", 1, 2, 3))
        assert bank.geometry == GridGeometry.default(2)
        for k in (-1, 1):
            g = dilate_pow2(bank[0], k, mode="bandlimited", tolerance=1e-6)
            assert g.tail_defect() < 1e-6


class TestSerialization:
    """Test the binary container and CSV export."""

    def test_save_load(self, tmp_path, simple_function):
        """Test the container stores geometry and samples."""
        path = save_function(str(tmp_path / "f.lpq"), simple_function)
        loaded = load_function(path)
        assert loaded.geometry == simple_function.geometry
        assert np.allclose(loaded.samples, simple_function.samples)

    def test_export_csv(self, tmp_path, simple_function):
        """Test CSV export writes one row per sample."""
        path = export_csv(str(tmp_path / "f.csv"), simple_function)
        with open(path) as fh:
            lines = fh.read().splitlines()
        assert lines[0] == "x1,re,im"
        assert len(lines) == simple_function.points + 1

    def test_export_csv_refuses_large_grids(self, tmp_path, small_bank):
        """Test CSV export is refused past the point limit."""
        with pytest.raises(ValueError, match="too large"):
            export_csv(str(tmp_path / "big.csv"), small_bank[0])
