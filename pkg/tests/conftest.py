"""
Pytest configuration and shared fixtures.
"""
import pytest
import numpy as np
import os
import sys

# Add src to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.exponents import ParamTuple
from src.grid import BankSpec, GridGeometry, SampledFunction, function_bank


@pytest.fixture
def small_geometry():
    """Small 1D grid that still resolves enough dyadic annuli."""
    return GridGeometry(1, 1024, 16)


@pytest.fixture
def simple_function(small_geometry):
    """Three-valued simple function in the middle of the grid."""
    samples = np.zeros(small_geometry.shape)
    samples[400:440] = 1.0
    samples[500:520] = 3.0
    samples[600:601] = 2.0
    return SampledFunction(small_geometry, samples)


@pytest.fixture
def gaussian(small_geometry):
    """Well-resolved Gaussian, both in space and in frequency."""
    x = small_geometry.axis()
    return SampledFunction(small_geometry, np.exp(-x ** 2 / 2))


@pytest.fixture(scope="session")
def small_bank():
    """Four seeded band-limited members on the desk grid."""
    return function_bank(BankSpec("random-bandlimited", 4, 1, 7))


@pytest.fixture
def desk_tuple():
    """Homogeneous TL tuple matched by the critical-slope clause."""
    return ParamTuple.build(s="1/4", s1="0", s2="1", p="4", p1="2", p2="2", q="1", q1="inf", q2="inf",
                            r="1", r1="inf", r2="inf", theta="1/2")


@pytest.fixture
def out_dir(tmp_path):
    """Artifact directory for pipeline runs."""
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture(scope="session")
def compact_bank():
    """Four seeded packets that stay resolved along the dyadic audit orbit."""
    return function_bank(BankSpec("compact-bandlimited", 4, 1, 7))
