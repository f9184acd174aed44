"""
Configuration management for the Lorentz-scale interpolation toolkit.
Centralized settings for grids, multiplier families, audits and outputs.
"""
import os
from dataclasses import dataclass
from typing import Optional, Tuple

from dotenv import load_dotenv


@dataclass
class GridConfig:
    """Grid geometry and tail tracking."""
    points_1d: int = 2 ** 14
    half_period_1d: str = "64"
    points_2d: int = 512
    half_period_2d: str = "32"

    # The single-annulus test function needs a wide torus to decay
    annulus_points_1d: int = 2 ** 14
    annulus_half_period_1d: str = "8192"
    annulus_points_2d: int = 1024
    annulus_half_period_2d: str = "512"

    # Modulated bumps need both a fine frequency step and a high Nyquist frequency
    modulation_points_1d: int = 2 ** 16
    modulation_half_period_1d: str = "512"

    tail_tolerance: float = 1e-10
    tail_strip: str = "1/8"
    max_dilation: int = 12


@dataclass
class FamilyConfig:
    """Littlewood-Paley family configuration."""
    kind: str = 'inhomogeneous'
    necessity_epsilon: str = "1/12"
    partition_tolerance: float = 1e-12
    reconstruct_tolerance: float = 1e-9
    min_annuli: int = 6


@dataclass
class AuditConfig:
    """Ratio audits, witnesses and lemma oracles."""
    seed: int = 20240611
    bank_size: int = 50
    orbit: Tuple[int, int] = (-3, 3)
    orbit_2d: Tuple[int, int] = (-1, 1)
    orbit_mode: str = "bandlimited"
    witness_steps: int = 6
    fit_tolerance: float = 0.05
    fit_residual: float = 1e-2
    orbit_spread_limit: float = 1.01
    max_defect: float = 1e-6
    workers: int = 1
    support_threshold: float = 1e-12
    bernstein_min_width: Optional[float] = None


@dataclass
class OutputConfig:
    """Artifact locations and formats."""
    out_dir: str = 'artifacts'
    fmt: str = 'json'
    version: str = '0.1.0'
    failed_marker: str = 'FAILED'


class Config:
    """Main configuration class combining all configs."""

    def __init__(self):
        self.grid = GridConfig()
        self.family = FamilyConfig()
        self.audit = AuditConfig()
        self.output = OutputConfig()

    @classmethod
    def from_env(cls):
        """Load configuration from environment variables (and a .env file) if available."""
        load_dotenv()
        config = cls()

        seed = os.getenv('LPQ_SEED')
        if seed:
            config.audit.seed = int(seed)
        workers = os.getenv('LPQ_WORKERS')
        if workers:
            config.audit.workers = int(workers)
        bank_size = os.getenv('LPQ_BANK_SIZE')
        if bank_size:
            config.audit.bank_size = int(bank_size)
        tail = os.getenv('LPQ_TAIL_TOLERANCE')
        if tail:
            config.grid.tail_tolerance = float(tail)

        config.output.out_dir = os.getenv('LPQ_OUT', config.output.out_dir)
        config.output.fmt = os.getenv('LPQ_FORMAT', config.output.fmt).lower()

        return config


# Global config instance
config = Config.from_env()
