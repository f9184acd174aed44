"""
Frozen fixtures: sufficiency triples, witness tuples outside the necessary region, the
norm-law parameter grid and the thresholds fixed after the first verified run.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.components.ratio_audit import TripleSpec
from src.config import config
from src.exponents import ParamTuple
from src.grid import BankSpec
from src.spaces import Scale, SpaceSpec

INF = "inf"

ORBIT_SPREAD_LIMIT = 1.01
SOBOLEV_CONSTANT = 10.0

# (s, p, q, r) for the single-annulus dilation law
LAW_GRID: Tuple[Tuple[str, str, str, str], ...] = (
    ("0", "2", "2", "2"),
    ("1", "2", INF, INF),
    ("1", "2", "1", "1"),
    ("1/2", "4", "2", "1"),
    ("-1", "3/2", "3", "2"),
    ("2", "1", "1", INF),
    ("1/4", "4/3", INF, "2"),
    ("3/2", "3", "1", INF),
    ("0", INF, INF, "1"),
    ("-1/2", "6", "2", "3"),
    ("1", "1", INF, "2"),
    ("3/4", "8", "8", "4"),
)

# (s, p, q) for F^{s,2}_{p,q} = H^s_{p,q}
EQUIVALENCE_SETTINGS: Tuple[Tuple[str, str, str], ...] = (
    ("0", "2", "2"),
    ("1", "2", INF),
    ("1/2", "3", "1"),
)

_MODULATION_SETTINGS = (
    ("0", "2", "2", "2"),
    ("1/2", "4", "2", "1"),
    ("-1", "3", INF, INF),
    ("1", "3/2", "1", "3"),
)


def modulation_patterns(count: int = 20, max_length: int = 6,
                        seed: Optional[int] = None) -> List[Tuple[Tuple[complex, ...], Tuple[str, str, str, str]]]:
    """Coefficient patterns for the modulation law; the first two are e_1 and (1, ..., 1)."""
    rng = np.random.default_rng(config.audit.seed if seed is None else seed)
    patterns: List[Tuple[complex, ...]] = [(1.0,), tuple([1.0] * max_length)]
    while len(patterns) < count:
        length = int(rng.integers(1, max_length + 1))
        coeffs = rng.normal(size=length) + 1j * rng.normal(size=length)
        coeffs[rng.random(length) < 0.25] = 0.0
        if not np.any(coeffs):
            coeffs[0] = 1.0
        patterns.append(tuple(complex(c) for c in coeffs))
    return [(a, _MODULATION_SETTINGS[i % len(_MODULATION_SETTINGS)]) for i, a in enumerate(patterns)]


@dataclass(frozen=True)
class SufficiencyFixture:
    name: str
    theorem_id: str
    t: ParamTuple
    triple: TripleSpec
    bank_family: Optional[str] = None

    def __post_init__(self):
        # orbit-audited triples need members that survive the fixed-grid dilation orbit
        if self.bank_family is None:
            compact = self.triple.scale_invariant(self.t.n)
            object.__setattr__(self, "bank_family", "compact-bandlimited" if compact else "random-bandlimited")

    def bank_spec(self, count: Optional[int] = None, seed: Optional[int] = None) -> BankSpec:
        return BankSpec(self.bank_family, count or config.audit.bank_size, self.t.n,
                        config.audit.seed if seed is None else seed)


def _on_scale(name: str, theorem_id: str, scale: Scale, homogeneous: bool, **params) -> SufficiencyFixture:
    t = ParamTuple.build(**params)
    return SufficiencyFixture(name, theorem_id, t, TripleSpec.from_tuple(t, scale, homogeneous, name))


def _gagliardo_nirenberg(name: str, theorem_id: str, target: SpaceSpec, left: SpaceSpec,
                         right: SpaceSpec, **params) -> SufficiencyFixture:
    t = ParamTuple.build(**params)
    return SufficiencyFixture(name, theorem_id, t, TripleSpec(target, left, right, t.theta, name))


def _gn_params(**params) -> Dict[str, str]:
    base = {"r": "2", "r1": "2", "r2": INF}
    base.update(params)
    return base


SUFFICIENCY_FIXTURES: Tuple[SufficiencyFixture, ...] = (
    _on_scale("tl-homogeneous-critical-slope", "3.8", Scale.F, True,
              s="1/4", s1="0", s2="1", p="4", p1="2", p2="2", q="1", q1=INF, q2=INF,
              r="1", r1=INF, r2=INF, theta="1/2"),
    _on_scale("besov-homogeneous-critical-slope", "4.2", Scale.B, True,
              s="1/4", s1="0", s2="1", p="4", p1="2", p2="2", q="1", q1=INF, q2=INF,
              r="1", r1=INF, r2=INF, theta="1/2"),
    _on_scale("sobolev-homogeneous", "5.9", Scale.H, True,
              s="1/4", s1="0", s2="1", p="4", p1="2", p2="2", q="1", q1=INF, q2=INF,
              r="2", r1="2", r2="2", theta="1/2"),
    _gagliardo_nirenberg(
        "nash", "5.10",
        SpaceSpec.of(Scale.L, p="2", q="1"),
        SpaceSpec.of(Scale.L, p="1", q="1"),
        SpaceSpec.of(Scale.H, s="1", p="2", q=INF, homogeneous=True),
        **_gn_params(s="0", s1="0", s2="1", p="2", q="1", p1="1", q1="1", p2="2", q2=INF,
                   theta="1/3"),
    ),
    _gagliardo_nirenberg(
        "ladyzhenskaya", "5.12",
        SpaceSpec.of(Scale.L, p="4", q="1"),
        SpaceSpec.of(Scale.L, p="2", q=INF),
        SpaceSpec.of(Scale.W, p="2", q=INF, homogeneous=True, k=1),
        **_gn_params(n=2, s="0", s1="0", s2="1", p="4", q="1", p1="2", q1=INF, p2="2", q2=INF,
                   theta="1/2"),
    ),
    _on_scale("tl-homogeneous-star", "3.8", Scale.F, True,
              s="3/8", s1="0", s2="1", p="4", p1="2", p2="4", q="8/3", q1="2", q2="4",
              r="2", r1="2", r2="2", theta="1/2"),
    _on_scale("tl-inhomogeneous-flat", "3.1", Scale.F, False,
              s="1/2", s1="0", s2="1", p="2", p1="2", p2="2", theta="1/2"),
    _on_scale("besov-inhomogeneous-gap", "4.1", Scale.B, False,
              s="0", s1="0", s2="2", p="4", p1="2", p2="2", theta="1/2"),
    _on_scale("sobolev-inhomogeneous-gap", "5.8", Scale.H, False,
              s="0", s1="0", s2="2", p="4", p1="2", p2="2", theta="1/2"),
    _gagliardo_nirenberg(
        "nash-weak-source", "5.12",
        SpaceSpec.of(Scale.L, p="2", q="1"),
        SpaceSpec.of(Scale.L, p="1", q=INF),
        SpaceSpec.of(Scale.H, s="1", p="2", q=INF, homogeneous=True),
        **_gn_params(s="0", s1="0", s2="1", p="2", q="1", p1="1", q1=INF, p2="2", q2=INF,
                   theta="1/3"),
    ),
)


def sufficiency_fixture(name: str) -> SufficiencyFixture:
    for fx in SUFFICIENCY_FIXTURES:
        if fx.name == name:
            return fx
    raise KeyError(f"unknown fixture {name!r}; expected one of {[f.name for f in SUFFICIENCY_FIXTURES]}")


@dataclass(frozen=True)
class WitnessFixture:
    name: str
    t: ParamTuple
    direction: str
    exponent: Fraction


def _witness(name: str, direction: str, exponent: str, **params) -> WitnessFixture:
    return WitnessFixture(name, ParamTuple.build(**params), direction, Fraction(exponent))


# necessary-condition violations on the B scale; the exponent is the predicted growth rate per dyadic step
WITNESS_FIXTURES: Tuple[WitnessFixture, ...] = (
    _witness("smoothness-excess", "up", "1", s="1", s1="0", s2="0", p="2", p1="2", p2="2"),
    _witness("smoothness-quarter", "up", "1/4", s="1/2", s1="0", s2="1/2", p="2", p1="2", p2="2"),
    _witness("integrability-gain", "up", "1/4", s="0", s1="0", s2="0", p="4", p1="2", p2="2"),
    _witness("both-up", "up", "3/4", s="1", s1="0", s2="1", p="4", p1="2", p2="2"),
    _witness("smoothness-third", "up", "1/2", s="3/2", s1="1", s2="1", p="2", p1="2", p2="2",
             theta="1/3"),
    _witness("integrability-loss", "down", "1/2", s="0", s1="0", s2="0", p="1", p1="2", p2="2"),
    _witness("integrability-loss-smooth", "down", "1/4", s="0", s1="0", s2="2", p="2", p1="4", p2="4"),
    _witness("integrability-loss-mixed", "down", "3/8", s="0", s1="0", s2="1", p="4/3", p1="2", p2="4"),
    _witness("integrability-loss-third", "down", "1/3", s="0", s1="1", s2="0", p="3/2", p1="3", p2="3"),
    _witness("both-violated", "up", "3/2", s="2", s1="0", s2="0", p="1", p1="2", p2="2"),
)


@dataclass(frozen=True)
class EmbeddingFixture:
    name: str
    theorem_id: str
    t: ParamTuple
    source: SpaceSpec
    target: SpaceSpec


def _embedding(name: str, theorem_id: str, homogeneous: bool, **params) -> EmbeddingFixture:
    t = ParamTuple.build(**params)
    source = SpaceSpec.of(Scale.F, s=t.s1, p=t.p1, q=t.q1, r=t.r1, homogeneous=homogeneous)
    target = SpaceSpec.of(Scale.F, s=t.s2, p=t.p2, q=t.q2, r=t.r2, homogeneous=homogeneous)
    return EmbeddingFixture(name, theorem_id, t, source, target)


# sufficient embeddings; the bank constant must stay within EMBEDDING_SEED_SPREAD across seeds
EMBEDDING_FIXTURES: Tuple[EmbeddingFixture, ...] = (
    _embedding("tl-smoothness-drop", "2.9", False, s1="1", s2="0", p1="2", p2="2"),
    _embedding("tl-homogeneous-sobolev", "2.13", True, s1="1/4", s2="0", p1="2", p2="4"),
)
EMBEDDING_SEED_SPREAD = 3.0
