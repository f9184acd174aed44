"""
Exact-rational exponents in [1, inf], parameter tuples and star values.

Every exponent is stored through its reciprocal so that inf is simply the
reciprocal 0. Nothing in this module touches floating point.
"""
import math
from dataclasses import dataclass, fields, replace as dc_replace
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from typing import Any, Dict, Union

from src.exception import ConventionViolation

Rational = Union[int, Fraction, str]


def as_fraction(value: Rational) -> Fraction:
    """Parse an int, Fraction or "num/den" string. Floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


@total_ordering
@dataclass(frozen=True)
class ExtendedExponent:
    """Exponent in [1, inf] held by its reciprocal in [0, 1]."""

    reciprocal: Fraction

    def __post_init__(self):
        recip = as_fraction(self.reciprocal)
        if not (0 <= recip <= 1):
            raise ValueError(f"reciprocal {recip} outside [0, 1]")
        object.__setattr__(self, "reciprocal", recip)

    @classmethod
    def of(cls, value: Union["ExtendedExponent", Rational, float]) -> "ExtendedExponent":
        if isinstance(value, ExtendedExponent):
            return value
        if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
            return cls(Fraction(0))
        if isinstance(value, float):
            if math.isinf(value):
                return cls(Fraction(0))
            raise TypeError("exponents must be given exactly, not as floats")
        exponent = as_fraction(value)
        if exponent < 1:
            raise ValueError(f"exponent {exponent} below 1")
        return cls(1 / exponent)

    @classmethod
    def infinity(cls) -> "ExtendedExponent":
        return cls(Fraction(0))

    @property
    def is_infinite(self) -> bool:
        return self.reciprocal == 0

    def value(self) -> Union[Fraction, float]:
        return math.inf if self.is_infinite else 1 / self.reciprocal

    def __float__(self) -> float:
        return math.inf if self.is_infinite else float(1 / self.reciprocal)

    def __lt__(self, other: "ExtendedExponent") -> bool:
        other = ExtendedExponent.of(other)
        return self.reciprocal > other.reciprocal

    def __str__(self) -> str:
        return "inf" if self.is_infinite else str(1 / self.reciprocal)

    def __repr__(self) -> str:
        return f"ExtendedExponent({self})"


INF = ExtendedExponent.infinity()


_RATIONAL_FIELDS = ("s", "s1", "s2", "theta")
_EXPONENT_FIELDS = ("p", "p1", "p2", "q", "q1", "q2", "r", "r1", "r2")


@dataclass(frozen=True)
class ParamTuple:
    """The full parameter tuple (s, s1, s2, p, p1, p2, q, q1, q2, r, r1, r2, theta) in dimension n."""

    n: int
    s: Fraction
    s1: Fraction
    s2: Fraction
    p: ExtendedExponent
    p1: ExtendedExponent
    p2: ExtendedExponent
    q: ExtendedExponent
    q1: ExtendedExponent
    q2: ExtendedExponent
    r: ExtendedExponent
    r1: ExtendedExponent
    r2: ExtendedExponent
    theta: Fraction

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n!r}")
        for name in _RATIONAL_FIELDS:
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        for name in _EXPONENT_FIELDS:
            object.__setattr__(self, name, ExtendedExponent.of(getattr(self, name)))

        if not (0 < self.theta < 1):
            raise ConventionViolation(f"theta={self.theta} must lie strictly between 0 and 1")
        for p_name, q_name in (("p", "q"), ("p1", "q1"), ("p2", "q2")):
            if getattr(self, p_name).is_infinite and not getattr(self, q_name).is_infinite:
                raise ConventionViolation(
                    f"{p_name}=inf requires {q_name}=inf, got {q_name}={getattr(self, q_name)}"
                )

    @classmethod
    def build(cls, n: int = 1, s: Rational = 0, s1: Rational = 0, s2: Rational = 0,
              p: Any = 2, p1: Any = 2, p2: Any = 2, q: Any = None, q1: Any = None, q2: Any = None,
              r: Any = 2, r1: Any = 2, r2: Any = 2, theta: Rational = Fraction(1, 2)) -> "ParamTuple":
        """Keyword constructor; fine indices default to the matching p (Lebesgue case)."""
        return cls(n=n, s=s, s1=s1, s2=s2, p=p, p1=p1, p2=p2,
                   q=p if q is None else q, q1=p1 if q1 is None else q1, q2=p2 if q2 is None else q2,
                   r=r, r1=r1, r2=r2, theta=theta)

    def replace(self, **changes) -> "ParamTuple":
        return dc_replace(self, **changes)

    def swap(self) -> "ParamTuple":
        """Exchange the two endpoints and replace theta by 1 - theta."""
        return dc_replace(
            self,
            s1=self.s2, s2=self.s1,
            p1=self.p2, p2=self.p1,
            q1=self.q2, q2=self.q1,
            r1=self.r2, r2=self.r1,
            theta=1 - self.theta,
        )

    def to_json(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"n": self.n}
        for f in fields(self):
            if f.name != "n":
                payload[f.name] = str(getattr(self, f.name))
        return payload

    to_dict = to_json

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "ParamTuple":
        data = dict(payload)
        data["n"] = int(data.get("n", 1))
        return cls.build(**data)

    def key(self) -> str:
        """Compact stable label, used to sort scan rows."""
        parts = [f"n={self.n}"] + [f"{f.name}={getattr(self, f.name)}" for f in fields(self) if f.name != "n"]
        return ",".join(parts)


@dataclass(frozen=True)
class StarValues:
    s_star: Fraction
    p_star_recip: Fraction
    q_star_recip: Fraction
    r_star_recip: Fraction

    @property
    def p_star(self) -> ExtendedExponent:
        return ExtendedExponent(self.p_star_recip)

    @property
    def q_star(self) -> ExtendedExponent:
        return ExtendedExponent(self.q_star_recip)

    @property
    def r_star(self) -> ExtendedExponent:
        return ExtendedExponent(self.r_star_recip)


def star_values(t: ParamTuple) -> StarValues:
    """Exact theta-convex combinations of the endpoint parameters."""
    th = t.theta
    return StarValues(
        s_star=(1 - th) * t.s1 + th * t.s2,
        p_star_recip=(1 - th) * t.p1.reciprocal + th * t.p2.reciprocal,
        q_star_recip=(1 - th) * t.q1.reciprocal + th * t.q2.reciprocal,
        r_star_recip=(1 - th) * t.r1.reciprocal + th * t.r2.reciprocal,
    )


class Mode(str, Enum):
    INHOMOGENEOUS = "inhomogeneous"
    HOMOGENEOUS = "homogeneous"


def smoothness_gap(t: ParamTuple) -> Fraction:
    """s* - s."""
    return star_values(t).s_star - t.s


def integrability_gap(t: ParamTuple) -> Fraction:
    """n/p* - n/p."""
    return t.n * (star_values(t).p_star_recip - t.p.reciprocal)


def common_necessary(t: ParamTuple, mode: Union[Mode, str] = Mode.INHOMOGENEOUS) -> bool:
    """s* - s >= n/p* - n/p >= 0, or the equality form for homogeneous spaces."""
    mode = Mode(mode)
    gs = smoothness_gap(t)
    gp = integrability_gap(t)
    if mode is Mode.HOMOGENEOUS:
        return gs == gp and gp >= 0
    return gs >= gp >= 0
