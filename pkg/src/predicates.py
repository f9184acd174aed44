"""
Parameter-region conditions of the interpolation and embedding theorems,
evaluated in exact rational arithmetic.

Every theorem carries an applicability guard (its standing exponent ranges),
an optional shape guard (fine indices it is stated for), a base condition
and a list of labelled clauses. A tuple outside the guards is reported as
not-applicable, so "false" always means that a condition fails.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import config
from src.exception import InconsistencyFound, UnknownTheorem
from src.exponents import ExtendedExponent, ParamTuple, star_values
from src.logger import logging
from src.utils import write_csv


class Verdict(str, Enum):
    TRUE = "true"
    FALSE = "false"
    NOT_APPLICABLE = "not-applicable"
    OPEN = "open"

    @classmethod
    def of(cls, flag: bool) -> "Verdict":
        return cls.TRUE if flag else cls.FALSE


class StatementKind(str, Enum):
    SUFFICIENT = "sufficient"
    IFF = "iff"
    ONLY_IF = "only-if"
    CHARACTERIZATION = "characterization"


class Relation(str, Enum):
    INTERPOLATION = "interpolation"
    EMBEDDING = "embedding"


@dataclass(frozen=True)
class Quantities:
    """Star values and the differences every clause is written in."""

    t: ParamTuple
    s_star: Fraction
    p_star: Fraction
    q_star: Fraction
    r_star: Fraction

    @classmethod
    def of(cls, t: ParamTuple) -> "Quantities":
        return _quantities(t)

    @property
    def gs(self) -> Fraction:
        """s* - s"""
        return self.s_star - self.t.s

    @property
    def gp(self) -> Fraction:
        """n/p* - n/p"""
        return self.t.n * (self.p_star - self.t.p.reciprocal)

    @property
    def ds(self) -> Fraction:
        """s2 - s1"""
        return self.t.s2 - self.t.s1

    @property
    def dp(self) -> Fraction:
        """n/p2 - n/p1"""
        return self.t.n * (self.t.p2.reciprocal - self.t.p1.reciprocal)

    @property
    def e_ds(self) -> Fraction:
        """s1 - s2, the smoothness drop of an embedding."""
        return -self.ds

    @property
    def e_dp(self) -> Fraction:
        """n/p1 - n/p2"""
        return -self.dp

    @property
    def p_eq(self) -> bool:
        return self.p_star == self.t.p.reciprocal

    @property
    def p_below(self) -> bool:
        """p* < p"""
        return self.p_star > self.t.p.reciprocal

    @property
    def split_p(self) -> bool:
        return self.t.p1.reciprocal != self.t.p2.reciprocal

    @property
    def split_s(self) -> bool:
        return self.t.s1 != self.t.s2

    @property
    def slope_split(self) -> bool:
        """s2 - s1 != n/p2 - n/p1"""
        return self.ds != self.dp

    @property
    def q_covered(self) -> bool:
        """q* <= q"""
        return self.q_star >= self.t.q.reciprocal

    @property
    def r_covered(self) -> bool:
        return self.r_star >= self.t.r.reciprocal

    @property
    def q_max_covered(self) -> bool:
        """max(q1, q2) <= q"""
        return min(self.t.q1.reciprocal, self.t.q2.reciprocal) >= self.t.q.reciprocal

    @property
    def r_max_covered(self) -> bool:
        return min(self.t.r1.reciprocal, self.t.r2.reciprocal) >= self.t.r.reciprocal

    @property
    def q_embeds(self) -> bool:
        """q1 <= q2"""
        return self.t.q1.reciprocal >= self.t.q2.reciprocal

    @property
    def r_embeds(self) -> bool:
        return self.t.r1.reciprocal >= self.t.r2.reciprocal


@lru_cache(maxsize=65536)
def _quantities(t: ParamTuple) -> Quantities:
    star = star_values(t)
    return Quantities(t, star.s_star, star.p_star_recip, star.q_star_recip, star.r_star_recip)


Test = Callable[[Quantities], bool]
Guard = Callable[[ParamTuple], bool]


@dataclass(frozen=True)
class Clause:
    label: str
    test: Test
    open: bool = False


def _always(_) -> bool:
    return True


def _exponents(*names: str, above_one: bool = False, finite: bool = True) -> Guard:
    """Range guard: 1 <= p (or 1 < p), and p < inf when finite."""
    def guard(t: ParamTuple) -> bool:
        for name in names:
            recip = getattr(t, name).reciprocal
            if above_one and recip == 1:
                return False
            if finite and recip == 0:
                return False
        return True
    return guard


def _both(*guards: Guard) -> Guard:
    return lambda t: all(g(t) for g in guards)


def _is_inf(e: ExtendedExponent) -> bool:
    return e.reciprocal == 0


def _is_one(e: ExtendedExponent) -> bool:
    return e.reciprocal == 1


def _shape_star(t: ParamTuple) -> bool:
    x = Quantities.of(t)
    return t.q.reciprocal == x.q_star and t.r.reciprocal == x.r_star


def _shape_r1(t: ParamTuple) -> bool:
    """r = 1 < r* = inf and q = q*."""
    x = Quantities.of(t)
    return _is_one(t.r) and _is_inf(t.r1) and _is_inf(t.r2) and t.q.reciprocal == x.q_star


def _shape_q1(t: ParamTuple) -> bool:
    """q = 1 < q* = inf and r = r*."""
    x = Quantities.of(t)
    return _is_one(t.q) and _is_inf(t.q1) and _is_inf(t.q2) and t.r.reciprocal == x.r_star


def _shape_qr1(t: ParamTuple) -> bool:
    return (_is_one(t.q) and _is_one(t.r)
            and all(_is_inf(e) for e in (t.q1, t.q2, t.r1, t.r2)))


def _shape_r1_free_q(t: ParamTuple) -> bool:
    return _is_one(t.r) and _is_inf(t.r1) and _is_inf(t.r2)


# Necessary regions
def interpolation_region(x: Quantities) -> bool:
    """s* - s >= n/p* - n/p >= 0"""
    return x.gs >= x.gp >= 0


def homogeneous_region(x: Quantities) -> bool:
    """s* - s = n/p* - n/p >= 0"""
    return x.gs == x.gp >= 0


def embedding_region(x: Quantities) -> bool:
    """s1 - s2 >= n/p1 - n/p2 >= 0"""
    return x.e_ds >= x.e_dp >= 0


def homogeneous_embedding_region(x: Quantities) -> bool:
    """s1 - s2 = n/p1 - n/p2 >= 0"""
    return x.e_ds == x.e_dp >= 0


@dataclass(frozen=True)
class Theorem:
    theorem_id: str
    name: str
    kind: StatementKind
    relation: Relation
    scale: str
    homogeneous: bool
    clauses: Tuple[Clause, ...]
    region: Test
    domain: Guard = _always
    shape: Guard = _always
    base: Test = _always

    def applicable(self, t: ParamTuple) -> bool:
        return self.domain(t) and self.shape(t)

    def label(self, clause: Clause) -> str:
        return f"{self.theorem_id}({clause.label})" if clause.label else self.theorem_id

    def matched(self, t: ParamTuple) -> List[Clause]:
        x = Quantities.of(t)
        if not self.base(x):
            return []
        return [c for c in self.clauses if c.test(x)]

    def clause_region(self, t: ParamTuple) -> Optional[bool]:
        """Membership in the listed region, ignoring the shape guard; None outside the domain."""
        if not self.domain(t):
            return None
        return bool(self.matched(t))

    def to_dict(self) -> Dict[str, object]:
        return {
            "theorem_id": self.theorem_id,
            "name": self.name,
            "kind": self.kind.value,
            "relation": self.relation.value,
            "scale": self.scale,
            "homogeneous": self.homogeneous,
            "clauses": [self.label(c) for c in self.clauses],
            "open_clauses": [self.label(c) for c in self.clauses if c.open],
        }


@dataclass(frozen=True)
class ConditionVerdict:
    theorem_id: str
    matched_clauses: Tuple[str, ...]
    sufficient: Verdict
    necessary_region_member: Verdict
    iff_holds: Verdict

    @classmethod
    def not_applicable(cls, theorem_id: str) -> "ConditionVerdict":
        na = Verdict.NOT_APPLICABLE
        return cls(theorem_id, (), na, na, na)

    @property
    def applicable(self) -> bool:
        return not (self.sufficient is Verdict.NOT_APPLICABLE
                    and self.necessary_region_member is Verdict.NOT_APPLICABLE)

    @property
    def headline(self) -> Verdict:
        """The sufficiency verdict, or the necessity verdict for only-if statements."""
        if self.sufficient is not Verdict.NOT_APPLICABLE:
            return self.sufficient
        return self.necessary_region_member

    def to_dict(self) -> Dict[str, object]:
        return {
            "theorem_id": self.theorem_id,
            "matched_clauses": list(self.matched_clauses),
            "sufficient": self.sufficient.value,
            "necessary_region_member": self.necessary_region_member.value,
            "iff_holds": self.iff_holds.value,
        }


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

_DOMAIN_LEBESGUE = _exponents("p", "p1", "p2")
_DOMAIN_INTERIOR = _exponents("p", "p1", "p2", above_one=True)
_DOMAIN_SOURCES = _exponents("p1", "p2")
_DOMAIN_SOURCES_INTERIOR = _exponents("p1", "p2", above_one=True)


def _mk(*pairs: Tuple[str, Test], open_labels: Sequence[str] = ()) -> Tuple[Clause, ...]:
    return tuple(Clause(label, test, label in open_labels) for label, test in pairs)


_ONLY = _mk(("", _always))


def _inhomogeneous_qr1_list(open_first: bool) -> Tuple[Clause, ...]:
    return _mk(
        ("i", lambda x: x.gs == 0 and x.p_eq and x.split_s and x.split_p and x.slope_split),
        ("ii", lambda x: x.gs > 0 and x.p_eq and x.split_p),
        ("iii", lambda x: x.gs == x.gp > 0 and x.slope_split),
        ("iv", lambda x: x.gs > x.gp > 0),
        open_labels=("i",) if open_first else (),
    )


def _homogeneous_qr1_list(open_first: bool) -> Tuple[Clause, ...]:
    return _mk(
        ("i", lambda x: x.gs == 0 and x.p_eq and x.split_s and x.split_p and x.slope_split),
        ("ii", lambda x: x.gs == x.gp > 0 and x.slope_split),
        open_labels=("i",) if open_first else (),
    )


def _gn_relation(x: Quantities) -> bool:
    """1/p = (1-theta)/p1 + theta(1/p2 - s2/n) and 1/p1 != 1/p2 - s2/n."""
    t = x.t
    lower = t.p2.reciprocal - t.s2 / t.n
    relation = t.p.reciprocal == (1 - t.theta) * t.p1.reciprocal + t.theta * lower
    return relation and t.p1.reciprocal != lower


def _gn_target_rule(t: ParamTuple) -> bool:
    """q = 1 for finite p; p = inf already forces q = inf."""
    return _is_inf(t.p) or _is_one(t.q)


def _gn_shape_besov_source(t: ParamTuple) -> bool:
    first = _is_one(t.q1) if _is_one(t.p1) else _is_inf(t.q1)
    return (t.s == 0 and t.s1 == 0 and _gn_target_rule(t) and first
            and _is_inf(t.q2) and _is_inf(t.r2))


def _gn_shape_weak_source(t: ParamTuple) -> bool:
    return t.s == 0 and t.s1 == 0 and _gn_target_rule(t) and _is_inf(t.q1) and _is_inf(t.q2)


def _gn_domain(require_p2_interior: bool) -> Guard:
    def guard(t: ParamTuple) -> bool:
        if t.s2 <= 0 or _is_one(t.p):
            return False
        if require_p2_interior and (_is_one(t.p2) or _is_inf(t.p2)):
            return False
        return True
    return guard


def _same_three_p(t: ParamTuple) -> bool:
    return t.p.reciprocal == t.p1.reciprocal == t.p2.reciprocal


_THEOREMS: List[Theorem] = [
    # Embeddings
    Theorem("2.9", "tl-embedding", StatementKind.IFF, Relation.EMBEDDING, "F", False,
            _mk(("i", lambda x: not x.split_s and not x.split_p and x.q_embeds and x.r_embeds),
                ("ii", lambda x: x.e_ds > 0 and not x.split_p and x.q_embeds),
                ("iii", lambda x: x.e_ds == x.e_dp > 0 and x.q_embeds),
                ("iv", lambda x: x.e_ds > x.e_dp > 0)),
            embedding_region, domain=_DOMAIN_SOURCES),
    Theorem("2.10", "besov-embedding", StatementKind.IFF, Relation.EMBEDDING, "B", False,
            _mk(("i", lambda x: not x.split_s and not x.split_p and x.q_embeds and x.r_embeds),
                ("ii", lambda x: x.e_ds > 0 and not x.split_p and x.q_embeds),
                ("iii", lambda x: x.e_ds == x.e_dp > 0 and x.r_embeds),
                ("iv", lambda x: x.e_ds > x.e_dp > 0)),
            embedding_region, domain=_DOMAIN_SOURCES),
    Theorem("2.11", "besov-embedding-endpoint", StatementKind.SUFFICIENT, Relation.EMBEDDING, "B", False,
            _mk(("i", lambda x: not x.split_s and not x.split_p and x.q_embeds and x.r_embeds),
                ("ii", lambda x: x.e_ds > 0 and not x.split_p and x.q_embeds),
                ("iii", lambda x: x.e_ds == x.e_dp > 0 and x.r_embeds),
                ("iv", lambda x: x.e_ds > x.e_dp > 0)),
            embedding_region,
            domain=lambda t: _is_inf(t.p1) or _is_inf(t.p2)),
    Theorem("2.12", "jawerth-embedding", StatementKind.SUFFICIENT, Relation.EMBEDDING, "F/B", True,
            _mk(("F-F", lambda x: _is_inf(x.t.r1) and _is_one(x.t.r2)),
                ("F-B", lambda x: _is_inf(x.t.r1) and x.t.r2.reciprocal == x.t.p1.reciprocal),
                ("B-B", lambda x: x.t.r1 == x.t.r2)),
            homogeneous_embedding_region, domain=_DOMAIN_SOURCES,
            shape=lambda t: t.q1 == t.p1 and t.q2 == t.p2,
            base=lambda x: x.e_ds == x.e_dp > 0),
    Theorem("2.13", "tl-embedding-homogeneous", StatementKind.IFF, Relation.EMBEDDING, "F", True,
            _mk(("i", lambda x: not x.split_s and not x.split_p and x.q_embeds and x.r_embeds),
                ("ii", lambda x: x.e_ds == x.e_dp > 0 and x.q_embeds)),
            homogeneous_embedding_region, domain=_DOMAIN_SOURCES_INTERIOR),
    Theorem("2.14", "besov-embedding-homogeneous", StatementKind.SUFFICIENT, Relation.EMBEDDING, "B", True,
            _mk(("i", lambda x: not x.split_s and not x.split_p and x.q_embeds and x.r_embeds),
                ("ii", lambda x: x.e_ds == x.e_dp > 0 and x.r_embeds)),
            lambda x: homogeneous_embedding_region(x) and x.r_embeds),
    Theorem("2.15", "tl-besov-cross-embedding", StatementKind.SUFFICIENT, Relation.EMBEDDING, "F/B", True,
            _mk(("F-B", lambda x: _is_inf(x.t.r1) and _is_one(x.t.q2) and x.t.r2 == x.t.q1),
                ("B-F", lambda x: _is_inf(x.t.q1) and _is_one(x.t.r2) and x.t.q2 == x.t.r1)),
            homogeneous_embedding_region, domain=_DOMAIN_SOURCES_INTERIOR,
            base=lambda x: x.e_ds == x.e_dp > 0),

    # Triebel-Lizorkin-Lorentz interpolation
    Theorem("3.1", "tl-interpolation", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "F", False,
            _mk(("i", lambda x: x.q_covered and x.r_covered),
                ("ii", lambda x: not x.split_s and x.p_eq and x.split_p and x.r_max_covered),
                ("iii", lambda x: x.split_s and x.p_eq and x.q_covered),
                ("iv", lambda x: x.gs > 0 and x.q_covered),
                ("v", lambda x: x.gs > 0 and x.p_eq and x.split_p),
                ("vi", lambda x: x.gs > x.gp > 0),
                ("vii", lambda x: x.gs == x.gp > 0 and x.slope_split)),
            interpolation_region, domain=_DOMAIN_LEBESGUE, base=interpolation_region),
    Theorem("3.2", "tl-interpolation-star", StatementKind.IFF, Relation.INTERPOLATION, "F", False,
            _ONLY, interpolation_region, domain=_DOMAIN_LEBESGUE, shape=_shape_star,
            base=interpolation_region),
    Theorem("3.3", "tl-interpolation-r1", StatementKind.IFF, Relation.INTERPOLATION, "F", False,
            _mk(("i", lambda x: x.gs == 0 and x.p_eq and x.split_s),
                ("ii", lambda x: x.gs > 0 and interpolation_region(x))),
            interpolation_region, domain=_DOMAIN_INTERIOR, shape=_shape_r1, base=interpolation_region),
    Theorem("3.4", "tl-interpolation-qr1", StatementKind.CHARACTERIZATION, Relation.INTERPOLATION, "F", False,
            _inhomogeneous_qr1_list(open_first=True), interpolation_region,
            domain=_DOMAIN_INTERIOR, shape=_shape_qr1, base=interpolation_region),
    Theorem("3.5", "tl-necessity-q1", StatementKind.ONLY_IF, Relation.INTERPOLATION, "F", False,
            _mk(("i", lambda x: x.gs == 0 and x.p_eq and x.split_p and x.slope_split),
                ("ii", lambda x: x.gs > 0 and x.p_eq and x.split_p),
                ("iii", lambda x: x.gs == x.gp > 0 and x.slope_split),
                ("iv", lambda x: x.gs > x.gp > 0)),
            interpolation_region, domain=_DOMAIN_INTERIOR, shape=_shape_q1, base=interpolation_region),
    Theorem("3.6", "tl-necessity-qr1", StatementKind.ONLY_IF, Relation.INTERPOLATION, "F", False,
            _inhomogeneous_qr1_list(open_first=False), interpolation_region,
            domain=_DOMAIN_INTERIOR, shape=_shape_qr1, base=interpolation_region),
    Theorem("3.7", "tl-interpolation-qr1-homogeneous", StatementKind.CHARACTERIZATION,
            Relation.INTERPOLATION, "F", True,
            _homogeneous_qr1_list(open_first=True), homogeneous_region,
            domain=_DOMAIN_INTERIOR, shape=_shape_qr1, base=homogeneous_region),
    Theorem("3.8", "tl-interpolation-homogeneous", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "F", True,
            _mk(("i", lambda x: x.q_covered and x.r_covered),
                ("ii", lambda x: x.t.s == x.t.s1 == x.t.s2 and x.split_p and x.r_max_covered),
                ("iii", lambda x: x.gs == 0 and x.split_s and x.q_covered),
                ("iv", lambda x: x.gs > 0 and x.q_covered),
                ("v", lambda x: x.gs > 0 and x.slope_split)),
            homogeneous_region, domain=_DOMAIN_INTERIOR, base=homogeneous_region),
    Theorem("3.9", "tl-interpolation-star-homogeneous", StatementKind.IFF, Relation.INTERPOLATION, "F", True,
            _ONLY, homogeneous_region, domain=_DOMAIN_INTERIOR, shape=_shape_star, base=homogeneous_region),
    Theorem("3.10", "tl-interpolation-r1-homogeneous", StatementKind.IFF, Relation.INTERPOLATION, "F", True,
            _mk(("i", lambda x: x.gs == 0 and x.p_eq and x.split_s),
                ("ii", lambda x: x.gs == x.gp > 0)),
            homogeneous_region, domain=_DOMAIN_INTERIOR, shape=_shape_r1, base=homogeneous_region),
    Theorem("3.11", "tl-necessity-q1-homogeneous", StatementKind.ONLY_IF, Relation.INTERPOLATION, "F", True,
            _mk(("i", lambda x: x.gs == 0 and x.p_eq and x.split_p and x.slope_split),
                ("ii", lambda x: x.gs == x.gp > 0 and x.slope_split)),
            homogeneous_region, domain=_DOMAIN_INTERIOR, shape=_shape_q1, base=homogeneous_region),
    Theorem("3.12", "tl-necessity-qr1-homogeneous", StatementKind.ONLY_IF, Relation.INTERPOLATION, "F", True,
            _homogeneous_qr1_list(open_first=False), homogeneous_region,
            domain=_DOMAIN_INTERIOR, shape=_shape_qr1, base=homogeneous_region),

    # Besov-Lorentz interpolation
    Theorem("4.1", "besov-interpolation", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "B", False,
            _mk(("i", lambda x: x.q_covered and x.r_covered),
                ("ii", lambda x: x.p_eq and x.split_p and x.r_covered),
                ("iii", lambda x: x.p_below and x.r_covered),
                ("iv", lambda x: x.split_s and _same_three_p(x.t) and x.q_max_covered),
                ("v", lambda x: x.gs > 0 and x.p_eq and x.q_covered),
                ("vi", lambda x: x.gs > 0 and x.p_eq and x.split_p),
                ("vii", lambda x: x.gs > x.gp > 0),
                ("viii", lambda x: x.gs == x.gp > 0 and x.slope_split)),
            interpolation_region, base=interpolation_region),
    Theorem("4.2", "besov-interpolation-homogeneous", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "B", True,
            _mk(("i", lambda x: x.q_covered and x.r_covered),
                ("ii", lambda x: x.gs == 0 and x.split_p and x.r_covered),
                ("iii", lambda x: x.gs > 0 and x.r_covered),
                ("iv", lambda x: x.gs == 0 and x.split_s and not x.split_p and x.q_max_covered),
                ("v", lambda x: x.gs > 0 and x.slope_split)),
            homogeneous_region, base=homogeneous_region),
    Theorem("4.3", "besov-interpolation-star", StatementKind.IFF, Relation.INTERPOLATION, "B", False,
            _ONLY, interpolation_region, shape=_shape_star, base=interpolation_region),
    Theorem("4.4", "besov-interpolation-star-homogeneous", StatementKind.IFF, Relation.INTERPOLATION, "B", True,
            _ONLY, homogeneous_region, shape=_shape_star, base=homogeneous_region),
    Theorem("4.5", "besov-interpolation-q1", StatementKind.IFF, Relation.INTERPOLATION, "B", False,
            _mk(("i", lambda x: x.gs >= 0 and x.p_eq and x.split_p),
                ("ii", lambda x: x.gs >= x.gp > 0)),
            interpolation_region,
            domain=_both(_exponents("p", above_one=True), _exponents("p1", "p2", above_one=True, finite=False)),
            shape=_shape_q1, base=interpolation_region),
    Theorem("4.6", "besov-necessity-r1", StatementKind.ONLY_IF, Relation.INTERPOLATION, "B", False,
            _mk(("i", lambda x: x.gs == 0 and x.p_eq and x.split_s and x.slope_split),
                ("ii", lambda x: x.gs > 0 and x.p_eq),
                ("iii", lambda x: x.gs == x.gp > 0 and x.slope_split),
                ("iv", lambda x: x.gs > x.gp > 0)),
            interpolation_region, domain=_DOMAIN_INTERIOR, shape=_shape_r1, base=interpolation_region),
    Theorem("4.7", "besov-necessity-qr1", StatementKind.ONLY_IF, Relation.INTERPOLATION, "B", False,
            _inhomogeneous_qr1_list(open_first=False), interpolation_region,
            domain=_DOMAIN_INTERIOR, shape=_shape_qr1, base=interpolation_region),
    Theorem("4.8", "tl-interpolation-limiting", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "F", True,
            _mk(("i", lambda x: (x.gs == 0 and x.split_s
                                 and all(_is_one(e) for e in (x.t.p, x.t.p1, x.t.p2, x.t.q, x.t.q1, x.t.q2)))),
                ("ii", lambda x: x.gs == x.gp > 0 and x.slope_split)),
            homogeneous_region, domain=_DOMAIN_LEBESGUE, shape=_shape_r1_free_q),
    Theorem("4.9", "besov-interpolation-qr1", StatementKind.CHARACTERIZATION, Relation.INTERPOLATION, "B", False,
            _inhomogeneous_qr1_list(open_first=True), interpolation_region,
            domain=_DOMAIN_INTERIOR, shape=_shape_qr1, base=interpolation_region),
    Theorem("4.10", "besov-interpolation-qr1-homogeneous", StatementKind.CHARACTERIZATION,
            Relation.INTERPOLATION, "B", True,
            _mk(("i", lambda x: x.gs == 0 and x.p_eq),
                ("ii", lambda x: x.gs == x.gp > 0 and x.slope_split),
                ("iii", lambda x: x.gs == x.gp > 0 and not x.slope_split),
                open_labels=("i", "iii")),
            homogeneous_region, shape=_shape_qr1, base=homogeneous_region),

    # Sobolev-Lorentz embeddings and Gagliardo-Nirenberg inequalities
    Theorem("5.2", "sobolev-embedding", StatementKind.IFF, Relation.EMBEDDING, "H", False,
            _mk(("i", lambda x: x.e_ds >= 0 and not x.split_p and x.q_embeds),
                ("ii", lambda x: x.e_ds == x.e_dp > 0 and x.q_embeds),
                ("iii", lambda x: x.e_ds > x.e_dp > 0)),
            embedding_region, domain=_DOMAIN_SOURCES_INTERIOR),
    Theorem("5.3", "sobolev-embedding-homogeneous", StatementKind.IFF, Relation.EMBEDDING, "H", True,
            _mk(("", lambda x: homogeneous_embedding_region(x) and x.q_embeds)),
            homogeneous_embedding_region, domain=_DOMAIN_SOURCES_INTERIOR),
    Theorem("5.8", "sobolev-interpolation", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "H", False,
            _mk(("i", lambda x: x.q_covered),
                ("ii", lambda x: not x.split_s and x.p_eq and x.split_p),
                ("iii", lambda x: x.gs > 0 and x.p_eq and x.split_p),
                ("iv", lambda x: x.gs > x.gp > 0),
                ("v", lambda x: x.gs == x.gp > 0 and x.slope_split)),
            interpolation_region, domain=_DOMAIN_INTERIOR, base=interpolation_region),
    Theorem("5.9", "sobolev-interpolation-homogeneous", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "H", True,
            _mk(("i", lambda x: x.q_covered),
                ("ii", lambda x: x.t.s == x.t.s1 == x.t.s2 and x.split_p),
                ("iii", lambda x: x.gs > 0 and x.slope_split)),
            homogeneous_region, domain=_DOMAIN_INTERIOR, base=homogeneous_region),
    Theorem("5.10", "gagliardo-nirenberg-lorentz", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "L/B", True,
            _ONLY, homogeneous_region, domain=_gn_domain(require_p2_interior=False),
            shape=_gn_shape_besov_source, base=_gn_relation),
    Theorem("5.12", "gagliardo-nirenberg-weak-source", StatementKind.SUFFICIENT, Relation.INTERPOLATION, "L/H", True,
            _mk(("i", lambda x: not _is_one(x.t.p1) or x.t.s2 <= x.t.n * x.t.p2.reciprocal),
                ("ii", lambda x: _is_one(x.t.p1) and x.t.s2 > x.t.n * x.t.p2.reciprocal)),
            homogeneous_region, domain=_gn_domain(require_p2_interior=True),
            shape=_gn_shape_weak_source, base=_gn_relation),
]

CATALOG: Dict[str, Theorem] = {thm.theorem_id: thm for thm in _THEOREMS}
ALIASES: Dict[str, str] = {thm.name: thm.theorem_id for thm in _THEOREMS}

# A sufficiency verdict of the first theorem implies the necessity list of the second
CROSS_IMPLICATIONS: Tuple[Tuple[str, str], ...] = (
    ("3.1", "3.2"), ("3.1", "3.3"), ("3.1", "3.5"), ("3.1", "3.6"),
    ("3.8", "3.9"), ("3.8", "3.10"), ("3.8", "3.11"), ("3.8", "3.12"),
    ("4.8", "3.10"),
    ("4.1", "4.3"), ("4.1", "4.5"), ("4.1", "4.6"), ("4.1", "4.7"),
    ("4.2", "4.4"),
    ("3.4", "3.6"), ("3.7", "3.12"), ("4.9", "4.7"), ("4.10", "4.4"),
)

# whole = left intersected with right, where all three domains hold
INTERSECTIONS: Tuple[Tuple[str, str, str], ...] = (
    ("3.6", "3.3", "3.5"),
    ("4.7", "4.5", "4.6"),
    ("3.12", "3.10", "3.11"),
)

# Same verdict when every r index equals 2
COINCIDENCES: Tuple[Tuple[str, str], ...] = (
    ("5.2", "2.9"), ("5.3", "2.13"), ("5.8", "3.1"), ("5.9", "3.8"),
)


def get_theorem(theorem_id: str) -> Theorem:
    key = str(theorem_id).strip()
    if key.lower().startswith("thm"):
        key = key[3:].lstrip(" -.")
    key = ALIASES.get(key, key)
    if key not in CATALOG:
        raise UnknownTheorem(f"no theorem '{theorem_id}' in the catalog")
    return CATALOG[key]


def evaluate(theorem_id: str, t: ParamTuple) -> ConditionVerdict:
    thm = get_theorem(theorem_id)
    if not thm.applicable(t):
        return ConditionVerdict.not_applicable(thm.theorem_id)

    hits = thm.matched(t)
    labels = tuple(thm.label(c) for c in hits)
    firm = any(not c.open for c in hits)
    na = Verdict.NOT_APPLICABLE

    if thm.kind is StatementKind.SUFFICIENT:
        return ConditionVerdict(thm.theorem_id, labels, Verdict.of(firm),
                                Verdict.of(thm.region(Quantities.of(t))), na)
    if thm.kind is StatementKind.IFF:
        flag = Verdict.of(bool(hits))
        return ConditionVerdict(thm.theorem_id, labels, flag, flag, flag)
    if thm.kind is StatementKind.ONLY_IF:
        return ConditionVerdict(thm.theorem_id, labels, na, Verdict.of(bool(hits)), na)

    # characterization: open clauses are necessary-side members whose sufficiency is unresolved
    if firm:
        suff = Verdict.TRUE
    elif hits:
        suff = Verdict.OPEN
    else:
        suff = Verdict.FALSE
    return ConditionVerdict(thm.theorem_id, labels, suff, Verdict.of(bool(hits)), suff)


def evaluate_all(t: ParamTuple, applicable_only: bool = False) -> Dict[str, ConditionVerdict]:
    out = {tid: evaluate(tid, t) for tid in CATALOG}
    if applicable_only:
        out = {tid: v for tid, v in out.items() if v.applicable}
    return out


# ---------------------------------------------------------------------------
# Consistency scan
# ---------------------------------------------------------------------------

_SMOOTHNESS = tuple(Fraction(v) for v in ("-1", "0", "1/4", "1/2", "1", "3/2", "2"))
# p = 1, 4/3, 3/2, 2, 3, 4, inf
_RECIPROCALS = tuple(Fraction(v) for v in ("1", "3/4", "2/3", "1/2", "1/3", "1/4", "0"))
_FINE = tuple(Fraction(v) for v in ("1", "1/2", "0"))
_THETAS = tuple(Fraction(v) for v in ("1/4", "1/3", "1/2", "2/3", "3/4"))
_P_STEPS = tuple(Fraction(v) for v in ("0", "0", "0", "1/8", "1/4", "-1/8"))
_SHAPES = ("free", "star", "r1", "q1", "qr1")


def random_tuple_grid(count: int, n: int = 1, seed: Optional[int] = None) -> List[ParamTuple]:
    """Seeded tuples over small rational value sets, biased so that equality clauses fire."""
    rng = np.random.default_rng(config.audit.seed if seed is None else seed)

    def pick(seq):
        return seq[int(rng.integers(len(seq)))]

    tuples: List[ParamTuple] = []
    while len(tuples) < count:
        theta = pick(_THETAS)
        a1, a2 = pick(_RECIPROCALS), pick(_RECIPROCALS)
        s1 = pick(_SMOOTHNESS)
        if rng.random() < 1 / 3:
            # lands on the scaling line s1 - s2 = n/p1 - n/p2
            s2 = s1 - n * (a1 - a2) + pick((Fraction(0), Fraction(0), Fraction(1, 4)))
        else:
            s2 = pick(_SMOOTHNESS)

        p_star = (1 - theta) * a1 + theta * a2
        a = p_star - pick(_P_STEPS)
        if not (0 <= a <= 1):
            a = p_star
        gp = n * (p_star - a)
        s_star = (1 - theta) * s1 + theta * s2
        s = s_star - pick((Fraction(0), gp, gp, gp + Fraction(1, 4), gp - Fraction(1, 4), Fraction(1, 2)))

        shape = pick(_SHAPES)
        if shape in ("r1", "qr1"):
            r1 = r2 = Fraction(0)
        else:
            r1, r2 = pick(_FINE), pick(_FINE)
        if shape in ("q1", "qr1"):
            b1 = b2 = Fraction(0)
        else:
            b1, b2 = pick(_FINE), pick(_FINE)
        b1 = Fraction(0) if a1 == 0 else b1
        b2 = Fraction(0) if a2 == 0 else b2
        q_star = (1 - theta) * b1 + theta * b2
        r_star = (1 - theta) * r1 + theta * r2

        b = {"star": q_star, "r1": q_star, "q1": Fraction(1), "qr1": Fraction(1)}.get(shape, pick(_FINE))
        r = {"star": r_star, "q1": r_star, "r1": Fraction(1), "qr1": Fraction(1)}.get(shape, pick(_FINE))
        if a == 0:
            b = Fraction(0)

        e = ExtendedExponent
        tuples.append(ParamTuple(
            n=n, s=s, s1=s1, s2=s2,
            p=e(a), p1=e(a1), p2=e(a2),
            q=e(b), q1=e(b1), q2=e(b2),
            r=e(r), r1=e(r1), r2=e(r2),
            theta=theta,
        ))
    return tuples


@dataclass
class ScanGrid:
    """Declarative description of a scan: random grid, or explicit tuples."""
    count: int = 10_000
    n: int = 1
    seed: Optional[int] = None
    tuples: Optional[List[ParamTuple]] = None

    def materialize(self) -> List[ParamTuple]:
        if self.tuples is not None:
            return list(self.tuples)
        return random_tuple_grid(self.count, self.n, self.seed)

    def to_dict(self) -> Dict[str, object]:
        return {"count": self.count if self.tuples is None else len(self.tuples),
                "n": self.n, "seed": self.seed, "explicit": self.tuples is not None}


@dataclass
class ScanReport:
    grid: Dict[str, object]
    tuples_checked: int
    verdicts_evaluated: int
    inconsistencies: List[Dict[str, object]] = field(default_factory=list)
    rows: List[Dict[str, str]] = field(default_factory=list, repr=False)
    csv_path: Optional[str] = None

    @property
    def ok(self) -> bool:
        return not self.inconsistencies

    def to_dict(self) -> Dict[str, object]:
        return {
            "grid": self.grid,
            "tuples_checked": self.tuples_checked,
            "verdicts_evaluated": self.verdicts_evaluated,
            "inconsistencies": self.inconsistencies,
            "csv": self.csv_path,
        }


def _problem(t: ParamTuple, check: str, detail: str) -> Dict[str, object]:
    return {"tuple": t.to_json(), "check": check, "detail": detail}


def check_tuple(t: ParamTuple) -> Tuple[List[Dict[str, str]], List[Dict[str, object]]]:
    """Catalog rows and coherence problems for one tuple."""
    verdicts = evaluate_all(t)
    x = Quantities.of(t)
    rows: List[Dict[str, str]] = []
    problems: List[Dict[str, object]] = []

    for tid, v in verdicts.items():
        if not v.applicable:
            continue
        rows.append({"tuple": t.key(), "theorem": tid,
                     "clause": ";".join(v.matched_clauses), "verdict": v.headline.value})
        thm = CATALOG[tid]
        if v.sufficient is Verdict.TRUE:
            if not thm.region(x):
                problems.append(_problem(t, "sufficient-outside-region",
                                         f"{tid} sufficient via {list(v.matched_clauses)} outside its necessary region"))
            if v.necessary_region_member is Verdict.FALSE:
                problems.append(_problem(t, "sufficient-not-necessary", f"{tid} sufficient but not in its own list"))

    for src, dst in CROSS_IMPLICATIONS:
        if verdicts[src].sufficient is Verdict.TRUE and verdicts[dst].necessary_region_member is Verdict.FALSE:
            problems.append(_problem(t, "cross-implication",
                                     f"{src} sufficient via {list(verdicts[src].matched_clauses)} "
                                     f"but {dst} necessity list fails"))

    for whole, left, right in INTERSECTIONS:
        parts = [CATALOG[tid].clause_region(t) for tid in (whole, left, right)]
        if None in parts:
            continue
        if parts[0] != (parts[1] and parts[2]):
            problems.append(_problem(t, "intersection",
                                     f"{whole}={parts[0]} but {left}={parts[1]}, {right}={parts[2]}"))

    two = ExtendedExponent.of(2)
    if t.r == t.r1 == t.r2 == two:
        for a, b in COINCIDENCES:
            va, vb = verdicts[a], verdicts[b]
            if va.applicable and vb.applicable and va.sufficient != vb.sufficient:
                problems.append(_problem(t, "coincidence",
                                         f"{a}={va.sufficient.value} but {b}={vb.sufficient.value}"))
    return rows, problems


def consistency_scan(grid_spec: Union[ScanGrid, Iterable[ParamTuple], None] = None,
                     csv_path: Optional[str] = None, workers: Optional[int] = None,
                     strict: bool = True) -> ScanReport:
    """Check the catalog against itself over a tuple grid; raise InconsistencyFound on any defect."""
    if grid_spec is None:
        grid_spec = ScanGrid()
    elif not isinstance(grid_spec, ScanGrid):
        grid_spec = ScanGrid(tuples=list(grid_spec))
    tuples = grid_spec.materialize()
    workers = config.audit.workers if workers is None else workers
    logging.info(f"consistency scan over {len(tuples)} tuples with {workers} worker(s)")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check_tuple, tuples))
    else:
        results = [check_tuple(t) for t in tuples]

    rows = [row for r, _ in results for row in r]
    problems = [p for _, ps in results for p in ps]
    report = ScanReport(grid_spec.to_dict(), len(tuples), len(rows), problems, rows)

    if csv_path is not None:
        report.csv_path = write_csv(csv_path, rows, sort_by=("tuple", "theorem"),
                                    columns=["tuple", "theorem", "clause", "verdict"])

    if problems:
        logging.error(f"consistency scan found {len(problems)} inconsistencies")
        if strict:
            first = problems[0]
            raise InconsistencyFound(f"{first['check']}: {first['detail']}", first["tuple"], problems)
    else:
        logging.info(f"consistency scan clean: {len(rows)} verdicts")
    return report


def export_catalog(file_path: str) -> str:
    rows = []
    for thm in _THEOREMS:
        entry = thm.to_dict()
        entry["clauses"] = ";".join(entry["clauses"])
        entry["open_clauses"] = ";".join(entry["open_clauses"])
        rows.append(entry)
    return write_csv(file_path, rows)
