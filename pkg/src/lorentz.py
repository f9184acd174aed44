"""
Distribution functions, level-set profiles and Lorentz quasi-norms.

A sampled function is a simple function: every grid cell carries one value.
Its distribution function is therefore an exact step function and the
Lorentz integral has a closed form on it; the q-th root is the only
inexact step.
"""
import math
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np
import pandas as pd
from scipy import integrate

from src.exception import (ConventionViolation, DegenerateInput, ExponentMismatch, GridMismatch,
                           customException)
from src.exponents import ExtendedExponent
from src.grid import SampledFunction

ExponentLike = Union[ExtendedExponent, int, str]


@dataclass(frozen=True, eq=False)
class LevelSetProfile:
    """Distinct nonzero values v_1 < ... < v_M of |f| with mu_i = |{|f| >= v_i}|."""

    values: np.ndarray
    tail_measures: np.ndarray
    counts: np.ndarray
    cell_volume: float

    @property
    def is_empty(self) -> bool:
        return self.values.size == 0

    @property
    def support_measure(self) -> float:
        return float(self.tail_measures[0]) if self.values.size else 0.0

    def distribution(self, alpha: float) -> float:
        """mu_f(alpha) = |{|f| > alpha}|, right-continuous in alpha."""
        idx = int(np.searchsorted(self.values, alpha, side="right"))
        return float(self.tail_measures[idx]) if idx < self.values.size else 0.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"value": self.values, "tail_measure": self.tail_measures})

    def export_csv(self, file_path: str) -> str:
        try:
            self.to_frame().to_csv(file_path, index=False, float_format="%.17g")
            return file_path
        except Exception as e:
            raise customException(e, sys)


def profile_of_array(magnitudes: np.ndarray, cell_volume: float) -> LevelSetProfile:
    mag = np.abs(np.asarray(magnitudes)).ravel()
    values, counts = np.unique(mag[mag > 0], return_counts=True)
    tail_counts = np.cumsum(counts[::-1])[::-1]
    return LevelSetProfile(values, tail_counts * cell_volume, counts, float(cell_volume))


def level_profile(f: SampledFunction) -> LevelSetProfile:
    """Exact profile: each cell contributes its volume to the measure of its value."""
    return profile_of_array(f.samples, f.cell_volume)


@dataclass(frozen=True)
class LorentzValue:
    value: float
    infinite_by_convention: bool = False


def lorentz_evaluate(prof: LevelSetProfile, p: ExponentLike, q: ExponentLike,
                     require_finite: bool = False) -> LorentzValue:
    p, q = ExtendedExponent.of(p), ExtendedExponent.of(q)
    if prof.is_empty:
        return LorentzValue(0.0)
    v_max = float(prof.values[-1])

    if p.is_infinite:
        if q.is_infinite:
            return LorentzValue(v_max)
        # L^{inf,q} = {0} for q < inf
        if require_finite:
            raise ConventionViolation(f"L^(inf,{q}) contains only 0; a nonzero function has no finite norm")
        return LorentzValue(math.inf, infinite_by_convention=True)

    inv_p = float(p.reciprocal)
    w = prof.values / v_max
    mu = prof.tail_measures
    if q.is_infinite:
        return LorentzValue(v_max * float(np.max(w * mu ** inv_p)))

    qf = float(q.value())
    w_prev = np.concatenate(([0.0], w[:-1]))
    total = (float(p.value()) / qf) * float(np.sum(mu ** (qf * inv_p) * (w ** qf - w_prev ** qf)))
    return LorentzValue(v_max * total ** (1.0 / qf))


def lorentz_norm(prof: LevelSetProfile, p: ExponentLike, q: ExponentLike,
                 require_finite: bool = False) -> float:
    """Closed-form ||f||_{L^{p,q}} on a step profile; +inf for nonzero f when p = inf > q."""
    return lorentz_evaluate(prof, p, q, require_finite).value


def lorentz_norm_of(values: np.ndarray, cell_volume: float, p: ExponentLike, q: ExponentLike) -> float:
    return lorentz_norm(profile_of_array(values, cell_volume), p, q)


def lorentz_norm_quadrature(prof: LevelSetProfile, p: ExponentLike, q: ExponentLike) -> float:
    """Independent oracle: adaptive quadrature of p * int alpha^{q-1} mu(alpha)^{q/p} d alpha."""
    p, q = ExtendedExponent.of(p), ExtendedExponent.of(q)
    if prof.is_empty:
        return 0.0
    if p.is_infinite or q.is_infinite:
        return lorentz_norm(prof, p, q)
    pf, qf = float(p.value()), float(q.value())
    v_max = float(prof.values[-1])
    edges = np.concatenate(([0.0], prof.values / v_max))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        # mu is constant on (lo, hi]; evaluate it at the midpoint
        mu = prof.distribution(0.5 * (lo + hi) * v_max)
        piece, _ = integrate.quad(lambda a: a ** (qf - 1.0), lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        total += piece * mu ** (qf / pf)
    return v_max * (pf * total) ** (1.0 / qf)


class MixedOrder(str, Enum):
    LORENTZ_OF_LR = "lorentz_of_lr"
    LR_OF_LORENTZ = "lr_of_lorentz"


def lr_norm(values: np.ndarray, r: ExponentLike) -> float:
    """l^r norm of a finite sequence."""
    r = ExtendedExponent.of(r)
    vals = np.abs(np.asarray(values, dtype=float))
    if vals.size == 0:
        return 0.0
    top = float(vals.max())
    if top == 0.0 or math.isinf(top):
        return top
    if r.is_infinite:
        return top
    rf = float(r.value())
    return top * float(np.sum((vals / top) ** rf)) ** (1.0 / rf)


def pointwise_lr(stack: np.ndarray, r: ExponentLike) -> np.ndarray:
    """Pointwise l^r over axis 0."""
    r = ExtendedExponent.of(r)
    mags = np.abs(stack)
    top = mags.max(axis=0)
    if r.is_infinite:
        return top
    rf = float(r.value())
    safe = np.where(top > 0, top, 1.0)
    return top * np.sum((mags / safe) ** rf, axis=0) ** (1.0 / rf)


def _same_grid(fs: Sequence[SampledFunction]):
    if not fs:
        raise ValueError("empty sequence")
    g0 = fs[0].geometry
    for f in fs[1:]:
        if f.geometry != g0:
            raise GridMismatch(f"sequence mixes grids {g0.to_dict()} and {f.geometry.to_dict()}")


def mixed_norm(fs: Sequence[SampledFunction], p: ExponentLike, q: ExponentLike, r: ExponentLike,
               order: Union[MixedOrder, str] = MixedOrder.LORENTZ_OF_LR) -> float:
    """||{f_j}||_{L^{p,q}(l^r)} or ||{f_j}||_{l^r(L^{p,q})}."""
    order = MixedOrder(order)
    _same_grid(fs)
    cell = fs[0].cell_volume
    if order is MixedOrder.LORENTZ_OF_LR:
        aggregate = pointwise_lr(np.stack([f.samples for f in fs]), r)
        return lorentz_norm_of(aggregate, cell, p, q)
    return lr_norm([lorentz_norm(level_profile(f), p, q) for f in fs], r)


def holder_defect(f: SampledFunction, g: SampledFunction, p: ExponentLike, p1: ExponentLike,
                  p2: ExponentLike, q: ExponentLike, q1: ExponentLike, q2: ExponentLike) -> float:
    """||fg||_{p,q} / (||f||_{p1,q1} ||g||_{p2,q2}) under 1/p = 1/p1 + 1/p2, 1/q <= 1/q1 + 1/q2."""
    p, p1, p2, q, q1, q2 = (ExtendedExponent.of(e) for e in (p, p1, p2, q, q1, q2))
    if p.reciprocal != p1.reciprocal + p2.reciprocal:
        raise ExponentMismatch(f"1/{p} != 1/{p1} + 1/{p2}")
    if q.reciprocal > q1.reciprocal + q2.reciprocal:
        raise ExponentMismatch(f"1/{q} > 1/{q1} + 1/{q2}")
    if f.geometry != g.geometry:
        raise GridMismatch("holder_defect needs both functions on one grid")
    denom = lorentz_norm(level_profile(f), p1, q1) * lorentz_norm(level_profile(g), p2, q2)
    if denom == 0.0 or math.isinf(denom):
        raise DegenerateInput("a factor norm is zero or infinite")
    product = SampledFunction(f.geometry, f.samples * g.samples)
    return lorentz_norm(level_profile(product), p, q) / denom
