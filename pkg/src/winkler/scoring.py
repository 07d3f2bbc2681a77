"""Quantile and interval scores.

All scores are negatively oriented (lower is better). Array functions are
vectorised over numpy inputs; the scalar wrappers take :class:`Interval`.

Tie behaviour follows each formula literally: the quantile score uses
``1{y <= x}`` while the interval score penalises only ``y < lower`` and
``y > upper``. The two representations agree everywhere, since at a tie the
penalty term is zero either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class InvariantError(RuntimeError):
    """A mathematical invariant failed; indicates a bug, not bad input."""


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise DomainError(f"interval bounds must be finite, got [{self.lower}, {self.upper}]")
        if self.lower > self.upper:
            raise DomainError(f"lower bound exceeds upper bound: [{self.lower}, {self.upper}]")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class NonCentralLevels:
    """Quantile levels of a non-central interval, ``alpha1 < alpha2``."""

    alpha1: float
    alpha2: float

    def __post_init__(self):
        check_level(self.alpha1, "alpha1")
        check_level(self.alpha2, "alpha2")
        if not self.alpha1 < self.alpha2:
            raise DomainError(f"need alpha1 < alpha2, got {self.alpha1}, {self.alpha2}")

    @classmethod
    def central(cls, alpha: float) -> "NonCentralLevels":
        check_level(alpha)
        return cls(alpha / 2, 1 - alpha / 2)


def check_level(alpha: float, name: str = "alpha") -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {alpha}")
    return alpha


def level_fraction(beta: float) -> Fraction:
    """Exact rational reading of a level, via its shortest decimal repr.

    ``0.05`` becomes ``1/20`` rather than the binary value slightly above it,
    so that a pooled frequency of exactly 1/20 counts as reaching the level.
    """
    return Fraction(repr(float(beta)))


def central_penalties(alpha: float) -> tuple[float, float]:
    a = level_fraction(check_level(alpha))
    w = float(2 / a)
    return w, w


def noncentral_penalties(levels: NonCentralLevels) -> tuple[float, float]:
    a1 = level_fraction(levels.alpha1)
    a2 = level_fraction(levels.alpha2)
    return float(1 / a1), float(1 / (1 - a2))


@dataclass(frozen=True)
class TransformSpec:
    """Non-decreasing transform ``g`` for the generalised interval score.

    ``kind`` is one of ``identity``, ``log-shift`` (``g(x) = log(x + offset)``)
    or ``table`` (piecewise-linear through ``(xs[k], gs[k])``, undefined
    outside ``[xs[0], xs[-1]]``).
    """

    kind: str = "identity"
    offset: float = 0.0
    xs: tuple = field(default=())
    gs: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("identity", "log-shift", "table"):
            raise DomainError(f"unknown transform kind {self.kind!r}")
        if self.kind == "log-shift" and not math.isfinite(self.offset):
            raise DomainError("log-shift offset must be finite")
        if self.kind == "table":
            xs = np.asarray(self.xs, dtype=float)
            gs = np.asarray(self.gs, dtype=float)
            if xs.ndim != 1 or xs.shape != gs.shape or len(xs) < 2:
                raise DomainError("transform table needs at least two (x, g) breakpoints")
            if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(gs))):
                raise DomainError("transform table must be finite")
            if np.any(np.diff(xs) <= 0):
                raise DomainError("transform table x values must be strictly increasing")
            if np.any(np.diff(gs) < 0):
                raise DomainError("transform table g values must be non-decreasing")

    @classmethod
    def identity(cls) -> "TransformSpec":
        return cls("identity")

    @classmethod
    def log_shift(cls, offset: float = 0.0) -> "TransformSpec":
        return cls("log-shift", offset=float(offset))

    @classmethod
    def from_table(cls, xs: Iterable[float], gs: Iterable[float]) -> "TransformSpec":
        return cls("table", xs=tuple(float(x) for x in xs), gs=tuple(float(g) for g in gs))

    @property
    def strictly_increasing(self) -> bool:
        if self.kind == "table":
            return bool(np.all(np.diff(self.gs) > 0))
        return True

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "identity":
            return x
        if self.kind == "log-shift":
            shifted = x + self.offset
            if np.any(shifted <= 0):
                raise DomainError(f"log-shift({self.offset}) undefined for x <= {-self.offset}")
            return np.log(shifted)
        xs = np.asarray(self.xs)
        if np.any(x < xs[0]) or np.any(x > xs[-1]):
            raise DomainError(f"transform table covers [{xs[0]}, {xs[-1]}] only")
        return np.interp(x, xs, np.asarray(self.gs))


def _finite(*arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DomainError("inputs must be finite")


def quantile_score(x, y, beta: float):
    """Pinball loss ``(1{y <= x} - beta) * (x - y)``."""
    check_level(beta, "beta")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _finite(x, y)
    out = ((y <= x).astype(float) - beta) * (x - y)
    return float(out) if out.ndim == 0 else out


def _penalised(lower, upper, y, w_low, w_high, g=None):
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    y = np.asarray(y, dtype=float)
    _finite(lower, upper, y)
    if np.any(lower > upper):
        raise DomainError("lower bound exceeds upper bound")
    below = y < lower
    above = y > upper
    if g is None:
        gl, gu, gy = lower, upper, y
    else:
        gl, gu, gy = g(lower), g(upper), g(y)
    out = np.abs(gu - gl)
    out = out + np.where(below, w_low * (gl - gy), 0.0)
    out = out + np.where(above, w_high * (gy - gu), 0.0)
    return float(out) if out.ndim == 0 else out


def interval_scores(lower, upper, y, alpha: float):
    """Interval (Winkler) score at central level ``1 - alpha``, elementwise."""
    w_low, w_high = central_penalties(alpha)
    return _penalised(lower, upper, y, w_low, w_high)


def noncentral_interval_scores(lower, upper, y, levels: NonCentralLevels):
    w_low, w_high = noncentral_penalties(levels)
    return _penalised(lower, upper, y, w_low, w_high)


def generalized_interval_scores(lower, upper, y, alpha: float, g: TransformSpec):
    w_low, w_high = central_penalties(alpha)
    if g.kind == "identity":
        return _penalised(lower, upper, y, w_low, w_high)
    return _penalised(lower, upper, y, w_low, w_high, g=g)


def interval_score(iv: Interval, y: float, alpha: float) -> float:
    return interval_scores(iv.lower, iv.upper, y, alpha)


def noncentral_interval_score(iv: Interval, y: float, levels: NonCentralLevels) -> float:
    return noncentral_interval_scores(iv.lower, iv.upper, y, levels)


def generalized_interval_score(iv: Interval, y: float, alpha: float, g: TransformSpec) -> float:
    return generalized_interval_scores(iv.lower, iv.upper, y, alpha, g)


def mean_score(scores: Sequence[float]) -> float:
    """Correctly rounded mean; summation order cannot change the result."""
    values = np.asarray(scores, dtype=float).ravel()
    if values.size == 0:
        raise DomainError("mean of an empty sequence")
    _finite(values)
    return math.fsum(values.tolist()) / values.size
