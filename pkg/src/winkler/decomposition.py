"""Sample decomposition of the mean interval score.

``mean_score = unc - dsc + mcb`` where

* ``unc`` scores the constant interval of empirical lower quantiles,
* ``dsc`` is the improvement of the IDR-recalibrated intervals over ``unc``,
* ``mcb`` is the improvement of the recalibrated intervals over the forecasts.

The recalibrated interval of case i is ``[q_lo[i], q_hi[i]]``, the lower
quantiles of the IDR predictive distribution fitted with the intervals as
covariates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .idr import MAX_CASES, SMALL_SAMPLE, dag_lower_quantiles, empirical_lower_quantile
from .ordering import OrderKind, build_dag, comparability_fraction
from .scoring import (
    DomainError,
    InvariantError,
    NonCentralLevels,
    TransformSpec,
    check_level,
    generalized_interval_scores,
    mean_score,
    noncentral_interval_scores,
)

REPORT_FIELDS = (
    "mean_score",
    "unc",
    "dsc",
    "mcb",
    "n",
    "comparability",
    "open_coverage",
    "closed_coverage",
    "mean_length_original",
    "mean_length_recalibrated",
    "warnings",
)
CLAMP_TOL = 1e-10
EXACTNESS_TOL = 1e-9


class UnsafeOrderError(DomainError):
    """Midpoint order requested without explicitly accepting its failure mode."""


@dataclass
class EvaluationSet:
    """Interval forecasts, outcomes and evaluation settings.

    ``levels`` switches to the non-central score at ``(alpha1, alpha2)``;
    otherwise the central interval score at ``alpha`` is used.
    """

    lower: np.ndarray
    upper: np.ndarray
    observed: np.ndarray
    alpha: float = 0.1
    levels: NonCentralLevels | None = None
    transform: TransformSpec = field(default_factory=TransformSpec.identity)
    order_kind: OrderKind = OrderKind.COMPONENTWISE
    allow_unsafe_order: bool = False
    allow_degenerate: bool = False
    comparability_threshold: float = 0.6
    max_cases: int = MAX_CASES

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.observed = np.asarray(self.observed, dtype=float)
        if not (self.lower.shape == self.upper.shape == self.observed.shape) or self.lower.ndim != 1:
            raise DomainError("lower, upper and observed must be 1-d with equal lengths")
        if self.observed.size < 2:
            raise DomainError("decomposition needs at least two cases")
        for name in ("lower", "upper", "observed"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DomainError(f"{name} contains non-finite values")
        bad = np.flatnonzero(self.lower > self.upper)
        if bad.size:
            raise DomainError(f"lower bound exceeds upper bound at case {bad[0]}")
        if not self.allow_degenerate:
            flat = np.flatnonzero(self.lower == self.upper)
            if flat.size:
                raise DomainError(f"degenerate interval at case {flat[0]}; pass allow_degenerate to accept")
        check_level(self.alpha)
        if self.levels is not None and self.transform.kind != "identity":
            raise DomainError("transforms are only defined for central intervals")
        self.order_kind = OrderKind(self.order_kind)

    @property
    def n(self) -> int:
        return self.observed.size

    @property
    def quantile_levels(self) -> tuple[float, float]:
        if self.levels is not None:
            return self.levels.alpha1, self.levels.alpha2
        return self.alpha / 2, 1 - self.alpha / 2

    @property
    def nominal_coverage(self) -> float:
        lo, hi = self.quantile_levels
        return hi - lo

    def scores(self, lower, upper) -> np.ndarray:
        if self.levels is not None:
            return noncentral_interval_scores(lower, upper, self.observed, self.levels)
        return generalized_interval_scores(lower, upper, self.observed, self.alpha, self.transform)


@dataclass
class DecompositionReport:
    mean_score: float
    unc: float
    dsc: float
    mcb: float
    n: int
    comparability: float
    open_coverage: float
    closed_coverage: float
    mean_length_original: float
    mean_length_recalibrated: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        """JSON payload: dsc/mcb clamped to 0 near zero, raw values kept."""
        out = {name: getattr(self, name) for name in REPORT_FIELDS}
        out["dsc"] = _clamp(self.dsc)
        out["mcb"] = _clamp(self.mcb)
        out["warnings"] = list(self.warnings)
        out["dsc_raw"] = self.dsc
        out["mcb_raw"] = self.mcb
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DecompositionReport":
        missing = [k for k in REPORT_FIELDS if k not in data]
        if missing:
            raise DomainError(f"report is missing fields {missing}")
        kw = {k: data[k] for k in REPORT_FIELDS}
        kw["dsc"] = data.get("dsc_raw", data["dsc"])
        kw["mcb"] = data.get("mcb_raw", data["mcb"])
        kw["n"] = int(kw["n"])
        kw["warnings"] = list(kw["warnings"])
        return cls(**kw)


def _clamp(x: float) -> float:
    return 0.0 if abs(x) <= CLAMP_TOL else x


def coverage_report(lower, upper, y) -> tuple[float, float, float]:
    """Open coverage, closed coverage and mean length."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size == 0 or not (lower.shape == upper.shape == y.shape):
        raise DomainError("coverage needs equal-length non-empty inputs")
    open_cov = np.count_nonzero((lower < y) & (y < upper)) / y.size
    closed_cov = np.count_nonzero((lower <= y) & (y <= upper)) / y.size
    return open_cov, closed_cov, mean_score(upper - lower)


@dataclass
class Decomposition:
    """Report plus the per-case arrays it was computed from."""

    report: DecompositionReport
    recal_lower: np.ndarray
    recal_upper: np.ndarray
    scores: np.ndarray
    recal_scores: np.ndarray


def _run(es: EvaluationSet) -> Decomposition:
    if es.order_kind.unsafe and not es.allow_unsafe_order:
        raise UnsafeOrderError(
            "the midpoint order does not imply componentwise ordering of the bounds, "
            "so the miscalibration term can turn negative; set allow_unsafe_order to use it anyway"
        )
    if es.n > es.max_cases:
        raise DomainError(
            f"{es.n} cases exceed the IDR size cap of {es.max_cases}; "
            "evaluate a random subsample or raise max_cases explicitly"
        )
    beta_lo, beta_hi = es.quantile_levels
    y = es.observed
    dag = build_dag((es.lower, es.upper), es.order_kind)
    q_lo = dag_lower_quantiles(dag, y, beta_lo)
    q_hi = dag_lower_quantiles(dag, y, beta_hi)
    e_lo = empirical_lower_quantile(y, beta_lo)
    e_hi = empirical_lower_quantile(y, beta_hi)

    scores = es.scores(es.lower, es.upper)
    recal_scores = es.scores(q_lo, q_hi)
    const_scores = es.scores(np.full(es.n, e_lo), np.full(es.n, e_hi))
    mean = mean_score(scores)
    recal = mean_score(recal_scores)
    unc = mean_score(const_scores)
    dsc = unc - recal
    mcb = mean - recal

    scale = max(1.0, abs(mean))
    if abs(unc - dsc + mcb - mean) > EXACTNESS_TOL * scale:
        raise InvariantError(f"decomposition not exact: {unc} - {dsc} + {mcb} != {mean}")
    guaranteed = not es.order_kind.unsafe and es.transform.strictly_increasing
    if guaranteed and min(dsc, mcb) < -EXACTNESS_TOL * scale:
        raise InvariantError(f"negative decomposition term under componentwise order: dsc={dsc}, mcb={mcb}")

    comp = comparability_fraction((es.lower, es.upper), es.order_kind)
    open_cov, closed_cov, recal_len = coverage_report(q_lo, q_hi, y)
    notes = []
    if es.order_kind.unsafe:
        notes.append("unsafe order 'midpoint': dsc and mcb carry no sign guarantee")
    if es.n < SMALL_SAMPLE:
        notes.append(f"small sample: n={es.n} < {SMALL_SAMPLE}; IDR-based terms may be unreliable")
    if comp < es.comparability_threshold:
        notes.append(
            f"low comparability: {comp:.3f} of interval pairs are ordered "
            f"(threshold {es.comparability_threshold}); effective sample size is reduced"
        )
    flat = int(np.count_nonzero(q_lo == q_hi))
    if flat:
        notes.append(f"{flat} recalibrated intervals are degenerate (tied outcomes)")
    if not es.transform.strictly_increasing:
        notes.append("transform is not strictly increasing: dsc and mcb may be negative")
    report = DecompositionReport(
        mean_score=mean,
        unc=unc,
        dsc=dsc,
        mcb=mcb,
        n=es.n,
        comparability=comp,
        open_coverage=open_cov,
        closed_coverage=closed_cov,
        mean_length_original=mean_score(es.upper - es.lower),
        mean_length_recalibrated=recal_len,
        warnings=notes,
    )
    return Decomposition(report, q_lo, q_hi, scores, recal_scores)


def decompose(es: EvaluationSet) -> DecompositionReport:
    return _run(es).report


def decompose_noncentral(es: EvaluationSet) -> DecompositionReport:
    if es.levels is None:
        raise DomainError("non-central decomposition needs levels=(alpha1, alpha2)")
    return _run(es).report


def decompose_generalized(es: EvaluationSet) -> DecompositionReport:
    if es.levels is not None:
        raise DomainError("generalised decomposition is defined for central intervals only")
    return _run(es).report


def recalibrate(es: EvaluationSet) -> tuple[np.ndarray, np.ndarray]:
    """IDR-recalibrated bounds; isotonic in the same order as the inputs."""
    d = _run(es)
    return d.recal_lower, d.recal_upper


def decompose_full(es: EvaluationSet) -> Decomposition:
    return _run(es)


def nominal_sandwich_holds(report: DecompositionReport, nominal: float) -> bool:
    # exact counts: compare k/n against the nominal level with a rounding guard
    eps = 1e-12
    return report.open_coverage <= nominal + eps and nominal - eps <= report.closed_coverage


def is_finite_report(report: DecompositionReport) -> bool:
    return all(
        math.isfinite(getattr(report, k))
        for k in REPORT_FIELDS
        if k not in ("warnings", "n")
    )
