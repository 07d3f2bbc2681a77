"""Interval score decomposition with isotonic distributional regression."""

from .scoring import (
    DomainError,
    Interval,
    InvariantError,
    NonCentralLevels,
    TransformSpec,
    generalized_interval_score,
    interval_score,
    mean_score,
    noncentral_interval_score,
    quantile_score,
)
from .ordering import OrderDag, OrderKind, OrderRelation, build_dag, comparability_fraction, compare
from .idr import (
    IdrFit,
    empirical_lower_quantile,
    idr_fit,
    idr_lower_quantile,
    idr_quantiles,
    isotonic_binary_fit,
)

from .decomposition import (
    DecompositionReport,
    EvaluationSet,
    UnsafeOrderError,
    coverage_report,
    decompose,
    decompose_full,
    decompose_generalized,
    decompose_noncentral,
    recalibrate,
)
from .simulation import ForecasterKind, run_simulation_study, simulate_scenario
from .report import McbDscEntry, make_plot_spec, mcb_dsc_plot, read_report_json, write_report_json

__version__ = "0.1.0"
