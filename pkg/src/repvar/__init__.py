"""Replicate variance estimation for stratified two-PSU-per-stratum samples.

Balanced repeated replication (plain and Fay-perturbed), the paired
jackknife (plain and Fay-perturbed), and the delete-a-group jackknife, all
of which collapse to the same sum of squared stratum contrasts; plus
Hadamard matrix construction, bias-corrected Welch-Satterthwaite effective
degrees of freedom, t-based confidence intervals, and a Monte Carlo harness
for the distributional claims behind them.
"""

from .design import (
    ContrastVector,
    Stratum,
    StratifiedSample,
    contrasts,
    direct_variance,
    total_estimate,
)
from .dof import (
    ConfidenceInterval,
    DofBasis,
    DofEstimate,
    DofRule,
    confidence_interval,
    replicate_square_sum_variance,
    t_quantile,
    variance_of_variance_normal,
    ws_corrected,
    ws_from_jk_replicates,
    ws_naive,
)
from .errors import (
    ConfigError,
    DegenerateContrasts,
    DimensionMismatch,
    DuplicatePsu,
    EpsilonOutOfRange,
    InsufficientBalancedColumns,
    InvalidProbability,
    MissingPair,
    NonPositiveWeight,
    OddReplicateCount,
    ParseError,
    RepvarError,
    TooFewZones,
    UnconstructibleOrder,
)
from .estimators import (
    VarianceEstimate,
    brr_deviation_covariance,
    estimate_variance,
    variance_brr,
    variance_fay_brr,
    variance_jk1,
    variance_paired_jk,
)
from .hadamard import (
    HadamardMatrix,
    balanced_columns,
    construct,
    is_constructible,
    smallest_valid_order,
    verify,
)
from .io import (
    VarianceReport,
    build_report,
    parse_sample,
    write_hadamard_csv,
    write_replicates_csv,
)
from .replication import (
    ReplicateEstimates,
    ReplicateWeightTable,
    SchemeKind,
    SchemeSpec,
    Zone,
    ZoneSample,
    brr_weights,
    default_hadamard_order,
    jk1_weights,
    paired_jk_weights,
    replicate_estimates,
    replicate_mean_check,
    zones_from_sample,
)
from .simulation import (
    ProfileKind,
    SigmaProfile,
    SimulationConfig,
    SimulationReport,
    check_chi2_approx,
    check_deviation_covariance,
    check_dof_calibration,
    draw_sample,
    run_coverage,
    run_simulation,
    true_total,
)

__version__ = "0.1.0"

__all__ = [
    "ConfidenceInterval",
    "ConfigError",
    "ContrastVector",
    "DegenerateContrasts",
    "DimensionMismatch",
    "DofBasis",
    "DofEstimate",
    "DofRule",
    "DuplicatePsu",
    "EpsilonOutOfRange",
    "HadamardMatrix",
    "InsufficientBalancedColumns",
    "InvalidProbability",
    "MissingPair",
    "NonPositiveWeight",
    "OddReplicateCount",
    "ParseError",
    "ProfileKind",
    "ReplicateEstimates",
    "ReplicateWeightTable",
    "RepvarError",
    "SchemeKind",
    "SchemeSpec",
    "SigmaProfile",
    "SimulationConfig",
    "SimulationReport",
    "Stratum",
    "StratifiedSample",
    "TooFewZones",
    "UnconstructibleOrder",
    "VarianceEstimate",
    "VarianceReport",
    "Zone",
    "ZoneSample",
    "balanced_columns",
    "brr_deviation_covariance",
    "brr_weights",
    "build_report",
    "check_chi2_approx",
    "check_deviation_covariance",
    "check_dof_calibration",
    "confidence_interval",
    "construct",
    "contrasts",
    "default_hadamard_order",
    "direct_variance",
    "draw_sample",
    "estimate_variance",
    "is_constructible",
    "jk1_weights",
    "paired_jk_weights",
    "parse_sample",
    "replicate_estimates",
    "replicate_mean_check",
    "replicate_square_sum_variance",
    "run_coverage",
    "run_simulation",
    "smallest_valid_order",
    "t_quantile",
    "total_estimate",
    "true_total",
    "variance_brr",
    "variance_fay_brr",
    "variance_jk1",
    "variance_of_variance_normal",
    "variance_paired_jk",
    "verify",
    "write_hadamard_csv",
    "write_replicates_csv",
    "ws_corrected",
    "ws_from_jk_replicates",
    "ws_naive",
    "zones_from_sample",
]
