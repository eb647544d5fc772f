"""Effective degrees of freedom and t-based confidence intervals.

The variance estimator is a sum of H squared contrasts, so it behaves like a
weighted sum of independent one-df chi-squared components.  Its effective
degrees of freedom follow the Welch-Satterthwaite idea:

    nu        = (sum_h var_h)**2 / sum_h var_h**2          (population form)
    nu_naive  = (sum_h d_h**2)**2 / sum_h d_h**4           (plug-in)
    nu_corr   = 3 * nu_naive - 2                           (bias corrected)

The plug-in form is biased toward small values because the fourth powers of
the contrasts overweight large strata; the affine correction removes the
leading bias under normality.  Quantiles come from the t distribution with
fractional degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.stats

from .errors import DegenerateContrasts, InvalidProbability


class DofBasis(str, Enum):
    """What the degrees-of-freedom estimate was computed from."""

    CONTRASTS = "contrasts"
    JK_REPLICATES = "jk-replicates"


class DofRule(str, Enum):
    """Which degrees of freedom feed the t quantile of an interval."""

    CORRECTED = "corrected"
    NAIVE = "naive"
    FIXED_H = "fixed-h"
    NORMAL = "normal"


@dataclass(frozen=True)
class DofEstimate:
    """Naive and bias-corrected Welch-Satterthwaite degrees of freedom.

    ``corrected_clamped`` floors the corrected value at 1 so a t quantile
    always exists; the floor can bind only at the boundary, because the
    naive value is at least 1 by Cauchy-Schwarz and the correction maps
    1 to 1.
    """

    naive: float
    corrected: float
    corrected_clamped: float
    basis: DofBasis

    def __post_init__(self):
        naive = float(self.naive)
        if not naive >= 1.0:
            raise ValueError(f"naive dof must be >= 1, got {naive!r}")
        if abs(self.corrected - (3.0 * naive - 2.0)) > 1e-12 * max(1.0, naive):
            raise ValueError("corrected dof must equal 3 * naive - 2")
        if self.corrected_clamped != max(float(self.corrected), 1.0):
            raise ValueError("corrected_clamped must equal max(corrected, 1)")
        object.__setattr__(self, "naive", naive)
        object.__setattr__(self, "corrected", float(self.corrected))
        object.__setattr__(self, "corrected_clamped", float(self.corrected_clamped))
        object.__setattr__(self, "basis", DofBasis(self.basis))


@dataclass(frozen=True)
class ConfidenceInterval:
    """A symmetric t interval: center +- half_width at the given level."""

    center: float
    half_width: float
    level: float
    dof_used: float

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must be in (0, 1), got {self.level!r}")
        if not self.half_width >= 0.0:
            raise ValueError(f"half_width must be >= 0, got {self.half_width!r}")

    @property
    def lower(self) -> float:
        return self.center - self.half_width

    @property
    def upper(self) -> float:
        return self.center + self.half_width

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def _squares(values, what: str) -> np.ndarray:
    d2 = np.asarray(values, dtype=float).reshape(-1) ** 2
    if d2.size == 0 or not np.any(d2 > 0.0):
        raise DegenerateContrasts(f"all {what} are zero; degrees of freedom are undefined")
    return d2


def ws_naive(contrast_values) -> float:
    """Plug-in Welch-Satterthwaite dof (sum d**2)**2 / sum d**4, in [1, H]."""
    d2 = _squares(contrast_values, "contrasts")
    # The ratio is >= 1 by Cauchy-Schwarz; clamp the one-ulp rounding dip
    # that near-single-contrast inputs can produce.
    return float(max(np.sum(d2) ** 2 / np.sum(d2**2), 1.0))


def ws_corrected(contrast_values) -> DofEstimate:
    """Bias-corrected dof 3 * naive - 2, in [1, 3H - 2]."""
    naive = ws_naive(contrast_values)
    corrected = 3.0 * naive - 2.0
    return DofEstimate(naive, corrected, max(corrected, 1.0), DofBasis.CONTRASTS)


def ws_from_jk_replicates(deviations, epsilon: float = 1.0) -> DofEstimate:
    """Corrected dof computed from jackknife deviations, one per component.

    For the paired schemes pass the (h1) replicate deviation of each stratum
    (every other entry of the replicate ordering); dividing out the Fay
    epsilon recovers |d_h|, so the result equals ws_corrected on the
    contrasts exactly.  For jk1 pass all G deviations, one per zone.
    """
    epsilon = float(epsilon)
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon!r}")
    d = np.asarray(deviations, dtype=float).reshape(-1) / epsilon
    base = ws_corrected(d)
    return DofEstimate(base.naive, base.corrected, base.corrected_clamped, DofBasis.JK_REPLICATES)


def t_quantile(dof: float, p: float) -> float:
    """Quantile of the t distribution; fractional dof supported.

    dof = inf gives the normal quantile (the t limit).  Accuracy is 1e-10
    absolute in the CDF sense.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InvalidProbability(f"p must be in (0, 1), got {p!r}")
    dof = float(dof)
    if math.isinf(dof):
        return float(scipy.stats.norm.ppf(p))
    if not dof > 0.0:
        raise ValueError(f"dof must be > 0, got {dof!r}")
    return float(scipy.stats.t.ppf(p, dof))


def confidence_interval(
    total: float,
    variance,
    dof: DofEstimate | None,
    level: float,
    dof_value: float | None = None,
) -> ConfidenceInterval:
    """t interval total +- t_(dof, 1 - alpha/2) * sqrt(variance).

    Uses ``dof.corrected_clamped`` unless ``dof_value`` overrides it (for the
    naive rule, a fixed-H rule, or inf for normal quantiles).  ``variance``
    may be a VarianceEstimate (its canonical value is used) or a plain
    nonnegative float.  A zero variance yields a degenerate point interval.
    """
    if not 0.0 < level < 1.0:
        raise InvalidProbability(f"level must be in (0, 1), got {level!r}")
    v = float(getattr(variance, "canonical", variance))
    if v < 0.0:
        raise ValueError(f"variance must be >= 0, got {v!r}")
    if dof_value is None:
        if dof is None:
            raise DegenerateContrasts("no degrees of freedom available for the interval")
        dof_value = dof.corrected_clamped
    q = t_quantile(float(dof_value), 1.0 - (1.0 - level) / 2.0)
    return ConfidenceInterval(float(total), q * math.sqrt(v), float(level), float(dof_value))


def variance_of_variance_normal(stratum_variances) -> float:
    """Normal-theory Var(V-hat) = sum_h 2 * Var(d_h)**2.

    Each d_h**2 is Var(d_h) times a one-df chi-squared under normality, so
    its variance is twice the squared stratum variance.
    """
    v = np.asarray(stratum_variances, dtype=float).reshape(-1)
    if (v < 0).any():
        raise ValueError("stratum variances must be nonnegative")
    return float(np.sum(2.0 * v**2))


def replicate_square_sum_variance(stratum_variances, n_replicates: int) -> float:
    """Var(sum_r X_r**2) = R**2 * sum_h Var(d_h**2) for a full brr table.

    Every replicate's squared deviation expands to the same sum of squared
    contrasts plus cross terms whose covariance structure contributes the
    R**2 factor.
    """
    r = int(n_replicates)
    if r < 1:
        raise ValueError("need at least one replicate")
    return r**2 * variance_of_variance_normal(stratum_variances)
