"""Variance estimators built from replicate deviations.

Every stratified scheme here (brr, fay-brr, paired-jk, fay-jk) estimates the
same quantity and, after its scheme-specific rescaling, collapses to the sum
of squared stratum contrasts:

    V-hat = sum_h d_h**2.

The estimator functions compute the replicate-path value from the squared
deviations and, when the caller supplies the contrasts, carry the direct
sum of squares alongside as a cross-check.  The two routes are algebraically
identical; their floating-point values must agree to 1e-10 relative
tolerance, and `VarianceEstimate` refuses to hold a pair that does not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import StratifiedSample, _freeze, contrasts, direct_variance
from .errors import DimensionMismatch, EpsilonOutOfRange, OddReplicateCount, TooFewZones
from .replication import (
    BRR_FAMILY,
    JK_FAMILY,
    ReplicateEstimates,
    SchemeKind,
    SchemeSpec,
    ZoneSample,
    brr_weights,
    jk1_weights,
    paired_jk_weights,
    replicate_estimates,
    zones_from_sample,
)

#: Relative tolerance for the replicate-vs-contrast cross-check.
CROSS_CHECK_RTOL = 1e-10


@dataclass(frozen=True)
class VarianceEstimate:
    """A variance estimate with its two computation routes.

    ``value`` always equals ``via_replicates`` (the scheme's own formula
    applied to the deviations).  ``via_contrasts`` is sum(d**2) when the
    stratum contrasts are available (None for jk1, which has no strata);
    downstream consumers use ``canonical``, which prefers the contrast
    route because it is exact and scheme-independent.
    """

    scheme: SchemeSpec
    value: float
    via_replicates: float
    via_contrasts: float | None
    n_components: int | None

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "via_replicates", float(self.via_replicates))
        if self.value != self.via_replicates:
            raise ValueError("value must equal via_replicates")
        if self.value < 0:
            raise ValueError(f"variance cannot be negative, got {self.value}")
        if self.via_contrasts is not None:
            vc = float(self.via_contrasts)
            object.__setattr__(self, "via_contrasts", vc)
            if abs(self.via_replicates - vc) > CROSS_CHECK_RTOL * (1.0 + vc):
                raise ValueError(
                    "replicate-path variance disagrees with the contrast path: "
                    f"{self.via_replicates!r} vs {vc!r}"
                )

    @property
    def canonical(self) -> float:
        """The value reported downstream: the contrast route when present."""
        return self.via_contrasts if self.via_contrasts is not None else self.value


def _contrast_sum(contrast_values) -> tuple[float | None, int | None]:
    if contrast_values is None:
        return None, None
    d = np.asarray(contrast_values, dtype=float).reshape(-1)
    return direct_variance(d), d.size


def variance_brr(
    est: ReplicateEstimates, n_replicates: int, contrast_values=None
) -> VarianceEstimate:
    """Half-sample estimator (1/R) sum_r X_r**2 for plain brr (epsilon = 1)."""
    return variance_fay_brr(est, n_replicates, 1.0, contrast_values, _kind=SchemeKind.BRR)


def variance_fay_brr(
    est: ReplicateEstimates,
    n_replicates: int,
    epsilon: float,
    contrast_values=None,
    _kind: SchemeKind = SchemeKind.FAY_BRR,
) -> VarianceEstimate:
    """Fay estimator (1 / (epsilon**2 R)) sum_r X_r**2.

    The 1/epsilon**2 factor undoes the perturbation scaling, so the value is
    independent of epsilon; epsilon = 1 reduces to the plain brr estimator.
    """
    epsilon = float(epsilon)
    if not (0.0 < epsilon <= 1.0):
        raise EpsilonOutOfRange(f"epsilon must be in (0, 1], got {epsilon!r}")
    r = int(n_replicates)
    if r != est.n_replicates:
        raise ValueError(f"expected {r} replicates, estimates carry {est.n_replicates}")
    if r < 1:
        raise ValueError("need at least one replicate")
    value = float(np.sum(est.deviations**2)) / (epsilon**2 * r)
    vc, h = _contrast_sum(contrast_values)
    spec = SchemeSpec(_kind, epsilon)
    return VarianceEstimate(spec, value, value, vc, h)


def variance_paired_jk(
    est: ReplicateEstimates, epsilon: float = 1.0, contrast_values=None
) -> VarianceEstimate:
    """Paired jackknife estimator (1 / (2 epsilon**2)) sum_r X_r**2.

    Expects the 2H deviations ordered (stratum, unit); each stratum
    contributes X_(h1)**2 + X_(h2)**2 = 2 epsilon**2 d_h**2.
    """
    epsilon = float(epsilon)
    if not (0.0 < epsilon <= 1.0):
        raise EpsilonOutOfRange(f"epsilon must be in (0, 1], got {epsilon!r}")
    if est.n_replicates % 2 != 0:
        raise OddReplicateCount(
            f"paired jackknife needs an even replicate count, got {est.n_replicates}"
        )
    value = float(np.sum(est.deviations**2)) / (2.0 * epsilon**2)
    vc, h = _contrast_sum(contrast_values)
    kind = SchemeKind.PAIRED_JK if epsilon == 1.0 else SchemeKind.FAY_JK
    spec = SchemeSpec(kind, epsilon)
    return VarianceEstimate(spec, value, value, vc, h)


def variance_jk1(est: ReplicateEstimates, n_zones: int) -> VarianceEstimate:
    """Delete-a-group estimator ((G - 1) / G) sum_i delta_i**2.

    The (G - 1)/G factor cancels the G/(G - 1) weight rescaling so that the
    G = 2 case agrees with the paired jackknife on the equivalent one-stratum
    pair.  There are no stratum contrasts to cross-check against.
    """
    g = int(n_zones)
    if g < 2:
        raise TooFewZones(f"jk1 needs at least 2 zones, got {g}")
    if g != est.n_replicates:
        raise ValueError(f"expected {g} replicates, estimates carry {est.n_replicates}")
    value = float(np.sum(est.deviations**2)) * (g - 1) / g
    return VarianceEstimate(SchemeSpec(SchemeKind.JK1), value, value, None, g)


def brr_deviation_covariance(stratum_variances, signs) -> np.ndarray:
    """Theoretical covariance of brr deviations: Cov(X_r, X_s) = sum_h a_rh a_sh Var(d_h).

    Off-diagonals vanish only when the Var(d_h) are all equal (the sign rows
    are orthogonal but the weighting breaks the cancellation otherwise); the
    diagonal is sum_h Var(d_h) for every replicate.
    """
    v = np.asarray(stratum_variances, dtype=float).reshape(-1)
    a = np.asarray(signs, dtype=float)
    if a.ndim != 2 or a.shape[1] != v.size:
        raise DimensionMismatch(
            f"signs must be (n_replicates, {v.size}), got {a.shape}"
        )
    if (v < 0).any():
        raise ValueError("stratum variances must be nonnegative")
    return _freeze((a * v) @ a.T)


def estimate_variance(sample, spec: SchemeSpec) -> VarianceEstimate:
    """Full pipeline for one scheme: weights, replicate totals, estimator.

    Stratified schemes take a StratifiedSample and carry the contrast
    cross-check; jk1 takes a ZoneSample (a StratifiedSample is accepted and
    flattened one observation per zone).
    """
    if spec.kind is SchemeKind.JK1:
        zones = zones_from_sample(sample) if isinstance(sample, StratifiedSample) else sample
        table = jk1_weights(zones, spec)
        est = replicate_estimates(zones, table)
        return variance_jk1(est, zones.n_zones)
    if isinstance(sample, ZoneSample):
        raise ValueError(f"scheme {spec.kind.value!r} needs a stratified sample, not zones")
    d = contrasts(sample)
    if spec.kind in BRR_FAMILY:
        table = brr_weights(sample, spec)
        est = replicate_estimates(sample, table)
        if spec.kind is SchemeKind.BRR:
            return variance_brr(est, table.n_replicates, d)
        return variance_fay_brr(est, table.n_replicates, spec.epsilon, d)
    if spec.kind in JK_FAMILY:
        table = paired_jk_weights(sample, spec)
        est = replicate_estimates(sample, table)
        return variance_paired_jk(est, spec.epsilon, d)
    raise ValueError(f"unhandled scheme kind {spec.kind!r}")
