"""Replicate weight tables and replicate totals for every supported scheme.

Schemes
-------
- ``brr``        balanced half-samples: Hadamard sign +1 doubles unit 1 and
                 drops unit 2, sign -1 does the reverse.
- ``fay-brr``    same signs, but weights are perturbed by a factor
                 (1 +- epsilon) instead of {0, 2}, keeping every replicate
                 weight positive for 0 < epsilon < 1.
- ``paired-jk``  two replicates per stratum, each dropping one unit and
                 doubling its partner.
- ``fay-jk``     the perturbed version of the paired jackknife.
- ``jk1``        delete-a-group jackknife for one-unit-per-zone designs:
                 each replicate drops one zone and rescales the survivors by
                 G / (G - 1).

Replicate deviations are computed from the weight *deltas* against the full
sample, not as a difference of two large totals.  That avoids catastrophic
cancellation (the deviation is tiny relative to the total) and makes the two
jackknife deviations of a stratum exact floating-point negatives of each
other.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .design import StratifiedSample, _freeze, total_estimate
from .errors import DimensionMismatch, EpsilonOutOfRange, TooFewZones
from .hadamard import balanced_columns, construct, smallest_valid_order


class SchemeKind(str, Enum):
    BRR = "brr"
    FAY_BRR = "fay-brr"
    PAIRED_JK = "paired-jk"
    FAY_JK = "fay-jk"
    JK1 = "jk1"


BRR_FAMILY = frozenset({SchemeKind.BRR, SchemeKind.FAY_BRR})
JK_FAMILY = frozenset({SchemeKind.PAIRED_JK, SchemeKind.FAY_JK})

#: Default perturbation for the positive-weight schemes.
DEFAULT_FAY_EPSILON = 0.5


@dataclass(frozen=True)
class SchemeSpec:
    """Which replicate scheme to run and with what parameters.

    ``epsilon`` defaults to 1 for brr / paired-jk / jk1 (where the value is
    part of the scheme's definition) and to 0.5 for the fay variants.
    ``hadamard_order`` applies to the brr family only; when omitted the
    smallest order with enough zero-sum sign columns is chosen.
    """

    kind: SchemeKind
    epsilon: float | None = None
    hadamard_order: int | None = None

    def __post_init__(self):
        kind = SchemeKind(self.kind)
        object.__setattr__(self, "kind", kind)
        eps = self.epsilon
        if eps is None:
            eps = DEFAULT_FAY_EPSILON if kind in (SchemeKind.FAY_BRR, SchemeKind.FAY_JK) else 1.0
        eps = float(eps)
        if not (0.0 < eps <= 1.0) or not math.isfinite(eps):
            raise EpsilonOutOfRange(f"epsilon must be in (0, 1], got {eps!r}")
        if kind in (SchemeKind.BRR, SchemeKind.PAIRED_JK, SchemeKind.JK1) and eps != 1.0:
            raise EpsilonOutOfRange(
                f"{kind.value} fixes epsilon at 1; use the fay variant for epsilon={eps}"
            )
        object.__setattr__(self, "epsilon", eps)
        if self.hadamard_order is not None:
            if kind not in BRR_FAMILY:
                raise ValueError(f"hadamard_order does not apply to scheme {kind.value!r}")
            order = int(self.hadamard_order)
            if order < 1:
                raise ValueError(f"hadamard_order must be >= 1, got {order}")
            object.__setattr__(self, "hadamard_order", order)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "epsilon": self.epsilon,
            "hadamard_order": self.hadamard_order,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SchemeSpec":
        known = {"kind", "epsilon", "hadamard_order"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown scheme fields: {sorted(extra)}")
        if "kind" not in data:
            raise ValueError("scheme requires a 'kind' field")
        try:
            kind = SchemeKind(data["kind"])
        except ValueError:
            choices = ", ".join(k.value for k in SchemeKind)
            raise ValueError(f"unknown scheme kind {data['kind']!r}; choose one of {choices}") from None
        return cls(kind, data.get("epsilon"), data.get("hadamard_order"))


@dataclass(frozen=True)
class Zone:
    """A single weighted observation in a one-unit-per-zone design."""

    label: str
    weight: float
    y: float

    def __post_init__(self):
        w, y = float(self.weight), float(self.y)
        if not (math.isfinite(w) and w > 0):
            raise ValueError(f"zone {self.label!r}: weight must be finite and > 0, got {w!r}")
        if not math.isfinite(y):
            raise ValueError(f"zone {self.label!r}: y must be finite, got {y!r}")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class ZoneSample:
    """Ordered single-unit zones; the design the jk1 scheme applies to."""

    zones: tuple[Zone, ...]

    def __post_init__(self):
        zones = tuple(self.zones)
        if not zones:
            raise ValueError("a zone sample needs at least one zone")
        object.__setattr__(self, "zones", zones)
        object.__setattr__(self, "_w", _freeze(np.array([z.weight for z in zones])))
        object.__setattr__(self, "_y", _freeze(np.array([z.y for z in zones])))

    @classmethod
    def from_arrays(cls, weights, y, labels=None) -> "ZoneSample":
        w = np.asarray(weights, dtype=float).reshape(-1)
        yy = np.asarray(y, dtype=float).reshape(-1)
        if w.shape != yy.shape:
            raise ValueError("weights and y must have the same length")
        if labels is None:
            labels = [f"z{i + 1}" for i in range(w.size)]
        return cls(tuple(Zone(str(lab), w[i], yy[i]) for i, lab in enumerate(labels)))

    @property
    def n_zones(self) -> int:
        return len(self.zones)

    @property
    def weights_flat(self) -> np.ndarray:
        return self._w

    @property
    def y_flat(self) -> np.ndarray:
        return self._y


@dataclass(frozen=True)
class ReplicateWeightTable:
    """Materialized replicate weights: one row per replicate, one column per observation.

    ``signs`` holds the Hadamard sign columns for the brr family.  ``pattern``
    holds the jackknife structure: rows (stratum, favored unit) for the paired
    schemes, or the dropped zone index for jk1.
    """

    scheme: SchemeSpec
    full_weights: np.ndarray
    weights: np.ndarray
    signs: np.ndarray | None = None
    pattern: np.ndarray | None = None

    def __post_init__(self):
        full = np.asarray(self.full_weights, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[1] != full.size:
            raise ValueError(f"weights must be (n_replicates, {full.size}), got {w.shape}")
        if (w < 0).any():
            raise ValueError("replicate weights must be nonnegative")
        object.__setattr__(self, "full_weights", _freeze(full))
        object.__setattr__(self, "weights", _freeze(w))
        for name in ("signs", "pattern"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _freeze(np.asarray(val)))

    @property
    def n_replicates(self) -> int:
        return self.weights.shape[0]

    @property
    def n_observations(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class ReplicateEstimates:
    """Replicate totals and their deviations from the full-sample total."""

    t_full: float
    t_rep: np.ndarray
    deviations: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_rep, dtype=float)
        d = np.asarray(self.deviations, dtype=float)
        if t.shape != d.shape or t.ndim != 1:
            raise ValueError("t_rep and deviations must be 1-D arrays of equal length")
        object.__setattr__(self, "t_rep", _freeze(t))
        object.__setattr__(self, "deviations", _freeze(d))

    @property
    def n_replicates(self) -> int:
        return self.deviations.size


def zones_from_sample(sample: StratifiedSample) -> ZoneSample:
    """Flatten a stratified sample into one zone per observation.

    Lets the jk1 scheme run on data ingested in the two-PSU format; zone
    labels are "<stratum>/<unit>" in sample order.
    """
    zones = []
    for stratum in sample.strata:
        for i, (w, y) in enumerate(stratum.obs):
            zones.append(Zone(f"{stratum.label}/{i + 1}", w, y))
    return ZoneSample(tuple(zones))


def default_hadamard_order(n_strata: int) -> int:
    """Smallest constructible order whose matrix supplies n_strata sign columns.

    A normalized matrix of order R reserves one all-ones column, leaving
    R - 1 usable sign columns, so this is the smallest constructible order
    >= n_strata + 1.
    """
    return smallest_valid_order(n_strata + 1)


def brr_weights(sample: StratifiedSample, spec: SchemeSpec) -> ReplicateWeightTable:
    """Half-sample replicate weights w * (1 + sign * delta * epsilon).

    ``delta`` is +1 for unit 1 and -1 for unit 2; epsilon = 1 reproduces the
    {0, 2w} half-sample scheme, epsilon < 1 keeps all weights positive.
    """
    if spec.kind not in BRR_FAMILY:
        raise ValueError(f"scheme {spec.kind.value!r} is not a brr-family scheme")
    h = sample.n_strata
    order = spec.hadamard_order if spec.hadamard_order is not None else default_hadamard_order(h)
    signs = balanced_columns(construct(order), h)
    delta = np.array([1.0, -1.0])
    factors = 1.0 + spec.epsilon * signs[:, :, None] * delta  # (R, H, 2)
    weights = sample.weights_flat * factors.reshape(order, 2 * h)
    resolved = dataclasses.replace(spec, hadamard_order=order)
    return ReplicateWeightTable(resolved, sample.weights_flat, weights, signs=signs)


def paired_jk_weights(sample: StratifiedSample, spec: SchemeSpec) -> ReplicateWeightTable:
    """Two replicates per stratum, ordered (stratum, unit).

    The replicate favoring unit i multiplies that unit's weight by
    (1 + epsilon) and its partner's by (1 - epsilon), leaving every other
    stratum untouched; epsilon = 1 is delete-and-double.
    """
    if spec.kind not in JK_FAMILY:
        raise ValueError(f"scheme {spec.kind.value!r} is not a paired-jackknife scheme")
    h = sample.n_strata
    full = sample.weights_flat
    weights = np.tile(full, (2 * h, 1))
    reps = np.arange(2 * h)
    strata = reps // 2
    favored = reps % 2
    weights[reps, 2 * strata + favored] *= 1.0 + spec.epsilon
    weights[reps, 2 * strata + (1 - favored)] *= 1.0 - spec.epsilon
    pattern = np.column_stack([strata, favored])
    return ReplicateWeightTable(spec, full, weights, pattern=pattern)


def jk1_weights(zones: ZoneSample, spec: SchemeSpec | None = None) -> ReplicateWeightTable:
    """Delete-a-group replicates: drop one zone, rescale the rest by G/(G-1)."""
    if spec is None:
        spec = SchemeSpec(SchemeKind.JK1)
    elif spec.kind is not SchemeKind.JK1:
        raise ValueError(f"scheme {spec.kind.value!r} is not jk1")
    g = zones.n_zones
    if g < 2:
        raise TooFewZones(f"jk1 needs at least 2 zones, got {g}")
    full = zones.weights_flat
    weights = np.tile(full * (g / (g - 1)), (g, 1))
    weights[np.arange(g), np.arange(g)] = 0.0
    return ReplicateWeightTable(spec, full, weights, pattern=np.arange(g))


def replicate_estimates(sample, table: ReplicateWeightTable) -> ReplicateEstimates:
    """Replicate totals for a sample under a weight table built from it.

    Deviations are evaluated as (replicate weights - full weights) . y, which
    is algebraically t_rep - t_full but loses no precision to cancellation.
    """
    w_full = sample.weights_flat
    if table.n_observations != w_full.size:
        raise DimensionMismatch(
            f"table covers {table.n_observations} observations, sample has {w_full.size}"
        )
    if not np.array_equal(table.full_weights, w_full):
        raise DimensionMismatch("table full-sample weights do not match this sample")
    t_full = total_estimate(sample)
    deviations = (table.weights - w_full) @ sample.y_flat
    return ReplicateEstimates(t_full=t_full, t_rep=t_full + deviations, deviations=deviations)


def replicate_mean_check(est: ReplicateEstimates, scheme: SchemeSpec) -> float:
    """Mean of replicate totals minus the full-sample total.

    Zero (up to float rounding) for the brr family, by the zero column sums
    of the sign matrix; not meaningful for the jackknife schemes.
    """
    if scheme.kind not in BRR_FAMILY:
        raise ValueError(f"replicate mean identity only applies to brr-family schemes, got {scheme.kind.value!r}")
    return float(est.deviations.mean())
