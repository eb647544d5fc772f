"""Stratified two-PSU sample model, total estimator, and stratum contrasts.

Every stratum holds exactly two weighted observations.  The within-stratum
contrast is the difference of the two weighted values; all replicate variance
estimators in this package collapse to the sum of its squares, so this module
is the numeric ground truth the rest of the code is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _check_obs(where: str, unit: int, weight: float, y: float) -> None:
    if not (math.isfinite(weight) and weight > 0):
        raise ValueError(f"{where} unit {unit}: weight must be finite and > 0, got {weight!r}")
    if not math.isfinite(y):
        raise ValueError(f"{where} unit {unit}: y must be finite, got {y!r}")


@dataclass(frozen=True)
class Stratum:
    """One stratum: a label and its two (weight, y) observations.

    Input order fixes which observation is "unit 1".  The contrast's sign
    depends on that order; every published estimator downstream depends only
    on its square, so the order is preserved but never reinterpreted.
    """

    label: str
    obs: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        if len(self.obs) != 2:
            raise ValueError(f"stratum {self.label!r}: exactly two observations required")
        clean = []
        for unit, (w, y) in enumerate(self.obs, start=1):
            w, y = float(w), float(y)
            _check_obs(f"stratum {self.label!r}", unit, w, y)
            clean.append((w, y))
        object.__setattr__(self, "obs", (clean[0], clean[1]))


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StratifiedSample:
    """An ordered collection of two-unit strata; weights are fixed design weights."""

    strata: tuple[Stratum, ...]

    def __post_init__(self):
        strata = tuple(self.strata)
        if not strata:
            raise ValueError("a sample needs at least one stratum")
        object.__setattr__(self, "strata", strata)
        w = np.array([[o[0] for o in s.obs] for s in strata], dtype=float)
        y = np.array([[o[1] for o in s.obs] for s in strata], dtype=float)
        object.__setattr__(self, "_w", _freeze(w))
        object.__setattr__(self, "_y", _freeze(y))

    @classmethod
    def from_arrays(cls, weights, y, labels=None) -> "StratifiedSample":
        """Build from (H, 2) weight and y arrays; labels default to s1..sH."""
        w = np.asarray(weights, dtype=float)
        yy = np.asarray(y, dtype=float)
        if w.ndim != 2 or w.shape[1] != 2 or w.shape != yy.shape:
            raise ValueError(f"weights and y must both have shape (H, 2), got {w.shape} and {yy.shape}")
        if labels is None:
            labels = [f"s{h + 1}" for h in range(w.shape[0])]
        elif len(labels) != w.shape[0]:
            raise ValueError("labels length must equal the number of strata")
        strata = tuple(
            Stratum(str(lab), ((w[h, 0], yy[h, 0]), (w[h, 1], yy[h, 1])))
            for h, lab in enumerate(labels)
        )
        return cls(strata)

    @property
    def n_strata(self) -> int:
        return len(self.strata)

    @property
    def weights(self) -> np.ndarray:
        """(H, 2) design weights, read-only."""
        return self._w

    @property
    def y_values(self) -> np.ndarray:
        """(H, 2) observed values, read-only."""
        return self._y

    @property
    def weights_flat(self) -> np.ndarray:
        """Weights in observation order: stratum-major, unit 1 then unit 2."""
        return _freeze(self._w.reshape(-1))

    @property
    def y_flat(self) -> np.ndarray:
        return _freeze(self._y.reshape(-1))

    def with_units_swapped(self, index: int) -> "StratifiedSample":
        """Copy of the sample with the two units of stratum ``index`` exchanged."""
        strata = list(self.strata)
        s = strata[index]
        strata[index] = Stratum(s.label, (s.obs[1], s.obs[0]))
        return StratifiedSample(tuple(strata))


def total_estimate(sample) -> float:
    """Full-sample estimate of the population total, sum of weight * y.

    Accepts anything exposing ``weights_flat`` / ``y_flat`` (stratified
    samples and single-unit zone samples alike).
    """
    return float((sample.weights_flat * sample.y_flat).sum())


#: Contrast vectors are plain 1-D float arrays, one d_h per stratum in
#: stratum order; no wrapper class is needed beyond that convention.
ContrastVector = np.ndarray


def contrasts(sample: StratifiedSample) -> ContrastVector:
    """Within-stratum contrasts d_h = w_h1*y_h1 - w_h2*y_h2, in stratum order."""
    w, y = sample.weights, sample.y_values
    return w[:, 0] * y[:, 0] - w[:, 1] * y[:, 1]


def direct_variance(contrast_values) -> float:
    """Sum of squared stratum contrasts: the canonical variance of the total.

    Every replicate scheme in this package must reproduce this value; it is
    the cheap, numerically tight path used for reporting.
    """
    d = np.asarray(contrast_values, dtype=float)
    return float((d * d).sum())
