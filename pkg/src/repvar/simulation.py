"""Monte Carlo harness for the distributional claims behind the estimators.

The model draws every stratum as two unit-weight observations
y ~ Normal(mean, sigma_h**2), so the contrast d_h is Normal(0, 2 sigma_h**2)
and independent of the total.  Four checks live here:

- interval coverage of the true total under several degrees-of-freedom rules,
- the chi-squared moment identity Var(d**2) = 2 Var(d)**2,
- the covariance structure of brr replicate deviations,
- calibration of the corrected effective-df estimate under equal variances.

Reproducibility: every repetition gets its own counter-based RNG keyed by
(seed, rep_index); the chi-squared check keys by (seed, stratum) on a
separate stream.  Any parallel partition of the repetitions therefore
reproduces the sequential result bit for bit; reports carry no wall-clock
fields for the same reason.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.stats
from numpy.random import Generator, Philox

from .design import StratifiedSample
from .dof import DofRule, t_quantile, variance_of_variance_normal
from .errors import ConfigError
from .estimators import CROSS_CHECK_RTOL, brr_deviation_covariance
from .replication import (
    BRR_FAMILY,
    SchemeKind,
    SchemeSpec,
    brr_weights,
    paired_jk_weights,
)

REPORT_SCHEMA_VERSION = 1

#: Philox counter streams: per-rep sample draws vs the chi-squared check.
SAMPLE_STREAM = 0
CHI2_STREAM = 1


def _rng(seed: int, key: int, stream: int) -> Generator:
    bits = Philox(
        key=np.array([seed, key], dtype=np.uint64),
        counter=np.array([0, 0, 0, stream], dtype=np.uint64),
    )
    return Generator(bits)


class ProfileKind(str, Enum):
    EQUAL = "equal"
    LINEAR = "linear"
    ONE_DOMINANT = "one-dominant"
    CUSTOM = "custom"


def _positive(value, path: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected a number, got {value!r}") from None
    if not (np.isfinite(v) and v > 0):
        raise ConfigError(f"{path}: must be finite and > 0, got {value!r}")
    return v


@dataclass(frozen=True)
class SigmaProfile:
    """Per-stratum standard deviations in a form independent of H.

    equal(s) gives every stratum s; linear(a, b) spaces them from a to b;
    one_dominant(r) gives the first stratum r and every other stratum 1;
    custom(list) pins them explicitly (length must match H at resolve time).
    """

    kind: ProfileKind
    sigma: float | None = None
    sigma_min: float | None = None
    sigma_max: float | None = None
    ratio: float | None = None
    sigmas: tuple[float, ...] | None = None

    def __post_init__(self):
        kind = ProfileKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ProfileKind.EQUAL:
            object.__setattr__(self, "sigma", _positive(self.sigma, "sigma_profile.sigma"))
        elif kind is ProfileKind.LINEAR:
            lo = _positive(self.sigma_min, "sigma_profile.sigma_min")
            hi = _positive(self.sigma_max, "sigma_profile.sigma_max")
            if lo > hi:
                raise ConfigError("sigma_profile.sigma_min: must not exceed sigma_max")
            object.__setattr__(self, "sigma_min", lo)
            object.__setattr__(self, "sigma_max", hi)
        elif kind is ProfileKind.ONE_DOMINANT:
            object.__setattr__(self, "ratio", _positive(self.ratio, "sigma_profile.ratio"))
        else:
            if not self.sigmas:
                raise ConfigError("sigma_profile.sigmas: must be a nonempty list")
            vals = tuple(
                _positive(s, f"sigma_profile.sigmas[{i}]") for i, s in enumerate(self.sigmas)
            )
            object.__setattr__(self, "sigmas", vals)

    @classmethod
    def equal(cls, sigma: float = 1.0) -> "SigmaProfile":
        return cls(ProfileKind.EQUAL, sigma=sigma)

    @classmethod
    def linear(cls, sigma_min: float, sigma_max: float) -> "SigmaProfile":
        return cls(ProfileKind.LINEAR, sigma_min=sigma_min, sigma_max=sigma_max)

    @classmethod
    def one_dominant(cls, ratio: float) -> "SigmaProfile":
        return cls(ProfileKind.ONE_DOMINANT, ratio=ratio)

    @classmethod
    def custom(cls, sigmas) -> "SigmaProfile":
        return cls(ProfileKind.CUSTOM, sigmas=tuple(sigmas))

    def resolve(self, n_strata: int) -> np.ndarray:
        """Concrete sigma vector of length n_strata."""
        if self.kind is ProfileKind.EQUAL:
            return np.full(n_strata, self.sigma)
        if self.kind is ProfileKind.LINEAR:
            return np.linspace(self.sigma_min, self.sigma_max, n_strata)
        if self.kind is ProfileKind.ONE_DOMINANT:
            out = np.ones(n_strata)
            out[0] = self.ratio
            return out
        if len(self.sigmas) != n_strata:
            raise ConfigError(
                f"sigma_profile.sigmas: length {len(self.sigmas)} does not match n_strata={n_strata}"
            )
        return np.array(self.sigmas)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.kind is ProfileKind.EQUAL:
            out["sigma"] = self.sigma
        elif self.kind is ProfileKind.LINEAR:
            out["sigma_min"] = self.sigma_min
            out["sigma_max"] = self.sigma_max
        elif self.kind is ProfileKind.ONE_DOMINANT:
            out["ratio"] = self.ratio
        else:
            out["sigmas"] = list(self.sigmas)
        return out

    @classmethod
    def from_dict(cls, data) -> "SigmaProfile":
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigError("sigma_profile: expected an object with a 'kind' field")
        try:
            kind = ProfileKind(data["kind"])
        except ValueError:
            choices = ", ".join(k.value for k in ProfileKind)
            raise ConfigError(
                f"sigma_profile.kind: unknown kind {data['kind']!r}; choose one of {choices}"
            ) from None
        allowed = {
            ProfileKind.EQUAL: {"sigma"},
            ProfileKind.LINEAR: {"sigma_min", "sigma_max"},
            ProfileKind.ONE_DOMINANT: {"ratio"},
            ProfileKind.CUSTOM: {"sigmas"},
        }[kind]
        extra = set(data) - allowed - {"kind"}
        if extra:
            raise ConfigError(f"sigma_profile.{sorted(extra)[0]}: not a field of kind {kind.value!r}")
        kwargs = {k: data[k] for k in allowed if k in data}
        if kind is ProfileKind.CUSTOM and "sigmas" in kwargs:
            kwargs["sigmas"] = tuple(kwargs["sigmas"])
        missing = allowed - set(kwargs)
        if missing:
            raise ConfigError(f"sigma_profile.{sorted(missing)[0]}: required for kind {kind.value!r}")
        return cls(kind, **kwargs)


_DEFAULT_RULES = (DofRule.CORRECTED, DofRule.NAIVE, DofRule.FIXED_H, DofRule.NORMAL)


@dataclass(frozen=True)
class SimulationConfig:
    """Everything one Monte Carlo run depends on; hashable and serializable."""

    n_strata: int
    sigma_profile: SigmaProfile
    n_reps: int
    level: float = 0.95
    seed: int = 0
    mean: float = 0.0
    scheme: SchemeSpec = field(default_factory=lambda: SchemeSpec(SchemeKind.BRR))
    dof_rules: tuple[DofRule, ...] = _DEFAULT_RULES
    chi2_draws: int | None = None

    def __post_init__(self):
        h = int(self.n_strata)
        if h < 1:
            raise ConfigError(f"n_strata: must be >= 1, got {self.n_strata!r}")
        object.__setattr__(self, "n_strata", h)
        n = int(self.n_reps)
        if n < 100:
            raise ConfigError(f"n_reps: must be >= 100, got {self.n_reps!r}")
        object.__setattr__(self, "n_reps", n)
        level = float(self.level)
        if not 0.0 < level < 1.0:
            raise ConfigError(f"level: must be in (0, 1), got {self.level!r}")
        object.__setattr__(self, "level", level)
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed: must fit in 64 unsigned bits, got {self.seed!r}")
        object.__setattr__(self, "seed", seed)
        mean = float(self.mean)
        if not np.isfinite(mean):
            raise ConfigError(f"mean: must be finite, got {self.mean!r}")
        object.__setattr__(self, "mean", mean)
        rules = tuple(DofRule(r) for r in self.dof_rules)
        if not rules:
            raise ConfigError("dof_rules: at least one rule required")
        if len(set(rules)) != len(rules):
            raise ConfigError("dof_rules: duplicate rules")
        object.__setattr__(self, "dof_rules", rules)
        if self.chi2_draws is not None:
            c = int(self.chi2_draws)
            if c < 100:
                raise ConfigError(f"chi2_draws: must be >= 100, got {self.chi2_draws!r}")
            object.__setattr__(self, "chi2_draws", c)
        self.sigma_profile.resolve(h)

    def to_dict(self) -> dict:
        return {
            "n_strata": self.n_strata,
            "sigma_profile": self.sigma_profile.to_dict(),
            "n_reps": self.n_reps,
            "level": self.level,
            "seed": self.seed,
            "mean": self.mean,
            "scheme": self.scheme.to_dict(),
            "dof_rules": [r.value for r in self.dof_rules],
            "chi2_draws": self.chi2_draws,
        }

    @classmethod
    def from_dict(cls, data) -> "SimulationConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: expected a JSON object")
        known = {
            "n_strata",
            "sigma_profile",
            "n_reps",
            "level",
            "seed",
            "mean",
            "scheme",
            "dof_rules",
            "chi2_draws",
        }
        extra = set(data) - known
        if extra:
            raise ConfigError(f"{sorted(extra)[0]}: unknown config field")
        for req in ("n_strata", "sigma_profile", "n_reps"):
            if req not in data:
                raise ConfigError(f"{req}: required field missing")
        profile = SigmaProfile.from_dict(data["sigma_profile"])
        kwargs: dict = {}
        if "scheme" in data:
            try:
                kwargs["scheme"] = SchemeSpec.from_dict(data["scheme"])
            except Exception as exc:
                raise ConfigError(f"scheme: {exc}") from None
        if "dof_rules" in data:
            try:
                kwargs["dof_rules"] = tuple(DofRule(r) for r in data["dof_rules"])
            except ValueError as exc:
                raise ConfigError(f"dof_rules: {exc}") from None
        for key in ("level", "seed", "mean", "chi2_draws"):
            if key in data and data[key] is not None:
                kwargs[key] = data[key]
        return cls(data["n_strata"], profile, data["n_reps"], **kwargs)


@dataclass(frozen=True)
class SimulationReport:
    """Deterministic Monte Carlo outcome; serialization is bit-stable."""

    config: dict
    truth: float
    coverage: dict | None
    vhat: dict | None
    cross_check: dict | None
    fragments: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "config": self.config,
            "truth": self.truth,
            "coverage": self.coverage,
            "vhat": self.vhat,
            "cross_check": self.cross_check,
            "fragments": self.fragments,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _draw_y(config: SimulationConfig, rep_index: int, sigmas: np.ndarray) -> np.ndarray:
    rng = _rng(config.seed, rep_index, SAMPLE_STREAM)
    return rng.normal(config.mean, sigmas[:, None], size=(config.n_strata, 2))


def draw_sample(config: SimulationConfig, rep_index: int) -> StratifiedSample:
    """The rep_index-th sample of the run: unit weights, normal draws."""
    sigmas = config.sigma_profile.resolve(config.n_strata)
    y = _draw_y(config, rep_index, sigmas)
    return StratifiedSample.from_arrays(np.ones_like(y), y)


def true_total(config: SimulationConfig) -> float:
    """Expectation of the full-sample total under the generator."""
    return 2.0 * config.n_strata * config.mean


def _replicate_table(config: SimulationConfig):
    """One weight table serves the whole run because weights are all one."""
    h = config.n_strata
    base = StratifiedSample.from_arrays(np.ones((h, 2)), np.zeros((h, 2)))
    if config.scheme.kind in BRR_FAMILY:
        return brr_weights(base, config.scheme)
    if config.scheme.kind is SchemeKind.JK1:
        raise ConfigError("scheme.kind: jk1 has no two-PSU stratified sampling model")
    return paired_jk_weights(base, config.scheme)


def _draw_all_y(config: SimulationConfig, sigmas: np.ndarray) -> np.ndarray:
    rows = np.empty((config.n_reps, 2 * config.n_strata))
    for rep in range(config.n_reps):
        rows[rep] = _draw_y(config, rep, sigmas).reshape(-1)
    return rows


def _scheme_scale(config: SimulationConfig, n_replicates: int) -> float:
    eps = config.scheme.epsilon
    if config.scheme.kind in BRR_FAMILY:
        return 1.0 / (eps**2 * n_replicates)
    return 1.0 / (2.0 * eps**2)


def run_coverage(config: SimulationConfig) -> SimulationReport:
    """Draw, estimate, and record interval coverage under each df rule.

    Degenerate repetitions (all contrasts zero) would have no interval; they
    occur with probability zero under the normal model but are counted and
    excluded defensively.
    """
    sigmas = config.sigma_profile.resolve(config.n_strata)
    table = _replicate_table(config)
    y = _draw_all_y(config, sigmas)
    report = _coverage_body(config, sigmas, table, y)
    return SimulationReport(
        config=config.to_dict(),
        truth=true_total(config),
        coverage=report["coverage"],
        vhat=report["vhat"],
        cross_check=report["cross_check"],
        fragments={},
    )


def _coverage_body(config, sigmas, table, y) -> dict:
    h = config.n_strata
    n = config.n_reps
    truth = true_total(config)
    totals = y.sum(axis=1)
    d = y[:, 0::2] - y[:, 1::2]
    deltas = table.weights - table.full_weights
    x = y @ deltas.T
    via_replicates = _scheme_scale(config, table.n_replicates) * np.sum(x**2, axis=1)
    d2 = d**2
    via_contrasts = d2.sum(axis=1)
    mismatch = np.abs(via_replicates - via_contrasts) / (1.0 + via_contrasts)
    s4 = (d2**2).sum(axis=1)
    usable = s4 > 0.0
    n_used = int(usable.sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        naive = np.where(usable, via_contrasts**2 / s4, np.nan)
    corrected = 3.0 * naive - 2.0
    clamped = np.maximum(corrected, 1.0)
    se = np.sqrt(via_contrasts)
    p_hi = 0.5 + config.level / 2.0
    err = np.abs(totals - truth)
    rules_out = {}
    for rule in config.dof_rules:
        if rule is DofRule.CORRECTED:
            q = scipy.stats.t.ppf(p_hi, clamped)
            dof_vals = clamped
        elif rule is DofRule.NAIVE:
            q = scipy.stats.t.ppf(p_hi, naive)
            dof_vals = naive
        elif rule is DofRule.FIXED_H:
            q = np.full(n, t_quantile(float(h), p_hi))
            dof_vals = np.full(n, float(h))
        else:
            q = np.full(n, t_quantile(np.inf, p_hi))
            dof_vals = None
        covered = usable & (err <= q * se)
        k = int(covered.sum())
        rate = k / n_used if n_used else float("nan")
        rules_out[rule.value] = {
            "covered": k,
            "n_used": n_used,
            "coverage": rate,
            "mc_se": float(np.sqrt(rate * (1.0 - rate) / n_used)) if n_used else None,
            "dof_mean": float(np.nanmean(dof_vals)) if dof_vals is not None else None,
            "dof_sd": float(np.nanstd(dof_vals, ddof=1)) if dof_vals is not None else None,
        }
    var_d = 2.0 * sigmas**2
    vhat = {
        "mean": float(via_contrasts.mean()),
        "mean_theory": float(var_d.sum()),
        "var": float(via_contrasts.var(ddof=1)),
        "var_theory": variance_of_variance_normal(var_d),
    }
    cross = {
        "max_rel_mismatch": float(mismatch.max()),
        "tolerance": CROSS_CHECK_RTOL,
    }
    return {
        "coverage": {"rules": rules_out, "n_degenerate": n - n_used},
        "vhat": vhat,
        "cross_check": cross,
    }


def check_chi2_approx(config: SimulationConfig, n_draws: int | None = None) -> dict:
    """Empirical Var(d**2) / Var(d)**2 per stratum; 2 under normality.

    Under the normal model d**2 is Var(d) times a one-df chi-squared draw,
    whose variance is twice its squared mean.  Draws use the chi-squared
    stream keyed by stratum, independent of the coverage repetitions.
    """
    sigmas = config.sigma_profile.resolve(config.n_strata)
    n = int(n_draws) if n_draws is not None else (config.chi2_draws or config.n_reps)
    strata = []
    worst = 0.0
    for h, sigma in enumerate(sigmas):
        rng = _rng(config.seed, h, CHI2_STREAM)
        y = rng.normal(config.mean, sigma, size=(n, 2))
        d = y[:, 0] - y[:, 1]
        var_d = float(d.var(ddof=1))
        var_d2 = float((d**2).var(ddof=1))
        ratio = var_d2 / var_d**2
        worst = max(worst, abs(ratio - 2.0))
        strata.append(
            {
                "sigma": float(sigma),
                "mean_d": float(d.mean()),
                "mean_d_se": float(np.sqrt(var_d / n)),
                "var_d": var_d,
                "var_d_theory": 2.0 * float(sigma) ** 2,
                "var_d2": var_d2,
                "var_d2_theory": 8.0 * float(sigma) ** 4,
                "ratio": ratio,
            }
        )
    return {"n_draws": n, "strata": strata, "max_ratio_error": worst}


def check_deviation_covariance(config: SimulationConfig) -> dict:
    """Empirical covariance of brr deviations against the closed form.

    The theoretical matrix uses the realized stratum variances, so the only
    noise left in the comparison is the cross-stratum sample covariances;
    their variance has a closed form, giving an exact per-entry standard
    error instead of a generic large-sample approximation.
    """
    if config.scheme.kind not in BRR_FAMILY:
        raise ConfigError("scheme.kind: deviation covariance check needs a brr-family scheme")
    sigmas = config.sigma_profile.resolve(config.n_strata)
    table = _replicate_table(config)
    y = _draw_all_y(config, sigmas)
    d = y[:, 0::2] - y[:, 1::2]
    deltas = table.weights - table.full_weights
    x = y @ deltas.T
    emp = np.atleast_2d(np.cov(x.T, ddof=1))
    var_d = d.var(axis=0, ddof=1)
    eps = config.scheme.epsilon
    theory = eps**2 * np.asarray(brr_deviation_covariance(var_d, table.signs))
    a = np.asarray(table.signs, dtype=float)
    # Var of the (r, s) comparison: sum over stratum pairs h < k of
    # (a_rh a_sk + a_rk a_sh)^2 Var(d_h) Var(d_k) / n, scaled by eps^4.
    t = np.einsum("rh,sk->rshk", a, a) + np.einsum("rk,sh->rshk", a, a)
    full = np.einsum("rshk,h,k->rs", t**2, var_d, var_d)
    se = eps**2 * np.sqrt(np.maximum(full - 4.0 * np.sum(var_d**2), 0.0) / (2.0 * config.n_reps))
    scale = float(np.abs(theory).max()) + 1.0
    band = 4.0 * se + 1e-9 * scale
    diff = np.abs(emp - theory)
    return {
        "n_reps": config.n_reps,
        "empirical": emp.tolist(),
        "theory": theory.tolist(),
        "se": se.tolist(),
        "n_exceed_band": int(np.sum(diff > band)),
        "max_z": float(np.max(np.where(se > 0, diff / np.maximum(se, 1e-300), 0.0))),
    }


def check_dof_calibration(config: SimulationConfig) -> dict:
    """Mean of the corrected df estimate under equal variances.

    The corrected estimator is calibrated so its mean sits near H (its
    sampling mean under normality is slightly above H; the acceptance band
    is pinned by an independent brute-force run, not assumed).
    """
    if config.sigma_profile.kind is not ProfileKind.EQUAL:
        raise ConfigError("sigma_profile.kind: df calibration is defined for the equal profile")
    sigmas = config.sigma_profile.resolve(config.n_strata)
    y = _draw_all_y(config, sigmas)
    d2 = (y[:, 0::2] - y[:, 1::2]) ** 2
    s2 = d2.sum(axis=1)
    s4 = (d2**2).sum(axis=1)
    usable = s4 > 0.0
    naive = s2[usable] ** 2 / s4[usable]
    corrected = 3.0 * naive - 2.0
    n = naive.size
    out = {
        "h": config.n_strata,
        "n_reps": config.n_reps,
        "n_degenerate": int(config.n_reps - n),
        "naive_mean": float(naive.mean()),
        "naive_sd": float(naive.std(ddof=1)) if n > 1 else 0.0,
        "corrected_mean": float(corrected.mean()),
        "corrected_sd": float(corrected.std(ddof=1)) if n > 1 else 0.0,
    }
    out["corrected_mean_se"] = out["corrected_sd"] / np.sqrt(n) if n else None
    out["ordering_ok"] = bool(out["naive_mean"] <= out["corrected_mean"])
    return out


_CHECKS = {
    "coverage": None,
    "chi2": check_chi2_approx,
    "deviation-covariance": check_deviation_covariance,
    "dof-calibration": check_dof_calibration,
}


def run_simulation(config: SimulationConfig, checks=("coverage",)) -> SimulationReport:
    """Assemble a report from any subset of the checks.

    ``checks`` names come from: coverage, chi2, deviation-covariance,
    dof-calibration.
    """
    checks = tuple(checks)
    unknown = [c for c in checks if c not in _CHECKS]
    if unknown:
        raise ConfigError(f"checks: unknown check {unknown[0]!r}; choose from {sorted(_CHECKS)}")
    if not checks:
        raise ConfigError("checks: at least one check required")
    coverage = vhat = cross = None
    if "coverage" in checks:
        body = run_coverage(config)
        coverage, vhat, cross = body.coverage, body.vhat, body.cross_check
    fragments = {name: _CHECKS[name](config) for name in checks if name != "coverage"}
    return SimulationReport(
        config=config.to_dict(),
        truth=true_total(config),
        coverage=coverage,
        vhat=vhat,
        cross_check=cross,
        fragments=fragments,
    )
