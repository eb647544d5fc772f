#!/usr/bin/env python3
"""Pin Monte Carlo reference targets for the test suite.

Brute-force oracle, deliberately independent of the repvar package: raw
numpy draws of the stratum contrasts, no shared code paths.  Run once
before the library is touched; the resulting targets are frozen in
tests/data/oracle_targets.json and the test suite compares library output
against them at 4-standard-error bands.

Model: every stratum holds two unit-weight observations y ~ N(0, sigma_h^2),
so the contrast d_h = y_h1 - y_h2 ~ N(0, 2 sigma_h^2) and the total
T = sum_h (y_h1 + y_h2) ~ N(0, 2 sum sigma_h^2), independent of the d_h.

Usage: python3 scripts/pin_oracles.py [--quick]
"""

import argparse
import json
from pathlib import Path

import numpy as np
from scipy import stats

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "oracle_targets.json"

ORACLE_SEEDS = (9001, 9002, 9003)
CHUNK = 200_000


def _dof_stats(d2):
    """Naive and corrected effective-df estimates from squared contrasts."""
    s2 = d2.sum(axis=1)
    s4 = (d2 * d2).sum(axis=1)
    naive = s2 * s2 / s4
    corrected = 3.0 * naive - 2.0
    return naive, corrected


def _draw_d2(rng, n, sigmas):
    d = rng.normal(0.0, np.sqrt(2.0) * sigmas, size=(n, sigmas.size))
    return d * d


def pin_dof_calibration(n_per_seed):
    """Mean of the corrected df estimate, equal variances, H=10."""
    sigmas = np.ones(10)
    naive_means, corr_means, corr_sds = [], [], []
    for seed in ORACLE_SEEDS:
        rng = np.random.default_rng(seed)
        naive_acc, corr_acc = [], []
        done = 0
        while done < n_per_seed:
            n = min(CHUNK, n_per_seed - done)
            naive, corrected = _dof_stats(_draw_d2(rng, n, sigmas))
            naive_acc.append(naive)
            corr_acc.append(corrected)
            done += n
        naive_all = np.concatenate(naive_acc)
        corr_all = np.concatenate(corr_acc)
        naive_means.append(naive_all.mean())
        corr_means.append(corr_all.mean())
        corr_sds.append(corr_all.std(ddof=1))
    n_total = n_per_seed * len(ORACLE_SEEDS)
    corr_mean = float(np.mean(corr_means))
    corr_sd = float(np.mean(corr_sds))
    oracle_se = corr_sd / np.sqrt(n_total)
    # band half-width for a 20_000-rep library run: 4 SE of that run plus
    # 4 SE of the oracle estimate itself
    check_reps = 20_000
    band = 4.0 * corr_sd / np.sqrt(check_reps) + 4.0 * oracle_se
    return {
        "h": 10,
        "sigma": 1.0,
        "check_reps": check_reps,
        "naive_mean": float(np.mean(naive_means)),
        "corrected_mean": corr_mean,
        "corrected_sd": corr_sd,
        "oracle_se": float(oracle_se),
        "band_half_width": float(band),
        "per_seed_corrected_means": [float(m) for m in corr_means],
    }


def pin_coverage(sigmas, level, n_per_seed, check_reps, rules):
    """Interval coverage of the true total (zero) under each df rule."""
    sigmas = np.asarray(sigmas, dtype=float)
    h = sigmas.size
    z = stats.norm.ppf(0.5 + level / 2.0)
    hits = {rule: [] for rule in rules}
    diff_rates = []
    for seed in ORACLE_SEEDS:
        rng = np.random.default_rng(seed)
        counts = {rule: 0 for rule in rules}
        n_t_not_z = 0
        done = 0
        while done < n_per_seed:
            n = min(CHUNK, n_per_seed - done)
            d2 = _draw_d2(rng, n, sigmas)
            total = rng.normal(0.0, np.sqrt(2.0 * (sigmas**2).sum()), size=n)
            se = np.sqrt(d2.sum(axis=1))
            _, corrected = _dof_stats(d2)
            cov = {}
            for rule in rules:
                if rule == "corrected":
                    q = stats.t.ppf(0.5 + level / 2.0, np.maximum(corrected, 1.0))
                elif rule == "fixed_h":
                    q = stats.t.ppf(0.5 + level / 2.0, h)
                elif rule == "normal":
                    q = z
                else:
                    raise ValueError(rule)
                cov[rule] = np.abs(total) <= q * se
                counts[rule] += int(cov[rule].sum())
            if "corrected" in cov and "normal" in cov:
                n_t_not_z += int((cov["corrected"] & ~cov["normal"]).sum())
            done += n
        for rule in rules:
            hits[rule].append(counts[rule] / n_per_seed)
        diff_rates.append(n_t_not_z / n_per_seed)
    n_total = n_per_seed * len(ORACLE_SEEDS)
    out = {"h": h, "sigmas": sigmas.tolist(), "level": level, "check_reps": check_reps}
    for rule in rules:
        p = float(np.mean(hits[rule]))
        se_check = np.sqrt(p * (1.0 - p) / check_reps)
        se_oracle = np.sqrt(p * (1.0 - p) / n_total)
        out[rule] = {
            "coverage": p,
            "band_half_width": float(4.0 * se_check + 4.0 * se_oracle),
            "per_seed": [float(v) for v in hits[rule]],
        }
    if "corrected" in rules and "normal" in rules:
        out["corrected_minus_normal"] = float(
            np.mean(hits["corrected"]) - np.mean(hits["normal"])
        )
        out["p_corrected_not_normal"] = float(np.mean(diff_rates))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true", help="10x fewer reps (smoke only)")
    args = ap.parse_args()
    n = 200_000 if args.quick else 2_000_000

    targets = {
        "oracle_seeds": list(ORACLE_SEEDS),
        "reps_per_seed": n,
        "dof_calibration_equal_h10": pin_dof_calibration(n),
        "coverage_one_dominant10_h10": pin_coverage(
            [10.0] + [1.0] * 9, 0.95, n, 10_000, ("corrected", "fixed_h", "normal")
        ),
        "coverage_equal_h30": pin_coverage(
            [1.0] * 30, 0.95, n, 10_000, ("corrected",)
        ),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(targets, indent=2) + "\n")
    print(f"wrote {OUT}")
    print(json.dumps(targets, indent=2))


if __name__ == "__main__":
    main()
