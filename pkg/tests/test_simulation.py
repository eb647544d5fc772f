import json

import numpy as np
import pytest

from repvar import (
    ConfigError,
    DofRule,
    ProfileKind,
    SchemeKind,
    SchemeSpec,
    SigmaProfile,
    SimulationConfig,
    check_chi2_approx,
    check_deviation_covariance,
    check_dof_calibration,
    draw_sample,
    run_coverage,
    run_simulation,
    true_total,
)


def _config(**overrides):
    base = dict(
        n_strata=5,
        sigma_profile=SigmaProfile.equal(1.0),
        n_reps=400,
        seed=7,
    )
    base.update(overrides)
    return SimulationConfig(**base)


class TestSigmaProfile:
    def test_equal_resolve(self):
        assert SigmaProfile.equal(2.5).resolve(4).tolist() == [2.5] * 4

    def test_linear_resolve(self):
        sig = SigmaProfile.linear(1.0, 3.0).resolve(5)
        assert sig.tolist() == [1.0, 1.5, 2.0, 2.5, 3.0]

    def test_one_dominant_resolve(self):
        assert SigmaProfile.one_dominant(10.0).resolve(3).tolist() == [10.0, 1.0, 1.0]

    def test_custom_resolve(self):
        assert SigmaProfile.custom([1.0, 4.0]).resolve(2).tolist() == [1.0, 4.0]
        with pytest.raises(ConfigError, match="does not match"):
            SigmaProfile.custom([1.0, 4.0]).resolve(3)

    def test_validation(self):
        with pytest.raises(ConfigError):
            SigmaProfile.equal(0.0)
        with pytest.raises(ConfigError):
            SigmaProfile.equal(float("nan"))
        with pytest.raises(ConfigError, match="must not exceed"):
            SigmaProfile.linear(3.0, 1.0)
        with pytest.raises(ConfigError):
            SigmaProfile.one_dominant(-2.0)
        with pytest.raises(ConfigError):
            SigmaProfile.custom([])
        with pytest.raises(ConfigError):
            SigmaProfile.custom([1.0, 0.0])

    @pytest.mark.parametrize(
        "profile",
        [
            SigmaProfile.equal(1.5),
            SigmaProfile.linear(0.5, 2.0),
            SigmaProfile.one_dominant(8.0),
            SigmaProfile.custom([1.0, 2.0, 0.5]),
        ],
    )
    def test_dict_round_trip(self, profile):
        assert SigmaProfile.from_dict(profile.to_dict()) == profile

    def test_from_dict_rejects_bad_shapes(self):
        with pytest.raises(ConfigError, match="kind"):
            SigmaProfile.from_dict({"sigma": 1.0})
        with pytest.raises(ConfigError, match="unknown kind"):
            SigmaProfile.from_dict({"kind": "quadratic"})
        with pytest.raises(ConfigError, match="not a field"):
            SigmaProfile.from_dict({"kind": "equal", "sigma": 1.0, "ratio": 2.0})
        with pytest.raises(ConfigError, match="required"):
            SigmaProfile.from_dict({"kind": "linear", "sigma_min": 1.0})
        with pytest.raises(ConfigError, match="required"):
            SigmaProfile.from_dict({"kind": "equal"})


class TestSimulationConfig:
    def test_defaults(self):
        config = _config()
        assert config.level == 0.95
        assert config.mean == 0.0
        assert config.scheme == SchemeSpec(SchemeKind.BRR)
        assert config.dof_rules == (
            DofRule.CORRECTED,
            DofRule.NAIVE,
            DofRule.FIXED_H,
            DofRule.NORMAL,
        )

    def test_validation(self):
        with pytest.raises(ConfigError, match="n_strata"):
            _config(n_strata=0)
        with pytest.raises(ConfigError, match="n_reps"):
            _config(n_reps=99)
        with pytest.raises(ConfigError, match="level"):
            _config(level=1.0)
        with pytest.raises(ConfigError, match="seed"):
            _config(seed=-1)
        with pytest.raises(ConfigError, match="seed"):
            _config(seed=2**64)
        with pytest.raises(ConfigError, match="mean"):
            _config(mean=float("inf"))
        with pytest.raises(ConfigError, match="duplicate"):
            _config(dof_rules=(DofRule.NAIVE, DofRule.NAIVE))
        with pytest.raises(ConfigError, match="at least one"):
            _config(dof_rules=())
        with pytest.raises(ConfigError, match="chi2_draws"):
            _config(chi2_draws=10)
        with pytest.raises(ConfigError, match="does not match"):
            _config(sigma_profile=SigmaProfile.custom([1.0, 2.0]))

    def test_dict_round_trip(self):
        config = _config(
            sigma_profile=SigmaProfile.linear(1.0, 2.0),
            scheme=SchemeSpec(SchemeKind.FAY_BRR, 0.5),
            dof_rules=(DofRule.CORRECTED, DofRule.NORMAL),
            level=0.9,
            mean=3.0,
            chi2_draws=500,
        )
        assert SimulationConfig.from_dict(config.to_dict()) == config

    def test_from_dict_rejects_unknown_and_missing(self):
        good = _config().to_dict()
        with pytest.raises(ConfigError, match="unknown config field"):
            SimulationConfig.from_dict({**good, "bogus": 1})
        bad = dict(good)
        del bad["n_reps"]
        with pytest.raises(ConfigError, match="n_reps"):
            SimulationConfig.from_dict(bad)
        with pytest.raises(ConfigError, match="scheme"):
            SimulationConfig.from_dict({**good, "scheme": {"kind": "bogus"}})
        with pytest.raises(ConfigError):
            SimulationConfig.from_dict([1, 2, 3])


class TestDrawSample:
    def test_deterministic_per_rep(self):
        config = _config()
        a = draw_sample(config, 3)
        b = draw_sample(config, 3)
        assert np.array_equal(a.y_values, b.y_values)
        assert np.all(a.weights == 1.0)
        assert a.y_values.shape == (5, 2)

    def test_reps_and_seeds_differ(self):
        config = _config()
        a = draw_sample(config, 0).y_values
        assert not np.array_equal(a, draw_sample(config, 1).y_values)
        assert not np.array_equal(a, draw_sample(_config(seed=8), 0).y_values)

    def test_true_total(self):
        assert true_total(_config(mean=3.0)) == 30.0
        assert true_total(_config()) == 0.0


class TestRunCoverage:
    def test_report_shape_and_determinism(self):
        config = _config()
        report = run_coverage(config)
        again = run_coverage(config)
        assert report.to_json() == again.to_json()
        rules = report.coverage["rules"]
        assert set(rules) == {"corrected", "naive", "fixed-h", "normal"}
        for body in rules.values():
            assert body["n_used"] == config.n_reps
            assert 0.0 <= body["coverage"] <= 1.0
        assert report.coverage["n_degenerate"] == 0
        assert report.truth == 0.0
        parsed = json.loads(report.to_json())
        assert parsed["schema_version"] == 1

    def test_cross_check_within_tolerance(self):
        report = run_coverage(_config())
        assert report.cross_check["max_rel_mismatch"] <= 1e-10

    def test_vhat_moments_near_theory(self):
        config = _config(n_reps=2000)
        report = run_coverage(config)
        mean_band = 6.0 * np.sqrt(report.vhat["var_theory"] / config.n_reps)
        assert report.vhat["mean_theory"] == pytest.approx(10.0)
        assert abs(report.vhat["mean"] - report.vhat["mean_theory"]) < mean_band
        assert report.vhat["var"] == pytest.approx(report.vhat["var_theory"], rel=0.5)

    def test_coverage_identical_across_stratified_schemes(self):
        specs = [
            SchemeSpec(SchemeKind.BRR),
            SchemeSpec(SchemeKind.FAY_BRR, 0.5),
            SchemeSpec(SchemeKind.PAIRED_JK),
            SchemeSpec(SchemeKind.FAY_JK, 0.3),
        ]
        reports = [run_coverage(_config(scheme=spec)) for spec in specs]
        baseline = reports[0].coverage
        for report in reports[1:]:
            assert report.coverage == baseline
            assert report.cross_check["max_rel_mismatch"] <= 1e-10

    def test_normal_rule_never_beats_corrected(self):
        rules = run_coverage(_config(n_reps=1000)).coverage["rules"]
        assert rules["normal"]["covered"] <= rules["corrected"]["covered"]

    def test_jk1_rejected(self):
        with pytest.raises(ConfigError, match="jk1"):
            run_coverage(_config(scheme=SchemeSpec(SchemeKind.JK1)))


class TestChi2Check:
    def test_ratio_near_two(self):
        config = _config(n_strata=3, sigma_profile=SigmaProfile.linear(1.0, 2.0), n_reps=100)
        out = check_chi2_approx(config, n_draws=20000)
        assert out["n_draws"] == 20000
        assert out["max_ratio_error"] < 0.3
        for stratum in out["strata"]:
            assert stratum["var_d_theory"] == pytest.approx(2.0 * stratum["sigma"] ** 2)
            assert stratum["var_d2_theory"] == pytest.approx(8.0 * stratum["sigma"] ** 4)
            assert stratum["var_d"] == pytest.approx(stratum["var_d_theory"], rel=0.1)
            assert abs(stratum["mean_d"]) < 6.0 * stratum["mean_d_se"]

    def test_deterministic_and_uses_config_draws(self):
        config = _config(chi2_draws=500)
        assert check_chi2_approx(config) == check_chi2_approx(config)
        assert check_chi2_approx(config)["n_draws"] == 500


class TestDeviationCovariance:
    def test_within_band(self):
        config = _config(
            n_strata=3, sigma_profile=SigmaProfile.linear(1.0, 2.0), n_reps=3000
        )
        out = check_deviation_covariance(config)
        r = len(out["theory"])
        assert len(out["empirical"]) == r and len(out["empirical"][0]) == r
        assert out["n_exceed_band"] == 0
        diag_theory = np.diag(np.asarray(out["theory"]))
        assert diag_theory == pytest.approx(np.full(r, diag_theory[0]))

    def test_epsilon_scales_theory(self):
        base = _config(n_strata=2, n_reps=200)
        fay = _config(n_strata=2, n_reps=200, scheme=SchemeSpec(SchemeKind.FAY_BRR, 0.5))
        t1 = np.asarray(check_deviation_covariance(base)["theory"])
        t2 = np.asarray(check_deviation_covariance(fay)["theory"])
        assert t2 == pytest.approx(0.25 * t1)

    def test_needs_brr_family(self):
        with pytest.raises(ConfigError, match="brr"):
            check_deviation_covariance(_config(scheme=SchemeSpec(SchemeKind.PAIRED_JK)))


class TestDofCalibration:
    def test_equal_profile_summary(self):
        config = _config(n_strata=10, n_reps=2000, seed=11)
        out = check_dof_calibration(config)
        assert out["h"] == 10
        assert out["n_degenerate"] == 0
        assert out["ordering_ok"] is True
        assert 1.0 <= out["naive_mean"] <= 10.0
        assert 9.0 <= out["corrected_mean"] <= 13.0
        assert out["corrected_mean_se"] > 0.0

    def test_non_equal_profile_rejected(self):
        config = _config(sigma_profile=SigmaProfile.linear(1.0, 2.0))
        with pytest.raises(ConfigError, match="equal"):
            check_dof_calibration(config)


class TestRunSimulation:
    def test_check_selection(self):
        config = _config(n_reps=200, chi2_draws=200)
        full = run_simulation(config, ("coverage", "chi2", "dof-calibration"))
        assert full.coverage is not None
        assert set(full.fragments) == {"chi2", "dof-calibration"}
        partial = run_simulation(config, ("chi2",))
        assert partial.coverage is None and partial.vhat is None
        assert set(partial.fragments) == {"chi2"}

    def test_bad_checks_rejected(self):
        config = _config(n_reps=200)
        with pytest.raises(ConfigError, match="unknown check"):
            run_simulation(config, ("coverage", "typo"))
        with pytest.raises(ConfigError, match="at least one"):
            run_simulation(config, ())

    def test_json_stable_and_sorted(self):
        config = _config(n_reps=200)
        first = run_simulation(config, ("coverage",)).to_json()
        second = run_simulation(config, ("coverage",)).to_json()
        assert first == second
        assert first.endswith("\n")
        parsed = json.loads(first)
        assert list(parsed) == sorted(parsed)

    def test_profile_kind_exported(self):
        assert ProfileKind("one-dominant") is ProfileKind.ONE_DOMINANT
