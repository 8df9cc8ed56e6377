import csv
import json
import math

import numpy as np
import pytest

import afdrkit as ak
from afdrkit.sim import TRACE_HEADER, config_from_dict, config_to_dict


@pytest.fixture()
def short_cfg(paper_g, paper_k):
    return ak.ScenarioConfig(plant=paper_g, controller=paper_k,
                             duration=4.0, t_on=2.0)


class TestDisturbance:
    def test_sample_zero(self, short_cfg):
        d0 = ak.disturbance_sample(0, short_cfg)
        assert d0 == pytest.approx(0.9 * math.sin(0.4))

    def test_sample_with_noise(self, short_cfg):
        assert ak.disturbance_sample(0, short_cfg, noise=0.25) == pytest.approx(
            0.9 * math.sin(0.4) + 0.25)

    def test_long_run_std(self, short_cfg):
        d = np.array([ak.disturbance_sample(k, short_cfg)
                      for k in range(20000)])
        # independent sinusoids: sqrt((1.4^2 + 0.9^2) / 2)
        assert np.std(d) == pytest.approx(math.sqrt(1.385), rel=0.03)


class TestRunScenario:
    def test_pre_switch_output_is_sensitivity_response(self, short_cfg, inner_st):
        s, _ = inner_st
        res = ak.run_scenario(short_cfg)
        k_on = int(round(short_cfg.t_on / short_cfg.ts))
        expected = ak.simulate(s, res.d)[:k_on]
        np.testing.assert_allclose(res.y[:k_on], expected, atol=1e-8)
        np.testing.assert_allclose(res.w_hat[:k_on], res.y[:k_on], atol=1e-8)
        assert np.all(res.r[:k_on] == 0.0)
        assert np.all(res.theta_norm[:k_on] == 0.0)

    def test_beta_zero_keeps_loop_passive(self, short_cfg, inner_st):
        s, _ = inner_st
        res = ak.run_scenario(
            ak.ScenarioConfig(**{**vars(short_cfg), "beta": 0.0}))
        np.testing.assert_allclose(res.y, ak.simulate(s, res.d), atol=1e-8)
        assert np.all(res.r == 0.0)

    def test_huge_beta_matches_safety_off(self, short_cfg):
        on = ak.run_scenario(
            ak.ScenarioConfig(**{**vars(short_cfg), "beta": 1e9}))
        off = ak.run_scenario(ak.ScenarioConfig(
            **{**vars(short_cfg), "beta": None, "safety_enabled": False}))
        np.testing.assert_allclose(on.y, off.y, atol=1e-10)
        np.testing.assert_allclose(on.r, off.r, atol=1e-10)
        assert not on.saturated.any()

    def test_determinism(self, short_cfg):
        a = ak.run_scenario(short_cfg)
        b = ak.run_scenario(short_cfg)
        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.r, b.r)
        assert a.config_hash == b.config_hash

    def test_safety_bounds_hold_on_trajectory(self, short_cfg):
        res = ak.run_scenario(short_cfg)
        k_on = int(round(short_cfg.t_on / short_cfg.ts))
        h = short_cfg.fir_length
        beta = short_cfg.beta
        assert np.all(res.theta_norm <= beta + 1e-9)
        for k in range(k_on, res.t.size):
            window_max = np.max(np.abs(res.w_hat[max(0, k - h + 1):k + 1]))
            assert abs(res.r[k]) <= beta * window_max + 1e-9

    def test_adaptation_reduces_residual(self, paper_g, paper_k):
        res = ak.run_scenario(ak.ScenarioConfig(plant=paper_g, controller=paper_k))
        assert res.stable
        assert res.std_post < 0.6 * res.std_pre

    def test_paper_uncertainty_diverges_without_safety(self, paper_g, paper_k):
        cfg = ak.ScenarioConfig(plant=paper_g, controller=paper_k,
                                delta_system=ak.paper_delta(),
                                beta=None, safety_enabled=False)
        res = ak.run_scenario(cfg)
        assert not res.stable
        k_on = int(round(cfg.t_on / cfg.ts))
        assert res.diverged_at >= k_on
        assert math.isinf(res.std_post)

    def test_early_abort_truncates_traces(self, paper_g, paper_k):
        cfg = ak.ScenarioConfig(plant=paper_g, controller=paper_k,
                                duration=4.0, t_on=2.0,
                                instability_threshold=0.5)
        res = ak.run_scenario(cfg)
        assert not res.stable
        assert res.t.size == res.diverged_at + 1
        assert abs(res.y[-1]) > 0.5
        assert np.all(np.abs(res.y[:-1]) <= 0.5)

    def test_improper_plant_rejected(self, paper_k):
        plant = ak.static_gain([[1.0]], 0.01)
        with pytest.raises(ak.LtiError):
            ak.run_scenario(ak.ScenarioConfig(plant=plant, controller=paper_k))

    def test_config_validation(self, paper_g, paper_k):
        with pytest.raises(ValueError):
            ak.ScenarioConfig(plant=paper_g, controller=paper_k,
                              duration=5.0, t_on=6.0)
        with pytest.raises(ValueError):
            ak.ScenarioConfig(plant=paper_g, controller=paper_k, beta=None)


class TestWriters:
    def test_trace_csv_schema(self, short_cfg, tmp_path):
        res = ak.run_scenario(short_cfg)
        path = tmp_path / "trace.csv"
        ak.write_trace_csv(res, path)
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == TRACE_HEADER
        assert len(rows) - 1 == res.t.size
        k = 150
        row = rows[k + 1]
        assert int(row[0]) == k
        assert float(row[1]) == pytest.approx(res.t[k])
        assert float(row[4]) == pytest.approx(res.w_hat[k], rel=1e-8)
        assert float(row[7]) == pytest.approx(res.y[k], rel=1e-8)
        assert row[8] in ("0", "1")

    def test_summary_json(self, short_cfg, tmp_path):
        res = ak.run_scenario(short_cfg)
        path = tmp_path / "summary.json"
        ak.write_summary_json(res, path)
        obj = json.loads(path.read_text())
        assert set(obj) == {"std_pre", "std_post", "stable", "diverged_at",
                            "config_hash"}
        assert obj["std_post"] == pytest.approx(res.std_post)
        assert obj["stable"] is True
        assert obj["diverged_at"] is None

    def test_summary_json_diverged_run(self, paper_g, paper_k, tmp_path):
        res = ak.run_scenario(ak.ScenarioConfig(
            plant=paper_g, controller=paper_k, duration=4.0, t_on=2.0,
            instability_threshold=0.5))
        path = tmp_path / "summary.json"
        ak.write_summary_json(res, path)
        obj = json.loads(path.read_text())
        assert obj["std_post"] is None
        assert obj["stable"] is False
        assert obj["diverged_at"] == res.diverged_at


class TestConfigSerialization:
    def test_round_trip_preserves_hash(self, short_cfg):
        clone = config_from_dict(config_to_dict(short_cfg))
        assert ak.config_hash(clone) == ak.config_hash(short_cfg)

    def test_hash_sensitive_to_beta(self, short_cfg):
        other = ak.ScenarioConfig(**{**vars(short_cfg), "beta": 1.0})
        assert ak.config_hash(other) != ak.config_hash(short_cfg)


class TestMonteCarlo:
    def test_single_zero_uncertainty_matches_nominal(self, short_cfg):
        mc = ak.monte_carlo(short_cfg, n_runs=1, base_seed=0,
                            delta_bound=0.0, jobs=1)
        res = ak.run_scenario(short_cfg)
        assert mc.std_pre[0] == pytest.approx(res.std_pre)
        assert mc.std_post[0] == pytest.approx(res.std_post)
        assert mc.unstable_count == 0

    def test_small_batch_aggregate(self, short_cfg):
        mc = ak.monte_carlo(short_cfg, n_runs=4, base_seed=100,
                            delta_bound=3e-4, jobs=2)
        agg = mc.aggregate_dict()
        assert agg["runs"] == 4
        assert agg["unstable_count"] == mc.unstable_count
        assert len(mc.std_post) == 4
        if agg["std_post"]["mean"] is not None:
            assert agg["std_post"]["min"] <= agg["std_post"]["mean"] \
                <= agg["std_post"]["max"]

    def test_rejects_zero_runs(self, short_cfg):
        with pytest.raises(ValueError):
            ak.monte_carlo(short_cfg, n_runs=0, base_seed=0, delta_bound=0.0)
