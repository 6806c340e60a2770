import json

import pandas as pd
import pytest
from click.testing import CliRunner

from experiments import registry
from main import cli

SMALL_THT = {"eps": 0.1, "eta_star": 6.0, "K": 50, "N": 55, "window": 2, "L": 3}
SENSOR_THT = {"eps": 0.001, "eta_star": 2.0, "K": 20, "N": 22, "window": 1, "L": 1}


def _write(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


def _run(config, out, *extra):
    return CliRunner().invoke(cli, ["run", config, "--out", str(out), *extra])


def _report(out):
    return json.loads((out / "diagnostics.json").read_text())


def test_mixture1d_run_is_reproducible(tmp_path):
    config = _write(tmp_path, {"kind": "mixture1d", "seed": 3, "iterations": 10, "chains": 2,
                               "tht": SMALL_THT, "hmc": {"eps": 0.2, "n_leapfrog": 10}})
    first = _run(config, tmp_path / "a")
    second = _run(config, tmp_path / "b")
    assert first.exit_code == 0, first.output
    assert second.exit_code == 0, second.output

    chains = pd.read_csv(tmp_path / "a" / "chains.csv")
    assert list(chains.columns) == ["arm", "chain", "iteration", "x0"]
    assert (chains.groupby(["arm", "chain"]).size() == 11).all()
    assert (tmp_path / "a" / "chains.csv").read_bytes() == (tmp_path / "b" / "chains.csv").read_bytes()

    report = _report(tmp_path / "a")
    assert report["seed"] == 3
    assert [arm["name"] for arm in report["arms"]] == ["tht", "hmc"]
    assert (tmp_path / "a" / "plot.gp").exists()


def test_seed_option_overrides_config(tmp_path):
    config = _write(tmp_path, {"kind": "mixture1d", "seed": 3, "iterations": 5, "chains": 2, "tht": SMALL_THT})
    result = _run(config, tmp_path / "out", "--seed", "11", "--iters", "4")
    assert result.exit_code == 0, result.output
    report = _report(tmp_path / "out")
    assert report["seed"] == 11
    assert report["iterations"] == 4


def test_negative_seed_is_config_error(tmp_path):
    config = _write(tmp_path, {"kind": "mixture1d", "iterations": 4, "chains": 2, "tht": SMALL_THT})
    result = _run(config, tmp_path / "out", "--seed", "-1")
    assert result.exit_code == 2
    assert not (tmp_path / "out").exists()


def test_negative_seed_in_config_is_config_error(tmp_path):
    config = _write(tmp_path, {"kind": "mixture1d", "seed": -4, "iterations": 4, "chains": 2, "tht": SMALL_THT})
    assert _run(config, tmp_path / "out").exit_code == 2


def test_trace_artifact(tmp_path):
    config = _write(tmp_path, {"kind": "mixture1d", "iterations": 4, "chains": 2, "trace": True, "tht": SMALL_THT})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    trace = pd.read_csv(tmp_path / "out" / "trace.csv")
    assert list(trace.columns) == ["step", "k", "eta", "delta_H", "xbar", "vbar"]
    assert trace["step"].iloc[0] == 0 and trace["delta_H"].iloc[0] == 0.0


def test_missing_field_is_config_error(tmp_path):
    config = _write(tmp_path, {"kind": "mixture1d", "tht": {"eta_star": 1.0, "K": 10, "N": 10}})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 2
    assert "eps" in result.output
    assert not (tmp_path / "out").exists()


def test_invalid_json_is_config_error(tmp_path):
    config = _write(tmp_path, "{\"kind\": \"mixture1d\",\n  iterations: 5}")
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 2
    assert "line 2" in result.output


def test_unknown_kind_is_config_error(tmp_path):
    result = _run(_write(tmp_path, {"kind": "banana"}), tmp_path / "out")
    assert result.exit_code == 2


def test_runtime_failure_removes_artifacts(tmp_path, monkeypatch):
    def failing(cfg, ctx):
        ctx.writer.write_text("partial.txt", "half done\n")
        raise RuntimeError("integrator exploded")

    monkeypatch.setitem(registry.RUNNERS, "mixture1d", failing)
    config = _write(tmp_path, {"kind": "mixture1d", "iterations": 5, "chains": 2})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 3
    assert "integrator exploded" in result.output
    assert not (tmp_path / "out").exists()


def test_dim_is_ignored_outside_mixture_hd(tmp_path):
    config = _write(tmp_path, {"kind": "mixture1d", "iterations": 4, "chains": 2, "tht": SMALL_THT})
    assert _run(config, tmp_path / "out", "--dim", "7").exit_code == 0


def test_mixture_hd_with_dim_override(tmp_path):
    config = _write(tmp_path, {"kind": "mixture_hd", "iterations": 4, "chains": 2, "tht": SMALL_THT})
    result = _run(config, tmp_path / "out", "--dim", "5")
    assert result.exit_code == 0, result.output
    report = _report(tmp_path / "out")
    assert report["extras"]["dim"] == 5
    chains = pd.read_csv(tmp_path / "out" / "chains.csv")
    assert list(chains.columns) == ["arm", "chain", "iteration", "proj_mean_axis", "proj_orthogonal"]


def test_sensor_run(tmp_path):
    config = _write(tmp_path, {"kind": "sensor", "iterations": 5, "chains": 2, "burn_in": 0,
                               "arms": ["tht"], "tht": SENSOR_THT})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    arm = _report(tmp_path / "out")["arms"][0]
    assert arm["rhat_variables"] == 16
    assert "s1_x" in arm["rhat"] and "s8_y" in arm["rhat"]


def test_sensor_dataset_file_errors(tmp_path):
    config = _write(tmp_path, {"kind": "sensor", "iterations": 5, "chains": 2,
                               "dataset": str(tmp_path / "missing.json"), "tht": SENSOR_THT})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 2
    assert not (tmp_path / "out").exists()


def test_sensor_gibbs_run(tmp_path):
    config = _write(tmp_path, {"kind": "sensor_gibbs", "iterations": 5, "chains": 2, "burn_in": 0,
                               "tht": SENSOR_THT, "hmc": {"eps": 0.001, "n_leapfrog": 5},
                               "hyper": {"eps": 0.02, "n_leapfrog": 5}})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    report = _report(tmp_path / "out")
    assert [arm["rhat_variables"] for arm in report["arms"]] == [18, 18]
    # ceil(5 * (22 + 10) / (5 + 10))
    assert report["extras"]["sweeps"] == {"tht": 5, "hmc": 11}
    assert report["extras"]["tht_posterior_mean_R"] > 0


def test_gap_bridge_run(tmp_path):
    config = _write(tmp_path, {"kind": "gap_bridge", "iterations": 20, "chains": 2})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    extras = _report(tmp_path / "out")["extras"]
    assert extras["draws_in_gap"] >= 0
    assert len(extras["component_truth"]) == 2
    assert 0.0 <= extras["filter_survival"] <= 1.0
    assert extras["start_components"] == [0, 1]
    assert len(extras["chain_component_fractions"]) == 2


def test_gap_bridge_rejects_start_in_gap(tmp_path):
    result = _run(_write(tmp_path, {"kind": "gap_bridge", "init": 0.0}), tmp_path / "out")
    assert result.exit_code == 2


@pytest.mark.parametrize("gamma", [2.0])
def test_power_pilot_run(tmp_path, gamma):
    config = _write(tmp_path, {"kind": "power_pilot", "iterations": 3, "chains": 2, "gamma": gamma,
                               "K_pilot": 2000, "a_grid": [0.4, 0.5, 0.6]})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    report = _report(tmp_path / "out")
    assert report["tuning"]["a_hat"] == 0.5
    trace = pd.read_csv(tmp_path / "out" / "trace.csv")
    assert sorted(trace["a"].unique()) == [0.4, 0.5, 0.6]


@pytest.mark.slow
def test_gap_bridge_defaults_recover_component_masses(tmp_path):
    config = _write(tmp_path, {"kind": "gap_bridge", "seed": 7})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    extras = _report(tmp_path / "out")["extras"]
    assert extras["filter_survival"] >= 0.999
    assert abs(extras["component_fractions"][1] - extras["component_truth"][1]) <= 0.1
    assert {label for visits in extras["modes_visited"] for label in visits} == {0, 1}
    assert any(len(visits) == 2 for visits in extras["modes_visited"])


@pytest.mark.slow
def test_mixture_hd_defaults_accept_and_hop(tmp_path):
    config = _write(tmp_path, {"kind": "mixture_hd", "seed": 3})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    report = _report(tmp_path / "out")
    assert report["extras"]["accepted_moves"][0] >= 50
    assert report["arms"][0]["hop_counts"][0] >= 15


@pytest.mark.slow
def test_sensor_tht_hops_and_hmc_stays(tmp_path):
    config = _write(tmp_path, {"kind": "sensor", "seed": 5, "chains": 4, "iterations": 1000, "burn_in": 30})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    report = _report(tmp_path / "out")
    tht, hmc = report["arms"]
    assert all(h >= 3 for h in tht["hop_counts"]), tht["hop_counts"]
    assert report["extras"]["tht_modes_visited"] == [[0, 1]] * 4
    assert hmc["hop_counts"] == [0, 0, 0, 0]


@pytest.mark.slow
def test_sensor_gibbs_tht_converges_where_hmc_does_not(tmp_path):
    config = _write(tmp_path, {"kind": "sensor_gibbs", "seed": 5, "chains": 6, "iterations": 1000})
    result = _run(config, tmp_path / "out")
    assert result.exit_code == 0, result.output
    report = _report(tmp_path / "out")
    tht, hmc = report["arms"]
    assert tht["rhat_variables"] == 18
    assert max(tht["rhat"].values()) < 1.2
    assert max(hmc["rhat"].values()) > 1.3
    assert abs(report["extras"]["tht_posterior_mean_R"] - 0.3) <= 0.1
    assert abs(report["extras"]["tht_posterior_mean_sigma_e"] - 0.02) <= 0.01
