"""Small-scale runs of every experiment."""

from typing import Any

import numpy as np
import pandas as pd
import pytest

from screenot.experiments import ExperimentConfig, build_config, run_experiment
from screenot.experiments.runner import PLUGIN_METHOD, log_log_slope, theta_grid

METHODS = {PLUGIN_METHOD, "zero", "winsorize", "impute"}


def small_config(experiment: str, **overrides: Any) -> ExperimentConfig:
    data = {
        "experiment": experiment,
        "p_list": [40],
        "replicates": 2,
        "k": 3,
        "reference_p": 100,
        "signal": {"spikes": [4.0, 2.0]},
    } | overrides
    return build_config(data)


def test_theta_grid_hits_every_rank() -> None:
    grid = theta_grid(np.array([3.0, 2.0, 2.0, 1.0]))

    np.testing.assert_allclose(grid, [3.3, 2.5, 1.5, 0.5])


def test_log_log_slope() -> None:
    ps = np.array([100.0, 400.0, 1600.0])

    assert log_log_slope(ps, 1.0 / np.sqrt(ps)) == pytest.approx(-0.5)
    assert np.isnan(log_log_slope(ps, np.array([np.nan, 0.0, 1.0])))


def test_oracle_attainment() -> None:
    result = run_experiment(small_config("OracleAttainment"))

    rows, summary = result.rows, result.summary
    assert len(rows) == 2 * len(METHODS)
    assert set(rows["method"]) == METHODS
    assert (rows["n"] == 80).all()
    assert (rows["regret"] >= 1.0 - 1e-12).all()
    assert rows["oracle_rank"].between(0, 40).all()
    assert list(summary.columns) == ["p", "method", "attainment", "mean_regret", "replicates"]
    assert (summary["replicates"] == 2).all()
    assert summary["attainment"].between(0.0, 1.0).all()


def test_runs_are_deterministic() -> None:
    config = small_config("OracleAttainment", seed=5)

    first = run_experiment(config)
    second = run_experiment(config)

    pd.testing.assert_frame_equal(first.rows, second.rows)
    pd.testing.assert_frame_equal(first.summary, second.summary)


def test_results_do_not_depend_on_workers() -> None:
    serial = run_experiment(small_config("OracleAttainment", p_list=[30, 40]))
    parallel = run_experiment(small_config("OracleAttainment", p_list=[30, 40], jobs=2))

    pd.testing.assert_frame_equal(serial.rows, parallel.rows)


def test_seed_changes_the_draw() -> None:
    first = run_experiment(small_config("OracleAttainment", seed=1))
    second = run_experiment(small_config("OracleAttainment", seed=2))

    assert not np.array_equal(first.rows["oracle_se"], second.rows["oracle_se"])


def test_regret_sweeps_spike_strength() -> None:
    result = run_experiment(small_config("Regret", x_grid=[0.5, 3.0], replicates=1))

    assert sorted(set(result.rows["x"])) == [0.5, 3.0]
    assert len(result.rows) == 2 * len(METHODS)
    assert list(result.summary.columns) == ["p", "x", "method", "mean_regret", "attainment", "replicates"]


def test_convergence_rate() -> None:
    result = run_experiment(small_config("ConvergenceRate", p_list=[40, 80]))

    assert set(result.rows["method"]) == {"zero", "winsorize", "impute"}
    assert (result.rows["rel_error"] >= 0).all()
    assert list(result.summary.columns) == ["method", "p", "median_rel_error", "mean_rel_error", "slope"]
    assert result.summary.groupby("method")["slope"].nunique().eq(1).all()


def test_hist() -> None:
    result = run_experiment(small_config("Hist", p_list=[50], bins=10))

    assert len(result.rows) == 10
    assert result.rows["count"].sum() == 50
    summary = result.summary.iloc[0]
    assert summary["n"] == 100
    assert summary["threshold"] > summary["bulk_edge"]
    assert summary["reference_threshold"] == result.reference.threshold


def test_r0_vs_r1() -> None:
    result = run_experiment(small_config("R0vsR1", x_grid=[0.5, 3.0]))

    rows = result.rows
    assert rows["R0"].tolist() == [0.25, 9.0]
    assert (rows["R1_empirical"] > 0).all()
    assert rows["x_star"].nunique() == 1
    assert result.summary["x_star"].iloc[0] == result.reference.x_star


def test_se_vs_ase() -> None:
    result = run_experiment(small_config("SEvsASE", replicates=1))

    # one threshold per realizable rank
    assert len(result.rows) == 41
    summary = result.summary.iloc[0]
    assert summary["oracle_se"] <= summary["se_at_threshold"]
    assert summary["signal_energy"] == pytest.approx(20.0)
    assert {"theta_zero", "theta_winsorize", "theta_impute"} <= set(result.summary.columns)


def test_progress_is_reported() -> None:
    calls: list[tuple[int, int]] = []

    run_experiment(small_config("OracleAttainment"), progress=lambda done, total: calls.append((done, total)))

    assert calls[-1] == (2, 2)
    assert [done for done, _ in calls] == [1, 2]


def test_failing_strategy_yields_missing_values() -> None:
    # impute needs 2k + 1 <= p
    result = run_experiment(small_config("OracleAttainment", k=25))

    impute = result.rows[result.rows["method"] == "impute"]
    assert impute["theta"].isna().all()
    assert (impute["retained_rank"] == -1).all()
    assert result.rows[result.rows["method"] == "zero"]["theta"].notna().all()


@pytest.mark.slow
def test_se_tracks_ase_on_white_noise() -> None:
    result = run_experiment(build_config({"experiment": "SEvsASE", "replicates": 1, "strategies": ["impute"]}))

    summary = result.summary.iloc[0]
    assert summary["signal_energy"] == pytest.approx(0.25 + 1.0 + 1.69 + 6.25 + 27.04)
    assert summary["max_gap"] <= 0.15 * summary["signal_energy"]


@pytest.mark.slow
def test_impute_threshold_converges_on_mixture_noise() -> None:
    config = build_config(
        {
            "experiment": "ConvergenceRate",
            "noise": {"kind": "Mix2", "gamma": 0.5},
            "strategies": ["impute"],
            "k": 20,
            "jobs": 4,
        }
    )

    summary = run_experiment(config).summary

    errors = summary.sort_values("p")["median_rel_error"].to_numpy()
    assert list(summary.sort_values("p")["p"]) == [250, 500, 1000, 2000]
    assert np.all(np.diff(errors) < 0)
    assert -1.5 <= summary["slope"].iloc[0] <= -0.5
