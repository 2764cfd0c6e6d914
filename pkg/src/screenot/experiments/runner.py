"""Monte-Carlo experiment harness.

Every experiment turns an `ExperimentConfig` into two tables: per-instance ``rows`` and aggregated
``summary``. Instances are independent jobs seeded from ``(seed, p, replicate)``, so results do not depend
on the number of worker processes.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd

from ..core import screenot
from ..errors import ScreeNOTError
from ..matrix_lab import (
    denoise_report,
    hard_threshold_reconstruct,
    oracle,
    se_levels,
    se_loss,
    singular_values,
    svd,
)
from ..noise_models import SignalSpec, gen_noise, gen_signal, make_rng
from ..spectral import AtomicCDF, solve_threshold
from ..util._logging import TRACE
from .asymptotics import AsymptoticModel
from .config import ExperimentConfig, ExperimentKind
from .reference import ReferenceQuantities, plugin_model, plugin_reference

_logger = logging.getLogger(__name__)

PLUGIN_METHOD = "plugin"
SE_ASE_EDGE_MARGIN = 0.05

ProgressCallback = Callable[[int, int], None]
"""Called with ``(completed, total)`` instances."""


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    reference: ReferenceQuantities
    rows: pd.DataFrame
    summary: pd.DataFrame


@dataclass(frozen=True)
class _Task:
    p: int
    replicate: int
    x: float = math.nan


@dataclass(frozen=True)
class _Instance:
    X: np.ndarray
    Y: np.ndarray
    n: int
    p: int


def _instance(config: ExperimentConfig, task: _Task, signal: SignalSpec) -> _Instance:
    # one stream per (p, replicate, x); signal first, then noise
    key = (task.p, task.replicate) if math.isnan(task.x) else (task.p, task.replicate, round(task.x * 1e6))
    rng = make_rng(config.seed, spawn_key=key, algorithm=config.rng)
    n = config.rows(task.p)
    X = gen_signal(signal, n, task.p, rng)
    Z = gen_noise(config.noise, n, task.p, rng)
    return _Instance(X, X + Z, n, task.p)


def _adaptive_thresholds(config: ExperimentConfig, values: np.ndarray, n: int, p: int) -> dict[str, float]:
    thresholds: dict[str, float] = {}
    for strategy in config.strategies:
        try:
            thresholds[strategy.value] = screenot(values, n, p, config.k, strategy).theta_hat
        except ScreeNOTError as ex:
            _logger.warning("No %s threshold for p=%d: %s", strategy.value, p, ex)
            thresholds[strategy.value] = math.nan
    return thresholds


def _method_rows(config: ExperimentConfig, model: AsymptoticModel, task: _Task) -> list[dict[str, Any]]:
    signal = SignalSpec((task.x,)) if not math.isnan(task.x) else config.signal
    instance = _instance(config, task, signal)
    triple = svd(instance.Y)
    best = oracle(instance.X, triple)
    thresholds = {PLUGIN_METHOD: model.threshold, **_adaptive_thresholds(config, triple.s, instance.n, instance.p)}
    rows = []
    for method, theta in thresholds.items():
        row: dict[str, Any] = {"p": task.p, "n": instance.n, "replicate": task.replicate}
        if not math.isnan(task.x):
            row["x"] = task.x
        row |= {"method": method, "theta": theta, "oracle_se": best.se, "oracle_rank": best.rank}
        if math.isnan(theta):
            row |= {"retained_rank": -1, "se": math.nan, "attained": False, "regret": math.nan}
        else:
            report = denoise_report(instance.X, triple, theta, best)
            row |= {
                "retained_rank": int(np.count_nonzero(triple.s > theta)),
                "se": report.se_at_theta,
                "attained": report.attained_oracle,
                "regret": report.regret,
            }
        rows.append(row)
    return rows


def _convergence_rows(config: ExperimentConfig, model: AsymptoticModel, task: _Task) -> list[dict[str, Any]]:
    instance = _instance(config, task, config.signal)
    values = singular_values(instance.Y)
    target = model.threshold
    return [
        {
            "p": task.p,
            "n": instance.n,
            "replicate": task.replicate,
            "method": method,
            "theta": theta,
            "rel_error": abs(theta - target) / target,
        }
        for method, theta in _adaptive_thresholds(config, values, instance.n, instance.p).items()
    ]


def _run_task(config: ExperimentConfig, model: AsymptoticModel, task: _Task) -> list[dict[str, Any]]:
    _logger.log(TRACE, "Running %s instance p=%d replicate=%d x=%g", config.experiment, task.p, task.replicate, task.x)
    if config.experiment is ExperimentKind.CONVERGENCE_RATE:
        return _convergence_rows(config, model, task)
    return _method_rows(config, model, task)


def _run_tasks(
    config: ExperimentConfig,
    model: AsymptoticModel,
    tasks: list[_Task],
    progress: ProgressCallback | None,
) -> list[dict[str, Any]]:
    def collect(results: Iterator[list[dict[str, Any]]]) -> list[dict[str, Any]]:
        rows: list[dict[str, Any]] = []
        for done, task_rows in enumerate(results, start=1):
            rows.extend(task_rows)
            if progress is not None:
                progress(done, len(tasks))
        return rows

    if config.jobs == 1 or len(tasks) == 1:
        return collect(_run_task(config, model, task) for task in tasks)
    with ProcessPoolExecutor(max_workers=config.jobs) as executor:
        results = executor.map(_run_task, [config] * len(tasks), [model] * len(tasks), tasks, chunksize=4)
        return collect(results)


def _replicate_tasks(config: ExperimentConfig, xs: tuple[float, ...] = ()) -> list[_Task]:
    if xs:
        return [_Task(p, r, x) for p in config.p_list for x in xs for r in range(config.replicates)]
    return [_Task(p, r) for p in config.p_list for r in range(config.replicates)]


def _sorted(frame: pd.DataFrame, keys: list[str]) -> pd.DataFrame:
    keys = [key for key in keys if key in frame.columns]
    return frame.sort_values(keys, kind="stable").reset_index(drop=True)


def _hist(config: ExperimentConfig, model: AsymptoticModel, progress: ProgressCallback | None):
    rows, summary = [], []
    for done, p in enumerate(config.p_list, start=1):
        task = _Task(p, 0)
        instance = _instance(config, task, SignalSpec())
        values = singular_values(instance.Y)
        counts, edges = np.histogram(values, bins=config.bins)
        widths = np.diff(edges)
        for count, left, right, width in zip(counts, edges[:-1], edges[1:], widths):
            rows.append(
                {
                    "p": p,
                    "bin_left": left,
                    "bin_right": right,
                    "count": int(count),
                    "density": count / (values.size * width) if width > 0 else math.nan,
                }
            )
        H = AtomicCDF(values)
        summary.append(
            {
                "p": p,
                "n": instance.n,
                "bulk_edge": H.edge,
                "threshold": solve_threshold(H, config.gamma).theta,
                "reference_bulk_edge": model.bulk_edge,
                "reference_threshold": model.threshold,
            }
        )
        if progress is not None:
            progress(done, len(config.p_list))
    return pd.DataFrame(rows), pd.DataFrame(summary)


def _r0_vs_r1(config: ExperimentConfig, model: AsymptoticModel, progress: ProgressCallback | None):
    rows, summary = [], []
    for done, p in enumerate(config.p_list, start=1):
        # directions and noise sampled once, only the spike strength varies
        rng = make_rng(config.seed, spawn_key=(p, 0), algorithm=config.rng)
        n = config.rows(p)
        direction = gen_signal(SignalSpec((1.0,)), n, p, rng)
        Z = gen_noise(config.noise, n, p, rng)
        for x in config.x_grid:
            X = x * direction
            triple = svd(X + Z)
            leading = triple.s[0] * np.outer(triple.U[:, 0], triple.V[:, 0])
            rows.append(
                {
                    "p": p,
                    "x": x,
                    "R0": x * x,
                    "R1_empirical": se_loss(X, leading),
                    "R1": model.r1(x) if model.above_transition(x) else math.nan,
                    "x_star": model.x_star,
                }
            )
        summary.append({"p": p, "n": n, "x_star": model.x_star, "bbp": model.bbp, "threshold": model.threshold})
        if progress is not None:
            progress(done, len(config.p_list))
    return pd.DataFrame(rows), pd.DataFrame(summary)


def theta_grid(values: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive distinct singular values, plus one point on each side of the spectrum.

    Every rank a hard threshold can realize is hit exactly once.
    """
    distinct = np.unique(values)[::-1]
    midpoints = (distinct[:-1] + distinct[1:]) / 2.0
    top = distinct[0] * 1.1 if distinct[0] > 0 else 1.0
    bottom = distinct[-1] / 2.0
    return np.concatenate([[top], midpoints, [bottom]])


def _se_vs_ase(config: ExperimentConfig, model: AsymptoticModel, progress: ProgressCallback | None):
    rows, summary = [], []
    spikes = config.signal.spikes
    ase_star = model.ase_star(spikes)
    tasks = _replicate_tasks(config)
    for done, task in enumerate(tasks, start=1):
        instance = _instance(config, task, config.signal)
        triple = svd(instance.Y)
        levels = se_levels(instance.X, triple)
        grid = theta_grid(triple.s)
        gaps = []
        for theta in grid:
            se = float(levels[int(np.count_nonzero(triple.s > theta))])
            ase = model.ase(spikes, theta) if theta > model.bulk_edge else math.nan
            rows.append({"p": task.p, "replicate": task.replicate, "theta": theta, "se": se, "ase": ase})
            if theta > model.bulk_edge + SE_ASE_EDGE_MARGIN:
                gaps.append(abs(se - ase))
        best = oracle(instance.X, triple)
        thresholds = _adaptive_thresholds(config, triple.s, instance.n, instance.p)
        summary.append(
            {
                "p": task.p,
                "replicate": task.replicate,
                "threshold": model.threshold,
                **{f"theta_{method}": theta for method, theta in thresholds.items()},
                "oracle_se": best.se,
                "se_at_threshold": se_loss(instance.X, hard_threshold_reconstruct(triple, model.threshold)),
                "ase_star": ase_star,
                "max_gap": max(gaps) if gaps else math.nan,
                "signal_energy": float(sum(x * x for x in spikes)),
            }
        )
        if progress is not None:
            progress(done, len(tasks))
    return pd.DataFrame(rows), pd.DataFrame(summary)


def _oracle_attainment(config: ExperimentConfig, model: AsymptoticModel, progress: ProgressCallback | None):
    rows = pd.DataFrame(_run_tasks(config, model, _replicate_tasks(config), progress))
    summary = (
        rows.groupby(["p", "method"], sort=True)
        .agg(attainment=("attained", "mean"), mean_regret=("regret", "mean"), replicates=("replicate", "count"))
        .reset_index()
    )
    return rows, summary


def _regret(config: ExperimentConfig, model: AsymptoticModel, progress: ProgressCallback | None):
    rows = pd.DataFrame(_run_tasks(config, model, _replicate_tasks(config, config.x_grid), progress))
    summary = (
        rows.groupby(["p", "x", "method"], sort=True)
        .agg(mean_regret=("regret", "mean"), attainment=("attained", "mean"), replicates=("replicate", "count"))
        .reset_index()
    )
    return rows, summary


def log_log_slope(ps: np.ndarray, errors: np.ndarray) -> float:
    """Least-squares slope of ``log(error)`` against ``log(p)``; NaN with fewer than two usable points."""
    mask = np.isfinite(errors) & (errors > 0)
    if np.count_nonzero(mask) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(ps[mask]), np.log(errors[mask]), 1)
    return float(slope)


def _convergence_rate(config: ExperimentConfig, model: AsymptoticModel, progress: ProgressCallback | None):
    rows = pd.DataFrame(_run_tasks(config, model, _replicate_tasks(config), progress))
    summary = (
        rows.groupby(["method", "p"], sort=True)
        .agg(median_rel_error=("rel_error", "median"), mean_rel_error=("rel_error", "mean"))
        .reset_index()
    )
    slopes = {
        method: log_log_slope(group["p"].to_numpy(float), group["median_rel_error"].to_numpy(float))
        for method, group in summary.groupby("method", sort=True)
    }
    summary["slope"] = summary["method"].map(slopes)
    return rows, summary


_EXPERIMENTS = {
    ExperimentKind.HIST: _hist,
    ExperimentKind.R0_VS_R1: _r0_vs_r1,
    ExperimentKind.SE_VS_ASE: _se_vs_ase,
    ExperimentKind.ORACLE_ATTAINMENT: _oracle_attainment,
    ExperimentKind.REGRET: _regret,
    ExperimentKind.CONVERGENCE_RATE: _convergence_rate,
}

_SORT_KEYS = ["p", "x", "replicate", "method", "theta", "bin_left"]


def run_experiment(config: ExperimentConfig, progress: ProgressCallback | None = None) -> ExperimentResult:
    """Run one experiment.

    The limiting quantities (plugin threshold, spike maps) come from a reference noise sample with
    ``config.reference_p`` columns seeded by ``config.reference_seed``.

    Args:
        config: The resolved configuration.
        progress: Optional callback reporting completed instances.

    Returns:
        Tables sorted by their key columns, identical for identical configurations.
    """
    _logger.info(
        "Running %s on %s noise, gamma=%g, p in %s", config.experiment, config.noise.label, config.gamma, config.p_list
    )
    reference = plugin_reference(config.noise, config.reference_p, config.reference_seed, config.rng)
    model = plugin_model(config.noise, config.reference_p, config.reference_seed, config.rng)
    _ = model.threshold, model.x_star, model.bbp  # evaluated once before being shipped to workers
    rows, summary = _EXPERIMENTS[config.experiment](config, model, progress)
    _logger.info("%s finished with %d rows", config.experiment, len(rows))
    return ExperimentResult(config, reference, _sorted(rows, _SORT_KEYS), _sorted(summary, _SORT_KEYS))

