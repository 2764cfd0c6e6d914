"""Experiment artifacts: CSV tables, a JSON metadata sidecar and optional SVG charts."""

from __future__ import annotations

import importlib.metadata
import json
import logging
from datetime import UTC, datetime
from pathlib import Path

import pandas as pd

from .config import ExperimentKind
from .runner import PLUGIN_METHOD, ExperimentResult

_logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SVG_HASH_SALT = "screenot"


def package_version() -> str:
    try:
        return importlib.metadata.version("screenot")
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """Header row, no index, ``.`` as decimal separator and ``\\n`` line ends on every platform."""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="")
    return path


def write_result(result: ExperimentResult, out_dir: Path | None = None, plot: bool | None = None) -> list[Path]:
    """Write ``<stem>.csv``, ``<stem>_summary.csv``, ``<stem>_meta.json`` and, with `plot`, ``<stem>.svg``.

    Only the metadata sidecar carries a timestamp; the tables are byte-identical across reruns.

    Returns:
        The written paths.
    """
    config = result.config
    out_dir = Path(out_dir if out_dir is not None else config.output_dir)
    plot = config.plot if plot is None else plot
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = config.stem

    paths = [
        write_csv(result.rows, out_dir / f"{stem}.csv"),
        write_csv(result.summary, out_dir / f"{stem}_summary.csv"),
    ]
    if plot:
        paths.append(write_svg(result, out_dir / f"{stem}.svg"))

    meta = {
        "created": datetime.now(UTC).isoformat(timespec="seconds"),
        "version": package_version(),
        "config": config.to_dict(),
        "reference": result.reference.to_dict(),
        "files": [path.name for path in paths],
    }
    meta_path = out_dir / f"{stem}_meta.json"
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    paths.append(meta_path)
    for path in paths:
        _logger.info("Wrote %s", path)
    return paths


def write_svg(result: ExperimentResult, path: Path) -> Path:
    """Render the experiment's chart as SVG.

    Raises:
        ImportError: matplotlib is not installed (``pip install screenot[plot]``).
    """
    import matplotlib
    from matplotlib.figure import Figure

    matplotlib.rcParams["svg.hashsalt"] = SVG_HASH_SALT
    figure = Figure(figsize=(7, 4.5))
    axes = figure.add_subplot()
    _PLOTTERS[result.config.experiment](result, axes)
    axes.set_title(f"{result.config.experiment.value}, {result.config.noise.label}, gamma={result.config.gamma:g}")
    if axes.get_legend_handles_labels()[0]:
        axes.legend()
    figure.tight_layout()
    figure.savefig(path, format="svg", metadata={"Date": None})
    return path


def _plot_hist(result: ExperimentResult, axes) -> None:
    rows = result.rows[result.rows["p"] == result.rows["p"].max()]
    axes.bar(rows["bin_left"], rows["density"], width=rows["bin_right"] - rows["bin_left"], align="edge", alpha=0.6)
    axes.axvline(result.reference.bulk_edge, color="k", linestyle="--", label="bulk edge")
    axes.axvline(result.reference.threshold, color="r", label="optimal threshold")
    axes.set_xlabel("singular value")
    axes.set_ylabel("density")


def _plot_r0_r1(result: ExperimentResult, axes) -> None:
    rows = result.rows[result.rows["p"] == result.rows["p"].min()]
    axes.plot(rows["x"], rows["R0"], label="R0")
    axes.plot(rows["x"], rows["R1"], label="R1")
    axes.plot(rows["x"], rows["R1_empirical"], ".", label="R1 empirical")
    axes.axvline(result.reference.x_star, color="k", linestyle="--", label="x*")
    axes.set_xlabel("x")
    axes.set_ylabel("loss")


def _plot_se_ase(result: ExperimentResult, axes) -> None:
    rows = result.rows[(result.rows["p"] == result.rows["p"].min()) & (result.rows["replicate"] == 0)]
    rows = rows.sort_values("theta")
    axes.step(rows["theta"], rows["se"], where="mid", label="SE")
    axes.plot(rows["theta"], rows["ase"], label="ASE")
    summary = result.summary.iloc[0]
    axes.axvline(summary["threshold"], color="k", linestyle="--", label=PLUGIN_METHOD)
    for column in summary.index:
        if column.startswith("theta_"):
            axes.axvline(summary[column], linestyle=":", label=column.removeprefix("theta_"))
    axes.set_xlabel("threshold")
    axes.set_ylabel("squared error")


def _plot_by_method(x_column: str, y_column: str, log: bool = False):
    def plot(result: ExperimentResult, axes) -> None:
        summary = result.summary
        if "x" in summary.columns:
            summary = summary[summary["p"] == summary["p"].min()]
        for method, group in summary.groupby("method", sort=True):
            axes.plot(group[x_column], group[y_column], marker="o", label=method)
        if log:
            axes.set_xscale("log")
            axes.set_yscale("log")
        axes.set_xlabel(x_column)
        axes.set_ylabel(y_column)

    return plot


_PLOTTERS = {
    ExperimentKind.HIST: _plot_hist,
    ExperimentKind.R0_VS_R1: _plot_r0_r1,
    ExperimentKind.SE_VS_ASE: _plot_se_ase,
    ExperimentKind.ORACLE_ATTAINMENT: _plot_by_method("p", "attainment"),
    ExperimentKind.REGRET: _plot_by_method("x", "mean_regret"),
    ExperimentKind.CONVERGENCE_RATE: _plot_by_method("p", "median_rel_error", log=True),
}
