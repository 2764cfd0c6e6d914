"""Run the Monte-Carlo experiment suite and write its tables."""

import logging
from pathlib import Path
from typing import Annotated, Any

import rich.progress
import rich.table
import typer

from ..experiments import ExperimentKind, load_config, run_experiment, write_result
from ..noise_models import NoiseKind
from ..util.settings import Settings
from ._util import error_console, exit_on_error

app = typer.Typer()

_logger = logging.getLogger(__name__)


def _overrides(**options: Any) -> dict[str, Any]:
    keys = {"noise": "noise.kind", "gamma": "noise.gamma", "rho": "noise.rho", "p": "p_list", "out": "output_dir"}
    overrides = {}
    for name, value in options.items():
        if value is None or value == []:
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, NoiseKind | ExperimentKind):
            value = value.value
        overrides[keys.get(name, name)] = value
    return overrides


@app.command()
def simulate(
    config: Annotated[Path | None, typer.Option("--config", "-c", help="TOML experiment configuration.")] = None,
    experiment: Annotated[
        ExperimentKind | None, typer.Option("--experiment", "-e", case_sensitive=False, help="Experiment to run.")
    ] = None,
    suite: Annotated[bool, typer.Option("--suite", help="Run all experiments for the selected noise.")] = False,
    noise: Annotated[NoiseKind | None, typer.Option(case_sensitive=False, help="Noise ensemble.")] = None,
    gamma: Annotated[float | None, typer.Option(help="Shape ratio p/n in (0, 1].")] = None,
    rho: Annotated[float | None, typer.Option(help="AR(1) coefficient for the AR1 ensemble.")] = None,
    p: Annotated[list[int] | None, typer.Option("--p", help="Column count; repeat for a sweep.")] = None,
    k: Annotated[int | None, typer.Option("--k", help="Rank bound for the adaptive thresholds.")] = None,
    replicates: Annotated[int | None, typer.Option(help="Monte-Carlo replicates per p.")] = None,
    seed: Annotated[int | None, typer.Option(help="Root seed.")] = None,
    jobs: Annotated[int | None, typer.Option("--jobs", "-j", help="Worker processes.")] = None,
    out: Annotated[Path | None, typer.Option("--out", "-o", help="Output directory.")] = None,
    plot: Annotated[bool | None, typer.Option("--plot/--no-plot", help="Also write SVG charts.")] = None,
) -> None:
    """Run one experiment (from --config or --experiment) or, with --suite, all of them.

    Options override values from the configuration file, which in turn override the packaged presets.
    """
    overrides = _overrides(
        noise=noise, gamma=gamma, rho=rho, p=p, k=k, replicates=replicates, seed=seed, jobs=jobs, out=out, plot=plot
    )
    if suite:
        experiments: list[ExperimentKind | None] = list(ExperimentKind)
    elif experiment is not None or config is not None:
        experiments = [experiment]
    else:
        raise typer.BadParameter("Use --config FILE, --experiment NAME or --suite.")

    table = rich.table.Table("Experiment", "Files", title="Results")
    with exit_on_error():
        settings = Settings.from_env()
        configs = [
            load_config(config, overrides | ({"experiment": kind.value} if kind else {}), settings)
            for kind in experiments
        ]
        for resolved in configs:
            with rich.progress.Progress(console=error_console, transient=True) as progress:
                task_id = progress.add_task(f"{resolved.experiment.value} ({resolved.noise.label})", total=None)

                def update(done: int, total: int, task_id: rich.progress.TaskID = task_id) -> None:
                    progress.update(task_id, completed=done, total=total)

                result = run_experiment(resolved, progress=update)
            paths = write_result(result)
            _logger.info("%s finished, wrote %d files", resolved.stem, len(paths))
            table.add_row(resolved.experiment.value, "\n".join(str(path) for path in paths))
    rich.print(table)
