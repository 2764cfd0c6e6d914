"""Plugin table of limiting quantities per noise ensemble."""

from pathlib import Path
from typing import Annotated

import pandas as pd
import rich
import rich.table
import typer

from ..experiments import plugin_reference
from ..experiments.output import write_csv
from ..noise_models import DEFAULT_RHO, NoiseKind, NoiseSpec
from ..util.settings import Settings
from ._util import exit_on_error

app = typer.Typer()

DEFAULT_GAMMAS = [0.5, 1.0]


@app.command()
def reference(
    noise: Annotated[
        list[NoiseKind] | None,
        typer.Option(case_sensitive=False, help="Noise ensemble; repeat for several. Defaults to all."),
    ] = None,
    gamma: Annotated[list[float] | None, typer.Option(help="Shape ratio; repeat for several.")] = None,
    rho: Annotated[float, typer.Option(help="AR(1) coefficient for the AR1 ensemble.")] = DEFAULT_RHO,
    p: Annotated[int | None, typer.Option("--p", help="Columns of the reference sample.")] = None,
    seed: Annotated[int | None, typer.Option(help="Seed of the reference sample.")] = None,
    csv: Annotated[Path | None, typer.Option(help="Write the table as CSV instead of printing it.")] = None,
) -> None:
    """Estimate bulk edge, phase transition, optimal threshold and crossing spike on a large noise sample."""
    with exit_on_error():
        settings = Settings.from_env()
        p = p or settings.reference_p
        seed = settings.reference_seed if seed is None else seed
        kinds = noise or list(NoiseKind)
        gammas = gamma or DEFAULT_GAMMAS
        rows = [
            plugin_reference(NoiseSpec(kind, g, rho=rho), p, seed, settings.rng) for kind in kinds for g in gammas
        ]

    if csv is not None:
        write_csv(pd.DataFrame([row.to_dict() for row in rows]), csv)
        typer.echo(f"Wrote {csv}")
        return

    table = rich.table.Table(title=f"Plugin reference (p={p}, seed={seed})")
    for column in ("Noise", "gamma", "Bulk edge", "Transition", "Threshold", "x*"):
        table.add_column(column, justify="left" if column == "Noise" else "right")
    for row in rows:
        table.add_row(
            row.noise,
            f"{row.gamma:g}",
            f"{row.bulk_edge:.4f}",
            f"{row.bbp:.4f}",
            f"{row.threshold:.4f}",
            f"{row.x_star:.4f}",
        )
    rich.print(table)
