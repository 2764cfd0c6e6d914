"""Adaptive threshold of a spectrum read from a file."""

import json
from pathlib import Path
from typing import Annotated

import typer

from ..core import screenot
from ..pseudo_noise import Strategy
from ..spectral import DEFAULT_TOL
from ._util import exit_on_error, read_spectrum, write_json

app = typer.Typer()


@app.command()
def threshold(
    spectrum: Annotated[
        Path, typer.Option("--spectrum", "-s", help="Singular values, one per line or as a single-column CSV.")
    ],
    n: Annotated[int, typer.Option("--n", help="Rows of the data matrix.")],
    p: Annotated[int, typer.Option("--p", help="Columns of the data matrix.")],
    k: Annotated[int, typer.Option("--k", help="Upper bound on the signal rank.")],
    strategy: Annotated[
        Strategy, typer.Option(case_sensitive=False, help="How the top k singular values are replaced.")
    ] = Strategy.IMPUTE,
    tol: Annotated[
        float, typer.Option(help="Bisection tolerance, absolute unless the bulk edge is below 1.")
    ] = DEFAULT_TOL,
    json_output: Annotated[bool, typer.Option("--json", help="Print the full result as JSON.")] = False,
    output: Annotated[Path | None, typer.Option("--output", "-o", help="Also write the JSON result here.")] = None,
) -> None:
    """Compute the noise-adaptive optimal hard threshold of a spectrum."""
    with exit_on_error():
        values = read_spectrum(spectrum)
        result = screenot(values, n, p, k, strategy, tol)
        summary = result.to_dict()
        if output is not None:
            write_json(output, summary)

    if json_output:
        typer.echo(json.dumps(summary, indent=2))
    else:
        typer.echo(f"theta_hat: {result.theta_hat:.10g}")
        typer.echo(f"retained_rank: {result.retained_rank}")
