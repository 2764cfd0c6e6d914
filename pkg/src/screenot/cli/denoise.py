"""Denoise a CSV matrix by adaptive hard thresholding of its singular values."""

import logging
from pathlib import Path
from typing import Annotated

import typer

from ..core import screenot
from ..errors import ShapeMismatchError
from ..matrix_lab import denoise_report, hard_threshold_reconstruct, svd
from ..pseudo_noise import Strategy
from ..spectral import DEFAULT_TOL
from ._util import exit_on_error, read_matrix, write_json, write_matrix

app = typer.Typer()

_logger = logging.getLogger(__name__)


@app.command()
def denoise(
    matrix: Annotated[Path, typer.Option("--matrix", "-m", help="Data matrix as headerless CSV.")],
    k: Annotated[int, typer.Option("--k", help="Upper bound on the signal rank.")],
    strategy: Annotated[
        Strategy, typer.Option(case_sensitive=False, help="How the top k singular values are replaced.")
    ] = Strategy.IMPUTE,
    tol: Annotated[
        float, typer.Option(help="Bisection tolerance, absolute unless the bulk edge is below 1.")
    ] = DEFAULT_TOL,
    output: Annotated[
        Path | None, typer.Option("--output", "-o", help="Denoised matrix. Defaults to <matrix>_denoised.csv.")
    ] = None,
    truth: Annotated[
        Path | None,
        typer.Option(help="Noiseless signal as headerless CSV; adds the oracle comparison to the sidecar."),
    ] = None,
) -> None:
    """Denoise a matrix and write the reconstruction plus a JSON sidecar with the threshold details."""
    output = output or matrix.with_name(f"{matrix.stem}_denoised.csv")
    sidecar = output.with_suffix(".json")

    with exit_on_error():
        Y = read_matrix(matrix)
        triple = svd(Y)
        result = screenot(triple.s, *Y.shape, k, strategy, tol)
        Xhat = hard_threshold_reconstruct(triple, result.theta_hat)
        content = {"matrix": str(matrix), "shape": list(Y.shape), "threshold": result.to_dict()}
        if truth is not None:
            X = read_matrix(truth)
            if X.shape != Y.shape:
                raise ShapeMismatchError(f"truth has shape {X.shape}, the data matrix {Y.shape}")
            report = denoise_report(X, triple, result.theta_hat)
            content["report"] = report.to_dict()
        write_matrix(output, Xhat)
        write_json(sidecar, content)

    _logger.info("Wrote %s and %s", output, sidecar)
    typer.echo(f"theta_hat: {result.theta_hat:.10g}")
    typer.echo(f"retained_rank: {result.retained_rank}")
    typer.echo(f"output: {output}")
