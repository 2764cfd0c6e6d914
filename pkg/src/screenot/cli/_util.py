import contextlib
import json
import logging
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import typer
from rich.console import Console

from ..errors import InputFileError, MalformedInputError, ScreeNOTError

_logger = logging.getLogger(__name__)

MATRIX_FLOAT_FORMAT = "%.17g"

error_console = Console(stderr=True)


@contextlib.contextmanager
def exit_on_error() -> Iterator[None]:
    """Report a `ScreeNOTError` as ``error[<category>]: <message>`` on stderr and exit with its code."""
    try:
        yield
    except ScreeNOTError as ex:
        _logger.debug("Command failed", exc_info=ex)
        error_console.print(f"error[{ex.category}]: {ex}", style="red", markup=False, highlight=False, soft_wrap=True)
        raise typer.Exit(code=ex.exit_code) from ex


def _read_table(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, header=None, dtype=str, comment="#", skip_blank_lines=True, skipinitialspace=True)
    except FileNotFoundError as ex:
        raise InputFileError(f"{path}: no such file") from ex
    except IsADirectoryError as ex:
        raise InputFileError(f"{path}: is a directory") from ex
    except PermissionError as ex:
        raise InputFileError(f"{path}: permission denied") from ex
    except pd.errors.EmptyDataError as ex:
        raise MalformedInputError(f"{path}: no data") from ex
    except (pd.errors.ParserError, UnicodeDecodeError) as ex:
        raise MalformedInputError(f"{path}: {ex}") from ex


def _to_float(table: pd.DataFrame, path: Path) -> np.ndarray:
    try:
        values = table.apply(lambda column: pd.to_numeric(column.str.strip(), errors="raise")).to_numpy(np.float64)
    except (ValueError, TypeError) as ex:
        raise MalformedInputError(f"{path}: {ex}") from ex
    if not np.all(np.isfinite(values)):
        row = int(np.argwhere(~np.isfinite(values))[0][0]) + 1
        raise MalformedInputError(f"{path}: missing or non-finite value in data row {row}")
    return values


def read_spectrum(path: Path) -> np.ndarray:
    """Read singular values, one per line or as a single-column CSV with an optional header row."""
    table = _read_table(path)
    if table.shape[1] != 1:
        raise MalformedInputError(f"{path}: expected a single column, got {table.shape[1]}")
    first = str(table.iat[0, 0]).strip()
    try:
        float(first)
    except ValueError:
        _logger.info("Treating %r in the first row of %s as a header", first, path)
        table = table.iloc[1:]
        if table.empty:
            raise MalformedInputError(f"{path}: no data below the header") from None
    return _to_float(table, path).ravel()


def read_matrix(path: Path) -> np.ndarray:
    """Read a dense, headerless CSV matrix."""
    table = _read_table(path)
    values = _to_float(table, path)
    _logger.info("Read %dx%d matrix from %s", *values.shape, path)
    return values


def _write_failure(path: Path, ex: OSError) -> InputFileError:
    return InputFileError(f"{path}: cannot write ({ex.strerror or ex})")


def write_matrix(path: Path, matrix: np.ndarray) -> Path:
    try:
        pd.DataFrame(matrix).to_csv(
            path, header=False, index=False, float_format=MATRIX_FLOAT_FORMAT, lineterminator="\n"
        )
    except OSError as ex:
        raise _write_failure(path, ex) from ex
    return path


def write_json(path: Path, content: dict[str, Any]) -> Path:
    try:
        path.write_text(json.dumps(content, indent=2) + "\n", encoding="utf-8")
    except OSError as ex:
        raise _write_failure(path, ex) from ex
    return path
