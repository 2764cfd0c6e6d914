from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def flat_spectrum(tmp_path: Path) -> Path:
    path = tmp_path / "spectrum.csv"
    path.write_text("\n".join(["1.0"] * 100) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def matrix_files(tmp_path: Path, low_rank_pair: tuple[np.ndarray, np.ndarray]) -> tuple[Path, Path]:
    X, Y = low_rank_pair
    truth, data = tmp_path / "truth.csv", tmp_path / "data.csv"
    np.savetxt(truth, X, delimiter=",", fmt="%.17g")
    np.savetxt(data, Y, delimiter=",", fmt="%.17g")
    return data, truth
