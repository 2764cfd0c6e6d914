import json
from pathlib import Path

import numpy as np
from typer.testing import CliRunner

from screenot.cli import app


def test_denoise_writes_matrix_and_sidecar(runner: CliRunner, matrix_files: tuple[Path, Path]) -> None:
    data, _ = matrix_files

    result = runner.invoke(app, ["denoise", "-m", str(data), "--k", "5"])

    assert result.exit_code == 0, result.output
    output = data.with_name("data_denoised.csv")
    assert f"output: {output}" in result.output
    assert "retained_rank: 2" in result.output
    Xhat = np.loadtxt(output, delimiter=",")
    assert Xhat.shape == (60, 40)
    assert np.linalg.matrix_rank(Xhat) == 2
    sidecar = json.loads(output.with_suffix(".json").read_text(encoding="utf-8"))
    assert sidecar["shape"] == [60, 40]
    assert sidecar["threshold"]["retained_rank"] == 2
    assert "report" not in sidecar


def test_denoise_with_truth_reports_oracle(
    runner: CliRunner, matrix_files: tuple[Path, Path], tmp_path: Path
) -> None:
    data, truth = matrix_files
    output = tmp_path / "clean.csv"

    result = runner.invoke(
        app, ["denoise", "-m", str(data), "--k", "5", "--truth", str(truth), "-o", str(output)]
    )

    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "clean.json").read_text(encoding="utf-8"))["report"]
    assert report["oracle_rank"] == 2
    assert report["attained_oracle"] is True
    assert report["se_at_theta"] == report["oracle_se"]


def test_denoise_rejects_truth_of_other_shape(
    runner: CliRunner, matrix_files: tuple[Path, Path], tmp_path: Path
) -> None:
    data, _ = matrix_files
    truth = tmp_path / "small.csv"
    np.savetxt(truth, np.eye(3), delimiter=",")

    result = runner.invoke(app, ["denoise", "-m", str(data), "--k", "5", "--truth", str(truth)])

    assert result.exit_code == 15
    assert "error[shape-mismatch]" in result.output


def test_denoise_rank_bound(runner: CliRunner, matrix_files: tuple[Path, Path]) -> None:
    data, _ = matrix_files

    result = runner.invoke(app, ["denoise", "-m", str(data), "--k", "40", "--strategy", "winsorize"])

    assert result.exit_code == 12
    assert not data.with_name("data_denoised.csv").exists()


def test_denoise_output_in_missing_directory(
    runner: CliRunner, matrix_files: tuple[Path, Path], tmp_path: Path
) -> None:
    data, _ = matrix_files
    output = tmp_path / "missing" / "clean.csv"

    result = runner.invoke(app, ["denoise", "-m", str(data), "--k", "5", "-o", str(output)])

    assert result.exit_code == 20
    assert "error[input-file]" in result.output
    assert not output.parent.exists()
