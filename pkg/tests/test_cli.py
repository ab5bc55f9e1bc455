"""End-to-end tests of the command-line interface."""
import json

import numpy as np
import pytest

from carboncvar import dataio
from carboncvar.cli import EXIT_DATA, EXIT_OK, main


@pytest.fixture(scope="module")
def canonical_csv(tmp_path_factory, sim_dataset):
    path = tmp_path_factory.mktemp("cli") / "dataset.csv"
    dataio.write_canonical(sim_dataset, path)
    return path


@pytest.fixture(scope="module")
def scenario_csv(tmp_path_factory, sim_dataset):
    start = int(sim_dataset.years[-1]) + 1
    lines = ["year,emissions"] + [
        f"{y},{10.5 + 0.02 * (y - start):.4f}" for y in range(start, start + 20)
    ]
    path = tmp_path_factory.mktemp("cli_scn") / "rising.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ------------------------------------------------------------- ingest


def test_ingest_writes_canonical_file(capsys, tmp_path, gcb_csv, soi_csv):
    out = tmp_path / "ds.csv"
    code, stdout, stderr = run(
        capsys, "ingest", "--gcb", str(gcb_csv), "--soi", str(soi_csv),
        "--end-year", "1970", "--out", str(out),
    )
    assert code == EXIT_OK
    assert out.exists()
    assert "wrote 12 rows" in stdout
    assert "1959" in stderr  # validation report goes to stderr


def test_ingest_json_output(capsys, tmp_path, gcb_csv, soi_csv):
    out = tmp_path / "ds.csv"
    code, stdout, _ = run(
        capsys, "--json", "ingest", "--gcb", str(gcb_csv), "--soi", str(soi_csv),
        "--end-year", "1970", "--out", str(out),
    )
    assert code == EXIT_OK
    payload = json.loads(stdout)
    assert payload["rows"] == 12
    assert payload["years"] == [1959, 1970]


def test_missing_input_is_a_data_error(capsys, tmp_path, soi_csv):
    code, _, stderr = run(
        capsys, "ingest", "--gcb", str(tmp_path / "nope.csv"), "--soi", str(soi_csv),
    )
    assert code == EXIT_DATA
    assert "error" in stderr


def test_corrupt_dataset_is_a_data_error(capsys, tmp_path):
    bad = tmp_path / "garbage.csv"
    bad.write_text("this is not, a dataset\n1,2\n")
    code, _, stderr = run(capsys, "rank-test", "--data", str(bad))
    assert code == EXIT_DATA
    assert "error" in stderr


# ---------------------------------------------------------- rank-test


def test_rank_test_all_specifications(capsys, canonical_csv, tmp_path):
    code, stdout, _ = run(
        capsys, "--json", "--out-dir", str(tmp_path),
        "rank-test", "--data", str(canonical_csv),
    )
    assert code == EXIT_OK
    payload = json.loads(stdout)
    assert len(payload["results"]) == 4
    for result in payload["results"]:
        assert 0 <= result["selected_rank"] <= 4
        assert len(result["stats"]) == 4
    saved = json.loads((tmp_path / "rank_test.json").read_text())
    assert saved == payload


def test_dataset_arguments_required(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["rank-test"])
    assert exc.value.code == 2
    capsys.readouterr()


# ---------------------------------------------------------------- fit


def test_fit_benchmark(capsys, canonical_csv):
    code, stdout, _ = run(
        capsys, "--json", "fit", "--data", str(canonical_csv),
        "--model", "benchmark",
    )
    assert code == EXIT_OK
    payload = json.loads(stdout)
    assert payload["n_free_params"] == 39
    assert np.isfinite(payload["loglik"])


def test_fit_structural_with_artifacts(capsys, canonical_csv, tmp_path):
    code, stdout, _ = run(
        capsys, "--json", "--out-dir", str(tmp_path),
        "fit", "--data", str(canonical_csv), "--starts", "1",
    )
    assert code == EXIT_OK
    payload = json.loads(stdout)
    assert set(payload["params"]) >= {"a1", "b1", "phi4"}
    assert payload["lr_vs_benchmark"]["df"] == 28
    assert (tmp_path / "structural_fit.json").exists()
    fitted = (tmp_path / "fitted_differences.csv").read_text().splitlines()
    assert fitted[0] == "variable,year,series,value"
    residuals = (tmp_path / "residuals.csv").read_text().splitlines()
    assert residuals[0] == "year,dS^L,dS^O,dE,dC"


# --------------------------------------------------------------- test


def test_lr_test_command(capsys, canonical_csv):
    code, stdout, _ = run(
        capsys, "--json", "test", "--data", str(canonical_csv), "--rank", "3",
    )
    assert code == EXIT_OK
    payload = json.loads(stdout)
    assert set(payload) == {"exclusion", "weak_exogeneity"}
    assert all(entry["df"] == 3 for entry in payload["exclusion"])


def test_config_supplies_defaults_flags_win(capsys, canonical_csv, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"rank": 2, "data": str(canonical_csv)}))
    code, stdout, _ = run(capsys, "--json", "--config", str(config), "test")
    assert code == EXIT_OK
    assert all(e["df"] == 2 for e in json.loads(stdout)["exclusion"])

    code, stdout, _ = run(
        capsys, "--json", "--config", str(config), "test", "--rank", "3",
    )
    assert code == EXIT_OK
    assert all(e["df"] == 3 for e in json.loads(stdout)["exclusion"])


def test_invalid_config_rejected(capsys, canonical_csv, tmp_path):
    config = tmp_path / "broken.json"
    config.write_text("{not json")
    code, _, stderr = run(
        capsys, "--config", str(config), "test", "--data", str(canonical_csv),
    )
    assert code == EXIT_DATA
    assert "config" in stderr


# ------------------------------------------------------------ diagnose


def test_diagnose_benchmark_table(capsys, canonical_csv):
    code, stdout, _ = run(
        capsys, "diagnose", "--data", str(canonical_csv), "--model", "benchmark",
    )
    assert code == EXIT_OK
    assert "System" in stdout
    assert "LB(5)" in stdout


def test_diagnose_json_structure(capsys, canonical_csv):
    code, stdout, _ = run(
        capsys, "--json", "diagnose", "--data", str(canonical_csv),
        "--model", "benchmark",
    )
    assert code == EXIT_OK
    payload = json.loads(stdout)
    labels = [row["label"] for row in payload["table"]["rows"]]
    assert labels == ["dS^L", "dS^O", "dE", "dC"]


# ------------------------------------------------------------- project


def test_project_writes_fans_per_level(capsys, canonical_csv, scenario_csv, tmp_path):
    code, stdout, _ = run(
        capsys, "--json", "--out-dir", str(tmp_path), "--seed", "1",
        "project", "--data", str(canonical_csv), "--scenario", str(scenario_csv),
        "--scenario-name", "rising", "--feedback", "none,high",
        "--n-paths", "64", "--starts", "1",
    )
    assert code == EXIT_OK
    payload = json.loads(stdout)
    assert set(payload["levels"]) == {"none", "high"}
    assert payload["n_paths"] == 64
    for level in ("none", "high"):
        fan_dir = tmp_path / "rising" / level
        assert (fan_dir / "concentration_fan.csv").exists()
        assert (fan_dir / "metadata.json").exists()
    none_c = payload["levels"]["none"]["concentration_2100_pgc"][1]
    high_c = payload["levels"]["high"]["concentration_2100_pgc"][1]
    assert high_c > none_c


def test_project_misaligned_scenario_fails(capsys, canonical_csv, tmp_path):
    late = tmp_path / "late.csv"
    late.write_text("year,emissions\n2050,10.0\n2051,10.0\n2052,10.0\n")
    code, _, stderr = run(
        capsys, "project", "--data", str(canonical_csv), "--scenario", str(late),
        "--n-paths", "8", "--starts", "1",
    )
    assert code == EXIT_DATA
    assert "error" in stderr


# ------------------------------------------------------------- version


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip()
