"""Tests for CSV ingestion, alignment, and unit handling."""
import numpy as np
import pytest

from carboncvar import dataio
from carboncvar.errors import (
    AlignmentError,
    ParseError,
    SampleError,
    SchemaError,
)


def test_load_gcb_resolves_headers(gcb_csv):
    frame = dataio.load_gcb(gcb_csv)
    for key in ("year", "fossil", "land_use", "growth", "ocean_sink",
                "land_sink", "cement", "imbalance"):
        assert key in frame.columns
    assert frame["year"].iloc[0] == 1959


def test_load_gcb_header_variants(tmp_path, gcb_csv):
    # case and spacing variations must resolve to the same schema
    text = gcb_csv.read_text().splitlines()
    text[0] = text[0].upper().replace(",", " ,")
    path = tmp_path / "alt.csv"
    path.write_text("\n".join(text) + "\n")
    frame = dataio.load_gcb(path)
    assert "fossil" in frame.columns


def test_load_gcb_missing_column(tmp_path, gcb_csv):
    lines = gcb_csv.read_text().splitlines()
    header = lines[0].split(",")
    keep = [i for i, h in enumerate(header) if "ocean" not in h.lower()]
    out = [",".join(line.split(",")[i] for i in keep) for line in lines]
    path = tmp_path / "missing.csv"
    path.write_text("\n".join(out) + "\n")
    with pytest.raises(SchemaError):
        dataio.load_gcb(path)


def test_load_gcb_non_numeric_cell(tmp_path, gcb_csv):
    lines = gcb_csv.read_text().splitlines()
    parts = lines[3].split(",")
    parts[2] = "n/a"
    lines[3] = ",".join(parts)
    path = tmp_path / "bad.csv"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError) as err:
        dataio.load_gcb(path)
    assert "land" in str(err.value).lower() or "row" in str(err.value).lower()


def test_load_gcb_gap_in_years(tmp_path, gcb_csv):
    lines = gcb_csv.read_text().splitlines()
    del lines[4]
    path = tmp_path / "gap.csv"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(AlignmentError):
        dataio.load_gcb(path)


def test_compose_emissions_identity(gcb_csv):
    frame = dataio.load_gcb(gcb_csv)
    e = dataio.compose_emissions(frame)
    expected = (frame["fossil"] + frame["land_use"] - frame["cement"]).to_numpy()
    assert np.allclose(e, expected, atol=1e-12)


def test_build_concentration_anchor_and_cumsum(gcb_csv):
    frame = dataio.load_gcb(gcb_csv)
    conc = dataio.build_concentration(frame)
    assert conc[0] == pytest.approx(670.0)
    growth = frame["growth"].to_numpy()
    assert np.allclose(np.diff(conc), growth[1:], atol=1e-12)


def test_build_concentration_requires_1959(tmp_path, gcb_csv):
    lines = gcb_csv.read_text().splitlines()
    out = [lines[0]] + lines[2:]
    path = tmp_path / "late.csv"
    path.write_text("\n".join(out) + "\n")
    frame = dataio.load_gcb(path)
    with pytest.raises(AlignmentError):
        dataio.build_concentration(frame)


def test_load_soi_exact_coverage(soi_csv):
    years = np.arange(1959, 1971)
    soi = dataio.load_soi(soi_csv, years)
    assert soi.shape == (12,)
    with pytest.raises(AlignmentError):
        dataio.load_soi(soi_csv, np.arange(1959, 1990))


def test_build_dataset_shapes(gcb_csv, soi_csv):
    ds = dataio.build_dataset(gcb_csv, soi_csv, end_year=1970)
    assert ds.n_years == 12
    assert ds.levels().shape == (12, 4)
    # column order: land sink, ocean sink, emissions, concentration
    frame = dataio.load_gcb(gcb_csv)
    assert np.allclose(ds.levels()[:, 0], frame["land_sink"].to_numpy())
    assert np.allclose(ds.levels()[:, 2], dataio.compose_emissions(frame))


def test_dataset_validation_rejects_short_sample(gcb_csv, soi_csv):
    with pytest.raises(SampleError):
        dataio.build_dataset(gcb_csv, soi_csv, end_year=1961)


def test_canonical_round_trip_fixpoint(tmp_path, gcb_csv, soi_csv):
    ds = dataio.build_dataset(gcb_csv, soi_csv, end_year=1970)
    p1 = tmp_path / "canon1.csv"
    p2 = tmp_path / "canon2.csv"
    dataio.write_canonical(ds, p1)
    ds2 = dataio.read_canonical(p1)
    dataio.write_canonical(ds2, p2)
    # write -> read -> write is a fixpoint at the stored precision
    assert p1.read_text() == p2.read_text()
    assert np.allclose(ds2.levels(), ds.levels(), atol=5e-7)


def test_constants_unit_conversion():
    const = dataio.Constants()
    assert const.pgc_per_ppm == pytest.approx(2.12)
    assert const.to_ppm(const.to_pgc(417.1)) == pytest.approx(417.1, abs=1e-12)
    # conversion factor between carbon mass and CO2 mass
    assert dataio.GTCO2_PER_PGC == pytest.approx(3.664)


def test_load_scenario_units_and_start(tmp_path):
    years = np.arange(2023, 2031)
    lines = ["year,emissions"] + [f"{y},{36.64:.4f}" for y in years]
    path = tmp_path / "scn.csv"
    path.write_text("\n".join(lines) + "\n")
    pgc = dataio.load_scenario(path, "test", unit="pgc")
    co2 = dataio.load_scenario(path, "test", unit="gtco2")
    assert np.allclose(pgc.emissions, 36.64)
    assert np.allclose(co2.emissions, 10.0)
    lines = ["year,emissions"] + [f"{y},{1.0:.4f}" for y in np.arange(2030, 2041)]
    bad = tmp_path / "bad_start.csv"
    bad.write_text("\n".join(lines) + "\n")
    with pytest.raises(AlignmentError):
        dataio.load_scenario(bad, "bad")


def test_validation_report_mentions_ranges(gcb_csv, soi_csv):
    ds = dataio.build_dataset(gcb_csv, soi_csv, end_year=1970)
    report = dataio.validation_report(ds)
    assert "1959" in report and "1970" in report
    assert "emissions" in report.lower()


def test_bundled_data_loads_and_closes(bundled_dataset):
    ds = bundled_dataset
    assert ds.years[0] == 1959 and ds.years[-1] == 2022
    assert ds.n_years == 64
    # stock increments equal the growth column by construction
    assert np.all(np.isfinite(ds.levels()))
    assert ds.concentration[0] == pytest.approx(670.0)
