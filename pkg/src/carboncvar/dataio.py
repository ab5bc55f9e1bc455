"""Loading, composition, and alignment of the annual carbon budget data.

The entry point for most users is :func:`build_dataset`, which combines a
global budget accounting file with an annual Southern Oscillation Index
series into an :class:`AlignedDataset` holding the four model variables:
land sink, ocean sink, total emissions, and atmospheric carbon stock, all
in PgC.  Aligned datasets round-trip through a canonical six-column CSV.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    AlignmentError,
    DegenerateInputError,
    ParseError,
    SampleError,
    SchemaError,
)

GTCO2_PER_PGC = 3.664


@dataclass(frozen=True)
class Constants:
    """Physical constants used to build and convert the carbon stock.

    Attributes
    ----------
    c_preindustrial : float
        Pre-industrial atmospheric carbon, PgC (about 280 ppm).
    c_initial : float
        Atmospheric carbon assigned to the first sample year (1959), PgC.
    pgc_per_ppm : float
        Conversion factor between PgC and ppm of CO2.
    """

    c_preindustrial: float = 593.0
    c_initial: float = 670.0
    pgc_per_ppm: float = 2.12

    def to_ppm(self, pgc):
        return np.asarray(pgc, dtype=float) / self.pgc_per_ppm

    def to_pgc(self, ppm):
        return np.asarray(ppm, dtype=float) * self.pgc_per_ppm


# Canonical name -> accepted header spellings, compared after lowercasing
# and collapsing interior whitespace.
_GCB_ALIASES = {
    "year": ("year",),
    "fossil": (
        "fossil emissions excluding carbonation",
        "fossil.emissions.excluding.carbonation",
        "fossil fuel and industry",
        "fossil emissions",
    ),
    "land_use": (
        "land-use change emissions",
        "land use change emissions",
        "land-use change",
    ),
    "growth": ("atmospheric growth", "growth rate", "atmospheric increase"),
    "ocean_sink": ("ocean sink",),
    "land_sink": ("land sink",),
    "cement": ("cement carbonation sink", "cement carbonation"),
    "imbalance": ("budget imbalance",),
}

_SOI_ALIASES = {
    "year": ("year",),
    "soi": ("soi", "index", "value", "annual", "mean"),
}

_SCENARIO_ALIASES = {
    "year": ("year",),
    "emissions": ("emissions", "value", "e", "total emissions"),
}


def _normalize(header: str) -> str:
    return " ".join(str(header).strip().lower().split())


def _resolve_columns(frame: pd.DataFrame, aliases: dict, path) -> dict:
    """Map canonical column names onto the frame's actual headers."""
    normalized = {_normalize(c): c for c in frame.columns}
    resolved = {}
    missing = []
    for canonical, spellings in aliases.items():
        for spelling in spellings:
            if spelling in normalized:
                resolved[canonical] = normalized[spelling]
                break
        else:
            missing.append(canonical)
    if missing:
        raise SchemaError(
            f"{path}: could not resolve column(s) {missing}; "
            f"available headers: {list(frame.columns)}"
        )
    return resolved


def _numeric_column(frame: pd.DataFrame, column: str, path) -> np.ndarray:
    values = pd.to_numeric(frame[column], errors="coerce")
    bad = values.index[values.isna() & frame[column].notna()]
    if len(bad) > 0:
        row = int(bad[0])
        raise ParseError(
            f"{path}: non-numeric value {frame[column].iloc[row]!r} "
            f"in column {column!r}, row {row + 2}"
        )
    if values.isna().any():
        row = int(values.index[values.isna()][0])
        raise ParseError(f"{path}: missing value in column {column!r}, row {row + 2}")
    return values.to_numpy(dtype=float)


def _check_contiguous(years: np.ndarray, path) -> None:
    if len(years) >= 2 and not np.all(np.diff(years) == 1):
        gap = int(years[np.argmax(np.diff(years) != 1)])
        raise AlignmentError(f"{path}: year coverage has a gap after {gap}")


def load_gcb(path) -> pd.DataFrame:
    """Read a global carbon budget accounting file.

    Parameters
    ----------
    path : str or Path
        CSV with one row per year and the seven budget columns (fossil
        emissions excluding carbonation, land-use change emissions,
        atmospheric growth, ocean sink, land sink, cement carbonation
        sink, budget imbalance).  Header spellings are matched
        case-insensitively.

    Returns
    -------
    pandas.DataFrame
        Columns renamed to canonical identifiers, sorted by year.
    """
    frame = pd.read_csv(path)
    resolved = _resolve_columns(frame, _GCB_ALIASES, path)
    out = {}
    for canonical, actual in resolved.items():
        out[canonical] = _numeric_column(frame, actual, path)
    result = pd.DataFrame(out)
    result["year"] = result["year"].astype(int)
    result = result.sort_values("year").reset_index(drop=True)
    _check_contiguous(result["year"].to_numpy(), path)
    return result


def compose_emissions(frame: pd.DataFrame) -> np.ndarray:
    """Total emissions: fossil plus land-use change, net of carbonation."""
    return (
        frame["fossil"].to_numpy(dtype=float)
        + frame["land_use"].to_numpy(dtype=float)
        - frame["cement"].to_numpy(dtype=float)
    )


def build_concentration(frame: pd.DataFrame, constants: Constants | None = None) -> np.ndarray:
    """Accumulate atmospheric growth into a carbon stock in PgC.

    The stock for the first row is pinned to ``constants.c_initial``,
    which is calibrated to 1959; subsequent rows add that year's growth.

    Raises
    ------
    AlignmentError
        If the first row is not 1959, since the anchor constant would
        not apply.
    """
    constants = constants or Constants()
    years = frame["year"].to_numpy()
    if years[0] != 1959:
        raise AlignmentError(
            f"carbon stock anchor is calibrated to 1959, file starts {years[0]}"
        )
    growth = frame["growth"].to_numpy(dtype=float)
    conc = np.empty_like(growth)
    conc[0] = constants.c_initial
    conc[1:] = constants.c_initial + np.cumsum(growth[1:])
    return conc


def load_soi(path, years: np.ndarray) -> np.ndarray:
    """Read an annual SOI file and align it to the given years.

    Raises
    ------
    AlignmentError
        If any requested year is absent from the file.
    """
    frame = pd.read_csv(path)
    resolved = _resolve_columns(frame, _SOI_ALIASES, path)
    file_years = _numeric_column(frame, resolved["year"], path).astype(int)
    values = _numeric_column(frame, resolved["soi"], path)
    lookup = dict(zip(file_years.tolist(), values.tolist()))
    missing = [int(y) for y in years if int(y) not in lookup]
    if missing:
        raise AlignmentError(
            f"{path}: SOI has no value for year(s) {missing[:4]}"
            + ("..." if len(missing) > 4 else "")
        )
    return np.array([lookup[int(y)] for y in years], dtype=float)


@dataclass
class AlignedDataset:
    """The four model variables plus SOI on a common annual grid.

    All flux variables are PgC/yr and the carbon stock is PgC.  The
    variable order used throughout the package is (land sink, ocean
    sink, emissions, carbon stock).
    """

    years: np.ndarray
    land_sink: np.ndarray
    ocean_sink: np.ndarray
    emissions: np.ndarray
    concentration: np.ndarray
    soi: np.ndarray
    constants: Constants = field(default_factory=Constants)

    VARIABLES = ("land_sink", "ocean_sink", "emissions", "concentration")
    LABELS = ("S^L", "S^O", "E", "C")

    def __post_init__(self):
        self.years = np.asarray(self.years, dtype=int)
        for name in (*self.VARIABLES, "soi"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.years)
        for name in (*self.VARIABLES, "soi"):
            if len(getattr(self, name)) != n:
                raise SampleError(f"column {name!r} has length != {n}")
        if n < 4:
            raise SampleError(f"need at least 4 annual observations, got {n}")
        _check_contiguous(self.years, "dataset")
        if np.any(~np.isfinite(self.levels())) or np.any(~np.isfinite(self.soi)):
            raise ParseError("dataset contains non-finite values")
        if np.any(self.concentration <= 0):
            raise DegenerateInputError("carbon stock must be strictly positive")

    @property
    def n_years(self) -> int:
        return len(self.years)

    def levels(self) -> np.ndarray:
        """Return the (n_years, 4) matrix of model variables."""
        return np.column_stack(
            [self.land_sink, self.ocean_sink, self.emissions, self.concentration]
        )


def build_dataset(
    gcb_path,
    soi_path,
    constants: Constants | None = None,
    start_year: int = 1959,
    end_year: int = 2022,
) -> AlignedDataset:
    """Compose the aligned model dataset from raw input files.

    Parameters
    ----------
    gcb_path, soi_path : path-like
        Budget accounting file and annual SOI file.
    start_year, end_year : int
        Inclusive sample window; the budget file must cover it.
    """
    constants = constants or Constants()
    raw = load_gcb(gcb_path)
    years = raw["year"].to_numpy()
    if years[0] > start_year or years[-1] < end_year:
        raise SampleError(
            f"budget file covers {years[0]}-{years[-1]}, "
            f"requested {start_year}-{end_year}"
        )
    emissions = compose_emissions(raw)
    concentration = build_concentration(raw, constants)
    keep = (years >= start_year) & (years <= end_year)
    years = years[keep]
    soi = load_soi(soi_path, years)
    return AlignedDataset(
        years=years,
        land_sink=raw["land_sink"].to_numpy(dtype=float)[keep],
        ocean_sink=raw["ocean_sink"].to_numpy(dtype=float)[keep],
        emissions=emissions[keep],
        concentration=concentration[keep],
        soi=soi,
        constants=constants,
    )


_CANONICAL_COLUMNS = ("year", "sL", "sO", "E", "C", "soi")


def write_canonical(dataset: AlignedDataset, path) -> None:
    """Write the canonical six-column CSV at fixed six-decimal precision."""
    buf = io.StringIO()
    buf.write(",".join(_CANONICAL_COLUMNS) + "\n")
    rows = zip(
        dataset.years,
        dataset.land_sink,
        dataset.ocean_sink,
        dataset.emissions,
        dataset.concentration,
        dataset.soi,
    )
    for year, *values in rows:
        buf.write(f"{year:d}," + ",".join(f"{v:.6f}" for v in values) + "\n")
    Path(path).write_text(buf.getvalue())


def read_canonical(path) -> AlignedDataset:
    """Read a canonical CSV back into an :class:`AlignedDataset`."""
    frame = pd.read_csv(path)
    got = [_normalize(c) for c in frame.columns]
    expected = [_normalize(c) for c in _CANONICAL_COLUMNS]
    if got != expected:
        raise SchemaError(
            f"{path}: expected canonical columns {list(_CANONICAL_COLUMNS)}, got {list(frame.columns)}"
        )
    columns = {c: _numeric_column(frame, c, path) for c in frame.columns}
    return AlignedDataset(
        years=columns[frame.columns[0]].astype(int),
        land_sink=columns[frame.columns[1]],
        ocean_sink=columns[frame.columns[2]],
        emissions=columns[frame.columns[3]],
        concentration=columns[frame.columns[4]],
        soi=columns[frame.columns[5]],
    )


@dataclass
class EmissionScenario:
    """A prescribed annual emission pathway, PgC/yr."""

    name: str
    years: np.ndarray
    emissions: np.ndarray

    def __post_init__(self):
        self.years = np.asarray(self.years, dtype=int)
        self.emissions = np.asarray(self.emissions, dtype=float)
        if len(self.years) != len(self.emissions):
            raise SampleError("scenario years and emissions differ in length")
        if len(self.years) == 0:
            raise SampleError("scenario is empty")
        _check_contiguous(self.years, f"scenario {self.name!r}")
        if np.any(~np.isfinite(self.emissions)):
            raise ParseError(f"scenario {self.name!r} contains non-finite values")


def load_scenario(
    path,
    name: str | None = None,
    unit: str = "pgc",
    expected_start: int | None = 2023,
) -> EmissionScenario:
    """Read an emission scenario CSV (year, emissions).

    Parameters
    ----------
    unit : {"pgc", "gtco2"}
        Values in GtCO2 are converted to PgC by dividing by 3.664.
    expected_start : int or None
        First scenario year required to follow the historical sample;
        pass None to skip the check.
    """
    if unit not in ("pgc", "gtco2"):
        raise SchemaError(f"unknown scenario unit {unit!r}")
    frame = pd.read_csv(path)
    resolved = _resolve_columns(frame, _SCENARIO_ALIASES, path)
    years = _numeric_column(frame, resolved["year"], path).astype(int)
    emissions = _numeric_column(frame, resolved["emissions"], path)
    if unit == "gtco2":
        emissions = emissions / GTCO2_PER_PGC
    if expected_start is not None and years[0] != expected_start:
        raise AlignmentError(
            f"{path}: scenario must start in {expected_start}, starts {years[0]}"
        )
    return EmissionScenario(
        name=name or Path(path).stem, years=years, emissions=emissions
    )


def validation_report(dataset: AlignedDataset) -> str:
    """Summarize an aligned dataset as a small text report."""
    c = dataset.constants
    imbalance = (
        dataset.emissions[1:]
        - np.diff(dataset.concentration)
        - dataset.land_sink[1:]
        - dataset.ocean_sink[1:]
    )
    lines = [
        "aligned dataset",
        f"  years            : {dataset.years[0]}-{dataset.years[-1]} ({dataset.n_years} rows)",
        f"  emissions (last)  : {dataset.emissions[-1]:.4f} PgC/yr",
        f"  carbon stock (last): {dataset.concentration[-1]:.2f} PgC"
        f" = {c.to_ppm(dataset.concentration[-1]):.1f} ppm",
        f"  soi mean          : {dataset.soi.mean():+.3f}",
        f"  budget imbalance  : mean {imbalance.mean():+.4f},"
        f" max |.| {np.abs(imbalance).max():.4f} PgC/yr",
        "  checks            : years contiguous, values finite, stock positive",
    ]
    return "\n".join(lines)
