"""Stochastic projection of the carbon system under emission scenarios.

Projections run the fitted structural model forward from the last
historical year.  Emissions follow a prescribed scenario through a
time-varying drift, the emission deviation process is switched off, and
future sink behaviour can be weakened by exponentially decaying the sink
parameters toward a fraction of their fitted values.  Uncertainty comes
from redrawing the structural shocks of the sink and budget equations;
each path has its own child seed, so results are independent of how
paths are distributed over workers.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import AlignedDataset, EmissionScenario
from .errors import (
    AlignmentError,
    FeedbackSingularityError,
    ParameterDomainError,
    SampleError,
)
from .structural import StructuralFit, StructuralTheta

HALF_HORIZON_YEARS = 28  # anchor (2022) to mid-century (2050)

FEEDBACK_LEVELS = {"none": 0.0, "low": 0.25, "high": 0.5}


def feedback_gamma(p: float) -> float:
    """Decay rate such that a sink parameter reaches the fraction (1 - p)
    of its fitted value at mid-century."""
    if not 0.0 <= p < 1.0:
        raise ParameterDomainError(f"feedback fraction must lie in [0, 1), got {p}")
    return -np.log1p(-p) / HALF_HORIZON_YEARS


@dataclass(frozen=True)
class FeedbackSpec:
    """Sink-weakening assumption for a projection run."""

    p_land: float
    p_ocean: float
    label: str = ""

    @classmethod
    def from_level(cls, level: str) -> "FeedbackSpec":
        if level not in FEEDBACK_LEVELS:
            raise ParameterDomainError(
                f"unknown feedback level {level!r}; choose from {sorted(FEEDBACK_LEVELS)}"
            )
        p = FEEDBACK_LEVELS[level]
        return cls(p_land=p, p_ocean=p, label=level)

    @property
    def gamma_land(self) -> float:
        return feedback_gamma(self.p_land)

    @property
    def gamma_ocean(self) -> float:
        return feedback_gamma(self.p_ocean)


def decay_coeffs(
    theta: StructuralTheta,
    feedback: FeedbackSpec,
    years: np.ndarray,
    anchor_year: int,
):
    """Time paths of the decayed sink coefficients.

    Returns
    -------
    a1, b1, a2, b2 : ndarray
        One value per projection year; intercept and slope of each sink
        share the sink's decay rate.
    """
    elapsed = np.asarray(years, dtype=float) - anchor_year
    if np.any(elapsed < 0):
        raise AlignmentError("projection years precede the anchor year")
    decay_land = np.exp(-feedback.gamma_land * elapsed)
    decay_ocean = np.exp(-feedback.gamma_ocean * elapsed)
    return (
        theta.a1 * decay_land,
        theta.b1 * decay_land,
        theta.a2 * decay_ocean,
        theta.b2 * decay_ocean,
    )


def build_drift(scenario: EmissionScenario, e_anchor: float) -> np.ndarray:
    """Per-year emission drift that carries the anchor value onto the
    scenario path: d_t = E*_t - E*_{t-1}."""
    padded = np.concatenate([[e_anchor], scenario.emissions])
    return np.diff(padded)


@dataclass
class PathEnsemble:
    """Simulated projection paths for one scenario and feedback spec."""

    years: np.ndarray
    levels: np.ndarray  # (n_paths, horizon, 4)
    scenario: str
    feedback: FeedbackSpec
    seed: int
    n_negative: int
    soi_mode: str
    shock_mode: str

    @property
    def n_paths(self) -> int:
        return self.levels.shape[0]


def _initial_deviations(theta: StructuralTheta, dataset: AlignedDataset) -> np.ndarray:
    """In-sample deviation states (X1, X2, X4) at the last historical year."""
    sl = dataset.land_sink[-1]
    so = dataset.ocean_sink[-1]
    e = dataset.emissions[-1]
    c_now = dataset.concentration[-1]
    c_prev = dataset.concentration[-2]
    soi = dataset.soi[-1]
    x1 = sl - theta.a1 - theta.b1 * c_now - theta.b3 * soi
    x2 = so - theta.a2 - theta.b2 * c_now - theta.b4 * soi
    x4 = (c_now - c_prev) - e + sl + so
    return np.array([x1, x2, x4])


def _shock_chol(fit: StructuralFit, shock_mode: str) -> np.ndarray:
    """Cholesky factor of the projected shock covariance for (e1, e2, e4)."""
    system_a0 = np.array(
        [
            [1.0, 0.0, 0.0, -fit.theta.b1],
            [0.0, 1.0, 0.0, -fit.theta.b2],
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 1.0, -1.0, 1.0],
        ]
    )
    sigma_eps = system_a0 @ fit.sigma_u @ system_a0.T
    sub = sigma_eps[np.ix_([0, 1, 3], [0, 1, 3])]
    if shock_mode == "off":
        return np.zeros((3, 3))
    if shock_mode == "diagonal":
        return np.diag(np.sqrt(np.diag(sub)))
    if shock_mode == "structural":
        return np.linalg.cholesky(sub)
    raise ParameterDomainError(f"unknown shock mode {shock_mode!r}")


def _draw_paths(
    seed: int,
    n_paths: int,
    horizon: int,
    chol: np.ndarray,
    soi_values: np.ndarray | None,
    workers: int,
):
    """Per-path shock and SOI draws from independent child seeds.

    Each path consumes only its own spawned stream, so the result is the
    same for any worker count.
    """
    shocks = np.empty((n_paths, horizon, 3))
    soi = np.zeros((n_paths, horizon))
    children = np.random.SeedSequence(seed).spawn(n_paths)

    def fill(block):
        start, stop = block
        for i in range(start, stop):
            rng = np.random.default_rng(children[i])
            if soi_values is not None:
                idx = rng.integers(0, len(soi_values), size=horizon)
                soi[i] = soi_values[idx]
            shocks[i] = rng.standard_normal((horizon, 3)) @ chol.T
        return None

    if workers <= 1:
        fill((0, n_paths))
    else:
        edges = np.linspace(0, n_paths, workers + 1).astype(int)
        blocks = [(edges[j], edges[j + 1]) for j in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    return shocks, soi


def simulate_paths(
    fit: StructuralFit,
    dataset: AlignedDataset,
    scenario: EmissionScenario,
    feedback: FeedbackSpec,
    n_paths: int,
    seed: int = 0,
    *,
    soi_mode: str = "zero",
    shock_mode: str = "structural",
    workers: int = 1,
) -> PathEnsemble:
    """Simulate projection paths for one scenario and feedback spec.

    Parameters
    ----------
    soi_mode : {"zero", "bootstrap"}
        Future SOI is either zero or resampled from the historical
        values, independently per path and year.
    shock_mode : {"structural", "diagonal", "off"}
        Draw sink/budget shocks with the full fitted covariance, with
        correlations zeroed, or not at all.
    workers : int
        Worker threads for the draw stage; the output is bit-identical
        for any value.

    Notes
    -----
    Paths whose carbon stock becomes non-positive are kept and counted
    in ``n_negative``; nothing is clipped.
    """
    if n_paths < 1:
        raise SampleError(f"n_paths must be positive, got {n_paths}")
    anchor_year = int(dataset.years[-1])
    if scenario.years[0] != anchor_year + 1:
        raise AlignmentError(
            f"scenario starts {scenario.years[0]}, expected {anchor_year + 1}"
        )
    if soi_mode not in ("zero", "bootstrap"):
        raise ParameterDomainError(f"unknown soi mode {soi_mode!r}")

    theta = fit.theta
    horizon = len(scenario.years)
    a1_t, b1_t, a2_t, b2_t = decay_coeffs(theta, feedback, scenario.years, anchor_year)
    denom = 1.0 + b1_t + b2_t
    if np.any(denom <= 1e-10):
        year = int(scenario.years[np.argmax(denom <= 1e-10)])
        raise FeedbackSingularityError(
            f"concentration solve degenerate in {year}: 1 + b1 + b2 = {denom.min():.3e}"
        )
    drift = build_drift(scenario, e_anchor=dataset.emissions[-1])

    chol = _shock_chol(fit, shock_mode)
    soi_pool = dataset.soi if soi_mode == "bootstrap" else None
    shocks, soi = _draw_paths(seed, n_paths, horizon, chol, soi_pool, workers)

    phi = np.array([theta.phi1, theta.phi2, theta.phi4])
    x = np.tile(_initial_deviations(theta, dataset), (n_paths, 1))
    conc = np.full(n_paths, dataset.concentration[-1])
    e_prev = dataset.emissions[-1]

    levels = np.empty((n_paths, horizon, 4))
    for h in range(horizon):
        x = phi * x + shocks[:, h, :]
        e_now = e_prev + drift[h]
        soi_h = soi[:, h]
        conc = (
            conc + e_now - a1_t[h] - a2_t[h]
            - (theta.b3 + theta.b4) * soi_h
            - x[:, 0] - x[:, 1] + x[:, 2]
        ) / denom[h]
        levels[:, h, 0] = a1_t[h] + b1_t[h] * conc + theta.b3 * soi_h + x[:, 0]
        levels[:, h, 1] = a2_t[h] + b2_t[h] * conc + theta.b4 * soi_h + x[:, 1]
        levels[:, h, 2] = e_now
        levels[:, h, 3] = conc
        e_prev = e_now

    n_negative = int(np.sum(np.any(levels[:, :, 3] <= 0.0, axis=1)))
    return PathEnsemble(
        years=np.asarray(scenario.years).copy(),
        levels=levels,
        scenario=scenario.name,
        feedback=feedback,
        seed=seed,
        n_negative=n_negative,
        soi_mode=soi_mode,
        shock_mode=shock_mode,
    )


VARIABLE_KEYS = ("land_sink", "ocean_sink", "emissions", "concentration")


@dataclass
class ProjectionResult:
    """Quantile fan of a path ensemble."""

    years: np.ndarray
    probs: tuple
    quantiles: dict  # variable -> (len(probs), horizon)
    scenario: str
    feedback: FeedbackSpec
    n_paths: int
    seed: int
    n_negative: int

    def median(self, variable: str) -> np.ndarray:
        idx = self.probs.index(0.5)
        return self.quantiles[variable][idx]


def quantile_fan(
    ensemble: PathEnsemble, probs: tuple = (0.025, 0.5, 0.975)
) -> ProjectionResult:
    """Pointwise quantiles of the ensemble for each variable."""
    if any(not 0.0 <= p <= 1.0 for p in probs):
        raise ParameterDomainError(f"quantile probabilities out of range: {probs}")
    quantiles = {}
    for j, key in enumerate(VARIABLE_KEYS):
        quantiles[key] = np.quantile(ensemble.levels[:, :, j], probs, axis=0)
    return ProjectionResult(
        years=ensemble.years,
        probs=tuple(probs),
        quantiles=quantiles,
        scenario=ensemble.scenario,
        feedback=ensemble.feedback,
        n_paths=ensemble.n_paths,
        seed=ensemble.seed,
        n_negative=ensemble.n_negative,
    )


def _prob_header(p: float) -> str:
    return f"q{100 * p:g}"


def write_fan_csvs(result: ProjectionResult, out_dir, prefix: str = "") -> list:
    """Write one CSV per variable plus a long-format file and metadata.

    The long file has columns (variable, year, series, value) so plots
    can consume it directly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    headers = [_prob_header(p) for p in result.probs]
    long_rows = ["variable,year,series,value"]
    for key in VARIABLE_KEYS:
        path = out / f"{prefix}{key}_fan.csv"
        lines = ["year," + ",".join(headers)]
        fan = result.quantiles[key]
        for i, year in enumerate(result.years):
            vals = ",".join(f"{fan[q, i]:.6f}" for q in range(len(result.probs)))
            lines.append(f"{year:d},{vals}")
            for q, header in enumerate(headers):
                long_rows.append(f"{key},{year:d},{header},{fan[q, i]:.6f}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    long_path = out / f"{prefix}fan_long.csv"
    long_path.write_text("\n".join(long_rows) + "\n")
    written.append(long_path)
    meta = {
        "scenario": result.scenario,
        "feedback": {
            "label": result.feedback.label,
            "p_land": result.feedback.p_land,
            "p_ocean": result.feedback.p_ocean,
        },
        "n_paths": result.n_paths,
        "seed": result.seed,
        "n_negative": result.n_negative,
        "probs": list(result.probs),
        "years": [int(result.years[0]), int(result.years[-1])],
    }
    meta_path = out / f"{prefix}metadata.json"
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    written.append(meta_path)
    return written
