"""Shared fixtures for the carboncvar test suite."""
from pathlib import Path

import numpy as np
import pytest

from carboncvar import dataio, structural
from carboncvar.structural import StructuralTheta

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

# Reference parameter point used across tests: realistic magnitudes,
# inside the admissible domain, nothing special about the exact digits.
REF_THETA = StructuralTheta(
    a1=-5.0, a2=-4.8, b1=0.010, b2=0.009, b3=0.55, b4=-0.11,
    d=0.105, phi1=0.10, phi2=0.45, phi3=-0.12, phi4=0.30,
)

# One-step innovation scales for the four system equations.
REF_SIGMA_U = np.array([0.65, 0.095, 0.19, 0.66])


def structural_shock_cov(theta: StructuralTheta, sigma_u: np.ndarray) -> np.ndarray:
    """Map uncorrelated reduced-form scales to the structural shock cov."""
    a0 = structural.theta_to_structural(theta).a0
    return a0 @ np.diag(sigma_u**2) @ a0.T


def make_soi(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = np.empty(n)
    x[0] = rng.standard_normal() * 0.7
    for t in range(1, n):
        x[t] = 0.25 * x[t - 1] + rng.standard_normal() * 0.68
    return x


@pytest.fixture(scope="session")
def ref_theta() -> StructuralTheta:
    return REF_THETA


@pytest.fixture(scope="session")
def sim_dataset() -> dataio.AlignedDataset:
    """Simulated 64-year system dataset from the reference parameters."""
    return structural.simulate_structural(
        REF_THETA, 64, structural_shock_cov(REF_THETA, REF_SIGMA_U),
        seed=42, soi=make_soi(64, seed=7), start_year=1959,
        c_initial=670.0, e_initial=4.2,
    )


@pytest.fixture(scope="session")
def long_dataset() -> dataio.AlignedDataset:
    """Long simulated sample for asymptotic-flavored checks."""
    return structural.simulate_structural(
        REF_THETA, 600, structural_shock_cov(REF_THETA, REF_SIGMA_U),
        seed=11, soi=make_soi(600, seed=13), start_year=1500,
        c_initial=670.0, e_initial=4.2,
    )


@pytest.fixture(scope="session")
def sim_fit(sim_dataset) -> structural.StructuralFit:
    """MLE fit of the simulated dataset, reused by projection tests."""
    return structural.fit_mle(sim_dataset, init=REF_THETA, n_starts=1, seed=0)


@pytest.fixture(scope="session")
def bundled_dataset() -> dataio.AlignedDataset:
    gcb = DATA_DIR / "gcb_global.csv"
    soi = DATA_DIR / "soi_annual.csv"
    if not gcb.exists():
        pytest.skip("bundled data not generated")
    return dataio.build_dataset(gcb, soi)


@pytest.fixture()
def gcb_csv(tmp_path) -> Path:
    """Minimal well-formed accounting CSV covering 1959-1970."""
    years = np.arange(1959, 1971)
    rng = np.random.default_rng(3)
    lines = ["Year,fossil emissions excluding carbonation,land-use change emissions,"
             "atmospheric growth,ocean sink,land sink,cement carbonation sink,"
             "budget imbalance"]
    for i, y in enumerate(years):
        fossil = 2.4 + 0.1 * i
        luc = 1.5
        cement = 0.01
        growth = 1.8 + 0.05 * i + 0.1 * rng.standard_normal()
        ocean = 0.9 + 0.02 * i
        land = 1.2 + 0.3 * rng.standard_normal()
        imb = fossil + luc - cement - growth - ocean - land
        lines.append(f"{y},{fossil:.4f},{luc:.4f},{growth:.4f},{ocean:.4f},"
                     f"{land:.4f},{cement:.4f},{imb:.4f}")
    path = tmp_path / "gcb.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def soi_csv(tmp_path) -> Path:
    years = np.arange(1959, 1971)
    rng = np.random.default_rng(5)
    lines = ["year,soi"]
    for y in years:
        lines.append(f"{y},{rng.standard_normal() * 0.7:.4f}")
    path = tmp_path / "soi.csv"
    path.write_text("\n".join(lines) + "\n")
    return path
