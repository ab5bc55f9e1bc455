"""Residual diagnostics: moments, normality, and serial correlation.

Per-equation checks are the Jarque-Bera test and the Ljung-Box
portmanteau; system-wide checks are the Doornik-Hansen omnibus normality
test and Hosking's multivariate portmanteau.  Kurtosis is reported raw
(normal = 3) and moments use the 1/T convention, matching the residual
covariance used in estimation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateInputError, NumericalError, SampleError


@dataclass(frozen=True)
class TestStat:
    """A test statistic with its reference distribution summary."""

    statistic: float
    df: int
    p_value: float


def moments(x: np.ndarray) -> tuple[float, float, float]:
    """Standard deviation, skewness, and raw kurtosis (1/T convention).

    Raises
    ------
    DegenerateInputError
        If the series is constant.
    """
    x = np.asarray(x, dtype=float)
    centered = x - x.mean()
    m2 = np.mean(centered**2)
    if m2 <= 0.0:
        raise DegenerateInputError("series has zero variance")
    m3 = np.mean(centered**3)
    m4 = np.mean(centered**4)
    return float(np.sqrt(m2)), float(m3 / m2**1.5), float(m4 / m2**2)


def jarque_bera(x: np.ndarray) -> TestStat:
    """Jarque-Bera normality test, chi-squared with 2 df under the null."""
    x = np.asarray(x, dtype=float)
    t = len(x)
    if t < 8:
        raise SampleError(f"need at least 8 observations, got {t}")
    _, skew, kurt = moments(x)
    stat = t * (skew**2 / 6.0 + (kurt - 3.0) ** 2 / 24.0)
    return TestStat(float(stat), 2, float(stats.chi2.sf(stat, 2)))


def ljung_box(x: np.ndarray, lags: int) -> TestStat:
    """Ljung-Box test of no autocorrelation up to the given lag."""
    x = np.asarray(x, dtype=float)
    t = len(x)
    if lags < 1:
        raise SampleError(f"lags must be positive, got {lags}")
    if lags >= t / 2:
        raise SampleError(f"lags={lags} too large for sample of {t}")
    centered = x - x.mean()
    denom = np.sum(centered**2)
    if denom <= 0.0:
        raise DegenerateInputError("series has zero variance")
    stat = 0.0
    for j in range(1, lags + 1):
        rho = np.sum(centered[j:] * centered[:-j]) / denom
        stat += rho * rho / (t - j)
    stat *= t * (t + 2.0)
    return TestStat(float(stat), lags, float(stats.chi2.sf(stat, lags)))


def _skew_z(skew: float, n: int) -> float:
    """D'Agostino normalizing transform of the sample skewness."""
    y = skew * np.sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)))
    beta2 = (
        3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0))
    )
    w2 = -1.0 + np.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / np.sqrt(0.5 * np.log(w2))
    alpha = np.sqrt(2.0 / (w2 - 1.0))
    return float(delta * np.arcsinh(y / alpha))


def _kurt_z(skew: float, kurt: float, n: int) -> float:
    """Gamma-based normalizing transform of the sample kurtosis."""
    d = (n - 3.0) * (n + 1.0) * (n * n + 15.0 * n - 4.0)
    a = (n - 2.0) * (n + 5.0) * (n + 7.0) * (n * n + 27.0 * n - 70.0) / (6.0 * d)
    c = (n - 7.0) * (n + 5.0) * (n + 7.0) * (n * n + 2.0 * n - 5.0) / (6.0 * d)
    k = (
        (n + 5.0) * (n + 7.0)
        * (n**3 + 37.0 * n * n + 11.0 * n - 313.0) / (12.0 * d)
    )
    alpha = a + skew * skew * c
    chi = (kurt - 1.0 - skew * skew) * 2.0 * k
    z = ((chi / (2.0 * alpha)) ** (1.0 / 3.0) - 1.0 + 1.0 / (9.0 * alpha))
    return float(z * np.sqrt(9.0 * alpha))


def doornik_hansen(residuals: np.ndarray) -> TestStat:
    """Omnibus multivariate normality test, chi-squared with 2p df.

    Columns are standardized, rotated into the principal axes of their
    correlation matrix, and rescaled to unit variance; each transformed
    column contributes a squared skewness and kurtosis z-score.

    Raises
    ------
    NumericalError
        If the residual correlation matrix is numerically singular.
    """
    x = np.asarray(residuals, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    t, p = x.shape
    if t < 8:
        raise SampleError(f"need at least 8 observations, got {t}")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / t
    sd = np.sqrt(np.diag(cov))
    if np.any(sd <= 0.0):
        raise DegenerateInputError("a residual column has zero variance")
    corr = cov / np.outer(sd, sd)
    lam, H = np.linalg.eigh(corr)
    if np.any(lam < 1e-10):
        raise NumericalError(
            f"residual correlation matrix is singular (min eigenvalue {lam.min():.2e})"
        )
    transform = H @ np.diag(lam**-0.5) @ H.T
    st = (centered / sd) @ transform

    stat = 0.0
    for j in range(p):
        _, skew, kurt = moments(st[:, j])
        stat += _skew_z(skew, t) ** 2 + _kurt_z(skew, kurt, t) ** 2
    df = 2 * p
    return TestStat(float(stat), df, float(stats.chi2.sf(stat, df)))


def hosking_portmanteau(
    residuals: np.ndarray, lags: int, var_lags: int = 0
) -> TestStat:
    """Multivariate portmanteau test of residual autocorrelation.

    Parameters
    ----------
    lags : int
        Number of residual autocovariances included.
    var_lags : int
        Lag order of the fitted levels VAR, subtracted from the degrees
        of freedom: df = p^2 (lags - var_lags).
    """
    x = np.asarray(residuals, dtype=float)
    t, p = x.shape
    if lags == 0:
        return TestStat(0.0, 0, 1.0)
    if lags < 0 or var_lags < 0:
        raise SampleError("lags must be non-negative")
    if lags <= var_lags:
        raise SampleError(f"lags={lags} must exceed fitted order {var_lags}")
    if lags >= t / 2:
        raise SampleError(f"lags={lags} too large for sample of {t}")
    centered = x - x.mean(axis=0)
    c0 = centered.T @ centered / t
    try:
        c0_inv = np.linalg.inv(c0)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("residual covariance is singular") from exc
    stat = 0.0
    for j in range(1, lags + 1):
        cj = centered[j:].T @ centered[:-j] / t
        stat += np.trace(cj.T @ c0_inv @ cj @ c0_inv) / (t - j)
    stat *= t * t
    df = p * p * (lags - var_lags)
    return TestStat(float(stat), df, float(stats.chi2.sf(stat, df)))


@dataclass
class DiagnosticsRow:
    """Moment summary and test p-values for one residual series."""

    label: str
    std_dev: float | None
    skewness: float | None
    kurtosis: float | None
    jb_p: float
    lb5_p: float
    lb10_p: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "std_dev": self.std_dev,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "jb_p": self.jb_p,
            "lb5_p": self.lb5_p,
            "lb10_p": self.lb10_p,
        }


@dataclass
class DiagnosticsTable:
    """Per-equation rows plus the system row of omnibus tests."""

    rows: list[DiagnosticsRow]
    system: DiagnosticsRow
    lb_lags: tuple[int, int]
    var_lags: int

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "system": self.system.to_dict(),
            "lb_lags": list(self.lb_lags),
            "var_lags": self.var_lags,
        }


def diagnostics_table(
    residuals: np.ndarray,
    labels=None,
    var_lags: int = 0,
    lb_lags: tuple[int, int] = (5, 10),
) -> DiagnosticsTable:
    """Assemble the residual diagnostics table for a fitted system.

    Parameters
    ----------
    residuals : ndarray, T x p
    labels : sequence of str, optional
    var_lags : int
        Fitted levels-VAR order, used in the system portmanteau df.
    """
    x = np.asarray(residuals, dtype=float)
    t, p = x.shape
    if labels is None:
        labels = [f"u{j + 1}" for j in range(p)]
    if len(labels) != p:
        raise SampleError(f"got {len(labels)} labels for {p} series")
    m_low, m_high = lb_lags

    rows = []
    for j in range(p):
        series = x[:, j]
        sd, skew, kurt = moments(series)
        rows.append(
            DiagnosticsRow(
                label=labels[j],
                std_dev=sd,
                skewness=skew,
                kurtosis=kurt,
                jb_p=jarque_bera(series).p_value,
                lb5_p=ljung_box(series, m_low).p_value,
                lb10_p=ljung_box(series, m_high).p_value,
            )
        )
    system = DiagnosticsRow(
        label="System",
        std_dev=None,
        skewness=None,
        kurtosis=None,
        jb_p=doornik_hansen(x).p_value,
        lb5_p=hosking_portmanteau(x, m_low, var_lags).p_value,
        lb10_p=hosking_portmanteau(x, m_high, var_lags).p_value,
    )
    return DiagnosticsTable(rows=rows, system=system, lb_lags=lb_lags, var_lags=var_lags)


def format_table(table: DiagnosticsTable) -> str:
    """Render a diagnostics table as aligned text."""
    m_low, m_high = table.lb_lags
    header = (
        f"{'':12s} {'StdDev':>8s} {'Skew':>8s} {'Kurt':>8s} "
        f"{'JB':>8s} {f'LB({m_low})':>8s} {f'LB({m_high})':>8s}"
    )
    lines = [header]
    for row in (*table.rows, table.system):
        sd = "" if row.std_dev is None else f"{row.std_dev:8.3f}"
        sk = "" if row.skewness is None else f"{row.skewness:8.3f}"
        ku = "" if row.kurtosis is None else f"{row.kurtosis:8.3f}"
        lines.append(
            f"{row.label:12s} {sd:>8s} {sk:>8s} {ku:>8s} "
            f"{row.jb_p:8.3f} {row.lb5_p:8.3f} {row.lb10_p:8.3f}"
        )
    return "\n".join(lines)
