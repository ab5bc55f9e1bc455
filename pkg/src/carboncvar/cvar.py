"""Reduced-rank estimation of the error-correction system.

The system for the four annual variables Y = (land sink, ocean sink,
emissions, carbon stock)' is

    dY_t = mu + alpha beta' Y_{t-1} + Gamma_1 dY_{t-1} + phi soi_t + u_t

with an unrestricted constant, optional single short-run lag (k in
{0, 1}), and optional SOI regressor.  Estimation concentrates the
deterministic and short-run terms out by least squares and solves the
resulting generalized eigenvalue problem; the rank test is based on the
trace statistic with p-values from a gamma approximation to its
asymptotic null distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

from .dataio import AlignedDataset
from .errors import DegenerateInputError, NumericalError, SampleError

P_DIM = 4

# 5% critical values of the trace statistic (unrestricted constant) for
# n = p - r remaining common trends.  Used for reporting; p-values come
# from the gamma approximation, which reproduces these quantiles.
TRACE_CRIT_5PCT = {1: 3.84, 2: 15.41, 3: 29.80, 4: 47.71}

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class VecmSpec:
    """Specification of the error-correction system.

    Attributes
    ----------
    rank : int or None
        Cointegration rank imposed at estimation; None leaves it to be
        chosen later (e.g. by the trace test).
    k : int
        Number of short-run difference lags, 0 or 1.
    include_soi : bool
        Whether the SOI enters as an unrestricted regressor.
    """

    rank: int | None = None
    k: int = 1
    include_soi: bool = True

    def __post_init__(self):
        if self.k not in (0, 1):
            raise SampleError(f"short-run lag order must be 0 or 1, got {self.k}")
        if self.rank is not None and not 0 <= self.rank <= P_DIM:
            raise SampleError(f"rank must lie in [0, {P_DIM}], got {self.rank}")

    def label(self) -> str:
        soi = "with SOI" if self.include_soi else "no SOI"
        return f"{soi}, k={self.k}"


@dataclass
class Concentrated:
    """Partialled data and moment matrices for one specification.

    R0 and R1 are the residuals of dY_t and Y_{t-1} after regression on
    the deterministic block D (constant, optional dY_{t-1}, optional
    SOI); Sij are the corresponding moment matrices divided by T.
    """

    spec: VecmSpec
    years: np.ndarray
    T: int
    dY: np.ndarray
    Ylag: np.ndarray
    D: np.ndarray
    R0: np.ndarray
    R1: np.ndarray
    S00: np.ndarray
    S01: np.ndarray
    S11: np.ndarray


def concentrate(dataset: AlignedDataset, spec: VecmSpec) -> Concentrated:
    """Build the partialled system for a dataset and specification.

    The first k+1 observations condition the sample, so the effective
    size is T = n_years - 1 - k.

    Raises
    ------
    SampleError
        If the effective sample is too small for the regressor count.
    DegenerateInputError
        If the SOI is requested but constant.
    NumericalError
        If a moment matrix is numerically singular.
    """
    levels = dataset.levels()
    n = len(levels)
    k = spec.k
    diffs = np.diff(levels, axis=0)

    start = 1 + k  # first usable row index into levels
    dY = diffs[k:]
    Ylag = levels[start - 1 : n - 1]
    T = n - 1 - k
    years = dataset.years[start:]

    blocks = [np.ones((T, 1))]
    if k == 1:
        blocks.append(diffs[:-1])
    if spec.include_soi:
        soi = dataset.soi[start:]
        if np.ptp(soi) == 0.0:
            raise DegenerateInputError("SOI series is constant over the sample")
        blocks.append(soi.reshape(-1, 1))
    D = np.hstack(blocks)

    if T <= D.shape[1] + P_DIM:
        raise SampleError(
            f"effective sample T={T} too small for {D.shape[1]} regressors"
        )

    dtd = D.T @ D
    if np.linalg.cond(dtd) > _COND_LIMIT:
        raise NumericalError("deterministic block D'D is numerically singular")
    proj = np.linalg.solve(dtd, D.T)
    R0 = dY - D @ (proj @ dY)
    R1 = Ylag - D @ (proj @ Ylag)

    S00 = R0.T @ R0 / T
    S01 = R0.T @ R1 / T
    S11 = R1.T @ R1 / T
    for name, mat in (("S00", S00), ("S11", S11)):
        if np.linalg.cond(mat) > _COND_LIMIT:
            raise NumericalError(f"moment matrix {name} is numerically singular")

    return Concentrated(
        spec=spec, years=years, T=T, dY=dY, Ylag=Ylag, D=D,
        R0=R0, R1=R1, S00=S00, S01=S01, S11=S11,
    )


def eigen_problem(S00, S01, S11):
    """Solve |lambda S11 - S10 S00^-1 S01| = 0.

    Returns eigenvalues in decreasing order and the matching vectors as
    columns, normalized so v' S11 v = I.
    """
    try:
        L = linalg.cholesky(S11, lower=True)
        L00 = linalg.cholesky(S00, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"moment matrix not positive definite: {exc}") from exc
    # W = L^-1 S10 S00^-1 S01 L^-T, symmetric with the same eigenvalues
    A = linalg.solve_triangular(L00, S01, lower=True)
    B = linalg.solve_triangular(L, A.T, lower=True)
    W = B @ B.T
    lam, V = linalg.eigh(W)
    lam = lam[::-1]
    V = V[:, ::-1]
    if np.any(lam < -1e-8) or np.any(lam > 1.0 + 1e-8):
        raise NumericalError(f"eigenvalues outside [0, 1]: {lam}")
    lam = np.clip(lam, 0.0, 1.0 - 1e-14)
    vectors = linalg.solve_triangular(L, V, lower=True, trans="T")
    return lam, vectors


def quasi_loglik(residuals: np.ndarray) -> float:
    """Gaussian log-likelihood of residuals with covariance profiled out.

    Uses sigma = U'U/T, giving
    l = -(T p / 2) log 2 pi - (T / 2) log det sigma - T p / 2.
    """
    u = np.asarray(residuals, dtype=float)
    if u.ndim == 1:
        u = u.reshape(-1, 1)
    t, p = u.shape
    if t <= p:
        raise SampleError(f"need more observations ({t}) than variables ({p})")
    sigma = u.T @ u / t
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        raise NumericalError("residual covariance is singular")
    return -0.5 * t * (p * np.log(2.0 * np.pi) + logdet + p)


@dataclass
class VecmEstimate:
    """A fitted error-correction system at a given rank."""

    spec: VecmSpec
    rank: int
    alpha: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    gamma1: np.ndarray | None
    phi_soi: np.ndarray | None
    sigma: np.ndarray
    residuals: np.ndarray
    eigenvalues: np.ndarray
    loglik: float
    n_free_params: int
    T: int
    years: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "spec": {"rank": self.rank, "k": self.spec.k,
                     "include_soi": self.spec.include_soi},
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "mu": self.mu.tolist(),
            "gamma1": None if self.gamma1 is None else self.gamma1.tolist(),
            "phi_soi": None if self.phi_soi is None else self.phi_soi.tolist(),
            "sigma": self.sigma.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "loglik": self.loglik,
            "n_free_params": self.n_free_params,
            "T": self.T,
        }


def n_free_params(spec: VecmSpec, rank: int) -> int:
    """Count free parameters: loadings, identified beta entries, and
    the deterministic block."""
    det = P_DIM * (1 + P_DIM * spec.k + int(spec.include_soi))
    return P_DIM * rank + rank * (P_DIM - rank) + det


def solve_rrr(conc: Concentrated, rank: int) -> VecmEstimate:
    """Estimate the system at a fixed cointegration rank.

    beta is normalized so its leading rank x rank block is the identity;
    alpha and all remaining coefficients follow by least squares.
    """
    if not 0 <= rank <= P_DIM:
        raise SampleError(f"rank must lie in [0, {P_DIM}], got {rank}")
    lam, vectors = eigen_problem(conc.S00, conc.S01, conc.S11)

    if rank == 0:
        beta = np.zeros((P_DIM, 0))
        alpha = np.zeros((P_DIM, 0))
    else:
        beta = vectors[:, :rank]
        lead = beta[:rank, :rank]
        if np.linalg.cond(lead) > _COND_LIMIT:
            raise NumericalError(
                "leading block of beta is singular; identity normalization failed"
            )
        beta = beta @ np.linalg.inv(lead)
        btsb = beta.T @ conc.S11 @ beta
        alpha = conc.S01 @ beta @ np.linalg.inv(btsb)

    pi = alpha @ beta.T
    residuals = conc.R0 - conc.R1 @ pi.T
    sigma = residuals.T @ residuals / conc.T

    # recover the concentrated-out coefficients on D
    target = conc.dY - conc.Ylag @ pi.T
    coef = np.linalg.solve(conc.D.T @ conc.D, conc.D.T @ target)
    mu = coef[0]
    pos = 1
    gamma1 = None
    if conc.spec.k == 1:
        gamma1 = coef[pos : pos + P_DIM].T
        pos += P_DIM
    phi_soi = coef[pos] if conc.spec.include_soi else None

    return VecmEstimate(
        spec=conc.spec,
        rank=rank,
        alpha=alpha,
        beta=beta,
        mu=mu,
        gamma1=gamma1,
        phi_soi=phi_soi,
        sigma=sigma,
        residuals=residuals,
        eigenvalues=lam,
        loglik=quasi_loglik(residuals),
        n_free_params=n_free_params(conc.spec, rank),
        T=conc.T,
        years=conc.years,
    )


def estimate(dataset: AlignedDataset, spec: VecmSpec) -> VecmEstimate:
    """Concentrate and solve in one step; spec.rank must be set."""
    if spec.rank is None:
        raise SampleError("spec.rank must be set for estimation")
    return solve_rrr(concentrate(dataset, spec), spec.rank)


def _trace_moments(n: int) -> tuple[float, float]:
    """Mean and variance of the asymptotic trace distribution with an
    unrestricted constant, for n remaining common trends."""
    mean = 2.0 * n * n + 1.05 * n - 1.55
    var = 3.0 * n * n + 1.80 * n
    if n == 1:
        mean -= 0.50
        var -= 2.80
    elif n == 2:
        mean -= 0.23
        var -= 1.10
    return mean, var


def trace_pvalue(stat: float, n: int) -> float:
    """Asymptotic p-value of the trace statistic via the gamma
    approximation matched to the first two moments."""
    if n < 1:
        raise SampleError(f"need at least one common trend, got n={n}")
    mean, var = _trace_moments(n)
    shape = mean * mean / var
    scale = var / mean
    return float(stats.gamma.sf(stat, a=shape, scale=scale))


def trace_critical_value(n: int, level: float = 0.95) -> float:
    """Quantile of the approximate asymptotic trace distribution."""
    mean, var = _trace_moments(n)
    return float(stats.gamma.ppf(level, a=mean * mean / var, scale=var / mean))


@dataclass
class TraceTestResult:
    """Trace statistics, p-values, and the selected rank for one spec."""

    spec: VecmSpec
    T: int
    eigenvalues: np.ndarray
    stats: np.ndarray
    p_values: np.ndarray
    crit_5pct: np.ndarray
    selected_rank: int

    def to_dict(self) -> dict:
        return {
            "spec": {"k": self.spec.k, "include_soi": self.spec.include_soi},
            "T": self.T,
            "eigenvalues": self.eigenvalues.tolist(),
            "stats": self.stats.tolist(),
            "p_values": self.p_values.tolist(),
            "crit_5pct": self.crit_5pct.tolist(),
            "selected_rank": self.selected_rank,
        }


def trace_test(conc: Concentrated, level: float = 0.05) -> TraceTestResult:
    """Run the sequential trace test for rank r = 0, ..., p-1.

    The selected rank is the smallest r whose null (rank <= r) is not
    rejected at the given level; if every null is rejected the system is
    treated as full rank.
    """
    lam, _ = eigen_problem(conc.S00, conc.S01, conc.S11)
    log1m = np.log(1.0 - lam)
    stats_out = np.empty(P_DIM)
    pvals = np.empty(P_DIM)
    crits = np.empty(P_DIM)
    for r in range(P_DIM):
        n = P_DIM - r
        stats_out[r] = -conc.T * log1m[r:].sum()
        pvals[r] = trace_pvalue(stats_out[r], n)
        crits[r] = TRACE_CRIT_5PCT[n]
    accepted = np.nonzero(pvals >= level)[0]
    selected = int(accepted[0]) if len(accepted) else P_DIM
    return TraceTestResult(
        spec=conc.spec,
        T=conc.T,
        eigenvalues=lam,
        stats=stats_out,
        p_values=pvals,
        crit_5pct=crits,
        selected_rank=selected,
    )
