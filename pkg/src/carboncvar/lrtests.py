"""Likelihood-ratio tests on the cointegration space.

Two single-variable hypotheses are supported at a fixed rank r:

* exclusion: the variable's row of beta is zero, i.e. it enters no
  long-run relation;
* weak exogeneity: the variable's row of alpha is zero, i.e. its
  equation does not adjust to any long-run disequilibrium.

Both restricted models are estimated exactly (the first by a restricted
eigenvalue problem, the second through the marginal/conditional
factorization of the likelihood) and compared by -2 log LR, which is
asymptotically chi-squared with r degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .cvar import Concentrated, VecmSpec, concentrate, eigen_problem, quasi_loglik
from .dataio import AlignedDataset
from .errors import SampleError

VARIABLE_NAMES = ("land_sink", "ocean_sink", "emissions", "concentration")


@dataclass
class LrTestResult:
    """Outcome of one likelihood-ratio test."""

    hypothesis: str
    variable: str | None
    statistic: float
    df: int
    p_value: float
    loglik_restricted: float
    loglik_unrestricted: float

    def to_dict(self) -> dict:
        return {
            "hypothesis": self.hypothesis,
            "variable": self.variable,
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "loglik_restricted": self.loglik_restricted,
            "loglik_unrestricted": self.loglik_unrestricted,
        }


def _variable_index(variable) -> int:
    if isinstance(variable, str):
        if variable not in VARIABLE_NAMES:
            raise SampleError(
                f"unknown variable {variable!r}; choose from {VARIABLE_NAMES}"
            )
        return VARIABLE_NAMES.index(variable)
    idx = int(variable)
    if not 0 <= idx < len(VARIABLE_NAMES):
        raise SampleError(f"variable index {idx} out of range")
    return idx


def _unrestricted_tail(conc: Concentrated, rank: int) -> float:
    """Sum of log(1 - lambda_i) over the first `rank` eigenvalues."""
    lam, _ = eigen_problem(conc.S00, conc.S01, conc.S11)
    return float(np.log(1.0 - lam[:rank]).sum())


def beta_restricted_eigenvalues(conc: Concentrated, H: np.ndarray) -> np.ndarray:
    """Eigenvalues of the rank problem with beta restricted to span(H).

    H is p x s with s >= rank; beta = H phi reduces the eigenvalue
    problem to the s-dimensional one in the transformed moments.
    """
    s00 = conc.S00
    s01h = conc.S01 @ H
    s11h = H.T @ conc.S11 @ H
    lam, _ = eigen_problem(s00, s01h, s11h)
    return lam


def exclusion_test(
    dataset: AlignedDataset, spec: VecmSpec, variable, rank: int | None = None
) -> LrTestResult:
    """Test that one variable drops out of every cointegration relation.

    Parameters
    ----------
    variable : str or int
        Name from ``VARIABLE_NAMES`` or a 0-based index.
    rank : int, optional
        Defaults to ``spec.rank``.
    """
    idx = _variable_index(variable)
    r = spec.rank if rank is None else rank
    if r is None or r < 1:
        raise SampleError("exclusion test needs a positive cointegration rank")
    conc = concentrate(dataset, spec)
    p = conc.S11.shape[0]
    if p - 1 < r:
        raise SampleError(f"restriction leaves fewer directions ({p - 1}) than rank {r}")

    H = np.delete(np.eye(p), idx, axis=1)
    lam_r = beta_restricted_eigenvalues(conc, H)
    lam, _ = eigen_problem(conc.S00, conc.S01, conc.S11)

    stat = float(conc.T * (np.log(1 - lam_r[:r]) - np.log(1 - lam[:r])).sum())
    stat = max(stat, 0.0)
    df = r
    base = quasi_loglik(conc.R0 - conc.R1 @ _pi_from(conc, r).T)
    return LrTestResult(
        hypothesis="exclusion",
        variable=VARIABLE_NAMES[idx],
        statistic=stat,
        df=df,
        p_value=float(stats.chi2.sf(stat, df)),
        loglik_restricted=base - 0.5 * stat,
        loglik_unrestricted=base,
    )


def _pi_from(conc: Concentrated, r: int) -> np.ndarray:
    """Unrestricted Pi = alpha beta' at rank r (no normalization needed)."""
    _, vectors = eigen_problem(conc.S00, conc.S01, conc.S11)
    beta = vectors[:, :r]
    alpha = conc.S01 @ beta
    return alpha @ beta.T


def weak_exogeneity_loglik(conc: Concentrated, idx: int, rank: int):
    """Maximized log-likelihood with row `idx` of alpha set to zero.

    The likelihood factorizes into the marginal model of the restricted
    equation (pure regression on D, already partialled out, so its
    residual is just that row of R0) and the conditional model of the
    remaining equations, which is a reduced-rank regression after
    partialling the marginal residual out of both sides.

    Returns
    -------
    loglik : float
        Total maximized log-likelihood under the restriction.
    residuals : ndarray
        Implied full-system residuals, T x p.
    """
    p = conc.S11.shape[0]
    keep = [i for i in range(p) if i != idx]
    Rb = conc.R0[:, [idx]]
    Ra = conc.R0[:, keep]

    denom = float(Rb[:, 0] @ Rb[:, 0])
    if denom <= 0:
        raise SampleError("marginal residual has zero variance")
    Ra_dot = Ra - Rb @ (Rb.T @ Ra) / denom
    R1_dot = conc.R1 - Rb @ (Rb.T @ conc.R1) / denom

    T = conc.T
    Saa = Ra_dot.T @ Ra_dot / T
    Sa1 = Ra_dot.T @ R1_dot / T
    S11d = R1_dot.T @ R1_dot / T
    lam_c, vectors = eigen_problem(Saa, Sa1, S11d)

    beta = vectors[:, :rank]
    psi = Sa1 @ beta  # (p-1) x r loadings in the conditional model
    alpha = np.zeros((p, rank))
    alpha[keep] = psi
    residuals = conc.R0 - conc.R1 @ (alpha @ beta.T).T
    return quasi_loglik(residuals), residuals


def weak_exogeneity_test(
    dataset: AlignedDataset, spec: VecmSpec, variable, rank: int | None = None
) -> LrTestResult:
    """Test that one equation carries no error-correction terms."""
    idx = _variable_index(variable)
    r = spec.rank if rank is None else rank
    if r is None or r < 1:
        raise SampleError("weak exogeneity test needs a positive cointegration rank")
    conc = concentrate(dataset, spec)

    loglik_r, _ = weak_exogeneity_loglik(conc, idx, r)
    tail = _unrestricted_tail(conc, r)
    sign, logdet = np.linalg.slogdet(conc.S00)
    p = conc.S11.shape[0]
    loglik_u = -0.5 * conc.T * (p * np.log(2 * np.pi) + logdet + tail + p)

    stat = max(float(-2.0 * (loglik_r - loglik_u)), 0.0)
    df = r
    return LrTestResult(
        hypothesis="weak_exogeneity",
        variable=VARIABLE_NAMES[idx],
        statistic=stat,
        df=df,
        p_value=float(stats.chi2.sf(stat, df)),
        loglik_restricted=loglik_r,
        loglik_unrestricted=loglik_u,
    )


def all_tests(dataset: AlignedDataset, spec: VecmSpec, rank: int | None = None):
    """Run both tests for every variable.

    Returns
    -------
    dict
        ``{"exclusion": [LrTestResult, ...], "weak_exogeneity": [...]}``
        in variable order.
    """
    return {
        "exclusion": [
            exclusion_test(dataset, spec, v, rank) for v in VARIABLE_NAMES
        ],
        "weak_exogeneity": [
            weak_exogeneity_test(dataset, spec, v, rank) for v in VARIABLE_NAMES
        ],
    }
