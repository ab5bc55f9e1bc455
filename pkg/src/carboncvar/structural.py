"""Structural sink/source model and its maximum-likelihood estimation.

The model ties the two sinks to the atmospheric carbon stock through
linear uptake equations, gives emission changes a constant drift, and
closes the system with the budget identity.  Deviations from each
relation follow independent AR(1) processes:

    land sink   S^L_t = a1 + b1 C_t + X1_t,   X1_t = phi1 X1_{t-1} + b3 soi_t + e1_t
    ocean sink  S^O_t = a2 + b2 C_t + X2_t,   X2_t = phi2 X2_{t-1} + b4 soi_t + e2_t
    emissions   dE_t  = d + X3_t,             X3_t = phi3 X3_{t-1} + e3_t
    budget      dC_t  = E_t - S^L_t - S^O_t + X4_t,  X4_t = phi4 X4_{t-1} + e4_t

Quasi-differencing turns this into a restricted error-correction system
whose coefficient matrices are closed-form functions of the eleven
structural parameters; the Gaussian likelihood is evaluated on the
implied reduced-form residuals with the shock covariance profiled out.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np
from scipy import optimize, stats

from .cvar import VecmEstimate, quasi_loglik
from .dataio import AlignedDataset
from .errors import (
    ConvergenceError,
    NumericalError,
    ParameterDomainError,
    SampleError,
)
from .lrtests import LrTestResult

N_PARAMS = 11
PARAM_NAMES = (
    "a1", "a2", "b1", "b2", "b3", "b4", "d", "phi1", "phi2", "phi3", "phi4",
)

_PHI_BOUND = 0.999
_C_FLOOR = 1e-8


@dataclass(frozen=True)
class StructuralTheta:
    """The eleven structural parameters.

    a1, a2 are sink intercepts; b1, b2 the sink responses to the carbon
    stock; b3, b4 the SOI loadings; d the emission drift; phi1..phi4 the
    AR(1) coefficients of the deviation processes.
    """

    a1: float
    a2: float
    b1: float
    b2: float
    b3: float
    b4: float
    d: float
    phi1: float
    phi2: float
    phi3: float
    phi4: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)

    @classmethod
    def from_array(cls, values) -> "StructuralTheta":
        values = np.asarray(values, dtype=float)
        if values.shape != (N_PARAMS,):
            raise ParameterDomainError(f"expected {N_PARAMS} parameters, got {values.shape}")
        return cls(*values.tolist())

    @property
    def c(self) -> float:
        """Determinant of the simultaneity matrix, 1 + b1 + b2."""
        return 1.0 + self.b1 + self.b2

    def validate(self) -> "StructuralTheta":
        for name in ("phi1", "phi2", "phi3", "phi4"):
            v = getattr(self, name)
            if not abs(v) < 1.0:
                raise ParameterDomainError(f"{name}={v} outside (-1, 1)")
        if not self.c > _C_FLOOR:
            raise ParameterDomainError(f"1 + b1 + b2 = {self.c} not positive")
        return self

    def in_domain(self) -> bool:
        try:
            self.validate()
        except ParameterDomainError:
            return False
        return True


@dataclass
class StructuralSystem:
    """The structural-form matrices for one parameter vector.

    The system reads  a0 dY_t = intercept + soi_load soi_t
    + level_coef Y_{t-1} + diff_coef dY_{t-1} + eps_t.
    """

    a0: np.ndarray
    intercept: np.ndarray
    soi_load: np.ndarray
    level_coef: np.ndarray
    diff_coef: np.ndarray
    c: float


def theta_to_structural(theta: StructuralTheta) -> StructuralSystem:
    """Assemble the structural-form matrices (validates the domain)."""
    theta.validate()
    a1, a2, b1, b2, b3, b4, d = (
        theta.a1, theta.a2, theta.b1, theta.b2, theta.b3, theta.b4, theta.d,
    )
    p1, p2, p3, p4 = theta.phi1, theta.phi2, theta.phi3, theta.phi4
    a0 = np.array(
        [
            [1.0, 0.0, 0.0, -b1],
            [0.0, 1.0, 0.0, -b2],
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 1.0, -1.0, 1.0],
        ]
    )
    intercept = np.array([a1 * (1 - p1), a2 * (1 - p2), d * (1 - p3), 0.0])
    soi_load = np.array([b3, b4, 0.0, 0.0])
    level_coef = np.array(
        [
            [-(1 - p1), 0.0, 0.0, b1 * (1 - p1)],
            [0.0, -(1 - p2), 0.0, b2 * (1 - p2)],
            [0.0, 0.0, 0.0, 0.0],
            [-(1 - p4), -(1 - p4), (1 - p4), 0.0],
        ]
    )
    diff_coef = np.array(
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, p3, 0.0],
            [0.0, 0.0, 0.0, p4],
        ]
    )
    return StructuralSystem(
        a0=a0, intercept=intercept, soi_load=soi_load,
        level_coef=level_coef, diff_coef=diff_coef, c=theta.c,
    )


@dataclass
class ReducedForm:
    """Closed-form reduced-form coefficients implied by the structure.

    error_rotation is the inverse of the simultaneity matrix, mapping
    structural shocks into reduced-form errors u = error_rotation eps.
    """

    mu: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma1: np.ndarray
    phi_soi: np.ndarray
    error_rotation: np.ndarray


def theta_to_reduced(theta: StructuralTheta) -> ReducedForm:
    """Map structural parameters to the error-correction coefficients.

    The cointegration rank is 3 by construction.  beta columns are the
    structural relations themselves: the two sink equilibria
    (S^L - b1 C, S^O - b2 C) and the cumulated budget (E - S^L - S^O);
    only the span is comparable with the reduced-rank estimator, which
    uses a different normalization.
    """
    theta.validate()
    a1, a2, b1, b2, b3, b4, d = (
        theta.a1, theta.a2, theta.b1, theta.b2, theta.b3, theta.b4, theta.d,
    )
    p1, p2, p3, p4 = theta.phi1, theta.phi2, theta.phi3, theta.phi4
    c = theta.c

    mu = np.array(
        [
            a1 / c * (1 - p1) * (1 + b2) - b1 / c * (a2 * (1 - p2) - d * (1 - p3)),
            a2 / c * (1 - p2) * (1 + b1) - b2 / c * (a1 * (1 - p1) - d * (1 - p3)),
            d * (1 - p3),
            (d * (1 - p3) - a1 * (1 - p1) - a2 * (1 - p2)) / c,
        ]
    )
    alpha = np.array(
        [
            [-(1 + b2) * (1 - p1) / c, b1 * (1 - p2) / c, b1 * (1 - p4) / c],
            [b2 * (1 - p1) / c, -(1 + b1) * (1 - p2) / c, b2 * (1 - p4) / c],
            [0.0, 0.0, 0.0],
            [(1 - p1) / c, (1 - p2) / c, (1 - p4) / c],
        ]
    )
    beta = np.array(
        [
            [1.0, 0.0, -1.0],
            [0.0, 1.0, -1.0],
            [0.0, 0.0, 1.0],
            [-b1, -b2, 0.0],
        ]
    )
    gamma1 = np.array(
        [
            [0.0, 0.0, b1 * p3 / c, b1 * p4 / c],
            [0.0, 0.0, b2 * p3 / c, b2 * p4 / c],
            [0.0, 0.0, p3, 0.0],
            [0.0, 0.0, p3 / c, p4 / c],
        ]
    )
    phi_soi = np.array(
        [
            (b3 * (1 + b2) - b1 * b4) / c,
            (b4 * (1 + b1) - b2 * b3) / c,
            0.0,
            -(b3 + b4) / c,
        ]
    )
    rotation = np.array(
        [
            [(1 + b2) / c, -b1 / c, b1 / c, b1 / c],
            [-b2 / c, (1 + b1) / c, b2 / c, b2 / c],
            [0.0, 0.0, 1.0, 0.0],
            [-1.0 / c, -1.0 / c, 1.0 / c, 1.0 / c],
        ]
    )
    return ReducedForm(
        mu=mu, alpha=alpha, beta=beta, gamma1=gamma1,
        phi_soi=phi_soi, error_rotation=rotation,
    )


def structural_residuals(theta: StructuralTheta, dataset: AlignedDataset):
    """Structural and reduced-form residuals over the effective sample.

    One lagged difference is needed, so the first two observations
    condition the sample and T = n_years - 2.

    Returns
    -------
    eps : ndarray, T x 4
        Structural shocks.
    u : ndarray, T x 4
        Reduced-form errors, u = a0^-1 eps.
    """
    system = theta_to_structural(theta)
    levels = dataset.levels()
    n = len(levels)
    if n < 4:
        raise SampleError(f"need at least 4 observations, got {n}")
    diffs = np.diff(levels, axis=0)
    dY = diffs[1:]
    dYlag = diffs[:-1]
    Ylag = levels[1:-1]
    soi = dataset.soi[2:]

    eps = (
        dY @ system.a0.T
        - system.intercept
        - np.outer(soi, system.soi_load)
        - Ylag @ system.level_coef.T
        - dYlag @ system.diff_coef.T
    )
    u = np.linalg.solve(system.a0, eps.T).T
    return eps, u


def loglik(theta: StructuralTheta, dataset: AlignedDataset) -> float:
    """Profile Gaussian log-likelihood of the structural model."""
    _, u = structural_residuals(theta, dataset)
    return quasi_loglik(u)


def _penalized_negloglik(values: np.ndarray, dataset: AlignedDataset) -> float:
    theta = StructuralTheta.from_array(values)
    if not theta.in_domain():
        # smooth-ish barrier so line searches recover
        excess = max(0.0, _C_FLOOR - theta.c) + sum(
            max(0.0, abs(p) - _PHI_BOUND)
            for p in (theta.phi1, theta.phi2, theta.phi3, theta.phi4)
        )
        return 1e8 * (1.0 + excess)
    try:
        return -loglik(theta, dataset)
    except NumericalError:
        return 1e8


class _Scaling:
    """Linear reparametrization that conditions the likelihood surface.

    The sink intercepts and slopes are nearly collinear because the
    carbon stock is far from zero; working with the slope per standard
    deviation of the stock and the intercept at the stock mean removes
    that.  The map is z = A theta, with A identity except in the two
    intercept/slope pairs; gradients and Hessians transform exactly.
    """

    def __init__(self, dataset: AlignedDataset):
        conc = dataset.concentration
        self.c_ref = float(conc.mean())
        self.c_sd = float(conc.std()) or 1.0
        A = np.eye(N_PARAMS)
        A[0, 2] = self.c_ref
        A[1, 3] = self.c_ref
        A[2, 2] = self.c_sd
        A[3, 3] = self.c_sd
        self.A = A
        self.A_inv = np.linalg.inv(A)

    def to_z(self, theta_values: np.ndarray) -> np.ndarray:
        return self.A @ theta_values

    def to_theta(self, z: np.ndarray) -> np.ndarray:
        return self.A_inv @ z


def _fd_gradient(f, x: np.ndarray, rel: float) -> np.ndarray:
    steps = rel * np.maximum(1.0, np.abs(x))
    grad = np.empty(len(x))
    for i in range(len(x)):
        up = x.copy()
        dn = x.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        grad[i] = (f(up) - f(dn)) / (2.0 * steps[i])
    return grad


def _fd_hessian(f, x: np.ndarray, rel: float) -> np.ndarray:
    steps = rel * np.maximum(1.0, np.abs(x))
    n = len(x)
    f0 = f(x)
    hess = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = steps[i]
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / steps[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = steps[j]
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
    return hess


def loglik_gradient(
    theta: StructuralTheta, dataset: AlignedDataset, rel_step: float = 6e-6
) -> np.ndarray:
    """Central-difference gradient of the profile log-likelihood.

    Differencing runs in the conditioned parametrization and the result
    is mapped back, so steps stay meaningful for every parameter.
    """
    scaling = _Scaling(dataset)

    def f(z):
        return loglik(StructuralTheta.from_array(scaling.to_theta(z)), dataset)

    grad_z = _fd_gradient(f, scaling.to_z(theta.to_array()), rel_step)
    return scaling.A.T @ grad_z


def loglik_hessian(
    theta: StructuralTheta, dataset: AlignedDataset, rel_step: float = 1.2e-4
) -> np.ndarray:
    """Central second-difference Hessian of the profile log-likelihood."""
    scaling = _Scaling(dataset)

    def f(z):
        return loglik(StructuralTheta.from_array(scaling.to_theta(z)), dataset)

    hess_z = _fd_hessian(f, scaling.to_z(theta.to_array()), rel_step)
    return scaling.A.T @ hess_z @ scaling.A


def _ar1_coef(z: np.ndarray) -> float:
    denom = float(z[:-1] @ z[:-1])
    if denom <= 0.0:
        return 0.0
    return float(np.clip(z[1:] @ z[:-1] / denom, -0.9, 0.9))


def ols_start(dataset: AlignedDataset) -> StructuralTheta:
    """Equation-by-equation least-squares starting values."""
    levels = dataset.levels()
    sl, so, e, conc = levels.T
    soi = dataset.soi

    design = np.column_stack([np.ones_like(conc), conc, soi])
    coef_l, *_ = np.linalg.lstsq(design, sl, rcond=None)
    coef_o, *_ = np.linalg.lstsq(design, so, rcond=None)
    a1, b1, b3 = coef_l
    a2, b2, b4 = coef_o
    x1 = sl - design @ coef_l
    x2 = so - design @ coef_o

    de = np.diff(e)
    d = float(de.mean())
    x3 = de - d
    x4 = np.diff(conc) - e[1:] + sl[1:] + so[1:]

    theta = StructuralTheta(
        a1=float(a1), a2=float(a2), b1=float(b1), b2=float(b2),
        b3=float(b3), b4=float(b4), d=d,
        phi1=_ar1_coef(x1), phi2=_ar1_coef(x2),
        phi3=_ar1_coef(x3), phi4=_ar1_coef(x4),
    )
    if not theta.in_domain():
        # fall back to a neutral interior point
        theta = StructuralTheta(
            a1=float(a1), a2=float(a2), b1=max(float(b1), 0.0),
            b2=max(float(b2), 0.0), b3=float(b3), b4=float(b4), d=d,
            phi1=0.0, phi2=0.0, phi3=0.0, phi4=0.0,
        )
    return theta


@dataclass
class StructuralFit:
    """Result of maximum-likelihood estimation."""

    theta: StructuralTheta
    se: np.ndarray | None
    loglik: float
    converged: bool
    n_iter: int
    residuals_structural: np.ndarray = field(repr=False)
    residuals_reduced: np.ndarray = field(repr=False)
    sigma_u: np.ndarray = field(repr=False)
    T: int
    years: np.ndarray = field(repr=False)
    se_method: str = "hessian"

    def to_dict(self) -> dict:
        return {
            "params": dict(zip(PARAM_NAMES, self.theta.to_array().tolist())),
            "se": None if self.se is None else dict(
                zip(PARAM_NAMES, np.asarray(self.se).tolist())
            ),
            "loglik": self.loglik,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "T": self.T,
            "se_method": self.se_method,
            "sigma_u": self.sigma_u.tolist(),
        }


def standard_errors_from_hessian(hessian: np.ndarray) -> np.ndarray:
    """Standard errors from the Hessian of the log-likelihood.

    Raises
    ------
    NumericalError
        If the negative Hessian is not positive definite.
    """
    neg = -np.asarray(hessian, dtype=float)
    eigvals = np.linalg.eigvalsh(neg)
    if np.any(eigvals <= 0.0):
        raise NumericalError(
            f"negative Hessian not positive definite; eigenvalues {eigvals}"
        )
    cov = np.linalg.inv(neg)
    return np.sqrt(np.diag(cov))


def score_matrix(
    theta: StructuralTheta, dataset: AlignedDataset, rel_step: float = 6e-6
) -> np.ndarray:
    """Per-observation scores of the profile log-likelihood, T x 11."""
    scaling = _Scaling(dataset)

    def contribs(z: np.ndarray) -> np.ndarray:
        th = StructuralTheta.from_array(scaling.to_theta(z))
        _, u = structural_residuals(th, dataset)
        t, p = u.shape
        sigma = u.T @ u / t
        sign, logdet = np.linalg.slogdet(sigma)
        if sign <= 0:
            raise NumericalError("residual covariance is singular")
        quad = np.einsum("ti,ij,tj->t", u, np.linalg.inv(sigma), u)
        return -0.5 * (p * np.log(2 * np.pi) + logdet + quad)

    z0 = scaling.to_z(theta.to_array())
    steps = rel_step * np.maximum(1.0, np.abs(z0))
    t = dataset.n_years - 2
    scores_z = np.empty((t, N_PARAMS))
    for i in range(N_PARAMS):
        up = z0.copy()
        dn = z0.copy()
        up[i] += steps[i]
        dn[i] -= steps[i]
        scores_z[:, i] = (contribs(up) - contribs(dn)) / (2.0 * steps[i])
    return scores_z @ scaling.A


def standard_errors(
    fit_or_theta, dataset: AlignedDataset, method: str = "hessian"
) -> np.ndarray:
    """Standard errors at a point, by inverse Hessian or sandwich."""
    theta = fit_or_theta.theta if isinstance(fit_or_theta, StructuralFit) else fit_or_theta
    hessian = loglik_hessian(theta, dataset)
    if method == "hessian":
        return standard_errors_from_hessian(hessian)
    if method == "sandwich":
        neg = -hessian
        eigvals = np.linalg.eigvalsh(neg)
        if np.any(eigvals <= 0.0):
            raise NumericalError(
                f"negative Hessian not positive definite; eigenvalues {eigvals}"
            )
        bread = np.linalg.inv(neg)
        scores = score_matrix(theta, dataset)
        meat = scores.T @ scores
        cov = bread @ meat @ bread
        return np.sqrt(np.diag(cov))
    raise NumericalError(f"unknown standard error method {method!r}")


def fit_mle(
    dataset: AlignedDataset,
    init: StructuralTheta | None = None,
    *,
    n_starts: int = 6,
    perturb: float = 0.15,
    seed: int = 0,
    maxiter: int = 1000,
    gtol: float = 1e-6,
    compute_se: bool = True,
    se_method: str = "hessian",
) -> StructuralFit:
    """Maximize the profile likelihood by multistart quasi-Newton search.

    The first start is the least-squares initializer (or `init` if
    given); the rest perturb it with seeded Gaussian noise.  AR
    coefficients are box-bounded away from the unit circle; the
    simultaneity constraint is enforced by penalty.

    Returns the best local optimum found.  `converged` reflects the
    optimizer status of the winning start; callers that require
    convergence should check it.
    """
    scaling = _Scaling(dataset)
    base = scaling.to_z((init or ols_start(dataset)).to_array())
    rng = np.random.default_rng(seed)
    starts = [base]
    scale = np.maximum(np.abs(base), 0.05)
    for _ in range(max(0, n_starts - 1)):
        cand = base + perturb * scale * rng.standard_normal(N_PARAMS)
        cand[7:] = np.clip(cand[7:], -0.9, 0.9)
        starts.append(cand)

    bounds = [(None, None)] * 7 + [(-_PHI_BOUND, _PHI_BOUND)] * 4

    def negloglik_z(z):
        return _penalized_negloglik(scaling.to_theta(z), dataset)

    def grad_z(z):
        theta = StructuralTheta.from_array(scaling.to_theta(z))
        if not theta.in_domain():
            return np.zeros(N_PARAMS)
        return _fd_gradient(negloglik_z, z, 6e-6)

    best = None
    for x0 in starts:
        res = optimize.minimize(
            negloglik_z,
            x0,
            jac=grad_z,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": maxiter, "ftol": 1e-13, "gtol": gtol},
        )
        if best is None or res.fun < best.fun:
            best = res

    theta = StructuralTheta.from_array(scaling.to_theta(best.x))
    if not theta.in_domain():
        raise ConvergenceError("optimizer terminated outside the parameter domain")
    eps, u = structural_residuals(theta, dataset)
    se = None
    if compute_se:
        se = standard_errors(theta, dataset, method=se_method)
    return StructuralFit(
        theta=theta,
        se=se,
        loglik=quasi_loglik(u),
        converged=bool(best.success),
        n_iter=int(best.nit),
        residuals_structural=eps,
        residuals_reduced=u,
        sigma_u=u.T @ u / len(u),
        T=len(u),
        years=dataset.years[2:],
        se_method=se_method,
    )


def lr_restricted_vs_benchmark(
    fit: StructuralFit, benchmark: VecmEstimate
) -> LrTestResult:
    """Likelihood-ratio test of the structural restrictions against the
    unrestricted rank-3 error-correction benchmark."""
    if benchmark.T != fit.T:
        raise SampleError(
            f"effective samples differ: benchmark T={benchmark.T}, structural T={fit.T}"
        )
    stat = 2.0 * (benchmark.loglik - fit.loglik)
    df = benchmark.n_free_params - N_PARAMS
    if df <= 0:
        raise SampleError(f"benchmark must nest the structure, df={df}")
    stat = max(stat, 0.0)
    return LrTestResult(
        hypothesis="structural_restrictions",
        variable=None,
        statistic=float(stat),
        df=df,
        p_value=float(stats.chi2.sf(stat, df)),
        loglik_restricted=fit.loglik,
        loglik_unrestricted=benchmark.loglik,
    )


def fitted_differences(fit: StructuralFit, dataset: AlignedDataset):
    """Actual and fitted first differences over the effective sample.

    Returns
    -------
    years : ndarray, T
    actual : ndarray, T x 4
    fitted : ndarray, T x 4
    """
    levels = dataset.levels()
    actual = np.diff(levels, axis=0)[1:]
    fitted = actual - fit.residuals_reduced
    return dataset.years[2:], actual, fitted


def simulate_structural(
    theta: StructuralTheta,
    n_years: int,
    sigma,
    *,
    seed: int = 0,
    soi: np.ndarray | None = None,
    start_year: int = 1959,
    c_initial: float = 670.0,
    e_initial: float = 10.0,
) -> AlignedDataset:
    """Simulate a dataset from the structural model.

    Parameters
    ----------
    sigma : array-like
        Structural shock scales: a length-4 vector of standard
        deviations or a full 4 x 4 covariance matrix.
    soi : ndarray, optional
        Exogenous SOI path (defaults to zero); it feeds the sink
        deviation processes through b3 and b4.

    Notes
    -----
    Deviation processes start from their stationary distribution, the
    carbon stock from `c_initial`.  The concentration equation is solved
    simultaneously with the sink equations each year.
    """
    theta.validate()
    if n_years < 4:
        raise SampleError(f"need at least 4 years, got {n_years}")
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape == (4,):
        cov = np.diag(sigma**2)
    elif sigma.shape == (4, 4):
        cov = sigma
    else:
        raise ParameterDomainError(f"sigma must be (4,) or (4,4), got {sigma.shape}")
    try:
        chol = np.linalg.cholesky(cov + 1e-30 * np.eye(4))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("shock covariance not positive definite") from exc

    rng = np.random.default_rng(seed)
    if soi is None:
        soi = np.zeros(n_years)
    soi = np.asarray(soi, dtype=float)
    if len(soi) != n_years:
        raise SampleError(f"soi path must have length {n_years}")

    phi = np.array([theta.phi1, theta.phi2, theta.phi3, theta.phi4])
    shocks = rng.standard_normal((n_years, 4)) @ chol.T
    # stationary initial deviations (shock variance only)
    marg_sd = np.sqrt(np.diag(cov) / (1.0 - phi**2))
    x = rng.standard_normal(4) * marg_sd
    x[0] += theta.b3 * soi[0]
    x[1] += theta.b4 * soi[0]

    c_det = theta.c
    sl = np.empty(n_years)
    so = np.empty(n_years)
    e = np.empty(n_years)
    conc = np.empty(n_years)

    e[0] = e_initial
    conc[0] = c_initial
    sl[0] = theta.a1 + theta.b1 * conc[0] + x[0]
    so[0] = theta.a2 + theta.b2 * conc[0] + x[1]

    for t in range(1, n_years):
        x = phi * x + shocks[t]
        x[0] += theta.b3 * soi[t]
        x[1] += theta.b4 * soi[t]
        e[t] = e[t - 1] + theta.d + x[2]
        conc[t] = (
            conc[t - 1] + e[t] - theta.a1 - theta.a2 - x[0] - x[1] + x[3]
        ) / c_det
        sl[t] = theta.a1 + theta.b1 * conc[t] + x[0]
        so[t] = theta.a2 + theta.b2 * conc[t] + x[1]

    years = np.arange(start_year, start_year + n_years)
    return AlignedDataset(
        years=years, land_sink=sl, ocean_sink=so, emissions=e,
        concentration=conc, soi=soi,
    )
