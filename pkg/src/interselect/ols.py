"""Ordinary least squares with the inference statistics the searches need.

Fitting uses a column-pivoted QR decomposition so exactly collinear columns
(inevitable once crossed one-hot features meet their base features) are
detected and reported as aliased rather than blowing up the solve. Aliased
columns get coefficient 0, no standard error, and p-value 1.0 so that
backward elimination discards them first.

Conventions (chosen to match mainstream statistics packages):
  * log-likelihood is the Gaussian ML value with sigma^2 = SS_res / n,
  * standard errors use the unbiased sigma^2 = SS_res / (n - rank),
  * AIC = 2 * rank - 2 * log_likelihood (the noise variance parameter is
    not counted; only AIC differences matter to the stopping rules).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = ["FitSummary", "fit", "t_tail_two_sided"]

# relative tolerance on pivoted-QR diagonal magnitudes for rank detection
_RANK_RTOL = 1e-10


def _incomplete_beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    ITMAX = 2000
    EPS = 1e-15
    FPMIN = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, ITMAX + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )


def _reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(log_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _incomplete_beta_cf(a, b, x) / a
    return 1.0 - bt * _incomplete_beta_cf(b, a, 1.0 - x) / b


def t_tail_two_sided(t: float, dof: float) -> float:
    """Two-sided Student-t tail probability 2*P(T >= |t|).

    Evaluated as I_x(dof/2, 1/2) with x = dof / (dof + t^2); absolute error
    is below 1e-10 for dof up to 1e6.
    """
    if not dof > 0:
        raise ValueError(f"degrees of freedom must be positive, got {dof}")
    if math.isnan(t):
        return math.nan
    x = dof / (dof + t * t)  # t = +-inf gives x = 0, hence p = 0
    return _reg_inc_beta(0.5 * dof, 0.5, x)


@dataclass(frozen=True)
class FitSummary:
    """Coefficients and summary statistics of one least-squares fit."""

    coefficients: np.ndarray
    std_errors: np.ndarray  # NaN for aliased columns or when dof = 0
    p_values: np.ndarray  # 1.0 for aliased columns, NaN when dof = 0
    r_squared: float
    mse: float  # SS_res / n
    log_likelihood: float
    aic: float
    n: int
    rank: int
    aliased: frozenset[int] = field(default_factory=frozenset)
    sstot_zero: bool = False  # constant target: R^2 defined as 0

    @property
    def dof(self) -> int:
        """Residual degrees of freedom."""
        return self.n - self.rank

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rank": self.rank,
            "r_squared": self.r_squared,
            "mse": self.mse,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "coefficients": [float(v) for v in self.coefficients],
            "std_errors": [float(v) for v in self.std_errors],
            "p_values": [float(v) for v in self.p_values],
            "aliased": sorted(self.aliased),
            "sstot_zero": self.sstot_zero,
        }


def fit(design, y) -> FitSummary:
    """Least-squares fit of ``y`` on a design matrix.

    ``design`` may be a DesignMatrix or a plain (n, p) array that already
    contains any intercept column. Coefficients minimize the residual norm;
    columns found linearly dependent at the pivoted-QR rank tolerance are
    aliased (coefficient 0). Standard errors and p-values require positive
    residual degrees of freedom and are NaN otherwise.
    """
    X = np.asarray(getattr(design, "values", design), dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("design must be two-dimensional")
    n, p = X.shape
    if p < 1:
        raise ValueError("design has no columns")
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    if y.shape != (n,):
        raise ValueError(f"y must have shape ({n},)")

    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] <= 0.0:
        raise ValueError("design is entirely aliased (all columns are zero)")
    rank = int(np.count_nonzero(diag > _RANK_RTOL * diag[0]))
    keep = piv[:rank]
    aliased = frozenset(int(j) for j in piv[rank:])

    qty = Q.T @ y
    beta = scipy.linalg.solve_triangular(R[:rank, :rank], qty[:rank], lower=False)
    coef = np.zeros(p)
    coef[keep] = beta

    resid = y - X[:, keep] @ beta
    ss_res = float(resid @ resid)
    ybar = float(y.mean())
    ss_tot = float(((y - ybar) ** 2).sum())
    sstot_zero = ss_tot <= 0.0
    r_squared = 0.0 if sstot_zero else 1.0 - ss_res / ss_tot
    mse = ss_res / n
    if ss_res > 0.0:
        log_likelihood = -0.5 * n * (math.log(2.0 * math.pi * ss_res / n) + 1.0)
    else:
        log_likelihood = math.inf  # perfect fit: ML density degenerates
    aic = 2.0 * rank - 2.0 * log_likelihood

    std_err = np.full(p, np.nan)
    p_values = np.full(p, np.nan)
    p_values[list(aliased)] = 1.0
    dof = n - rank
    if dof > 0:
        sigma2 = ss_res / dof
        rinv = scipy.linalg.solve_triangular(
            R[:rank, :rank], np.eye(rank), lower=False
        )
        xtx_inv_diag = (rinv * rinv).sum(axis=1)
        se = np.sqrt(sigma2 * xtx_inv_diag)
        std_err[keep] = se
        for j, s in zip(keep, se):
            if s > 0.0:
                p_values[j] = t_tail_two_sided(coef[j] / s, dof)
            else:  # perfect fit: zero residual variance
                p_values[j] = 0.0 if coef[j] != 0.0 else 1.0

    return FitSummary(
        coefficients=coef,
        std_errors=std_err,
        p_values=p_values,
        r_squared=r_squared,
        mse=mse,
        log_likelihood=log_likelihood,
        aic=aic,
        n=n,
        rank=rank,
        aliased=aliased,
        sstot_zero=sstot_zero,
    )
