"""Granger-causality machinery: the prediction-error variance index, the
Wald restriction test on VAR coefficients, and the pairwise binary
causality matrix."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import chi2_sf
from .var import VarModel, fit_var, select_order

__all__ = [
    "GciResult",
    "WaldResult",
    "CausalityMatrix",
    "gci",
    "wald_test",
    "causality_matrix",
    "gct_pair",
]

DEFAULT_ALPHA = 0.05
DEFAULT_P_MAX = 10


@dataclass(frozen=True)
class GciResult:
    """Log-ratio of restricted to unrestricted prediction-error variance."""

    value: float
    var_restricted: float
    var_unrestricted: float
    order: int


@dataclass(frozen=True)
class WaldResult:
    """Wald test of the joint hypothesis that every lag coefficient routing
    one source channel into one target equation is zero."""

    statistic: float
    df: int
    p_value: float
    reject_null: bool
    alpha: float
    restriction: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "reject_null": self.reject_null,
            "alpha": self.alpha,
            "restriction": list(self.restriction),
        }


@dataclass(frozen=True)
class CausalityMatrix:
    """Pairwise test results: entry (i, j) concerns whether channel j
    drives channel i.  The diagonal is excluded by convention."""

    dims: int
    binary: np.ndarray
    stats: np.ndarray
    pvals: np.ndarray
    alpha: float
    order: int

    def to_dict(self) -> dict:
        return {
            "dims": self.dims,
            "binary": self.binary.tolist(),
            "stats": self.stats.tolist(),
            "pvals": self.pvals.tolist(),
            "alpha": self.alpha,
            "order": self.order,
        }


def _as_series(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size < 3:
        raise ValueError(f"{name} is too short ({arr.size} samples)")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def _ols_residual_variance(target: np.ndarray, regressors: np.ndarray) -> float:
    """In-sample residual variance (SSR / T) of an OLS fit."""
    beta, *_ = np.linalg.lstsq(regressors.T, target, rcond=None)
    resid = target - regressors.T @ beta
    return float(resid @ resid) / target.size


def gci(x, y, p: int) -> GciResult:
    """Causality index of y onto x from the order-p error variances.

    Fits x on its own p lags (restricted) and on its own plus y's p lags
    (unrestricted), both with an intercept over the same window, and
    returns the log variance ratio.  Zero means y's past adds nothing.
    """
    x = _as_series(x, "x")
    y = _as_series(y, "y")
    if x.size != y.size:
        raise ValueError(f"series lengths differ: {x.size} vs {y.size}")
    if p < 1:
        raise ValueError("order must be >= 1")
    if x.size <= 2 * p + 2:
        raise ValueError(f"need more than {2 * p + 2} samples for order {p}, got {x.size}")
    t0 = p
    target = x[t0:]
    ones = np.ones((1, target.size))
    own = np.vstack([x[t0 - k : x.size - k] for k in range(1, p + 1)])
    other = np.vstack([y[t0 - k : y.size - k] for k in range(1, p + 1)])
    var_r = _ols_residual_variance(target, np.vstack([ones, own]))
    var_u = _ols_residual_variance(target, np.vstack([ones, own, other]))
    scale = max(float(target @ target) / target.size, 1e-300)
    if var_r <= 1e-25 * scale or var_u <= 1e-25 * scale:
        raise ValueError("degenerate regression: residual variance is numerically zero")
    return GciResult(
        value=float(np.log(var_r / var_u)),
        var_restricted=var_r,
        var_unrestricted=var_u,
        order=p,
    )


def _lag_indices(model: VarModel, i: int, j: int) -> list[int]:
    offset = 1 if model.with_intercept else 0
    return [offset + k * model.dims + j for k in range(model.order)]


def wald_test(model: VarModel, i: int, j: int, alpha: float = DEFAULT_ALPHA) -> WaldResult:
    """Test H0: (A_k)_ij = 0 for all k, with one degree of freedom per lag.

    The covariance of the stacked coefficient estimates is
    residual_cov (x) Gram^{-1}; the tested block is sigma_ii times the
    (j-lag, j-lag) submatrix of the Gram inverse.
    """
    n = model.dims
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"channel indices must lie in [0, {n}), got ({i}, {j})")
    if i == j:
        raise ValueError("self-causality (i == j) is excluded from the test")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    beta = np.array([model.coeffs[k][i, j] for k in range(model.order)])
    idx = _lag_indices(model, i, j)
    try:
        gram_inv = np.linalg.inv(model.regressor_gram)
    except np.linalg.LinAlgError:
        # collinear regressors (e.g. one series is a shifted copy of the
        # other): stay consistent with the minimum-norm fit
        warnings.warn(
            "singular regressor Gram; using its pseudoinverse for the Wald covariance",
            RuntimeWarning,
            stacklevel=2,
        )
        gram_inv = np.linalg.pinv(model.regressor_gram)
    avar = model.residual_cov[i, i] * gram_inv[np.ix_(idx, idx)]
    try:
        stat = float(beta @ np.linalg.solve(avar, beta))
    except np.linalg.LinAlgError:
        raise ValueError("non-identified restriction: singular coefficient covariance") from None
    if not np.isfinite(stat) or stat < 0:
        raise ValueError("non-identified restriction: ill-conditioned coefficient covariance")
    p_value = chi2_sf(stat, model.order)
    return WaldResult(
        statistic=stat,
        df=model.order,
        p_value=p_value,
        reject_null=bool(p_value < alpha),
        alpha=alpha,
        restriction=tuple(float(b) for b in beta),
    )


def causality_matrix(
    series,
    p: int | None = None,
    alpha: float = DEFAULT_ALPHA,
    p_max: int = DEFAULT_P_MAX,
    criterion: str = "bic",
) -> CausalityMatrix:
    """Pairwise Wald tests from one joint VAR fit.

    ``p=None`` selects the order by the given criterion first.  Entry
    (i, j) of ``binary`` is 1 when the null of noncausality j -> i is
    rejected at ``alpha``.
    """
    from .var import _as_data  # local import to keep the public surface tidy

    data = _as_data(series)
    n = data.shape[0]
    if n < 2:
        raise ValueError("need at least 2 channels for pairwise causality")
    if p is None:
        p = select_order(data, p_max=p_max, criterion=criterion).chosen
    model = fit_var(data, p)
    stats = np.zeros((n, n))
    pvals = np.ones((n, n))
    binary = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            res = wald_test(model, i, j, alpha=alpha)
            stats[i, j] = res.statistic
            pvals[i, j] = res.p_value
            binary[i, j] = int(res.reject_null)
    return CausalityMatrix(dims=n, binary=binary, stats=stats, pvals=pvals, alpha=alpha, order=p)


def gct_pair(
    x1_series,
    x2_series,
    alpha: float = DEFAULT_ALPHA,
    p: int | None = None,
    p_max: int = DEFAULT_P_MAX,
) -> tuple[bool, WaldResult]:
    """Does the second series Granger-cause the first?

    Fits one bivariate VAR (order from BIC when not given) and Wald-tests
    the lags of series 2 inside series 1's equation.  Returns the verdict
    (True = causality detected) with the full test result.
    """
    x1 = _as_series(x1_series, "x1_series")
    x2 = _as_series(x2_series, "x2_series")
    if x1.size != x2.size:
        raise ValueError(f"series lengths differ: {x1.size} vs {x2.size}")
    data = np.vstack([x1, x2])
    if p is None:
        # keep the selection feasible for short series
        feasible = (x1.size - 1) // 4
        p_max_eff = max(1, min(p_max, feasible))
        p = select_order(data, p_max=p_max_eff, criterion="bic").chosen
    model = fit_var(data, p)
    result = wald_test(model, 0, 1, alpha=alpha)
    return result.reject_null, result
