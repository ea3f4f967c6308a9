"""Vector-autoregression estimation by least squares, information-criterion
order selection, and companion-polynomial stability checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .embedding import TimeSeries

__all__ = [
    "VarModel",
    "OrderSelection",
    "StabilityCheck",
    "fit_var",
    "select_order",
    "check_var_stability",
    "residuals",
    "companion_matrix",
]


@dataclass(frozen=True)
class VarModel:
    """Order-p vector autoregression fitted by per-equation OLS.

    ``coeffs`` stacks the lag matrices as (p, n, n); ``regressor_gram`` is
    Z Z^T over the effective sample for the stacked regressor vector
    [1, x(t-1), ..., x(t-p)] (the leading 1 only when fitted with an
    intercept).  The Gram is retained because the Wald covariance of the
    coefficient estimates is residual_cov (x) Gram^{-1}.
    """

    order: int
    dims: int
    coeffs: np.ndarray
    intercept: np.ndarray
    residual_cov: np.ndarray
    effective_samples: int
    regressor_gram: np.ndarray
    with_intercept: bool

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "dims": self.dims,
            "coefficients": [c.tolist() for c in self.coeffs],
            "intercept": self.intercept.tolist(),
            "residual_cov": self.residual_cov.tolist(),
            "effective_samples": self.effective_samples,
            "with_intercept": self.with_intercept,
        }


@dataclass(frozen=True)
class OrderSelection:
    criterion: str
    orders: tuple[int, ...]
    scores: tuple[float, ...]
    chosen: int


@dataclass(frozen=True)
class StabilityCheck:
    stable: bool
    root_magnitudes: np.ndarray


def _as_data(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.data
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"series must be 1-D or 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains non-finite samples")
    return arr


def _lagged_regressors(data: np.ndarray, p: int, with_intercept: bool, start: int):
    """Targets x_t and stacked regressors z_t for t = start .. m-1."""
    n, m = data.shape
    target = data[:, start:]
    t_eff = m - start
    rows = [np.ones((1, t_eff))] if with_intercept else []
    for lag in range(1, p + 1):
        rows.append(data[:, start - lag : m - lag])
    z = np.vstack(rows)
    return target, z


def fit_var(series, p: int, with_intercept: bool = True, _start: int | None = None) -> VarModel:
    """Least-squares fit of a VAR(p).

    Coefficients minimize the summed squared one-step residuals over
    t = p+1 .. m.  The residual covariance uses the degrees-of-freedom
    divisor T - (number of regressors).  A rank-deficient regressor matrix
    is resolved by the minimum-norm solution with a warning so degenerate
    inputs still yield reports.

    ``_start`` overrides the first predicted sample index (used by
    ``select_order`` to score every order on one common window).
    """
    data = _as_data(series)
    n, m = data.shape
    if p < 1:
        raise ValueError(f"order must be >= 1, got {p}")
    start = p if _start is None else _start
    if start < p:
        raise ValueError(f"start {start} leaves fewer than {p} presample values")
    q = n * p + (1 if with_intercept else 0)
    t_eff = m - start
    if t_eff <= q:
        raise ValueError(
            f"insufficient samples: {t_eff} effective rows for {q} regressors "
            f"(need m > {q + start})"
        )
    target, z = _lagged_regressors(data, p, with_intercept, start)
    gram = z @ z.T
    rank = np.linalg.matrix_rank(gram)
    if rank < q:
        warnings.warn(
            f"rank-deficient regressors (rank {rank} < {q}); "
            "coefficients are the minimum-norm least-squares solution",
            RuntimeWarning,
            stacklevel=2,
        )
        beta = target @ np.linalg.pinv(z)
    else:
        beta = np.linalg.solve(gram, z @ target.T).T
    resid = target - beta @ z
    sigma = (resid @ resid.T) / (t_eff - q)
    sigma = 0.5 * (sigma + sigma.T)
    if with_intercept:
        intercept = beta[:, 0].copy()
        lag_part = beta[:, 1:]
    else:
        intercept = np.zeros(n)
        lag_part = beta
    coeffs = np.stack([lag_part[:, k * n : (k + 1) * n] for k in range(p)])
    return VarModel(
        order=p,
        dims=n,
        coeffs=coeffs,
        intercept=intercept,
        residual_cov=sigma,
        effective_samples=t_eff,
        regressor_gram=gram,
        with_intercept=with_intercept,
    )


def residuals(model: VarModel, series) -> np.ndarray:
    """One-step residuals x_t - c - sum_k A_k x_{t-k} for t = p+1 .. m."""
    data = _as_data(series)
    if data.shape[0] != model.dims:
        raise ValueError(f"series has {data.shape[0]} channels, model expects {model.dims}")
    target, z = _lagged_regressors(data, model.order, model.with_intercept, model.order)
    beta = [model.intercept[:, None]] if model.with_intercept else []
    beta.extend(model.coeffs[k] for k in range(model.order))
    return target - np.hstack(beta) @ z


def _logdet_psd(sigma: np.ndarray) -> float:
    eigs = np.linalg.eigvalsh(sigma)
    return float(np.sum(np.log(np.maximum(eigs, 1e-300))))


def select_order(series, p_max: int, criterion: str = "bic", with_intercept: bool = True) -> OrderSelection:
    """Score orders 1..p_max by AIC or BIC on a common sample window.

    AIC(p) = ln det Sigma_p + 2 p n^2 / T and
    BIC(p) = ln det Sigma_p + ln(T) p n^2 / T, with T the effective sample
    count at p_max so the scores are comparable across orders.  Ties break
    toward the smaller order.
    """
    crit = criterion.lower()
    if crit not in ("aic", "bic"):
        raise ValueError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    data = _as_data(series)
    n, m = data.shape
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    t_eff = m - p_max
    scores = []
    for p in range(1, p_max + 1):
        model = fit_var(data, p, with_intercept=with_intercept, _start=p_max)
        logdet = _logdet_psd(model.residual_cov)
        penalty = p * n * n / t_eff * (2.0 if crit == "aic" else math.log(t_eff))
        scores.append(logdet + penalty)
    chosen = 1 + min(range(len(scores)), key=lambda k: (scores[k], k))
    return OrderSelection(
        criterion=crit,
        orders=tuple(range(1, p_max + 1)),
        scores=tuple(scores),
        chosen=chosen,
    )


def companion_matrix(coeffs: np.ndarray) -> np.ndarray:
    """Companion form of the lag stack (p, n, n) -> (np, np)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    p, n, _ = coeffs.shape
    top = np.hstack(list(coeffs))
    if p == 1:
        return top
    lower = np.hstack([np.eye(n * (p - 1)), np.zeros((n * (p - 1), n))])
    return np.vstack([top, lower])


def check_var_stability(model: VarModel, margin: float = 1e-10) -> StabilityCheck:
    """Stable iff every companion eigenvalue magnitude is below 1 - margin."""
    mags = np.abs(np.linalg.eigvals(companion_matrix(model.coeffs)))
    mags = np.sort(mags)[::-1]
    return StabilityCheck(stable=bool(np.all(mags < 1.0 - margin)), root_magnitudes=mags)
