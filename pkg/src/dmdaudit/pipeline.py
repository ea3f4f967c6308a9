"""Workflow orchestration: excitation gate, then causality gate, then the
spectral fit with stability/conditioning/error diagnostics, plus the lag
sweep that locates the smallest usable embedding order."""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from .dmd import DmdModel, SpectrumReport, fit_dmd, fit_residual, forecast, reconstruct, spectrum_report
from .embedding import HankelPair, PeVerdict, TimeSeries, build_hankel, check_pe
from .granger import DEFAULT_ALPHA, DEFAULT_P_MAX, WaldResult, gct_pair
from .numerics import RankPolicy, rank_tolerance

__all__ = [
    "ConditionReport",
    "ValidationReport",
    "AnalysisReport",
    "SweepRecord",
    "SweepReport",
    "validate",
    "analyze",
    "sweep",
    "rmse",
    "split_series",
    "DEFAULT_ENERGY",
    "DEFAULT_SPLIT",
]

DEFAULT_ENERGY = 0.999
DEFAULT_SPLIT = 2.0 / 3.0


@dataclass(frozen=True)
class ConditionReport:
    """Largest-to-smallest singular-value ratio of the embedded data.

    When the smallest singular value falls below the rank tolerance the
    ratio is reported against the tolerance instead, with ``finite`` unset,
    so serialized reports never carry an infinity.
    """

    finite: bool
    value: float

    def to_dict(self) -> dict:
        return {"finite": self.finite, "value": self.value}


def _condition_report(xh: np.ndarray) -> ConditionReport:
    s = np.linalg.svd(xh, compute_uv=False)
    tol = rank_tolerance(s, xh.shape)
    smin = float(s[-1])
    if smin > tol:
        return ConditionReport(finite=True, value=float(s[0]) / smin)
    return ConditionReport(finite=False, value=float(s[0]) / tol if tol > 0 else float("inf"))


@dataclass(frozen=True)
class ValidationReport:
    """Combined verdict of the necessary (excitation) and sufficient
    (causality) conditions at one embedding order."""

    lag: int
    pe: PeVerdict
    gct_ran: bool
    gct_causal: bool | None
    gct: WaldResult | None
    condition: ConditionReport
    alpha: float

    @property
    def usable(self) -> bool:
        return self.pe.satisfied and bool(self.gct_causal)

    def to_dict(self) -> dict:
        return {
            "lag": self.lag,
            "pe": {
                "lag": self.pe.lag,
                "achieved_rank": self.pe.achieved_rank,
                "required_rank": self.pe.required_rank,
                "length_bound_ok": self.pe.length_bound_ok,
                "satisfied": self.pe.satisfied,
            },
            "gct": {
                "ran": self.gct_ran,
                "causal": self.gct_causal,
                "test": self.gct.to_dict() if self.gct is not None else None,
            },
            "condition_number": self.condition.to_dict(),
            "alpha": self.alpha,
            "usable": self.usable,
        }


def gate_series(pair: HankelPair) -> tuple[np.ndarray, np.ndarray]:
    """Representative past/future pair for the causality gate.

    The past series is the channel mean of the zero-delay block of x1 (the
    oldest sample each window sees); the future series is the channel mean
    of the deepest-delay block of x2 (the newest).  The two are offset by
    the full window length, so neither one's lags can coincide with the
    other's target as long as the test order stays below the lag.
    """
    n = pair.block_channels
    past = pair.x1[:n, :].mean(axis=0)
    future = pair.x2[-n:, :].mean(axis=0)
    return past, future


def _run_gct(
    pair: HankelPair,
    alpha: float,
    p: int | None,
    p_max: int,
    mode: str,
) -> tuple[bool, WaldResult | None]:
    if mode not in ("edge-mean", "per-row"):
        raise ValueError(f"unknown gct mode {mode!r}")
    lag_cap = pair.lag - 1
    p_max_eff = max(1, min(p_max, lag_cap))
    p_eff = None if p is None else max(1, min(p, lag_cap))
    if mode == "edge-mean":
        past, future = gate_series(pair)
        return gct_pair(past, future, alpha=alpha, p=p_eff, p_max=p_max_eff)
    n = pair.block_channels
    worst: WaldResult | None = None
    for row in range(n):
        causal, result = gct_pair(
            pair.x1[row, :], pair.x2[-n + row, :], alpha=alpha, p=p_eff, p_max=p_max_eff
        )
        if worst is None or result.p_value > worst.p_value:
            worst = result
        if not causal:
            return False, result
    return True, worst


def validate(
    ts: TimeSeries,
    lag: int,
    alpha: float = DEFAULT_ALPHA,
    p: int | None = None,
    p_max: int = DEFAULT_P_MAX,
    gct_mode: str = "edge-mean",
) -> ValidationReport:
    """Run the excitation check, then (only when it holds) the causality
    gate on the embedded pair, and report the conditioning of the embedding.

    At lag 1 the embedding carries no window at all, so the causality gate
    is reported as not-run and the record as not usable.
    """
    pe = check_pe(ts, lag)
    pair = build_hankel(ts, lag)
    condition = _condition_report(pair.xh)
    if not pe.satisfied or lag < 2:
        return ValidationReport(
            lag=lag, pe=pe, gct_ran=False, gct_causal=None, gct=None,
            condition=condition, alpha=alpha,
        )
    causal, result = _run_gct(pair, alpha=alpha, p=p, p_max=p_max, mode=gct_mode)
    return ValidationReport(
        lag=lag, pe=pe, gct_ran=True, gct_causal=causal, gct=result,
        condition=condition, alpha=alpha,
    )


def rmse(pred, actual) -> np.ndarray:
    """Per-channel root-mean-square prediction error over time."""
    pred = np.asarray(pred, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if pred.shape != actual.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {actual.shape}")
    if pred.ndim == 1:
        pred = pred[None, :]
        actual = actual[None, :]
    return np.sqrt(np.mean((pred - actual) ** 2, axis=1))


@dataclass(frozen=True)
class AnalysisReport:
    """Fit quality at one embedding order: spectrum, residual, and the
    train/test prediction errors per channel."""

    lag: int
    model: DmdModel
    spectrum: SpectrumReport
    train_rmse: np.ndarray
    test_rmse: np.ndarray
    residual: float

    def to_dict(self, include_model: bool = False) -> dict:
        doc = {
            "lag": self.lag,
            "rank": self.model.rank,
            "spectrum": self.spectrum.to_dict(),
            "train_rmse": self.train_rmse.tolist(),
            "test_rmse": self.test_rmse.tolist(),
            "fit_residual": self.residual,
        }
        if include_model:
            from .dmd import model_to_dict

            doc["model"] = model_to_dict(self.model)
        return doc


def split_series(ts: TimeSeries, fraction: float = DEFAULT_SPLIT) -> tuple[TimeSeries, TimeSeries]:
    """Time-ordered train/test split at the given training fraction."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    cut = int(round(ts.samples * fraction))
    cut = min(max(cut, 2), ts.samples - 2)
    return ts.window(0, cut), ts.window(cut, ts.samples)


def analyze(
    ts_train: TimeSeries,
    ts_test: TimeSeries,
    lag: int,
    policy: RankPolicy | None = None,
    alpha: float = DEFAULT_ALPHA,
    p: int | None = None,
    p_max: int = DEFAULT_P_MAX,
    gct_mode: str = "edge-mean",
    amplitude_mode: str = "lstsq",
    recon_mode: str = "mean",
) -> tuple[ValidationReport, AnalysisReport]:
    """Validate the training record, fit the spectral model on it, replay the
    training window, and forecast through the held-out horizon.

    Mode amplitudes default to the least-squares fit over every snapshot and
    the replay averages all delayed estimates of each sample; both choices
    damp the replay's sensitivity to noise in any single column.
    """
    if ts_train.channels != ts_test.channels:
        raise ValueError("train and test records must share the channel count")
    if ts_train.dt != ts_test.dt:
        raise ValueError("train and test records must share the sampling interval")
    if policy is None:
        policy = RankPolicy.from_energy(DEFAULT_ENERGY)
    validation = validate(ts_train, lag, alpha=alpha, p=p, p_max=p_max, gct_mode=gct_mode)
    pair = build_hankel(ts_train, lag)
    model = fit_dmd(pair.x1, pair.x2, ts_train.dt, policy, lag=lag, amplitude_mode=amplitude_mode)
    train_pred = reconstruct(model, ts_train.samples, mode=recon_mode)
    test_pred = forecast(model, ts_train.samples, ts_test.samples)
    report = AnalysisReport(
        lag=lag,
        model=model,
        spectrum=spectrum_report(model),
        train_rmse=rmse(train_pred, ts_train.data),
        test_rmse=rmse(test_pred, ts_test.data),
        residual=fit_residual(model, pair.x1, pair.x2),
    )
    return validation, report


@dataclass(frozen=True)
class SweepRecord:
    lag: int
    validation: ValidationReport | None
    analysis: AnalysisReport | None
    error: str | None

    def to_dict(self) -> dict:
        return {
            "lag": self.lag,
            "validation": self.validation.to_dict() if self.validation else None,
            "analysis": self.analysis.to_dict() if self.analysis else None,
            "error": self.error,
        }


@dataclass(frozen=True)
class SweepReport:
    """Per-lag validation/analysis records over a lag range, with the
    smallest usable lag and flat columns ready for plotting."""

    records: tuple[SweepRecord, ...]
    alpha: float

    @property
    def l_star(self) -> int | None:
        for rec in self.records:
            if rec.validation is not None and rec.validation.usable:
                return rec.lag
        return None

    def columns(self) -> dict[str, list]:
        cols: dict[str, list] = {
            "lag": [], "pe_satisfied": [], "gct_ran": [], "gct_causal": [],
            "p_value": [], "statistic": [], "condition_number": [],
            "condition_finite": [], "usable": [], "max_eig_magnitude": [],
            "train_rmse_mean": [], "test_rmse_mean": [], "error": [],
        }
        for rec in self.records:
            v, a = rec.validation, rec.analysis
            cols["lag"].append(rec.lag)
            cols["error"].append(rec.error or "")
            cols["pe_satisfied"].append(None if v is None else v.pe.satisfied)
            cols["gct_ran"].append(None if v is None else v.gct_ran)
            cols["gct_causal"].append(None if v is None else v.gct_causal)
            cols["p_value"].append(None if v is None or v.gct is None else v.gct.p_value)
            cols["statistic"].append(None if v is None or v.gct is None else v.gct.statistic)
            cols["condition_number"].append(None if v is None else v.condition.value)
            cols["condition_finite"].append(None if v is None else v.condition.finite)
            cols["usable"].append(None if v is None else v.usable)
            cols["max_eig_magnitude"].append(None if a is None else a.spectrum.max_magnitude)
            cols["train_rmse_mean"].append(None if a is None else float(np.mean(a.train_rmse)))
            cols["test_rmse_mean"].append(None if a is None else float(np.mean(a.test_rmse)))
        return cols

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "l_star": self.l_star,
            "records": [rec.to_dict() for rec in self.records],
        }


def sweep(
    ts_train: TimeSeries,
    ts_test: TimeSeries,
    l_min: int,
    l_max: int,
    policy: RankPolicy | None = None,
    alpha: float = DEFAULT_ALPHA,
    p: int | None = None,
    p_max: int = DEFAULT_P_MAX,
    gct_mode: str = "edge-mean",
    amplitude_mode: str = "lstsq",
    recon_mode: str = "mean",
) -> SweepReport:
    """Run ``analyze`` at every lag in [l_min, l_max].

    Per-lag failures are recorded and the sweep continues, so reports keep
    their failing rows.
    """
    if not 1 <= l_min <= l_max:
        raise ValueError(f"invalid lag range [{l_min}, {l_max}]")
    records = []
    for lag in range(l_min, l_max + 1):
        try:
            validation, analysis = analyze(
                ts_train, ts_test, lag,
                policy=policy, alpha=alpha, p=p, p_max=p_max, gct_mode=gct_mode,
                amplitude_mode=amplitude_mode, recon_mode=recon_mode,
            )
            records.append(SweepRecord(lag=lag, validation=validation, analysis=analysis, error=None))
        except Exception as exc:  # keep sweeping; the row reports its failure
            records.append(SweepRecord(lag=lag, validation=None, analysis=None, error=str(exc)))
    return SweepReport(records=tuple(records), alpha=alpha)
