"""Truncated-rank spectral fit of the one-step operator between a snapshot
matrix and its shifted pair, plus prediction, reconstruction, and spectral
diagnostics.

The reduced operator is the projection of the least-squares one-step map
onto the leading left singular subspace of the first snapshot matrix; the
full-dimension modes are reconstructed from its eigendecomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RankPolicy, as_matrix, frobenius_norm, numeric_rank, pinv, svd_truncate

__all__ = [
    "DmdModel",
    "EigenRecord",
    "SpectrumReport",
    "fit_dmd",
    "predict",
    "reconstruct",
    "forecast",
    "fit_residual",
    "spectrum_report",
    "model_to_dict",
    "model_from_dict",
]

UNIT_CIRCLE_TOL = 1e-6


@dataclass(frozen=True)
class DmdModel:
    """Rank-r spectral model of the one-step dynamics.

    Eigenvalues are ordered by non-increasing magnitude, ties broken by
    amplitude magnitude; conjugate pairs therefore sit adjacent.  The left
    singular basis of the fit is kept so the training residual can be
    re-evaluated; it is not part of the serialized form.
    """

    rank: int
    reduced_op: np.ndarray
    eigenvalues: np.ndarray
    modes: np.ndarray
    amplitudes: np.ndarray
    cont_exponents: np.ndarray
    dt: float
    lag: int
    pod_basis: np.ndarray | None = None

    @property
    def block_channels(self) -> int:
        return self.modes.shape[0] // self.lag


def fit_dmd(
    x1,
    x2,
    dt: float,
    policy: RankPolicy,
    lag: int = 1,
    amplitude_mode: str = "first",
) -> DmdModel:
    """Fit the rank-truncated one-step operator mapping x1 onto x2.

    The reduced operator is U* x2 V S^{-1} from the truncated SVD of x1;
    modes are lifted as x2 V S^{-1} W.  Amplitudes come from the first
    snapshot through the mode pseudoinverse, or from a least-squares fit
    over every snapshot with ``amplitude_mode="lstsq"``.
    """
    x1 = as_matrix(x1, "x1")
    x2 = as_matrix(x2, "x2")
    if x1.shape != x2.shape:
        raise ValueError(f"snapshot shapes differ: {x1.shape} vs {x2.shape}")
    if x1.shape[1] < 2:
        raise ValueError("need at least 2 snapshot columns")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not np.any(x1):
        raise ValueError("x1 is numerically zero")
    if amplitude_mode not in ("first", "lstsq"):
        raise ValueError(f"unknown amplitude mode {amplitude_mode!r}")

    svd = svd_truncate(x1, policy)
    if policy.rank is not None and svd.rank < policy.rank:
        raise ValueError(
            f"rank policy {policy.rank} exceeds the numerical rank {svd.rank} of the data"
        )
    s_inv = 1.0 / svd.s
    projected = x2 @ (svd.v * s_inv)
    atilde = svd.u.conj().T @ projected
    eigvals, w = np.linalg.eig(atilde)
    modes = projected @ w
    if np.min(np.linalg.norm(modes, axis=0)) == 0.0:
        raise ValueError("degenerate fit: a mode column is exactly zero")

    if amplitude_mode == "first":
        amplitudes = pinv(modes) @ x1[:, 0]
    else:
        k = x1.shape[1]
        powers = eigvals[None, :] ** np.arange(k)[:, None]  # (k, r)
        stacked = (modes[None, :, :] * powers[:, None, :]).reshape(k * modes.shape[0], -1)
        amplitudes = pinv(stacked) @ x1.T.reshape(-1)

    order = np.lexsort((-eigvals.real, -eigvals.imag, -np.abs(amplitudes), -np.abs(eigvals)))
    eigvals = eigvals[order]
    modes = modes[:, order]
    amplitudes = amplitudes[order]
    with np.errstate(divide="ignore", invalid="ignore"):
        cont = np.log(eigvals.astype(complex)) / dt
    return DmdModel(
        rank=svd.rank,
        reduced_op=atilde,
        eigenvalues=eigvals,
        modes=modes,
        amplitudes=amplitudes,
        cont_exponents=cont,
        dt=dt,
        lag=lag,
        pod_basis=svd.u,
    )


def predict(model: DmdModel, times) -> np.ndarray:
    """Evaluate the modal sum at the given times (seconds, >= 0).

    Returns the real part; on real training data the eigenvalues come in
    conjugate pairs, so the imaginary residue is numerical noise.
    """
    t = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if np.any(t < 0):
        raise ValueError("prediction times must be nonnegative")
    dynamics = np.exp(np.outer(model.cont_exponents, t)) * model.amplitudes[:, None]
    return np.real(model.modes @ dynamics)


def reconstruct(model: DmdModel, n_steps: int, mode: str = "first-block") -> np.ndarray:
    """Channel-space trajectory over the first ``n_steps`` sample times.

    The embedded prediction is collapsed back to the n physical channels
    either by reading the zero-delay block (exact for a self-consistent
    model) or by averaging every delayed estimate of each sample
    (``mode="mean"``).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if mode not in ("first-block", "mean"):
        raise ValueError(f"unknown de-embedding mode {mode!r}")
    emb = predict(model, np.arange(n_steps) * model.dt)
    n = model.block_channels
    if mode == "first-block" or model.lag == 1:
        return emb[:n, :]
    out = np.zeros((n, n_steps))
    counts = np.zeros(n_steps)
    for d in range(model.lag):
        block = emb[d * n : (d + 1) * n, :]
        lo, hi = d, n_steps
        if lo >= hi:
            break
        out[:, lo:hi] += block[:, : hi - lo]
        counts[lo:hi] += 1.0
    return out / counts


def forecast(model: DmdModel, start_step: int, n_steps: int) -> np.ndarray:
    """Channel-space prediction for sample indices start_step .. +n_steps-1."""
    if start_step < 0 or n_steps < 1:
        raise ValueError("start_step must be >= 0 and n_steps >= 1")
    times = (start_step + np.arange(n_steps)) * model.dt
    emb = predict(model, times)
    return emb[: model.block_channels, :]


def fit_residual(model: DmdModel, x1, x2) -> float:
    """Frobenius norm of x2 minus the lifted reduced operator applied to x1."""
    if model.pod_basis is None:
        raise ValueError("model was deserialized without its projection basis")
    x1 = as_matrix(x1, "x1")
    x2 = as_matrix(x2, "x2")
    if x1.shape != x2.shape or x1.shape[0] != model.pod_basis.shape[0]:
        raise ValueError("snapshot shapes do not match the fitted embedding")
    u = model.pod_basis
    lifted = u @ (model.reduced_op @ (u.conj().T @ x1))
    return frobenius_norm(x2 - lifted)


@dataclass(frozen=True)
class EigenRecord:
    eigenvalue: complex
    magnitude: float
    inside_unit_circle: bool
    cont_exponent: complex
    growth_rate: float
    frequency_hz: float


@dataclass(frozen=True)
class SpectrumReport:
    """Per-eigenvalue stability view of a fitted model.

    Frequencies use the principal log branch, so content above the Nyquist
    rate 1/(2 dt) appears aliased.
    """

    records: tuple[EigenRecord, ...]
    unit_circle_tol: float = UNIT_CIRCLE_TOL

    @property
    def all_inside(self) -> bool:
        return all(r.inside_unit_circle for r in self.records)

    @property
    def max_magnitude(self) -> float:
        return max(r.magnitude for r in self.records)

    def to_dict(self) -> dict:
        return {
            "unit_circle_tol": self.unit_circle_tol,
            "all_inside": self.all_inside,
            "eigenvalues": [
                {
                    "re": r.eigenvalue.real,
                    "im": r.eigenvalue.imag,
                    "magnitude": r.magnitude,
                    "inside_unit_circle": r.inside_unit_circle,
                    "growth_rate": _json_safe(r.growth_rate),
                    "frequency_hz": _json_safe(r.frequency_hz),
                }
                for r in self.records
            ],
        }


def _json_safe(x: float):
    return float(x) if math.isfinite(x) else None


def spectrum_report(model: DmdModel) -> SpectrumReport:
    records = []
    for lam, omega in zip(model.eigenvalues, model.cont_exponents):
        mag = abs(lam)
        records.append(
            EigenRecord(
                eigenvalue=complex(lam),
                magnitude=float(mag),
                inside_unit_circle=bool(mag <= 1.0 + UNIT_CIRCLE_TOL),
                cont_exponent=complex(omega),
                growth_rate=float(omega.real),
                frequency_hz=float(omega.imag / (2.0 * np.pi)),
            )
        )
    return SpectrumReport(records=tuple(records))


def model_to_dict(model: DmdModel) -> dict:
    """Serializable form: rank, dt, lag, eigenvalues, modes, amplitudes.

    Complex values are stored as [re, im] pairs.  The projection basis is
    deliberately omitted; a reloaded model predicts and reconstructs but
    cannot re-evaluate the training residual.
    """
    return {
        "schema_version": 1,
        "rank": model.rank,
        "dt": model.dt,
        "lag": model.lag,
        "eigenvalues": [[z.real, z.imag] for z in model.eigenvalues],
        "modes": [[[z.real, z.imag] for z in row] for row in model.modes],
        "amplitudes": [[z.real, z.imag] for z in model.amplitudes],
    }


def model_from_dict(doc: dict) -> DmdModel:
    eigvals = np.array([complex(re, im) for re, im in doc["eigenvalues"]])
    modes = np.array([[complex(re, im) for re, im in row] for row in doc["modes"]])
    amplitudes = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    dt = float(doc["dt"])
    with np.errstate(divide="ignore", invalid="ignore"):
        cont = np.log(eigvals) / dt
    return DmdModel(
        rank=int(doc["rank"]),
        reduced_op=np.zeros((0, 0)),
        eigenvalues=eigvals,
        modes=modes,
        amplitudes=amplitudes,
        cont_exponents=cont,
        dt=dt,
        lag=int(doc["lag"]),
        pod_basis=None,
    )
