"""Dense linear-algebra and statistics kernels shared across the package.

Matrix factorizations are thin, contract-checked layers over LAPACK (via
numpy).  The chi-square survival function is evaluated directly from the
regularized upper incomplete gamma function so arbitrary test statistics can
be mapped to p-values without table lookup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RankPolicy",
    "SvdTruncation",
    "pinv",
    "svd_truncate",
    "numeric_rank",
    "condition_number",
    "frobenius_norm",
    "chi2_sf",
]

_EPS = float(np.finfo(np.float64).eps)


def as_matrix(a, name: str = "a") -> np.ndarray:
    """Coerce to a validated 2-D float64/complex128 array."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def rank_tolerance(singular_values: np.ndarray, shape: tuple[int, int]) -> float:
    """Cutoff below which singular values are treated as zero.

    Uses the standard numerical-rank convention max(m, n) * eps * s_max.
    """
    if singular_values.size == 0:
        return 0.0
    return max(shape) * _EPS * float(singular_values[0])


@dataclass(frozen=True)
class RankPolicy:
    """Truncation rule for the SVD: a fixed rank or an energy threshold.

    Exactly one of ``rank`` and ``energy`` is set.  The energy rule keeps the
    smallest leading rank r with sum(s[:r]**2) / sum(s**2) >= energy.
    """

    rank: int | None = None
    energy: float | None = None

    def __post_init__(self):
        if (self.rank is None) == (self.energy is None):
            raise ValueError("specify exactly one of rank or energy")
        if self.rank is not None and self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if self.energy is not None and not 0.0 < self.energy <= 1.0:
            raise ValueError(f"energy must lie in (0, 1], got {self.energy}")

    @classmethod
    def fixed(cls, r: int) -> "RankPolicy":
        return cls(rank=r)

    @classmethod
    def from_energy(cls, tau: float) -> "RankPolicy":
        return cls(energy=tau)


@dataclass(frozen=True)
class SvdTruncation:
    """Rank-r SVD factors: a ~ u @ diag(s) @ v conjugate-transposed.

    u has orthonormal columns (m, r); s is strictly positive and
    non-increasing; v has orthonormal columns (n, r).
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    rank: int


def _signed_svd(arr: np.ndarray):
    """Full thin SVD with a deterministic sign/phase convention.

    The largest-magnitude entry of each left singular vector is made real
    and positive; the matching right singular vector is rotated identically
    so the product u s v* is unchanged.
    """
    u, s, vh = np.linalg.svd(arr, full_matrices=False)
    v = vh.conj().T
    for k in range(s.size):
        idx = int(np.argmax(np.abs(u[:, k])))
        pivot = u[idx, k]
        if pivot == 0:
            continue
        phase = pivot / abs(pivot)
        u[:, k] = u[:, k] / phase
        v[:, k] = v[:, k] / phase
    return u, s, v


def pinv(a) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values at or below the rank tolerance are treated as exact
    zeros, so the result satisfies the four Penrose identities for
    numerically rank-deficient inputs as well.
    """
    arr = as_matrix(a)
    u, s, v = _signed_svd(arr)
    tol = rank_tolerance(s, arr.shape)
    inv = np.zeros_like(s)
    keep = s > tol
    inv[keep] = 1.0 / s[keep]
    return (v * inv) @ u.conj().T


def svd_truncate(a, policy: RankPolicy) -> SvdTruncation:
    """Truncated SVD under a fixed-rank or energy-threshold policy."""
    arr = as_matrix(a)
    if not np.any(arr):
        raise ValueError("cannot truncate the SVD of a zero matrix")
    u, s, v = _signed_svd(arr)
    max_rank = int(min(arr.shape))
    if policy.rank is not None:
        if policy.rank > max_rank:
            raise ValueError(
                f"requested rank {policy.rank} exceeds min(m, n) = {max_rank}"
            )
        r = policy.rank
    else:
        energy = np.cumsum(s**2) / np.sum(s**2)
        r = int(np.searchsorted(energy, policy.energy - 1e-12) + 1)
        r = min(r, max_rank)
    # never retain numerically-zero directions
    tol = rank_tolerance(s, arr.shape)
    nonzero = int(np.count_nonzero(s > tol))
    r = max(1, min(r, nonzero))
    return SvdTruncation(u=u[:, :r].copy(), s=s[:r].copy(), v=v[:, :r].copy(), rank=r)


def numeric_rank(a) -> int:
    """Number of singular values above the rank tolerance."""
    arr = as_matrix(a)
    if not np.any(arr):
        return 0
    s = np.linalg.svd(arr, compute_uv=False)
    return int(np.count_nonzero(s > rank_tolerance(s, arr.shape)))


def condition_number(a) -> float:
    """Ratio of the largest to the smallest singular value.

    Returns ``inf`` when the smallest singular value sits below the rank
    tolerance (numerically singular input).
    """
    arr = as_matrix(a)
    if not np.any(arr):
        raise ValueError("condition number of a zero matrix is undefined")
    s = np.linalg.svd(arr, compute_uv=False)
    tol = rank_tolerance(s, arr.shape)
    smin = float(s[-1])
    if smin <= tol:
        return math.inf
    return float(s[0]) / smin


def frobenius_norm(a) -> float:
    """Square root of the sum of squared entry magnitudes."""
    arr = as_matrix(a)
    return float(np.linalg.norm(arr))


# --- chi-square survival via the regularized incomplete gamma -------------

_GAMMA_TOL = 1e-15
_GAMMA_MAX_ITER = 1000


def _reg_gamma_p_series(a: float, x: float) -> float:
    """Series expansion of P(a, x); accurate for x < a + 1."""
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_GAMMA_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _GAMMA_TOL:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))

def _reg_gamma_q_contfrac(a: float, x: float) -> float:
    """Lentz continued fraction for Q(a, x); accurate for x >= a + 1."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi2_sf(x: float, df: int) -> float:
    """Survival function P(X > x) of the chi-square distribution.

    Evaluated as the regularized upper incomplete gamma function Q(df/2,
    x/2): the series expansion of the lower function for small arguments,
    the Lentz continued fraction otherwise.
    """
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("statistic must be finite")
    if x < 0:
        raise ValueError(f"statistic must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    a = 0.5 * df
    half_x = 0.5 * x
    if half_x < a + 1.0:
        q = 1.0 - _reg_gamma_p_series(a, half_x)
    else:
        q = _reg_gamma_q_contfrac(a, half_x)
    return min(max(q, 0.0), 1.0)
