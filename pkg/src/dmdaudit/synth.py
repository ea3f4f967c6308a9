"""Deterministic, seeded generators for the fixture families used by tests,
diagnostics, and the CLI: exact linear systems, VAR processes with a
prescribed causal graph, and a multi-generator coherency surrogate.

All randomness comes from numpy's PCG64 stream so a (spec, seed) pair always
reproduces the same record.  The generator name and seed are recorded in the
spec dictionaries for report sidecars.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .embedding import TimeSeries

__all__ = [
    "CausalGraphSpec",
    "CoherencySpec",
    "gen_linear_system",
    "gen_var",
    "gen_coherency",
    "gen_stable_operator",
    "fig_three_channel_graph",
    "RNG_ALGORITHM",
]

RNG_ALGORITHM = "pcg64"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_linear_system(a, x0, m: int, dt: float = 1.0, labels: Sequence[str] = ()) -> TimeSeries:
    """Iterate x_{k+1} = a x_k exactly for m samples starting from x0."""
    a = np.asarray(a, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"a must be square, got shape {a.shape}")
    if x0.size != a.shape[0]:
        raise ValueError(f"x0 has length {x0.size}, expected {a.shape[0]}")
    if m < 2:
        raise ValueError(f"need at least 2 samples, got {m}")
    data = np.empty((a.shape[0], m))
    data[:, 0] = x0
    for k in range(1, m):
        data[:, k] = a @ data[:, k - 1]
    return TimeSeries(data=data, dt=dt, labels=tuple(labels))


@dataclass(frozen=True)
class CausalGraphSpec:
    """A VAR(p) process whose coefficient zero pattern encodes a causal graph.

    ``adjacency[i, j] == 1`` means channel j drives channel i; the entry
    (i, j) of every lag matrix is drawn nonzero exactly there.  Draws are
    rejection-sampled for stability; a draw that stays unstable is shrunk
    geometrically across lags, which scales every companion root by the same
    factor and preserves the zero pattern.
    """

    dims: int
    order: int
    adjacency: tuple[tuple[int, ...], ...]
    coeff_range: tuple[float, float] = (0.2, 0.5)
    noise_std: float = 1.0
    seed: int = 0
    max_spectral_radius: float = 0.95
    rescale_radius: float = 0.85

    def __post_init__(self):
        adj = np.asarray(self.adjacency)
        if adj.shape != (self.dims, self.dims):
            raise ValueError(f"adjacency must be {self.dims}x{self.dims}, got {adj.shape}")
        if not np.isin(adj, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        lo, hi = self.coeff_range
        if not 0 < lo <= hi:
            raise ValueError(f"bad coefficient range {self.coeff_range}")

    def adjacency_array(self) -> np.ndarray:
        return np.asarray(self.adjacency, dtype=int)

    def to_dict(self) -> dict:
        return {
            "kind": "causal_graph_var",
            "dims": self.dims,
            "order": self.order,
            "adjacency": [list(row) for row in self.adjacency],
            "coeff_range": list(self.coeff_range),
            "noise_std": self.noise_std,
            "seed": self.seed,
            "rng": RNG_ALGORITHM,
        }


def fig_three_channel_graph(seed: int = 0, noise_std: float = 1.0) -> CausalGraphSpec:
    """Three channels, order 4, all edges present except 2 -> 1.

    The lone zero entry sits at (i, j) = (0, 1): channel 2's past never
    enters channel 1's equation.
    """
    adjacency = ((1, 0, 1), (1, 1, 1), (1, 1, 1))
    return CausalGraphSpec(dims=3, order=4, adjacency=adjacency, seed=seed, noise_std=noise_std)


def _companion_radius(coeffs: np.ndarray) -> float:
    p, n, _ = coeffs.shape
    top = np.hstack(list(coeffs))
    if p == 1:
        comp = top
    else:
        eye = np.eye(n * (p - 1))
        comp = np.vstack([top, np.hstack([eye, np.zeros((n * (p - 1), n))])])
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def draw_var_coefficients(spec: CausalGraphSpec, max_draws: int = 100) -> np.ndarray:
    """Seeded coefficient stack (p, n, n) honouring the graph and stability."""
    rng = _rng(spec.seed)
    adj = spec.adjacency_array().astype(bool)
    lo, hi = spec.coeff_range
    last = None
    for _ in range(max_draws):
        mags = rng.uniform(lo, hi, size=(spec.order, spec.dims, spec.dims))
        signs = rng.choice((-1.0, 1.0), size=mags.shape)
        coeffs = mags * signs * adj[None, :, :]
        last = coeffs
        if _companion_radius(coeffs) < spec.max_spectral_radius:
            return coeffs
    # no raw draw was stable: shrink lag k by gamma**k, which moves every
    # companion root from z to gamma*z
    radius = _companion_radius(last)
    if radius <= 0:
        raise ValueError("unstable spec: drawn coefficients have no dynamics to rescale")
    gamma = spec.rescale_radius / radius
    scaled = last * (gamma ** np.arange(1, spec.order + 1))[:, None, None]
    return scaled


def gen_var(spec: CausalGraphSpec, t: int) -> TimeSeries:
    """Simulate the VAR with seeded Gaussian noise; burn-in is discarded."""
    if t <= 10 * spec.dims * spec.order:
        raise ValueError(
            f"need more than {10 * spec.dims * spec.order} samples for dims={spec.dims}, "
            f"order={spec.order}; got {t}"
        )
    coeffs = draw_var_coefficients(spec)
    rng = _rng(spec.seed + 1)  # independent stream from the coefficient draw
    burn = 10 * spec.order
    total = t + burn
    n, p = spec.dims, spec.order
    x = np.zeros((n, total + p))
    noise = rng.normal(0.0, spec.noise_std, size=(n, total + p))
    for k in range(p, total + p):
        acc = noise[:, k].copy()
        for lag in range(p):
            acc += coeffs[lag] @ x[:, k - lag - 1]
        x[:, k] = acc
    data = x[:, p + burn :]
    return TimeSeries(data=data, dt=1.0, labels=tuple(f"x{i + 1}" for i in range(n)))


@dataclass(frozen=True)
class CoherencySpec:
    """Rotor-angle-like surrogate: one pre-disturbance coherent group that
    splits into clusters with distinct damped swings after the fault.

    Channels in the same group share one group signal exactly; independent
    per-channel noise is added on top.  With zero noise and a single group
    every channel is identical.
    """

    generators: int = 6
    fault_time: int = 50
    dt: float = 1e-3
    groups: tuple[tuple[int, ...], ...] = ((0, 1, 2, 3), (4,), (5,))
    base_angle: float = 10.0
    pre_amplitude: float = 0.5
    pre_freq_hz: float = 8.0
    pre_damping: float = 2.0
    drifts: tuple[float, ...] = (-2.0, 4.0, 8.0)
    drift_rate: float = 12.0
    amplitudes: tuple[float, ...] = (3.0, 5.0, 7.0)
    freqs_hz: tuple[float, ...] = (4.0, 10.0, 16.0)
    dampings: tuple[float, ...] = (2.5, 3.5, 4.5)
    # a pair of close inter-area swing modes shared by every machine; their
    # beat envelope is what short embedding windows cannot resolve
    beat_amplitude: float = 0.0
    beat_freqs_hz: tuple[float, float] = (2.8, 3.2)
    beat_damping: float = 0.4
    # faint common ripple right next to a group frequency: unresolvable
    # micro-dynamics that put the same error floor under fit and forecast
    micro_amplitude: float = 0.0
    micro_freq_hz: float = 10.25
    micro_damping: float = 1.0
    noise_std: float = 0.02
    seed: int = 17

    def __post_init__(self):
        members = [c for group in self.groups for c in group]
        if sorted(members) != list(range(self.generators)):
            raise ValueError("groups must partition the generator channels exactly once")
        k = len(self.groups)
        for name in ("drifts", "amplitudes", "freqs_hz", "dampings"):
            if len(getattr(self, name)) != k:
                raise ValueError(f"{name} must have one entry per group ({k})")
        if self.fault_time < 0:
            raise ValueError("fault_time must be nonnegative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    def group_of(self) -> np.ndarray:
        out = np.zeros(self.generators, dtype=int)
        for g, group in enumerate(self.groups):
            for c in group:
                out[c] = g
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "coherency",
            "generators": self.generators,
            "fault_time": self.fault_time,
            "dt": self.dt,
            "groups": [list(g) for g in self.groups],
            "base_angle": self.base_angle,
            "pre_amplitude": self.pre_amplitude,
            "pre_freq_hz": self.pre_freq_hz,
            "pre_damping": self.pre_damping,
            "drifts": list(self.drifts),
            "drift_rate": self.drift_rate,
            "amplitudes": list(self.amplitudes),
            "freqs_hz": list(self.freqs_hz),
            "dampings": list(self.dampings),
            "beat_amplitude": self.beat_amplitude,
            "beat_freqs_hz": list(self.beat_freqs_hz),
            "beat_damping": self.beat_damping,
            "micro_amplitude": self.micro_amplitude,
            "micro_freq_hz": self.micro_freq_hz,
            "micro_damping": self.micro_damping,
            "noise_std": self.noise_std,
            "seed": self.seed,
            "rng": RNG_ALGORITHM,
        }


def gen_coherency(spec: CoherencySpec, m: int) -> TimeSeries:
    """Generate m samples of the coherency surrogate."""
    if m <= spec.fault_time:
        raise ValueError(f"fault_time {spec.fault_time} must fall inside the record of {m} samples")
    t = np.arange(m) * spec.dt
    common = spec.base_angle + spec.pre_amplitude * np.exp(-spec.pre_damping * t) * np.sin(
        2 * np.pi * spec.pre_freq_hz * t
    )
    tau = np.maximum(t - spec.fault_time * spec.dt, 0.0)
    post = t >= spec.fault_time * spec.dt
    if spec.beat_amplitude:
        f_lo, f_hi = spec.beat_freqs_hz
        beat = np.sin(2 * np.pi * f_lo * tau) - np.sin(2 * np.pi * f_hi * tau)
        common = common + post * spec.beat_amplitude * np.exp(-spec.beat_damping * tau) * beat
    if spec.micro_amplitude:
        ripple = np.sin(2 * np.pi * spec.micro_freq_hz * tau)
        common = common + post * spec.micro_amplitude * np.exp(-spec.micro_damping * tau) * ripple
    group_signals = []
    for g in range(len(spec.groups)):
        swing = spec.amplitudes[g] * np.exp(-spec.dampings[g] * tau) * np.sin(
            2 * np.pi * spec.freqs_hz[g] * tau
        )
        drift = spec.drifts[g] * (1.0 - np.exp(-spec.drift_rate * tau))
        group_signals.append(post * (swing + drift))
    rng = _rng(spec.seed)
    noise = rng.normal(0.0, spec.noise_std, size=(spec.generators, m)) if spec.noise_std > 0 else 0.0
    group_of = spec.group_of()
    data = np.vstack([common + group_signals[group_of[c]] for c in range(spec.generators)])
    data = data + noise
    labels = tuple(f"gen{c + 1}" for c in range(spec.generators))
    return TimeSeries(data=data, dt=spec.dt, labels=labels)


def gen_stable_operator(
    dims: int,
    seed: int,
    magnitude_range: tuple[float, float] = (0.90, 0.995),
    min_separation: float = 0.02,
) -> tuple[np.ndarray, np.ndarray]:
    """Random real operator with a controlled, well-separated stable spectrum.

    Eigenvalues are drawn with magnitudes in ``magnitude_range`` (real ones
    and conjugate pairs), assembled into a real block-diagonal form, and
    conjugated by a random orthogonal basis.  Returns (a, eigenvalues); the
    spectrum is exact by construction.
    """
    if dims < 1:
        raise ValueError("dims must be >= 1")
    lo, hi = magnitude_range
    if not 0 < lo <= hi < 1.0 + 1e-12:
        raise ValueError(f"magnitudes must lie in (0, 1], got {magnitude_range}")
    rng = _rng(seed)
    for _ in range(200):
        n_pairs = int(rng.integers(0, dims // 2 + 1))
        eigs = []
        for _ in range(n_pairs):
            rho = rng.uniform(lo, hi)
            theta = rng.uniform(0.15, np.pi - 0.15)
            eigs.append(rho * np.exp(1j * theta))
            eigs.append(rho * np.exp(-1j * theta))
        for _ in range(dims - 2 * n_pairs):
            rho = rng.uniform(lo, hi)
            eigs.append(complex(rho * rng.choice((-1.0, 1.0))))
        eigs = np.asarray(eigs, dtype=complex)
        gaps = np.abs(eigs[:, None] - eigs[None, :]) + np.eye(dims)
        if gaps.min() >= min_separation:
            break
    else:
        raise RuntimeError("could not draw a separated spectrum; widen magnitude_range")

    blocks = []
    used = np.zeros(dims, dtype=bool)
    for k, lam in enumerate(eigs):
        if used[k]:
            continue
        if abs(lam.imag) > 0:
            mate = int(np.argmin(np.abs(eigs - lam.conjugate()) + used * 10.0))
            used[k] = used[mate] = True
            a, b = lam.real, abs(lam.imag)
            blocks.append(np.array([[a, b], [-b, a]]))
        else:
            used[k] = True
            blocks.append(np.array([[lam.real]]))
    d = np.zeros((dims, dims))
    pos = 0
    for blk in blocks:
        w = blk.shape[0]
        d[pos : pos + w, pos : pos + w] = blk
        pos += w
    q, _ = np.linalg.qr(rng.normal(size=(dims, dims)))
    a = q @ d @ q.T
    return a, eigs
