"""Time-series container, CSV ingestion, block-Hankel embedding, and the
persistence-of-excitation check.

Internal layout is channel-major (one row per channel); the CSV dialect is
time-major (one row per sample) because measurement exports usually are.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import numeric_rank

__all__ = [
    "TimeSeries",
    "HankelPair",
    "PeVerdict",
    "load_csv",
    "save_csv",
    "build_hankel",
    "check_pe",
    "pe_length_bound",
]


@dataclass(frozen=True)
class TimeSeries:
    """An n-channel, m-sample record with a uniform sampling interval.

    ``data`` is (n, m): row = channel, column = time sample.
    """

    data: np.ndarray
    dt: float
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"data must be 2-D (channels x samples), got shape {arr.shape}")
        n, m = arr.shape
        if n < 1:
            raise ValueError("need at least one channel")
        if m < 2:
            raise ValueError(f"need at least 2 samples, got {m}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("data contains non-finite samples")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        labels = tuple(self.labels) if self.labels else tuple(f"ch{i + 1}" for i in range(n))
        if len(labels) != n:
            raise ValueError(f"got {len(labels)} labels for {n} channels")
        if len(set(labels)) != len(labels):
            raise ValueError("channel labels must be unique")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "labels", labels)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def samples(self) -> int:
        return self.data.shape[1]

    def window(self, start: int, stop: int) -> "TimeSeries":
        """Sub-series over sample indices [start, stop)."""
        if not 0 <= start < stop <= self.samples:
            raise ValueError(f"invalid window [{start}, {stop}) for {self.samples} samples")
        return TimeSeries(self.data[:, start:stop], self.dt, self.labels)


@dataclass(frozen=True)
class HankelPair:
    """Block-Hankel embedding of order ``lag`` with its shifted pair.

    ``xh`` is (n*lag, m-lag+1); block row i holds all channels delayed by i
    steps.  ``x1`` drops the last column of ``xh``, ``x2`` the first, so x2
    is x1 advanced by one sample.
    """

    lag: int
    xh: np.ndarray
    x1: np.ndarray
    x2: np.ndarray

    @property
    def block_channels(self) -> int:
        return self.xh.shape[0] // self.lag


@dataclass(frozen=True)
class PeVerdict:
    """Outcome of the excitation-rank check at one embedding order."""

    lag: int
    achieved_rank: int
    required_rank: int
    length_bound_ok: bool

    @property
    def satisfied(self) -> bool:
        return self.achieved_rank == self.required_rank and self.length_bound_ok


def load_csv(path, dt: float) -> TimeSeries:
    """Read a time-major CSV (one column per channel, one row per sample).

    A single header row of channel names is optional and detected by the
    presence of any non-numeric cell in the first row.  NaN and infinite
    cells are rejected with the offending row/column named.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")

    def parse_row(cells, row_no):
        out = []
        for col_no, cell in enumerate(cells):
            try:
                value = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell at row {row_no}, column {col_no + 1}: {cell!r}"
                ) from None
            if not np.isfinite(value):
                raise ValueError(
                    f"{path}: non-finite value at row {row_no}, column {col_no + 1}: {cell!r}"
                )
            out.append(value)
        return out

    labels: tuple[str, ...] = ()
    first_is_header = False
    for cell in rows[0]:
        try:
            float(cell)
        except ValueError:
            first_is_header = True
            break
    if first_is_header:
        labels = tuple(cell.strip() for cell in rows[0])
        data_rows = rows[1:]
        header_offset = 2
    else:
        data_rows = rows
        header_offset = 1

    if len(data_rows) < 2:
        raise ValueError(f"{path}: need at least 2 samples, got {len(data_rows)}")
    width = len(data_rows[0])
    parsed = []
    for i, row in enumerate(data_rows):
        if len(row) != width:
            raise ValueError(
                f"{path}: ragged row {i + header_offset}: expected {width} cells, got {len(row)}"
            )
        parsed.append(parse_row(row, i + header_offset))
    data = np.asarray(parsed, dtype=np.float64).T  # -> channel-major
    return TimeSeries(data=data, dt=dt, labels=labels)


def save_csv(ts: TimeSeries, path) -> None:
    """Write the series in the same time-major dialect ``load_csv`` reads.

    Floats are written with ``repr`` so a round-trip is value-exact.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ts.labels)
        for col in ts.data.T:
            writer.writerow([repr(float(v)) for v in col])


def build_hankel(ts: TimeSeries, lag: int) -> HankelPair:
    """Block-Hankel embedding of order ``lag``.

    Stacks the record under delays 0 .. lag-1: block row i is the full
    channel set advanced by i samples, so column j spans samples
    j .. j+lag-1.
    """
    n, m = ts.channels, ts.samples
    if not 1 <= lag <= m - 1:
        raise ValueError(f"lag must lie in [1, {m - 1}], got {lag}")
    width = m - lag + 1
    xh = np.vstack([ts.data[:, d : d + width] for d in range(lag)])
    xh.flags.writeable = False
    return HankelPair(lag=lag, xh=xh, x1=xh[:, :-1], x2=xh[:, 1:])


def pe_length_bound(channels: int, lag: int) -> int:
    """Minimum record length for excitation of the given order."""
    return (channels + 1) * lag - 1


def check_pe(ts: TimeSeries, lag: int) -> PeVerdict:
    """Persistence-of-excitation check at embedding order ``lag``.

    The record is excited at order ``lag`` when its block-Hankel matrix has
    full row rank n*lag and the record is long enough that the matrix has at
    least as many columns as rows.
    """
    pair = build_hankel(ts, lag)
    achieved = numeric_rank(pair.xh)
    required = ts.channels * lag
    bound_ok = ts.samples >= pe_length_bound(ts.channels, lag)
    return PeVerdict(
        lag=lag,
        achieved_rank=achieved,
        required_rank=required,
        length_bound_ok=bound_ok,
    )
