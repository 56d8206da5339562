"""Time-series container and shared statistical primitives.

Everything downstream (trend tests, rolling indicators, surrogate fits)
is built on the handful of estimators defined here: ranks, biased
autocorrelation, the Theil-Sen slope, and linear / Gaussian-kernel
detrending. All functions accept either a :class:`TimeSeries` or any
1-D array-like and are pure.

Ties are a hard error in rank-based operations: the analysis assumes
continuous-valued observations where two samples never coincide
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateError, RangeError, TieError

__all__ = [
    "TimeSeries",
    "ranks",
    "autocorr",
    "theil_sen_slope",
    "detrend_linear",
    "gaussian_trend",
    "gaussian_detrend",
    "read_series_csv",
    "write_series_csv",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered real-valued observations with optional sampling metadata.

    Attributes:
        values: 1-D float64 array of state samples, all finite.
        dt: Optional sampling interval in model time units.
        label: Optional free-text tag.
    """

    values: np.ndarray
    dt: float | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise RangeError(f"TimeSeries values must be 1-D, got shape {arr.shape}")
        if arr.size < 1:
            raise RangeError("TimeSeries must hold at least one observation")
        if not np.all(np.isfinite(arr)):
            raise RangeError("TimeSeries values must be finite (no NaN/Inf)")
        if self.dt is not None and not self.dt > 0:
            raise RangeError(f"dt must be positive, got {self.dt}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


def as_values(series, min_len: int = 2) -> np.ndarray:
    """Coerce a TimeSeries or array-like to a validated 1-D float array."""
    if isinstance(series, TimeSeries):
        x = series.values
    else:
        x = np.asarray(series, dtype=np.float64)
        if x.ndim != 1:
            raise RangeError(f"expected a 1-D series, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise RangeError("series values must be finite (no NaN/Inf)")
    if x.size < min_len:
        raise RangeError(f"series too short: need at least {min_len} points, got {x.size}")
    return x


def _wrap_like(template, values: np.ndarray):
    """Return values as a TimeSeries when the input was one, else an ndarray."""
    if isinstance(template, TimeSeries):
        return TimeSeries(values, dt=template.dt, label=template.label)
    return values


def ensure_untied(x: np.ndarray) -> None:
    """Raise TieError if any two values coincide exactly."""
    xs = np.sort(x)
    if xs.size > 1 and np.any(xs[1:] == xs[:-1]):
        raise TieError("series contains tied values; ranks are undefined")


def ranks(series) -> np.ndarray:
    """Ranks of the observations, 1-based.

    ``ranks(x)[i]`` is the number of observations less than or equal to
    ``x[i]``; with no ties this is a permutation of ``1..n``.

    Raises:
        TieError: if any two values are equal.
    """
    x = as_values(series, min_len=1)
    ensure_untied(x)
    order = np.argsort(x, kind="stable")
    out = np.empty(x.size, dtype=np.int64)
    out[order] = np.arange(1, x.size + 1)
    return out


def autocorr(series, lag: int) -> float:
    """Biased single-mean sample autocorrelation at the given lag.

    Uses the divide-by-n estimator

        rho(L) = sum_{k=1}^{n-L} (x_k - xbar)(x_{k+L} - xbar) / sum_k (x_k - xbar)^2

    which is bounded in [-1, 1] by Cauchy-Schwarz.

    Raises:
        RangeError: if ``lag`` is not in ``1..n-1``.
        DegenerateError: if the series is constant.
    """
    x = as_values(series)
    if not 1 <= lag < x.size:
        raise RangeError(f"lag must be in 1..{x.size - 1}, got {lag}")
    dev = x - x.mean()
    den = float(dev @ dev)
    if den == 0.0:
        raise DegenerateError("autocorrelation undefined for a constant series")
    return float(dev[:-lag] @ dev[lag:]) / den


def theil_sen_slope(series) -> float:
    """Theil-Sen slope: median of all pairwise slopes over unit-spaced indices.

    For an even number of pairs the median is the mean of the two central
    order statistics.
    """
    x = as_values(series)
    n = x.size
    i, j = np.triu_indices(n, k=1)
    slopes = (x[j] - x[i]) / (j - i)
    return float(np.median(slopes))


def detrend_linear(series):
    """Remove the Theil-Sen linear trend.

    Returns ``x_i - beta * i`` with 1-based indices, preserving length.
    Returns a TimeSeries when given one, else an ndarray.
    """
    x = as_values(series)
    beta = theil_sen_slope(x)
    out = x - beta * np.arange(1, x.size + 1, dtype=np.float64)
    return _wrap_like(series, out)


@lru_cache(maxsize=32)
def _gaussian_weights(n: int, bandwidth_fraction: float) -> np.ndarray:
    """Row-normalized truncated Gaussian kernel matrix for length-n series."""
    sigma_b = bandwidth_fraction * n
    offsets = np.arange(n, dtype=np.float64)
    dist = offsets[:, None] - offsets[None, :]
    w = np.exp(-(dist * dist) / (2.0 * sigma_b * sigma_b))
    w /= w.sum(axis=1, keepdims=True)
    w.setflags(write=False)
    return w


def gaussian_trend(series, bandwidth_fraction: float):
    """Gaussian-kernel smoother estimate of the trend.

    The kernel width is ``bandwidth_fraction * n`` index units; the kernel
    is truncated at the series bounds and each row of weights is
    renormalized to sum to one, so constants are reproduced exactly.
    """
    x = as_values(series, min_len=3)
    if not 0.0 < bandwidth_fraction < 1.0:
        raise RangeError(f"bandwidth_fraction must be in (0,1), got {bandwidth_fraction}")
    trend = _gaussian_weights(x.size, float(bandwidth_fraction)) @ x
    return _wrap_like(series, trend)


def gaussian_detrend(series, bandwidth_fraction: float):
    """Residual after subtracting the Gaussian-kernel trend.

    ``gaussian_detrend(x, b) + gaussian_trend(x, b)`` reconstructs the
    input exactly.
    """
    x = as_values(series, min_len=3)
    trend = gaussian_trend(x, bandwidth_fraction)
    return _wrap_like(series, x - trend)


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

_HEADER = "index,value"


def write_series_csv(series, path, comments: Iterable[str] = ()) -> None:
    """Write a series as two-column CSV (index,value) with a one-line header.

    Optional ``comments`` are emitted first, one per line, prefixed ``# ``.
    """
    x = as_values(series, min_len=1)
    lines = [f"# {c}" for c in comments]
    lines.append(_HEADER)
    lines.extend(f"{i},{v!r}" for i, v in enumerate(x.tolist(), start=1))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_series_csv(path) -> TimeSeries:
    """Read a series written by :func:`write_series_csv`.

    Comment lines (``#``) are skipped; the index column is ignored, row
    order defines time order.
    """
    values: list[float] = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if line.lower() != _HEADER:
                    raise RangeError(f"expected header '{_HEADER}', got {line!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise RangeError(f"expected two columns, got {line!r}")
            values.append(float(parts[1]))
    if not header_seen:
        raise RangeError(f"no '{_HEADER}' header found in {path}")
    if not values:
        raise RangeError(f"no data rows found in {path}")
    return TimeSeries(np.asarray(values))
