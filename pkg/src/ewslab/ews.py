"""Rolling-window early-warning-signal indicators.

The two classical indicators are estimated in overlapping rolling
windows of relative size alpha = q/N placed every ``stride`` points on
the (optionally Gaussian-detrended) input series:

    variance:   s2_i   = 1/(q-1) * sum_{k=i}^{i+q-1} (x_k - m_i)^2
    lag-1 AC:   rho1_i = (1/q) * sum_{k=i}^{i+q-2} (x_{k+1}-m_i)(x_k-m_i) / s2_i

with m_i the window mean. The lag-1 estimator deliberately mixes the
1/q numerator with the 1/(q-1) variance denominator; that mixed
normalization is the convention being studied, and no "corrected"
variant is offered.

All window functions operate on the trailing axis, so a (batch, N)
matrix of series is processed in one call with per-row results identical
to the 1-D path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateError, RangeError
from .series import TimeSeries, as_values, gaussian_detrend, write_series_csv

__all__ = [
    "WindowConfig",
    "IndicatorSeries",
    "PipelineConfig",
    "window_count",
    "rolling_variance",
    "rolling_lag1_ac",
    "compute_ews",
    "pipeline_values",
    "write_indicator_csv",
]

INDICATORS = ("variance", "lag1_ac")
DETREND_MODES = ("none", "gaussian")

DEFAULT_BANDWIDTH_FRACTION = 0.10


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


@dataclass(frozen=True)
class WindowConfig:
    """Relative window size and stride of the rolling estimation.

    ``stride`` is either a point count (int >= 1) or a fraction of the
    series length (float in (0,1)), resolved as max(1, round(fraction*N)).
    """

    alpha: float
    stride: int | float = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise RangeError(f"alpha must be in (0,1], got {self.alpha}")
        if isinstance(self.stride, int):
            if self.stride < 1:
                raise RangeError(f"stride points must be >= 1, got {self.stride}")
        elif isinstance(self.stride, float):
            if not 0.0 < self.stride < 1.0:
                raise RangeError(
                    f"fractional stride must be in (0,1), got {self.stride}"
                )
        else:
            raise RangeError(f"stride must be int or float, got {type(self.stride)!r}")

    def resolve(self, n: int) -> tuple[int, int]:
        """Window length q and stride in points for a length-n series.

        q = round(alpha*n) with half-up rounding, and must satisfy
        3 <= q <= n.
        """
        q = _round_half_up(self.alpha * n)
        if q < 3:
            raise RangeError(f"window of alpha={self.alpha} on n={n} gives q={q} < 3")
        if q > n:
            raise RangeError(f"window q={q} exceeds series length {n}")
        if isinstance(self.stride, int):
            stride = self.stride
        else:
            stride = max(1, _round_half_up(self.stride * n))
        return q, stride


@dataclass(frozen=True, eq=False)
class IndicatorSeries:
    """One indicator value per rolling window, indexed by window start."""

    series: TimeSeries
    indicator: str
    source_config: WindowConfig
    window_starts: np.ndarray

    def __len__(self) -> int:
        return len(self.series)


@dataclass(frozen=True)
class PipelineConfig:
    """Detrend step plus rolling-indicator step, bundled for reuse."""

    window: WindowConfig
    indicator: str = "lag1_ac"
    detrend: str = "gaussian"
    bandwidth_fraction: float = DEFAULT_BANDWIDTH_FRACTION

    def __post_init__(self) -> None:
        if self.indicator not in INDICATORS:
            raise RangeError(f"unknown indicator {self.indicator!r}; expected {INDICATORS}")
        if self.detrend not in DETREND_MODES:
            raise RangeError(f"unknown detrend mode {self.detrend!r}; expected {DETREND_MODES}")
        if not 0.0 < self.bandwidth_fraction < 1.0:
            raise RangeError(
                f"bandwidth_fraction must be in (0,1), got {self.bandwidth_fraction}"
            )


def window_count(n: int, q: int, stride: int) -> int:
    """Number of full windows: floor((n-q)/stride) + 1."""
    if q < 1 or stride < 1:
        raise RangeError(f"q and stride must be positive, got q={q}, stride={stride}")
    if q > n:
        raise RangeError(f"window q={q} exceeds series length {n}")
    return (n - q) // stride + 1


def _window_deviations(x: np.ndarray, q: int, stride: int):
    windows = sliding_window_view(x, q, axis=-1)[..., ::stride, :]
    means = windows.mean(axis=-1)
    return windows - means[..., None]


def rolling_variance_values(x: np.ndarray, q: int, stride: int) -> np.ndarray:
    """Window variances (1/(q-1) normalization) along the trailing axis."""
    dev = _window_deviations(x, q, stride)
    return (dev * dev).sum(axis=-1) / (q - 1)


def rolling_lag1_values(x: np.ndarray, q: int, stride: int) -> np.ndarray:
    """Window lag-1 autocorrelations along the trailing axis.

    Raises:
        DegenerateError: if any window is constant.
    """
    dev = _window_deviations(x, q, stride)
    numerator = (dev[..., 1:] * dev[..., :-1]).sum(axis=-1) / q
    variance = (dev * dev).sum(axis=-1) / (q - 1)
    if np.any(variance == 0.0):
        raise DegenerateError("lag-1 autocorrelation undefined on a constant window")
    return numerator / variance


def _indicator_values(x: np.ndarray, q: int, stride: int, indicator: str) -> np.ndarray:
    if indicator == "variance":
        return rolling_variance_values(x, q, stride)
    if indicator == "lag1_ac":
        return rolling_lag1_values(x, q, stride)
    raise RangeError(f"unknown indicator {indicator!r}; expected {INDICATORS}")


def _build(series, values: np.ndarray, indicator: str, config: WindowConfig,
           stride: int) -> IndicatorSeries:
    dt = series.dt if isinstance(series, TimeSeries) else None
    starts = np.arange(values.size, dtype=np.int64) * stride
    return IndicatorSeries(
        series=TimeSeries(values, dt=None if dt is None else dt * stride),
        indicator=indicator,
        source_config=config,
        window_starts=starts,
    )


def rolling_variance(series, config: WindowConfig) -> IndicatorSeries:
    """Rolling-window variance indicator."""
    x = as_values(series, min_len=3)
    q, stride = config.resolve(x.size)
    return _build(series, rolling_variance_values(x, q, stride), "variance", config, stride)


def rolling_lag1_ac(series, config: WindowConfig) -> IndicatorSeries:
    """Rolling-window lag-1 autocorrelation indicator."""
    x = as_values(series, min_len=3)
    q, stride = config.resolve(x.size)
    return _build(series, rolling_lag1_values(x, q, stride), "lag1_ac", config, stride)


def compute_ews(series, config: WindowConfig, indicator: str = "lag1_ac",
                detrend: str = "gaussian",
                bandwidth_fraction: float = DEFAULT_BANDWIDTH_FRACTION) -> IndicatorSeries:
    """Detrend the full series, then estimate the rolling indicator.

    Detrending is applied once to the whole series before windowing, not
    per window. Default is Gaussian detrending with a 10% bandwidth.
    """
    pipeline = PipelineConfig(window=config, indicator=indicator, detrend=detrend,
                              bandwidth_fraction=bandwidth_fraction)
    x = as_values(series, min_len=3)
    q, stride = config.resolve(x.size)
    values = pipeline_values(x, pipeline)
    return _build(series, values, pipeline.indicator, config, stride)


def residual_values(x: np.ndarray, detrend: str,
                    bandwidth_fraction: float = DEFAULT_BANDWIDTH_FRACTION) -> np.ndarray:
    """Detrend step of the pipeline on raw arrays (trailing-axis batched)."""
    if detrend == "none":
        return x
    if detrend == "gaussian":
        if x.ndim == 1:
            return gaussian_detrend(x, bandwidth_fraction)
        weights = _gaussian_weights(x.shape[-1], float(bandwidth_fraction))
        return x - x @ weights.T
    raise RangeError(f"unknown detrend mode {detrend!r}; expected {DETREND_MODES}")


def pipeline_values(x: np.ndarray, pipeline: PipelineConfig) -> np.ndarray:
    """Full pipeline on raw arrays: detrend, then rolling indicator.

    Accepts a 1-D series or a (batch, n) matrix; the window geometry is
    resolved against the trailing axis.
    """
    q, stride = pipeline.window.resolve(x.shape[-1])
    resid = residual_values(x, pipeline.detrend, pipeline.bandwidth_fraction)
    return _indicator_values(resid, q, stride, pipeline.indicator)


def _indicator_comments(ind: IndicatorSeries) -> Iterable[str]:
    yield f"indicator = {ind.indicator}"
    yield f"alpha = {ind.source_config.alpha!r}"
    yield f"stride = {ind.source_config.stride!r}"


def write_indicator_csv(ind: IndicatorSeries, path,
                        extra_comments: Iterable[str] = ()) -> None:
    """Write (window_start_index, value) rows with the config as comments."""
    comments = list(_indicator_comments(ind)) + list(extra_comments)
    lines = [f"# {c}" for c in comments]
    lines.append("window_start_index,value")
    lines.extend(
        f"{int(s)},{v!r}"
        for s, v in zip(ind.window_starts.tolist(), ind.series.values.tolist())
    )
    from pathlib import Path

    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
