"""Core domain types, synthetic signal generators, and the robust noise scale.

Time indices are 1-based throughout the package: a series of length T is
observed at times 1..T, and a changepoint time tau marks the *first* index of
a new mean segment, so tau ranges over {2, ..., T} and time 1 is never a
changepoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Scaling that makes the median absolute deviation consistent for the normal
# standard deviation (0.6745 ~ the 0.75 normal quantile), and the sqrt(2)
# correction for working on first differences.
MAD_NORMAL_CONSTANT = 0.6745
_MAD_DENOM = MAD_NORMAL_CONSTANT * math.sqrt(2.0)


@dataclass(frozen=True)
class TimeSeries:
    """An ordered, finite, real-valued series of length T >= 2.

    ``values`` is stored as a read-only float64 array and must never be
    mutated by callers.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"series must be one-dimensional, got shape {arr.shape}")
        if arr.size < 2:
            raise ValueError(f"series length must be at least 2, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("series contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def length(self) -> int:
        return len(self)


@dataclass(frozen=True)
class ChangepointConfig:
    """A changepoint configuration: strictly increasing times in {2..T}.

    Each time is the first index of a new segment; the count m is implied by
    the times.
    """

    times: tuple[int, ...]
    series_length: int

    def __post_init__(self):
        times = tuple(int(t) for t in self.times)
        if self.series_length < 2:
            raise ValueError(f"series_length must be >= 2, got {self.series_length}")
        for prev, cur in zip((1,) + times, times):
            if cur <= prev:
                raise ValueError(
                    f"changepoint times must be strictly increasing and >= 2, got {times}"
                )
        if times and times[-1] > self.series_length:
            raise ValueError(
                f"changepoint times must lie in [2, {self.series_length}], got {times}"
            )
        object.__setattr__(self, "times", times)

    @classmethod
    def empty(cls, series_length: int) -> "ChangepointConfig":
        return cls(times=(), series_length=series_length)

    @classmethod
    def from_times(cls, times, series_length: int) -> "ChangepointConfig":
        return cls(times=tuple(sorted(int(t) for t in times)), series_length=series_length)

    @property
    def count(self) -> int:
        return len(self.times)

    def segment_bounds(self) -> list[tuple[int, int]]:
        """Inclusive 1-based (start, end) bounds of the m+1 segments."""
        starts = (1,) + self.times
        ends = tuple(t - 1 for t in self.times) + (self.series_length,)
        return list(zip(starts, ends))

    def segment_lengths(self) -> list[int]:
        return [e - s + 1 for s, e in self.segment_bounds()]


# Seeds are plain Python/NumPy 64-bit integers; every generator builds its own
# ``numpy.random.Generator`` so identical (parameters, seed) pairs give
# bit-identical output.
Seed = int


def gen_null(length: int, seed: Seed) -> TimeSeries:
    """Generate ``length`` independent standard normal observations."""
    if length < 2:
        raise ValueError(f"length must be at least 2, got {length}")
    rng = np.random.default_rng(seed)
    return TimeSeries(rng.standard_normal(length))


def gen_teeth(
    length: int,
    period: int = 20,
    amplitude: float = 1.0,
    sigma: float = 0.3,
    seed: Seed = 0,
) -> tuple[TimeSeries, ChangepointConfig]:
    """Generate a square-wave mean signal plus Gaussian noise.

    The mean alternates between 0 and ``amplitude`` every ``period``
    observations. Returns the noisy series together with the true
    configuration, one changepoint at each index where the mean changes.
    """
    if period < 2:
        raise ValueError(f"period must be at least 2, got {period}")
    if length < 2 * period:
        raise ValueError(f"length must be at least 2*period={2 * period}, got {length}")
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    t = np.arange(length)
    mean = amplitude * ((t // period) % 2).astype(np.float64)
    rng = np.random.default_rng(seed)
    noise = sigma * rng.standard_normal(length) if sigma > 0 else np.zeros(length)
    times = range(period + 1, length + 1, period)
    truth = ChangepointConfig.from_times(times, length)
    return TimeSeries(mean + noise), truth


def mad_sigma(series: TimeSeries) -> float:
    """Robust noise-scale estimate from median absolute first differences.

    Insensitive to mean shifts at sparse locations: shifts only contaminate
    one difference each, and the median ignores a sub-half fraction of
    contaminated differences.
    """
    if len(series) < 3:
        raise ValueError(f"need at least 3 observations, got {len(series)}")
    diffs = np.abs(np.diff(series.values))
    return float(np.median(diffs) / _MAD_DENOM)


def universal_threshold(series: TimeSeries, c: float = 1.3) -> float:
    """Detection threshold c * sqrt(2 ln T) * sigma_hat used by the
    threshold-based detectors."""
    return c * math.sqrt(2.0 * math.log(len(series))) * mad_sigma(series)


def segment_means(series: TimeSeries, config: ChangepointConfig) -> list[float]:
    """Per-segment sample means under a configuration."""
    if config.series_length != len(series):
        raise ValueError(
            f"configuration is for length {config.series_length}, series has {len(series)}"
        )
    return [float(series.values[s - 1 : e].mean()) for s, e in config.segment_bounds()]
