"""Wild binary segmentation: random intervals drawn up front, recursive
threshold-based selection of the strongest contained CUSUM."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import ChangepointConfig, Seed, TimeSeries, universal_threshold
from .cusum import batch_max_cusum, magnitude_floor, max_cusum_from_sums, prefix_sums


@dataclass(frozen=True)
class IntervalSet:
    """A multiset of 1-based (start, end) intervals with end > start."""

    intervals: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "intervals", tuple((int(s), int(e)) for s, e in self.intervals)
        )
        for s, e in self.intervals:
            if s < 1 or e - s < 1:
                raise ValueError(f"invalid interval ({s}, {e})")

    @property
    def count(self) -> int:
        return len(self.intervals)


def sample_interval_pairs(
    rng: np.random.Generator, n_obs: int, n_draws: int, min_span: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (s, e) pairs uniformly over {1 <= s < e <= n_obs, e - s >= min_span}.

    Sampling is by exact index inversion over the triangular pair count, so
    every feasible pair has identical probability.
    """
    max_start = n_obs - min_span
    if min_span < 1 or max_start < 1:
        raise ValueError(
            f"no feasible intervals for n_obs={n_obs}, min_span={min_span}"
        )
    # pairs with start s: n_obs - s - min_span + 1, for s = 1..max_start
    per_start = np.arange(max_start, 0, -1, dtype=np.int64)
    cum = np.cumsum(per_start)
    u = rng.integers(0, cum[-1], size=n_draws)
    s_idx = np.searchsorted(cum, u, side="right")
    starts = s_idx + 1
    offset = u - np.concatenate(([0], cum[:-1]))[s_idx]
    ends = starts + min_span + offset
    return starts, ends


def draw_intervals(n_obs: int, m: int, min_span: int = 1, seed: Seed = 0) -> IntervalSet:
    """Draw ``m`` uniformly distributed random intervals over a series of
    length ``n_obs``."""
    if m < 1:
        raise ValueError(f"number of intervals must be positive, got {m}")
    rng = np.random.default_rng(seed)
    starts, ends = sample_interval_pairs(rng, n_obs, m, min_span)
    return IntervalSet(tuple(zip(starts.tolist(), ends.tolist())))


def wbs_detect(
    series: TimeSeries,
    m_intervals: int = 5000,
    c: float = 1.3,
    seed: Seed = 0,
    min_span: int = 1,
) -> ChangepointConfig:
    """Wild binary segmentation with threshold c * sqrt(2 ln T) * sigma_hat.

    The maximal CUSUM of each random interval is precomputed once; on each
    recursion segment the best fully contained interval competes with the
    segment itself, and a detection splits the segment at the winning
    interval's argmax. With ``m_intervals=0`` this reduces exactly to plain
    binary segmentation at the same threshold.
    """
    n_obs = len(series)
    threshold = max(universal_threshold(series, c), magnitude_floor(series.values))
    p = prefix_sums(series.values)

    if m_intervals > 0:
        rng = np.random.default_rng(seed)
        starts, ends = sample_interval_pairs(rng, n_obs, m_intervals, min_span)
        splits, mags = batch_max_cusum(p, starts, ends)
    else:
        starts = ends = splits = np.empty(0, dtype=np.int64)
        mags = np.empty(0, dtype=np.float64)

    found: list[int] = []
    segments = deque([(1, n_obs)])
    while segments:
        s, e = segments.popleft()
        if e - s < 1:
            continue
        best_b, best_mag = max_cusum_from_sums(p, s, e)
        inside = np.nonzero((starts >= s) & (ends <= e))[0]
        if inside.size:
            k = inside[int(np.argmax(mags[inside]))]
            if mags[k] > best_mag:
                best_b, best_mag = int(splits[k]), float(mags[k])
        if best_mag > threshold:
            found.append(best_b + 1)
            segments.append((s, best_b))
            segments.append((best_b + 1, e))
    return ChangepointConfig.from_times(found, n_obs)
