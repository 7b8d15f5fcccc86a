"""Classical binary segmentation: greedy recursive CUSUM splitting."""

from __future__ import annotations

from collections import deque

from .core import ChangepointConfig, TimeSeries, universal_threshold
from .cusum import magnitude_floor, max_cusum_from_sums, prefix_sums


def binary_segmentation(
    series: TimeSeries,
    threshold: float | None = None,
    min_len: int = 2,
    c: float = 1.3,
) -> ChangepointConfig:
    """Detect changepoints by recursively splitting at the maximal CUSUM.

    On each segment the best split is recorded when its contrast magnitude
    strictly exceeds ``threshold`` (default c * sqrt(2 ln T) * sigma_hat);
    recursion continues on both halves and stops on segments shorter than
    ``min_len`` or with no split above the threshold.
    """
    if threshold is None:
        threshold = universal_threshold(series, c)
    if threshold < 0:
        raise ValueError(f"threshold must be non-negative, got {threshold}")
    if min_len < 2:
        raise ValueError(f"min_len must be at least 2, got {min_len}")

    p = prefix_sums(series.values)
    cutoff = max(threshold, magnitude_floor(series.values))
    found: list[int] = []
    segments = deque([(1, len(series))])
    while segments:
        s, e = segments.popleft()
        if e - s + 1 < min_len or e - s < 1:
            continue
        b, magnitude = max_cusum_from_sums(p, s, e)
        if magnitude > cutoff:
            found.append(b + 1)
            segments.append((s, b))
            segments.append((b + 1, e))
    return ChangepointConfig.from_times(found, len(series))
