"""Per-channel 256-bin histograms and the ten descriptive statistics that
form the 30-dimensional color feature vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import imagecore
from .errors import EmptyHistogram, OutOfRange
from .imagecore import RasterImage

COLOR_DIM = 30

# Percentiles as exact integer ratios so threshold comparisons never suffer
# floating-point drift: Q1, median, P60, Q3.
_PERCENTILES = ((1, 4), (1, 2), (3, 5), (3, 4))

STAT_NAMES = (
    "mean", "median", "mode", "q1", "q3", "p60",
    "stddev", "iqr", "range", "skewness",
)


@dataclass(frozen=True)
class Histogram256:
    """Pixel counts for intensities 0..255."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (256,) or (c < 0).any():
            raise ValueError("counts must be 256 non-negative integers")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def channel_histogram(ch: np.ndarray) -> Histogram256:
    """Count pixels per rounded intensity value."""
    ch = np.asarray(ch, dtype=np.float64)
    rounded = np.rint(ch)
    if rounded.min() < 0 or rounded.max() > 255:
        raise OutOfRange("channel values round outside [0, 255]")
    counts = np.bincount(rounded.astype(np.int64).ravel(), minlength=256)
    return Histogram256(counts)


def _percentile(cum: np.ndarray, total: int, num: int, den: int) -> int:
    """Smallest intensity v with CDF(v) >= num/den, compared in integers."""
    for v in range(256):
        if cum[v] * den >= num * total:
            return v
    return 255


def descriptive_stats(h: Histogram256) -> np.ndarray:
    """Ten population statistics of the histogram, in STAT_NAMES order."""
    counts = h.counts.astype(np.float64)
    total = h.total
    if total < 1:
        raise EmptyHistogram("histogram has no pixels")
    values = np.arange(256, dtype=np.float64)
    mean = float((values * counts).sum() / total)
    cum = np.cumsum(h.counts)
    q1, median, p60, q3 = (
        _percentile(cum, total, num, den) for num, den in _PERCENTILES
    )
    mode = int(np.argmax(h.counts))
    centered = values - mean
    m2 = float((counts * centered**2).sum() / total)
    m3 = float((counts * centered**3).sum() / total)
    stddev = np.sqrt(m2)
    populated = np.nonzero(h.counts)[0]
    value_range = float(populated[-1] - populated[0])
    skewness = 0.0 if m2 == 0.0 else m3 / m2**1.5
    return np.array(
        [mean, median, mode, q1, q3, p60, stddev, q3 - q1, value_range, skewness],
        dtype=np.float64,
    )


def color_vector(img: RasterImage) -> np.ndarray:
    """30 color features: ten statistics for each of R, G, B.

    Histograms are computed on the size-capped pixels; no zero-padding is
    applied (padding would inject artificial black pixels).
    """
    capped = imagecore.cap_longer_side(img)
    parts = [
        descriptive_stats(channel_histogram(ch))
        for ch in imagecore.split_channels(capped)
    ]
    return np.concatenate(parts)
