"""Pseudo-label quality filtering.

Detector-estimated annotations are kept only when they look densely and
plausibly annotated: enough lines, enough total line length, and not too
many junctions per line.  All three comparisons are strict.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .geometry import WireframeAnnotation, segment_length

DEFAULT_MIN_LINES = 74.98
DEFAULT_MIN_TOTAL_LENGTH = 6456.57
DEFAULT_MAX_RATIO = 1.34


@dataclass
class CriteriaStats:
    num_lines: int
    total_length: float
    junction_line_ratio: float | None  # None when the image has no lines


@dataclass
class FilterThresholds:
    min_lines: float = DEFAULT_MIN_LINES
    min_total_length: float = DEFAULT_MIN_TOTAL_LENGTH
    max_ratio: float = DEFAULT_MAX_RATIO

    def __post_init__(self):
        if min(self.min_lines, self.min_total_length, self.max_ratio) <= 0:
            raise ValueError("filter thresholds must be positive")


class Criterion(Enum):
    NUM_LINES = "lines"
    TOTAL_LENGTH = "length"
    JUNCTION_RATIO = "ratio"


def criteria_stats(ann: WireframeAnnotation) -> CriteriaStats:
    num_lines = len(ann.lines)
    total = float(sum(segment_length(seg) for seg in ann.lines))
    ratio = len(ann.junctions) / num_lines if num_lines > 0 else None
    return CriteriaStats(num_lines=num_lines, total_length=total, junction_line_ratio=ratio)


def passes_filter(stats: CriteriaStats, th: FilterThresholds) -> bool:
    """Conjunction of the three strict inequalities; undefined ratio fails."""
    if stats.junction_line_ratio is None:
        return False
    return (
        stats.num_lines > th.min_lines
        and stats.total_length > th.min_total_length
        and stats.junction_line_ratio < th.max_ratio
    )


def criterion_value(stats: CriteriaStats, criterion: Criterion) -> float | None:
    if criterion is Criterion.NUM_LINES:
        return float(stats.num_lines)
    if criterion is Criterion.TOTAL_LENGTH:
        return stats.total_length
    return stats.junction_line_ratio


@dataclass
class Histogram:
    """Equal-width bins over [lo, hi) plus under/overflow buckets.

    Undefined values (ratio of a zero-line image) land in the underflow
    bucket so the total always equals the input count.
    """

    lo: float
    hi: float
    counts: np.ndarray
    underflow: int
    overflow: int

    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow

    def rows(self) -> list[tuple[float, float, int]]:
        """(bin_lo, bin_hi, count) rows: underflow, regular bins, overflow."""
        width = (self.hi - self.lo) / len(self.counts)
        out = [(float("-inf"), self.lo, self.underflow)]
        for i, c in enumerate(self.counts):
            out.append((self.lo + i * width, self.lo + (i + 1) * width, int(c)))
        out.append((self.hi, float("inf"), self.overflow))
        return out


def histogram(
    dataset: Iterable[CriteriaStats],
    criterion: Criterion,
    bin_count: int,
    value_range: tuple[float, float],
) -> Histogram:
    lo, hi = value_range
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    if not lo < hi:
        raise ValueError("range must satisfy lo < hi")
    counts = np.zeros(bin_count, dtype=np.int64)
    underflow = overflow = 0
    width = (hi - lo) / bin_count
    for stats in dataset:
        v = criterion_value(stats, criterion)
        if v is None or v < lo:
            underflow += 1
        elif v >= hi:
            overflow += 1
        else:
            counts[min(int((v - lo) / width), bin_count - 1)] += 1
    return Histogram(lo=lo, hi=hi, counts=counts, underflow=underflow, overflow=overflow)
