"""Geometric primitives: segments, junctions, masks, rasterization, containment.

Coordinates are continuous, origin at the top-left, pixel-center
convention.  A continuous point is considered inside a grid cell by the
floor-and-clamp rule (see :func:`point_in_mask`); points outside the
``[0, width] x [0, height]`` frame are never contained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

Point = tuple[float, float]


@dataclass(frozen=True)
class LineSegment:
    """A line segment with an optional detector score."""

    p1: Point
    p2: Point
    score: float | None = None

    def __post_init__(self):
        for p in (self.p1, self.p2):
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise ValueError(f"non-finite segment endpoint {p}")


@dataclass(frozen=True)
class Junction:
    """A junction position with an optional detector score."""

    position: Point
    score: float | None = None

    def __post_init__(self):
        x, y = self.position
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite junction position {self.position}")


@dataclass
class WireframeAnnotation:
    """Line segments plus junctions for one image frame."""

    width: int
    height: int
    lines: list[LineSegment] = field(default_factory=list)
    junctions: list[Junction] = field(default_factory=list)


@dataclass
class MaskBitmap:
    """Binary occupancy grid; True marks a hole pixel."""

    bits: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.ndim != 2:
            raise ValueError(f"mask bits must be 2-D, got shape {self.bits.shape}")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def hole_count(self) -> int:
        return int(self.bits.sum())

    def hole_fraction(self) -> float:
        return self.hole_count() / (self.width * self.height)

    @classmethod
    def empty(cls, width: int, height: int) -> "MaskBitmap":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "MaskBitmap":
        return cls(np.ones((height, width), dtype=bool))


def segment_length(seg: LineSegment) -> float:
    """Euclidean length of a segment in pixels."""
    return math.hypot(seg.p2[0] - seg.p1[0], seg.p2[1] - seg.p1[1])


def _round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def _bresenham(x0: int, y0: int, x1: int, y1: int):
    """8-connected integer Bresenham walk, yielding every pixel inclusive."""
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        yield x, y
        if x == x1 and y == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def rasterize_segment(seg: LineSegment, width: int, height: int) -> set[tuple[int, int]]:
    """Pixel set of the segment on a width x height grid.

    Endpoints are rounded half-up, the walk is canonicalized to run from
    the lexicographically smaller endpoint so the result is endpoint-order
    invariant, and pixels outside the grid are dropped afterwards.
    Degenerate segments rasterize to a single pixel.
    """
    if width <= 0 or height <= 0:
        raise ValueError("grid dimensions must be positive")
    x0, y0 = _round_half_up(seg.p1[0]), _round_half_up(seg.p1[1])
    x1, y1 = _round_half_up(seg.p2[0]), _round_half_up(seg.p2[1])
    if (x1, y1) < (x0, y0):
        x0, y0, x1, y1 = x1, y1, x0, y0
    # cheap reject when the walk cannot touch the grid at all
    if max(x0, x1) < 0 or min(x0, x1) >= width or max(y0, y1) < 0 or min(y0, y1) >= height:
        return set()
    return {
        (x, y)
        for x, y in _bresenham(x0, y0, x1, y1)
        if 0 <= x < width and 0 <= y < height
    }


def point_cell(p: Point, width: int, height: int) -> tuple[int, int] | None:
    """Grid cell a continuous point falls into, or None when off-frame.

    Points on the right/bottom border (x == width, y == height) clamp
    into the last cell; anything outside [0, width] x [0, height] is
    off-frame.
    """
    x, y = p
    if not (0.0 <= x <= width and 0.0 <= y <= height):
        return None
    cx = min(int(math.floor(x)), width - 1)
    cy = min(int(math.floor(y)), height - 1)
    return cx, cy


def point_in_mask(mask: MaskBitmap, p: Point) -> bool:
    """True iff the point's grid cell is a hole pixel."""
    cell = point_cell(p, mask.width, mask.height)
    if cell is None:
        return False
    cx, cy = cell
    return bool(mask.bits[cy, cx])


def segment_mask_overlap(seg: LineSegment, mask: MaskBitmap) -> int:
    """Number of the segment's rasterized pixels that are hole pixels."""
    pixels = rasterize_segment(seg, mask.width, mask.height)
    return sum(1 for x, y in pixels if mask.bits[y, x])


def count_contained_segments(ann: WireframeAnnotation, mask: MaskBitmap) -> int:
    """Segments whose both endpoints fall inside the hole."""
    return sum(
        1
        for seg in ann.lines
        if point_in_mask(mask, seg.p1) and point_in_mask(mask, seg.p2)
    )


def count_contained_junctions(ann: WireframeAnnotation, mask: MaskBitmap) -> int:
    """Junctions whose position falls inside the hole."""
    return sum(1 for j in ann.junctions if point_in_mask(mask, j.position))
