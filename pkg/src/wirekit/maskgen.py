"""Silhouette pools and hole placement.

A hole is a foreground-object silhouette stamped onto the image frame.
Holes are placed either at an entirely random on-frame offset, or by the
avoid-isolation search, which tries hard not to swallow isolated scene
components (closed loops of lines).  Placement outcomes are classified:

* ``LINES_ONLY``   -- the hole crosses line segments but contains no junction;
* ``JUNCTIONS_OK`` -- the hole contains junction(s) but fully swallows at
  most one segment, so visible context remains;
* ``BEST_EFFORT``  -- no acceptable placement was found within the attempt
  budget; the search kept the placement with the fewest fully-swallowed
  segments, preferring larger line overlap;
* ``INVALID``      -- classification of an arbitrary mask that fits none of
  the above (never produced by the avoid-isolation search itself).

Silhouettes are bucketed into hole-size intervals by their pixel area as
a fraction of the 512x512 reference frame: interval 0 covers (0.1%, 1%]
and interval i >= 1 covers (i%, (i+1)%].
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import EmptyInterval, FractionTooSmall, NoPlacement
from .geometry import (
    MaskBitmap,
    WireframeAnnotation,
    count_contained_junctions,
    count_contained_segments,
    point_cell,
    rasterize_segment,
    segment_mask_overlap,
)
from .rng import derive_rng

REFERENCE_SIDE = 512
REFERENCE_AREA = REFERENCE_SIDE * REFERENCE_SIDE
MAX_SILHOUETTE_AREA = REFERENCE_AREA * 0.30  # 78643.2 px
MIN_AREA_FRACTION = 0.001
DEFAULT_MAX_ATTEMPTS = 500
LINES_ONLY_CHANCE = 0.2


class HoleType(Enum):
    LINES_ONLY = "lines-only"
    JUNCTIONS_OK = "junctions-ok"
    BEST_EFFORT = "best-effort"
    INVALID = "invalid"


@dataclass
class SilhouetteEntry:
    """A silhouette bitmap with its derived stats.

    ``interval`` is None for silhouettes below the 0.1% area floor; such
    entries can still be placed directly but never enter a bucketed pool.
    """

    bitmap: np.ndarray  # bool, True = object pixel
    area: int
    bbox: tuple[int, int, int, int]  # x, y, w, h (tight)
    interval: int | None

    @classmethod
    def from_bitmap(cls, bitmap: np.ndarray) -> "SilhouetteEntry":
        bitmap = np.asarray(bitmap, dtype=bool)
        ys, xs = np.nonzero(bitmap)
        area = int(len(xs))
        if area == 0:
            raise FractionTooSmall("silhouette has no object pixels")
        x0, x1 = int(xs.min()), int(xs.max())
        y0, y1 = int(ys.min()), int(ys.max())
        bbox = (x0, y0, x1 - x0 + 1, y1 - y0 + 1)
        try:
            interval = interval_of_area(area)
        except FractionTooSmall:
            interval = None
        return cls(bitmap=bitmap, area=area, bbox=bbox, interval=interval)

    def cropped(self) -> np.ndarray:
        x, y, w, h = self.bbox
        return self.bitmap[y : y + h, x : x + w]


def filter_silhouette(s: SilhouetteEntry) -> bool:
    """Keep silhouettes whose tight bbox side is under the reference frame
    side and whose area is under 30% of the reference frame."""
    _, _, w, h = s.bbox
    return max(w, h) < REFERENCE_SIDE and s.area < MAX_SILHOUETTE_AREA


def interval_of_area(area: int) -> int:
    """Hole-size interval index for a pixel area (reference-frame fraction)."""
    f = area / REFERENCE_AREA
    if f <= MIN_AREA_FRACTION:
        raise FractionTooSmall(
            f"area fraction {f:.6f} is at or below the {MIN_AREA_FRACTION:.1%} floor"
        )
    return math.ceil(f * 100) - 1


def interval_of(s: SilhouetteEntry) -> int:
    return interval_of_area(s.area)


def interval_bounds(index: int) -> tuple[float, float]:
    """Half-open (low, high] area-fraction bounds of an interval."""
    if index < 0:
        raise ValueError("interval index must be >= 0")
    low = MIN_AREA_FRACTION if index == 0 else index / 100
    return low, (index + 1) / 100


def classify_hole(ann: WireframeAnnotation, mask: MaskBitmap) -> HoleType:
    """Classify a mask against the annotation it occludes."""
    junctions_inside = count_contained_junctions(ann, mask)
    if junctions_inside == 0:
        overlaps = any(segment_mask_overlap(seg, mask) > 0 for seg in ann.lines)
        return HoleType.LINES_ONLY if overlaps else HoleType.INVALID
    if count_contained_segments(ann, mask) <= 1:
        return HoleType.JUNCTIONS_OK
    return HoleType.INVALID


@dataclass
class PlacedMask:
    """A placement outcome: the mask plus its claimed hole type.

    ``search_trace`` records (swallowed_segments, overlap_pixels) for every
    best-effort attempt; ``zero_overlap`` flags the degenerate case where no
    attempt overlapped any line, in which case the last attempted placement
    is returned.
    """

    mask: MaskBitmap
    hole_type: HoleType
    fallback: bool = False
    zero_overlap: bool = False
    search_trace: list[tuple[int, int]] | None = None


class _SceneCache:
    """Precomputed per-scene arrays so placement attempts stay cheap.

    An attempt only needs hole-membership of fixed cell sets (junction
    cells, segment endpoint cells, rasterized line pixels), which reduces
    to lookups into the silhouette bitmap shifted by the candidate offset.
    Results agree exactly with the definitional path through
    :func:`classify_hole` on the materialized mask.
    """

    def __init__(self, ann: WireframeAnnotation):
        w, h = ann.width, ann.height
        self.width, self.height = w, h

        jc = [point_cell(j.position, w, h) for j in ann.junctions]
        jc = [c for c in jc if c is not None]
        self.jx = np.array([c[0] for c in jc], dtype=np.int64)
        self.jy = np.array([c[1] for c in jc], dtype=np.int64)

        e1, e2 = [], []
        for seg in ann.lines:
            c1 = point_cell(seg.p1, w, h)
            c2 = point_cell(seg.p2, w, h)
            if c1 is not None and c2 is not None:
                e1.append(c1)
                e2.append(c2)
        self.e1 = np.array(e1, dtype=np.int64).reshape(-1, 2)
        self.e2 = np.array(e2, dtype=np.int64).reshape(-1, 2)

        px, py = [], []
        for seg in ann.lines:
            for x, y in rasterize_segment(seg, w, h):
                px.append(x)
                py.append(y)
        self.px = np.array(px, dtype=np.int64)
        self.py = np.array(py, dtype=np.int64)

    @staticmethod
    def _in_hole(sil: np.ndarray, ox: int, oy: int, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        bh, bw = sil.shape
        inside = (xs >= ox) & (xs < ox + bw) & (ys >= oy) & (ys < oy + bh)
        out = np.zeros(xs.shape, dtype=bool)
        if inside.any():
            out[inside] = sil[ys[inside] - oy, xs[inside] - ox]
        return out

    def evaluate(self, sil: np.ndarray, ox: int, oy: int) -> tuple[int, int, int]:
        """(contained junctions, fully-swallowed segments, overlap pixels)."""
        cj = int(self._in_hole(sil, ox, oy, self.jx, self.jy).sum())
        cs = int(
            (
                self._in_hole(sil, ox, oy, self.e1[:, 0], self.e1[:, 1])
                & self._in_hole(sil, ox, oy, self.e2[:, 0], self.e2[:, 1])
            ).sum()
        )
        overlap = int(self._in_hole(sil, ox, oy, self.px, self.py).sum())
        return cj, cs, overlap


def _offset_range(s: SilhouetteEntry, width: int, height: int) -> tuple[int, int]:
    _, _, bw, bh = s.bbox
    max_ox, max_oy = width - bw, height - bh
    if max_ox < 0 or max_oy < 0:
        raise NoPlacement(
            f"silhouette bbox {bw}x{bh} does not fit in {width}x{height} frame"
        )
    return max_ox, max_oy


def _stamp(sil: np.ndarray, ox: int, oy: int, width: int, height: int) -> MaskBitmap:
    bits = np.zeros((height, width), dtype=bool)
    bh, bw = sil.shape
    bits[oy : oy + bh, ox : ox + bw] = sil
    return MaskBitmap(bits)


def random_place(
    s: SilhouetteEntry, frame: tuple[int, int], rng: np.random.Generator
) -> MaskBitmap:
    """Translate the silhouette to a uniformly random on-frame offset."""
    width, height = frame
    max_ox, max_oy = _offset_range(s, width, height)
    ox = int(rng.integers(0, max_ox + 1))
    oy = int(rng.integers(0, max_oy + 1))
    return _stamp(s.cropped(), ox, oy, width, height)


def avoid_isolation_place(
    s: SilhouetteEntry,
    ann: WireframeAnnotation,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> PlacedMask:
    """Place the silhouette while avoiding isolated scene components.

    With 20% probability the search first spends up to ``max_attempts``
    random offsets looking for a LINES_ONLY hole.  It then spends up to
    ``max_attempts`` offsets looking for a JUNCTIONS_OK hole.  If both
    phases fail, a best-effort sweep keeps the placement with the fewest
    fully-swallowed segments, accepting a new candidate only when it also
    strictly increases line overlap (so the very first attempt with any
    overlap seeds the candidate).  If every sweep attempt has zero
    overlap, the last attempted placement is returned and flagged.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    width, height = ann.width, ann.height
    max_ox, max_oy = _offset_range(s, width, height)
    scene = _SceneCache(ann)
    sil = s.cropped()

    def draw() -> tuple[int, int]:
        return int(rng.integers(0, max_ox + 1)), int(rng.integers(0, max_oy + 1))

    if rng.random() > 1.0 - LINES_ONLY_CHANCE:
        for _ in range(max_attempts):
            ox, oy = draw()
            cj, _, overlap = scene.evaluate(sil, ox, oy)
            if cj == 0 and overlap > 0:
                return PlacedMask(_stamp(sil, ox, oy, width, height), HoleType.LINES_ONLY)

    for _ in range(max_attempts):
        ox, oy = draw()
        cj, cs, _ = scene.evaluate(sil, ox, oy)
        if cj >= 1 and cs <= 1:
            return PlacedMask(_stamp(sil, ox, oy, width, height), HoleType.JUNCTIONS_OK)

    swallowed_best = math.inf
    overlap_best = 0
    best: tuple[int, int] | None = None
    last: tuple[int, int] | None = None
    trace: list[tuple[int, int]] = []
    for _ in range(max_attempts):
        ox, oy = draw()
        last = (ox, oy)
        _, cs, overlap = scene.evaluate(sil, ox, oy)
        trace.append((cs, overlap))
        if cs <= swallowed_best and overlap > overlap_best:
            swallowed_best = cs
            overlap_best = overlap
            best = (ox, oy)

    zero_overlap = best is None
    ox, oy = last if zero_overlap else best
    return PlacedMask(
        _stamp(sil, ox, oy, width, height),
        HoleType.BEST_EFFORT,
        fallback=True,
        zero_overlap=zero_overlap,
        search_trace=trace,
    )


@dataclass
class MaskPool:
    """Pre-generated hole masks keyed by (image_id, interval)."""

    seed: int
    mode: str  # "avoid-isolation" | "random"
    n: int
    placements: dict[tuple[str, int], list[PlacedMask]] = field(default_factory=dict)

    def masks(self, image_id: str, interval: int) -> list[MaskBitmap]:
        key = (image_id, interval)
        if key not in self.placements:
            raise EmptyInterval(f"no masks for image {image_id!r}, interval {interval}")
        return [p.mask for p in self.placements[key]]

    @property
    def entries(self) -> dict[tuple[str, int], list[MaskBitmap]]:
        return {k: [p.mask for p in v] for k, v in self.placements.items()}


def group_by_interval(pool: list[SilhouetteEntry]) -> dict[int, list[SilhouetteEntry]]:
    grouped: dict[int, list[SilhouetteEntry]] = {}
    for s in pool:
        if s.interval is not None:
            grouped.setdefault(s.interval, []).append(s)
    return grouped


def generate_pool_candidate(
    ann: WireframeAnnotation,
    subpool: list[SilhouetteEntry],
    seed: int,
    image_id: str,
    interval: int,
    candidate: int,
    mode: str,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> PlacedMask:
    """Generate one pool candidate from its keyed stream.

    Output depends only on (seed, image_id, interval, candidate) and the
    inputs, never on scheduling order, so pools can be built in parallel.
    """
    rng = derive_rng(seed, image_id, interval, candidate)
    s = subpool[int(rng.integers(0, len(subpool)))]
    if mode == "avoid-isolation":
        return avoid_isolation_place(s, ann, rng, max_attempts)
    if mode == "random":
        mask = random_place(s, (ann.width, ann.height), rng)
        return PlacedMask(mask, classify_hole(ann, mask))
    raise ValueError(f"unknown placement mode {mode!r}")


def build_mask_pool(
    images: list[tuple[str, WireframeAnnotation]],
    pool: list[SilhouetteEntry],
    n: int,
    intervals: range | list[int],
    mode: str,
    seed: int,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    workers: int = 1,
) -> MaskPool:
    """Build N candidate masks per (image, interval).

    Each candidate uses its own keyed RNG stream, so the result is
    byte-identical regardless of ``workers``.
    """
    by_interval = group_by_interval(pool)
    intervals = list(intervals)
    for i in intervals:
        if not by_interval.get(i):
            raise EmptyInterval(f"no silhouettes available for interval {i}")

    tasks = [
        (image_id, ann, i, c)
        for image_id, ann in images
        for i in intervals
        for c in range(n)
    ]

    def run(task):
        image_id, ann, i, c = task
        return (image_id, i, c), generate_pool_candidate(
            ann, by_interval[i], seed, image_id, i, c, mode, max_attempts
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            results = dict(pool_exec.map(run, tasks))
    else:
        results = dict(map(run, tasks))

    placements: dict[tuple[str, int], list[PlacedMask]] = {}
    for image_id, _ in images:
        for i in intervals:
            placements[(image_id, i)] = [results[(image_id, i, c)] for c in range(n)]
    return MaskPool(seed=seed, mode=mode, n=n, placements=placements)
