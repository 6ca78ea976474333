import numpy as np
import pytest

from wirekit.geometry import Junction, LineSegment, MaskBitmap, WireframeAnnotation
from wirekit.maskgen import REFERENCE_AREA, SilhouetteEntry, interval_bounds


def make_tree_scene(rng, size=512, nodes=12, margin=20) -> WireframeAnnotation:
    """Random loop-free wireframe: every new node attaches to one earlier node."""
    pts = rng.uniform(margin, size - margin, size=(nodes, 2))
    lines = [
        LineSegment(tuple(pts[i]), tuple(pts[int(rng.integers(0, i))]))
        for i in range(1, nodes)
    ]
    junctions = [Junction(tuple(p)) for p in pts]
    return WireframeAnnotation(size, size, lines, junctions)


def make_rect_silhouette(rng, interval: int) -> SilhouetteEntry:
    """Rectangle-ish silhouette with an exact pixel area inside the interval."""
    lo, hi = interval_bounds(interval)
    area = int(rng.integers(int(np.floor(lo * REFERENCE_AREA)) + 1, int(hi * REFERENCE_AREA) + 1))
    w = int(np.ceil(np.sqrt(area)))
    h = int(np.ceil(area / w))
    bitmap = np.zeros((h, w), dtype=bool)
    bitmap.reshape(-1)[:area] = True
    entry = SilhouetteEntry.from_bitmap(bitmap)
    assert entry.area == area and entry.interval == interval
    return entry


def random_mask(rng, width, height, density=0.3) -> MaskBitmap:
    return MaskBitmap(rng.random((height, width)) < density)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
