import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_mask
from wirekit.geometry import (
    LineSegment,
    MaskBitmap,
    WireframeAnnotation,
    Junction,
    count_contained_junctions,
    count_contained_segments,
    point_in_mask,
    rasterize_segment,
    segment_length,
    segment_mask_overlap,
)


def reference_bresenham(x0, y0, x1, y1):
    """Independent per-axis Bresenham used as the rasterization oracle."""
    pixels = []
    if abs(y1 - y0) <= abs(x1 - x0):
        if x0 > x1:
            x0, x1, y0, y1 = x1, x0, y1, y0
        dx, dy = x1 - x0, y1 - y0
        step = -1 if dy < 0 else 1
        dy = abs(dy)
        err = 2 * dy - dx
        y = y0
        for x in range(x0, x1 + 1):
            pixels.append((x, y))
            if err > 0:
                y += step
                err -= 2 * dx
            err += 2 * dy
    else:
        if y0 > y1:
            x0, x1, y0, y1 = x1, x0, y1, y0
        dx, dy = x1 - x0, y1 - y0
        step = -1 if dx < 0 else 1
        dx = abs(dx)
        err = 2 * dx - dy
        x = x0
        for y in range(y0, y1 + 1):
            pixels.append((x, y))
            if err > 0:
                x += step
                err -= 2 * dy
            err += 2 * dx
    return pixels


class TestSegmentLength:
    def test_three_four_five(self):
        assert segment_length(LineSegment((0, 0), (3, 4))) == 5.0

    def test_degenerate(self):
        assert segment_length(LineSegment((2, 2), (2, 2))) == 0.0

    def test_axis_aligned(self):
        assert segment_length(LineSegment((0, 0), (10, 0))) == 10.0

    @given(
        st.tuples(*[st.floats(-100, 100) for _ in range(4)]),
    )
    def test_symmetric_and_nonnegative(self, coords):
        x1, y1, x2, y2 = coords
        a = segment_length(LineSegment((x1, y1), (x2, y2)))
        b = segment_length(LineSegment((x2, y2), (x1, y1)))
        assert a == b >= 0.0


class TestRasterize:
    def test_horizontal_run(self):
        assert rasterize_segment(LineSegment((0, 0), (3, 0)), 8, 8) == {
            (0, 0),
            (1, 0),
            (2, 0),
            (3, 0),
        }

    def test_single_pixel(self):
        assert rasterize_segment(LineSegment((0, 0), (0, 0)), 8, 8) == {(0, 0)}

    def test_diagonal_matches_reference(self):
        # expected set computed with the independent per-axis walker
        assert set(reference_bresenham(0, 0, 2, 2)) == {(0, 0), (1, 1), (2, 2)}
        assert rasterize_segment(LineSegment((0, 0), (2, 2)), 8, 8) == {(0, 0), (1, 1), (2, 2)}

    def test_fully_off_grid_is_empty(self):
        assert rasterize_segment(LineSegment((-10, -10), (-2, -5)), 8, 8) == set()

    def test_clipped_to_grid(self):
        pixels = rasterize_segment(LineSegment((-3, 0), (3, 0)), 4, 4)
        assert pixels == {(0, 0), (1, 0), (2, 0), (3, 0)}

    @pytest.mark.parametrize("seed", range(30))
    def test_walk_properties_random(self, seed):
        r = np.random.default_rng(seed)
        x0, y0, x1, y1 = (int(v) for v in r.integers(0, 64, 4))
        seg = LineSegment((x0, y0), (x1, y1))
        pixels = rasterize_segment(seg, 64, 64)
        # endpoint-order invariance
        assert pixels == rasterize_segment(LineSegment((x1, y1), (x0, y0)), 64, 64)
        # contains both endpoints, exact pixel count of an 8-connected walk
        assert (x0, y0) in pixels and (x1, y1) in pixels
        assert len(pixels) == max(abs(x1 - x0), abs(y1 - y0)) + 1
        # 8-connected: walk one step at a time along the dominant axis
        ref = reference_bresenham(x0, y0, x1, y1)
        assert len(ref) == len(pixels)
        steep = abs(y1 - y0) > abs(x1 - x0)
        ordered = sorted(pixels, key=(lambda p: p[1]) if steep else (lambda p: p[0]))
        for (ax, ay), (bx, by) in zip(ordered, ordered[1:]):
            assert max(abs(ax - bx), abs(ay - by)) == 1

    @given(st.tuples(*[st.floats(0, 63) for _ in range(4)]))
    @settings(max_examples=200)
    def test_count_bound_on_grid(self, coords):
        x1, y1, x2, y2 = coords
        seg = LineSegment((x1, y1), (x2, y2))
        pixels = rasterize_segment(seg, 64, 64)
        assert len(pixels) <= math.ceil(segment_length(seg)) + 1
        rounded = (math.floor(x1 + 0.5), math.floor(y1 + 0.5))
        assert rounded in pixels


class TestContainment:
    def test_empty_mask(self):
        assert not point_in_mask(MaskBitmap.empty(8, 8), (3, 3))

    def test_full_mask(self):
        assert point_in_mask(MaskBitmap.full(8, 8), (3, 3))

    def test_out_of_grid(self):
        assert not point_in_mask(MaskBitmap.full(8, 8), (-1, -1))
        assert not point_in_mask(MaskBitmap.full(8, 8), (8.5, 2))

    def test_border_clamps_into_last_cell(self):
        m = MaskBitmap.empty(8, 8)
        m.bits[7, 7] = True
        assert point_in_mask(m, (8.0, 8.0))
        assert not point_in_mask(m, (8.0001, 8.0))


class TestOverlap:
    def test_outside_hole(self):
        m = MaskBitmap.empty(8, 8)
        m.bits[5, :] = True
        assert segment_mask_overlap(LineSegment((0, 0), (7, 0)), m) == 0

    def test_inside_full_mask(self):
        seg = LineSegment((0, 0), (7, 0))
        m = MaskBitmap.full(8, 8)
        assert segment_mask_overlap(seg, m) == len(rasterize_segment(seg, 8, 8))

    def test_partial_overlap_count(self):
        # expected 4 = |reference rasterization pixels on row 0, columns 0..3|
        m = MaskBitmap.empty(8, 8)
        m.bits[0, :4] = True
        assert segment_mask_overlap(LineSegment((0, 0), (7, 0)), m) == 4

    @pytest.mark.parametrize("seed", range(10))
    def test_bounded_by_raster_count(self, seed):
        r = np.random.default_rng(seed)
        seg = LineSegment(tuple(r.uniform(0, 16, 2)), tuple(r.uniform(0, 16, 2)))
        m = random_mask(r, 16, 16)
        n = len(rasterize_segment(seg, 16, 16))
        assert 0 <= segment_mask_overlap(seg, m) <= n
        assert segment_mask_overlap(seg, MaskBitmap.full(16, 16)) == n
        assert segment_mask_overlap(seg, MaskBitmap.empty(16, 16)) == 0


class TestCounting:
    def _ann(self):
        lines = [LineSegment((1, 1), (6, 1)), LineSegment((1, 3), (6, 3)), LineSegment((2, 5), (5, 5))]
        junctions = [Junction((1, 1)), Junction((6, 1)), Junction((3, 3))]
        return WireframeAnnotation(8, 8, lines, junctions)

    def test_empty_mask_counts_zero(self):
        ann = self._ann()
        m = MaskBitmap.empty(8, 8)
        assert count_contained_segments(ann, m) == 0
        assert count_contained_junctions(ann, m) == 0

    def test_full_mask_counts_all(self):
        ann = self._ann()
        m = MaskBitmap.full(8, 8)
        assert count_contained_segments(ann, m) == len(ann.lines)
        assert count_contained_junctions(ann, m) == len(ann.junctions)

    def test_one_endpoint_out_not_counted(self):
        ann = WireframeAnnotation(8, 8, [LineSegment((1, 1), (6, 1))], [])
        m = MaskBitmap.empty(8, 8)
        m.bits[1, :3] = True  # covers (1,1) but not (6,1)
        assert count_contained_segments(ann, m) == 0

    def test_boundary_junction_counts_iff_cell_set(self):
        ann = WireframeAnnotation(8, 8, [], [Junction((4.0, 4.0))])
        m = MaskBitmap.empty(8, 8)
        m.bits[4, 4] = True
        assert count_contained_junctions(ann, m) == 1
        m2 = MaskBitmap.empty(8, 8)
        m2.bits[3, 3] = True
        assert count_contained_junctions(ann, m2) == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_monotone_under_mask_growth(self, seed):
        r = np.random.default_rng(seed)
        lines = [
            LineSegment(tuple(r.uniform(0, 16, 2)), tuple(r.uniform(0, 16, 2))) for _ in range(6)
        ]
        junctions = [Junction(tuple(r.uniform(0, 16, 2))) for _ in range(6)]
        ann = WireframeAnnotation(16, 16, lines, junctions)
        small = random_mask(r, 16, 16, density=0.3)
        grown = MaskBitmap(small.bits | (r.random((16, 16)) < 0.3))
        assert count_contained_segments(ann, grown) >= count_contained_segments(ann, small)
        assert count_contained_junctions(ann, grown) >= count_contained_junctions(ann, small)
        assert count_contained_segments(ann, grown) <= len(ann.lines)
