import math

import numpy as np
import pytest

from conftest import make_rect_silhouette, make_tree_scene
from wirekit.errors import EmptyInterval, FractionTooSmall, NoPlacement
from wirekit.geometry import Junction, LineSegment, MaskBitmap, WireframeAnnotation
from wirekit.maskgen import (
    HoleType,
    SilhouetteEntry,
    avoid_isolation_place,
    build_mask_pool,
    classify_hole,
    filter_silhouette,
    group_by_interval,
    interval_bounds,
    interval_of,
    interval_of_area,
    random_place,
)
from wirekit.rng import derive_rng


def entry_with(bbox_w, bbox_h, area):
    bitmap = np.zeros((bbox_h, bbox_w), dtype=bool)
    bitmap.reshape(-1)[:area] = True
    # force the tight bbox to span the full rectangle
    bitmap[0, -1] = True
    bitmap[-1, 0] = True
    e = SilhouetteEntry.from_bitmap(bitmap)
    e.area = area  # keep the nominal area for the filter check
    return e


class TestSilhouetteFilter:
    def test_oversized_bbox_rejected(self):
        assert not filter_silhouette(entry_with(600, 100, 5000))

    def test_oversized_area_rejected(self):
        assert not filter_silhouette(entry_with(300, 300, 80000))

    def test_small_silhouette_kept(self):
        assert filter_silhouette(entry_with(100, 100, 5000))

    def test_boundary_is_strict(self):
        assert not filter_silhouette(entry_with(512, 10, 600))
        assert filter_silhouette(entry_with(511, 10, 600))


class TestIntervals:
    def test_examples(self):
        assert interval_of_area(5000) == 1  # 1.907% -> (1%, 2%]
        assert interval_of_area(78000) == 29  # 29.75% -> (29%, 30%]

    def test_fraction_floor(self):
        with pytest.raises(FractionTooSmall):
            interval_of_area(262)  # 0.0999% <= 0.1%

    def test_bounds_are_half_open(self):
        # areas exactly on a percent boundary belong to the lower interval
        assert interval_of_area(512 * 512 // 100) == 0  # exactly 1%
        assert interval_of_area(512 * 512 // 100 + 1) == 1

    def test_entry_interval_consistent(self, rng):
        for i in range(0, 10):
            s = make_rect_silhouette(rng, i)
            lo, hi = interval_bounds(i)
            f = s.area / (512 * 512)
            assert lo < f <= hi
            assert interval_of(s) == i


class TestClassify:
    def _line_scene(self):
        # one long line, junctions far away at its endpoints
        lines = [LineSegment((0, 32), (63, 32))]
        junctions = [Junction((0, 32)), Junction((63, 32))]
        return WireframeAnnotation(64, 64, lines, junctions)

    def test_line_touch_without_junction(self):
        ann = self._line_scene()
        m = MaskBitmap.empty(64, 64)
        m.bits[30:35, 20:28] = True  # crosses the line, contains no junction
        assert classify_hole(ann, m) == HoleType.LINES_ONLY

    def test_junctions_with_one_swallowed_segment(self):
        lines = [LineSegment((10, 10), (14, 10)), LineSegment((10, 10), (10, 60))]
        junctions = [Junction((10, 10)), Junction((14, 10))]
        ann = WireframeAnnotation(64, 64, lines, junctions)
        m = MaskBitmap.empty(64, 64)
        m.bits[5:20, 5:20] = True  # contains both junctions, swallows one segment
        assert classify_hole(ann, m) == HoleType.JUNCTIONS_OK

    def test_too_many_swallowed_segments(self):
        pts = [(10, 10), (14, 10), (14, 14), (10, 14)]
        lines = [LineSegment(pts[i], pts[(i + 1) % 4]) for i in range(3)]
        junctions = [Junction(pts[0]), Junction(pts[2])]
        ann = WireframeAnnotation(64, 64, lines, junctions)
        m = MaskBitmap.empty(64, 64)
        m.bits[5:20, 5:20] = True  # 2 junctions and 3 swallowed segments
        assert classify_hole(ann, m) == HoleType.INVALID

    def test_no_contact_is_invalid(self):
        ann = self._line_scene()
        m = MaskBitmap.empty(64, 64)
        m.bits[1:5, 1:5] = True
        assert classify_hole(ann, m) == HoleType.INVALID


class TestAvoidIsolation:
    def test_loop_free_scene_yields_safe_types(self, rng):
        for trial in range(100):
            scene = make_tree_scene(rng, size=256, nodes=10)
            sil = make_rect_silhouette(rng, int(rng.integers(0, 4)))
            placed = avoid_isolation_place(sil, scene, derive_rng(1, "t", trial))
            assert placed.hole_type in (HoleType.LINES_ONLY, HoleType.JUNCTIONS_OK)
            assert classify_hole(scene, placed.mask) == placed.hole_type

    def _forced_scene(self):
        pts = [(30, 30), (34, 30), (34, 34), (30, 34)]
        lines = [LineSegment(pts[i], pts[(i + 1) % 4]) for i in range(4)]
        ann = WireframeAnnotation(64, 64, lines, [Junction(p) for p in pts])
        sil = SilhouetteEntry.from_bitmap(np.ones((60, 60), dtype=bool))
        return ann, sil

    def test_forced_fallback(self):
        # every feasible offset swallows the whole quad: both safe searches fail
        ann, sil = self._forced_scene()
        placed = avoid_isolation_place(sil, ann, derive_rng(9, "forced"), max_attempts=40)
        assert placed.hole_type == HoleType.BEST_EFFORT
        assert placed.fallback and not placed.zero_overlap
        assert len(placed.search_trace) == 40

    def test_fallback_trace_is_pareto_consistent(self):
        from wirekit.geometry import count_contained_segments, segment_mask_overlap

        ann, sil = self._forced_scene()
        placed = avoid_isolation_place(sil, ann, derive_rng(10, "forced"), max_attempts=40)
        final_n = count_contained_segments(ann, placed.mask)
        final_m = sum(segment_mask_overlap(seg, placed.mask) for seg in ann.lines)
        assert (final_n, final_m) in placed.search_trace
        # nothing attempted on the same stream strictly dominates the result
        for n, m in placed.search_trace:
            assert not (n < final_n and m > final_m)

    def test_zero_overlap_flagged(self):
        # no lines at all: every attempt has zero overlap
        ann = WireframeAnnotation(64, 64, [], [Junction((5, 5))])
        sil = SilhouetteEntry.from_bitmap(np.ones((8, 8), dtype=bool))
        placed = avoid_isolation_place(sil, ann, derive_rng(2, "empty"), max_attempts=10)
        assert placed.hole_type == HoleType.BEST_EFFORT
        assert placed.zero_overlap

    def test_deterministic_given_seed(self, rng):
        scene = make_tree_scene(rng, size=128, nodes=8)
        sil = make_rect_silhouette(rng, 1)
        a = avoid_isolation_place(sil, scene, derive_rng(3, "d"), max_attempts=1)
        b = avoid_isolation_place(sil, scene, derive_rng(3, "d"), max_attempts=1)
        assert np.array_equal(a.mask.bits, b.mask.bits)
        assert a.hole_type == b.hole_type

    def test_no_placement(self):
        ann = WireframeAnnotation(32, 32, [], [])
        sil = SilhouetteEntry.from_bitmap(np.ones((40, 40), dtype=bool))
        with pytest.raises(NoPlacement):
            avoid_isolation_place(sil, ann, derive_rng(0, "np"))


class TestRandomPlace:
    def test_single_feasible_placement(self):
        sil = SilhouetteEntry.from_bitmap(np.ones((16, 16), dtype=bool))
        m = random_place(sil, (16, 16), derive_rng(0, "one"))
        assert m.bits.all()

    def test_deterministic(self):
        sil = SilhouetteEntry.from_bitmap(np.ones((3, 3), dtype=bool))
        a = random_place(sil, (32, 32), derive_rng(5, "r"))
        b = random_place(sil, (32, 32), derive_rng(5, "r"))
        assert np.array_equal(a.bits, b.bits)

    def test_offsets_uniform(self):
        # 10k draws of a 1x1 silhouette in a 4x4 frame: 16 cells, each 1/16 +- 3 sigma
        sil = SilhouetteEntry.from_bitmap(np.ones((1, 1), dtype=bool))
        rng = derive_rng(123, "uniform")
        counts = np.zeros((4, 4), dtype=int)
        n = 10_000
        for _ in range(n):
            m = random_place(sil, (4, 4), rng)
            y, x = np.argwhere(m.bits)[0]
            counts[y, x] += 1
        expected = n / 16
        sigma = math.sqrt(n * (1 / 16) * (15 / 16))
        assert np.all(np.abs(counts - expected) <= 3 * sigma)

    def test_no_placement(self):
        sil = SilhouetteEntry.from_bitmap(np.ones((10, 10), dtype=bool))
        with pytest.raises(NoPlacement):
            random_place(sil, (8, 8), derive_rng(0, "np"))


class TestMaskPool:
    def _inputs(self, rng, n_images=2, size=128):
        images = [(f"img{k}", make_tree_scene(rng, size=size, nodes=8)) for k in range(n_images)]
        pool = [make_rect_silhouette(rng, i) for i in range(3) for _ in range(2)]
        return images, pool

    def test_counts_and_fractions(self, rng):
        images, pool = self._inputs(rng)
        # note: interval bounds are fractions of the 512x512 reference frame,
        # so pool frames here must be 512 for the fraction invariant
        images = [(f"img{k}", make_tree_scene(rng, size=512, nodes=8)) for k in range(2)]
        mp = build_mask_pool(images, pool, n=2, intervals=range(3), mode="avoid-isolation", seed=7)
        assert len(mp.placements) == 2 * 3
        for (image_id, interval), placements in mp.placements.items():
            assert len(placements) == 2
            lo, hi = interval_bounds(interval)
            for p in placements:
                assert lo < p.mask.hole_fraction() <= hi

    def test_deterministic_and_worker_invariant(self, rng):
        images, pool = self._inputs(rng)
        kw = dict(n=2, intervals=range(3), mode="random", seed=99)
        a = build_mask_pool(images, pool, **kw)
        b = build_mask_pool(images, pool, **kw)
        c = build_mask_pool(images, pool, workers=4, **kw)
        for key in a.placements:
            for pa, pb, pc in zip(a.placements[key], b.placements[key], c.placements[key]):
                assert np.array_equal(pa.mask.bits, pb.mask.bits)
                assert np.array_equal(pa.mask.bits, pc.mask.bits)
                assert pa.hole_type == pb.hole_type == pc.hole_type

    def test_empty_interval(self, rng):
        images, pool = self._inputs(rng)
        with pytest.raises(EmptyInterval):
            build_mask_pool(images, pool, n=1, intervals=[7], mode="random", seed=0)

    def test_group_by_interval(self, rng):
        _, pool = self._inputs(rng)
        grouped = group_by_interval(pool)
        assert sorted(grouped) == [0, 1, 2]
        assert all(len(v) == 2 for v in grouped.values())
