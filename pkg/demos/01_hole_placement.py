"""Hole placement on a synthetic wireframe scene.

Builds a loop-free wireframe, stamps object silhouettes onto it with both
placement strategies, and shows why the avoid-isolation search matters:
random placement happily swallows junction clusters, the search does not.
"""

try:
    import wirekit  # noqa: F401
except ImportError:  # running from a source checkout
    import pathlib
    import sys

    sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from pathlib import Path

import numpy as np

from wirekit import io
from wirekit.geometry import (
    Junction,
    LineSegment,
    WireframeAnnotation,
    count_contained_junctions,
    count_contained_segments,
)
from wirekit.maskgen import (
    SilhouetteEntry,
    avoid_isolation_place,
    classify_hole,
    interval_bounds,
    random_place,
)
from wirekit.rng import derive_rng

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# A loop-free scene: each new node hangs off an earlier one.
rng = np.random.default_rng(0)
pts = rng.uniform(30, 482, size=(14, 2))
lines = [LineSegment(tuple(pts[i]), tuple(pts[int(rng.integers(0, i))])) for i in range(1, 14)]
scene = WireframeAnnotation(512, 512, lines, [Junction(tuple(p)) for p in pts])
print(f"scene: {len(scene.lines)} segments, {len(scene.junctions)} junctions")

# A 5%-of-frame rectangular silhouette.
area = int(0.05 * 512 * 512)
w = int(np.ceil(np.sqrt(area)))
bitmap = np.zeros((int(np.ceil(area / w)), w), dtype=bool)
bitmap.reshape(-1)[:area] = True
sil = SilhouetteEntry.from_bitmap(bitmap)
lo, hi = interval_bounds(sil.interval)
print(f"silhouette: {sil.area} px, interval {sil.interval} ({lo:.1%} .. {hi:.1%}]\n")

print("placement comparison over 10 seeds:")
print(f"{'seed':>4} {'random: junctions/segments swallowed':>38} {'avoid-isolation outcome':>26}")
for seed in range(10):
    random_mask = random_place(sil, (512, 512), derive_rng(seed, "rand"))
    placed = avoid_isolation_place(sil, scene, derive_rng(seed, "avoid"))
    cj = count_contained_junctions(scene, random_mask)
    cs = count_contained_segments(scene, random_mask)
    print(f"{seed:>4} {f'{cj} junctions, {cs} segments ({classify_hole(scene, random_mask).value})':>38} {placed.hole_type.value:>26}")

placed = avoid_isolation_place(sil, scene, derive_rng(3, "avoid"))
io.write_mask(out_dir / "avoid_isolation_mask.pgm", placed.mask)
print(f"\nhole fraction of the kept mask: {placed.mask.hole_fraction():.4f}")
print(f"wrote {out_dir / 'avoid_isolation_mask.pgm'}")
