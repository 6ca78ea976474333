"""Pseudo-label quality filtering.

Simulates a detector that sometimes produces sparse or junction-happy
annotations, applies the three strict quality criteria, and prints the
criterion histograms the thresholds are judged against.
"""

try:
    import wirekit  # noqa: F401
except ImportError:
    import pathlib
    import sys

    sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from wirekit.geometry import Junction, LineSegment, WireframeAnnotation
from wirekit.pseudo import (
    Criterion,
    FilterThresholds,
    criteria_stats,
    histogram,
    passes_filter,
)

rng = np.random.default_rng(2)


def fake_detection(quality):
    """quality in [0, 1]: dense well-formed wireframes at 1, junk at 0."""
    n_lines = int(max(0.0, rng.normal(40 + 90 * quality, 10)))
    length_scale = 40 + 70 * quality
    lines = []
    for _ in range(n_lines):
        p = rng.uniform(0, 512, 2)
        d = rng.normal(0, length_scale, 2)
        q = np.clip(p + d, 0, 512)
        lines.append(LineSegment(tuple(p), tuple(q)))
    n_junc = int(n_lines * rng.uniform(0.6, 2.2 - quality))
    junctions = [Junction(tuple(rng.uniform(0, 512, 2))) for _ in range(n_junc)]
    return WireframeAnnotation(512, 512, lines, junctions)


population = [fake_detection(rng.random()) for _ in range(400)]
stats = [criteria_stats(ann) for ann in population]

th = FilterThresholds()
kept = sum(passes_filter(s, th) for s in stats)
print(f"thresholds: lines > {th.min_lines}, total length > {th.min_total_length}, ratio < {th.max_ratio}")
print(f"kept {kept} of {len(stats)} pseudo-labeled images\n")

for criterion, rng_hi in ((Criterion.NUM_LINES, 200), (Criterion.TOTAL_LENGTH, 20000), (Criterion.JUNCTION_RATIO, 3)):
    hist = histogram(stats, criterion, bin_count=10, value_range=(0.0, float(rng_hi)))
    peak = max(int(c) for c in hist.counts)
    print(f"{criterion.value} histogram (underflow {hist.underflow}, overflow {hist.overflow}):")
    for bin_lo, bin_hi, count in hist.rows()[1:-1]:
        bar = "#" * int(round(30 * count / peak)) if peak else ""
        print(f"  [{bin_lo:8.1f}, {bin_hi:8.1f})  {count:4d} {bar}")
    print()
