"""wirekit: occlusion-robust wireframe dataset tooling and evaluation.

Pure-numpy building blocks for hole-mask generation (silhouette pools,
avoid-isolation placement, progressive schedules), image conditioning
(mean fill, lighting simulation), pseudo-label quality filtering, the
adversarial-training loss kernels with verified gradients, and the full
wireframe evaluation-metric suite with PR-curve emission.
"""

from .conditioning import (
    ScheduleConfig,
    apply_hole,
    mean_rgb,
    sample_mask,
    schedule_interval,
    simulate_lighting,
)
from .geometry import (
    Junction,
    LineSegment,
    MaskBitmap,
    WireframeAnnotation,
    count_contained_junctions,
    count_contained_segments,
    point_in_mask,
    rasterize_segment,
    segment_length,
    segment_mask_overlap,
)
from .losses import (
    LossWeights,
    adversarial_loss,
    generator_adv_loss,
    grad_check,
    gram,
    perceptual_loss,
    reconstruction_loss,
    style_loss,
    total_loss,
)
from .maskgen import (
    HoleType,
    MaskPool,
    PlacedMask,
    SilhouetteEntry,
    avoid_isolation_place,
    build_mask_pool,
    classify_hole,
    filter_silhouette,
    interval_bounds,
    interval_of,
    random_place,
)
from .metrics import (
    HeatmapConfig,
    PRCurve,
    aph,
    mapj,
    match_segments,
    max_f,
    pr_curve,
    sap,
)
from .pseudo import CriteriaStats, Criterion, FilterThresholds, criteria_stats, histogram, passes_filter
from .rng import derive_rng

__version__ = "0.1.0"
