"""Applying holes to images, training schedules, and lighting simulation.

Images are float arrays of shape (height, width, 3) with values in
[0, 255]; hole filling happens in this raw value range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimMismatch, EmptyDataset, EmptyInterval
from .geometry import MaskBitmap
from .maskgen import MaskPool

GAMMA = 2.2
DIM_SCALE_RANGE = (1 / 16.0, 1 / 8.0)
OVER_SCALE_RANGE = (3.0, 3.3)
SHOT_NOISE_PEAK = 8.0


@dataclass
class ScheduleConfig:
    """Progressive hole-size curriculum: how many epochs each interval lasts."""

    epochs_per_interval: int
    num_intervals: int = 10
    mode: str = "avoid-isolation"

    def __post_init__(self):
        if self.epochs_per_interval < 1 or self.num_intervals < 1:
            raise ValueError("schedule fields must be positive")


def mean_rgb(dataset: Iterable[np.ndarray]) -> np.ndarray:
    """Per-channel mean over all pixels of all images (pixel-weighted)."""
    total = np.zeros(3, dtype=np.float64)
    pixels = 0
    for img in dataset:
        img = np.asarray(img, dtype=np.float64)
        if img.ndim != 3 or img.shape[2] != 3:
            raise DimMismatch(f"expected (H, W, 3) image, got shape {img.shape}")
        total += img.reshape(-1, 3).sum(axis=0)
        pixels += img.shape[0] * img.shape[1]
    if pixels == 0:
        raise EmptyDataset("mean over an empty image stream")
    return total / pixels


def apply_hole(img: np.ndarray, mask: MaskBitmap, fill) -> np.ndarray:
    """Replace hole pixels with the fill color; known pixels pass through."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimMismatch(f"expected (H, W, 3) image, got shape {img.shape}")
    if img.shape[:2] != (mask.height, mask.width):
        raise DimMismatch(
            f"image {img.shape[1]}x{img.shape[0]} vs mask {mask.width}x{mask.height}"
        )
    out = img.copy()
    out[mask.bits] = np.asarray(fill, dtype=np.float64)
    return out


def schedule_interval(epoch: int, cfg: ScheduleConfig) -> int:
    """Hole-size interval active at the given epoch (clamped to the last)."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return min(epoch // cfg.epochs_per_interval, cfg.num_intervals - 1)


def sample_mask(
    pool: MaskPool,
    image_id: str,
    interval: int,
    scope: str,
    rng: np.random.Generator,
) -> MaskBitmap:
    """Draw one mask for an image at the given interval.

    ``scope="per-image"`` samples uniformly among the image's own N
    candidates; ``scope="cross-image"`` samples uniformly among every
    image's candidates at that interval (image ids in sorted order).
    """
    if scope == "per-image":
        masks = pool.masks(image_id, interval)
    elif scope == "cross-image":
        ids = sorted({img for img, i in pool.placements if i == interval})
        masks = [m for img in ids for m in pool.masks(img, interval)]
    else:
        raise ValueError(f"unknown sampling scope {scope!r}")
    if not masks:
        raise EmptyInterval(f"no masks available at interval {interval}")
    return masks[int(rng.integers(0, len(masks)))]


def simulate_lighting(
    img: np.ndarray,
    mode: str,
    rng: np.random.Generator | None = None,
    scale: float | None = None,
    shot_noise: bool = True,
) -> np.ndarray:
    """Simulate a dim or over-lit capture of an image in [0, 255].

    Steps: linearize the camera response (gamma 2.2); scale by a random
    factor (dim: [1/16, 1/8], truncating below 0; over: [3.0, 3.3],
    truncating above 255); for dim only, add Poisson shot noise with peak
    rate 8.0 (linear 255 maps to expected count 8.0, sampled, rescaled);
    reapply the gamma response and clamp to [0, 255].

    Pass ``scale`` to fix the factor and ``shot_noise=False`` to disable
    noise; with both, the output is deterministic and monotone in the
    input value.
    """
    if mode not in ("dim", "over"):
        raise ValueError(f"unknown lighting mode {mode!r}")
    img = np.asarray(img, dtype=np.float64)
    if scale is None or (mode == "dim" and shot_noise):
        if rng is None:
            raise ValueError("rng required when drawing the scale or sampling noise")
    if scale is None:
        lo, hi = DIM_SCALE_RANGE if mode == "dim" else OVER_SCALE_RANGE
        scale = float(rng.uniform(lo, hi))

    linear = 255.0 * (img / 255.0) ** GAMMA
    linear = linear * scale
    if mode == "dim":
        linear = np.maximum(linear, 0.0)
        if shot_noise:
            expected = linear * (SHOT_NOISE_PEAK / 255.0)
            linear = rng.poisson(expected).astype(np.float64) * (255.0 / SHOT_NOISE_PEAK)
    else:
        linear = np.minimum(linear, 255.0)
    out = 255.0 * (linear / 255.0) ** (1.0 / GAMMA)
    return np.clip(out, 0.0, 255.0)


def resize_bilinear(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resize with half-pixel-center sampling."""
    img = np.asarray(img, dtype=np.float64)
    src_h, src_w = img.shape[:2]
    sx = src_w / width
    sy = src_h / height
    xs = (np.arange(width) + 0.5) * sx - 0.5
    ys = (np.arange(height) + 0.5) * sy - 0.5
    x0 = np.clip(np.floor(xs).astype(int), 0, src_w - 1)
    y0 = np.clip(np.floor(ys).astype(int), 0, src_h - 1)
    x1 = np.clip(x0 + 1, 0, src_w - 1)
    y1 = np.clip(y0 + 1, 0, src_h - 1)
    fx = np.clip(xs - x0, 0.0, 1.0)
    fy = np.clip(ys - y0, 0.0, 1.0)

    def gather(yy, xx):
        return img[np.ix_(yy, xx)]

    wx = fx[None, :, None] if img.ndim == 3 else fx[None, :]
    wy = fy[:, None, None] if img.ndim == 3 else fy[:, None]
    top = gather(y0, x0) * (1 - wx) + gather(y0, x1) * wx
    bot = gather(y1, x0) * (1 - wx) + gather(y1, x1) * wx
    return top * (1 - wy) + bot * wy


def resize_mask_nearest(mask: MaskBitmap, width: int, height: int) -> MaskBitmap:
    """Nearest-neighbor resize; keeps the mask strictly binary."""
    sx = mask.width / width
    sy = mask.height / height
    xs = np.clip(((np.arange(width) + 0.5) * sx).astype(int), 0, mask.width - 1)
    ys = np.clip(((np.arange(height) + 0.5) * sy).astype(int), 0, mask.height - 1)
    return MaskBitmap(mask.bits[np.ix_(ys, xs)])
