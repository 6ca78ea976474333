"""Image conditioning: mean-color hole fill, the progressive hole-size
schedule, and the dim / over-lit capture simulation."""

try:
    import wirekit  # noqa: F401
except ImportError:
    import pathlib
    import sys

    sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from pathlib import Path

import numpy as np

from wirekit import io
from wirekit.conditioning import (
    ScheduleConfig,
    apply_hole,
    mean_rgb,
    schedule_interval,
    simulate_lighting,
)
from wirekit.geometry import MaskBitmap
from wirekit.rng import derive_rng

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# Synthetic "dataset": three gradient images of different sizes.
rng = np.random.default_rng(1)
dataset = []
for k, (h, w) in enumerate([(96, 128), (128, 128), (64, 192)]):
    ramp = np.linspace(0, 255, w)[None, :, None]
    img = np.repeat(np.repeat(ramp, h, axis=0), 3, axis=2) + rng.normal(0, 8, (h, w, 3))
    dataset.append(np.clip(img, 0, 255))

fill = mean_rgb(dataset)
print(f"dataset mean color: ({fill[0]:.1f}, {fill[1]:.1f}, {fill[2]:.1f})")

# Punch an elliptical hole into the first image and fill it with the mean.
img = dataset[0]
yy, xx = np.mgrid[: img.shape[0], : img.shape[1]]
hole = ((xx - 64) / 30) ** 2 + ((yy - 48) / 20) ** 2 <= 1.0
conditioned = apply_hole(img, MaskBitmap(hole), fill)
io.write_ppm(out_dir / "conditioned.ppm", conditioned)
print(f"hole covers {hole.mean():.1%} of the image -> {out_dir / 'conditioned.ppm'}")

# The curriculum: which hole-size interval is active at each epoch.
cfg = ScheduleConfig(epochs_per_interval=3, num_intervals=10)
table = [schedule_interval(e, cfg) for e in range(30)]
print("\nschedule (30 epochs, +1 interval every 3):")
print("  " + " ".join(str(i) for i in table))

# Lighting simulation on a mid-gray card.
card = np.full((32, 32, 3), 180.0)
for mode in ("dim", "over"):
    out = simulate_lighting(card, mode, derive_rng(7, "light", mode))
    io.write_ppm(out_dir / f"{mode}.ppm", out)
    print(f"{mode:>4}-lit: value 180 -> mean {out.mean():6.1f}  ({out_dir / (mode + '.ppm')})")

# The deterministic path used by tests: fixed scale, no shot noise.
white = np.full((1, 1, 3), 255.0)
print(f"\n255 under dim s=1/8, noise off: {simulate_lighting(white, 'dim', scale=1/8, shot_noise=False)[0,0,0]:.2f}")
