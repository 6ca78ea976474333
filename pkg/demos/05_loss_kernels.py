"""The adversarial-training loss kernels and their gradient checks.

Evaluates every kernel on synthetic tensors, combines them with the
default weights, and verifies each analytic gradient against central
finite differences.
"""

try:
    import wirekit  # noqa: F401
except ImportError:
    import pathlib
    import sys

    sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from wirekit import losses

rng = np.random.default_rng(4)

# Stand-ins for what a training loop would supply: a reference image, a
# generated image, the hole mask, feature stacks, discriminator outputs.
x = rng.uniform(0, 1, (3, 16, 16))
m = np.zeros((16, 16))
m[4:10, 5:12] = 1.0
xt = np.where(m[None] > 0, rng.uniform(0, 1, x.shape), x + rng.normal(0, 0.05, x.shape))
feats_x = [rng.uniform(0.5, 1.5, (c, 8, 8)) for c in (4, 8)]
feats_xt = [f + rng.normal(0, 0.3, f.shape) for f in feats_x]
d_real = rng.uniform(0.55, 0.9, (14, 14))
d_fake = rng.uniform(0.1, 0.45, (14, 14))

adv = losses.adversarial_loss(d_real, d_fake)
gen = losses.generator_adv_loss(d_fake)
per = losses.perceptual_loss(feats_x, feats_xt)
sty = losses.style_loss(feats_x, feats_xt)
rec = losses.reconstruction_loss(x, xt, m)

w = losses.LossWeights()
print("component values:")
print(f"  discriminator objective  {adv:+.4f}")
print(f"  generator objective      {gen:+.4f}")
print(f"  perceptual               {per:+.4f}  (x {w.lambda_per})")
print(f"  style                    {sty:+.4f}  (x {w.lambda_sty})")
print(f"  reconstruction           {rec:+.4f}  (x {w.lambda_rec})")
print(f"  total generator loss     {losses.total_loss(gen, per, sty, rec, w):+.4f}")

print("\ngradient checks (max relative error vs central differences):")
checks = [
    ("reconstruction", {"x": rng.uniform(4, 6, (2, 4, 4)), "xt": rng.uniform(1, 2, (2, 4, 4)), "m": m[:4, :4]}),
    ("perceptual", {"feats_x": [rng.uniform(1, 2, (2, 4, 4))], "feats_xt": [rng.uniform(3, 4, (2, 4, 4))]}),
    ("style", {"feats_x": [rng.uniform(1, 2, (2, 4, 4))], "feats_xt": [rng.uniform(3, 4, (2, 4, 4))]}),
    ("adversarial", {"d_real": d_real, "d_fake": d_fake}),
    ("generator", {"d_fake": d_fake}),
]
for kernel, inputs in checks:
    err = losses.grad_check(kernel, inputs)
    print(f"  {kernel:<15} {err:.3e}")

g = losses.gram(feats_x[0])
print(f"\ngram matrix of the first feature map: shape {g.shape}, "
      f"symmetric={np.array_equal(g, g.T)}, min eigenvalue {np.linalg.eigvalsh(g).min():.2e}")
