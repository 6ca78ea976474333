"""Numeric kernels of the adversarial training objective, with gradients.

All kernels are pure functions of double-precision arrays with
fixed-order reductions.  Discriminator outputs are probabilities in
(0, 1); expectations are arithmetic means over all supplied entries.
Feature stacks are lists of (C, H, W) arrays supplied by the caller.
Gradients are taken with respect to the generated side (the generated
image / features, or the discriminator outputs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllMasked, DomainError, KinkDetected, ShapeMismatch

DEFAULT_GAMMA = 0.1


@dataclass
class LossWeights:
    lambda_adv: float = 1.0
    lambda_per: float = 0.1
    lambda_sty: float = 250.0
    lambda_rec: float = 1.0
    gamma: float = DEFAULT_GAMMA


def _as_prob(t: np.ndarray, name: str) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.size == 0 or np.any(t <= 0.0) or np.any(t >= 1.0):
        raise DomainError(f"{name} must be non-empty with all values in (0, 1)")
    return t


def adversarial_loss(d_real: np.ndarray, d_fake: np.ndarray, gamma: float = DEFAULT_GAMMA) -> float:
    """Discriminator objective: mean log D(real) + gamma * mean log(1 - D(fake))."""
    d_real = _as_prob(d_real, "d_real")
    d_fake = _as_prob(d_fake, "d_fake")
    return float(np.log(d_real).mean() + gamma * np.log1p(-d_fake).mean())


def adversarial_grad(
    d_real: np.ndarray, d_fake: np.ndarray, gamma: float = DEFAULT_GAMMA
) -> tuple[np.ndarray, np.ndarray]:
    d_real = _as_prob(d_real, "d_real")
    d_fake = _as_prob(d_fake, "d_fake")
    g_real = 1.0 / (d_real.size * d_real)
    g_fake = -gamma / (d_fake.size * (1.0 - d_fake))
    return g_real, g_fake


def generator_adv_loss(d_fake: np.ndarray) -> float:
    """Non-saturating generator objective: -mean log D(fake)."""
    d_fake = _as_prob(d_fake, "d_fake")
    return float(-np.log(d_fake).mean())


def generator_adv_grad(d_fake: np.ndarray) -> np.ndarray:
    d_fake = _as_prob(d_fake, "d_fake")
    return -1.0 / (d_fake.size * d_fake)


def _check_stack(feats_a, feats_b):
    if len(feats_a) != len(feats_b):
        raise ShapeMismatch(f"feature stacks differ in depth: {len(feats_a)} vs {len(feats_b)}")
    for i, (a, b) in enumerate(zip(feats_a, feats_b)):
        a, b = np.asarray(a), np.asarray(b)
        if a.shape != b.shape:
            raise ShapeMismatch(f"layer {i} shapes differ: {a.shape} vs {b.shape}")
        if a.ndim != 3:
            raise ShapeMismatch(f"layer {i} must be (C, H, W), got {a.shape}")


def perceptual_loss(feats_x: list[np.ndarray], feats_xt: list[np.ndarray]) -> float:
    """Per-layer size-normalized L1 distance between feature stacks, summed."""
    _check_stack(feats_x, feats_xt)
    total = 0.0
    for a, b in zip(feats_x, feats_xt):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        total += np.abs(a - b).sum() / a.size
    return float(total)


def perceptual_grad(feats_x, feats_xt) -> list[np.ndarray]:
    """Gradient with respect to the generated feature stack."""
    _check_stack(feats_x, feats_xt)
    return [
        -np.sign(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)) / a.size
        for a, b in zip(feats_x, feats_xt)
    ]


def gram(feat: np.ndarray) -> np.ndarray:
    """Size-normalized channel Gram matrix of a (C, H, W) feature map."""
    feat = np.asarray(feat, dtype=np.float64)
    if feat.ndim != 3:
        raise ShapeMismatch(f"gram expects a (C, H, W) tensor, got shape {feat.shape}")
    flat = feat.reshape(feat.shape[0], -1)
    return flat @ flat.T / feat.size


def style_loss(feats_x: list[np.ndarray], feats_xt: list[np.ndarray]) -> float:
    """L1 distance between the Gram matrices of the two stacks, summed over layers."""
    _check_stack(feats_x, feats_xt)
    return float(
        sum(np.abs(gram(a) - gram(b)).sum() for a, b in zip(feats_x, feats_xt))
    )


def style_grad(feats_x, feats_xt) -> list[np.ndarray]:
    """Gradient with respect to the generated feature stack.

    With S = sign(G(x) - G(xt)), dL/dxt = -((S + S^T) @ xt_flat) / size.
    """
    _check_stack(feats_x, feats_xt)
    grads = []
    for a, b in zip(feats_x, feats_xt):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        s = np.sign(gram(a) - gram(b))
        flat = b.reshape(b.shape[0], -1)
        grads.append((-(s + s.T) @ flat / b.size).reshape(b.shape))
    return grads


def _mask_weight(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if not np.all((m == 0.0) | (m == 1.0)):
        raise ValueError("mask must be binary (0/1)")
    try:
        return np.broadcast_to(1.0 - m, x.shape)
    except ValueError:
        raise ShapeMismatch(f"mask shape {m.shape} does not broadcast to {x.shape}") from None


def reconstruction_loss(x: np.ndarray, xt: np.ndarray, m: np.ndarray) -> float:
    """Mean absolute error over the known (unmasked) entries.

    The mask broadcasts over channels; the normalizer counts nonzero
    entries of (1 - m) after broadcasting.
    """
    x = np.asarray(x, dtype=np.float64)
    xt = np.asarray(xt, dtype=np.float64)
    if x.shape != xt.shape:
        raise ShapeMismatch(f"shapes differ: {x.shape} vs {xt.shape}")
    w = _mask_weight(x, m)
    n = int(np.count_nonzero(w))
    if n == 0:
        raise AllMasked("mask covers every pixel; no known entries to reconstruct")
    return float(np.abs((x - xt) * w).sum() / n)


def reconstruction_grad(x: np.ndarray, xt: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Gradient with respect to the generated image xt."""
    x = np.asarray(x, dtype=np.float64)
    xt = np.asarray(xt, dtype=np.float64)
    if x.shape != xt.shape:
        raise ShapeMismatch(f"shapes differ: {x.shape} vs {xt.shape}")
    w = _mask_weight(x, m)
    n = int(np.count_nonzero(w))
    if n == 0:
        raise AllMasked("mask covers every pixel; no known entries to reconstruct")
    return -np.sign(x - xt) * w / n


def total_loss(adv: float, per: float, sty: float, rec: float, w: LossWeights | None = None) -> float:
    w = w or LossWeights()
    return w.lambda_adv * adv + w.lambda_per * per + w.lambda_sty * sty + w.lambda_rec * rec


def finite_difference_grad(f, x: np.ndarray, eps: float) -> np.ndarray:
    """Central finite differences of a scalar function of one array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        fp = f(x)
        flat[i] = orig - eps
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * eps)
    return grad


def _max_rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = np.maximum(np.abs(analytic), np.abs(numeric))
    err = np.zeros_like(denom)
    np.divide(np.abs(analytic - numeric), denom, out=err, where=denom > 0)
    return float(err.max()) if err.size else 0.0


def _guard_kinks(diffs: list[np.ndarray], eps: float):
    for d in diffs:
        if np.abs(d).min() < 10.0 * eps:
            raise KinkDetected(
                "an L1 difference entry sits within 10*eps of its kink; "
                "finite differences are unreliable here"
            )


def _guard_domain(d: np.ndarray, eps: float):
    if d.min() < 10.0 * eps or d.max() > 1.0 - 10.0 * eps:
        raise KinkDetected(
            "a discriminator output sits within 10*eps of the (0, 1) boundary; "
            "finite differences would leave the domain"
        )


def grad_check(kernel: str, inputs: dict, eps: float = 1e-6) -> float:
    """Compare a kernel's analytic gradient against central differences.

    ``kernel`` is one of ``reconstruction``, ``perceptual``, ``style``,
    ``adversarial``, ``generator``; ``inputs`` carries that kernel's
    arrays (``x``/``xt``/``m``, ``feats_x``/``feats_xt``, or
    ``d_real``/``d_fake``/``gamma``).  Returns the maximum elementwise
    relative error over every checked gradient.  Raises
    :class:`KinkDetected` if an input sits too close to an L1 kink or a
    log-domain boundary for finite differences to be trusted.
    """
    if kernel == "reconstruction":
        x = np.asarray(inputs["x"], dtype=np.float64)
        xt = np.asarray(inputs["xt"], dtype=np.float64).copy()
        m = np.asarray(inputs["m"], dtype=np.float64)
        _guard_kinks([x - xt], eps)
        analytic = reconstruction_grad(x, xt, m)
        numeric = finite_difference_grad(lambda t: reconstruction_loss(x, t, m), xt, eps)
        return _max_rel_err(analytic, numeric)

    if kernel == "perceptual":
        fx = [np.asarray(a, dtype=np.float64) for a in inputs["feats_x"]]
        ft = [np.asarray(a, dtype=np.float64).copy() for a in inputs["feats_xt"]]
        _guard_kinks([a - b for a, b in zip(fx, ft)], eps)
        analytic = perceptual_grad(fx, ft)
        err = 0.0
        for i in range(len(ft)):
            def f(t, i=i):
                stack = ft[:i] + [t] + ft[i + 1 :]
                return perceptual_loss(fx, stack)

            err = max(err, _max_rel_err(analytic[i], finite_difference_grad(f, ft[i], eps)))
        return err

    if kernel == "style":
        fx = [np.asarray(a, dtype=np.float64) for a in inputs["feats_x"]]
        ft = [np.asarray(a, dtype=np.float64).copy() for a in inputs["feats_xt"]]
        _guard_kinks([gram(a) - gram(b) for a, b in zip(fx, ft)], eps)
        analytic = style_grad(fx, ft)
        err = 0.0
        for i in range(len(ft)):
            def f(t, i=i):
                stack = ft[:i] + [t] + ft[i + 1 :]
                return style_loss(fx, stack)

            err = max(err, _max_rel_err(analytic[i], finite_difference_grad(f, ft[i], eps)))
        return err

    if kernel == "adversarial":
        d_real = np.asarray(inputs["d_real"], dtype=np.float64).copy()
        d_fake = np.asarray(inputs["d_fake"], dtype=np.float64).copy()
        gamma = float(inputs.get("gamma", DEFAULT_GAMMA))
        _guard_domain(d_real, eps)
        _guard_domain(d_fake, eps)
        g_real, g_fake = adversarial_grad(d_real, d_fake, gamma)
        err = _max_rel_err(
            g_real, finite_difference_grad(lambda t: adversarial_loss(t, d_fake, gamma), d_real, eps)
        )
        err = max(
            err,
            _max_rel_err(
                g_fake,
                finite_difference_grad(lambda t: adversarial_loss(d_real, t, gamma), d_fake, eps),
            ),
        )
        return err

    if kernel == "generator":
        d_fake = np.asarray(inputs["d_fake"], dtype=np.float64).copy()
        _guard_domain(d_fake, eps)
        analytic = generator_adv_grad(d_fake)
        numeric = finite_difference_grad(generator_adv_loss, d_fake, eps)
        return _max_rel_err(analytic, numeric)

    raise ValueError(f"unknown kernel {kernel!r}")
