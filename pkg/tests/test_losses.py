import numpy as np
import pytest

from wirekit.errors import AllMasked, DomainError, KinkDetected, ShapeMismatch
from wirekit.losses import (
    LossWeights,
    adversarial_grad,
    adversarial_loss,
    generator_adv_grad,
    generator_adv_loss,
    grad_check,
    gram,
    perceptual_loss,
    reconstruction_grad,
    reconstruction_loss,
    style_loss,
    total_loss,
)


def oracle_gram(feat):
    """Triple-loop Gram computation."""
    c, h, w = feat.shape
    out = np.zeros((c, c))
    for a in range(c):
        for b in range(c):
            s = 0.0
            for i in range(h):
                for j in range(w):
                    s += feat[a, i, j] * feat[b, i, j]
            out[a, b] = s / (c * h * w)
    return out


def kink_free_features(rng, layers=2, shape=(3, 4, 4)):
    """Two stacks whose elementwise and Gram differences stay off the kinks."""
    fx = [rng.uniform(1.0, 2.0, shape) for _ in range(layers)]
    ft = [rng.uniform(3.0, 4.0, shape) for _ in range(layers)]
    return fx, ft


class TestAdversarial:
    def test_half_probabilities(self):
        d = np.full((2, 3), 0.5)
        assert abs(adversarial_loss(d, d, 0.1) - 1.1 * np.log(0.5)) < 1e-15

    def test_optimum_limit(self):
        for eps in (1e-3, 1e-6, 1e-9):
            v = adversarial_loss(np.array([1 - eps]), np.array([eps]), 0.1)
            assert abs(v) < 20 * eps

    def test_domain_guard(self):
        with pytest.raises(DomainError):
            adversarial_loss(np.array([0.0]), np.array([0.5]))
        with pytest.raises(DomainError):
            adversarial_loss(np.array([0.5]), np.array([1.0]))

    def test_generator_half(self):
        assert abs(generator_adv_loss(np.full(4, 0.5)) - np.log(2)) < 1e-15

    def test_generator_limits(self):
        assert generator_adv_loss(np.array([1 - 1e-12])) < 1e-9
        small = generator_adv_loss(np.array([1e-9]))
        assert small > 20.0
        # gradient stays large where the discriminator wins: non-saturation
        assert abs(generator_adv_grad(np.array([1e-9]))[0]) > 1e8


class TestPerceptual:
    def test_identical_stacks(self):
        f = [np.random.default_rng(0).normal(size=(2, 3, 3))]
        assert perceptual_loss(f, [f[0].copy()]) == 0.0

    def test_constant_difference(self):
        a = [np.zeros((1, 2, 2))]
        b = [np.full((1, 2, 2), 3.0)]
        assert perceptual_loss(a, b) == 3.0  # sum 12 over 4 entries

    def test_additive_over_layers(self, rng):
        fx1, ft1 = [rng.normal(size=(2, 2, 2))], [rng.normal(size=(2, 2, 2))]
        fx2, ft2 = [rng.normal(size=(3, 2, 2))], [rng.normal(size=(3, 2, 2))]
        joint = perceptual_loss(fx1 + fx2, ft1 + ft2)
        assert abs(joint - perceptual_loss(fx1, ft1) - perceptual_loss(fx2, ft2)) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            perceptual_loss([np.zeros((1, 2, 2))], [np.zeros((1, 3, 2))])
        with pytest.raises(ShapeMismatch):
            perceptual_loss([np.zeros((1, 2, 2))], [])


class TestGram:
    def test_all_ones(self):
        assert np.array_equal(gram(np.ones((1, 2, 2))), [[1.0]])

    def test_all_zeros(self):
        assert np.array_equal(gram(np.zeros((2, 3, 3))), np.zeros((2, 2)))

    def test_matches_triple_loop_oracle(self, rng):
        feat = rng.normal(size=(3, 4, 4))
        assert np.max(np.abs(gram(feat) - oracle_gram(feat))) < 1e-12

    def test_symmetric_and_psd(self, rng):
        for _ in range(10):
            feat = rng.normal(size=(4, 5, 5))
            g = gram(feat)
            assert np.array_equal(g, g.T)
            assert np.linalg.eigvalsh(g).min() >= -1e-10


class TestStyle:
    def test_identical(self, rng):
        f = [rng.normal(size=(2, 3, 3))]
        assert style_loss(f, [f[0].copy()]) == 0.0

    def test_matches_gram_oracle(self, rng):
        a = [rng.uniform(1, 2, (3, 4, 4))]
        b = [rng.uniform(1, 2, (3, 4, 4))]
        expected = np.abs(oracle_gram(a[0]) - oracle_gram(b[0])).sum()
        assert abs(style_loss(a, b) - expected) < 1e-12

    def test_channel_permutation_changes_value(self, rng):
        a = rng.uniform(1, 2, (3, 4, 4))
        b = a[[1, 2, 0]]
        assert style_loss([a], [b]) > 0.0


class TestReconstruction:
    def test_identical(self, rng):
        x = rng.normal(size=(3, 4, 4))
        m = (rng.random((4, 4)) < 0.5).astype(float)
        if (1 - m).sum() == 0:
            m[0, 0] = 0.0
        assert reconstruction_loss(x, x.copy(), m) == 0.0

    def test_constant_difference_any_partial_mask(self, rng):
        x = np.full((3, 4, 4), 5.0)
        xt = np.full((3, 4, 4), 2.0)
        for _ in range(5):
            m = (rng.random((4, 4)) < 0.6).astype(float)
            if (1 - m).sum() == 0:
                m[0, 0] = 0.0
            assert reconstruction_loss(x, xt, m) == 3.0

    def test_all_masked(self):
        with pytest.raises(AllMasked):
            reconstruction_loss(np.zeros((1, 2, 2)), np.zeros((1, 2, 2)), np.ones((2, 2)))

    def test_mask_broadcasts_over_channels(self):
        x = np.zeros((3, 2, 2))
        xt = np.ones((3, 2, 2))
        m = np.array([[1.0, 0.0], [0.0, 0.0]])
        # 9 unmasked entries after broadcast, each |diff| 1
        assert reconstruction_loss(x, xt, m) == 1.0
        g = reconstruction_grad(x, xt, m)
        assert g.shape == x.shape
        assert np.all(g[:, 0, 0] == 0.0)

    def test_non_binary_mask_rejected(self):
        with pytest.raises(ValueError):
            reconstruction_loss(np.zeros((1, 2, 2)), np.zeros((1, 2, 2)), np.full((2, 2), 0.5))


class TestTotalLoss:
    def test_default_weights(self):
        assert total_loss(1, 1, 1, 1) == 252.1

    def test_zeros(self):
        assert total_loss(0, 0, 0, 0) == 0.0

    def test_unit_weights_sum(self, rng):
        a, b, c, d = rng.normal(size=4)
        w = LossWeights(1, 1, 1, 1)
        assert abs(total_loss(a, b, c, d, w) - (a + b + c + d)) < 1e-12

    def test_linear_in_each_component(self, rng):
        w = LossWeights()
        base = total_loss(1.0, 2.0, 3.0, 4.0, w)
        assert abs(total_loss(2.0, 2.0, 3.0, 4.0, w) - base - w.lambda_adv) < 1e-12
        assert abs(total_loss(1.0, 3.0, 3.0, 4.0, w) - base - w.lambda_per) < 1e-12
        assert abs(total_loss(1.0, 2.0, 4.0, 4.0, w) - base - w.lambda_sty) < 1e-12
        assert abs(total_loss(1.0, 2.0, 3.0, 5.0, w) - base - w.lambda_rec) < 1e-12


class TestGradCheck:
    def test_reconstruction(self, rng):
        x = rng.uniform(4.0, 6.0, (2, 3, 3))
        xt = rng.uniform(1.0, 2.0, (2, 3, 3))
        m = (rng.random((3, 3)) < 0.4).astype(float)
        m[0, 0] = 0.0
        assert grad_check("reconstruction", {"x": x, "xt": xt, "m": m}) < 1e-6

    def test_reconstruction_against_independent_fd(self, rng):
        # hand-rolled forward-difference check, separate from the library's
        x = rng.uniform(4.0, 6.0, (2, 2, 2))
        xt = rng.uniform(1.0, 2.0, (2, 2, 2))
        m = np.zeros((2, 2))
        g = reconstruction_grad(x, xt, m)
        eps = 1e-7
        for idx in np.ndindex(xt.shape):
            bumped = xt.copy()
            bumped[idx] += eps
            fd = (reconstruction_loss(x, bumped, m) - reconstruction_loss(x, xt, m)) / eps
            assert abs(fd - g[idx]) < 1e-5

    def test_perceptual_and_style(self, rng):
        fx, ft = kink_free_features(rng)
        assert grad_check("perceptual", {"feats_x": fx, "feats_xt": ft}) < 1e-6
        assert grad_check("style", {"feats_x": fx, "feats_xt": ft}) < 1e-4

    def test_adversarial_and_generator(self, rng):
        d_real = rng.uniform(0.3, 0.7, (3, 3))
        d_fake = rng.uniform(0.3, 0.7, (3, 3))
        assert grad_check("adversarial", {"d_real": d_real, "d_fake": d_fake}) < 1e-6
        assert grad_check("generator", {"d_fake": d_fake}) < 1e-6

    def test_generator_analytic_value(self):
        d = np.full(4, 0.5)
        assert np.allclose(generator_adv_grad(d), -1.0 / (4 * 0.5))

    def test_adversarial_analytic_value(self):
        d = np.full(2, 0.5)
        g_real, g_fake = adversarial_grad(d, d, 0.1)
        assert np.allclose(g_real, 1.0 / (2 * 0.5))
        assert np.allclose(g_fake, -0.1 / (2 * 0.5))

    def test_kink_detected(self, rng):
        x = rng.uniform(1.0, 2.0, (2, 2, 2))
        xt = x.copy()
        xt[0, 0, 0] += 1e-7  # difference below 10 * eps
        m = np.zeros((2, 2))
        with pytest.raises(KinkDetected):
            grad_check("reconstruction", {"x": x, "xt": xt, "m": m}, eps=1e-6)

    def test_domain_margin_detected(self):
        d = np.array([1e-7, 0.5])
        with pytest.raises(KinkDetected):
            grad_check("generator", {"d_fake": d}, eps=1e-6)

    def test_unknown_kernel(self):
        with pytest.raises(ValueError):
            grad_check("nope", {})


class TestDeterminism:
    def test_kernels_bitwise_stable(self, rng):
        fx, ft = kink_free_features(rng)
        x = rng.uniform(4, 6, (3, 4, 4))
        xt = rng.uniform(1, 2, (3, 4, 4))
        m = (rng.random((4, 4)) < 0.5).astype(float)
        m[0, 0] = 0.0
        d = rng.uniform(0.2, 0.8, (4, 4))
        for _ in range(3):
            assert perceptual_loss(fx, ft) == perceptual_loss(fx, ft)
            assert style_loss(fx, ft) == style_loss(fx, ft)
            assert reconstruction_loss(x, xt, m) == reconstruction_loss(x, xt, m)
            assert adversarial_loss(d, d) == adversarial_loss(d, d)
            assert np.array_equal(gram(fx[0]), gram(fx[0]))
