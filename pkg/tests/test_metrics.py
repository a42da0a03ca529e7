import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hardlabel import (
    ImageTensor,
    ImageTooSmallError,
    ShapeMismatchError,
    ZeroVarianceError,
    correlation,
    perturbation_norm,
    ssim,
)

from .conftest import tensor


def random_image(seed, shape=(16, 16, 1), range_l=1.0):
    rng = np.random.default_rng(seed)
    return ImageTensor(rng.uniform(0, range_l, size=shape), range_l)


class TestPerturbationNorm:
    def test_zero_on_identity(self):
        x = random_image(0)
        assert perturbation_norm(x, x) == 0.0

    def test_hundred_pixels(self):
        clean = ImageTensor(np.zeros((10, 10, 1)))
        adv = ImageTensor(np.full((10, 10, 1), 0.1))
        assert perturbation_norm(adv, clean) == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            perturbation_norm(tensor([0.1]), tensor([0.1, 0.2]))


class TestSsim:
    def test_self_similarity(self):
        for seed in range(3):
            x = random_image(seed)
            assert ssim(x, x) == pytest.approx(1.0, abs=1e-9)

    def test_symmetry(self):
        a, b = random_image(1), random_image(2)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_structural_inversion_reduces_similarity(self):
        x_px = 0.5 + 0.3 * np.sin(np.linspace(0, 8, 256)).reshape(16, 16, 1)
        x = ImageTensor(x_px)
        inverted = ImageTensor(1.0 - x.pixels)
        assert ssim(x, inverted) < 1.0

    def test_bounds(self):
        for seed in range(20):
            a, b = random_image(seed), random_image(seed + 100)
            assert -1.0 <= ssim(a, b) <= 1.0

    def test_multichannel_is_channel_mean(self):
        rng = np.random.default_rng(9)
        px = rng.uniform(0, 1, size=(16, 16, 3))
        color = ImageTensor(px)
        other_px = rng.uniform(0, 1, size=(16, 16, 3))
        other = ImageTensor(other_px)
        per_channel = [ssim(ImageTensor(px[:, :, [c]]), ImageTensor(other_px[:, :, [c]]))
                       for c in range(3)]
        assert ssim(color, other) == pytest.approx(np.mean(per_channel), abs=1e-12)

    def test_too_small_image(self):
        tiny = ImageTensor(np.full((8, 8, 1), 0.5))
        with pytest.raises(ImageTooSmallError):
            ssim(tiny, tiny)

    def test_smaller_window_allows_small_images(self):
        x = random_image(3, shape=(8, 8, 1))
        assert ssim(x, x, win_size=7) == pytest.approx(1.0, abs=1e-9)

    def test_window_validation(self):
        x = random_image(4)
        with pytest.raises(ValueError):
            ssim(x, x, win_size=4)  # even
        with pytest.raises(ValueError):
            ssim(x, x, win_size=1)  # below minimum

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ssim(random_image(0), random_image(0, shape=(16, 17, 1)))

    def test_range_scaling_consistent(self):
        """The same structure at L=1 and L=255 scores identically."""
        a, b = random_image(11), random_image(12)
        a255 = ImageTensor(a.pixels * 255.0, 255.0)
        b255 = ImageTensor(b.pixels * 255.0, 255.0)
        assert ssim(a, b) == pytest.approx(ssim(a255, b255), abs=1e-12)

    def test_matches_reference_implementation(self):
        skimage_metrics = pytest.importorskip("skimage.metrics")
        for seed, shape in [(0, (16, 16, 1)), (1, (20, 14, 1)), (2, (16, 16, 3))]:
            a, b = random_image(seed, shape), random_image(seed + 50, shape)
            if shape[2] == 1:
                expected = skimage_metrics.structural_similarity(
                    a.pixels[:, :, 0], b.pixels[:, :, 0], data_range=1.0,
                    gaussian_weights=True, sigma=1.5, use_sample_covariance=False)
            else:
                expected = skimage_metrics.structural_similarity(
                    a.pixels, b.pixels, data_range=1.0, channel_axis=2,
                    gaussian_weights=True, sigma=1.5, use_sample_covariance=False)
            assert ssim(a, b) == pytest.approx(expected, abs=1e-7)


class TestCorrelation:
    def test_self_correlation(self):
        x = random_image(0)
        assert correlation(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_affine_invariance(self):
        x = random_image(1)
        scaled = ImageTensor(0.5 * x.pixels + 0.2)
        assert correlation(x, scaled) == pytest.approx(1.0, abs=1e-12)

    def test_anticorrelation(self):
        x = random_image(2)
        flipped = ImageTensor(1.0 - x.pixels)  # affine with negative slope
        assert correlation(x, flipped) == pytest.approx(-1.0, abs=1e-12)

    def test_constant_image_rejected(self):
        flat = ImageTensor(np.full((4, 4, 1), 0.5))
        x = random_image(3, shape=(4, 4, 1))
        with pytest.raises(ZeroVarianceError):
            correlation(flat, x)
        with pytest.raises(ZeroVarianceError):
            correlation(x, flat)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            correlation(tensor([0.1, 0.2]), tensor([0.1]))

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=60)
    def test_bounds(self, seed):
        rng = np.random.default_rng(seed)
        a = ImageTensor(rng.uniform(0, 1, size=(3, 5, 1)))
        b = ImageTensor(rng.uniform(0, 1, size=(3, 5, 1)))
        assert -1.0 <= correlation(a, b) <= 1.0


class TestContinuityTowardClean:
    def test_metrics_approach_identity_along_blend(self):
        """As the adversarial image blends into the clean one, ssim and cc rise."""
        clean = random_image(6)
        far = random_image(7)
        ssims, ccs, norms = [], [], []
        for t in [1.0, 0.5, 0.1, 0.01]:
            adv = ImageTensor((1 - t) * clean.pixels + t * far.pixels)
            norms.append(perturbation_norm(adv, clean))
            ssims.append(ssim(adv, clean))
            ccs.append(correlation(adv, clean))
        assert norms == sorted(norms, reverse=True)
        assert ssims == sorted(ssims)
        assert ccs == sorted(ccs)
        assert ssims[-1] > 0.999
        assert ccs[-1] > 0.999
