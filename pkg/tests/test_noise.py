"""Tests for deterministic speckle synthesis."""

import numpy as np
import pytest

from src.errors import InvalidCount
from src.metrics import mse
from src.models import Frame, NoiseDistribution, SpeckleParams
from src.noise import add_speckle, noise_sequence, speckle_field, splitmix64, uniform_stream
from src.services import bench_variances


class TestGenerator:
    """Tests for the counter-based SplitMix64 stream."""

    def test_reference_values(self):
        assert splitmix64(0, 2).tolist() == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]

    def test_prefix_stable(self):
        assert np.array_equal(splitmix64(42, 10)[:4], splitmix64(42, 4))

    def test_uniform_range(self):
        u = uniform_stream(9, 10000)
        assert u.min() >= 0.0
        assert u.max() < 1.0
        assert u.mean() == pytest.approx(0.5, abs=0.02)

    def test_large_seed_wraps(self):
        assert splitmix64(2**64 - 1, 3).dtype == np.uint64


class TestSpeckleField:
    """Tests for the zero-mean multiplicative noise samples."""

    @pytest.mark.parametrize("variance", [0.001, 0.08])
    @pytest.mark.parametrize(
        "distribution", [NoiseDistribution.UNIFORM, NoiseDistribution.GAUSSIAN]
    )
    def test_empirical_variance(self, variance, distribution):
        params = SpeckleParams(variance=variance, seed=11, distribution=distribution)
        n = speckle_field((400, 300), params)
        assert n.var() == pytest.approx(variance, rel=0.05)
        assert abs(n.mean()) < 4 * np.sqrt(variance / n.size)

    def test_uniform_support(self):
        n = speckle_field((100, 100), SpeckleParams(variance=0.08, seed=1))
        assert np.max(np.abs(n)) <= np.sqrt(3 * 0.08)

    def test_zero_variance(self):
        assert np.all(speckle_field((4, 5), SpeckleParams(variance=0.0)) == 0)


class TestAddSpeckle:
    """Tests for single-frame noise injection."""

    def test_zero_variance_identity(self, small_image):
        for seed in (0, 1, 2**63):
            assert add_speckle(small_image, SpeckleParams(variance=0.0, seed=seed)) == small_image

    def test_black_frame_unchanged(self):
        black = Frame(data=np.zeros((16, 16), dtype=np.uint8))
        assert add_speckle(black, SpeckleParams(variance=0.08, seed=5)) == black

    def test_deterministic(self, small_image):
        params = SpeckleParams(variance=0.08, seed=7)
        assert add_speckle(small_image, params) == add_speckle(small_image, params)

    def test_seed_changes_output(self, small_image):
        a = add_speckle(small_image, SpeckleParams(variance=0.08, seed=7))
        b = add_speckle(small_image, SpeckleParams(variance=0.08, seed=8))
        assert a != b

    def test_degrades_psnr(self, test_image):
        noisy = add_speckle(test_image, SpeckleParams(variance=0.08, seed=3))
        assert mse(test_image, noisy) > 0

    def test_sample_mean(self):
        clean = Frame(data=np.full((400, 300), 100, dtype=np.uint8))
        noisy = add_speckle(clean, SpeckleParams(variance=0.001, seed=21))
        diff = noisy.data.astype(np.float64) - clean.data
        sigma = 100 * np.sqrt(0.001)
        assert abs(diff.mean()) < 3 * sigma / np.sqrt(diff.size)

    def test_gaussian_differs_from_uniform(self, small_image):
        uniform = add_speckle(small_image, SpeckleParams(variance=0.02, seed=1))
        gaussian = add_speckle(
            small_image,
            SpeckleParams(variance=0.02, seed=1, distribution=NoiseDistribution.GAUSSIAN),
        )
        assert uniform != gaussian


class TestNoiseSequence:
    """Tests for multi-frame synthesis."""

    def test_single_frame_matches_add_speckle(self, small_image):
        params = SpeckleParams(variance=0.05, seed=4)
        seq = noise_sequence(small_image, params, 1)
        assert seq.count == 1
        assert seq.frames[0] == add_speckle(small_image, params)

    def test_frame_seeds(self, small_image):
        params = SpeckleParams(variance=0.05, seed=4)
        seq = noise_sequence(small_image, params, 3)
        assert seq.frames[2] == add_speckle(small_image, SpeckleParams(variance=0.05, seed=6))

    def test_frames_differ(self, small_image):
        seq = noise_sequence(small_image, SpeckleParams(variance=0.08, seed=0), 4)
        for i in range(4):
            for j in range(i + 1, 4):
                assert seq.frames[i] != seq.frames[j]

    def test_zero_variance_frames_identical(self, small_image):
        seq = noise_sequence(small_image, SpeckleParams(variance=0.0, seed=0), 5)
        assert all(frame == small_image for frame in seq.frames)

    @pytest.mark.parametrize("n_frames", [0, -2])
    def test_invalid_count(self, small_image, n_frames):
        with pytest.raises(InvalidCount):
            noise_sequence(small_image, SpeckleParams(variance=0.01), n_frames)

    def test_mse_grows_with_variance(self, small_image):
        means = []
        for variance in bench_variances():
            errors = [
                mse(small_image, add_speckle(small_image, SpeckleParams(variance=variance, seed=s)))
                for s in range(10)
            ]
            means.append(np.mean(errors))
        assert all(a <= b for a, b in zip(means, means[1:]))

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            SpeckleParams(variance=-0.01)
