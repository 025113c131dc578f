"""Tests for the Haar transform and wavelet shrinkage."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from src.errors import DepthTooLarge, EmptyInput, InvalidCount, ShapeMismatch
from src.models import Frame, ShrinkMode, ThresholdRule, ThresholdSpec, WaveletDecomposition
from src.wavelet import (
    apply_threshold,
    denoise,
    dwt2_forward,
    dwt2_inverse,
    estimate_sigma,
    hard_threshold,
    max_depth,
    resolve_threshold,
    soft_threshold,
    universal_threshold,
)


def energy(dec: WaveletDecomposition) -> float:
    total = float(np.sum(dec.ll**2))
    for bands in dec.details:
        total += sum(float(np.sum(band**2)) for band in bands)
    return total


def manual(value: float, mode: ShrinkMode = ShrinkMode.SOFT) -> ThresholdSpec:
    return ThresholdSpec(mode=mode, rule=ThresholdRule.MANUAL, manual_value=value)


class TestForward:
    """Tests for Haar analysis."""

    def test_constant_block(self):
        dec = dwt2_forward(np.full((2, 2), 7.0), 1)
        assert dec.ll.shape == (1, 1)
        assert dec.ll[0, 0] == pytest.approx(14.0)
        for band in dec.details[0]:
            assert np.all(band == 0)

    def test_column_alternation_lands_in_hl(self):
        dec = dwt2_forward(np.array([[1.0, -1.0], [1.0, -1.0]]), 1)
        lh, hl, hh = dec.details[0]
        assert dec.ll[0, 0] == pytest.approx(0.0)
        assert hl[0, 0] == pytest.approx(2.0)
        assert lh[0, 0] == pytest.approx(0.0)
        assert hh[0, 0] == pytest.approx(0.0)

    def test_level_shapes(self):
        dec = dwt2_forward(np.zeros((13, 10)), 3)
        assert dec.level_shapes == [(13, 10), (7, 5), (4, 3)]
        assert dec.ll.shape == (2, 2)
        assert dec.original_shape == (13, 10)

    @pytest.mark.parametrize("shape,levels", [((8, 8), 4), ((5, 40), 3), ((1, 1), 1)])
    def test_depth_bound(self, shape, levels):
        with pytest.raises(DepthTooLarge):
            dwt2_forward(np.zeros(shape), levels)

    def test_zero_levels(self):
        with pytest.raises(DepthTooLarge):
            dwt2_forward(np.zeros((4, 4)), 0)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            dwt2_forward(np.zeros((0, 4)), 1)

    def test_max_depth(self):
        assert max_depth(512, 512) == 9
        assert max_depth(7, 100) == 2

    @given(st.integers(1, 3), st.integers(0, 2**31))
    @settings(max_examples=50, deadline=None)
    def test_energy_conservation_on_even_sizes(self, levels, seed):
        x = np.random.default_rng(seed).normal(size=(16, 24))
        dec = dwt2_forward(x, levels)
        assert energy(dec) == pytest.approx(float(np.sum(x**2)), rel=1e-9)


class TestInverse:
    """Tests for Haar synthesis."""

    @given(st.integers(8, 64), st.integers(8, 64), st.integers(1, 3), st.integers(0, 2**31))
    @settings(max_examples=100, deadline=None)
    def test_perfect_reconstruction(self, height, width, levels, seed):
        x = np.random.default_rng(seed).uniform(-1e3, 1e3, size=(height, width))
        restored = dwt2_inverse(dwt2_forward(x, levels))
        assert restored.shape == x.shape
        assert np.max(np.abs(restored - x)) <= 1e-10

    def test_zero_decomposition(self):
        dec = dwt2_forward(np.zeros((8, 8)), 2)
        assert np.all(dwt2_inverse(dec) == 0)

    def test_constant_inverse(self):
        dec = dwt2_forward(np.zeros((2, 2)), 1).model_copy(update={"ll": np.array([[10.0]])})
        np.testing.assert_allclose(dwt2_inverse(dec), np.full((2, 2), 5.0))

    def test_band_shape_mismatch(self):
        dec = dwt2_forward(np.zeros((8, 8)), 1)
        lh, hl, hh = dec.details[0]
        broken = dec.model_copy(update={"details": [(lh, hl, hh[:1])]})
        with pytest.raises(ShapeMismatch):
            dwt2_inverse(broken)

    def test_level_count_mismatch(self):
        dec = dwt2_forward(np.zeros((8, 8)), 2)
        broken = dec.model_copy(update={"details": dec.details[:1]})
        with pytest.raises(ShapeMismatch):
            dwt2_inverse(broken)


class TestThresholds:
    """Tests for sigma estimation and shrinkage rules."""

    def test_sigma_of_constant(self):
        assert estimate_sigma(dwt2_forward(np.full((16, 16), 90.0), 2)) == 0.0

    def test_sigma_even_median(self):
        dec = dwt2_forward(np.zeros((4, 4)), 1)
        lh, hl, _ = dec.details[0]
        dec = dec.model_copy(update={"details": [(lh, hl, np.array([[-1.0, 0.0], [1.0, 2.0]]))]})
        assert estimate_sigma(dec) == pytest.approx(1.0 / 0.6745)

    def test_sigma_scales_with_input(self):
        x = np.random.default_rng(1).normal(size=(32, 32))
        base = estimate_sigma(dwt2_forward(x, 1))
        assert estimate_sigma(dwt2_forward(-3.0 * x, 1)) == pytest.approx(3.0 * base)

    def test_universal_values(self):
        assert universal_threshold(0.0, 100) == 0.0
        assert universal_threshold(1.0, 4) == pytest.approx(1.6651, abs=1e-4)
        assert universal_threshold(2.0, 4) > universal_threshold(1.0, 4)
        assert universal_threshold(1.0, 1000) > universal_threshold(1.0, 4)

    @pytest.mark.parametrize("n", [0, 1])
    def test_universal_needs_two_coefficients(self, n):
        with pytest.raises(InvalidCount):
            universal_threshold(1.0, n)

    def test_soft(self):
        out = soft_threshold(np.array([5.0, -1.5, -4.0]), 2.0)
        assert out.tolist() == [3.0, 0.0, -2.0]

    def test_hard(self):
        out = hard_threshold(np.array([5.0, 1.9, -2.5]), 2.0)
        assert out.tolist() == [5.0, 0.0, -2.5]

    @given(arrays(np.float64, 20, elements=st.floats(-100, 100)), st.floats(0, 50))
    def test_soft_is_non_expansive(self, c, t):
        assert np.all(np.abs(soft_threshold(c, t)) <= np.abs(c))

    @given(arrays(np.float64, 20, elements=st.floats(-100, 100)), st.floats(0, 50))
    def test_hard_is_idempotent(self, c, t):
        once = hard_threshold(c, t)
        assert np.array_equal(hard_threshold(once, t), once)

    def test_zero_threshold_is_identity(self):
        dec = dwt2_forward(np.random.default_rng(2).normal(size=(8, 8)), 2)
        shrunk = apply_threshold(dec, manual(0.0))
        assert np.array_equal(shrunk.ll, dec.ll)
        for before, after in zip(dec.details, shrunk.details):
            for a, b in zip(before, after):
                assert np.array_equal(a, b)

    def test_approximation_untouched(self):
        dec = dwt2_forward(np.random.default_rng(4).normal(size=(8, 8)) * 50, 1)
        shrunk = apply_threshold(dec, manual(1e6))
        assert np.array_equal(shrunk.ll, dec.ll)
        assert all(np.all(band == 0) for band in shrunk.details[0])

    def test_universal_uses_pixel_count(self):
        dec = dwt2_forward(np.random.default_rng(5).normal(size=(10, 6)), 1)
        spec = ThresholdSpec(sigma_estimate=1.0)
        assert resolve_threshold(dec, spec) == pytest.approx(math.sqrt(2 * math.log(60)))

    def test_manual_rule_needs_value(self):
        with pytest.raises(ValueError):
            ThresholdSpec(rule=ThresholdRule.MANUAL)


class TestDenoise:
    """Tests for single-frame wavelet de-noising."""

    def test_constant_frame(self):
        frame = Frame(data=np.full((16, 16), 77, dtype=np.uint8))
        assert denoise(frame) == frame

    def test_zero_threshold_round_trip(self, small_image):
        restored = denoise(small_image, 2, manual(0.0))
        diff = restored.data.astype(int) - small_image.data.astype(int)
        assert np.max(np.abs(diff)) <= 1

    def test_odd_frame_keeps_shape(self, small_image):
        frame = Frame(data=small_image.data[:15, :9])
        assert denoise(frame, 2).shape == (15, 9)

    @pytest.mark.parametrize("mode", [ShrinkMode.SOFT, ShrinkMode.HARD])
    @pytest.mark.parametrize("homomorphic", [False, True])
    def test_output_in_range(self, mode, homomorphic):
        rng = np.random.default_rng(6)
        frame = Frame(data=rng.integers(0, 256, size=(32, 32)))
        out = denoise(frame, 2, ThresholdSpec(mode=mode), homomorphic=homomorphic)
        assert out.data.dtype == np.uint8
        assert out.shape == frame.shape

    def test_smooths_noise(self, small_image):
        rng = np.random.default_rng(7)
        noisy = np.clip(small_image.data + rng.normal(0, 15, small_image.shape), 0, 255)
        noisy = Frame(data=np.rint(noisy))
        restored = denoise(noisy, 2)
        before = np.mean((noisy.data.astype(float) - small_image.data) ** 2)
        after = np.mean((restored.data.astype(float) - small_image.data) ** 2)
        assert after < before
