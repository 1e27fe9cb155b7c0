import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from labelscale.raster import class_histogram
from labelscale.resample import (
    Kernel,
    ResizeSpec,
    cubic_weight,
    lanczos3_weight,
    map_coord,
    parse_size,
    quantize,
    resize,
    resize_kernel,
    resize_nearest,
    tap_weights,
)
from oracles import resize_kernel_ref

images = arrays(
    np.uint8,
    st.tuples(st.integers(1, 10), st.integers(1, 10)),
    elements=st.integers(0, 255),
)
dims = st.integers(1, 24)


def test_map_coord():
    assert map_coord(0, 0.5) == -0.25
    assert map_coord(0, 1) == 0.0
    assert map_coord(3, 0.5) == 1.25


class TestNearest:
    def test_block_replication(self):
        img = np.array([[10, 20], [30, 40]], np.uint8)
        out = resize_nearest(img, ResizeSpec(2, 2, 4, 4))
        expected = np.array(
            [[10, 10, 20, 20], [10, 10, 20, 20], [30, 30, 40, 40], [30, 30, 40, 40]]
        )
        np.testing.assert_array_equal(out, expected)

    def test_identity(self, rng):
        img = rng.integers(0, 256, (9, 13)).astype(np.uint8)
        np.testing.assert_array_equal(resize_nearest(img, ResizeSpec(13, 9, 13, 9)), img)

    def test_matches_exact_rounding(self):
        # clamp(floor(map_coord + 0.5)) evaluated in exact rationals
        for src in range(1, 20):
            for dst in range(1, 40):
                m = tap_weights(src, dst, Kernel.NEAREST).argmax(axis=1)
                ref = [
                    min(max(math.floor((Fraction(i) + Fraction(1, 2)) * Fraction(src, dst)), 0), src - 1)
                    for i in range(dst)
                ]
                np.testing.assert_array_equal(m, ref)

    def test_tri_class_128_to_256(self, rng):
        mask = rng.choice(np.array([0, 128, 255], np.uint8), size=(128, 128))
        out = resize_nearest(mask, ResizeSpec(128, 128, 256, 256))
        assert out.shape == (256, 256)
        assert set(class_histogram(out)) == {0, 128, 255}

    @given(images, dims, dims)
    def test_never_creates_values(self, img, dw, dh):
        h, w = img.shape
        out = resize_nearest(img, ResizeSpec(w, h, dw, dh))
        assert set(class_histogram(out)) <= set(class_histogram(img))

    def test_wrong_kernel_or_dims(self):
        with pytest.raises(ValueError):
            resize_nearest(np.zeros((2, 2)), ResizeSpec(2, 2, 4, 4, Kernel.BICUBIC))
        with pytest.raises(ValueError):
            resize_nearest(np.zeros((2, 3)), ResizeSpec(2, 2, 4, 4))


class TestWeights:
    def test_cubic_values(self):
        assert cubic_weight(0) == 1.0
        assert cubic_weight(1) == 0.0 and cubic_weight(-1) == 0.0
        assert cubic_weight(2) == 0.0 and cubic_weight(-2) == 0.0
        assert cubic_weight(0.5) == 0.5625
        assert cubic_weight(3.7) == 0.0

    def test_lanczos_values(self):
        assert lanczos3_weight(0) == 1.0
        for k in (1, 2, -1, -2, 3, -3, 4):
            assert abs(lanczos3_weight(k)) <= 1e-12
        # sinc(1.5) * sinc(0.5) = (-2 / 3pi) * (2 / pi)
        assert lanczos3_weight(1.5) == pytest.approx(-4 / (3 * math.pi**2), abs=1e-12)
        assert lanczos3_weight(1.5) == pytest.approx(-0.1351, abs=1e-4)

    def test_cubic_continuous_at_knots(self):
        for t in (1.0, 2.0):
            assert cubic_weight(t - 1e-9) == pytest.approx(cubic_weight(t + 1e-9), abs=1e-7)

    @given(st.floats(-5, 5, allow_nan=False))
    def test_even(self, t):
        assert cubic_weight(t) == cubic_weight(-t)
        assert lanczos3_weight(t) == pytest.approx(lanczos3_weight(-t), abs=1e-15)

    @pytest.mark.parametrize("kernel", [Kernel.BICUBIC, Kernel.LANCZOS3])
    @given(src=st.integers(1, 30), dst=st.integers(1, 60))
    @settings(max_examples=50)
    def test_partition_of_unity(self, kernel, src, dst):
        w = tap_weights(src, dst, kernel)
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)


class TestKernelResize:
    def test_step_overshoot_hand_values(self):
        # 0|255 step at column 4, upscaled 2x; phase 0.25 weights are
        # (0.8671875, 0.2265625, -0.0703125, -0.0234375)
        row = np.array([[0, 0, 0, 0, 255, 255, 255, 255]], np.uint8)
        img = np.repeat(row, 4, axis=0)
        out = resize_kernel(img, ResizeSpec(8, 4, 16, 8, Kernel.BICUBIC))
        np.testing.assert_allclose(
            out[0, 6:10], [-17.9296875, 51.796875, 203.203125, 272.9296875], atol=1e-9
        )
        assert out.min() < 0 and out.max() > 255
        q = quantize(out)
        assert len(class_histogram(q)) > 2

    @pytest.mark.parametrize("kernel", [Kernel.BICUBIC, Kernel.LANCZOS3])
    def test_constant_fixed_point(self, kernel):
        img = np.full((7, 5), 93, np.uint8)
        for dw, dh in [(10, 14), (3, 2), (5, 7), (17, 9)]:
            out = resize_kernel(img, ResizeSpec(5, 7, dw, dh, kernel))
            np.testing.assert_allclose(out, 93, atol=1e-9)
            assert (quantize(out) == 93).all()

    @pytest.mark.parametrize("kernel", [Kernel.BICUBIC, Kernel.LANCZOS3])
    def test_identity(self, kernel, rng):
        img = rng.integers(0, 256, (11, 6)).astype(np.uint8)
        out = resize_kernel(img, ResizeSpec(6, 11, 6, 11, kernel))
        np.testing.assert_allclose(out, img, atol=1e-9)

    @pytest.mark.parametrize("kernel", ["bicubic", "lanczos3"])
    @given(img=images, dw=st.integers(1, 14), dh=st.integers(1, 14))
    @settings(max_examples=40, deadline=None)
    def test_matches_direct_2d_sum(self, kernel, img, dw, dh):
        h, w = img.shape
        out = resize_kernel(img, ResizeSpec(w, h, dw, dh, kernel))
        np.testing.assert_allclose(out, resize_kernel_ref(img, dw, dh, kernel), atol=1e-9)

    @pytest.mark.parametrize("kernel", [Kernel.BICUBIC, Kernel.LANCZOS3])
    @given(img=images, dw=st.integers(1, 20), dh=st.integers(1, 20))
    @settings(max_examples=40)
    def test_separable_order(self, kernel, img, dw, dh):
        h, w = img.shape
        wy = tap_weights(h, dh, kernel)
        wx = tap_weights(w, dw, kernel)
        x_first = wy @ (img.astype(float) @ wx.T)
        y_first = (wy @ img.astype(float)) @ wx.T
        np.testing.assert_allclose(x_first, y_first, atol=1e-9)

    def test_rejects_nearest(self):
        with pytest.raises(ValueError):
            resize_kernel(np.zeros((2, 2)), ResizeSpec(2, 2, 4, 4, Kernel.NEAREST))


def test_quantize():
    np.testing.assert_array_equal(quantize([[-3.2, 0.5, 127.4, 260.0]]), [[0, 1, 127, 255]])
    np.testing.assert_array_equal(quantize([[128.5]]), [[129]])
    vals = np.arange(256, dtype=float).reshape(16, 16)
    np.testing.assert_array_equal(quantize(vals), vals)


def test_resize_convenience_and_size_parsing():
    img = np.full((4, 4), 10, np.uint8)
    assert resize(img, (8, 6), "lanczos3").shape == (6, 8)
    assert parse_size("256x128") == (256, 128)
    with pytest.raises(ValueError):
        parse_size("256")
    with pytest.raises(ValueError):
        ResizeSpec(0, 1, 1, 1)
