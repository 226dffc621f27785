import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from headblend.compositor import (
    composite,
    extend_colors,
    fill_inpainting,
    recolor_head,
    rgb_to_ycbcr,
    ycbcr_to_rgb,
)
from headblend.preprocessing import grayscale_head
from headblend.types import (
    BinaryMask,
    GrayImage,
    InvalidArgumentError,
    ReferenceImage,
    RgbImage,
)

from conftest import mask_from_coords, random_mask, random_rgb


def reference_from(colors: RgbImage, valid: BinaryMask) -> ReferenceImage:
    data = colors.data.copy()
    data[~valid.bits] = 0
    return ReferenceImage(RgbImage(data), valid)


class TestYCbCr:
    def test_round_trip_close(self, rng):
        rgb = rng.integers(0, 256, size=(50, 3)).astype(np.float64)
        back = ycbcr_to_rgb(rgb_to_ycbcr(rgb))
        assert np.abs(back - rgb).max() < 1e-9

    def test_gray_has_neutral_chroma(self):
        gray = np.array([[17.0, 17.0, 17.0]])
        ycc = rgb_to_ycbcr(gray)
        assert ycc[0, 1] == pytest.approx(128.0, abs=1e-9)
        assert ycc[0, 2] == pytest.approx(128.0, abs=1e-9)


class TestRecolorHead:
    def test_round_trip_within_two_levels(self, rng):
        image = random_rgb(rng, 8, 8)
        head = BinaryMask.full(8, 8)
        gray = grayscale_head(image, head)
        ref = reference_from(image, head)
        out = recolor_head(gray, ref, head)
        assert np.abs(out.data.astype(np.int64) - image.data.astype(np.int64)).max() <= 2

    def test_gray_reference_returns_gray_value(self, rng):
        head = BinaryMask.full(4, 4)
        c = rng.integers(0, 256)
        ref_colors = RgbImage(np.full((4, 4, 3), c, dtype=np.uint8))
        ref = reference_from(ref_colors, head)
        gray = GrayImage(rng.integers(0, 256, size=(4, 4), dtype=np.uint8))
        out = recolor_head(gray, ref, head)
        assert (out.data == gray.data[..., None]).all()

    def test_outside_head_is_zero(self, rng):
        image = random_rgb(rng, 5, 5)
        head = mask_from_coords(5, 5, [(1, 1), (2, 3)])
        gray = grayscale_head(image, head)
        out = recolor_head(gray, reference_from(image, head), head)
        assert not out.data[~head.bits].any()

    def test_invalid_reference_pixels_stay_gray(self, rng):
        image = random_rgb(rng, 5, 5)
        head = BinaryMask.full(5, 5)
        valid = mask_from_coords(5, 5, [(0, 0)])
        gray = grayscale_head(image, head)
        out = recolor_head(gray, reference_from(image, valid), head)
        hole = head.bits & ~valid.bits
        assert (out.data[hole] == gray.data[hole, None]).all()


class TestFillInpainting:
    def test_all_valid_passes_through(self, rng):
        band = random_mask(rng, 6, 6, p=0.5)
        image = random_rgb(rng, 6, 6)
        ref = reference_from(image, band)
        out = fill_inpainting(ref, band, random_rgb(rng, 6, 6))
        assert (out.data[band.bits] == image.data[band.bits]).all()
        assert not out.data[~band.bits].any()

    def test_no_valid_uniform_background(self):
        band = mask_from_coords(5, 5, [(2, 2), (2, 3)])
        ref = ReferenceImage.empty(5, 5)
        background = RgbImage(np.full((5, 5, 3), 99, dtype=np.uint8))
        out = fill_inpainting(ref, band, background)
        assert (out.data[band.bits] == 99).all()

    def test_hole_copies_adjacent_valid(self):
        # band covers the whole strip, so the only candidate is the valid px
        band = BinaryMask.full(5, 1)
        colors = np.zeros((1, 5, 3), dtype=np.uint8)
        colors[0, 0] = (10, 20, 30)
        valid = mask_from_coords(5, 1, [(0, 0)])
        ref = ReferenceImage(RgbImage(colors), valid)
        background = RgbImage(np.full((1, 5, 3), 200, dtype=np.uint8))
        out = fill_inpainting(ref, band, background)
        assert (out.data[0, 1:] == (10, 20, 30)).all()

    def test_tie_breaks_to_smaller_linear_index(self):
        # hole at (0,1); valid candidates at (0,0) and (0,2) are equidistant
        band = BinaryMask.full(3, 1)
        colors = np.zeros((1, 3, 3), dtype=np.uint8)
        colors[0, 0] = (5, 5, 5)
        colors[0, 2] = (7, 7, 7)
        valid = mask_from_coords(3, 1, [(0, 0), (0, 2)])
        ref = ReferenceImage(RgbImage(colors), valid)
        background = RgbImage(np.full((1, 3, 3), 244, dtype=np.uint8))
        out = fill_inpainting(ref, band, background)
        assert tuple(out.data[0, 1]) == (5, 5, 5)

    def test_fill_matches_brute_force_oracle(self, rng):
        band = random_mask(rng, 7, 6, p=0.45)
        valid_bits = band.bits & (rng.random((6, 7)) < 0.4)
        valid = BinaryMask(valid_bits)
        image = random_rgb(rng, 7, 6)
        background = random_rgb(rng, 7, 6)
        ref = reference_from(image, valid)
        out = fill_inpainting(ref, band, background)

        h, w = 6, 7
        for y in range(h):
            for x in range(w):
                if not band.bits[y, x] or valid.bits[y, x]:
                    continue
                best = None
                for cy in range(h):
                    for cx in range(w):
                        is_valid_band = valid.bits[cy, cx]
                        is_background = not band.bits[cy, cx]
                        if not (is_valid_band or is_background):
                            continue
                        d = (cy - y) ** 2 + (cx - x) ** 2
                        key = (d, cy * w + cx)
                        if best is None or key < best[0]:
                            color = image.data[cy, cx] if is_valid_band else background.data[cy, cx]
                            best = (key, color)
                assert (out.data[y, x] == best[1]).all()


class TestComposite:
    def test_feather_zero_is_hard_paste(self, rng):
        head = mask_from_coords(6, 6, [(2, 2), (2, 3), (3, 2)])
        band = mask_from_coords(6, 6, [(1, 1), (1, 2), (4, 4)])
        head_img = random_rgb(rng, 6, 6)
        band_img = random_rgb(rng, 6, 6)
        bg = random_rgb(rng, 6, 6)
        out = composite(head_img, band_img, bg, head, band, feather=0)
        assert (out.data[head.bits] == head_img.data[head.bits]).all()
        assert (out.data[band.bits] == band_img.data[band.bits]).all()
        rest = ~(head.bits | band.bits)
        assert (out.data[rest] == bg.data[rest]).all()

    def test_uniform_layers_stay_uniform(self, rng):
        color = (130, 40, 220)
        head = random_mask(rng, 8, 8, p=0.3)
        band = random_mask(rng, 8, 8, p=0.3).difference(head)
        uniform = RgbImage(np.full((8, 8, 3), color, dtype=np.uint8))
        for feather in (0, 1, 3, 5):
            out = composite(uniform, uniform, uniform, head, band, feather)
            assert (out.data == np.array(color, dtype=np.uint8)).all()

    def test_far_background_bitwise_unchanged(self, rng):
        head = mask_from_coords(8, 8, [(3, 3), (3, 4), (4, 3), (4, 4)])
        band = mask_from_coords(8, 8, [(2, 2), (2, 3), (5, 5)])
        bg = random_rgb(rng, 8, 8)
        out = composite(random_rgb(rng, 8, 8), random_rgb(rng, 8, 8), bg, head, band, feather=3)
        outside = ~(head.bits | band.bits)
        assert (out.data[outside] == bg.data[outside]).all()

    def test_feather_zero_head_equals_recolor_output(self, rng):
        image = random_rgb(rng, 6, 6)
        head = mask_from_coords(6, 6, [(2, 2), (3, 3), (2, 3)])
        gray = grayscale_head(image, head)
        recolored = recolor_head(gray, reference_from(image, head), head)
        out = composite(
            recolored, RgbImage.zeros(6, 6), random_rgb(rng, 6, 6),
            head, BinaryMask.zeros(6, 6), feather=0,
        )
        assert (out.data[head.bits] == recolored.data[head.bits]).all()

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=4), st.integers(min_value=0, max_value=2**32 - 1))
    def test_output_is_convex_in_layers(self, feather, seed):
        rng = np.random.default_rng(seed)
        head = random_mask(rng, 7, 7, p=0.35)
        band = random_mask(rng, 7, 7, p=0.35).difference(head)
        head_img = random_rgb(rng, 7, 7)
        band_img = random_rgb(rng, 7, 7)
        bg = random_rgb(rng, 7, 7)
        out = composite(head_img, band_img, bg, head, band, feather)
        # the feather underlay extends colors spatially, so the envelope
        # is per-layer-image, not per-pixel
        stack = np.stack([head_img.data, band_img.data, bg.data]).astype(np.int64)
        hi = stack.max(axis=(0, 1, 2))
        lo = stack.min(axis=(0, 1, 2))
        assert (out.data.astype(np.int64) <= hi + 1).all()
        assert (out.data.astype(np.int64) >= lo - 1).all()

    def test_negative_feather_rejected(self, rng):
        m = BinaryMask.zeros(4, 4)
        img = random_rgb(rng, 4, 4)
        with pytest.raises(InvalidArgumentError):
            composite(img, img, img, m, m, feather=-1)

    def test_deterministic(self, rng):
        head = random_mask(rng, 8, 8, p=0.3)
        band = random_mask(rng, 8, 8, p=0.3).difference(head)
        a = random_rgb(rng, 8, 8)
        b = random_rgb(rng, 8, 8)
        c = random_rgb(rng, 8, 8)
        out1 = composite(a, b, c, head, band, feather=2)
        out2 = composite(a, b, c, head, band, feather=2)
        assert (out1.data == out2.data).all()


class TestExtendColors:
    def test_defined_pixels_unchanged(self, rng):
        img = random_rgb(rng, 5, 5)
        defined = random_mask(rng, 5, 5, p=0.5)
        if not defined.bits.any():
            return
        out = extend_colors(img.data, defined.bits)
        assert (out[defined.bits] == img.data[defined.bits]).all()

    def test_hole_takes_nearest_color(self):
        img = np.zeros((1, 4, 3), dtype=np.uint8)
        img[0, 0] = (9, 9, 9)
        defined = np.zeros((1, 4), dtype=bool)
        defined[0, 0] = True
        out = extend_colors(img, defined)
        assert (out == 9).all()
