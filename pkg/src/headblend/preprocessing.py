"""Mask derivation, grayscale head, and background cutout.

Everything here is a pure function of its inputs; the masks feed the
region-restricted correspondence and the compositor.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np
from scipy import ndimage

from .types import (
    BinaryMask,
    GrayImage,
    HEAD_LABEL_IDS,
    InvalidArgumentError,
    LabelMap,
    RgbImage,
    _validated_label_ids,
)


def head_mask(labels: LabelMap, head_label_ids: Iterable[int] = HEAD_LABEL_IDS) -> BinaryMask:
    """Union of all head-area labels (default: skin through hair, 1..10)."""
    ids = _validated_label_ids(head_label_ids)
    return labels.mask_for(ids)


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """Morphological dilation with a (2r+1)^2 square element, clamped at borders."""
    if radius < 0:
        raise InvalidArgumentError(f"dilation radius must be >= 0, got {radius}")
    if radius == 0:
        return mask
    grown = ndimage.maximum_filter(
        mask.bits.view(np.uint8), size=2 * radius + 1, mode="constant", cval=0
    )
    return BinaryMask(grown.astype(bool))


def target_inpaint_mask(head: BinaryMask, radius: int) -> BinaryMask:
    """Band of pixels gained by dilating the target head mask."""
    if radius < 1:
        raise InvalidArgumentError(f"target inpaint radius must be >= 1, got {radius}")
    return dilate(head, radius).difference(head)


def animated_inpaint_mask(
    head_animated: BinaryMask, head_target: BinaryMask, radius: int
) -> tuple[BinaryMask, BinaryMask]:
    """Band exposed by the head-shape mismatch, plus the dilated union.

    Returns ``(band, dilated_union)`` where ``dilated_union`` grows the
    union of both head masks by ``radius`` and ``band`` is that area
    minus the animated head.
    """
    if radius < 1:
        raise InvalidArgumentError(f"union dilation radius must be >= 1, got {radius}")
    dilated_union = dilate(head_animated.union(head_target), radius)
    return dilated_union.difference(head_animated), dilated_union


def luminance8(rgb: np.ndarray) -> np.ndarray:
    """Integer BT.601 luma of (..., 3) uint8 data, round half up."""
    r = rgb[..., 0].astype(np.uint32)
    g = rgb[..., 1].astype(np.uint32)
    b = rgb[..., 2].astype(np.uint32)
    return ((299 * r + 587 * g + 114 * b + 500) // 1000).astype(np.uint8)


def grayscale_head(image: RgbImage, head: BinaryMask) -> GrayImage:
    """BT.601 luma inside the head mask, zero elsewhere."""
    if (image.height, image.width) != (head.height, head.width):
        raise InvalidArgumentError(
            f"image {image.data.shape[:2]} and mask {head.bits.shape} dimensions differ"
        )
    gray = luminance8(image.data)
    gray[~head.bits] = 0
    return GrayImage(gray)


def background_cutout(image: RgbImage, dilated_union: BinaryMask) -> RgbImage:
    """Target image with the enlarged head area zeroed out."""
    if (image.height, image.width) != (dilated_union.height, dilated_union.width):
        raise InvalidArgumentError(
            f"image {image.data.shape[:2]} and mask {dilated_union.bits.shape} dimensions differ"
        )
    out = image.data.copy()
    out[dilated_union.bits] = 0
    return RgbImage(out)
