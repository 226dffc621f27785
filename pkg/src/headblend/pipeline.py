"""End-to-end orchestration: preprocess -> features -> references -> composite."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compositor import composite, extend_colors, fill_inpainting, recolor_head
from .correspondence import (
    EntryLedger,
    create_head_color_reference,
    create_inpainting_reference,
)
from .features import FeatureMap, centralize, extract_pyramid_features
from .preprocessing import (
    animated_inpaint_mask,
    background_cutout,
    grayscale_head,
    head_mask,
    target_inpaint_mask,
)
from .types import (
    BinaryMask,
    BlenderConfig,
    GrayImage,
    InvalidArgumentError,
    LabelMap,
    ReferenceImage,
    RgbImage,
)


@dataclass(frozen=True, eq=False)
class PreprocessResult:
    head_animated: BinaryMask
    head_target: BinaryMask
    band_animated: BinaryMask
    band_target: BinaryMask
    head_union_dilated: BinaryMask
    gray_head: GrayImage
    background: RgbImage


def preprocess_pair(
    animated: RgbImage,
    labels_animated: LabelMap,
    target: RgbImage,
    labels_target: LabelMap,
    config: BlenderConfig,
) -> PreprocessResult:
    """Derive every mask plus the grayscale head and background cutout."""
    dims = {
        (animated.height, animated.width),
        (labels_animated.height, labels_animated.width),
        (target.height, target.width),
        (labels_target.height, labels_target.width),
    }
    if len(dims) != 1:
        raise InvalidArgumentError(f"input dimensions differ: {sorted(dims)}")

    height = animated.height
    mask_a = head_mask(labels_animated)
    mask_t = head_mask(labels_target)
    band_t = target_inpaint_mask(mask_t, config.resolved_dilate_target(height))
    band_a, dilated_union = animated_inpaint_mask(
        mask_a, mask_t, config.resolved_dilate_union(height)
    )
    return PreprocessResult(
        head_animated=mask_a,
        head_target=mask_t,
        band_animated=band_a,
        band_target=band_t,
        head_union_dilated=dilated_union,
        gray_head=grayscale_head(animated, mask_a),
        background=background_cutout(target, dilated_union),
    )


def animated_feature_input(
    animated: RgbImage,
    head_animated: BinaryMask,
    background: RgbImage,
    head_union_dilated: BinaryMask,
) -> RgbImage:
    """Image the animated-side features are computed from.

    The animated portrait only carries meaningful pixels on its head.
    Everywhere else the background cutout is used, with its zeroed hole
    continued from the nearest real pixels first, so inpainting-band
    features describe the surrounding scene instead of the hole.
    """
    scene = extend_colors(background.data, ~head_union_dilated.bits)
    scene = np.clip(np.rint(scene), 0, 255).astype(np.uint8)
    out = np.where(head_animated.bits[..., None], animated.data, scene)
    return RgbImage(out)


def pyramid_feature_pair(
    animated: RgbImage,
    target: RgbImage,
    pre: PreprocessResult,
) -> tuple[FeatureMap, FeatureMap]:
    """Centralized pyramid features for both sides of a pair."""
    feat_input = animated_feature_input(
        animated, pre.head_animated, pre.background, pre.head_union_dilated
    )
    f_a = centralize(extract_pyramid_features(feat_input))
    f_t = centralize(extract_pyramid_features(target))
    return f_a, f_t


@dataclass(frozen=True, eq=False)
class SwapResult:
    pre: PreprocessResult
    head_reference: ReferenceImage
    inpaint_reference: ReferenceImage
    recolored_head: RgbImage
    band_fill: RgbImage
    output: RgbImage
    correlation_entries: int


def run_swap(
    animated: RgbImage,
    labels_animated: LabelMap,
    target: RgbImage,
    labels_target: LabelMap,
    config: BlenderConfig,
    features: tuple[FeatureMap, FeatureMap] | None = None,
) -> SwapResult:
    """Full head blend of an aligned portrait onto the target scene.

    ``features`` overrides the pyramid extractor with externally
    computed (already centralized) maps for both sides.
    """
    pre = preprocess_pair(animated, labels_animated, target, labels_target, config)
    if features is None:
        f_a, f_t = pyramid_feature_pair(animated, target, pre)
    else:
        f_a, f_t = features
        for name, fmap in (("animated", f_a), ("target", f_t)):
            if (fmap.height, fmap.width) != (animated.height, animated.width):
                raise InvalidArgumentError(
                    f"{name} feature map {fmap.width}x{fmap.height} does not match "
                    f"image {animated.width}x{animated.height}"
                )

    ledger = EntryLedger()
    head_ref = create_head_color_reference(
        f_a, labels_animated, f_t, labels_target, target, config, ledger
    )
    inpaint_ref = create_inpainting_reference(
        f_a, pre.band_animated, f_t, pre.band_target, target, config, ledger,
        target_head=pre.head_target,
    )
    recolored = recolor_head(pre.gray_head, head_ref, pre.head_animated)
    band_fill = fill_inpainting(inpaint_ref, pre.band_animated, pre.background)
    output = composite(
        recolored, band_fill, pre.background,
        pre.head_animated, pre.band_animated, config.feather,
    )
    return SwapResult(
        pre=pre,
        head_reference=head_ref,
        inpaint_reference=inpaint_ref,
        recolored_head=recolored,
        band_fill=band_fill,
        output=output,
        correlation_entries=ledger.entries,
    )
