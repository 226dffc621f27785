"""Semantic-region-restricted correspondence and color warping.

Correlation is computed only between pixels that share a semantic
region, so the cost is sum_r N_A^r * N_T^r matrix entries instead of
the (w*h)^2 of a full pairwise correlation. A capped naive
full-correlation oracle is kept alongside for equivalence checks and
benchmarking.

All operations are pure; feature maps are read-only, so blocks for
different regions may be computed concurrently.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .features import FeatureMap
from .types import (
    BinaryMask,
    GrayImage,
    HEAD_LABEL_IDS,
    BlenderConfig,
    InvalidArgumentError,
    LabelMap,
    ReferenceImage,
    RegionIndex,
    RgbImage,
    label_region_specs,
)

# Pixel cap for the naive oracle: a 64x64 frame already means a
# 4096^2 float64 matrix (128 MiB).
DEFAULT_NAIVE_PIXEL_CAP = 64 * 64

# Row-chunk size for streamed warps; bounds peak memory at
# chunk * N_cols float64 entries.
_STREAM_CHUNK = 512


class EmptyCycleDomainError(RuntimeError):
    """No region produced any cycled pixel."""


class EntryLedger:
    """Thread-safe count of correlation entries allocated in a run."""

    def __init__(self):
        self._lock = threading.Lock()
        self.entries = 0

    def add(self, n: int) -> None:
        with self._lock:
            self.entries += int(n)


@dataclass(frozen=True, eq=False)
class CorrelationBlock:
    """Cosine similarities between one region's pixels in both frames.

    ``values[i, j]`` correlates the i-th row pixel (animated frame) with
    the j-th column pixel (target frame); shape is N_A^r x N_T^r.
    """

    region: str
    rows: RegionIndex
    cols: RegionIndex
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.shape != (len(self.rows), len(self.cols)):
            raise InvalidArgumentError(
                f"block shape {vals.shape} does not match region sizes "
                f"({len(self.rows)}, {len(self.cols)})"
            )
        if vals.size and (np.abs(vals) > 1.0 + 1e-6).any():
            raise InvalidArgumentError("correlation values must lie in [-1, 1]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def transposed(self) -> "CorrelationBlock":
        """Swap the two frames; used for warping back target-ward."""
        return CorrelationBlock(self.region, self.cols, self.rows, self.values.T)


@dataclass(frozen=True, eq=False)
class AttentionRow:
    """Softmax weights of one source pixel over its region's target pixels."""

    source_index: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1:
            raise InvalidArgumentError("attention weights must be a vector")
        if w.size and abs(w.sum() - 1.0) > 1e-6:
            raise InvalidArgumentError("attention weights must sum to 1")
        if (w < 0).any():
            raise InvalidArgumentError("attention weights must be non-negative")
        object.__setattr__(self, "weights", w)


def _unit_rows(vectors: np.ndarray, epsilon: float) -> np.ndarray:
    v = vectors.astype(np.float64, copy=False)
    norms = np.sqrt(np.einsum("ij,ij->i", v, v))
    return v / np.maximum(norms, epsilon)[:, None]


def _check_frame(index: RegionIndex, fmap: FeatureMap, side: str) -> None:
    if (index.width, index.height) != (fmap.width, fmap.height):
        raise InvalidArgumentError(
            f"{side} region index frame {index.width}x{index.height} does not match "
            f"feature map {fmap.width}x{fmap.height}"
        )


def region_correlation(
    f_animated: FeatureMap,
    f_target: FeatureMap,
    rows: RegionIndex,
    cols: RegionIndex,
    epsilon: float = 1e-8,
    ledger: EntryLedger | None = None,
) -> CorrelationBlock:
    """Cosine correlation block of one region, N_A^r x N_T^r entries.

    ``epsilon`` guards the norm denominators: pixels whose centralized
    feature vector is zero correlate as 0 instead of failing.
    """
    if f_animated.channels != f_target.channels:
        raise InvalidArgumentError(
            f"channel mismatch: {f_animated.channels} vs {f_target.channels}"
        )
    _check_frame(rows, f_animated, "row")
    _check_frame(cols, f_target, "column")
    ua = _unit_rows(f_animated.flat()[rows.indices], epsilon)
    ut = _unit_rows(f_target.flat()[cols.indices], epsilon)
    values = ua @ ut.T
    if ledger is not None:
        ledger.add(values.size)
    return CorrelationBlock(rows.name, rows, cols, values)


def softmax_rows(values: np.ndarray, tau: float) -> np.ndarray:
    """Numerically stable row softmax of values / tau."""
    if not tau > 0:
        raise InvalidArgumentError(f"tau must be positive, got {tau}")
    if values.shape[1] == 0:
        return np.zeros_like(values, dtype=np.float64)
    scaled = values.astype(np.float64, copy=False) / tau
    scaled = scaled - scaled.max(axis=1, keepdims=True)
    w = np.exp(scaled)
    return w / w.sum(axis=1, keepdims=True)


def attention_row(block: CorrelationBlock, row_position: int, tau: float) -> AttentionRow:
    if not 0 <= row_position < len(block.rows):
        raise InvalidArgumentError(f"row position {row_position} out of range")
    weights = softmax_rows(block.values[row_position : row_position + 1], tau)[0]
    return AttentionRow(int(block.rows.indices[row_position]), weights)


def softmax_warp(block: CorrelationBlock, target_image: RgbImage, tau: float) -> ReferenceImage:
    """Color each row pixel with the attention-weighted target colors.

    An empty column set yields a reference with an empty valid mask;
    fallback policies are applied by the reference-creation drivers.
    """
    if (target_image.width, target_image.height) != (block.cols.width, block.cols.height):
        raise InvalidArgumentError("target image does not match the block's column frame")
    w, h = block.rows.width, block.rows.height
    if len(block.cols) == 0 or len(block.rows) == 0:
        return ReferenceImage.empty(w, h)
    weights = softmax_rows(block.values, tau)
    colors = target_image.flat()[block.cols.indices].astype(np.float64)
    warped = np.clip(np.rint(weights @ colors), 0, 255).astype(np.uint8)

    out = np.zeros((h * w, 3), dtype=np.uint8)
    out[block.rows.indices] = warped
    valid = np.zeros(h * w, dtype=bool)
    valid[block.rows.indices] = True
    return ReferenceImage(RgbImage(out.reshape(h, w, 3)), BinaryMask(valid.reshape(h, w)))


def _warp_colors(
    f_src: FeatureMap,
    src_indices: np.ndarray,
    f_dst: FeatureMap,
    dst_indices: np.ndarray,
    dst_colors: np.ndarray,
    tau: float,
    epsilon: float,
    ledger: EntryLedger | None,
    chunk: int = _STREAM_CHUNK,
) -> np.ndarray:
    """Streamed correlate + softmax + color mix; never holds a full block.

    Row chunks bound peak memory while the per-pixel math stays identical
    to the materialized-block path.
    """
    if f_src.channels != f_dst.channels:
        raise InvalidArgumentError(
            f"channel mismatch: {f_src.channels} vs {f_dst.channels}"
        )
    u_dst = _unit_rows(f_dst.flat()[dst_indices], epsilon)
    colors = dst_colors.astype(np.float64)
    src_flat = f_src.flat()
    out = np.empty((src_indices.size, 3), dtype=np.uint8)
    for start in range(0, src_indices.size, chunk):
        sel = src_indices[start : start + chunk]
        sims = _unit_rows(src_flat[sel], epsilon) @ u_dst.T
        if ledger is not None:
            ledger.add(sims.size)
        weights = softmax_rows(sims, tau)
        out[start : start + chunk] = np.clip(np.rint(weights @ colors), 0, 255)
    return out


def _target_head_indices(labels_target: LabelMap) -> np.ndarray:
    return labels_target.mask_for(HEAD_LABEL_IDS).indices()


def create_head_color_reference(
    f_animated: FeatureMap,
    labels_animated: LabelMap,
    f_target: FeatureMap,
    labels_target: LabelMap,
    target_image: RgbImage,
    config: BlenderConfig,
    ledger: EntryLedger | None = None,
) -> ReferenceImage:
    """Warp target colors into the animated head's geometry, region by region.

    Each of the six label-defined regions is correlated and warped
    independently. When the target lacks a region entirely, the
    ``global-head`` fallback re-correlates against every target head
    pixel, while ``skip`` leaves those animated pixels invalid.
    """
    _check_label_frames(f_animated, labels_animated, f_target, labels_target, target_image)
    h, w = labels_animated.height, labels_animated.width
    out = np.zeros((h * w, 3), dtype=np.uint8)
    valid = np.zeros(h * w, dtype=bool)
    target_colors = target_image.flat()
    head_cols: np.ndarray | None = None

    for spec in label_region_specs():
        rows = RegionIndex.from_labels(labels_animated, spec)
        if len(rows) == 0:
            continue
        cols = RegionIndex.from_labels(labels_target, spec).indices
        if cols.size == 0:
            if config.fallback == "skip":
                continue
            if head_cols is None:
                head_cols = _target_head_indices(labels_target)
            cols = head_cols
            if cols.size == 0:
                continue
        out[rows.indices] = _warp_colors(
            f_animated, rows.indices, f_target, cols,
            target_colors[cols], config.tau, config.epsilon, ledger,
        )
        valid[rows.indices] = True
    return ReferenceImage(RgbImage(out.reshape(h, w, 3)), BinaryMask(valid.reshape(h, w)))


def create_inpainting_reference(
    f_animated: FeatureMap,
    band_animated: BinaryMask,
    f_target: FeatureMap,
    band_target: BinaryMask,
    target_image: RgbImage,
    config: BlenderConfig,
    ledger: EntryLedger | None = None,
    target_head: BinaryMask | None = None,
) -> ReferenceImage:
    """Warp the target's own inpainting band into the animated band.

    With an empty target band, the ``global-head`` fallback correlates
    against ``target_head`` when supplied; ``skip`` (or a missing head
    mask) yields an empty-valid reference.
    """
    if (band_animated.width, band_animated.height) != (f_animated.width, f_animated.height):
        raise InvalidArgumentError("animated band mask does not match the animated feature map")
    if (band_target.width, band_target.height) != (f_target.width, f_target.height):
        raise InvalidArgumentError("target band mask does not match the target feature map")
    if (target_image.width, target_image.height) != (f_target.width, f_target.height):
        raise InvalidArgumentError("target image does not match the target feature map")

    w, h = band_animated.width, band_animated.height
    rows = band_animated.indices()
    if rows.size == 0:
        return ReferenceImage.empty(w, h)
    cols = band_target.indices()
    if cols.size == 0:
        if config.fallback == "global-head" and target_head is not None:
            cols = target_head.indices()
        if cols.size == 0:
            return ReferenceImage.empty(w, h)

    colors = _warp_colors(
        f_animated, rows, f_target, cols,
        target_image.flat()[cols], config.tau, config.epsilon, ledger,
    )
    out = np.zeros((h * w, 3), dtype=np.uint8)
    out[rows] = colors
    valid = np.zeros(h * w, dtype=bool)
    valid[rows] = True
    return ReferenceImage(RgbImage(out.reshape(h, w, 3)), BinaryMask(valid.reshape(h, w)))


@dataclass(frozen=True)
class RegionCycleLoss:
    region: str
    pixels: int
    loss: float | None  # None when the region's cycle domain is empty


@dataclass(frozen=True, eq=False)
class CycleResult:
    cycled: ReferenceImage
    loss: float
    regions: tuple[RegionCycleLoss, ...]


def _check_label_frames(f_a, labels_a, f_t, labels_t, image_t) -> None:
    if (labels_a.width, labels_a.height) != (f_a.width, f_a.height):
        raise InvalidArgumentError("animated labels do not match the animated feature map")
    if (labels_t.width, labels_t.height) != (f_t.width, f_t.height):
        raise InvalidArgumentError("target labels do not match the target feature map")
    if (image_t.width, image_t.height) != (f_t.width, f_t.height):
        raise InvalidArgumentError("target image does not match the target feature map")


def _cycle(
    f_animated: FeatureMap,
    labels_animated: LabelMap,
    f_target: FeatureMap,
    labels_target: LabelMap,
    reference: ReferenceImage,
    compare_image: RgbImage,
    config: BlenderConfig,
    ledger: EntryLedger | None,
) -> CycleResult:
    h, w = labels_target.height, labels_target.width
    cycled = np.zeros((h * w, 3), dtype=np.uint8)
    valid = np.zeros(h * w, dtype=bool)
    ref_valid = reference.valid.bits.ravel()
    ref_colors = reference.colors.flat()
    compare = compare_image.flat()

    per_region: list[RegionCycleLoss] = []
    abs_sum = 0.0
    n_values = 0
    for spec in label_region_specs():
        cols = RegionIndex.from_labels(labels_target, spec).indices
        rows = RegionIndex.from_labels(labels_animated, spec).indices
        rows = rows[ref_valid[rows]]
        if cols.size == 0 or rows.size == 0:
            per_region.append(RegionCycleLoss(spec.name, 0, None))
            continue
        back = _warp_colors(
            f_target, cols, f_animated, rows,
            ref_colors[rows], config.tau, config.epsilon, ledger,
        )
        cycled[cols] = back
        valid[cols] = True
        diff = np.abs(back.astype(np.float64) - compare[cols].astype(np.float64))
        abs_sum += diff.sum()
        n_values += diff.size
        per_region.append(RegionCycleLoss(spec.name, int(cols.size), float(diff.mean() / 255.0)))

    if n_values == 0:
        raise EmptyCycleDomainError("empty cycle domain")
    result = ReferenceImage(
        RgbImage(cycled.reshape(h, w, 3)), BinaryMask(valid.reshape(h, w))
    )
    return CycleResult(result, abs_sum / n_values / 255.0, tuple(per_region))


def cycle_warp_and_loss(
    f_animated: FeatureMap,
    labels_animated: LabelMap,
    f_target: FeatureMap,
    labels_target: LabelMap,
    reference: ReferenceImage,
    target_image: RgbImage,
    config: BlenderConfig,
    ledger: EntryLedger | None = None,
) -> tuple[ReferenceImage, float]:
    """Warp the forward reference back to target geometry and score it.

    The backward direction reuses the same correlations transposed:
    each target pixel softmaxes over the animated pixels of its region.
    Returns the cycled reference and the mean absolute difference to
    the target on [0, 1] color scale.
    """
    res = cycle_report(
        f_animated, labels_animated, f_target, labels_target,
        reference, target_image, config, ledger,
    )
    return res.cycled, res.loss


def cycle_report(
    f_animated: FeatureMap,
    labels_animated: LabelMap,
    f_target: FeatureMap,
    labels_target: LabelMap,
    reference: ReferenceImage,
    target_image: RgbImage,
    config: BlenderConfig,
    ledger: EntryLedger | None = None,
) -> CycleResult:
    """Per-region cycle losses plus the pixel-weighted aggregate."""
    _check_label_frames(f_animated, labels_animated, f_target, labels_target, target_image)
    return _cycle(
        f_animated, labels_animated, f_target, labels_target,
        reference, target_image, config, ledger,
    )


def cross_pair_cycle_loss(
    f_animated: FeatureMap,
    labels_animated: LabelMap,
    f_second: FeatureMap,
    labels_second: LabelMap,
    second_image: RgbImage,
    target_image: RgbImage,
    config: BlenderConfig,
    ledger: EntryLedger | None = None,
) -> float:
    """Cycle loss when warping from a second, unrelated target image.

    Colors travel second -> animated -> second geometry but are scored
    against the primary target image.
    """
    if (target_image.width, target_image.height) != (second_image.width, second_image.height):
        raise InvalidArgumentError("second target image dimensions differ from the target image")
    reference = create_head_color_reference(
        f_animated, labels_animated, f_second, labels_second, second_image, config, ledger
    )
    res = _cycle(
        f_animated, labels_animated, f_second, labels_second,
        reference, target_image, config, ledger,
    )
    return res.loss


def accumulated_attention(block: CorrelationBlock, tau: float) -> GrayImage:
    """Total attention weight per source pixel, rendered over its frame.

    In-region pixels accumulate exactly 1 (softmax normalization) and
    render 255; everything outside the region stays 0 since cross-region
    pairs are never correlated.
    """
    h, w = block.rows.height, block.rows.width
    out = np.zeros(h * w, dtype=np.uint8)
    if len(block.rows) and len(block.cols):
        sums = softmax_rows(block.values, tau).sum(axis=1)
        out[block.rows.indices] = np.clip(np.rint(sums * 255.0), 0, 255).astype(np.uint8)
    return GrayImage(out.reshape(h, w))


def naive_full_correlation(
    f_animated: FeatureMap,
    f_target: FeatureMap,
    epsilon: float = 1e-8,
    max_pixels: int = DEFAULT_NAIVE_PIXEL_CAP,
    ledger: EntryLedger | None = None,
) -> np.ndarray:
    """All-pairs cosine correlation, the (w*h)^2 baseline.

    Refuses frames above ``max_pixels`` pixels; the region-restricted
    path exists precisely so this matrix never has to be built.
    """
    if (f_animated.width, f_animated.height) != (f_target.width, f_target.height):
        raise InvalidArgumentError("feature maps must share dimensions for full correlation")
    if f_animated.channels != f_target.channels:
        raise InvalidArgumentError(
            f"channel mismatch: {f_animated.channels} vs {f_target.channels}"
        )
    wh = f_animated.width * f_animated.height
    if wh > max_pixels:
        entries = wh * wh
        raise InvalidArgumentError(
            f"naive correlation refused: {wh} pixels -> {entries} entries "
            f"(~{entries * 8 / 1e9:.2f} GB float64) exceeds the {max_pixels}-pixel cap"
        )
    ua = _unit_rows(f_animated.flat(), epsilon)
    ut = _unit_rows(f_target.flat(), epsilon)
    values = ua @ ut.T
    if ledger is not None:
        ledger.add(values.size)
    return values
