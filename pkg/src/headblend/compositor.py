"""Classical compositor: recolor the grayscale head from the color
reference, fill the inpainting band, and feather-blend onto the
background.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .types import BinaryMask, GrayImage, InvalidArgumentError, ReferenceImage, RgbImage


# BT.601 luma weights; chroma scales derived from them exactly so the
# two conversions invert each other to float precision
_KR, _KG, _KB = 0.299, 0.587, 0.114


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    """Full-range BT.601 YCbCr of (..., 3) data, float64."""
    r, g, b = (rgb[..., i].astype(np.float64) for i in range(3))
    y = _KR * r + _KG * g + _KB * b
    cb = 128.0 + (b - y) / (2.0 * (1.0 - _KB))
    cr = 128.0 + (r - y) / (2.0 * (1.0 - _KR))
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    y, cb, cr = (ycc[..., i] for i in range(3))
    r = y + 2.0 * (1.0 - _KR) * (cr - 128.0)
    b = y + 2.0 * (1.0 - _KB) * (cb - 128.0)
    g = (y - _KR * r - _KB * b) / _KG
    return np.stack([r, g, b], axis=-1)


def _check_dims(*pairs) -> None:
    shapes = {(p.height, p.width) for p in pairs}
    if len(shapes) != 1:
        raise InvalidArgumentError(f"inconsistent dimensions: {sorted(shapes)}")


def recolor_head(
    gray_head: GrayImage, head_reference: ReferenceImage, head: BinaryMask
) -> RgbImage:
    """Transfer the reference's chroma onto the grayscale head's luma.

    Keeping the luminance structure of the gray head preserves identity;
    only Cb/Cr come from the warped reference. Head pixels without a
    valid reference color replicate their gray value; non-head pixels
    are zero.
    """
    _check_dims(gray_head, head_reference, head)
    h, w = gray_head.height, gray_head.width
    out = np.zeros((h, w, 3), dtype=np.uint8)

    fallback = head.bits & ~head_reference.valid.bits
    out[fallback] = gray_head.data[fallback, None]

    transfer = head.bits & head_reference.valid.bits
    if transfer.any():
        ycc = rgb_to_ycbcr(head_reference.colors.data[transfer])
        ycc[..., 0] = gray_head.data[transfer]
        out[transfer] = np.clip(np.rint(ycbcr_to_rgb(ycc)), 0, 255).astype(np.uint8)
    return RgbImage(out)


def _nearest_candidate_colors(
    query_idx: np.ndarray,
    candidate_idx: np.ndarray,
    candidate_colors: np.ndarray,
    width: int,
    chunk: int = 1024,
) -> np.ndarray:
    """Color of the euclidean-nearest candidate pixel per query pixel.

    Candidates must be sorted by linear index so that argmin's
    first-match rule breaks distance ties toward the smaller index.
    """
    qy, qx = np.divmod(query_idx.astype(np.int64), width)
    cy, cx = np.divmod(candidate_idx.astype(np.int64), width)
    out = np.empty((query_idx.size, 3), dtype=np.uint8)
    for start in range(0, query_idx.size, chunk):
        dy = qy[start : start + chunk, None] - cy[None, :]
        dx = qx[start : start + chunk, None] - cx[None, :]
        best = np.argmin(dy * dy + dx * dx, axis=1)
        out[start : start + chunk] = candidate_colors[best]
    return out


def fill_inpainting(
    inpaint_reference: ReferenceImage, band: BinaryMask, background: RgbImage
) -> RgbImage:
    """Color the inpainting band, filling holes from the nearest source.

    Band pixels take the reference color where valid. Invalid band
    pixels copy the nearest valid-band or non-band pixel (background
    colors come from the cutout image); equidistant candidates resolve
    to the smaller linear index. Non-band pixels stay zero.
    """
    _check_dims(inpaint_reference, band, background)
    h, w = band.height, band.width
    out = np.zeros((h, w, 3), dtype=np.uint8)
    valid = band.bits & inpaint_reference.valid.bits
    out[valid] = inpaint_reference.colors.data[valid]

    holes = band.bits & ~valid
    if holes.any():
        candidates = ~band.bits | valid
        cand_idx = np.flatnonzero(candidates.ravel())
        if cand_idx.size:
            colors = np.where(
                valid.ravel()[cand_idx, None],
                inpaint_reference.colors.flat()[cand_idx],
                background.flat()[cand_idx],
            )
            hole_idx = np.flatnonzero(holes.ravel())
            out.reshape(-1, 3)[hole_idx] = _nearest_candidate_colors(
                hole_idx, cand_idx, colors, w
            )
    return RgbImage(out)


def _ramp_alpha(bits: np.ndarray, feather: int) -> np.ndarray:
    """Linear alpha ramp over ``feather`` px, centered on the mask edge.

    The boundary counts as the 50%-coverage contour, so the in-mask half
    of the ramp is alpha = 0.5 + (d - 0.5) / feather clipped to [0, 1];
    the out-of-mask half is clipped away to keep the far field untouched.
    """
    if feather == 0:
        return bits.astype(np.float64)
    if bits.all():
        return np.ones(bits.shape, dtype=np.float64)
    dist = ndimage.distance_transform_edt(bits)
    alpha = np.clip(0.5 + (dist - 0.5) / feather, 0.0, 1.0)
    alpha[~bits] = 0.0
    return alpha


def extend_colors(colors: np.ndarray, defined: np.ndarray) -> np.ndarray:
    """Continue colors from ``defined`` pixels into the rest of the frame."""
    if defined.all() or not defined.any():
        return colors.astype(np.float64)
    iy, ix = ndimage.distance_transform_edt(
        ~defined, return_distances=False, return_indices=True
    )
    return colors[iy, ix].astype(np.float64)


def composite(
    head_colored: RgbImage,
    band_fill: RgbImage,
    background: RgbImage,
    head: BinaryMask,
    band: BinaryMask,
    feather: int = 3,
) -> RgbImage:
    """Layer background < band fill < head with feathered seams.

    Alpha ramps linearly over ``feather`` px from each mask's edge
    inward; the under-layer colors are continued across mask holes
    before mixing so the zeroed background cutout never bleeds black
    into a seam. Pixels outside both masks are returned bit-for-bit
    from the background. ``feather=0`` is a hard paste.
    """
    if feather < 0:
        raise InvalidArgumentError(f"feather must be >= 0, got {feather}")
    _check_dims(head_colored, band_fill, background, head, band)
    out = background.data.copy()
    if feather == 0:
        out[band.bits] = band_fill.data[band.bits]
        out[head.bits] = head_colored.data[head.bits]
        return RgbImage(out)

    covered = head.bits | band.bits
    under = extend_colors(background.data, ~covered)
    alpha = _ramp_alpha(band.bits, feather)[..., None]
    mixed = band_fill.data * alpha + under * (1.0 - alpha)
    out[band.bits] = np.clip(np.rint(mixed[band.bits]), 0, 255).astype(np.uint8)

    under = extend_colors(out, ~head.bits)
    alpha = _ramp_alpha(head.bits, feather)[..., None]
    mixed = head_colored.data * alpha + under * (1.0 - alpha)
    out[head.bits] = np.clip(np.rint(mixed[head.bits]), 0, 255).astype(np.uint8)
    return RgbImage(out)
