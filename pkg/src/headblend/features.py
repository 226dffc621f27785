"""Pixel descriptors for correspondence: classical pyramid features and
a portable binary file format so externally computed features can be
injected.

File format (bit-exact): magic ``FMAP``, then little-endian u32 fields
version=1, height, width, channels, then height*width*channels
little-endian float32 values, row-major, channel-fastest.
"""
from __future__ import annotations

import struct

import numpy as np

from .types import InvalidArgumentError, RgbImage

FMAP_MAGIC = b"FMAP"
FMAP_VERSION = 1
_HEADER = struct.Struct("<4sIIII")

DEFAULT_LEVELS = 3
DEFAULT_PATCH_RADIUS = 2


class FeatureFileError(InvalidArgumentError):
    """Malformed feature file; ``offset`` is the byte where parsing failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class FeatureMap:
    """(H, W, C) real-valued descriptor grid, C >= 2, all values finite."""

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data)
        if arr.ndim != 3:
            raise InvalidArgumentError(f"feature map must be (H, W, C), got shape {arr.shape}")
        if arr.dtype not in (np.float32, np.float64):
            raise InvalidArgumentError(f"feature map dtype must be float32/float64, got {arr.dtype}")
        if arr.shape[2] < 2:
            raise InvalidArgumentError(
                "feature maps need at least 2 channels; centralizing a 1-channel vector is identically zero"
            )
        if not np.isfinite(arr).all():
            raise InvalidArgumentError("feature map contains non-finite values")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.data = arr

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def flat(self) -> np.ndarray:
        """(H*W, C) view for linear-index gathers."""
        return self.data.reshape(-1, self.channels)


def _bilinear_resize(plane: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Half-pixel-center bilinear resize of a 2-d float array."""
    in_h, in_w = plane.shape
    if (in_h, in_w) == (out_h, out_w):
        return plane
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    ys = np.clip(ys, 0.0, in_h - 1)
    xs = np.clip(xs, 0.0, in_w - 1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = plane[y0][:, x0] * (1 - wx) + plane[y0][:, x1] * wx
    bot = plane[y1][:, x0] * (1 - wx) + plane[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def _halve(img: np.ndarray) -> np.ndarray:
    """2x box downsample of (H, W, C) data, edge rows/cols duplicated when odd."""
    h, w = img.shape[:2]
    if h % 2:
        img = np.concatenate([img, img[-1:]], axis=0)
        h += 1
    if w % 2:
        img = np.concatenate([img, img[:, -1:]], axis=1)
        w += 1
    return (
        img.reshape(h // 2, 2, w // 2, 2, -1).mean(axis=(1, 3))
    )


def _box_stats(plane: np.ndarray, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of the (2r+1)^2 window around each pixel.

    Windows clamp at the borders: only in-bounds pixels contribute.
    """
    if radius == 0:
        return plane.copy(), np.zeros_like(plane)
    h, w = plane.shape
    ones = np.ones((h, w), dtype=np.float64)

    def boxsum(a: np.ndarray) -> np.ndarray:
        c = np.cumsum(np.cumsum(np.pad(a, ((1, 0), (1, 0))), axis=0), axis=1)
        y0 = np.clip(np.arange(h) - radius, 0, h)
        y1 = np.clip(np.arange(h) + radius + 1, 0, h)
        x0 = np.clip(np.arange(w) - radius, 0, w)
        x1 = np.clip(np.arange(w) + radius + 1, 0, w)
        return c[np.ix_(y1, x1)] - c[np.ix_(y0, x1)] - c[np.ix_(y1, x0)] + c[np.ix_(y0, x0)]

    n = boxsum(ones)
    mean = boxsum(plane) / n
    var = boxsum(plane * plane) / n - mean * mean
    return mean, np.maximum(var, 0.0)


def extract_pyramid_features(
    image: RgbImage,
    levels: int = DEFAULT_LEVELS,
    patch_radius: int = DEFAULT_PATCH_RADIUS,
) -> FeatureMap:
    """Multi-scale color + local luminance statistics, 5 channels per level.

    Per pyramid level: the level's RGB (scaled to [0, 1]) and the
    mean/variance of a (2r+1)^2 luminance patch, all bilinearly upsampled
    back to full resolution. Deterministic for fixed inputs.
    """
    if levels < 1:
        raise InvalidArgumentError(f"levels must be >= 1, got {levels}")
    if patch_radius < 0:
        raise InvalidArgumentError(f"patch radius must be >= 0, got {patch_radius}")
    min_dim = min(image.height, image.width)
    if min_dim < 2 ** (levels - 1):
        raise InvalidArgumentError(
            f"image {image.width}x{image.height} too small for {levels} pyramid levels"
        )

    level_img = image.data.astype(np.float64) / 255.0
    channels = []
    for level in range(levels):
        lum = 0.299 * level_img[..., 0] + 0.587 * level_img[..., 1] + 0.114 * level_img[..., 2]
        mean, var = _box_stats(lum, patch_radius)
        planes = [level_img[..., 0], level_img[..., 1], level_img[..., 2], mean, var]
        for p in planes:
            channels.append(_bilinear_resize(p, image.height, image.width))
        if level + 1 < levels:
            level_img = _halve(level_img)
    return FeatureMap(np.stack(channels, axis=-1).astype(np.float32))


def centralize(fmap: FeatureMap) -> FeatureMap:
    """Subtract each pixel's channel mean from its feature vector.

    Promotes to float64 so the per-pixel channel mean of the result is
    zero to within accumulation error.
    """
    data = fmap.data.astype(np.float64)
    return FeatureMap(data - data.mean(axis=2, keepdims=True))


def save_features(fmap: FeatureMap, path) -> None:
    header = _HEADER.pack(FMAP_MAGIC, FMAP_VERSION, fmap.height, fmap.width, fmap.channels)
    payload = np.ascontiguousarray(fmap.data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_features(path) -> FeatureMap:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != FMAP_MAGIC:
        raise FeatureFileError(f"bad magic in {path}, expected {FMAP_MAGIC!r}", 0)
    if len(blob) < _HEADER.size:
        raise FeatureFileError(f"truncated header in {path}", len(blob))
    _, version, height, width, chans = _HEADER.unpack_from(blob, 0)
    if version != FMAP_VERSION:
        raise FeatureFileError(f"unsupported feature file version {version}", 4)
    expected = _HEADER.size + height * width * chans * 4
    if len(blob) != expected:
        raise FeatureFileError(
            f"payload size mismatch in {path}: expected {expected} bytes, got {len(blob)}",
            min(len(blob), expected),
        )
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise FeatureFileError(
            f"non-finite feature value in {path}", _HEADER.size + int(bad[0]) * 4
        )
    try:
        return FeatureMap(values.reshape(height, width, chans).copy())
    except InvalidArgumentError as exc:
        raise FeatureFileError(f"invalid feature dimensions in {path}: {exc}", 4) from exc
