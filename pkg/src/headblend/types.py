"""Shared value types: images, masks, label maps, semantic regions, config.

All types are immutable after construction (backing arrays are marked
read-only) and safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class InvalidArgumentError(ValueError):
    """An operation received arguments that violate its contract."""


# Fixed 13-label scheme matching common face-parser outputs.
CANONICAL_LABELS: tuple[tuple[int, str], ...] = (
    (0, "background"),
    (1, "skin"),
    (2, "left_brow"),
    (3, "right_brow"),
    (4, "left_eye"),
    (5, "right_eye"),
    (6, "nose"),
    (7, "upper_lip"),
    (8, "lower_lip"),
    (9, "tooth"),
    (10, "hair"),
    (11, "neck"),
    (12, "body"),
)

MAX_LABEL_ID = 12

# Labels that make up a head; neck and body stay with the background.
HEAD_LABEL_IDS: frozenset[int] = frozenset(range(1, 11))

REGION_NAMES = ("face", "hair", "eye", "nose", "lip", "tooth", "inpainting")

FALLBACK_POLICIES = ("skip", "global-head")


def canonical_labels() -> tuple[tuple[int, str], ...]:
    """Return the fixed (label id, name) table."""
    return CANONICAL_LABELS


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_uint8(arr, shape_desc: str, ndim: int) -> np.ndarray:
    a = np.asarray(arr)
    if a.dtype != np.uint8:
        raise InvalidArgumentError(f"expected uint8 data for {shape_desc}, got {a.dtype}")
    if a.ndim != ndim:
        raise InvalidArgumentError(f"expected {ndim}-d array for {shape_desc}, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidArgumentError(f"{shape_desc} must be at least 1x1, got shape {a.shape}")
    return _freeze(np.ascontiguousarray(a))


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB image, row-major (H, W, 3)."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_uint8(self.data, "RgbImage", 3)
        if arr.shape[2] != 3:
            raise InvalidArgumentError(f"RgbImage needs 3 channels, got {arr.shape[2]}")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @classmethod
    def zeros(cls, width: int, height: int) -> "RgbImage":
        return cls(np.zeros((height, width, 3), dtype=np.uint8))

    def flat(self) -> np.ndarray:
        """(H*W, 3) view for linear-index color lookups."""
        return self.data.reshape(-1, 3)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit single-channel image, row-major (H, W)."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_uint8(self.data, "GrayImage", 2))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean pixel mask. Set algebra requires equal dimensions."""

    bits: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.bits)
        if a.dtype != np.bool_:
            raise InvalidArgumentError(f"expected bool mask bits, got {a.dtype}")
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise InvalidArgumentError(f"mask must be a 2-d grid, got shape {a.shape}")
        object.__setattr__(self, "bits", _freeze(np.ascontiguousarray(a)))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def zeros(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.ones((height, width), dtype=bool))

    def _check_same_size(self, other: "BinaryMask") -> None:
        if self.bits.shape != other.bits.shape:
            raise InvalidArgumentError(
                f"mask dimensions differ: {self.bits.shape} vs {other.bits.shape}"
            )

    def union(self, other: "BinaryMask") -> "BinaryMask":
        self._check_same_size(other)
        return BinaryMask(self.bits | other.bits)

    def intersection(self, other: "BinaryMask") -> "BinaryMask":
        self._check_same_size(other)
        return BinaryMask(self.bits & other.bits)

    def difference(self, other: "BinaryMask") -> "BinaryMask":
        self._check_same_size(other)
        return BinaryMask(self.bits & ~other.bits)

    def is_subset_of(self, other: "BinaryMask") -> bool:
        self._check_same_size(other)
        return bool((~self.bits | other.bits).all())

    def indices(self) -> np.ndarray:
        """Linear indices (row-major) of set pixels, strictly increasing."""
        return np.flatnonzero(self.bits)


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel semantic label ids from a face parser; ids in 0..12."""

    labels: np.ndarray

    def __post_init__(self):
        arr = _as_uint8(self.labels, "LabelMap", 2)
        if arr.size and int(arr.max()) > MAX_LABEL_ID:
            raise InvalidArgumentError(
                f"invalid label id {int(arr.max())}; canonical ids are 0..{MAX_LABEL_ID}"
            )
        object.__setattr__(self, "labels", arr)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def mask_for(self, label_ids: Iterable[int]) -> BinaryMask:
        ids = _validated_label_ids(label_ids)
        return BinaryMask(np.isin(self.labels, sorted(ids)))


def _validated_label_ids(label_ids: Iterable[int]) -> frozenset[int]:
    ids = frozenset(int(i) for i in label_ids)
    bad = [i for i in ids if i < 0 or i > MAX_LABEL_ID]
    if bad:
        raise InvalidArgumentError(f"unknown label id(s) {sorted(bad)}; canonical ids are 0..{MAX_LABEL_ID}")
    return ids


@dataclass(frozen=True)
class RegionSpec:
    """A named semantic region and the label ids that belong to it.

    The inpainting region carries no labels: its pixels come from a mask.
    """

    name: str
    label_ids: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.name not in REGION_NAMES:
            raise InvalidArgumentError(f"unknown region name {self.name!r}; expected one of {REGION_NAMES}")
        object.__setattr__(self, "label_ids", _validated_label_ids(self.label_ids))
        if self.name == "inpainting" and self.label_ids:
            raise InvalidArgumentError("the inpainting region is mask-defined and carries no label ids")


def default_region_specs() -> tuple[RegionSpec, ...]:
    """The seven regions driving per-region correlation.

    Left/right eyes merge into one region, as do the two lips: one
    correlation block per region gives every source pixel the full set
    of candidate pixels on the target side.
    """
    return (
        RegionSpec("face", frozenset({1, 2, 3})),
        RegionSpec("hair", frozenset({10})),
        RegionSpec("eye", frozenset({4, 5})),
        RegionSpec("nose", frozenset({6})),
        RegionSpec("lip", frozenset({7, 8})),
        RegionSpec("tooth", frozenset({9})),
        RegionSpec("inpainting"),
    )


def label_region_specs() -> tuple[RegionSpec, ...]:
    """The six label-defined regions (everything except inpainting)."""
    return tuple(s for s in default_region_specs() if s.name != "inpainting")


@dataclass(frozen=True, eq=False)
class RegionIndex:
    """Sorted linear pixel indices of one semantic region within a frame."""

    name: str
    indices: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        idx = np.ascontiguousarray(np.asarray(self.indices, dtype=np.int64))
        if idx.ndim != 1:
            raise InvalidArgumentError(f"region indices must be 1-d, got shape {idx.shape}")
        if idx.size:
            if (np.diff(idx) <= 0).any():
                raise InvalidArgumentError("region indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= self.width * self.height:
                raise InvalidArgumentError("region index out of range for frame")
        object.__setattr__(self, "indices", _freeze(idx))

    def __len__(self) -> int:
        return int(self.indices.size)

    @classmethod
    def from_labels(cls, labels: LabelMap, spec: RegionSpec) -> "RegionIndex":
        mask = labels.mask_for(spec.label_ids) if spec.label_ids else BinaryMask.zeros(labels.width, labels.height)
        return cls(spec.name, mask.indices(), labels.width, labels.height)

    @classmethod
    def from_mask(cls, name: str, mask: BinaryMask) -> "RegionIndex":
        return cls(name, mask.indices(), mask.width, mask.height)

    def to_mask(self) -> BinaryMask:
        bits = np.zeros(self.width * self.height, dtype=bool)
        bits[self.indices] = True
        return BinaryMask(bits.reshape(self.height, self.width))


@dataclass(frozen=True, eq=False)
class ReferenceImage:
    """Warped colors plus the mask of pixels where a color exists."""

    colors: RgbImage
    valid: BinaryMask

    def __post_init__(self):
        if (self.colors.height, self.colors.width) != (self.valid.height, self.valid.width):
            raise InvalidArgumentError("reference colors and validity mask dimensions differ")
        if self.colors.data[~self.valid.bits].any():
            raise InvalidArgumentError("reference colors outside the valid mask must be zero")

    @property
    def height(self) -> int:
        return self.colors.height

    @property
    def width(self) -> int:
        return self.colors.width

    @classmethod
    def empty(cls, width: int, height: int) -> "ReferenceImage":
        return cls(RgbImage.zeros(width, height), BinaryMask.zeros(width, height))


def _scaled_radius(base_at_512: int, height: int) -> int:
    # round-half-up scaling against the 512 px reference height
    return max(1, (base_at_512 * height + 256) // 512)


@dataclass(frozen=True)
class BlenderConfig:
    """Tunables for reference creation and compositing.

    ``dilate_target`` / ``dilate_union`` of ``None`` scale the 512 px
    defaults (7 and 11) proportionally with image height.
    """

    tau: float = 0.01
    epsilon: float = 1e-8
    dilate_target: int | None = None
    dilate_union: int | None = None
    feather: int = 3
    fallback: str = "global-head"

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidArgumentError(f"tau must be positive, got {self.tau}")
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon}")
        for name in ("dilate_target", "dilate_union"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise InvalidArgumentError(f"{name} must be >= 0, got {v}")
        if self.feather < 0:
            raise InvalidArgumentError(f"feather must be >= 0, got {self.feather}")
        if self.fallback not in FALLBACK_POLICIES:
            raise InvalidArgumentError(
                f"unknown fallback policy {self.fallback!r}; expected one of {FALLBACK_POLICIES}"
            )

    def resolved_dilate_target(self, height: int) -> int:
        return self.dilate_target if self.dilate_target is not None else _scaled_radius(7, height)

    def resolved_dilate_union(self, height: int) -> int:
        return self.dilate_union if self.dilate_union is not None else _scaled_radius(11, height)
