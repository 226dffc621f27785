"""PNG and text-artifact I/O: images, masks, label maps, manifests, config.

All writers are deterministic: fixed PNG settings, sorted manifest keys,
no timestamps, so re-running a command reproduces artifacts bit for bit.
"""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
from PIL import Image

from .types import BinaryMask, BlenderConfig, GrayImage, InvalidArgumentError, LabelMap, RgbImage


class InvalidInputError(InvalidArgumentError):
    """A user-supplied file is missing or malformed."""


# Bundle artifact names shared by the CLI commands.
ANIMATED_IMAGE = "animated.png"
TARGET_IMAGE = "target.png"
ANIMATED_LABELS = "animated_labels.png"
TARGET_LABELS = "target_labels.png"
HEAD_MASK_ANIMATED = "head_mask_animated.png"
HEAD_MASK_TARGET = "head_mask_target.png"
INPAINT_MASK_ANIMATED = "inpaint_mask_animated.png"
INPAINT_MASK_TARGET = "inpaint_mask_target.png"
HEAD_UNION_DILATED = "head_union_dilated.png"
GRAY_HEAD = "gray_head.png"
BACKGROUND = "background.png"
HEAD_REFERENCE = "head_reference.png"
HEAD_REFERENCE_VALID = "head_reference_valid.png"
INPAINT_REFERENCE = "inpaint_reference.png"
INPAINT_REFERENCE_VALID = "inpaint_reference_valid.png"
MANIFEST = "manifest.txt"

PREPROCESS_ARTIFACTS = (
    HEAD_MASK_ANIMATED,
    HEAD_MASK_TARGET,
    INPAINT_MASK_ANIMATED,
    INPAINT_MASK_TARGET,
    HEAD_UNION_DILATED,
    GRAY_HEAD,
    BACKGROUND,
)


def _open_image(path) -> Image.Image:
    p = Path(path)
    if not p.is_file():
        raise InvalidInputError(f"missing input file: {p}")
    try:
        img = Image.open(p)
        img.load()
    except Exception as exc:
        raise InvalidInputError(f"cannot read image {p}: {exc}") from exc
    return img


def load_rgb(path) -> RgbImage:
    img = _open_image(path)
    return RgbImage(np.asarray(img.convert("RGB"), dtype=np.uint8))


def load_gray(path) -> GrayImage:
    img = _open_image(path)
    return GrayImage(np.asarray(img.convert("L"), dtype=np.uint8))


def load_labels(path) -> LabelMap:
    """Label maps are 8-bit grayscale PNGs whose pixel values are label ids."""
    img = _open_image(path)
    if img.mode not in ("L", "P", "I", "I;16"):
        raise InvalidInputError(
            f"label map {path} must be single-channel, got mode {img.mode!r}"
        )
    arr = np.asarray(img.convert("I"), dtype=np.int64)
    if arr.min() < 0 or arr.max() > 12:
        bad = int(arr.max()) if arr.max() > 12 else int(arr.min())
        raise InvalidInputError(f"invalid label id {bad} in {path}; canonical ids are 0..12")
    return LabelMap(arr.astype(np.uint8))


def load_mask(path) -> BinaryMask:
    img = _open_image(path)
    return BinaryMask(np.asarray(img.convert("L"), dtype=np.uint8) > 0)


def save_rgb(image: RgbImage, path) -> None:
    Image.fromarray(image.data, mode="RGB").save(path, format="PNG")


def save_gray(image: GrayImage, path) -> None:
    Image.fromarray(image.data, mode="L").save(path, format="PNG")


def save_labels(labels: LabelMap, path) -> None:
    Image.fromarray(labels.labels, mode="L").save(path, format="PNG")


def save_mask(mask: BinaryMask, path) -> None:
    Image.fromarray(mask.bits).convert("1").save(path, format="PNG")


def sha256_of(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(entries: dict[str, str], path) -> None:
    lines = [f"{key} = {entries[key]}" for key in sorted(entries)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path) -> dict[str, str]:
    return _read_kv(path)


def _read_kv(path) -> dict[str, str]:
    p = Path(path)
    if not p.is_file():
        raise InvalidInputError(f"missing file: {p}")
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidInputError(f"{p}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


_CONFIG_KEYS = ("tau", "epsilon", "dilate_target", "dilate_union", "feather", "fallback")


def read_config(path) -> BlenderConfig:
    """Parse a key = value config file into a BlenderConfig."""
    return config_from_mapping(_read_kv(path), source=str(path))


def config_from_mapping(entries: dict[str, str], source: str = "config") -> BlenderConfig:
    unknown = set(entries) - set(_CONFIG_KEYS)
    if unknown:
        raise InvalidInputError(f"{source}: unknown config key(s) {sorted(unknown)}")
    kwargs = {}
    try:
        if "tau" in entries:
            kwargs["tau"] = float(entries["tau"])
        if "epsilon" in entries:
            kwargs["epsilon"] = float(entries["epsilon"])
        for key in ("dilate_target", "dilate_union"):
            if key in entries:
                kwargs[key] = None if entries[key] == "auto" else int(entries[key])
        if "feather" in entries:
            kwargs["feather"] = int(entries["feather"])
        if "fallback" in entries:
            kwargs["fallback"] = entries["fallback"]
        return BlenderConfig(**kwargs)
    except (ValueError, InvalidArgumentError) as exc:
        raise InvalidInputError(f"{source}: {exc}") from exc


def config_manifest_entries(config: BlenderConfig, height: int) -> dict[str, str]:
    return {
        "config.tau": repr(config.tau),
        "config.epsilon": repr(config.epsilon),
        "config.dilate_target": str(config.resolved_dilate_target(height)),
        "config.dilate_union": str(config.resolved_dilate_union(height)),
        "config.feather": str(config.feather),
        "config.fallback": config.fallback,
    }
