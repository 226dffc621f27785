"""Deterministic synthetic portraits and label maps.

Used by the benchmark (label maps with controllable head fractions), the
demo scripts, and the self-swap acceptance checks. Geometry and colors
derive entirely from the supplied seed/rng.
"""
from __future__ import annotations

import numpy as np

from .features import FeatureMap
from .types import LabelMap, RgbImage

_SKIN_TONES = (
    (236, 200, 178),
    (219, 172, 143),
    (189, 139, 106),
    (145, 98, 70),
    (106, 70, 50),
)
_HAIR_COLORS = (
    (38, 28, 24),
    (82, 54, 32),
    (148, 106, 60),
    (205, 180, 140),
    (60, 60, 66),
)
_CLOTH_COLORS = ((60, 76, 112), (120, 44, 48), (52, 88, 64), (90, 90, 96), (150, 120, 70))
_WALL_COLORS = ((208, 200, 188), (186, 196, 208), (198, 186, 170), (176, 182, 168))


class _Geometry:
    """Ellipse/rect layout of one synthetic portrait."""

    def __init__(self, width: int, height: int, rng: np.random.Generator, scale: float):
        self.cx = width * (0.5 + rng.uniform(-0.04, 0.04))
        self.cy = height * (0.40 + rng.uniform(-0.03, 0.03))
        self.ax = width * 0.26 * scale
        self.ay = height * 0.30 * scale
        self.hair_ax = self.ax * (1.22 + rng.uniform(0, 0.08))
        self.hair_ay = self.ay * (1.18 + rng.uniform(0, 0.08))
        self.hair_cy = self.cy - 0.10 * self.ay


def _ellipse(xx, yy, cx, cy, ax, ay) -> np.ndarray:
    return ((xx - cx) / max(ax, 1e-6)) ** 2 + ((yy - cy) / max(ay, 1e-6)) ** 2 <= 1.0


def _paint_labels(width: int, height: int, rng: np.random.Generator, scale: float,
                  open_mouth: bool) -> tuple[np.ndarray, _Geometry]:
    geo = _Geometry(width, height, rng, scale)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    labels = np.zeros((height, width), dtype=np.uint8)

    body_top = min(height - 1, int(geo.cy + 1.02 * geo.ay))
    half_body = 0.62 * geo.ax * 2
    body = (yy >= body_top) & (np.abs(xx - geo.cx) <= half_body)
    labels[body] = 12

    neck = (
        (yy >= geo.cy + 0.72 * geo.ay)
        & (yy < body_top + max(2, int(0.05 * height)))
        & (np.abs(xx - geo.cx) <= 0.34 * geo.ax)
    )
    labels[neck] = 11

    hair = _ellipse(xx, yy, geo.cx, geo.hair_cy, geo.hair_ax, geo.hair_ay) & (
        yy <= geo.cy + 0.35 * geo.ay
    )
    labels[hair] = 10

    face = _ellipse(xx, yy, geo.cx, geo.cy, geo.ax, geo.ay)
    labels[face] = 1

    for side, label_eye, label_brow in ((-1, 4, 2), (1, 5, 3)):
        ex = geo.cx + side * 0.40 * geo.ax
        eye = _ellipse(xx, yy, ex, geo.cy - 0.12 * geo.ay, 0.16 * geo.ax, 0.09 * geo.ay)
        labels[eye & face] = label_eye
        brow = (
            (np.abs(xx - ex) <= 0.20 * geo.ax)
            & (np.abs(yy - (geo.cy - 0.32 * geo.ay)) <= max(1.0, 0.045 * geo.ay))
        )
        labels[brow & face] = label_brow

    nose = _ellipse(xx, yy, geo.cx, geo.cy + 0.16 * geo.ay, 0.10 * geo.ax, 0.17 * geo.ay)
    labels[nose & face] = 6

    lip_y = geo.cy + 0.55 * geo.ay
    lip_half = 0.26 * geo.ax
    lip_h = max(1.0, 0.05 * geo.ay)
    gap = max(1.0, 0.035 * geo.ay) if open_mouth else 0.0
    upper = (np.abs(xx - geo.cx) <= lip_half) & (yy >= lip_y - lip_h - gap) & (yy < lip_y - gap)
    lower = (np.abs(xx - geo.cx) <= lip_half) & (yy > lip_y + gap) & (yy <= lip_y + lip_h + gap)
    labels[upper & face] = 7
    labels[lower & face] = 8
    if open_mouth:
        tooth = (np.abs(xx - geo.cx) <= 0.8 * lip_half) & (np.abs(yy - lip_y) <= gap)
        labels[tooth & face] = 9
    return labels, geo


def synthetic_labels(
    width: int, height: int, head_fraction: float = 0.35, rng: np.random.Generator | None = None
) -> LabelMap:
    """Label map whose head regions cover roughly ``head_fraction`` of pixels."""
    rng = rng or np.random.default_rng(0)
    # base layout covers ~0.33 of the frame; area scales quadratically
    scale = float(np.sqrt(max(head_fraction, 1e-6) / 0.33))
    scale = min(scale, 1.55)
    labels, _ = _paint_labels(width, height, rng, scale, open_mouth=True)
    return LabelMap(labels)


def synthetic_portrait(
    width: int, height: int, seed: int = 0, open_mouth: bool | None = None
) -> tuple[RgbImage, LabelMap]:
    """A parsed portrait: smooth background, shaded head, consistent labels."""
    rng = np.random.default_rng(seed)
    if open_mouth is None:
        open_mouth = bool(rng.integers(0, 2))
    labels, geo = _paint_labels(width, height, rng, 1.0, open_mouth)

    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    wall = np.array(_WALL_COLORS[rng.integers(0, len(_WALL_COLORS))], dtype=np.float64)
    drift = rng.uniform(-22, 22, size=3)
    img = np.empty((height, width, 3), dtype=np.float64)
    vertical = (yy / max(height - 1, 1))[..., None]
    ripple = 4.0 * np.sin(2 * np.pi * (xx / width * rng.uniform(1.5, 3.5)))[..., None]
    img[:] = wall + drift * vertical + ripple

    skin = np.array(_SKIN_TONES[rng.integers(0, len(_SKIN_TONES))], dtype=np.float64)
    hair = np.array(_HAIR_COLORS[rng.integers(0, len(_HAIR_COLORS))], dtype=np.float64)
    cloth = np.array(_CLOTH_COLORS[rng.integers(0, len(_CLOTH_COLORS))], dtype=np.float64)

    # radial face shading keeps skin pixels distinguishable for matching
    r2 = ((xx - geo.cx) / max(geo.ax, 1.0)) ** 2 + ((yy - geo.cy) / max(geo.ay, 1.0)) ** 2
    shade = (1.0 - 0.22 * np.clip(r2, 0, 1))[..., None]
    streaks = (1.0 + 0.10 * np.sin(xx / max(2.0, width / 48.0)))[..., None]

    regions: dict[int, np.ndarray] = {
        1: skin * shade,
        2: hair * 0.8,
        3: hair * 0.8,
        4: np.array((92, 112, 128), dtype=np.float64) * shade,
        5: np.array((92, 112, 128), dtype=np.float64) * shade,
        6: skin * shade * 0.92,
        7: np.array((168, 86, 92), dtype=np.float64) * shade,
        8: np.array((150, 74, 82), dtype=np.float64) * shade,
        9: np.array((238, 234, 224), dtype=np.float64),
        10: hair * streaks,
        11: skin * 0.88,
        12: cloth + 18.0 * vertical,
    }
    for label, color in regions.items():
        sel = labels == label
        img[sel] = np.broadcast_to(color, img.shape)[sel]

    img += rng.normal(0.0, 1.5, size=img.shape)
    return RgbImage(np.clip(np.rint(img), 0, 255).astype(np.uint8)), LabelMap(labels)


def random_feature_map(
    width: int, height: int, channels: int, rng: np.random.Generator
) -> FeatureMap:
    """Gaussian features; almost surely injective per pixel."""
    return FeatureMap(rng.standard_normal((height, width, channels)).astype(np.float32))
