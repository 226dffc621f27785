import numpy as np
import pytest

from headblend.features import FeatureMap
from headblend.types import BinaryMask, LabelMap, RgbImage


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_mask(rng, width=9, height=7, p=0.4) -> BinaryMask:
    return BinaryMask(rng.random((height, width)) < p)


def random_rgb(rng, width=8, height=8) -> RgbImage:
    return RgbImage(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def random_labels(rng, width=8, height=8, ids=(0, 1, 6, 10)) -> LabelMap:
    return LabelMap(rng.choice(np.asarray(ids, dtype=np.uint8), size=(height, width)))


def random_features(rng, width=8, height=8, channels=4) -> FeatureMap:
    return FeatureMap(rng.standard_normal((height, width, channels)).astype(np.float32))


def mask_from_coords(width, height, coords) -> BinaryMask:
    bits = np.zeros((height, width), dtype=bool)
    for y, x in coords:
        bits[y, x] = True
    return BinaryMask(bits)
