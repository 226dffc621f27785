import numpy as np
import pytest

from headblend import io
from headblend.types import BlenderConfig, GrayImage, LabelMap

from conftest import random_mask, random_rgb


class TestPngRoundTrips:
    def test_rgb(self, rng, tmp_path):
        img = random_rgb(rng, 9, 7)
        io.save_rgb(img, tmp_path / "x.png")
        assert (io.load_rgb(tmp_path / "x.png").data == img.data).all()

    def test_gray(self, rng, tmp_path):
        img = GrayImage(rng.integers(0, 256, size=(5, 6), dtype=np.uint8))
        io.save_gray(img, tmp_path / "g.png")
        assert (io.load_gray(tmp_path / "g.png").data == img.data).all()

    def test_mask(self, rng, tmp_path):
        mask = random_mask(rng, 8, 5)
        io.save_mask(mask, tmp_path / "m.png")
        assert (io.load_mask(tmp_path / "m.png").bits == mask.bits).all()

    def test_labels(self, rng, tmp_path):
        labels = LabelMap(rng.integers(0, 13, size=(6, 6), dtype=np.uint8))
        io.save_labels(labels, tmp_path / "l.png")
        assert (io.load_labels(tmp_path / "l.png").labels == labels.labels).all()

    def test_missing_file_reported(self, tmp_path):
        with pytest.raises(io.InvalidInputError, match="missing"):
            io.load_rgb(tmp_path / "nope.png")

    def test_out_of_range_label_file_rejected(self, tmp_path):
        from PIL import Image

        Image.fromarray(np.full((4, 4), 200, dtype=np.uint8), mode="L").save(tmp_path / "bad.png")
        with pytest.raises(io.InvalidInputError, match="invalid label"):
            io.load_labels(tmp_path / "bad.png")

    def test_rgb_label_file_rejected(self, rng, tmp_path):
        io.save_rgb(random_rgb(rng, 4, 4), tmp_path / "rgb.png")
        with pytest.raises(io.InvalidInputError, match="single-channel"):
            io.load_labels(tmp_path / "rgb.png")


class TestManifest:
    def test_round_trip_sorted(self, tmp_path):
        entries = {"b.key": "2", "a.key": "hello world", "c": "x = y"}
        io.write_manifest(entries, tmp_path / "manifest.txt")
        text = (tmp_path / "manifest.txt").read_text()
        assert text.splitlines()[0].startswith("a.key")
        assert io.read_manifest(tmp_path / "manifest.txt") == entries

    def test_rejects_malformed_line(self, tmp_path):
        (tmp_path / "m.txt").write_text("not a pair\n")
        with pytest.raises(io.InvalidInputError):
            io.read_manifest(tmp_path / "m.txt")


class TestConfigFile:
    def test_parse_all_keys(self, tmp_path):
        (tmp_path / "c.txt").write_text(
            "tau = 0.5\nepsilon = 1e-6\ndilate_target = 3\n"
            "dilate_union = auto\nfeather = 0\nfallback = skip\n"
        )
        cfg = io.read_config(tmp_path / "c.txt")
        assert cfg == BlenderConfig(
            tau=0.5, epsilon=1e-6, dilate_target=3, dilate_union=None,
            feather=0, fallback="skip",
        )

    def test_comments_and_blanks_ignored(self, tmp_path):
        (tmp_path / "c.txt").write_text("# comment\n\ntau = 2.0\n")
        assert io.read_config(tmp_path / "c.txt").tau == 2.0

    def test_unknown_key_rejected(self, tmp_path):
        (tmp_path / "c.txt").write_text("sigma = 1\n")
        with pytest.raises(io.InvalidInputError, match="unknown config key"):
            io.read_config(tmp_path / "c.txt")

    def test_bad_value_rejected(self, tmp_path):
        (tmp_path / "c.txt").write_text("tau = fast\n")
        with pytest.raises(io.InvalidInputError):
            io.read_config(tmp_path / "c.txt")
