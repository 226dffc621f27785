"""Command-line surface: preprocess, refs, swap, bench, cycle-check.

Exit codes: 0 success, 1 internal error, 2 invalid input. Reports go to
stdout, diagnostics to stderr. All artifact-producing commands are
deterministic for fixed inputs and flags.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import sys
import traceback
from pathlib import Path

from . import io
from .bench import run_bench
from .correspondence import (
    DEFAULT_NAIVE_PIXEL_CAP,
    EmptyCycleDomainError,
    EntryLedger,
    create_head_color_reference,
    create_inpainting_reference,
    cross_pair_cycle_loss,
    cycle_report,
)
from .features import FeatureMap, centralize, extract_pyramid_features, load_features
from .pipeline import animated_feature_input, preprocess_pair, run_swap
from .types import BlenderConfig, InvalidArgumentError


def _config_from_args(args) -> BlenderConfig:
    config = io.read_config(args.config) if args.config else BlenderConfig()
    overrides = {}
    for flag, field in (
        ("tau", "tau"),
        ("epsilon", "epsilon"),
        ("dilate_target", "dilate_target"),
        ("dilate_union", "dilate_union"),
        ("feather", "feather"),
        ("fallback", "fallback"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    return dataclasses.replace(config, **overrides) if overrides else config


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file; flags override it")
    parser.add_argument("--tau", type=float, help="softmax temperature (default 0.01)")
    parser.add_argument("--epsilon", type=float, help="cosine denominator guard (default 1e-8)")
    parser.add_argument("--dilate-target", type=int, dest="dilate_target",
                        help="target inpaint band radius in px (default scales with height)")
    parser.add_argument("--dilate-union", type=int, dest="dilate_union",
                        help="union head dilation radius in px (default scales with height)")
    parser.add_argument("--feather", type=int, help="composite feather radius in px (default 3)")
    parser.add_argument("--fallback", choices=("skip", "global-head"),
                        help="empty-target-region policy (default global-head)")


def _add_features_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--features", default="pyramid",
        help="'pyramid' or 'file:DIR' with animated.fmap/target.fmap "
             "(and second.fmap for cycle-check with a second target)",
    )


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"{name}: {exc}") from exc


def _load_pair(args):
    with _stage("load"):
        animated = io.load_rgb(args.animated)
        labels_a = io.load_labels(args.animated_labels)
        target = io.load_rgb(args.target)
        labels_t = io.load_labels(args.target_labels)
        reference = (animated.height, animated.width)
        for path, item in (
            (args.animated_labels, labels_a),
            (args.target, target),
            (args.target_labels, labels_t),
        ):
            if (item.height, item.width) != reference:
                raise InvalidArgumentError(
                    f"{path}: dimensions {item.width}x{item.height} do not match "
                    f"{args.animated} ({animated.width}x{animated.height})"
                )
    return animated, labels_a, target, labels_t


def _feature_pair(source: str, animated, target, pre) -> tuple[FeatureMap, FeatureMap]:
    """Centralized feature maps for both sides per the --features flag."""
    if source == "pyramid":
        feat_input = animated_feature_input(
            animated, pre.head_animated, pre.background, pre.head_union_dilated
        )
        return (
            centralize(extract_pyramid_features(feat_input)),
            centralize(extract_pyramid_features(target)),
        )
    if source.startswith("file:"):
        root = Path(source[len("file:"):])
        f_a = centralize(load_features(root / "animated.fmap"))
        f_t = centralize(load_features(root / "target.fmap"))
        return f_a, f_t
    raise InvalidArgumentError(f"unknown feature source {source!r}; expected 'pyramid' or 'file:DIR'")


def _input_manifest_entries(args) -> dict[str, str]:
    return {
        "input.animated.sha256": io.sha256_of(args.animated),
        "input.animated_labels.sha256": io.sha256_of(args.animated_labels),
        "input.target.sha256": io.sha256_of(args.target),
        "input.target_labels.sha256": io.sha256_of(args.target_labels),
    }


def _write_bundle(out_dir: Path, animated, labels_a, target, labels_t, pre) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    io.save_rgb(animated, out_dir / io.ANIMATED_IMAGE)
    io.save_labels(labels_a, out_dir / io.ANIMATED_LABELS)
    io.save_rgb(target, out_dir / io.TARGET_IMAGE)
    io.save_labels(labels_t, out_dir / io.TARGET_LABELS)
    io.save_mask(pre.head_animated, out_dir / io.HEAD_MASK_ANIMATED)
    io.save_mask(pre.head_target, out_dir / io.HEAD_MASK_TARGET)
    io.save_mask(pre.band_animated, out_dir / io.INPAINT_MASK_ANIMATED)
    io.save_mask(pre.band_target, out_dir / io.INPAINT_MASK_TARGET)
    io.save_mask(pre.head_union_dilated, out_dir / io.HEAD_UNION_DILATED)
    io.save_gray(pre.gray_head, out_dir / io.GRAY_HEAD)
    io.save_rgb(pre.background, out_dir / io.BACKGROUND)


def cmd_preprocess(args) -> int:
    animated, labels_a, target, labels_t = _load_pair(args)
    config = _config_from_args(args)
    with _stage("preprocess"):
        pre = preprocess_pair(animated, labels_a, target, labels_t, config)
    out_dir = Path(args.out_dir)
    _write_bundle(out_dir, animated, labels_a, target, labels_t, pre)
    entries = io.config_manifest_entries(config, animated.height)
    entries.update(_input_manifest_entries(args))
    entries["frame.width"] = str(animated.width)
    entries["frame.height"] = str(animated.height)
    entries["artifacts"] = ",".join(io.PREPROCESS_ARTIFACTS)
    io.write_manifest(entries, out_dir / io.MANIFEST)
    print(f"wrote {len(io.PREPROCESS_ARTIFACTS)} artifacts + manifest to {out_dir}")
    return 0


def _load_bundle(bundle: Path):
    with _stage("bundle"):
        animated = io.load_rgb(bundle / io.ANIMATED_IMAGE)
        labels_a = io.load_labels(bundle / io.ANIMATED_LABELS)
        target = io.load_rgb(bundle / io.TARGET_IMAGE)
        labels_t = io.load_labels(bundle / io.TARGET_LABELS)
        pre_masks = {
            "head_animated": io.load_mask(bundle / io.HEAD_MASK_ANIMATED),
            "head_target": io.load_mask(bundle / io.HEAD_MASK_TARGET),
            "band_animated": io.load_mask(bundle / io.INPAINT_MASK_ANIMATED),
            "band_target": io.load_mask(bundle / io.INPAINT_MASK_TARGET),
            "head_union_dilated": io.load_mask(bundle / io.HEAD_UNION_DILATED),
            "background": io.load_rgb(bundle / io.BACKGROUND),
        }
    return animated, labels_a, target, labels_t, pre_masks


class _BundleView:
    """Just enough of PreprocessResult for feature-input assembly."""

    def __init__(self, masks):
        self.head_animated = masks["head_animated"]
        self.head_target = masks["head_target"]
        self.band_animated = masks["band_animated"]
        self.band_target = masks["band_target"]
        self.head_union_dilated = masks["head_union_dilated"]
        self.background = masks["background"]


def cmd_refs(args) -> int:
    bundle = Path(args.bundle)
    animated, labels_a, target, labels_t, masks = _load_bundle(bundle)
    config = _config_from_args(args)
    pre = _BundleView(masks)
    with _stage("features"):
        f_a, f_t = _feature_pair(args.features, animated, target, pre)
    ledger = EntryLedger()
    with _stage("refs"):
        head_ref = create_head_color_reference(
            f_a, labels_a, f_t, labels_t, target, config, ledger
        )
        inpaint_ref = create_inpainting_reference(
            f_a, pre.band_animated, f_t, pre.band_target, target, config, ledger,
            target_head=pre.head_target,
        )
    io.save_rgb(head_ref.colors, bundle / io.HEAD_REFERENCE)
    io.save_mask(head_ref.valid, bundle / io.HEAD_REFERENCE_VALID)
    io.save_rgb(inpaint_ref.colors, bundle / io.INPAINT_REFERENCE)
    io.save_mask(inpaint_ref.valid, bundle / io.INPAINT_REFERENCE_VALID)

    manifest = io.read_manifest(bundle / io.MANIFEST)
    manifest.update(io.config_manifest_entries(config, animated.height))
    manifest["refs.features"] = args.features
    manifest["refs.correlation_entries"] = str(ledger.entries)
    io.write_manifest(manifest, bundle / io.MANIFEST)
    print(f"wrote references to {bundle} ({ledger.entries} correlation entries)")
    return 0


def cmd_swap(args) -> int:
    animated, labels_a, target, labels_t = _load_pair(args)
    config = _config_from_args(args)
    features = None
    if args.features != "pyramid":
        with _stage("features"):
            pre = preprocess_pair(animated, labels_a, target, labels_t, config)
            features = _feature_pair(args.features, animated, target, pre)
    with _stage("swap"):
        result = run_swap(animated, labels_a, target, labels_t, config, features)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.save_rgb(result.output, out)
    if args.keep_intermediates:
        inter = out.parent / (out.stem + ".artifacts")
        _write_bundle(inter, animated, labels_a, target, labels_t, result.pre)
        io.save_rgb(result.head_reference.colors, inter / io.HEAD_REFERENCE)
        io.save_mask(result.head_reference.valid, inter / io.HEAD_REFERENCE_VALID)
        io.save_rgb(result.inpaint_reference.colors, inter / io.INPAINT_REFERENCE)
        io.save_mask(result.inpaint_reference.valid, inter / io.INPAINT_REFERENCE_VALID)
        io.save_rgb(result.recolored_head, inter / "recolored_head.png")
        io.save_rgb(result.band_fill, inter / "band_fill.png")
        entries = io.config_manifest_entries(config, animated.height)
        entries.update(_input_manifest_entries(args))
        entries["swap.correlation_entries"] = str(result.correlation_entries)
        entries["swap.features"] = args.features
        io.write_manifest(entries, inter / io.MANIFEST)
    print(f"wrote {out}")
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    result = run_bench(
        sizes,
        head_fraction=args.head_fraction,
        repetitions=args.reps,
        naive_pixel_cap=args.cap,
        seed=args.seed,
    )
    print(result.to_text())
    kv_lines = result.to_kv()
    print()
    print("\n".join(kv_lines))
    if args.kv:
        Path(args.kv).write_text("\n".join(kv_lines) + "\n", encoding="utf-8")
    return 0


def cmd_cycle_check(args) -> int:
    animated, labels_a, target, labels_t = _load_pair(args)
    config = _config_from_args(args)
    with _stage("preprocess"):
        pre = preprocess_pair(animated, labels_a, target, labels_t, config)
    with _stage("features"):
        f_a, f_t = _feature_pair(args.features, animated, target, pre)
    with _stage("refs"):
        head_ref = create_head_color_reference(
            f_a, labels_a, f_t, labels_t, target, config
        )
    try:
        report = cycle_report(f_a, labels_a, f_t, labels_t, head_ref, target, config)
        for region in report.regions:
            if region.loss is None:
                print(f"region {region.region}: cycle loss = undefined (empty cycle domain)")
            else:
                print(f"region {region.region}: cycle loss = {region.loss:.6f} ({region.pixels} px)")
        print(f"aggregate cycle loss = {report.loss:.6f}")
    except EmptyCycleDomainError:
        print("aggregate cycle loss = undefined (empty cycle domain)")

    if args.second_target:
        if not args.second_labels:
            raise InvalidArgumentError("--second-target requires --second-labels")
        with _stage("second-target"):
            second = io.load_rgb(args.second_target)
            labels_s = io.load_labels(args.second_labels)
            if args.features == "pyramid":
                f_s = centralize(extract_pyramid_features(second))
            else:
                root = Path(args.features[len("file:"):])
                f_s = centralize(load_features(root / "second.fmap"))
        try:
            loss = cross_pair_cycle_loss(
                f_a, labels_a, f_s, labels_s, second, target, config
            )
            print(f"aggregate cross-pair cycle loss = {loss:.6f}")
        except EmptyCycleDomainError:
            print("aggregate cross-pair cycle loss = undefined (empty cycle domain)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="headblend",
        description="Semantic-region color correspondence warping and head compositing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="derive masks, grayscale head, and background cutout")
    for name in ("animated", "animated_labels", "target", "target_labels", "out_dir"):
        p.add_argument(name)
    _add_config_flags(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("refs", help="create head-color and inpainting references for a bundle")
    p.add_argument("bundle")
    _add_features_flag(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_refs)

    p = sub.add_parser("swap", help="run the full pipeline and write the blended output")
    for name in ("animated", "animated_labels", "target", "target_labels"):
        p.add_argument(name)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-intermediates", action="store_true", dest="keep_intermediates")
    _add_features_flag(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_swap)

    p = sub.add_parser("bench", help="naive vs region-restricted correlation benchmark")
    p.add_argument("--sizes", default="16,32,64", help="comma-separated square frame sizes")
    p.add_argument("--head-fraction", type=float, default=0.35, dest="head_fraction")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--cap", type=int, default=DEFAULT_NAIVE_PIXEL_CAP,
                   help="pixel cap for the naive arm")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kv", help="also write the key-value document to this path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cycle-check", help="cycle-consistency losses for a pair")
    for name in ("animated", "animated_labels", "target", "target_labels"):
        p.add_argument(name)
    p.add_argument("--second-target", dest="second_target")
    p.add_argument("--second-labels", dest="second_labels")
    _add_features_flag(p)
    _add_config_flags(p)
    p.set_defaults(func=cmd_cycle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc(file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
