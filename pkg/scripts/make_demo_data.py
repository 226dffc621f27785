#!/usr/bin/env python3
"""Generate synthetic parsed portraits for exercising the CLI.

Writes portrait/label PNG pairs (and an extra pair usable as a second
target for cycle checks) into the output directory.
"""
import argparse
from pathlib import Path

from headblend import io
from headblend.synth import synthetic_portrait


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--width", type=int, default=256)
    parser.add_argument("--height", type=int, default=256)
    parser.add_argument("--seeds", default="0,1", help="comma-separated portrait seeds")
    args = parser.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for seed in (int(s) for s in args.seeds.split(",") if s):
        image, labels = synthetic_portrait(args.width, args.height, seed=seed)
        io.save_rgb(image, args.out_dir / f"portrait_{seed:03d}.png")
        io.save_labels(labels, args.out_dir / f"portrait_{seed:03d}_labels.png")
        print(f"portrait_{seed:03d}.png + labels ({args.width}x{args.height})")


if __name__ == "__main__":
    main()
