#!/usr/bin/env python3
"""Measure interactive segmentation latency on the default configuration
(512x512 image, 60 rays x 40 nodes), printing median and tail percentiles.

Usage:
    python scripts/bench_latency.py --runs 200
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from raycut.imaging import Point2D
from raycut.phantom import PhantomSpec, generate
from raycut.segmenter import SeedInput, SegmentationParams, segment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--sigma", type=float, default=0.12)
    args = parser.parse_args()

    spec = PhantomSpec(
        width=512,
        height=512,
        center=Point2D(256, 256),
        semi_axes=(40.0, 20.0),
        rotation=0.6,
        fg_mean=20.0,
        bg_mean=120.0,
        speckle_sigma=args.sigma,
        rng_seed=7,
    )
    img, _ = generate(spec)
    params = SegmentationParams()

    segment(img, SeedInput(Point2D(256, 256)), params)  # jit warmup
    times = []
    for k in range(args.runs):
        seed = Point2D(256 + (k % 9) - 4, 256 + (k % 7) - 3)
        t0 = time.perf_counter()
        segment(img, SeedInput(seed), params)
        times.append((time.perf_counter() - t0) * 1000)

    times = np.array(times)
    print(f"runs:   {args.runs}")
    print(f"median: {np.median(times):7.2f} ms")
    print(f"p90:    {np.percentile(times, 90):7.2f} ms")
    print(f"p99:    {np.percentile(times, 99):7.2f} ms")
    print(f"max:    {times.max():7.2f} ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
