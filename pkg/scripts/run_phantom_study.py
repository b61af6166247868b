#!/usr/bin/env python3
"""End-to-end phantom study: generate a suite of synthetic lesions, segment
each from its center seed, write an evaluation manifest comparing the
segmentations against ground truth, and produce the summary report.

The "manual" side of each comparison is the exact phantom truth mask and the
recorded times are synthetic draws, so the resulting tables exercise the
full reporting pipeline on data with known answers.

Usage:
    python scripts/run_phantom_study.py --out study_out --count 105 --rng-seed 1
"""

import argparse
import csv
import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from raycut.evaluation import dice
from raycut.imaging import save_mask
from raycut.phantom import generate_suite, write_phantom
from raycut.reporting import evaluate_manifest, render_report_text
from raycut.segmenter import SeedInput, SegmentationParams, segment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--count", type=int, default=105)
    parser.add_argument("--rng-seed", type=int, default=1)
    parser.add_argument("--rays", type=int, default=60)
    parser.add_argument("--nodes-per-ray", type=int, default=40)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = SegmentationParams(
        ray_count=args.rays, nodes_per_ray=args.nodes_per_ray, max_radius=140
    )

    suite = generate_suite(args.count, args.rng_seed)
    rng = np.random.default_rng(args.rng_seed + 1)
    rows = []
    scores = []
    t0 = time.perf_counter()
    for k, (spec, img, truth) in enumerate(suite):
        stem = out / f"phantom_{k:03d}"
        paths = write_phantom(spec, img, truth, stem)
        result = segment(img, SeedInput(spec.center), params)
        semi_path = out / f"phantom_{k:03d}_semi.pgm"
        save_mask(result.mask, semi_path)
        scores.append(dice(result.mask, truth))
        rows.append(
            [
                stem.name,
                paths["truth"].name,
                semi_path.name,
                f"{rng.lognormal(math.log(15), 0.3):.2f}",
                f"{rng.lognormal(math.log(8), 0.35):.2f}",
                1 if scores[-1] >= 0.7 else 0,
                "0.5",
            ]
        )
    seg_elapsed = time.perf_counter() - t0

    manifest = out / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["lesion_id", "manual_mask", "semi_mask", "time_manual_s",
             "time_semi_s", "satisfied", "spacing_mm"]
        )
        writer.writerows(rows)

    report = evaluate_manifest(manifest, out / "report", bootstrap_seed=args.rng_seed)
    print(render_report_text(report))
    print(f"segmented {args.count} phantoms in {seg_elapsed:.2f}s "
          f"(mean overlap vs truth {np.mean(scores):.3f}, "
          f"min {np.min(scores):.3f})")
    print(f"report written to {out / 'report'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
