"""Command-line entry points: one-shot segmentation, batch evaluation,
phantom generation, and the interactive session server.

Exit codes: 0 success, 2 input error, 3 computational error, 4 transport
error. Failures print one machine-parsable line to stderr:
``error: <reason-token>: <detail>``.
"""

from __future__ import annotations

import argparse
import csv
import socket
import sys
from pathlib import Path

from .imaging import GrayImage, Point2D, load_image, mask_area, save_mask
from .maxflow import SolverLimitError, UnboundedFlowError
from .phantom import generate_suite, write_phantom
from .reporting import evaluate_manifest
from .segmenter import SeedInput, SegmentationParams, segment
from .session import SessionServer, TransportClosed

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3
EXIT_TRANSPORT = 4


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rays", type=int, default=60, help="number of radial rays")
    parser.add_argument("--nodes-per-ray", type=int, default=40)
    parser.add_argument("--max-radius", type=float, default=150.0, help="template radius (px)")
    parser.add_argument(
        "--seed-mean-radius", type=float, default=3.0,
        help="radius of the disk averaged for the seed gray value (px)",
    )
    parser.add_argument(
        "--smoothness", type=int, default=2,
        help="max cut-position difference between adjacent rays",
    )


def _params_from(args) -> SegmentationParams:
    return SegmentationParams(
        ray_count=args.rays,
        nodes_per_ray=args.nodes_per_ray,
        max_radius=args.max_radius,
        seed_mean_radius=args.seed_mean_radius,
        smoothness=args.smoothness,
    )


def _cmd_segment(args) -> int:
    img = load_image(args.image)
    if args.spacing_mm is not None:
        img = GrayImage(img.pixels, spacing_mm=args.spacing_mm)
    helpers = tuple(Point2D(x, y) for x, y in (args.helper or []))
    seed = Point2D(args.seed[0], args.seed[1])
    if not img.contains(seed):
        # Normalize to the documented reason token before the pipeline runs.
        print(
            f"error: seed-out-of-bounds: seed {tuple(seed)} outside "
            f"{img.width}x{img.height} image",
            file=sys.stderr,
        )
        return EXIT_INPUT

    result = segment(img, SeedInput(seed, helpers), _params_from(args))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "contour.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        writer.writerows(
            [repr(float(x)), repr(float(y))] for x, y in result.contour.vertices
        )
    save_mask(result.mask, out / "mask.pgm")

    lines = [
        f"image={args.image}",
        f"seed_x={seed.x!r}",
        f"seed_y={seed.y!r}",
        f"helpers={len(helpers)}",
    ]
    lines += [f"helper_{i}={h.x!r},{h.y!r}" for i, h in enumerate(helpers)]
    lines += [
        f"rays={args.rays}",
        f"nodes_per_ray={args.nodes_per_ray}",
        f"max_radius={args.max_radius!r}",
        f"seed_mean_radius={args.seed_mean_radius!r}",
        f"smoothness={args.smoothness}",
        f"diameter_a_px={result.diameter_a!r}",
        f"diameter_b_px={result.diameter_b!r}",
        f"endpoints_a={result.endpoints_a[0].x!r},{result.endpoints_a[0].y!r};"
        f"{result.endpoints_a[1].x!r},{result.endpoints_a[1].y!r}",
        f"endpoints_b={result.endpoints_b[0].x!r},{result.endpoints_b[0].y!r};"
        f"{result.endpoints_b[1].x!r},{result.endpoints_b[1].y!r}",
        f"mask_area_px={mask_area(result.mask)}",
    ]
    if result.diameter_a_mm is not None:
        lines += [
            f"diameter_a_mm={result.diameter_a_mm!r}",
            f"diameter_b_mm={result.diameter_b_mm!r}",
        ]
    # elapsed stays last so determinism checks can diff everything above it
    lines.append(f"elapsed_ms={result.elapsed * 1000.0!r}")
    (out / "result.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    evaluate_manifest(args.manifest, args.out, bootstrap_seed=args.bootstrap_seed)
    return EXIT_OK


def _cmd_phantom(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suite = generate_suite(args.count, args.rng_seed)
    index_path = out / "suite.csv"
    with index_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["lesion_id", "image", "truth_mask", "max_diameter_px", "speckle_sigma", "halo_width"]
        )
        for k, (spec, img, truth) in enumerate(suite):
            stem = out / f"phantom_{k:03d}"
            paths = write_phantom(spec, img, truth, stem)
            writer.writerow(
                [
                    stem.name,
                    paths["image"].name,
                    paths["truth"].name,
                    repr(spec.max_diameter),
                    repr(spec.speckle_sigma),
                    repr(spec.halo_width),
                ]
            )
    print(f"wrote {len(suite)} phantoms to {out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    server = SessionServer(_params_from(args), log_path=args.log)
    if args.transport == "stdio":
        server.serve(sys.stdin, sys.stdout)
        return EXIT_OK
    with socket.create_server((args.host, args.port)) as listener:
        host, port = listener.getsockname()
        print(f"listening {host} {port}", flush=True)
        conn, _ = listener.accept()
        with conn:
            reader = conn.makefile("r", encoding="utf-8", newline="\n")
            writer = conn.makefile("w", encoding="utf-8", newline="\n")
            try:
                server.serve(reader, writer)
            finally:
                # all makefiles must close for the peer to see EOF
                writer.close()
                reader.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raycut")
    sub = parser.add_subparsers(dest="command", required=True)

    p_seg = sub.add_parser("segment", help="segment one image from a seed point")
    p_seg.add_argument("--image", required=True)
    p_seg.add_argument("--seed", nargs=2, type=float, required=True, metavar=("X", "Y"))
    p_seg.add_argument(
        "--helper", nargs=2, type=float, action="append", metavar=("X", "Y"),
        help="border helper seed; repeatable",
    )
    p_seg.add_argument("--out", required=True)
    p_seg.add_argument("--spacing-mm", type=float, default=None)
    _add_param_flags(p_seg)
    p_seg.set_defaults(func=_cmd_segment)

    p_eval = sub.add_parser("evaluate", help="batch-evaluate a manifest of mask pairs")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--bootstrap-seed", type=int, default=0)
    p_eval.set_defaults(func=_cmd_evaluate)

    p_ph = sub.add_parser("phantom", help="generate a synthetic phantom suite")
    p_ph.add_argument("--count", type=int, default=105)
    p_ph.add_argument("--rng-seed", type=int, default=0)
    p_ph.add_argument("--out", required=True)
    p_ph.set_defaults(func=_cmd_phantom)

    p_srv = sub.add_parser("serve", help="run the interactive session server")
    p_srv.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=0)
    p_srv.add_argument("--log", default=None, help="append finalized session logs here")
    _add_param_flags(p_srv)
    p_srv.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UnboundedFlowError, SolverLimitError) as exc:
        print(f"error: {exc.token}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (TransportClosed, BrokenPipeError, ConnectionError) as exc:
        print(f"error: transport: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (ValueError, OSError) as exc:
        token = getattr(exc, "token", "invalid-input")
        print(f"error: {token}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
