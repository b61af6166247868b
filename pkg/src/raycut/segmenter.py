"""Seed-to-contour orchestration: template, costs, graph, optional helper
constraints, min-cut, contour extraction, mask, and diameter measurement."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .imaging import (
    BinaryMask,
    GrayImage,
    Point2D,
    Polygon,
    rasterize_polygon,
)
from .maxflow import CutResult, max_flow_min_cut
from .raygraph import (
    INFINITE,
    FlowNetwork,
    RayTemplate,
    SeedOutOfBoundsError,
    build_graph,
    build_template,
    compute_cost_profile,
    sample_mean_gray,
)


class HelperOutOfRangeError(ValueError):
    """Helper seed farther from the seed than the template radius."""

    token = "helper-out-of-range"


class HelperConflictWarning(UserWarning):
    """Two helpers forced different cut positions on the same ray; the newer
    one wins."""


@dataclass(frozen=True)
class SegmentationParams:
    """Tunable geometry and smoothness knobs, all overridable from the CLI."""

    ray_count: int = 60
    nodes_per_ray: int = 40
    max_radius: float = 150.0
    seed_mean_radius: float = 3.0
    smoothness: int = 2


@dataclass(frozen=True)
class SeedInput:
    """One seed inside the lesion plus any border helper seeds, in placement
    order (order matters when helpers conflict)."""

    seed: Point2D
    helpers: tuple[Point2D, ...] = ()


@dataclass(frozen=True)
class SegmentationResult:
    """Cut positions, contour polygon, rasterized mask, and diameters.

    ``cut_index[r]`` is the outermost node of ray r on the source side of the
    minimum cut; -1 marks a ray whose cut collapsed inside its innermost
    node. ``diameter_a`` is the largest vertex-to-vertex distance of the
    contour, ``diameter_b`` the widest extent perpendicular to it. Millimeter
    variants are present only when the image carried physical spacing.
    """

    cut_index: np.ndarray
    contour: Polygon
    mask: BinaryMask
    diameter_a: float
    diameter_b: float
    endpoints_a: tuple[Point2D, Point2D]
    endpoints_b: tuple[Point2D, Point2D]
    elapsed: float
    diameter_a_mm: float | None = None
    diameter_b_mm: float | None = None


def _helper_assignments(tpl: RayTemplate, helpers) -> dict[int, int]:
    """Map each helper to (nearest ray by angle, nearest node by radius).

    Angle ties go to the lower ray index; radial rounding is half-up, toward
    the outer node. On a same-ray conflict the most recently placed helper
    wins and a HelperConflictWarning is issued.
    """
    assignment: dict[int, int] = {}
    sector = 2.0 * math.pi / tpl.ray_count
    for helper in helpers:
        dx = helper.x - tpl.center.x
        dy = helper.y - tpl.center.y
        dist = math.hypot(dx, dy)
        if dist > tpl.radius + 1e-9:
            raise HelperOutOfRangeError(
                f"helper {tuple(helper)} lies {dist:.2f} px from the seed, "
                f"beyond the template radius {tpl.radius:.2f}"
            )
        theta = math.atan2(dy, dx) % (2.0 * math.pi)
        offsets = np.abs(tpl.angles - theta)
        offsets = np.minimum(offsets, 2.0 * math.pi - offsets)
        ray = int(np.argmin(offsets))  # argmin takes the lowest index on ties
        index = int(math.floor(dist / tpl.radial_step - 1.0 + 0.5))
        index = min(max(index, 0), tpl.nodes_per_ray - 2)
        if ray in assignment and assignment[ray] != index:
            warnings.warn(
                f"helpers disagree on ray {ray} (node {assignment[ray]} vs "
                f"{index}); keeping the most recent",
                HelperConflictWarning,
                stacklevel=3,
            )
        assignment[ray] = index
    return assignment


def apply_helper_constraints(net: FlowNetwork, tpl: RayTemplate, helpers) -> FlowNetwork:
    """Return a copy of ``net`` with each helper pinning its ray's cut.

    A helper mapped to node (r, i) adds infinite arcs source -> (r, i) and
    (r, i + 1) -> sink, forcing the cut on ray r between i and i + 1.
    """
    if not helpers:
        return net
    nodes = tpl.nodes_per_ray
    pinned = net.copy()
    for ray, index in _helper_assignments(tpl, helpers).items():
        node = ray * nodes + index
        pinned.add_arc(pinned.source, node, INFINITE)
        pinned.add_arc(node + 1, pinned.sink, INFINITE)
    return pinned


def cut_indices(cut: CutResult, ray_count: int, nodes_per_ray: int) -> np.ndarray:
    """Outermost source-side node per ray (-1 if none).

    Also verifies the labeling is a per-ray prefix, which the infinite
    intra-ray arcs guarantee for any finite cut.
    """
    labels = cut.in_source_set[: ray_count * nodes_per_ray].reshape(
        ray_count, nodes_per_ray
    )
    if not np.all(labels[:, :-1] >= labels[:, 1:]):
        raise AssertionError("source side is not a prefix on every ray")
    return labels.sum(axis=1).astype(np.int64) - 1


def extract_contour(cut_index: np.ndarray, tpl: RayTemplate) -> Polygon:
    """One vertex per ray at the radial midpoint between the last source-side
    node and the first sink-side node, clamped to the template radius when a
    ray is severed beyond its outermost node."""
    cut_index = np.asarray(cut_index, dtype=np.int64)
    if cut_index.shape != (tpl.ray_count,):
        raise ValueError("need one cut index per ray")
    if cut_index.min() < -1 or cut_index.max() > tpl.nodes_per_ray - 1:
        raise ValueError("cut index out of range")
    dist = np.minimum((cut_index + 1.5) * tpl.radial_step, tpl.radius)
    xs = tpl.center.x + dist * np.cos(tpl.angles)
    ys = tpl.center.y + dist * np.sin(tpl.angles)
    return Polygon(np.column_stack([xs, ys]))


def diameters_of_points(points: np.ndarray):
    """Largest pairwise distance and the widest extent perpendicular to it.

    Returns (diameter_a, endpoints_a, diameter_b, endpoints_b). endpoints_b
    span the perpendicular extent as a chord at exactly 90 degrees to
    endpoints_a, anchored between the touching points.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two 2-D points")
    diff = pts[:, np.newaxis, :] - pts[np.newaxis, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    flat = int(np.argmax(sq))
    i, j = divmod(flat, pts.shape[0])
    a = float(math.sqrt(sq[i, j]))
    p1 = Point2D(float(pts[i, 0]), float(pts[i, 1]))
    p2 = Point2D(float(pts[j, 0]), float(pts[j, 1]))

    if a == 0.0:
        return 0.0, (p1, p2), 0.0, (p1, p2)

    u = np.array([p2.x - p1.x, p2.y - p1.y]) / a
    v = np.array([-u[1], u[0]])
    t = pts @ v
    k_min = int(np.argmin(t))
    k_max = int(np.argmax(t))
    b = float(t[k_max] - t[k_min])
    anchor = (float(pts[k_min] @ u) + float(pts[k_max] @ u)) / 2.0
    e1 = anchor * u + t[k_min] * v
    e2 = anchor * u + t[k_max] * v
    return a, (p1, p2), b, (Point2D(*map(float, e1)), Point2D(*map(float, e2)))


def compute_diameters(poly: Polygon):
    """Diameters of a polygon's vertex set; see diameters_of_points."""
    return diameters_of_points(poly.vertices)


def segment(
    img: GrayImage,
    seed_input: SeedInput,
    params: SegmentationParams = SegmentationParams(),
) -> SegmentationResult:
    """Full pipeline from a seed (plus helpers) to contour, mask, diameters.

    Pure and deterministic apart from the ``elapsed`` timing, which covers
    the compute only (no I/O happens here).
    """
    for helper in seed_input.helpers:
        if not img.contains(helper):
            raise HelperOutOfRangeError(f"helper {tuple(helper)} outside image")

    t0 = time.perf_counter()
    tpl = build_template(
        seed_input.seed, img, params.ray_count, params.nodes_per_ray, params.max_radius
    )
    g0 = sample_mean_gray(img, seed_input.seed, params.seed_mean_radius)
    profile = compute_cost_profile(img, tpl, g0)
    net = build_graph(profile, params.smoothness)
    net = apply_helper_constraints(net, tpl, seed_input.helpers)
    cut = max_flow_min_cut(net)
    index = cut_indices(cut, tpl.ray_count, tpl.nodes_per_ray)
    contour = extract_contour(index, tpl)
    mask = rasterize_polygon(contour, img.width, img.height)
    diameter_a, endpoints_a, diameter_b, endpoints_b = compute_diameters(contour)
    elapsed = time.perf_counter() - t0

    mm = img.spacing_mm
    return SegmentationResult(
        cut_index=index,
        contour=contour,
        mask=mask,
        diameter_a=diameter_a,
        diameter_b=diameter_b,
        endpoints_a=endpoints_a,
        endpoints_b=endpoints_b,
        elapsed=elapsed,
        diameter_a_mm=diameter_a * mm if mm else None,
        diameter_b_mm=diameter_b * mm if mm else None,
    )
