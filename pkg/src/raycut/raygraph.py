"""Radial-ray template around a seed point, gray-deviation cost sampling, and
assembly of the two-terminal flow network whose minimum cut yields a
star-shaped boundary.

Graph layout for R rays with N nodes each: node (r, i) has id r*N + i, the
source is id R*N and the sink R*N + 1. Index i grows outward; node (r, i)
sits at distance (i + 1) * radial_step from the center, so the innermost
node is one step away from the seed, never on it.

Arcs:
  * intra-ray, infinite: (r, i) -> (r, i-1). Any finite cut therefore severs
    each ray at exactly one position, which is what keeps the result
    star-shaped around the seed.
  * inter-ray, infinite: (r, i) -> (r +- 1, max(i - delta_r, 0)). These bound
    the cut-position difference of neighboring rays by delta_r, the
    smoothness knob.
  * terminal: each sampled node gets one arc, to the source when its gray
    deviation is below the template's reference deviation (it looks like the
    seeded region) and to the sink when above (it looks like surroundings).
    The capacity is the margin between the node's deviation and the
    reference, so the cheapest cut crosses each ray where the profile
    transitions. Zero-capacity arcs are omitted; they change nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imaging import GrayImage, Point2D, sample_bilinear_many

INFINITE = math.inf
"""Capacity marker for uncuttable arcs; the solver treats it specially."""


class SeedTooCloseToBorderError(ValueError):
    """Template degenerates (radial step below half a pixel) after shrinking
    to stay inside the image."""

    token = "seed-too-close-to-border"


class SeedOutOfBoundsError(ValueError):
    """Seed point not strictly inside the image."""

    token = "seed-out-of-bounds"


@dataclass(frozen=True)
class RayTemplate:
    """Node positions on ``ray_count`` equidistant rays around ``center``.

    Rays are ordered clockwise in screen orientation (y axis pointing down),
    ray r at angle 2*pi*r/ray_count from the +x axis. ``radius`` is the
    effective template radius after any border shrink; ``radial_step`` is
    radius / nodes_per_ray.
    """

    center: Point2D
    ray_count: int
    nodes_per_ray: int
    radial_step: float
    node_x: np.ndarray  # (R, N)
    node_y: np.ndarray  # (R, N)

    @property
    def radius(self) -> float:
        return self.radial_step * self.nodes_per_ray

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.ray_count) / self.ray_count

    def node_position(self, ray: int, index: int) -> Point2D:
        return Point2D(float(self.node_x[ray, index]), float(self.node_y[ray, index]))


@dataclass(frozen=True)
class CostProfile:
    """Per-node gray deviation d[r, i] = |gray(r, i) - g0| for a template,
    where g0 is the mean gray value sampled around the seed."""

    d: np.ndarray  # (R, N), non-negative
    g0: float

    def __post_init__(self):
        d = np.ascontiguousarray(np.asarray(self.d, dtype=np.float64))
        if d.ndim != 2:
            raise ValueError("cost profile must be a 2-D (rays, nodes) array")
        if d.min() < 0.0 or d.max() > 255.0:
            raise ValueError("cost profile values must lie in [0, 255]")
        object.__setattr__(self, "d", d)

    @property
    def ray_count(self) -> int:
        return self.d.shape[0]

    @property
    def nodes_per_ray(self) -> int:
        return self.d.shape[1]


class FlowNetwork:
    """Capacitated directed graph with designated source and sink.

    Arc capacities are non-negative reals or INFINITE. Terminal orientation
    is enforced: no arc may enter the source or leave the sink.
    """

    def __init__(self, node_count: int, source: int, sink: int):
        if node_count < 2:
            raise ValueError("network needs at least source and sink")
        if not (0 <= source < node_count and 0 <= sink < node_count) or source == sink:
            raise ValueError("bad terminal indices")
        self.node_count = node_count
        self.source = source
        self.sink = sink
        self._tails: list[np.ndarray] = []
        self._heads: list[np.ndarray] = []
        self._caps: list[np.ndarray] = []
        self._frozen: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def add_arc(self, tail: int, head: int, capacity: float) -> None:
        self.add_arcs(
            np.array([tail], dtype=np.int64),
            np.array([head], dtype=np.int64),
            np.array([capacity], dtype=np.float64),
        )

    def add_arcs(self, tails, heads, capacities) -> None:
        tails = np.asarray(tails, dtype=np.int64)
        heads = np.asarray(heads, dtype=np.int64)
        caps = np.asarray(capacities, dtype=np.float64)
        if not (tails.shape == heads.shape == caps.shape) or tails.ndim != 1:
            raise ValueError("tails, heads, capacities must be equal-length 1-D")
        if tails.size == 0:
            return
        if tails.min() < 0 or heads.min() < 0 or max(tails.max(), heads.max()) >= self.node_count:
            raise ValueError("arc endpoint out of range")
        if np.any(heads == self.source):
            raise ValueError("arcs may not enter the source")
        if np.any(tails == self.sink):
            raise ValueError("arcs may not leave the sink")
        if np.any(np.isnan(caps)) or np.any(caps < 0):
            raise ValueError("capacities must be >= 0 (or INFINITE)")
        self._tails.append(tails)
        self._heads.append(heads)
        self._caps.append(caps)
        self._frozen = None

    def arcs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(tails, heads, capacities) in insertion order."""
        if self._frozen is None:
            if self._tails:
                self._frozen = (
                    np.concatenate(self._tails),
                    np.concatenate(self._heads),
                    np.concatenate(self._caps),
                )
            else:
                empty_i = np.zeros(0, dtype=np.int64)
                self._frozen = (empty_i, empty_i.copy(), np.zeros(0, dtype=np.float64))
        return self._frozen

    @property
    def arc_count(self) -> int:
        return self.arcs()[0].size

    def copy(self) -> "FlowNetwork":
        dup = FlowNetwork(self.node_count, self.source, self.sink)
        tails, heads, caps = self.arcs()
        if tails.size:
            dup.add_arcs(tails.copy(), heads.copy(), caps.copy())
        return dup


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def build_template(
    center: Point2D,
    img: GrayImage,
    ray_count: int,
    nodes_per_ray: int,
    max_radius: float,
) -> RayTemplate:
    """Lay out ``ray_count`` x ``nodes_per_ray`` sample nodes around the seed.

    If any ray would leave the raster, the radius shrinks uniformly for all
    rays so the template stays inside and isotropic. A template whose radial
    step would fall below half a pixel raises SeedTooCloseToBorderError.
    """
    if ray_count < 3:
        raise ValueError("ray_count must be >= 3")
    if nodes_per_ray < 2:
        raise ValueError("nodes_per_ray must be >= 2")
    if not max_radius > 0:
        raise ValueError("max_radius must be positive")
    if not (0.0 < center.x < img.width - 1 and 0.0 < center.y < img.height - 1):
        raise SeedOutOfBoundsError(
            f"seed {tuple(center)} not strictly inside image {img.width}x{img.height}"
        )

    angles = 2.0 * np.pi * np.arange(ray_count) / ray_count
    dx = np.cos(angles)
    dy = np.sin(angles)

    # Largest t with center + t*dir inside [0, w-1] x [0, h-1], per ray.
    limit = np.full(ray_count, np.inf)
    for d, lo, hi, c in (
        (dx, 0.0, img.width - 1.0, center.x),
        (dy, 0.0, img.height - 1.0, center.y),
    ):
        pos = d > 0
        neg = d < 0
        limit[pos] = np.minimum(limit[pos], (hi - c) / d[pos])
        limit[neg] = np.minimum(limit[neg], (lo - c) / d[neg])

    radius = min(float(max_radius), float(limit.min()))
    step = radius / nodes_per_ray
    if step < 0.5:
        raise SeedTooCloseToBorderError(
            f"seed {tuple(center)} leaves room for a radial step of only {step:.3f} px"
        )

    dist = (np.arange(nodes_per_ray) + 1.0) * step
    node_x = center.x + dist[np.newaxis, :] * dx[:, np.newaxis]
    node_y = center.y + dist[np.newaxis, :] * dy[:, np.newaxis]
    # Guard against float round-off putting border nodes epsilon outside.
    np.clip(node_x, 0.0, img.width - 1.0, out=node_x)
    np.clip(node_y, 0.0, img.height - 1.0, out=node_y)
    return RayTemplate(center, ray_count, nodes_per_ray, step, node_x, node_y)


def sample_mean_gray(img: GrayImage, seed: Point2D, rho: float) -> float:
    """Mean gray value of all pixels whose centers lie within ``rho`` of the
    seed; falls back to the single nearest pixel when the disk is empty."""
    if not img.contains(seed):
        raise SeedOutOfBoundsError(f"seed {tuple(seed)} outside image")
    if not rho > 0:
        raise ValueError("rho must be positive")
    x_lo = max(0, int(math.ceil(seed.x - rho)))
    x_hi = min(img.width - 1, int(math.floor(seed.x + rho)))
    y_lo = max(0, int(math.ceil(seed.y - rho)))
    y_hi = min(img.height - 1, int(math.floor(seed.y + rho)))
    if x_hi >= x_lo and y_hi >= y_lo:
        xs = np.arange(x_lo, x_hi + 1)
        ys = np.arange(y_lo, y_hi + 1)
        gx, gy = np.meshgrid(xs, ys)
        inside = (gx - seed.x) ** 2 + (gy - seed.y) ** 2 <= rho * rho
        if inside.any():
            return float(img.pixels[y_lo : y_hi + 1, x_lo : x_hi + 1][inside].mean())
    nearest_x = min(max(int(round(seed.x)), 0), img.width - 1)
    nearest_y = min(max(int(round(seed.y)), 0), img.height - 1)
    return float(img.pixels[nearest_y, nearest_x])


def compute_cost_profile(img: GrayImage, tpl: RayTemplate, g0: float) -> CostProfile:
    """d[r, i] = |bilinear gray at node (r, i) - g0|."""
    gray = sample_bilinear_many(img, tpl.node_x.ravel(), tpl.node_y.ravel())
    d = np.abs(gray - g0).reshape(tpl.ray_count, tpl.nodes_per_ray)
    return CostProfile(d=d, g0=float(g0))


def reference_deviation(profile: CostProfile) -> float:
    """Reference separating seed-like from background-like deviations: the
    mean deviation over the whole template. Scales linearly with positive
    affine intensity remaps, which keeps cut positions contrast-invariant."""
    return float(profile.d.mean())


def build_graph(profile: CostProfile, delta_r: int) -> FlowNetwork:
    """Assemble the flow network for a sampled cost profile.

    See the module docstring for the arc inventory. ``delta_r`` bounds the
    node-index difference between the cut positions of adjacent rays.
    """
    if delta_r < 0:
        raise ValueError("delta_r must be >= 0")
    rays = profile.ray_count
    nodes = profile.nodes_per_ray
    if rays < 3 or nodes < 2:
        raise ValueError("profile must cover >= 3 rays and >= 2 nodes per ray")

    total = rays * nodes
    source = total
    sink = total + 1
    net = FlowNetwork(total + 2, source, sink)

    ids = np.arange(total, dtype=np.int64).reshape(rays, nodes)

    # (a) intra-ray: (r, i) -> (r, i-1), infinite.
    intra_tails = ids[:, 1:].ravel()
    intra_heads = ids[:, :-1].ravel()
    net.add_arcs(intra_tails, intra_heads, np.full(intra_tails.size, INFINITE))

    # (b) inter-ray: (r, i) -> (r +- 1 mod R, max(i - delta_r, 0)), infinite.
    target_idx = np.maximum(np.arange(nodes, dtype=np.int64) - delta_r, 0)
    for shift in (1, -1):
        neighbor = np.roll(np.arange(rays, dtype=np.int64), -shift)
        tails = ids.ravel()
        heads = ids[neighbor][:, target_idx].ravel()
        net.add_arcs(tails, heads, np.full(tails.size, INFINITE))

    # (c) terminal: margin vs the reference deviation decides the side.
    ref = reference_deviation(profile)
    margin = profile.d.ravel() - ref
    to_source = margin < 0
    src_caps = -margin[to_source]
    src_heads = ids.ravel()[to_source]
    keep = src_caps > 0
    net.add_arcs(
        np.full(int(keep.sum()), source, dtype=np.int64),
        src_heads[keep],
        src_caps[keep],
    )
    to_sink = ~to_source
    sink_caps = margin[to_sink]
    sink_tails = ids.ravel()[to_sink]
    keep = sink_caps > 0
    net.add_arcs(
        sink_tails[keep],
        np.full(int(keep.sum()), sink, dtype=np.int64),
        sink_caps[keep],
    )
    return net


def terminal_mass_balance(profile: CostProfile) -> np.ndarray:
    """Per-ray identity the construction must satisfy: sum of sink-side
    capacities minus sum of source-side capacities equals the ray's total
    deviation above the reference. Used as an internal consistency check."""
    ref = reference_deviation(profile)
    return (profile.d - ref).sum(axis=1)
