"""Synthetic lesion phantoms with exact ground truth.

Each phantom is an elliptical dark (or bright) lesion on a contrasting
background, optionally wrapped in an intermediate-intensity rim, with
multiplicative Gaussian speckle. The ground-truth mask is exact ellipse
membership of pixel centers, star-convex about the lesion center by
construction, so segmentation accuracy targets are well-posed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .imaging import BinaryMask, GrayImage, Point2D, save_image, save_mask

ASSUMED_SPACING_MM = 0.5
"""Pixel pitch assumed when emitting millimeter metadata for phantoms."""


@dataclass(frozen=True)
class PhantomSpec:
    width: int
    height: int
    center: Point2D
    semi_axes: tuple[float, float]
    rotation: float = 0.0
    fg_mean: float = 20.0
    bg_mean: float = 120.0
    halo_width: float = 0.0
    halo_mean: float = 70.0
    speckle_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        a, b = self.semi_axes
        if not (a > 0 and b > 0):
            raise ValueError("semi-axes must be positive")
        for name in ("fg_mean", "bg_mean", "halo_mean"):
            v = getattr(self, name)
            if not (0.0 <= v <= 255.0):
                raise ValueError(f"{name} must lie in [0, 255]")
        if self.halo_width < 0 or self.speckle_sigma < 0:
            raise ValueError("halo_width and speckle_sigma must be >= 0")
        if self.fg_mean == self.bg_mean:
            raise ValueError("fg_mean and bg_mean must differ")
        ex, ey = self._extent(self.halo_width)
        if (
            self.center.x - ex < 0
            or self.center.x + ex > self.width - 1
            or self.center.y - ey < 0
            or self.center.y + ey > self.height - 1
        ):
            raise ValueError("lesion (including halo) must fit inside the image")

    def _extent(self, margin: float) -> tuple[float, float]:
        a = self.semi_axes[0] + margin
        b = self.semi_axes[1] + margin
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        return (
            math.sqrt((a * c) ** 2 + (b * s) ** 2),
            math.sqrt((a * s) ** 2 + (b * c) ** 2),
        )

    @property
    def max_diameter(self) -> float:
        return 2.0 * max(self.semi_axes)


def _ellipse_membership(spec: PhantomSpec, margin: float) -> np.ndarray:
    """Pixel centers inside the ellipse grown by ``margin`` on both axes."""
    ys, xs = np.mgrid[0 : spec.height, 0 : spec.width]
    dx = xs - spec.center.x
    dy = ys - spec.center.y
    c, s = math.cos(spec.rotation), math.sin(spec.rotation)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    a = spec.semi_axes[0] + margin
    b = spec.semi_axes[1] + margin
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def generate(spec: PhantomSpec, include_halo_in_truth: bool = False):
    """Render the phantom image and its ground-truth mask.

    Pixel value = region mean * (1 + speckle_sigma * z), z standard normal
    from the seeded generator, clamped to [0, 255]. The rim is excluded from
    the truth mask unless ``include_halo_in_truth`` (which reproduces a
    reader who counts the rim as lesion).
    """
    lesion = _ellipse_membership(spec, 0.0)
    means = np.full((spec.height, spec.width), spec.bg_mean, dtype=np.float64)
    if spec.halo_width > 0:
        means[_ellipse_membership(spec, spec.halo_width)] = spec.halo_mean
    means[lesion] = spec.fg_mean

    if spec.speckle_sigma > 0:
        rng = np.random.default_rng(spec.rng_seed)
        z = rng.standard_normal(means.shape)
        pixels = means * (1.0 + spec.speckle_sigma * z)
    else:
        pixels = means
    np.clip(pixels, 0.0, 255.0, out=pixels)

    truth = _ellipse_membership(spec, spec.halo_width) if include_halo_in_truth else lesion
    return GrayImage(pixels, spacing_mm=None), BinaryMask(truth)


def generate_suite(count: int, rng_seed: int):
    """Randomized phantom collection with lesion diameters spanning 12-230 px
    (a 6-115 mm clinical size range at an assumed 0.5 mm/px), varied contrast
    and rim presence. Deterministic under ``rng_seed``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    suite = []
    for k in range(count):
        # Log-uniform over the full diameter span so both ends are populated.
        diameter = float(np.exp(rng.uniform(math.log(12.0), math.log(230.0))))
        a = diameter / 2.0
        b = a * rng.uniform(0.55, 0.95)
        rotation = float(rng.uniform(0.0, math.pi))
        halo_width = float(rng.uniform(2.0, 6.0)) if rng.uniform() < 0.4 else 0.0
        fg = float(rng.uniform(10.0, 55.0))
        bg = float(rng.uniform(95.0, 180.0))
        halo = float(rng.uniform(fg + 20.0, bg - 15.0))
        sigma = float(rng.uniform(0.05, 0.2))

        margin = a + halo_width + 12.0
        side = int(min(512, max(160, math.ceil(2 * margin + 24))))
        cx = side / 2.0 + float(rng.uniform(-6.0, 6.0))
        cy = side / 2.0 + float(rng.uniform(-6.0, 6.0))

        spec = PhantomSpec(
            width=side,
            height=side,
            center=Point2D(cx, cy),
            semi_axes=(a, b),
            rotation=rotation,
            fg_mean=fg,
            bg_mean=bg,
            halo_width=halo_width,
            halo_mean=halo,
            speckle_sigma=sigma,
            rng_seed=int(rng.integers(0, 2**31 - 1)),
        )
        img, truth = generate(spec)
        suite.append((spec, img, truth))
    return suite


def write_phantom(spec: PhantomSpec, img: GrayImage, truth: BinaryMask, stem: Path) -> dict:
    """Write image + truth mask as PGM with a key=value spec sidecar.

    Returns the written paths. Millimeter fields downstream rely on the
    labeled 0.5 mm/px assumption recorded in the sidecar.
    """
    stem = Path(stem)
    image_path = stem.with_suffix(".pgm")
    mask_path = stem.with_name(stem.name + "_truth.pgm")
    save_image(GrayImage(img.pixels, spacing_mm=ASSUMED_SPACING_MM), image_path)
    save_mask(truth, mask_path)
    spec_path = stem.with_suffix(".spec")
    lines = [
        f"width={spec.width}",
        f"height={spec.height}",
        f"center_x={spec.center.x!r}",
        f"center_y={spec.center.y!r}",
        f"semi_axis_a={spec.semi_axes[0]!r}",
        f"semi_axis_b={spec.semi_axes[1]!r}",
        f"rotation={spec.rotation!r}",
        f"fg_mean={spec.fg_mean!r}",
        f"bg_mean={spec.bg_mean!r}",
        f"halo_width={spec.halo_width!r}",
        f"halo_mean={spec.halo_mean!r}",
        f"speckle_sigma={spec.speckle_sigma!r}",
        f"rng_seed={spec.rng_seed}",
        f"assumed_spacing_mm={ASSUMED_SPACING_MM!r}",
    ]
    spec_path.write_text("\n".join(lines) + "\n")
    return {"image": image_path, "truth": mask_path, "spec": spec_path}


def noise_free(spec: PhantomSpec) -> PhantomSpec:
    return replace(spec, speckle_sigma=0.0)
