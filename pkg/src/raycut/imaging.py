"""Grayscale raster primitives: image model, PGM/PNG I/O, subpixel sampling,
and polygon rasterization.

Coordinate convention used throughout the package: pixel centers sit at
integer coordinates (x, y), x along the width axis, y along the height axis.
A continuous point (x, y) is inside the raster iff 0 <= x <= width-1 and
0 <= y <= height-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np


class ImageFormatError(ValueError):
    """Raised for unreadable files or unsupported image formats/bit depths."""

    token = "image-format"


class OutOfBoundsError(ValueError):
    """Raised when a query point falls outside the image raster."""

    token = "out-of-bounds"


class InvalidPolygonError(ValueError):
    """Raised for polygons with < 3 vertices or repeated consecutive vertices."""

    token = "invalid-polygon"


class Point2D(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class GrayImage:
    """2-D grayscale raster, values in [0, 255], row-major (height, width).

    ``spacing_mm`` is the optional isotropic physical size of one pixel in
    millimeters; lengths are reported in pixels unless it is known.
    """

    pixels: np.ndarray
    spacing_mm: float | None = None

    def __post_init__(self):
        px = np.ascontiguousarray(np.asarray(self.pixels, dtype=np.float64))
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be a non-empty 2-D array")
        if not np.isfinite(px).all():
            raise ValueError("image intensities must be finite")
        if px.min() < 0.0 or px.max() > 255.0:
            raise ValueError("image intensities must lie in [0, 255]")
        if self.spacing_mm is not None and not (self.spacing_mm > 0):
            raise ValueError("spacing_mm must be positive")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def contains(self, p: Point2D) -> bool:
        return 0.0 <= p.x <= self.width - 1 and 0.0 <= p.y <= self.height - 1


@dataclass(frozen=True)
class Polygon:
    """Closed polygon: ordered (V, 2) vertex array, last vertex connects to
    the first implicitly."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidPolygonError("polygon needs at least 3 (x, y) vertices")
        if not np.isfinite(v).all():
            raise InvalidPolygonError("polygon vertices must be finite")
        nxt = np.roll(v, -1, axis=0)
        if np.any(np.all(v == nxt, axis=1)):
            raise InvalidPolygonError("consecutive polygon vertices must be distinct")
        object.__setattr__(self, "vertices", v)

    def points(self) -> list[Point2D]:
        return [Point2D(float(x), float(y)) for x, y in self.vertices]


@dataclass(frozen=True)
class BinaryMask:
    """Row-major boolean raster; True marks foreground."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.bits, dtype=bool))
        if b.ndim != 2 or b.shape[0] < 1 or b.shape[1] < 1:
            raise ValueError("mask must be a non-empty 2-D array")
        object.__setattr__(self, "bits", b)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


# ---------------------------------------------------------------------------
# File I/O: PGM P2/P5 (maxval 255), 8-bit grayscale PNG, and the `.meta`
# sidecar carrying `spacing_mm=<value>`.
# ---------------------------------------------------------------------------

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta")


def _read_sidecar(path: Path) -> float | None:
    meta = _sidecar_path(path)
    if not meta.is_file():
        return None
    for line in meta.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, _, value = line.partition("=")
        if key.strip() == "spacing_mm":
            try:
                spacing = float(value.strip())
            except ValueError as exc:
                raise ImageFormatError(f"{meta}: bad spacing_mm value {value!r}") from exc
            if not spacing > 0:
                raise ImageFormatError(f"{meta}: spacing_mm must be positive")
            return spacing
    return None


def _write_sidecar(path: Path, spacing_mm: float | None) -> None:
    if spacing_mm is not None:
        _sidecar_path(path).write_text(f"spacing_mm={spacing_mm!r}\n")


def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping # comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            yield i, data[i:j]
            i = j


def _read_pgm(path: Path, data: bytes) -> np.ndarray:
    tokens = _pgm_tokens(data)
    try:
        _, magic = next(tokens)
        fields = []
        for pos, tok in tokens:
            fields.append((pos, tok))
            if len(fields) == 3:
                break
        if len(fields) < 3:
            raise ValueError("truncated header")
        (_, w_tok), (_, h_tok), (max_pos, max_tok) = fields
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except (StopIteration, ValueError) as exc:
        raise ImageFormatError(f"{path}: malformed PGM header") from exc

    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: non-positive PGM dimensions")
    if maxval != 255:
        raise ImageFormatError(f"{path}: unsupported PGM maxval {maxval} (only 255)")

    if magic == b"P2":
        rest = data[max_pos + len(max_tok):]
        try:
            values = np.array(
                [int(tok) for _, tok in _pgm_tokens(rest)], dtype=np.int64
            )
        except ValueError as exc:
            raise ImageFormatError(f"{path}: non-numeric P2 sample") from exc
        if values.size != width * height:
            raise ImageFormatError(
                f"{path}: expected {width * height} samples, found {values.size}"
            )
    elif magic == b"P5":
        # Binary samples start one whitespace byte after maxval.
        start = max_pos + len(max_tok) + 1
        raw = data[start : start + width * height]
        if len(raw) != width * height:
            raise ImageFormatError(f"{path}: truncated P5 pixel data")
        values = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
    else:
        raise ImageFormatError(f"{path}: unsupported PGM magic {magic!r}")

    if values.min() < 0 or values.max() > 255:
        raise ImageFormatError(f"{path}: sample outside [0, 255]")
    return values.reshape(height, width).astype(np.float64)


def _read_png(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode != "L":
            raise ImageFormatError(
                f"{path}: unsupported PNG mode {im.mode!r} (8-bit grayscale only)"
            )
        return np.asarray(im, dtype=np.float64)


def load_image(path) -> GrayImage:
    """Load a PGM (P2/P5, maxval 255) or 8-bit grayscale PNG image.

    Physical pixel spacing is read from a `<name>.meta` sidecar when present.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"{path}: cannot read file ({exc})") from exc
    if data[:2] in (b"P2", b"P5"):
        pixels = _read_pgm(path, data)
    elif data[:8] == _PNG_MAGIC:
        pixels = _read_png(path)
    else:
        raise ImageFormatError(f"{path}: not a PGM P2/P5 or PNG file")
    return GrayImage(pixels, spacing_mm=_read_sidecar(path))


def save_image(img: GrayImage, path) -> None:
    """Write a binary PGM (P5, maxval 255); values are rounded to integers.
    Writes the spacing sidecar when the image carries physical spacing."""
    path = Path(path)
    quantized = np.clip(np.rint(img.pixels), 0, 255).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    path.write_bytes(header + quantized.tobytes())
    _write_sidecar(path, img.spacing_mm)


def save_mask(mask: BinaryMask, path) -> None:
    """Write a mask as binary PGM with values {0, 255}."""
    path = Path(path)
    data = np.where(mask.bits, 255, 0).astype(np.uint8)
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    path.write_bytes(header + data.tobytes())


def load_mask(path) -> BinaryMask:
    """Read a mask image; any value above 127 counts as foreground."""
    img = load_image(path)
    return BinaryMask(img.pixels > 127.0)


# ---------------------------------------------------------------------------
# Sampling and rasterization
# ---------------------------------------------------------------------------


def sample_bilinear(img: GrayImage, p: Point2D) -> float:
    """Bilinear interpolation of the four surrounding pixel centers.

    Exact at integer coordinates. Raises OutOfBoundsError outside the raster;
    callers clamp their geometry first.
    """
    if not (0.0 <= p.x <= img.width - 1 and 0.0 <= p.y <= img.height - 1):
        raise OutOfBoundsError(f"point {tuple(p)} outside image {img.width}x{img.height}")
    return float(
        sample_bilinear_many(img, np.array([p.x]), np.array([p.y]))[0]
    )


def sample_bilinear_many(img: GrayImage, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling; all points must be inside the raster."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if (
        xs.size
        and (
            xs.min() < 0.0
            or ys.min() < 0.0
            or xs.max() > img.width - 1
            or ys.max() > img.height - 1
        )
    ):
        raise OutOfBoundsError("sample point outside image bounds")
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    # Keep the 2x2 neighborhood valid on the far edges.
    x0 = np.minimum(x0, max(img.width - 2, 0))
    y0 = np.minimum(y0, max(img.height - 2, 0))
    x1 = np.minimum(x0 + 1, img.width - 1)
    y1 = np.minimum(y0 + 1, img.height - 1)
    fx = xs - x0
    fy = ys - y0
    px = img.pixels
    top = px[y0, x0] * (1.0 - fx) + px[y0, x1] * fx
    bottom = px[y1, x0] * (1.0 - fx) + px[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def rasterize_polygon(poly: Polygon, width: int, height: int) -> BinaryMask:
    """Even-odd rasterization with pixel centers at integer coordinates.

    Boundary ties follow the half-open convention: a center exactly on a
    left-facing edge is inside, on a right-facing edge outside, so abutting
    polygons tile without gaps or double coverage.
    """
    if width < 1 or height < 1:
        raise ValueError("mask dimensions must be positive")
    bits = np.zeros((height, width), dtype=bool)
    v = poly.vertices
    y_lo = max(0, int(math.ceil(v[:, 1].min())))
    y_hi = min(height - 1, int(math.floor(v[:, 1].max())))
    if y_hi < y_lo:
        return BinaryMask(bits)

    x0s = v[:, 0]
    y0s = v[:, 1]
    x1s = np.roll(x0s, -1)
    y1s = np.roll(y0s, -1)

    for y in range(y_lo, y_hi + 1):
        crossing = (y0s > y) != (y1s > y)
        if not crossing.any():
            continue
        xs0 = x0s[crossing]
        ys0 = y0s[crossing]
        xs1 = x1s[crossing]
        ys1 = y1s[crossing]
        x_int = np.sort(xs0 + (y - ys0) * (xs1 - xs0) / (ys1 - ys0))
        # Spans [x_int[2i], x_int[2i+1]) are interior; centers are integers.
        for lo, hi in zip(x_int[0::2], x_int[1::2]):
            start = max(0, int(math.ceil(lo)))
            stop = min(width, int(math.ceil(hi)))
            if stop > start:
                bits[y, start:stop] = True
    return BinaryMask(bits)


def mask_area(mask: BinaryMask) -> int:
    """Number of foreground pixels."""
    return int(np.count_nonzero(mask.bits))
