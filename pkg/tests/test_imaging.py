import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raycut.imaging import (
    BinaryMask,
    GrayImage,
    ImageFormatError,
    InvalidPolygonError,
    OutOfBoundsError,
    Point2D,
    Polygon,
    load_image,
    load_mask,
    mask_area,
    rasterize_polygon,
    sample_bilinear,
    save_image,
    save_mask,
)

# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------


def bilinear_oracle(px: np.ndarray, x: float, y: float) -> float:
    """Plain four-neighbor weighted sum, written from the definition."""
    h, w = px.shape
    x0 = min(int(math.floor(x)), w - 2)
    y0 = min(int(math.floor(y)), h - 2)
    fx = x - x0
    fy = y - y0
    return (
        px[y0, x0] * (1 - fx) * (1 - fy)
        + px[y0, x0 + 1] * fx * (1 - fy)
        + px[y0 + 1, x0] * (1 - fx) * fy
        + px[y0 + 1, x0 + 1] * fx * fy
    )


def point_in_polygon_oracle(vertices, px: float, py: float) -> bool:
    """Even-odd crossing count toward +x, half-open boundary rule."""
    inside = False
    n = len(vertices)
    for k in range(n):
        x0, y0 = vertices[k]
        x1, y1 = vertices[(k + 1) % n]
        if (y0 > py) != (y1 > py):
            xi = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
            if px < xi:
                inside = not inside
    return inside


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------


def test_load_p2_exact_values(tmp_path):
    p = tmp_path / "tiny.pgm"
    p.write_text("P2\n# comment\n2 2\n255\n0 10\n20 255\n")
    img = load_image(p)
    assert (img.width, img.height) == (2, 2)
    assert img.pixels.tolist() == [[0, 10], [20, 255]]
    assert img.spacing_mm is None


def test_load_rejects_high_maxval(tmp_path):
    p = tmp_path / "deep.pgm"
    p.write_text("P2\n2 2\n65535\n0 1 2 3\n")
    with pytest.raises(ImageFormatError):
        load_image(p)


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "nope.bin"
    p.write_bytes(b"not an image at all")
    with pytest.raises(ImageFormatError):
        load_image(p)


def test_p5_round_trip_bit_identical(tmp_path):
    rng = np.random.default_rng(3)
    img = GrayImage(rng.integers(0, 256, size=(13, 17)).astype(float))
    p = tmp_path / "rt.pgm"
    save_image(img, p)
    first = p.read_bytes()
    again = load_image(p)
    save_image(again, p)
    assert p.read_bytes() == first
    assert np.array_equal(again.pixels, img.pixels)


def test_mask_round_trip_100_random(tmp_path):
    rng = np.random.default_rng(11)
    for k in range(100):
        mask = BinaryMask(rng.uniform(size=(16, 16)) < 0.5)
        p = tmp_path / f"m{k}.pgm"
        save_mask(mask, p)
        assert np.array_equal(load_mask(p).bits, mask.bits)


def test_spacing_sidecar(tmp_path):
    img = GrayImage(np.zeros((4, 4)), spacing_mm=0.5)
    p = tmp_path / "sp.pgm"
    save_image(img, p)
    assert (tmp_path / "sp.pgm.meta").read_text().strip() == "spacing_mm=0.5"
    assert load_image(p).spacing_mm == 0.5


def test_png_round_trip(tmp_path):
    from PIL import Image

    rng = np.random.default_rng(5)
    data = rng.integers(0, 256, size=(9, 7), dtype=np.uint8)
    p = tmp_path / "g.png"
    Image.fromarray(data, mode="L").save(p)
    img = load_image(p)
    assert np.array_equal(img.pixels, data.astype(float))


def test_gray_image_invariants():
    with pytest.raises(ValueError):
        GrayImage(np.full((2, 2), 300.0))
    with pytest.raises(ValueError):
        GrayImage(np.zeros((2, 2)), spacing_mm=-1.0)
    with pytest.raises(ValueError):
        GrayImage(np.zeros(4))


# ---------------------------------------------------------------------------
# Bilinear sampling
# ---------------------------------------------------------------------------


def test_bilinear_integer_coordinates_exact():
    rng = np.random.default_rng(7)
    img = GrayImage(rng.integers(0, 256, size=(6, 8)).astype(float))
    for y in range(6):
        for x in range(8):
            assert sample_bilinear(img, Point2D(x, y)) == img.pixels[y, x]


def test_bilinear_midpoint():
    img = GrayImage(np.array([[0.0, 100.0], [0.0, 100.0]]))
    assert sample_bilinear(img, Point2D(0.5, 0.5)) == 50.0


def test_bilinear_matches_oracle_100_points():
    rng = np.random.default_rng(13)
    img = GrayImage(rng.integers(0, 256, size=(21, 34)).astype(float))
    xs = rng.uniform(0, 33, size=100)
    ys = rng.uniform(0, 20, size=100)
    for x, y in zip(xs, ys):
        got = sample_bilinear(img, Point2D(x, y))
        assert got == pytest.approx(bilinear_oracle(img.pixels, x, y), abs=1e-9)


def test_bilinear_out_of_bounds():
    img = GrayImage(np.zeros((4, 4)))
    with pytest.raises(OutOfBoundsError):
        sample_bilinear(img, Point2D(3.01, 1.0))


@settings(max_examples=50, deadline=None)
@given(
    x=st.floats(min_value=0, max_value=7),
    y=st.floats(min_value=0, max_value=5),
    data=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_bilinear_bounded_by_neighbors(x, y, data):
    rng = np.random.default_rng(data)
    img = GrayImage(rng.integers(0, 256, size=(6, 8)).astype(float))
    x0 = min(int(math.floor(x)), 6)
    y0 = min(int(math.floor(y)), 4)
    block = img.pixels[y0 : y0 + 2, x0 : x0 + 2]
    got = sample_bilinear(img, Point2D(x, y))
    assert block.min() - 1e-9 <= got <= block.max() + 1e-9


# ---------------------------------------------------------------------------
# Rasterization
# ---------------------------------------------------------------------------


def test_rasterize_unit_square_exact_area():
    poly = Polygon(np.array([[0, 0], [10, 0], [10, 10], [0, 10]], dtype=float))
    mask = rasterize_polygon(poly, 20, 20)
    assert mask_area(mask) == 100
    for y in range(20):
        for x in range(20):
            assert mask.bits[y, x] == point_in_polygon_oracle(poly.vertices, x, y)


def test_rasterize_polygon_outside_grid():
    poly = Polygon(np.array([[-30, -30], [-10, -30], [-20, -10]], dtype=float))
    mask = rasterize_polygon(poly, 16, 16)
    assert mask_area(mask) == 0


def test_rasterize_circle_area_close():
    theta = 2 * np.pi * np.arange(64) / 64
    poly = Polygon(np.column_stack([40 + 30 * np.cos(theta), 40 + 30 * np.sin(theta)]))
    mask = rasterize_polygon(poly, 80, 80)
    assert mask_area(mask) == pytest.approx(math.pi * 30**2, rel=0.02)


def test_rasterize_matches_oracle_random_polygons():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n = rng.integers(3, 9)
        verts = rng.uniform(-2, 18, size=(n, 2))
        try:
            poly = Polygon(verts)
        except InvalidPolygonError:
            continue
        mask = rasterize_polygon(poly, 16, 16)
        for y in range(16):
            for x in range(16):
                assert mask.bits[y, x] == point_in_polygon_oracle(verts, x, y)


@settings(max_examples=30, deadline=None)
@given(
    dx=st.integers(min_value=-3, max_value=3),
    dy=st.integers(min_value=-3, max_value=3),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_rasterize_translation_consistent(dx, dy, seed):
    rng = np.random.default_rng(seed)
    verts = rng.uniform(6, 18, size=(5, 2))
    try:
        poly = Polygon(verts)
    except InvalidPolygonError:
        return
    base = rasterize_polygon(poly, 28, 28).bits
    moved = rasterize_polygon(Polygon(verts + [dx, dy]), 28, 28).bits
    ys, xs = np.nonzero(base[3:25, 3:25])
    for y, x in zip(ys + 3, xs + 3):
        assert moved[y + dy, x + dx]


def test_degenerate_polygon_rejected():
    with pytest.raises(InvalidPolygonError):
        Polygon(np.array([[0, 0], [5, 5]], dtype=float))
    with pytest.raises(InvalidPolygonError):
        Polygon(np.array([[0, 0], [0, 0], [5, 5]], dtype=float))


def test_mask_area_trivials_and_oracle():
    assert mask_area(BinaryMask(np.zeros((8, 8), dtype=bool))) == 0
    assert mask_area(BinaryMask(np.ones((8, 8), dtype=bool))) == 64
    rng = np.random.default_rng(23)
    bits = rng.uniform(size=(12, 9)) < 0.4
    count = 0
    for row in bits:
        for b in row:
            if b:
                count += 1
    assert mask_area(BinaryMask(bits)) == count
