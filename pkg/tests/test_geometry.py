import math

import numpy as np
import pytest

from swm.geometry import (
    BLOCK_SHAPES,
    block_parts,
    circle_convex_contact,
    deepest_contact,
    parts_intersection_area,
    poly_area,
    transform_verts,
)


def rect_area(r):
    return (r[2] - r[0]) * (r[3] - r[1])


def test_block_shapes_known_areas():
    # unit-scale areas from the rect decompositions
    expected = {
        "tee": 0.20 * 0.06 + 0.06 * 0.16,
        "ell": 0.20 * 0.06 + 0.06 * 0.16,
        "plus": 0.22 * 0.06 + 2 * (0.06 * 0.08),
    }
    for name, rects in BLOCK_SHAPES.items():
        area = sum(rect_area(r) for r in rects)
        assert area == pytest.approx(expected[name], abs=1e-12)


def test_block_shapes_rects_disjoint():
    for name, rects in BLOCK_SHAPES.items():
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                a, b = rects[i], rects[j]
                ox = min(a[2], b[2]) - max(a[0], b[0])
                oy = min(a[3], b[3]) - max(a[1], b[1])
                assert min(ox, oy) <= 1e-12, f"{name} rects {i},{j} overlap"


def test_poly_area_matches_rects():
    for name in BLOCK_SHAPES:
        parts = block_parts(name, 1.0, 0.0, (0.5, 0.5))
        total = sum(poly_area(p) for p in parts)
        direct = sum(rect_area(r) for r in BLOCK_SHAPES[name])
        assert total == pytest.approx(direct, rel=1e-12)


def test_transform_scale_rotation_translation():
    verts = np.array([[0.1, 0.0], [0.0, 0.2]])
    out = transform_verts(verts, 2.0, math.pi / 2, (0.5, 0.5))
    # 90 deg CCW: (x, y) -> (-y, x), then scaled and shifted
    np.testing.assert_allclose(out, [[0.5, 0.7], [0.1, 0.5]], atol=1e-12)


def test_transform_preserves_area():
    parts0 = block_parts("ell", 1.0, 0.0, (0.0, 0.0))
    a0 = sum(poly_area(p) for p in parts0)
    for ang in (0.3, 1.2, 4.0):
        parts = block_parts("ell", 1.0, ang, (0.3, 0.7))
        assert sum(poly_area(p) for p in parts) == pytest.approx(a0, rel=1e-10)


def test_intersection_area_self_and_disjoint():
    parts = block_parts("tee", 1.0, 0.0, (0.5, 0.5))
    area = sum(poly_area(p) for p in parts)
    assert parts_intersection_area(parts, parts) == pytest.approx(area, rel=1e-9)

    far = block_parts("tee", 1.0, 0.0, (5.0, 5.0))
    assert parts_intersection_area(parts, far) == pytest.approx(0.0, abs=1e-12)


def test_intersection_area_half_shift():
    # two unit squares offset by half a side overlap in exactly half
    sq = [np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])]
    shifted = [sq[0] + np.array([0.5, 0.0])]
    assert parts_intersection_area(sq, shifted) == pytest.approx(0.5, rel=1e-12)


def test_tee_flipped_overlap_below_coverage_threshold():
    # a tee rotated 180 degrees about its anchor overlaps itself well
    # below the 0.9 success threshold
    a = block_parts("tee", 1.0, 0.0, (0.5, 0.5))
    b = block_parts("tee", 1.0, math.pi, (0.5, 0.5))
    area = sum(poly_area(p) for p in a)
    cover = parts_intersection_area(a, b) / area
    assert 0.0 < cover < 0.9


def test_circle_contact_depth_and_normal():
    # unit square centered at origin, circle poking into its right face
    half = 0.5
    verts = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
    depth, ux, uy, qx, qy = circle_convex_contact(0.55, 0.0, 0.1, verts)
    assert depth == pytest.approx(0.05, abs=1e-12)
    assert (ux, uy) == pytest.approx((1.0, 0.0), abs=1e-12)
    assert qx == pytest.approx(0.5, abs=1e-12)

    # no contact when the circle is clear of the square
    assert circle_convex_contact(0.7, 0.0, 0.1, verts) is None


def test_circle_contact_center_inside():
    half = 0.5
    verts = np.array([[-half, -half], [half, -half], [half, half], [-half, half]])
    depth, ux, uy, qx, qy = circle_convex_contact(0.4, 0.0, 0.1, verts)
    # center inside: depth is radius plus distance to the nearest face
    assert depth == pytest.approx(0.2, abs=1e-12)
    assert (ux, uy) == pytest.approx((1.0, 0.0), abs=1e-12)


def test_deepest_contact_picks_max_depth():
    parts = block_parts("tee", 1.0, 0.0, (0.5, 0.5))
    # probe just outside each part, keep the deepest
    got = deepest_contact(0.5, 0.52, 0.05, parts)
    assert got is not None
    depth, ux, uy, qx, qy = got
    assert depth > 0
    n = math.hypot(ux, uy)
    assert n == pytest.approx(1.0, abs=1e-9)

    assert deepest_contact(5.0, 5.0, 0.05, parts) is None
