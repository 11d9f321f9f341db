"""Raster oracle: area convergence, cloud Hausdorff, agreement with the kernel."""

import math

import numpy as np
import pytest

from ballbodies.bodies import (
    Generators,
    apply_motion,
    ball_body,
    c_dual,
    combine,
    point_body,
)
from ballbodies.errors import GridMismatchError
from ballbodies.geometry import RigidMotion, make_sphere_net
from ballbodies.raster import (
    RasterBody,
    raster_cdual,
    raster_circumball,
    raster_hausdorff,
    rasterize,
)
from ballbodies.support import SupportEval, circumball, hausdorff


@pytest.fixture(scope="module")
def net2():
    return make_sphere_net(2, 0.02)


def test_disk_area_converges():
    r = rasterize(ball_body([0.0, 0.0]), cell=0.01)
    assert r.area() == pytest.approx(math.pi, abs=0.05)


def test_point_body_raster_is_single_cell():
    r = rasterize(point_body([0.3, -0.2]), cell=0.01)
    assert r.count <= 4
    np.testing.assert_allclose(r.points().mean(axis=0), [0.3, -0.2], atol=0.012)


def test_lens_area_matches_circular_segment_formula():
    lens = Generators(np.array([[0.0, 0.0], [1.0, 0.0]]))
    r = rasterize(lens, cell=0.01)
    expected = 2.0 * math.pi / 3.0 - math.sqrt(3.0) / 2.0
    assert r.area() == pytest.approx(expected, abs=0.05)


def test_raster_hausdorff_identity_and_translates():
    a = rasterize(ball_body([0.0, 0.0]), cell=0.02, bounds=([-3, -3], [3, 3]))
    b = rasterize(ball_body([0.8, 0.0]), cell=0.02, bounds=([-3, -3], [3, 3]))
    assert raster_hausdorff(a, a) == 0.0
    assert raster_hausdorff(a, b) == pytest.approx(0.8, abs=0.04)


def test_raster_hausdorff_point_vs_ball():
    x = np.array([0.4, 0.1])
    y = np.array([-0.3, 0.5])
    a = rasterize(point_body(x), cell=0.02, bounds=([-3, -3], [3, 3]))
    b = rasterize(ball_body(y), cell=0.02, bounds=([-3, -3], [3, 3]))
    expected = 1.0 + float(np.linalg.norm(x - y))
    assert raster_hausdorff(a, b) == pytest.approx(expected, abs=0.04)


def test_grid_mismatch_rejected():
    a = rasterize(ball_body([0.0, 0.0]), cell=0.02)
    b = rasterize(ball_body([0.0, 0.0]), cell=0.03)
    with pytest.raises(GridMismatchError):
        raster_hausdorff(a, b)


def test_raster_cdual_involution_up_to_band():
    lens = Generators(np.array([[0.2, 0.0], [0.9, 0.3]]))
    r = rasterize(lens, cell=0.02)
    rcc = raster_cdual(raster_cdual(r))
    # agree up to a one-cell boundary band
    assert raster_hausdorff(r, rcc) <= 3 * r.cell


def test_raster_cdual_matches_kernel(net2):
    lens = Generators(np.array([[0.0, 0.0], [1.0, 0.0]]))
    rd = raster_cdual(rasterize(lens, cell=0.01))
    kd = rasterize(c_dual(lens), cell=0.01)
    assert raster_hausdorff(rd, kd) <= 4 * 0.01


def test_motion_and_combine_rasters(net2):
    rng = np.random.default_rng(0)
    q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    g = RigidMotion(q, np.array([0.3, -0.4]))
    body = apply_motion(g, combine(0.4, ball_body([0.0, 0.0]), point_body([0.8, 0.2])))
    r = rasterize(body, cell=0.01)
    # combine(0.4, ball, point) is a ball of radius 0.6; check area after motion
    assert r.area() == pytest.approx(math.pi * 0.6**2, abs=0.05)


def test_raster_circumball_of_lens():
    lens = Generators(np.array([[0.0, 0.0], [1.0, 0.0]]))
    ball = raster_circumball(rasterize(lens, cell=0.01))
    np.testing.assert_allclose(ball.center, [0.5, 0.0], atol=0.02)
    assert ball.radius == pytest.approx(math.sqrt(3.0) / 2.0, abs=0.02)


def test_kernel_and_raster_hausdorff_agree(net2):
    rng = np.random.default_rng(5)
    cell = 0.01
    for _ in range(3):
        centers = rng.uniform(-0.5, 0.5, size=(int(rng.integers(2, 4)), 2))
        from ballbodies.geometry import minimal_enclosing_ball

        meb = minimal_enclosing_ball(centers)
        if meb.radius > 0.9:
            centers = meb.center + (centers - meb.center) * (0.9 / meb.radius)
        k = Generators(centers)
        t = ball_body(rng.uniform(-0.5, 0.5, 2))
        res = hausdorff(k, t, net2)
        bounds = ([-4, -4], [4, 4])
        rv = raster_hausdorff(
            rasterize(k, cell, bounds=bounds), rasterize(t, cell, bounds=bounds)
        )
        assert abs(res.value - rv) <= res.error_bound + 4 * cell
