"""Tests for the geometric substrate: nets, enclosing balls, motion fits, winding."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballbodies.errors import (
    CurveHitsOriginError,
    DegenerateSourcesError,
    InsufficientResolutionError,
)
from ballbodies.geometry import (
    RigidMotion,
    SphereNet,
    make_sphere_net,
    minimal_enclosing_ball,
    procrustes_fit,
    winding_number,
)


# ---------------------------------------------------------------------------
# sphere nets
# ---------------------------------------------------------------------------


def test_planar_net_counts_and_covering():
    net = make_sphere_net(2, 0.1)
    assert len(net) >= 63  # chord bound: 2 sin(pi/m) <= 0.1 forces m >= 63
    # exact covering radius of a uniform angular grid is the half-step chord
    m = len(net)
    assert 2.0 * math.sin(math.pi / m) <= 0.1
    assert net.covering_audit(10000, seed=5) <= 0.1


def test_two_antipodal_directions_cover_at_mesh_two():
    net = SphereNet(np.array([[1.0, 0.0], [-1.0, 0.0]]), 2.0)
    assert net.covering_audit(2000) <= 2.0  # sphere diameter


def test_3d_net_passes_randomized_audit():
    net = make_sphere_net(3, 0.2)
    assert net.covering_audit(100000, seed=77) <= 0.2


def test_net_is_antipodally_symmetric():
    for n in (2, 3):
        net = make_sphere_net(n, 0.3)
        dirs = net.directions
        half = len(dirs) // 2
        np.testing.assert_array_equal(dirs[half:], -dirs[:half])


def test_net_monotone_in_mesh():
    sizes = []
    audits = []
    for mesh in (0.4, 0.2, 0.1, 0.05):
        net = make_sphere_net(2, mesh)
        sizes.append(len(net))
        audits.append(net.covering_audit(4000, seed=1))
    assert sizes == sorted(sizes)
    assert audits == sorted(audits, reverse=True)


def test_net_rejects_bad_arguments():
    with pytest.raises(ValueError):
        make_sphere_net(1, 0.1)
    with pytest.raises(ValueError):
        make_sphere_net(2, 0.0)
    with pytest.raises(ValueError):
        make_sphere_net(2, -0.3)


def test_net_deterministic():
    a = make_sphere_net(3, 0.25, seed=4)
    b = make_sphere_net(3, 0.25, seed=4)
    np.testing.assert_array_equal(a.directions, b.directions)


# ---------------------------------------------------------------------------
# minimal enclosing ball
# ---------------------------------------------------------------------------


def brute_force_circumradius(points: np.ndarray, span: float = 1.5, steps: int = 161) -> float:
    """Grid-search oracle: min over candidate centers of the farthest distance."""
    lo = points.min(axis=0) - 0.1
    hi = points.max(axis=0) + 0.1
    axes = [np.linspace(lo[d] - span * 0, hi[d], steps) for d in range(points.shape[1])]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, points.shape[1])
    dists = np.linalg.norm(grid[:, None, :] - points[None, :, :], axis=2).max(axis=1)
    return float(dists.min())


def test_meb_single_point():
    ball = minimal_enclosing_ball([[0.0, 0.0]])
    np.testing.assert_allclose(ball.center, [0.0, 0.0], atol=1e-12)
    assert ball.radius == 0.0


def test_meb_segment_midpoint():
    ball = minimal_enclosing_ball([[0.0, 0.0], [1.0, 0.0]])
    np.testing.assert_allclose(ball.center, [0.5, 0.0], atol=1e-12)
    assert ball.radius == pytest.approx(0.5, abs=1e-12)


def test_meb_right_triangle_matches_grid_oracle():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    ball = minimal_enclosing_ball(pts)
    np.testing.assert_allclose(ball.center, [0.5, 0.5], atol=1e-9)
    assert ball.radius == pytest.approx(math.sqrt(2.0) / 2.0, abs=1e-9)
    # independent grid-search oracle (coarse; validates within grid accuracy)
    assert abs(brute_force_circumradius(pts) - ball.radius) < 2e-2


def test_meb_rejects_empty():
    with pytest.raises(ValueError):
        minimal_enclosing_ball([])


@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("seed", range(6))
def test_meb_contains_all_and_is_tight(dim, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-2, 2, size=(rng.integers(2, 50), dim))
    ball = minimal_enclosing_ball(pts)
    d = np.linalg.norm(pts - ball.center, axis=1)
    assert np.all(d <= ball.radius + 1e-9)
    # shrinking by 1e-6 must exclude at least one point
    assert np.any(d > ball.radius - 1e-6)


def test_meb_duplicated_points():
    ball = minimal_enclosing_ball([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])
    assert ball.radius == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# orthogonal motion fit
# ---------------------------------------------------------------------------


def simplex_points(dim: int) -> np.ndarray:
    return np.vstack([np.zeros(dim), np.eye(dim)])


def test_procrustes_identity():
    pts = simplex_points(2)
    motion, resid = procrustes_fit(pts, pts)
    np.testing.assert_allclose(motion.rotation, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(motion.translation, np.zeros(2), atol=1e-12)
    assert resid < 1e-12


def test_procrustes_recovers_quarter_turn():
    src = simplex_points(2)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    tgt = src @ rot.T + np.array([0.3, -0.7])
    motion, resid = procrustes_fit(src, tgt)
    np.testing.assert_allclose(motion.rotation, rot, atol=1e-9)
    np.testing.assert_allclose(motion.translation, [0.3, -0.7], atol=1e-9)
    assert resid <= 1e-9


def test_procrustes_recovers_reflection():
    src = simplex_points(2)
    refl = np.array([[1.0, 0.0], [0.0, -1.0]])
    tgt = src @ refl.T
    motion, resid = procrustes_fit(src, tgt)
    np.testing.assert_allclose(motion.rotation, refl, atol=1e-9)
    assert np.linalg.det(motion.rotation) == pytest.approx(-1.0, abs=1e-9)
    assert resid <= 1e-9


def test_procrustes_rejects_degenerate_sources():
    src = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])  # collinear
    with pytest.raises(DegenerateSourcesError, match="affinely span"):
        procrustes_fit(src, src)
    with pytest.raises(DegenerateSourcesError, match="at least"):
        procrustes_fit(np.eye(2), np.eye(2))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.sampled_from([2, 3]), reflect=st.booleans())
def test_procrustes_recovers_planted_motion(seed, dim, reflect):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    if reflect == (np.linalg.det(q) > 0):
        q[:, 0] = -q[:, 0]
    t = rng.uniform(-3, 3, dim)
    motion_true = RigidMotion(q, t)
    src = rng.uniform(-2, 2, size=(dim + 3, dim))
    motion, resid = procrustes_fit(src, motion_true.apply(src))
    assert np.max(np.abs(motion.rotation - q)) < 1e-8
    assert np.max(np.abs(motion.translation - t)) < 1e-8
    assert resid < 1e-9


def test_rigid_motion_compose_inverse():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    g = RigidMotion(q, rng.uniform(-1, 1, 3))
    gi = g.inverse()
    pts = rng.uniform(-2, 2, (5, 3))
    np.testing.assert_allclose(gi.apply(g.apply(pts)), pts, atol=1e-12)
    comp = g.compose(gi)
    np.testing.assert_allclose(comp.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(comp.translation, np.zeros(3), atol=1e-12)


def test_rigid_motion_rejects_non_orthogonal():
    with pytest.raises(ValueError, match="orthogonal"):
        RigidMotion(np.array([[1.0, 0.1], [0.0, 1.0]]), np.zeros(2))


# ---------------------------------------------------------------------------
# winding numbers
# ---------------------------------------------------------------------------


def curve_samples(fn, count: int):
    angles = 2.0 * math.pi * np.arange(count) / count
    return [(float(t), fn(t)) for t in angles]


def independent_total_turn(values) -> float:
    """Oracle: accumulate angle increments of the normalized curve directly."""
    total = 0.0
    arr = np.array(values, dtype=float)
    arr = arr / np.linalg.norm(arr, axis=1, keepdims=True)
    for i in range(len(arr)):
        a = arr[i]
        b = arr[(i + 1) % len(arr)]
        total += math.atan2(a[0] * b[1] - a[1] * b[0], a @ b)
    return total / (2.0 * math.pi)


def test_winding_identity_curve():
    samples = curve_samples(lambda t: (math.cos(t), math.sin(t)), 64)
    assert winding_number(samples) == 1


def test_winding_constant_curve():
    samples = curve_samples(lambda t: (1.0, 0.0), 16)
    assert winding_number(samples) == 0


def test_winding_double_cover():
    samples = curve_samples(lambda t: (math.cos(2 * t), math.sin(2 * t)), 128)
    assert winding_number(samples) == 2
    oracle = independent_total_turn([v for _, v in samples])
    assert oracle == pytest.approx(2.0, abs=1e-9)


def test_winding_negative_turn():
    samples = curve_samples(lambda t: (math.cos(-t), math.sin(-t)), 64)
    assert winding_number(samples) == -1


def test_winding_requires_resolution():
    samples = curve_samples(lambda t: (math.cos(2 * t), math.sin(2 * t)), 7)
    with pytest.raises(InsufficientResolutionError):
        winding_number(samples)


def test_winding_rejects_origin_hits():
    samples = curve_samples(lambda t: (math.cos(t), math.sin(t)), 32)
    samples[3] = (samples[3][0], (0.0, 1e-13))
    with pytest.raises(CurveHitsOriginError):
        winding_number(samples)


@settings(max_examples=25, deadline=None)
@given(degree=st.integers(-3, 3), count=st.sampled_from([96, 192, 384]))
def test_winding_refinement_invariance(degree, count):
    def fn(t):
        # nonvanishing curve of the given degree with a wobble
        r = 1.0 + 0.4 * math.sin(3 * t)
        return (r * math.cos(degree * t + 0.5), r * math.sin(degree * t + 0.5))

    if degree == 0:
        assert winding_number(curve_samples(fn, count)) == 0
    else:
        coarse = winding_number(curve_samples(fn, count))
        fine = winding_number(curve_samples(fn, 2 * count))
        assert coarse == fine == degree
