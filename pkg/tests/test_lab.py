"""Isometry screening, normal-form classification, geodesic midpoint checks."""

import numpy as np
import pytest

from ballbodies.bodies import Generators, ball_body, c_dual, combine, point_body
from ballbodies.corpus import random_body, random_motion
from ballbodies.errors import NotIsometryError
from ballbodies.geometry import RigidMotion, make_sphere_net
from ballbodies.lab import (
    ClassifierConfig,
    classify_isometry,
    geodesic_midpoint_check,
    isometry_defect,
)
from ballbodies.maps import (
    cdual_map,
    compose_maps,
    constant_map,
    motion_map,
    scale_centers_map,
)


@pytest.fixture(scope="module")
def net2():
    return make_sphere_net(2, 0.02)


@pytest.fixture(scope="module")
def config2(net2):
    return ClassifierConfig(dimension=2, net=net2)


def probe_pairs(dim=2):
    e1 = np.zeros(dim)
    e1[0] = 1.0
    return [
        (point_body(np.zeros(dim)), point_body(2 * e1)),
        (point_body(np.zeros(dim)), ball_body(2 * e1)),
        (ball_body(np.zeros(dim)), ball_body(-e1)),
    ]


def test_defect_of_identity_and_cdual(net2):
    rng = np.random.default_rng(0)
    ident = motion_map(RigidMotion.identity(2))
    dual = cdual_map(2)
    pairs = probe_pairs() + [(random_body(rng, 2), random_body(rng, 2))]
    bound = 4 * (2 * 6.0 * net2.mesh + 4e-6)
    assert isometry_defect(ident, pairs, net2) <= bound
    assert isometry_defect(dual, pairs, net2) <= bound


def test_defect_of_constant_map_is_large(net2):
    const = constant_map(point_body(np.zeros(2)))
    d = isometry_defect(const, probe_pairs(), net2)
    assert d >= 1.5  # roughly the probe diameter


def test_classify_planted_motion(config2):
    rng = np.random.default_rng(42)
    g = random_motion(rng, 2)
    result = classify_isometry(motion_map(g), config2)
    assert result.kind == "identity"
    assert np.max(np.abs(result.motion.rotation - g.rotation)) < 1e-4
    assert np.max(np.abs(result.motion.translation - g.translation)) < 1e-4
    assert result.residual <= 5 * result.residual_bound


def test_classify_planted_motion_after_duality(config2):
    rng = np.random.default_rng(43)
    g = random_motion(rng, 2)
    T = compose_maps([cdual_map(2), motion_map(g)])
    result = classify_isometry(T, config2)
    assert result.kind == "cdual"
    assert np.max(np.abs(result.motion.rotation - g.rotation)) < 1e-4
    assert np.max(np.abs(result.motion.translation - g.translation)) < 1e-4
    assert result.residual <= 5 * result.residual_bound


def test_classify_bare_duality(config2):
    result = classify_isometry(cdual_map(2), config2)
    assert result.kind == "cdual"
    assert np.max(np.abs(result.motion.rotation - np.eye(2))) < 1e-4
    assert np.max(np.abs(result.motion.translation)) < 1e-4
    assert result.residual <= 5 * result.residual_bound


def test_classify_rejects_constant_and_scaling(config2):
    with pytest.raises(NotIsometryError):
        classify_isometry(constant_map(point_body(np.zeros(2))), config2)
    with pytest.raises(NotIsometryError):
        classify_isometry(scale_centers_map(2, 2.0), config2)


def test_classify_planted_reflection_3d():
    net3 = make_sphere_net(3, 0.08)
    config = ClassifierConfig(dimension=3, net=net3)
    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    if np.linalg.det(q) > 0:
        q = q.copy()
        q[:, 0] = -q[:, 0]
    g = RigidMotion(q, rng.uniform(-1, 1, 3))
    result = classify_isometry(motion_map(g), config)
    assert result.kind == "identity"
    assert np.max(np.abs(result.motion.rotation - q)) < 1e-4
    assert np.linalg.det(result.motion.rotation) < 0


# ---------------------------------------------------------------------------
# geodesic midpoint check
# ---------------------------------------------------------------------------


def test_combine_triple_is_additive_with_fat_midpoint(net2):
    rng = np.random.default_rng(3)
    k0 = random_body(rng, 2)
    k2 = random_body(rng, 2)
    k1 = combine(0.5, k0, k2)
    check = geodesic_midpoint_check(k0, k1, k2, net2)
    assert check.additive
    assert check.verdict in ("geodesic-ok",)
    assert check.radii[1] >= 1e-3 or min(check.radii[0], check.radii[2]) < 5e-2


def test_piecewise_path_has_point_endpoint(net2):
    # point at 0, point at u/2, then a ball of radius 1/2 about u/2:
    # an additive triple whose first endpoint is a point
    u = np.array([1.0, 0.0])
    k0 = point_body(np.zeros(2))
    k1 = point_body(0.5 * u)
    k2 = combine(0.5, point_body(0.5 * u), ball_body(0.5 * u))
    check = geodesic_midpoint_check(k0, k1, k2, net2)
    assert check.additive
    assert check.d01 == pytest.approx(0.5, abs=1e-3)
    assert check.d12 == pytest.approx(0.5, abs=1e-3)
    assert check.d02 == pytest.approx(1.0, abs=1e-3)
    assert check.radii[0] < 1e-3  # the endpoint is a point: no midpoint claim
    assert check.verdict == "geodesic-ok"


def test_non_geodesic_triple_detected(net2):
    k0 = point_body(np.array([0.0, 0.0]))
    k1 = point_body(np.array([3.0, 3.0]))
    k2 = point_body(np.array([1.0, 0.0]))
    check = geodesic_midpoint_check(k0, k1, k2, net2)
    assert not check.additive
    assert check.verdict == "not-a-geodesic-triple"


def test_degenerate_identical_bodies(net2):
    rng = np.random.default_rng(5)
    k = random_body(rng, 2)
    check = geodesic_midpoint_check(k, k, k, net2)
    assert check.additive
    assert check.verdict == "geodesic-ok"


def test_lemma_holds_over_random_segments(net2):
    rng = np.random.default_rng(11)
    violations = 0
    for _ in range(20):
        k0 = random_body(rng, 2)
        k2 = random_body(rng, 2)
        lam = float(rng.uniform(0.1, 0.9))
        check = geodesic_midpoint_check(k0, combine(lam, k0, k2), k2, net2)
        assert check.additive
        if check.verdict == "midpoint-collapse":
            violations += 1
    assert violations == 0
