"""Executable isometry analysis: distance-defect probing, normal-form
classification of black-box isometries, and the geodesic midpoint check.

A metric isometry of the ball-body space is, in normal form, a rigid motion
applied either directly or after c-duality.  The classifier recovers that
form in three stages: (1) probe points and unit balls and see which family
collapses to near-points under the map, (2) fit a rigid motion through the
circumcenters of the collapsed images, and (3) certify the fit by measuring
residual distances on random test bodies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .bodies import BallBodyExpr, apply_motion, ball_body, c_dual, point_body
from .corpus import random_body
from .errors import AmbiguousClassificationError, NotIsometryError
from .geometry import RigidMotion, SphereNet, make_sphere_net, procrustes_fit
from .maps import BlackBoxMap
from .solver import DEFAULT_TOL
from .support import circumball, default_mesh, hausdorff

POINT_RADIUS_TOL = 1e-3


def _defect_details(
    T: BlackBoxMap,
    probes: list[tuple[BallBodyExpr, BallBodyExpr]],
    net: SphereNet,
    tol: float = DEFAULT_TOL,
) -> tuple[float, float]:
    """(worst upper endpoint, worst certified lower endpoint) of the distance defect."""
    upper = 0.0
    lower = 0.0
    for k, l in probes:
        try:
            tk, tl = T(k), T(l)
        except Exception as exc:
            raise NotIsometryError(f"map evaluation failed on a probe pair: {exc}") from exc
        before = hausdorff(k, l, net, tol)
        after = hausdorff(tk, tl, net, tol)
        shift = abs(after.value - before.value)
        bound = after.error_bound + before.error_bound
        upper = max(upper, shift + bound)
        lower = max(lower, shift - bound)
    return upper, max(lower, 0.0)


def isometry_defect(
    T: BlackBoxMap,
    probes: list[tuple[BallBodyExpr, BallBodyExpr]],
    net: SphereNet,
    tol: float = DEFAULT_TOL,
) -> float:
    """Worst certified bound on |d(TK, TL) - d(K, L)| over the probe pairs."""
    return _defect_details(T, probes, net, tol)[0]


def _lattice(dim: int, spacing: float, radius: float) -> np.ndarray:
    steps = np.arange(-radius, radius + 1e-9, spacing)
    pts = np.stack(np.meshgrid(*([steps] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    return pts


@dataclass
class ClassifierConfig:
    dimension: int = 2
    net: SphereNet | None = None
    tol: float = DEFAULT_TOL
    defect_tol: float = 0.5
    r_tol: float = POINT_RADIUS_TOL
    lattice_spacing: float = 1.0
    lattice_radius: float = 3.0
    stage1_spacing: float = 2.0
    probe_mesh: float = 0.2  # circumcenters of near-points are exact on coarse nets
    n_test_bodies: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.net is None:
            self.net = make_sphere_net(self.dimension, default_mesh(self.dimension))


@dataclass
class IsometryClassification:
    kind: str  # "identity" (rigid motion) or "cdual" (rigid motion after duality)
    motion: RigidMotion
    residual: float
    residual_bound: float
    isometry_defect: float
    fit_rms: float
    stage1_point_radius: float
    stage1_ball_radius: float
    details: dict = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "rotation": self.motion.rotation.tolist(),
            "translation": self.motion.translation.tolist(),
            "residual": self.residual,
            "residual_bound": self.residual_bound,
            "isometry_defect": self.isometry_defect,
            "fit_rms": self.fit_rms,
            "stage1_point_radius": self.stage1_point_radius,
            "stage1_ball_radius": self.stage1_ball_radius,
            "details": self.details,
        }


def _screening_pairs(dim: int) -> list[tuple[BallBodyExpr, BallBodyExpr]]:
    e1 = np.zeros(dim)
    e1[0] = 1.0
    e2 = np.zeros(dim)
    e2[1] = 1.0
    probes = [
        point_body(np.zeros(dim)),
        point_body(2.0 * e1),
        point_body(-1.5 * e2),
        ball_body(np.zeros(dim)),
        ball_body(1.5 * e2),
    ]
    return list(itertools.combinations(probes, 2))


def classify_isometry(T: BlackBoxMap, config: ClassifierConfig) -> IsometryClassification:
    """Recover the normal form of a black-box isometry of the ball-body space.

    Raises NotIsometryError when the map fails distance screening or when
    neither probe family collapses to points (impossible for a true
    isometry), and AmbiguousClassificationError when both do.
    """
    net = config.net
    dim = config.dimension
    defect, defect_lower = _defect_details(T, _screening_pairs(dim), net, config.tol)
    if defect_lower > config.defect_tol:
        raise NotIsometryError(
            f"distance defect is at least {defect_lower:.3f}, beyond the screening "
            f"tolerance {config.defect_tol} (worst-case endpoint {defect:.3f})"
        )

    probe_net = make_sphere_net(dim, config.probe_mesh)

    # stage 1: which family (points / unit balls) maps to near-points?
    stage1 = _lattice(dim, config.stage1_spacing, config.lattice_radius)
    point_r = 0.0
    ball_r = 0.0
    for x in stage1:
        point_r = max(point_r, circumball(T(point_body(x)), probe_net, config.tol).radius)
        ball_r = max(ball_r, circumball(T(ball_body(x)), probe_net, config.tol).radius)
    points_collapse = point_r <= config.r_tol
    balls_collapse = ball_r <= config.r_tol
    if points_collapse and balls_collapse:
        raise AmbiguousClassificationError(
            f"both probe families collapse to near-points (radii {point_r:.2e}, {ball_r:.2e})"
        )
    if not points_collapse and not balls_collapse:
        raise NotIsometryError(
            "neither points nor unit balls map to near-points "
            f"(radii {point_r:.2e}, {ball_r:.2e}); the map cannot be an isometry"
        )
    kind = "identity" if points_collapse else "cdual"

    # stage 2: rigid motion through the circumcenters of the collapsed family
    sources = _lattice(dim, config.lattice_spacing, config.lattice_radius)
    probe = point_body if kind == "identity" else ball_body
    targets = np.array(
        [circumball(T(probe(x)), probe_net, config.tol).center for x in sources]
    )
    motion, fit_rms = procrustes_fit(sources, targets)

    # stage 3: residual distances between the map and its fitted normal form
    rng = np.random.default_rng(config.seed)
    residual = 0.0
    residual_bound = 0.0
    for _ in range(config.n_test_bodies):
        body = random_body(rng, dim)
        image = T(body)
        model = apply_motion(motion, body if kind == "identity" else c_dual(body))
        res = hausdorff(image, model, net, config.tol)
        residual = max(residual, res.value)
        residual_bound = max(residual_bound, res.error_bound)

    return IsometryClassification(
        kind=kind,
        motion=motion,
        residual=residual,
        residual_bound=residual_bound,
        isometry_defect=defect,
        fit_rms=fit_rms,
        stage1_point_radius=point_r,
        stage1_ball_radius=ball_r,
        details={"map": T.name, "n_correspondences": len(sources)},
    )


# ---------------------------------------------------------------------------
# geodesic midpoint check
# ---------------------------------------------------------------------------


@dataclass
class GeodesicCheck:
    d01: float
    d12: float
    d02: float
    additivity_gap: float
    additivity_tol: float
    radii: tuple[float, float, float]
    additive: bool
    verdict: str  # "geodesic-ok" | "not-a-geodesic-triple" | "midpoint-collapse"

    def to_doc(self) -> dict:
        return {
            "distances": [self.d01, self.d12, self.d02],
            "additivity_gap": self.additivity_gap,
            "additivity_tol": self.additivity_tol,
            "circumradii": list(self.radii),
            "additive": self.additive,
            "verdict": self.verdict,
        }


def geodesic_midpoint_check(
    K0: BallBodyExpr,
    K1: BallBodyExpr,
    K2: BallBodyExpr,
    net: SphereNet,
    tol: float = DEFAULT_TOL,
    point_tol: float = POINT_RADIUS_TOL,
) -> GeodesicCheck:
    """Check betweenness additivity and the no-point-between-bodies rule.

    When d(K0,K1) + d(K1,K2) = d(K0,K2) within certified bounds and both
    endpoints have circumradius >= point_tol, the midpoint must too; a
    midpoint collapse is reported as a verdict, never silently.
    """
    r01 = hausdorff(K0, K1, net, tol)
    r12 = hausdorff(K1, K2, net, tol)
    r02 = hausdorff(K0, K2, net, tol)
    gap = abs(r01.value + r12.value - r02.value)
    gap_tol = r01.error_bound + r12.error_bound + r02.error_bound
    additive = gap <= gap_tol
    radii = tuple(circumball(k, net, tol).radius for k in (K0, K1, K2))
    if not additive:
        verdict = "not-a-geodesic-triple"
    elif radii[0] >= point_tol and radii[2] >= point_tol and radii[1] < point_tol:
        verdict = "midpoint-collapse"
    else:
        verdict = "geodesic-ok"
    return GeodesicCheck(
        d01=r01.value,
        d12=r12.value,
        d02=r02.value,
        additivity_gap=gap,
        additivity_tol=gap_tol,
        radii=radii,
        additive=additive,
        verdict=verdict,
    )
