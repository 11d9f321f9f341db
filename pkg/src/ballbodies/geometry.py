"""Dimension-generic geometric substrate.

Vectors are plain float64 numpy arrays.  This module provides the pieces
everything else is built from: direction nets on the unit sphere with a
certified covering radius, minimal enclosing balls (Welzl), least-squares
orthogonal motion fitting, and planar winding numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CurveHitsOriginError,
    DegenerateSourcesError,
    DimensionMismatchError,
    InsufficientResolutionError,
)

UNIT_NORM_TOL = 1e-9
ORTHOGONALITY_TOL = 1e-9


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite float64 vector, optionally checking its dimension."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.shape[0]}")
    return v


def as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce a sequence of vectors to an (m, n) float64 array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and pts.size > 0:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ValueError("expected a nonempty list of equal-length vectors")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points have non-finite entries")
    if dim is not None and pts.shape[1] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {pts.shape[1]}")
    return pts


def normalize_direction(u, dim: int | None = None, slack: float = 1e-6) -> np.ndarray:
    """Return u rescaled to unit norm; rejects vectors further than `slack` from the sphere."""
    u = as_vector(u, dim)
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > slack:
        raise ValueError(f"direction norm {norm} is not within {slack} of 1")
    return u / norm


@dataclass(frozen=True)
class Ball:
    """A Euclidean ball given by center and radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, point, slack: float = 1e-9) -> bool:
        return float(np.linalg.norm(as_vector(point, self.dim) - self.center)) <= self.radius + slack


@dataclass(frozen=True)
class RigidMotion:
    """Orthogonal matrix plus translation, acting as ``x -> Q x + t``.

    Reflections (det Q = -1) are allowed.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.rotation, dtype=float)
        t = as_vector(self.translation)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("rotation must be a square matrix")
        if q.shape[0] != t.shape[0]:
            raise DimensionMismatchError("rotation and translation dimensions differ")
        if not np.allclose(q.T @ q, np.eye(q.shape[0]), atol=ORTHOGONALITY_TOL, rtol=0.0):
            raise ValueError("rotation matrix is not orthogonal within 1e-9")
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)

    @property
    def dim(self) -> int:
        return self.translation.shape[0]

    @staticmethod
    def identity(dim: int) -> "RigidMotion":
        return RigidMotion(np.eye(dim), np.zeros(dim))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def compose(self, other: "RigidMotion") -> "RigidMotion":
        """self after other: ``x -> self(other(x))``."""
        return RigidMotion(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidMotion":
        return RigidMotion(self.rotation.T, -self.rotation.T @ self.translation)


@dataclass(frozen=True, eq=False)
class SphereNet:
    """A finite direction net whose covering radius is at most `mesh`.

    Every unit vector lies within Euclidean distance `mesh` of some listed
    direction.  Directions come in exact antipodal pairs, so evaluating a
    support function on the net and on its negation sees the same vectors.
    """

    directions: np.ndarray
    mesh: float
    dim: int = field(init=False)

    def __post_init__(self):
        dirs = np.asarray(self.directions, dtype=float)
        if dirs.ndim != 2 or dirs.shape[0] == 0:
            raise ValueError("directions must be a nonempty (m, n) array")
        norms = np.linalg.norm(dirs, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("net directions must have unit norm within 1e-12")
        if self.mesh <= 0:
            raise ValueError("mesh must be positive")
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "dim", dirs.shape[1])

    def __len__(self) -> int:
        return self.directions.shape[0]

    def covering_audit(self, n_samples: int, seed: int = 0) -> float:
        """Largest distance from random unit vectors to the net (Monte Carlo)."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        chunk = 20000
        remaining = n_samples
        while remaining > 0:
            k = min(chunk, remaining)
            u = rng.standard_normal((k, self.dim))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            # nearest net direction via the largest inner product
            best_dot = np.max(u @ self.directions.T, axis=1)
            dist = np.sqrt(np.maximum(2.0 - 2.0 * best_dot, 0.0))
            worst = max(worst, float(np.max(dist)))
            remaining -= k
        return worst


def _planar_net(mesh: float) -> np.ndarray:
    # chord between adjacent directions is 2 sin(pi/m) <= mesh
    m = int(math.ceil(math.pi / math.asin(min(mesh, 2.0) / 2.0)))
    m = max(m, 2)
    if m % 2:
        m += 1
    half = m // 2
    theta = 2.0 * math.pi * np.arange(half) / m
    upper = np.column_stack([np.cos(theta), np.sin(theta)])
    return np.vstack([upper, -upper])


def _fibonacci_sphere(count: int) -> np.ndarray:
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    phi = 2.0 * math.pi * i / golden
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _random_sphere(count: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((count, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def make_sphere_net(n: int, mesh: float, seed: int = 0) -> SphereNet:
    """Build a direction net on the unit sphere of R^n with covering radius <= mesh.

    The planar case uses a uniform angular grid (covering radius guaranteed
    by the chord bound).  For n = 3 a Fibonacci spiral is used and for
    n >= 4 a seeded quasi-uniform sample; those nets are grown until a
    Monte Carlo covering audit passes with margin.  Deterministic for fixed
    (n, mesh, seed).
    """
    if n < 2:
        raise ValueError("sphere nets need ambient dimension >= 2")
    if not (0.0 < mesh <= 1.0) and not (n == 2 and mesh <= 2.0):
        if mesh <= 0 or mesh > 2.0:
            raise ValueError("mesh must lie in (0, 1] (planar nets accept up to 2)")
    if mesh <= 0:
        raise ValueError("mesh must be positive")

    if n == 2:
        return SphereNet(_planar_net(mesh), mesh)

    # grow until the audited covering radius clears mesh with 10% margin
    count = max(int((3.0 / mesh) ** (n - 1)), 8)
    for _ in range(24):
        if n == 3:
            half = _fibonacci_sphere(count)
        else:
            half = _random_sphere(count, n, seed)
        dirs = np.vstack([half, -half])
        net = SphereNet(dirs, mesh)
        audited = net.covering_audit(30000, seed=seed + 1)
        if audited <= 0.9 * mesh:
            return net
        count = int(count * 1.5) + 1
    raise RuntimeError(f"could not certify a covering net for n={n}, mesh={mesh}")


# ---------------------------------------------------------------------------
# minimal enclosing ball (Welzl's randomized move-to-front recursion)
# ---------------------------------------------------------------------------


def _circumball_of_boundary(boundary: list[np.ndarray]) -> Ball:
    """Smallest ball with all boundary points on its surface (affinely independent set)."""
    if not boundary:
        return Ball(np.zeros(1), 0.0)  # replaced by caller before use
    p0 = boundary[0]
    if len(boundary) == 1:
        return Ball(p0, 0.0)
    diffs = np.array([p - p0 for p in boundary[1:]])
    rhs = 0.5 * np.einsum("ij,ij->i", diffs, diffs)
    gram = diffs @ diffs.T
    try:
        coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        coef, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    center = p0 + diffs.T @ coef
    radius = float(np.linalg.norm(center - p0))
    return Ball(center, radius)


def _welzl(points: list[np.ndarray], boundary: list[np.ndarray], dim: int) -> Ball:
    if not points or len(boundary) == dim + 1:
        if not boundary:
            return Ball(np.zeros(dim), 0.0)
        return _circumball_of_boundary(boundary)
    p = points[-1]
    rest = points[:-1]
    ball = _welzl(rest, boundary, dim)
    if ball.contains(p, slack=1e-12 * (1.0 + ball.radius)):
        return ball
    return _welzl(rest, boundary + [p], dim)


def minimal_enclosing_ball(points, seed: int = 0) -> Ball:
    """Smallest ball containing all points (exact up to float rounding).

    Deterministic: the Welzl recursion runs on a seed-shuffled copy.
    """
    pts = as_points(points)
    unique = np.unique(pts, axis=0)
    order = np.random.default_rng(seed).permutation(unique.shape[0])
    shuffled = [unique[i] for i in order]
    import sys

    needed = 3 * len(shuffled) + 100
    old_limit = sys.getrecursionlimit()
    if old_limit < needed:
        sys.setrecursionlimit(needed)
    try:
        ball = _welzl(shuffled, [], pts.shape[1])
    finally:
        if old_limit < needed:
            sys.setrecursionlimit(old_limit)
    # tighten the radius to exactly cover the inputs
    radius = float(np.max(np.linalg.norm(pts - ball.center, axis=1)))
    return Ball(ball.center, radius)


# ---------------------------------------------------------------------------
# least-squares orthogonal motion fit
# ---------------------------------------------------------------------------


def procrustes_fit(sources, targets) -> tuple[RigidMotion, float]:
    """Fit the motion ``x -> Q x + t`` minimizing RMS error to the targets.

    Q ranges over the full orthogonal group, so reflections are admitted.
    Returns the motion and the RMS residual.  Raises
    DegenerateSourcesError when the sources do not affinely span.
    """
    src = as_points(sources)
    tgt = as_points(targets)
    if src.shape != tgt.shape:
        raise ValueError(
            f"sources and targets must have equal shapes, got {src.shape} vs {tgt.shape}"
        )
    m, n = src.shape
    if m < n + 1:
        raise DegenerateSourcesError(f"need at least {n + 1} pairs in dimension {n}, got {m}")
    s_mean = src.mean(axis=0)
    t_mean = tgt.mean(axis=0)
    s_c = src - s_mean
    t_c = tgt - t_mean
    sing = np.linalg.svd(s_c, compute_uv=False)
    if sing[-1] <= 1e-9:
        raise DegenerateSourcesError(
            f"sources do not affinely span (smallest singular value {sing[-1]:.3e})"
        )
    h = s_c.T @ t_c
    u, _, vt = np.linalg.svd(h)
    q = vt.T @ u.T
    t = t_mean - q @ s_mean
    motion = RigidMotion(q, t)
    residual = float(np.sqrt(np.mean(np.sum((motion.apply(src) - tgt) ** 2, axis=1))))
    return motion, residual


# ---------------------------------------------------------------------------
# planar winding number
# ---------------------------------------------------------------------------


def winding_number(samples) -> int:
    """Winding number about the origin of a closed planar curve.

    `samples` is a list of (angle, value) pairs with strictly increasing
    angles in [0, 2 pi) and nonzero 2-d values.  Consecutive normalized
    values (including the wrap-around pair) must differ in angle by less
    than pi/2; callers refine their sampling until that holds.
    """
    if len(samples) < 3:
        raise InsufficientResolutionError("need at least 3 samples on the curve")
    angles = np.array([float(a) for a, _ in samples])
    values = np.array([as_vector(v, 2) for _, v in samples])
    if np.any(np.diff(angles) <= 0):
        raise ValueError("sample angles must be strictly increasing")
    if angles[0] < 0 or angles[-1] >= 2.0 * math.pi:
        raise ValueError("sample angles must lie in [0, 2*pi)")
    norms = np.linalg.norm(values, axis=1)
    if np.any(norms < 1e-12):
        raise CurveHitsOriginError("curve value has norm below 1e-12")
    nxt = np.roll(values, -1, axis=0)
    cross = values[:, 0] * nxt[:, 1] - values[:, 1] * nxt[:, 0]
    dot = np.einsum("ij,ij->i", values, nxt)
    steps = np.arctan2(cross, dot)
    step_bound = float(np.max(np.abs(steps)))
    if step_bound >= math.pi / 2.0:
        raise InsufficientResolutionError(
            f"normalized curve turns by {step_bound:.3f} >= pi/2 between samples"
        )
    total = float(np.sum(steps)) / (2.0 * math.pi)
    rounded = int(round(total))
    if abs(total - rounded) > 0.25:
        raise InsufficientResolutionError(
            f"accumulated angle {total:.3f} turns is not close to an integer"
        )
    return rounded
