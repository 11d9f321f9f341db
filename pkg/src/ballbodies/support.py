"""Support-function oracles and the metric operations built on them.

Every body is handled through its support function h(u) = max over the body
of <x, u>.  The expression nodes transform supports exactly:

* c-dual:   h'(u) = 1 - h(-u)
* combine:  h'(u) = (1 - lam) h_a(u) + lam h_b(u)
* motion:   h'(u) = h(Q^T u) + <t, u>

so the only numerical work happens at generator leaves, where the certified
solver guarantees each value within the oracle tolerance.  The Hausdorff
distance of two bodies equals the sup-norm distance of their support
functions on the unit sphere; evaluating on a finite net gives a value
together with a rigorous error bound from the Lipschitz constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog

from .bodies import BallBodyExpr, CDual, Combine, Generators, Motion
from .errors import DimensionMismatchError, EmptyReconstructionError, EmptyBodyError
from .geometry import Ball, SphereNet, as_vector, normalize_direction
from .solver import DEFAULT_TOL, support_batch

DEFAULT_MESH = {2: 0.02, 3: 0.08}


def default_mesh(dim: int) -> float:
    return DEFAULT_MESH.get(dim, 0.25)


def _norm_bound(body: BallBodyExpr) -> float:
    if isinstance(body, Generators):
        radii = body.radii if body.radii is not None else np.ones(body.centers.shape[0])
        return float(np.min(np.linalg.norm(body.centers, axis=1) + radii))
    if isinstance(body, CDual):
        return 1.0 + _norm_bound(body.of)
    if isinstance(body, Combine):
        return (1.0 - body.lam) * _norm_bound(body.a) + body.lam * _norm_bound(body.b)
    if isinstance(body, Motion):
        return _norm_bound(body.of) + float(np.linalg.norm(body.g.translation))
    raise TypeError(f"not a body expression: {type(body).__name__}")


def _eval_batch(body: BallBodyExpr, dirs: np.ndarray, tol: float) -> np.ndarray:
    if isinstance(body, Generators):
        return support_batch(body.leaf, dirs, tol)
    if isinstance(body, CDual):
        return 1.0 - _eval_batch(body.of, -dirs, tol)
    if isinstance(body, Combine):
        return (1.0 - body.lam) * _eval_batch(body.a, dirs, tol) + body.lam * _eval_batch(
            body.b, dirs, tol
        )
    if isinstance(body, Motion):
        child = dirs @ body.g.rotation
        return _eval_batch(body.of, child, tol) + dirs @ body.g.translation
    raise TypeError(f"not a body expression: {type(body).__name__}")


@dataclass(eq=False)
class SupportEval:
    """Evaluable support oracle with a certified per-value tolerance."""

    body: BallBodyExpr
    tol: float = DEFAULT_TOL
    norm_bound: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.norm_bound is None:
            self.norm_bound = _norm_bound(self.body)
        self._net_cache: dict[int, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.body.dim

    def __call__(self, u) -> float:
        """Support value for a single unit direction (normalized within 1e-6)."""
        u = normalize_direction(u, self.dim)
        return float(_eval_batch(self.body, u[None, :], self.tol)[0])

    def batch(self, dirs: np.ndarray) -> np.ndarray:
        """Support values for unit direction rows (assumed normalized)."""
        return _eval_batch(self.body, np.asarray(dirs, dtype=float), self.tol)

    def on_net(self, net: SphereNet) -> np.ndarray:
        """Support sweep over a net, memoized per net object (pure, transparent)."""
        key = id(net)
        cached = self._net_cache.get(key)
        if cached is None:
            cached = self.batch(net.directions)
            self._net_cache[key] = cached
        return cached


def support(eval_or_body, u, tol: float = DEFAULT_TOL) -> float:
    """Support value h(u); accepts a SupportEval or a bare body expression."""
    ev = eval_or_body if isinstance(eval_or_body, SupportEval) else SupportEval(eval_or_body, tol)
    return ev(u)


def as_eval(body, tol: float = DEFAULT_TOL) -> SupportEval:
    return body if isinstance(body, SupportEval) else SupportEval(body, tol)


# ---------------------------------------------------------------------------
# Hausdorff distance
# ---------------------------------------------------------------------------


class HausdorffResult(NamedTuple):
    """Certified distance: the true value lies in [value - lower_slack, value + error_bound]."""

    value: float
    error_bound: float
    lower_slack: float

    @property
    def upper(self) -> float:
        return self.value + self.error_bound

    @property
    def lower(self) -> float:
        return max(self.value - self.lower_slack, 0.0)


def hausdorff(K, T, net: SphereNet, tol: float = DEFAULT_TOL) -> HausdorffResult:
    """Hausdorff distance via the sup-norm of support differences on a net.

    The reported value is the max over net directions; the truth exceeds it
    by at most the Lipschitz gap of the net plus the oracle tolerances.
    """
    ek, et = as_eval(K, tol), as_eval(T, tol)
    if ek.dim != et.dim:
        raise DimensionMismatchError("bodies live in different dimensions")
    if net.dim != ek.dim:
        raise DimensionMismatchError("net dimension does not match the bodies")
    hk = ek.on_net(net)
    ht = et.on_net(net)
    value = float(np.max(np.abs(hk - ht)))
    error = 2.0 * max(ek.norm_bound, et.norm_bound) * net.mesh + 2.0 * (ek.tol + et.tol)
    return HausdorffResult(value, error, 2.0 * (ek.tol + et.tol))


# ---------------------------------------------------------------------------
# circumball (Chebyshev-center min-max as a linear program)
# ---------------------------------------------------------------------------


def circumball(K, net: SphereNet, tol: float = DEFAULT_TOL) -> Ball:
    """Smallest enclosing ball of the body, to net resolution.

    Solves min over (z, rho) of max over net directions of h(u) - <z, u>,
    a linear program.  The radius never exceeds the true circumradius by
    more than the oracle tolerance.
    """
    ev = as_eval(K, tol)
    if net.dim != ev.dim:
        raise DimensionMismatchError("net dimension does not match the body")
    h = ev.on_net(net)
    n = ev.dim
    u_mat = net.directions
    # variables (z, rho): minimize rho s.t. <z, u> + rho >= h(u)
    c = np.zeros(n + 1)
    c[-1] = 1.0
    a_ub = np.hstack([u_mat, np.ones((len(net), 1))])
    res = linprog(c, A_ub=-a_ub, b_ub=-h, bounds=[(None, None)] * (n + 1), method="highs")
    if not res.success:
        raise RuntimeError(f"circumball LP failed: {res.message}")
    return Ball(res.x[:n], max(float(res.x[-1]), 0.0))


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


class ContainsResult(NamedTuple):
    inside: bool
    margin: float  # min over net of h(u) - <y, u>; negative means outside


def contains_point(K, y, net: SphereNet, tol: float = DEFAULT_TOL) -> ContainsResult:
    """Net-based membership test with the worst separating margin.

    For generator leaves the exact ball test decides; the margin is still
    reported from the net.
    """
    ev = as_eval(K, tol)
    y = as_vector(y, ev.dim)
    h = ev.on_net(net)
    margin = float(np.min(h - net.directions @ y))
    body = ev.body
    if isinstance(body, Generators):
        radii = body.radii if body.radii is not None else 1.0
        inside = bool(np.all(np.linalg.norm(y - body.centers, axis=1) <= radii + 1e-12))
    else:
        inside = margin >= -ev.tol
    return ContainsResult(inside, margin)


# ---------------------------------------------------------------------------
# farthest-point distance and reconstruction from point distances
# ---------------------------------------------------------------------------


def farthest_distance(K, x, net: SphereNet, tol: float = DEFAULT_TOL, refine: bool = True) -> float:
    """max over the body of |y - x|, the Hausdorff distance of {x} to the body.

    The coarse net maximum of h(u) - <x, u> is refined by golden-section
    search on the angle (2-d) or by shrinking-cap sampling (n >= 3).
    """
    ev = as_eval(K, tol)
    x = as_vector(x, ev.dim)
    h = ev.on_net(net)
    vals = h - net.directions @ x
    i0 = int(np.argmax(vals))
    coarse = float(vals[i0])
    if not refine:
        return coarse

    def phi_dir(u):
        u = u / np.linalg.norm(u)
        return float(ev.batch(u[None, :])[0] - u @ x)

    if ev.dim == 2:
        theta0 = float(np.arctan2(net.directions[i0, 1], net.directions[i0, 0]))
        width = 2.2 * np.arcsin(min(net.mesh / 2.0, 1.0))
        lo, hi = theta0 - width, theta0 + width
        invphi = (np.sqrt(5.0) - 1.0) / 2.0

        def phi(theta):
            return phi_dir(np.array([np.cos(theta), np.sin(theta)]))

        a, b = lo, hi
        c1 = b - invphi * (b - a)
        c2 = a + invphi * (b - a)
        f1, f2 = phi(c1), phi(c2)
        for _ in range(48):
            if f1 < f2:
                a, c1, f1 = c1, c2, f2
                c2 = a + invphi * (b - a)
                f2 = phi(c2)
            else:
                b, c2, f2 = c2, c1, f1
                c1 = b - invphi * (b - a)
                f1 = phi(c1)
        best = max(coarse, phi(0.5 * (a + b)))
        return best

    # shrinking spherical-cap refinement
    u_best = net.directions[i0].copy()
    best = coarse
    rng = np.random.default_rng(12345)
    cap = net.mesh
    for _ in range(12):
        probes = u_best[None, :] + cap * rng.standard_normal((24, ev.dim))
        probes /= np.linalg.norm(probes, axis=1, keepdims=True)
        vals = ev.batch(probes) - probes @ x
        j = int(np.argmax(vals))
        if float(vals[j]) > best:
            best = float(vals[j])
            u_best = probes[j]
        cap *= 0.6
    return best


def farthest_distance_batch(
    K, xs: np.ndarray, net: SphereNet, tol: float = DEFAULT_TOL, iters: int = 36
) -> np.ndarray:
    """Planar farthest-point distances from many probe points at once.

    Runs one coarse sweep plus a vectorized golden-section refinement of the
    maximizing angle per probe (the support difference is locally unimodal
    on the circle for these bodies).
    """
    ev = as_eval(K, tol)
    if ev.dim != 2:
        raise ValueError("batched refinement is planar only")
    xs = np.asarray(xs, dtype=float)
    h = ev.on_net(net)
    coarse_vals = h[None, :] - xs @ net.directions.T
    best = np.max(coarse_vals, axis=1)
    idx = np.argmax(coarse_vals, axis=1)
    theta0 = np.arctan2(net.directions[idx, 1], net.directions[idx, 0])
    width = 2.2 * np.arcsin(min(net.mesh / 2.0, 1.0))

    def phi(theta):
        u = np.column_stack([np.cos(theta), np.sin(theta)])
        return ev.batch(u) - np.einsum("kn,kn->k", u, xs)

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a = theta0 - width
    b = theta0 + width
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = phi(c1), phi(c2)
    for _ in range(iters):
        right = f1 < f2  # the maximum lies in [c1, b]; otherwise in [a, c2]
        a = np.where(right, c1, a)
        b = np.where(right, b, c2)
        theta_new = np.where(right, a + invphi * (b - a), b - invphi * (b - a))
        f_new = phi(theta_new)
        c1_old, f1_old = c1, f1
        c1 = np.where(right, c2, theta_new)
        f1 = np.where(right, f2, f_new)
        c2 = np.where(right, theta_new, c1_old)
        f2 = np.where(right, f_new, f1_old)
    return np.maximum(best, np.maximum(f1, f2))


def reconstruct(distances, net: SphereNet, tol: float = DEFAULT_TOL) -> SupportEval:
    """Body oracle for the intersection of balls (x_i + d_i B) from probe data.

    `distances` is a sequence of (point, distance) pairs.  When the
    distances are true point-to-body Hausdorff distances of some body, the
    reconstruction contains that body, and it converges to it as the probe
    set refines a bounded region.
    """
    pts = []
    rads = []
    for x, d in distances:
        x = as_vector(x)
        d = float(d)
        if d < 0:
            raise ValueError("probe distances must be nonnegative")
        pts.append(x)
        rads.append(d)
    centers = np.asarray(pts)
    radii = np.asarray(rads)
    if net.dim != centers.shape[1]:
        raise DimensionMismatchError("net dimension does not match the probes")
    try:
        body = Generators(centers, radii=radii)
    except EmptyBodyError as exc:
        raise EmptyReconstructionError(str(exc)) from exc
    return SupportEval(body, tol)
