"""Planar surjectivity verification for continuous near-isometries.

A continuous map of the plane that distorts all pairwise distances by at
most some epsilon must be onto.  The verifier realizes the degree-theoretic
argument at finite resolution: it measures the distortion empirically, fits
the best rigid motion U, picks a circle radius R beyond
|target - f(0)| + fit_error + epsilon (with a safety factor), computes the
winding number of f - target on such circles adaptively, and then hunts for
an actual preimage.  The output is evidence, not proof: winding numbers and
residuals are certified only at the sampled resolution, and the report says
which hypothesis (continuity, distortion bound) a failing map violates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import ResolutionExhaustedError
from .geometry import RigidMotion, procrustes_fit, winding_number
from .maps import BlackBoxMap


def _disk_samples(rng: np.random.Generator, radius: float, count: int) -> np.ndarray:
    pts = rng.standard_normal((count, 2))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts * (radius * np.sqrt(rng.uniform(0, 1, (count, 1))))


def eps_isometry_defect_planar(
    f: BlackBoxMap, radius: float, samples: int = 160, seed: int = 0
) -> float:
    """Max over sampled pairs in the disk of | |f(x)-f(x')| - |x-x'| |.

    A lower bound on the true distortion.  The sample includes antipodal
    pairs at shrinking separations around the origin, which exposes
    puncture-type discontinuities.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    pts = list(_disk_samples(rng, radius, samples))
    # shrinking antipodal ladder around the origin
    for k in range(1, 7):
        u = rng.standard_normal(2)
        u /= np.linalg.norm(u)
        pts.append(radius * 10.0**-k * u)
        pts.append(-radius * 10.0**-k * u)
    pts = np.asarray(pts)
    images = np.asarray([f(p) for p in pts])
    worst = 0.0
    for i in range(len(pts)):
        d_in = np.linalg.norm(pts[i + 1 :] - pts[i], axis=1)
        d_out = np.linalg.norm(images[i + 1 :] - images[i], axis=1)
        if len(d_in):
            worst = max(worst, float(np.max(np.abs(d_out - d_in))))
    return worst


def _discontinuity_probe(f: BlackBoxMap, radius: float, seed: int) -> tuple[bool, float]:
    """Does a large distance distortion persist at vanishing separations?"""
    rng = np.random.default_rng(seed)
    persistent = 0.0
    for _ in range(8):
        u = rng.standard_normal(2)
        u /= np.linalg.norm(u)
        base = rng.uniform(-0.2, 0.2, 2)
        sep_defect = 0.0
        for k in range(3, 9):
            h = radius * 10.0**-k
            a, b = base + h * u, base - h * u
            d = abs(float(np.linalg.norm(f(a) - f(b))) - 2 * h)
            sep_defect = d
        persistent = max(persistent, sep_defect)
    # probe around the origin explicitly
    for k in range(3, 9):
        h = radius * 10.0**-k
        d = abs(float(np.linalg.norm(f([h, 0.0]) - f([-h, 0.0]))) - 2 * h)
        persistent = max(persistent, d)
    return persistent > 0.05, persistent


def _affine_fit(f: BlackBoxMap, radius: float, seed: int) -> tuple[RigidMotion, float]:
    rng = np.random.default_rng(seed)
    pts = np.vstack([_disk_samples(rng, radius, 48), radius * np.eye(2), -radius * np.eye(2)])
    images = np.asarray([f(p) for p in pts])
    motion, _ = procrustes_fit(pts, images)
    fit_error = float(np.max(np.linalg.norm(images - motion.apply(pts), axis=1)))
    return motion, fit_error


def _adaptive_circle_samples(f: BlackBoxMap, target, radius: float, budget: int):
    """Sample angles until consecutive normalized image steps stay under pi/2.

    Returns (samples, hit): `samples` obeys the winding contract, and `hit`
    is a circle point whose image already coincides with the target (if one
    turned up during sampling).
    """
    target = np.asarray(target, dtype=float)

    def value(a: float) -> np.ndarray:
        return np.asarray(f([radius * math.cos(a), radius * math.sin(a)])) - target

    angles = [2.0 * math.pi * i / 64.0 for i in range(64)]
    values = [value(a) for a in angles]
    for _ in range(40):
        # check for target hits on the circle first
        for a, v in zip(angles, values):
            if float(np.linalg.norm(v)) < 1e-12:
                return None, np.array([radius * math.cos(a), radius * math.sin(a)])
        mids = []
        for i in range(len(angles)):
            j = (i + 1) % len(angles)
            va, vb = values[i], values[j]
            turn = abs(math.atan2(va[0] * vb[1] - va[1] * vb[0], float(va @ vb)))
            if turn >= 0.45 * math.pi:
                b = angles[j] if j else angles[0] + 2.0 * math.pi
                mids.append((i, 0.5 * (angles[i] + b) % (2.0 * math.pi)))
        if not mids:
            return list(zip(angles, values)), None
        if len(angles) + len(mids) > budget:
            raise ResolutionExhaustedError(
                f"winding refinement exceeded {budget} samples on radius {radius:.3f}"
            )
        for i, mid in reversed(mids):
            angles.insert(i + 1, mid)
            values.insert(i + 1, value(mid))
    raise ResolutionExhaustedError(f"winding refinement stalled on radius {radius:.3f}")


@dataclass
class PlanarProbeConfig:
    samples: int = 160
    root_tol: float = 1e-6
    radii_factors: tuple = (1.0, 1.25, 1.5)
    max_curve_samples: int = 2**14
    seed: int = 0
    declared_eps: float | None = None
    homotopy_grid: int = 24


@dataclass
class SurjectivityReport:
    target: np.ndarray
    epsilon_hat: float
    affine_fit: RigidMotion
    fit_error: float
    scale: float  # the circle radius R used by the argument
    degrees: list  # (radius, winding number)
    verdict: str  # "surjective-evidence" | "violation"
    preimage: np.ndarray | None
    preimage_residual: float
    homotopy_min: float
    hypothesis_flags: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "target": self.target.tolist(),
            "epsilon_hat": self.epsilon_hat,
            "fit_rotation": self.affine_fit.rotation.tolist(),
            "fit_translation": self.affine_fit.translation.tolist(),
            "fit_error": self.fit_error,
            "scale": self.scale,
            "degrees": [[r, int(w)] for r, w in self.degrees],
            "verdict": self.verdict,
            "preimage": None if self.preimage is None else self.preimage.tolist(),
            "preimage_residual": self.preimage_residual,
            "homotopy_min": self.homotopy_min,
            "hypothesis_flags": list(self.hypothesis_flags),
            "notes": list(self.notes),
        }


def _find_preimage(f: BlackBoxMap, target: np.ndarray, starts, root_tol: float):
    best_x, best_res = None, np.inf

    def residual(x):
        return np.asarray(f(x)) - target

    for x0 in starts:
        try:
            sol = least_squares(residual, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except Exception:
            continue
        r = float(np.linalg.norm(residual(sol.x)))
        if r < best_res:
            best_x, best_res = sol.x, r
        if best_res <= root_tol:
            break
    return best_x, best_res


def surjectivity_probe_planar(
    f: BlackBoxMap, target, config: PlanarProbeConfig | None = None
) -> SurjectivityReport:
    """Degree-based surjectivity evidence for a continuous planar near-isometry."""
    config = config or PlanarProbeConfig()
    target = np.asarray(target, dtype=float)
    if not f.planar:
        raise ValueError("surjectivity probing needs a planar point map")

    f0 = np.asarray(f(np.zeros(2)))
    base = 2.0 * (float(np.linalg.norm(target - f0)) + 1.0)
    fit, fit_err = _affine_fit(f, base, config.seed)
    eps_hat = eps_isometry_defect_planar(f, base, config.samples, config.seed)
    # circle radius per the argument, with a 2x safety factor; refit at scale
    scale = 2.0 * (float(np.linalg.norm(target - f0)) + fit_err + eps_hat) + 1.0
    fit, fit_err = _affine_fit(f, scale, config.seed)
    eps_hat = max(eps_hat, eps_isometry_defect_planar(f, scale, config.samples, config.seed))
    scale = max(scale, 1.5 * (float(np.linalg.norm(target - f0)) + fit_err + eps_hat))

    notes = []
    discont, persist = _discontinuity_probe(f, scale, config.seed + 1)
    if discont:
        notes.append(
            f"distance distortion {persist:.3f} persists at separations below "
            f"{scale * 1e-8:.1e}; the map cannot be continuous"
        )

    degrees = []
    circle_hit = None
    for factor in config.radii_factors:
        r = scale * factor
        samples, hit = _adaptive_circle_samples(f, target, r, config.max_curve_samples)
        if hit is not None:
            circle_hit = hit  # the circle itself passes through the target
            continue
        degrees.append((r, winding_number(samples)))

    w_fit = 1 if float(np.linalg.det(fit.rotation)) > 0 else -1

    # homotopy between f and the fitted motion on the outer circle
    tgrid = np.linspace(0.0, 1.0, config.homotopy_grid)
    r_out = scale * config.radii_factors[-1]
    thetas = np.linspace(0, 2 * math.pi, 4 * config.homotopy_grid, endpoint=False)
    xs = r_out * np.column_stack([np.cos(thetas), np.sin(thetas)])
    fx = np.asarray([f(x) for x in xs])
    ux = fit.apply(xs)
    hmin = np.inf
    for t in tgrid:
        mix = (1 - t) * fx + t * ux - target
        hmin = min(hmin, float(np.min(np.linalg.norm(mix, axis=1))))

    # hunt for a preimage
    starts = [fit.inverse().apply(target)]
    rng = np.random.default_rng(config.seed + 2)
    starts.extend(_disk_samples(rng, scale, 6))
    if circle_hit is not None:
        starts.insert(0, circle_hit)
    preimage, residual = _find_preimage(f, target, starts, config.root_tol)

    windings = [w for _, w in degrees]
    flags = []
    if preimage is not None and residual <= config.root_tol:
        verdict = "surjective-evidence"
        if any(w != w_fit for w in windings) and circle_hit is None:
            notes.append("winding numbers disagree with the fitted motion despite a preimage")
    else:
        verdict = "violation"
        if any(w == 0 for w in windings):
            flags.append("degree-zero")
        if len(set(windings)) > 1:
            flags.append("winding-unstable")
        flags.append("preimage-not-found")
        if discont:
            flags.append("continuity")
        if discont or (config.declared_eps is not None and eps_hat > config.declared_eps) or eps_hat >= 1.0:
            flags.append("eps-hypothesis")
            notes.append(
                "the distortion hypothesis fails at the argument's scale: measured "
                f"defect {eps_hat:.3f} at radius {scale:.3f} (needs radius > "
                f"|target - f(0)| + fit_error + eps = "
                f"{float(np.linalg.norm(target - f0)):.3f} + {fit_err:.3f} + {eps_hat:.3f})"
            )

    return SurjectivityReport(
        target=target,
        epsilon_hat=eps_hat,
        affine_fit=fit,
        fit_error=fit_err,
        scale=scale,
        degrees=degrees,
        verdict=verdict,
        preimage=None if preimage is None or residual > config.root_tol else preimage,
        preimage_residual=residual,
        homotopy_min=hmin,
        hypothesis_flags=flags,
        notes=notes,
    )
