"""Brute-force raster backend used to cross-check the support-function kernel.

Bodies are rasterized on a square grid by evaluating the set definition
directly: generator leaves test the ball inequalities, c-duals test the
distance-to-every-occupied-point rule, Minkowski combinations test against
the convex hull of the scaled vertex sums, and motions pull the query grid
back through the inverse map.  Everything is O(cells) per node and is meant
for validation in the plane, not for performance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_erosion
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .bodies import BallBodyExpr, CDual, Combine, Generators, Motion
from .errors import EmptyRasterError, GridMismatchError
from .geometry import Ball, minimal_enclosing_ball
from .support import SupportEval

_CHUNK = 65536


@dataclass(eq=False)
class RasterBody:
    """Occupancy mask on a grid: cell (i, j, ...) is centered at origin + cell * index."""

    origin: np.ndarray
    cell: float
    mask: np.ndarray  # boolean, one axis per dimension

    @property
    def dim(self) -> int:
        return self.mask.ndim

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def area(self) -> float:
        return self.count * self.cell**self.dim

    def points(self) -> np.ndarray:
        """Centers of all occupied cells, (N, dim)."""
        idx = np.argwhere(self.mask)
        return self.origin + self.cell * idx

    def boundary_points(self) -> np.ndarray:
        """Centers of occupied cells with an unoccupied face neighbor."""
        interior = binary_erosion(self.mask)
        idx = np.argwhere(self.mask & ~interior)
        if idx.size == 0:
            idx = np.argwhere(self.mask)
        return self.origin + self.cell * idx

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        """Occupancy lookup for arbitrary points by nearest-cell rounding."""
        idx = np.rint((pts - self.origin) / self.cell).astype(int)
        ok = np.all((idx >= 0) & (idx < np.array(self.mask.shape)), axis=1)
        out = np.zeros(len(pts), dtype=bool)
        if np.any(ok):
            out[ok] = self.mask[tuple(idx[ok].T)]
        return out


def _extreme_points(pts: np.ndarray) -> np.ndarray:
    """Hull vertices when the cloud is full-dimensional, else the cloud itself."""
    if len(pts) <= 256:
        return pts
    try:
        hull = ConvexHull(pts)
        return pts[hull.vertices]
    except QhullError:
        return pts


def _member_mask(body: BallBodyExpr, pts: np.ndarray, cell: float) -> np.ndarray:
    if isinstance(body, Generators):
        radii = body.radii if body.radii is not None else 1.0
        out = np.ones(len(pts), dtype=bool)
        for start in range(0, len(pts), _CHUNK):
            sl = slice(start, start + _CHUNK)
            d = np.linalg.norm(pts[sl, None, :] - body.centers[None, :, :], axis=2)
            out[sl] = np.all(d <= radii + 1e-12, axis=1)
        return out
    if isinstance(body, Motion):
        inv = body.g.inverse()
        return _member_mask(body.of, inv.apply(pts), cell)
    if isinstance(body, CDual):
        inner = rasterize(body.of, cell)
        verts = _extreme_points(inner.points())
        out = np.ones(len(pts), dtype=bool)
        for start in range(0, len(pts), _CHUNK):
            sl = slice(start, start + _CHUNK)
            d = np.linalg.norm(pts[sl, None, :] - verts[None, :, :], axis=2)
            out[sl] = np.max(d, axis=1) <= 1.0 + 1e-12
        return out
    if isinstance(body, Combine):
        ra = rasterize(body.a, cell)
        rb = rasterize(body.b, cell)
        va = _extreme_points(ra.points())
        vb = _extreme_points(rb.points())
        cloud = ((1.0 - body.lam) * va)[:, None, :] + (body.lam * vb)[None, :, :]
        cloud = cloud.reshape(-1, pts.shape[1])
        try:
            hull = ConvexHull(cloud)
            eqs = hull.equations
            out = np.ones(len(pts), dtype=bool)
            pad = 0.75 * cell  # hull of cell centers can sit inside the body
            for start in range(0, len(pts), _CHUNK):
                sl = slice(start, start + _CHUNK)
                vals = pts[sl] @ eqs[:, :-1].T + eqs[:, -1][None, :]
                out[sl] = np.all(vals <= pad, axis=1)
            return out
        except QhullError:
            # flat cloud (point or segment body): test distance to the cloud
            tree = cKDTree(cloud)
            d, _ = tree.query(pts)
            return d <= 0.75 * cell
    raise TypeError(f"not a body expression: {type(body).__name__}")


def rasterize(body: BallBodyExpr, cell: float, bounds=None) -> RasterBody:
    """Occupancy raster of the body; bounds default to its norm bound plus margin."""
    if cell <= 0:
        raise ValueError("cell size must be positive")
    if bounds is None:
        r = SupportEval(body).norm_bound + 2 * cell
        lo = -np.ones(body.dim) * r
        hi = np.ones(body.dim) * r
    else:
        lo = np.asarray(bounds[0], dtype=float)
        hi = np.asarray(bounds[1], dtype=float)
    counts = np.maximum(np.ceil((hi - lo) / cell).astype(int) + 1, 2)
    # snap the origin to the global lattice so all rasters at one cell align
    origin = np.floor(lo / cell) * cell
    axes = [origin[d] + cell * np.arange(counts[d]) for d in range(body.dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    pts = grid.reshape(-1, body.dim)
    mask = _member_mask(body, pts, cell).reshape(grid.shape[:-1])
    if not mask.any():
        raise EmptyRasterError(f"no cells inside at cell={cell}; refine the grid")
    return RasterBody(origin, cell, mask)


def _check_same_grid(a: RasterBody, b: RasterBody):
    if a.dim != b.dim or abs(a.cell - b.cell) > 1e-12:
        raise GridMismatchError("rasters use different cell sizes")
    offset = (a.origin - b.origin) / a.cell
    if np.max(np.abs(offset - np.rint(offset))) > 1e-6:
        raise GridMismatchError("raster grids are not aligned")


def raster_hausdorff(a: RasterBody, b: RasterBody) -> float:
    """Two-sided point-cloud Hausdorff distance; O(cell) from the true metric."""
    _check_same_grid(a, b)

    def directed(src: RasterBody, dst: RasterBody) -> float:
        pts = src.boundary_points()
        inside = dst.contains_points(pts)
        if np.all(inside):
            return 0.0
        tree = cKDTree(dst.boundary_points())
        d, _ = tree.query(pts[~inside])
        return float(np.max(d))

    return max(directed(a, b), directed(b, a))


def raster_cdual(r: RasterBody) -> RasterBody:
    """Raster of the c-dual: cells within distance 1 of every occupied cell."""
    verts = _extreme_points(r.points())
    meb = minimal_enclosing_ball(verts)
    lo = meb.center - 1.0 - 2 * r.cell
    hi = meb.center + 1.0 + 2 * r.cell
    counts = np.ceil((hi - lo) / r.cell).astype(int) + 1
    origin = np.floor(lo / r.cell) * r.cell
    axes = [origin[d] + r.cell * np.arange(counts[d]) for d in range(r.dim)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    pts = grid.reshape(-1, r.dim)
    out = np.ones(len(pts), dtype=bool)
    for start in range(0, len(pts), _CHUNK):
        sl = slice(start, start + _CHUNK)
        d = np.linalg.norm(pts[sl, None, :] - verts[None, :, :], axis=2)
        out[sl] = np.max(d, axis=1) <= 1.0 + 1e-12
    mask = out.reshape(grid.shape[:-1])
    if not mask.any():
        raise EmptyRasterError("c-dual raster came out empty; refine the grid")
    return RasterBody(origin, r.cell, mask)


def raster_circumball(r: RasterBody) -> Ball:
    """Smallest ball enclosing the occupied cells (via their boundary)."""
    return minimal_enclosing_ball(r.boundary_points())
