"""Expression-tree representation of ball bodies.

A body is a nonempty intersection of translated unit balls, described by a
tree of four node kinds:

* ``Generators(centers)``     -- the intersection of unit balls about the centers
* ``CDual(of)``               -- the c-dual body
* ``Combine(lam, a, b)``      -- the Minkowski average (1-lam) a + lam b
* ``Motion(g, of)``           -- the image under a rigid motion

Trees are immutable and hash by identity.  The matching JSON document
format (one object per node) is::

    {"type": "generators", "centers": [[...], ...]}
    {"type": "cdual", "of": <body>}
    {"type": "combine", "lambda": 0.5, "a": <body>, "b": <body>}
    {"type": "motion", "rotation": [[...], ...], "translation": [...], "of": <body>}
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, DocumentError, EmptyBodyError
from .geometry import RigidMotion, as_points
from .solver import LeafGeometry, prepare_leaf

MAX_TREE_DEPTH = 16
BOUNDARY_SLACK = 1e-9


class BallBodyExpr:
    """Base class for body expression nodes."""

    dim: int
    depth: int

    def _check_depth(self):
        if self.depth > MAX_TREE_DEPTH:
            raise ValueError(f"expression depth exceeds {MAX_TREE_DEPTH}")


@dataclass(frozen=True, eq=False)
class Generators(BallBodyExpr):
    """Intersection of balls about `centers`.

    Unit radii denote a body in the modeled class; general radii support
    internal distance-constraint intersections (not serializable).  Center
    sets whose minimal enclosing ball exceeds radius 1 - 1e-9 are rejected
    unless flagged ``boundary`` (such bodies degenerate toward a point).
    """

    centers: np.ndarray
    radii: np.ndarray | None = None
    boundary: bool = False

    def __post_init__(self):
        pts = as_points(self.centers)
        object.__setattr__(self, "centers", pts)
        if self.radii is not None:
            object.__setattr__(self, "radii", np.asarray(self.radii, dtype=float))
        leaf = prepare_leaf(pts, self.radii)
        if self.radii is None and leaf.meb_radius is not None:
            if leaf.meb_radius > 1.0 - BOUNDARY_SLACK and not self.boundary:
                raise EmptyBodyError(
                    f"centers need a ball of radius {leaf.meb_radius:.12f}; "
                    "pass boundary=True to accept a near-degenerate body"
                )
        object.__setattr__(self, "_leaf", leaf)

    @property
    def leaf(self) -> LeafGeometry:
        return self._leaf

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    @property
    def depth(self) -> int:
        return 1


@dataclass(frozen=True, eq=False)
class CDual(BallBodyExpr):
    """The c-dual: the intersection of unit balls centered at points of the body."""

    of: BallBodyExpr

    @property
    def dim(self) -> int:
        return self.of.dim

    @property
    def depth(self) -> int:
        return self.of.depth + 1

    def __post_init__(self):
        self._check_depth()


@dataclass(frozen=True, eq=False)
class Combine(BallBodyExpr):
    """Minkowski average (1 - lam) a + lam b."""

    lam: float
    a: BallBodyExpr
    b: BallBodyExpr

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.a.dim != self.b.dim:
            raise DimensionMismatchError("combined bodies have different dimensions")
        self._check_depth()

    @property
    def dim(self) -> int:
        return self.a.dim

    @property
    def depth(self) -> int:
        return 1 + max(self.a.depth, self.b.depth)


@dataclass(frozen=True, eq=False)
class Motion(BallBodyExpr):
    """Image of a body under a rigid motion."""

    g: RigidMotion
    of: BallBodyExpr

    def __post_init__(self):
        if self.g.dim != self.of.dim:
            raise DimensionMismatchError("motion dimension does not match the body")
        self._check_depth()

    @property
    def dim(self) -> int:
        return self.of.dim

    @property
    def depth(self) -> int:
        return self.of.depth + 1


# ---------------------------------------------------------------------------
# convenience constructors
# ---------------------------------------------------------------------------


def ball_body(center) -> Generators:
    """The unit ball about `center`."""
    return Generators(np.asarray(center, dtype=float)[None, :])


def point_body(p) -> CDual:
    """The singleton {p}, expressed as the c-dual of its unit ball."""
    return CDual(ball_body(p))


def c_dual(body: BallBodyExpr) -> CDual:
    return CDual(body)


def combine(lam: float, a: BallBodyExpr, b: BallBodyExpr) -> Combine:
    return Combine(lam, a, b)


def apply_motion(g: RigidMotion, body: BallBodyExpr) -> Motion:
    return Motion(g, body)


def push_motion(g: RigidMotion, gen: Generators) -> Generators:
    """Equivalent generator form of a moved generator body (unit radii only)."""
    if gen.radii is not None:
        raise ValueError("push_motion applies to unit-radius generator bodies")
    return Generators(g.apply(gen.centers), boundary=gen.boundary)


# ---------------------------------------------------------------------------
# document format
# ---------------------------------------------------------------------------


def parse_body(doc, _depth: int = 0) -> BallBodyExpr:
    """Build an expression tree from a parsed JSON document."""
    if _depth > MAX_TREE_DEPTH:
        raise DocumentError(f"body document nests deeper than {MAX_TREE_DEPTH}")
    if not isinstance(doc, dict):
        raise DocumentError(f"body node must be an object, got {type(doc).__name__}")
    kind = doc.get("type")
    try:
        if kind == "generators":
            centers = doc["centers"]
            if not isinstance(centers, list) or not centers:
                raise DocumentError("generators.centers must be a nonempty list")
            return Generators(np.asarray(centers, dtype=float), boundary=bool(doc.get("boundary", False)))
        if kind == "cdual":
            return CDual(parse_body(doc["of"], _depth + 1))
        if kind == "combine":
            return Combine(
                float(doc["lambda"]),
                parse_body(doc["a"], _depth + 1),
                parse_body(doc["b"], _depth + 1),
            )
        if kind == "motion":
            g = RigidMotion(
                np.asarray(doc["rotation"], dtype=float),
                np.asarray(doc["translation"], dtype=float),
            )
            return Motion(g, parse_body(doc["of"], _depth + 1))
    except KeyError as exc:
        raise DocumentError(f"body node of type {kind!r} lacks field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"malformed body node of type {kind!r}: {exc}") from exc
    raise DocumentError(f"unknown body node type {kind!r}")


def body_to_doc(body: BallBodyExpr) -> dict:
    """Serialize an expression tree to the document format."""
    if isinstance(body, Generators):
        if body.radii is not None:
            raise ValueError("general-radius intersections have no document form")
        doc = {"type": "generators", "centers": body.centers.tolist()}
        if body.boundary:
            doc["boundary"] = True
        return doc
    if isinstance(body, CDual):
        return {"type": "cdual", "of": body_to_doc(body.of)}
    if isinstance(body, Combine):
        return {
            "type": "combine",
            "lambda": body.lam,
            "a": body_to_doc(body.a),
            "b": body_to_doc(body.b),
        }
    if isinstance(body, Motion):
        return {
            "type": "motion",
            "rotation": body.g.rotation.tolist(),
            "translation": body.g.translation.tolist(),
            "of": body_to_doc(body.of),
        }
    raise TypeError(f"not a body expression: {type(body).__name__}")
