"""Batch command-line front end.

Bodies and maps arrive as JSON documents (a file path, ``-`` for stdin, or
an inline JSON string); every invocation emits one deterministic JSON
report embedding the configuration and tool version.  Exit codes: 0 ok,
2 parse error, 3 invariant violation, 4 classification-premise failure,
5 adaptive resolution exhausted.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass

import click
import numpy as np

from . import __version__
from .bodies import parse_body
from .errors import (
    AmbiguousClassificationError,
    CurveHitsOriginError,
    DegenerateSourcesError,
    DimensionMismatchError,
    DocumentError,
    EmptyBodyError,
    EmptyRasterError,
    EmptyReconstructionError,
    GridMismatchError,
    InsufficientResolutionError,
    NoConvergenceError,
    NotIsometryError,
    ResolutionExhaustedError,
)
from .geometry import make_sphere_net
from .lab import ClassifierConfig, classify_isometry, geodesic_midpoint_check
from .maps import parse_map
from .planar import PlanarProbeConfig, surjectivity_probe_planar
from .selftest import run_selftest
from .solver import DEFAULT_TOL
from .support import (
    SupportEval,
    circumball,
    default_mesh,
    farthest_distance_batch,
    hausdorff,
    reconstruct,
)

EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_PREMISE = 4
EXIT_RESOLUTION = 5

_ERROR_EXITS = [
    ((DocumentError, json.JSONDecodeError, FileNotFoundError, IsADirectoryError), EXIT_PARSE),
    (
        (
            EmptyBodyError,
            EmptyReconstructionError,
            EmptyRasterError,
            GridMismatchError,
            DimensionMismatchError,
            DegenerateSourcesError,
            ValueError,
        ),
        EXIT_INVARIANT,
    ),
    ((NotIsometryError, AmbiguousClassificationError), EXIT_PREMISE),
    (
        (
            ResolutionExhaustedError,
            NoConvergenceError,
            InsufficientResolutionError,
            CurveHitsOriginError,
        ),
        EXIT_RESOLUTION,
    ),
]


@dataclass
class RunConfig:
    dimension: int | None
    net_mesh: float | None
    support_tol: float
    seed: int
    oracle: bool
    output_path: str | None

    def resolve_dim(self, inferred: int) -> int:
        if self.dimension is not None and self.dimension != inferred:
            raise DimensionMismatchError(
                f"--dim {self.dimension} but the documents live in dimension {inferred}"
            )
        dim = self.dimension if self.dimension is not None else inferred
        if dim < 2:
            raise ValueError("dimension must be at least 2")
        return dim

    def net(self, dim: int):
        mesh = self.net_mesh if self.net_mesh is not None else default_mesh(dim)
        return make_sphere_net(dim, mesh, seed=self.seed)

    def to_doc(self) -> dict:
        return {
            "dimension": self.dimension,
            "net_mesh": self.net_mesh,
            "support_tol": self.support_tol,
            "seed": self.seed,
            "oracle": self.oracle,
        }


def _load_document(source: str):
    """Read a JSON document from a path, stdin ('-'), or an inline string."""
    text = None
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith(("{", "[")):
        text = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)


def _emit(config: RunConfig, command: str, result: dict) -> None:
    report = {
        "tool": "ballbodies",
        "version": __version__,
        "command": command,
        "config": config.to_doc(),
        "result": result,
    }
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _fail(config: RunConfig, command: str, exc: Exception) -> None:
    for types, code in _ERROR_EXITS:
        if isinstance(exc, types):
            payload = {
                "tool": "ballbodies",
                "version": __version__,
                "command": command,
                "error": {"type": type(exc).__name__, "message": str(exc)},
            }
            click.echo(json.dumps(payload, sort_keys=True, indent=2), err=True)
            sys.exit(code)
    raise exc


def _guarded(config: RunConfig, command: str, fn) -> None:
    try:
        _emit(config, command, fn())
    except SystemExit:
        raise
    except Exception as exc:  # mapped to the documented exit codes
        _fail(config, command, exc)


@click.group()
@click.version_option(version=__version__, prog_name="ballbodies")
@click.option("--dim", type=int, default=None, help="Ambient dimension (default: inferred).")
@click.option("--mesh", type=float, default=None, help="Direction-net covering radius.")
@click.option("--tol", type=float, default=DEFAULT_TOL, help="Support oracle tolerance.")
@click.option("--seed", type=int, default=0, help="Seed for nets and randomized checks.")
@click.option("--oracle", is_flag=True, help="Cross-check against the raster oracle (2-d).")
@click.option("--out", type=str, default=None, help="Write the report to this path.")
@click.pass_context
def main(ctx, dim, mesh, tol, seed, oracle, out):
    """Numerics for intersections of unit balls and their metric isometries."""
    ctx.obj = RunConfig(dim, mesh, tol, seed, oracle, out)


@main.command()
@click.argument("body_a")
@click.argument("body_b")
@click.pass_obj
def dist(config: RunConfig, body_a, body_b):
    """Hausdorff distance between two body documents."""

    def run():
        a = parse_body(_load_document(body_a))
        b = parse_body(_load_document(body_b))
        if a.dim != b.dim:
            raise DimensionMismatchError(f"bodies have dimensions {a.dim} and {b.dim}")
        dim = config.resolve_dim(a.dim)
        net = config.net(dim)
        res = hausdorff(a, b, net, config.support_tol)
        result = {"value": res.value, "error_bound": res.error_bound}
        if config.oracle:
            if dim == 2:
                from .raster import raster_hausdorff, rasterize

                extent = max(SupportEval(a).norm_bound, SupportEval(b).norm_bound) + 0.1
                bounds = ([-extent, -extent], [extent, extent])
                result["oracle_value"] = raster_hausdorff(
                    rasterize(a, 0.01, bounds), rasterize(b, 0.01, bounds)
                )
            else:
                result["oracle_value"] = None
        return result

    _guarded(config, "dist", run)


@main.command()
@click.argument("body")
@click.option("--direction", "-u", required=True, help="Unit direction as a JSON array.")
@click.pass_obj
def support(config: RunConfig, body, direction):
    """Support-function value of a body in one direction."""

    def run():
        expr = parse_body(_load_document(body))
        u = np.asarray(json.loads(direction), dtype=float)
        config.resolve_dim(expr.dim)
        ev = SupportEval(expr, config.support_tol)
        return {"direction": u.tolist(), "value": ev(u), "tolerance": ev.tol}

    _guarded(config, "support", run)


@main.command("cdual-check")
@click.argument("body")
@click.pass_obj
def cdual_check(config: RunConfig, body):
    """Duality identities for one body: involution and the support identity."""

    def run():
        from .bodies import c_dual

        expr = parse_body(_load_document(body))
        dim = config.resolve_dim(expr.dim)
        net = config.net(dim)
        ev = SupportEval(expr, config.support_tol)
        h = ev.on_net(net)
        hcc = SupportEval(c_dual(c_dual(expr)), config.support_tol).on_net(net)
        g = SupportEval(c_dual(expr), config.support_tol).batch(-net.directions)
        inv = float(np.max(np.abs(hcc - h)))
        ident = float(np.max(np.abs(h + g - 1.0)))
        return {
            "involution_deviation": inv,
            "support_identity_deviation": ident,
            "passed": bool(inv <= 2e-6 and ident <= 2e-6),
        }

    _guarded(config, "cdual-check", run)


@main.command()
@click.argument("body")
@click.pass_obj
def circ(config: RunConfig, body):
    """Circumball (smallest enclosing ball) of a body."""

    def run():
        expr = parse_body(_load_document(body))
        dim = config.resolve_dim(expr.dim)
        ball = circumball(expr, config.net(dim), config.support_tol)
        return {"center": ball.center.tolist(), "radius": ball.radius}

    _guarded(config, "circ", run)


@main.command("reconstruct")
@click.argument("body")
@click.option("--grid-step", type=float, default=0.5, show_default=True)
@click.option("--grid-extent", type=float, default=3.0, show_default=True)
@click.pass_obj
def reconstruct_cmd(config: RunConfig, body, grid_step, grid_extent):
    """Rebuild a planar body from its distances to a probe grid."""

    def run():
        expr = parse_body(_load_document(body))
        dim = config.resolve_dim(expr.dim)
        if dim != 2:
            raise ValueError("reconstruction probing is planar only")
        net = config.net(dim)
        ev = SupportEval(expr, config.support_tol)
        axis = np.arange(-grid_extent, grid_extent + 1e-9, grid_step)
        probes = np.stack(np.meshgrid(axis, axis, indexing="ij"), -1).reshape(-1, 2)
        d = farthest_distance_batch(ev, probes, net, config.support_tol) + 2 * config.support_tol
        recon = reconstruct(list(zip(probes, d)), net, config.support_tol)
        dom = float(np.min(recon.on_net(net) - ev.on_net(net)))
        res = hausdorff(recon, ev, net, config.support_tol)
        return {
            "probes": int(len(probes)),
            "support_dominance_min": dom,
            "distance": res.value,
            "distance_error_bound": res.error_bound,
        }

    _guarded(config, "reconstruct", run)


@main.command("geodesic-check")
@click.argument("body0")
@click.argument("body1")
@click.argument("body2")
@click.pass_obj
def geodesic_check(config: RunConfig, body0, body1, body2):
    """Betweenness additivity and the midpoint-collapse check for a triple."""

    def run():
        k0 = parse_body(_load_document(body0))
        k1 = parse_body(_load_document(body1))
        k2 = parse_body(_load_document(body2))
        dim = config.resolve_dim(k0.dim)
        net = config.net(dim)
        return geodesic_midpoint_check(k0, k1, k2, net, config.support_tol).to_doc()

    _guarded(config, "geodesic-check", run)


@main.command()
@click.argument("map_doc")
@click.pass_obj
def classify(config: RunConfig, map_doc):
    """Normal form of a black-box isometry: a motion, or a motion after duality."""

    def run():
        dim = config.dimension if config.dimension is not None else 2
        T = parse_map(_load_document(map_doc), dim)
        cfg = ClassifierConfig(
            dimension=dim, net=config.net(dim), tol=config.support_tol, seed=config.seed
        )
        return classify_isometry(T, cfg).to_doc()

    _guarded(config, "classify", run)


@main.command()
@click.argument("map_doc")
@click.option("--target", required=True, help="Target point as a JSON array.")
@click.pass_obj
def surjectivity(config: RunConfig, map_doc, target):
    """Degree-based surjectivity evidence for a planar continuous map."""

    def run():
        T = parse_map(_load_document(map_doc), 2)
        if not T.planar:
            raise ValueError("surjectivity probing needs a planar map document")
        y = np.asarray(json.loads(target), dtype=float)
        cfg = PlanarProbeConfig(seed=config.seed)
        return surjectivity_probe_planar(T, y, cfg).to_doc()

    _guarded(config, "surjectivity", run)


@main.command()
@click.option("--profile", type=click.Choice(["full", "quick"]), default="full", show_default=True)
@click.option("--criteria", type=str, default=None, help="Comma-separated criterion ids.")
@click.pass_obj
def selftest(config: RunConfig, profile, criteria):
    """Run the acceptance criteria; nonzero exit if any criterion fails."""
    chosen = None
    if criteria:
        chosen = [int(c) for c in criteria.split(",") if c.strip()]

    def run():
        return run_selftest(
            seed=config.seed,
            tol=config.support_tol,
            net_mesh=config.net_mesh,
            profile=profile,
            criteria=chosen,
        )

    try:
        report = run()
    except Exception as exc:
        _fail(config, "selftest", exc)
        return
    _emit(config, "selftest", report)
    if report["failed"]:
        sys.exit(1)


if __name__ == "__main__":
    main()
