"""Hypersurfaces bounding the origin and nested sequences of them."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from ..errors import (AmbiguousOrientation, LevelSetError, NestingViolation,
                      NoBoundingComponent, NoRegularLevel, NotRegular,
                      OpenSurface, SequenceInvariantError)
from ..fields import ScalarField
from . import geometry as geo
from .grid import Grid, sample
from .marching import facet_components, marching_cubes, marching_squares

log = logging.getLogger(__name__)

REGULAR_REL_TOL = 1e-4
ORIENTATION_AGREEMENT = 0.99
DISJOINT_TOL = 1e-9
PERTURB_STEPS = (1.05, 0.95, 1.10, 0.90, 1.15, 0.85, 1.20, 0.80)


@dataclass(frozen=True, eq=False)
class Hypersurface:
    """One closed, connected level-set component enclosing the origin.

    ``facets`` are directed segments (2-D, in loop order) or triangles wound
    outward (3-D).  ``normals`` are unit vertex normals pointing into the
    enclosed region K.  ``epsilon`` is +1 when grad F points into K, -1 when
    it points out.
    """

    level: float
    vertices: np.ndarray
    facets: np.ndarray
    normals: np.ndarray
    epsilon: int
    diameter: float
    chi: int
    min_grad: float = float("nan")
    regular_tol: float = float("nan")
    components: int = 1
    scalar_field: ScalarField | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    @property
    def sign(self) -> str:
        return "+" if self.epsilon > 0 else "-"

    @property
    def enclosed_measure(self) -> float:
        """Area (2-D) or volume (3-D) of K."""
        return abs(geo.signed_measure(self.vertices, self.facets))

    @classmethod
    def from_mesh(cls, vertices, facets, level=float("nan"), epsilon=-1):
        """Wrap an arbitrary closed mesh, orienting it to positive measure."""
        vertices = np.asarray(vertices, dtype=float)
        facets = np.asarray(facets, dtype=np.int64)
        if geo.signed_measure(vertices, facets) < 0:
            facets = facets[:, ::-1].copy()
        return cls(
            level=float(level),
            vertices=vertices,
            facets=facets,
            normals=geo.inward_vertex_normals(vertices, facets),
            epsilon=epsilon,
            diameter=geo.diameter(vertices),
            chi=geo.euler_characteristic(len(vertices), facets),
        )

    @cached_property
    def _parity(self):
        return geo.RayParity(self.vertices, self.facets)

    @cached_property
    def _radial_bounds(self):
        # origin-centred balls: everything within r_in is in K, beyond r_out is not
        radii = np.linalg.norm(self.vertices, axis=1)
        r_out = float(radii.max())
        if not self._parity.contains(np.zeros((1, self.n)))[0]:
            return 0.0, r_out
        r_in = float(radii.min()) - geo.max_edge_length(self.vertices, self.facets)
        return max(r_in, 0.0), r_out

    def contains(self, points) -> np.ndarray:
        """Boolean mask: which ``points`` (shape (..., n)) lie inside K."""
        points = np.asarray(points, dtype=float)
        shape = points.shape[:-1]
        flat = points.reshape(-1, self.n)
        r = np.linalg.norm(flat, axis=1)
        r_in, r_out = self._radial_bounds
        out = r < r_in
        todo = np.nonzero(~out & (r <= r_out))[0]
        if todo.size:
            out[todo] = self._parity.contains(flat[todo])
        return out.reshape(shape)

    def facet_midpoints(self):
        """Facet centroids with inward facet normals."""
        mids = self.vertices[self.facets].mean(axis=1)
        return mids, geo.facet_normals(self.vertices, self.facets)

    @cached_property
    def _tree(self):
        # kd-tree over vertices, longest edge, and vertex -> incident facets (CSR)
        flat = self.facets.ravel()
        order = np.argsort(flat, kind="stable")
        start = np.searchsorted(flat[order], np.arange(len(self.vertices) + 1))
        incident = order // self.facets.shape[1]
        return (cKDTree(self.vertices), geo.max_edge_length(self.vertices, self.facets),
                start, incident)

    def distance(self, points, cutoff: float = np.inf) -> np.ndarray:
        """Euclidean distance from each point to the mesh.

        Points whose nearest vertex is farther than ``cutoff`` plus the longest
        edge only get a lower bound (nearest-vertex distance minus that edge).
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        tree, reach, start, incident = self._tree
        dv, _ = tree.query(points)
        out = dv - reach
        near = np.nonzero(dv - reach <= cutoff)[0]
        if near.size == 0:
            return out
        # any facet holding the closest mesh point has all vertices within dv + reach
        lists = tree.query_ball_point(points[near], dv[near] + reach)
        sizes = np.fromiter((len(l) for l in lists), dtype=np.int64, count=len(lists))
        pv = np.repeat(near, sizes)
        vv = np.fromiter((v for l in lists for v in l), dtype=np.int64, count=int(sizes.sum()))
        deg = start[vv + 1] - start[vv]
        pf = np.repeat(pv, deg)
        within = np.arange(deg.sum()) - np.repeat(np.cumsum(deg) - deg, deg)
        ff = incident[np.repeat(start[vv], deg) + within]
        pairs = np.unique(np.column_stack([pf, ff]), axis=0)
        tri = self.vertices[self.facets[pairs[:, 1]]]
        p = points[pairs[:, 0]]
        if self.n == 2:
            d = geo.point_segment_distance(p, tri[:, 0], tri[:, 1])
        else:
            d = geo.point_triangle_distance(p, tri[:, 0], tri[:, 1], tri[:, 2])
        best = np.full(len(points), np.inf)
        np.minimum.at(best, pairs[:, 0], d)
        out[near] = np.minimum(best[near], dv[near])
        return out

    @cached_property
    def chord_error(self) -> float:
        """Largest gap between the mesh and the true level set, estimated at
        facet centroids as ``|F - a| / |grad F|``; 0 without a scalar field."""
        if self.scalar_field is None:
            return 0.0
        mids = self.vertices[self.facets].mean(axis=1)
        with np.errstate(all="ignore"):
            gap = np.abs(self.scalar_field.value(mids) - self.level) / np.linalg.norm(
                self.scalar_field.grad(mids), axis=1)
        gap = gap[np.isfinite(gap)]
        return float(gap.max()) if gap.size else 0.0

    def field_normals(self, points) -> np.ndarray:
        """Inward unit normals ``eps * grad F / |grad F|`` of the level set at ``points``.

        Falls back to the mesh vertex normals when no scalar field is attached
        and ``points`` are the vertices themselves.
        """
        points = np.asarray(points, dtype=float)
        if self.scalar_field is None:
            if points is self.vertices or np.array_equal(points, self.vertices):
                return self.normals
            raise ValueError("surface has no scalar field; normals only known at vertices")
        g = self.scalar_field.grad(points)
        with np.errstate(all="ignore"):
            return self.epsilon * g / np.linalg.norm(g, axis=-1, keepdims=True)


def topology_signature(H: Hypersurface) -> tuple[int, int]:
    """``(components, euler_characteristic)`` of the surface mesh."""
    ncomp, _ = facet_components(len(H.vertices), H.facets)
    return int(ncomp), geo.euler_characteristic(len(H.vertices), H.facets)


# -- extraction -------------------------------------------------------------------

def _split_components(vertices, facets):
    ncomp, labels = facet_components(len(vertices), facets)
    flab = labels[facets[:, 0]]
    for c in range(ncomp):
        f = facets[flab == c]
        used = np.unique(f)
        remap = np.full(len(vertices), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        yield vertices[used], remap[f]


def _loop_order(vertices, facets):
    order = geo.order_loop(facets)
    m = len(order)
    return vertices[order], np.column_stack([np.arange(m), (np.arange(m) + 1) % m])


def extract_level_component(F: ScalarField, a: float, g: Grid) -> Hypersurface:
    """Extract the closed component of ``F = a`` that encloses the origin.

    Runs marching squares / cubes on the grid samples of F, splits the
    output into connected components and keeps the innermost closed
    component whose enclosed region contains the origin.
    """
    a = float(a)
    if a == 0.0 or not np.isfinite(a):
        raise ValueError(f"level must be finite and nonzero, got {a!r}")
    if g.n != F.n:
        raise ValueError("grid and field dimensions differ")
    sampled = sample(F, g)
    axes = g.axes()
    if g.n == 2:
        vertices, facets = marching_squares(sampled.values, axes, a, center_value=F.value)
    else:
        vertices, facets = marching_cubes(sampled.values, axes, a)
    if len(facets) == 0:
        raise NoBoundingComponent(f"level {a!r} does not occur on the grid")

    origin = np.zeros((1, g.n))
    candidates = []
    saw_open = False
    for v, f in _split_components(vertices, facets):
        if not geo.is_closed(len(v), f):
            saw_open = True
            continue
        if not geo.RayParity(v, f).contains(origin)[0]:
            continue
        measure = geo.signed_measure(v, f)
        if measure < 0:
            f = f[:, ::-1].copy()
        candidates.append((abs(measure), v, f))
    if not candidates:
        if saw_open:
            raise OpenSurface(f"level {a!r}: component around the origin reaches the grid boundary")
        raise NoBoundingComponent(f"no component of level {a!r} encloses the origin")
    _, v, f = min(candidates, key=lambda c: c[0])
    if g.n == 2:
        v, f = _loop_order(v, f)
    if np.min(np.linalg.norm(v, axis=1)) == 0.0:
        raise NoBoundingComponent(f"level {a!r} passes through the origin")

    normals = geo.inward_vertex_normals(v, f)
    grad = F.grad(v)
    gnorm = np.linalg.norm(grad, axis=1)
    tol = REGULAR_REL_TOL * sampled.grad_norm_max
    min_grad = float(np.nanmin(gnorm)) if np.isfinite(gnorm).any() else 0.0
    if not np.all(np.isfinite(gnorm)) or min_grad <= tol:
        raise NotRegular(a, min_grad, tol)
    agreement = float(np.mean(np.einsum("ij,ij->i", grad, normals) > 0))
    if agreement >= ORIENTATION_AGREEMENT:
        epsilon = 1
    elif agreement <= 1 - ORIENTATION_AGREEMENT:
        epsilon = -1
    else:
        raise AmbiguousOrientation(a, agreement)

    return Hypersurface(
        level=a, vertices=v, facets=f, normals=normals, epsilon=epsilon,
        diameter=geo.diameter(v), chi=geo.euler_characteristic(len(v), f),
        min_grad=min_grad, regular_tol=tol, scalar_field=F,
    )


def _boundary_start(F, g):
    values = sample(F, g).values[g.boundary_mask()]
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise LevelSetError("F is not finite anywhere on the grid boundary")
    smallest = float(np.min(np.abs(values)))
    if smallest == 0.0:
        raise LevelSetError("F vanishes on the grid boundary; shrink the box")
    sign = 1.0 if np.median(values) > 0 else -1.0
    return sign, smallest


def _regular_ladder(F, g, count, ratio, max_level=None):
    if count < 2:
        raise ValueError("count >= 2 required")
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    sign, smallest = _boundary_start(F, g)
    top = 0.5 * smallest
    if max_level is not None:
        top = min(top, abs(float(max_level)))
    out = []
    for k in range(count):
        nominal = sign * top * ratio ** k
        for factor in (1.0,) + PERTURB_STEPS:
            a = nominal * factor
            try:
                out.append(extract_level_component(F, a, g))
                break
            except NotRegular as exc:
                log.debug("level %r not regular (%s); perturbing", a, exc)
        else:
            raise NoRegularLevel(nominal)
    return out


def select_regular_levels(F: ScalarField, g: Grid, count: int, ratio: float = 0.5,
                          max_level: float | None = None) -> list[float]:
    """Geometric ladder of regular levels below the grid-boundary minimum.

    The first rung is half the smallest ``|F|`` sampled on the box boundary
    (optionally capped by ``max_level``), so each rung's component stays
    inside the box.  A rung whose component is not regular is nudged by
    5 %, 10 %, ... up to 20 % either way before giving up.
    """
    return [H.level for H in _regular_ladder(F, g, count, ratio, max_level)]


# -- sequences ------------------------------------------------------------------------

@dataclass(eq=False)
class HypersurfaceSequence:
    """Nested hypersurfaces ordered from the outermost inward."""

    surfaces: list[Hypersurface]
    certificates: dict[tuple[int, int], float] = field(default_factory=dict)

    def __len__(self):
        return len(self.surfaces)

    def __getitem__(self, i):
        return self.surfaces[i]

    def __iter__(self):
        return iter(self.surfaces)

    @property
    def levels(self) -> list[float]:
        return [H.level for H in self.surfaces]

    @property
    def diameters(self) -> list[float]:
        return [H.diameter for H in self.surfaces]

    def verify(self):
        """Check ordering, nesting, disjointness and shrinking diameters.

        Fills :attr:`certificates` with, for each pair ``i < j``, the fraction
        of vertices of surface ``j`` found inside region ``i``.
        """
        levels = np.array(self.levels)
        mags = np.abs(levels)
        if not (np.all(np.sign(levels) == np.sign(levels[0])) and np.all(np.diff(mags) < 0)):
            raise SequenceInvariantError(f"levels do not decrease monotonically to 0: {levels}")
        for i, outer in enumerate(self.surfaces):
            for j in range(i + 1, len(self.surfaces)):
                inner = self.surfaces[j]
                inside = outer.contains(inner.vertices)
                self.certificates[(i, j)] = float(inside.mean())
                if not inside.all():
                    raise NestingViolation(i, j, inner.vertices[np.argmin(inside)])
                if _surfaces_touch(outer, inner, DISJOINT_TOL):
                    raise SequenceInvariantError(f"surfaces {i} and {j} intersect")
        d = np.array(self.diameters)
        if np.any(np.diff(d) > 0):
            raise SequenceInvariantError(f"diameters increase along the sequence: {d}")
        if not d[-1] < 0.5 * d[0]:
            raise SequenceInvariantError(
                f"diameters do not shrink: last {d[-1]:.4g} vs first {d[0]:.4g}")
        return self


def _surfaces_touch(A: Hypersurface, B: Hypersurface, tol: float) -> bool:
    """True if some vertex of B lies within ``tol`` of a facet of A."""
    return bool(np.any(A.distance(B.vertices, cutoff=tol) <= tol))


def build_sequence(F: ScalarField, g: Grid, count: int, ratio: float = 0.5,
                   max_level: float | None = None) -> HypersurfaceSequence:
    """Extract ``count`` nested regular hypersurfaces and certify nesting."""
    return HypersurfaceSequence(_regular_ladder(F, g, count, ratio, max_level)).verify()


# -- definiteness ------------------------------------------------------------------------

class Definiteness(NamedTuple):
    kind: str                       # positive | negative | indefinite | degenerate
    samples: int
    min_value: float
    max_value: float
    positive_witness: tuple | None
    negative_witness: tuple | None
    zero_witness: tuple | None


def local_definiteness_probe(F: ScalarField, radius: float, samples: int = 10000,
                             seed: int = 0, grid: Grid | None = None) -> Definiteness:
    """Sign pattern of F on random points of the punctured ball.

    Points closer to the origin than ``radius * 1e-3`` are rejected.  A value
    with magnitude at most 1e-12 marks the result ``degenerate`` unless both
    strict signs also occur (``indefinite``).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if samples < 1000:
        raise ValueError("at least 1000 samples required")
    if grid is not None and not grid.contains_ball(radius):
        raise ValueError("probe ball must lie inside the grid box")
    rng = np.random.default_rng(seed)
    pts = np.empty((0, F.n))
    while len(pts) < samples:
        d = rng.standard_normal((samples, F.n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = radius * rng.random(samples) ** (1.0 / F.n)
        cand = d * r[:, None]
        pts = np.concatenate([pts, cand[r >= radius * 1e-3]])
    pts = pts[:samples]
    vals = F.value(pts)

    def witness(mask):
        idx = np.nonzero(mask)[0]
        return tuple(pts[idx[0]].tolist()) if idx.size else None

    pos = vals > 1e-12
    neg = vals < -1e-12
    zero = ~(pos | neg)
    if pos.any() and neg.any():
        kind = "indefinite"
    elif zero.any():
        kind = "degenerate"
    else:
        kind = "positive" if pos.all() else "negative"
    return Definiteness(kind, samples, float(np.nanmin(vals)), float(np.nanmax(vals)),
                        witness(pos), witness(neg), witness(zero))
