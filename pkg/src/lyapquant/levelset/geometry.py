"""Mesh geometry: containment by ray parity, normals, diameter, topology."""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist

RAY_2D = np.array([1.0, 0.3333])
RAY_3D = np.array([1.0, 0.3333, 0.7777])
EDGE_EPS = 1e-12

EXACT_DIAMETER_MAX = 4096
SWEEPS = 20

# cap on (points x facets) pairs evaluated at once inside one bin
_WORK_CHUNK = 2_000_000


def _ray_frame(n):
    d = RAY_2D if n == 2 else RAY_3D
    d = d / np.linalg.norm(d)
    if n == 2:
        return d, np.array([[-d[1]], [d[0]]])
    # orthonormal complement of d
    q, _ = np.linalg.qr(np.column_stack([d, np.eye(3)[:, :2]]))
    return d, q[:, 1:3]


class RayParity:
    """Point-in-region test for a closed polyline (2-D) or triangle mesh (3-D).

    A ray is cast from every query point along a fixed direction and facet
    crossings are counted; odd parity means inside.  Facets are bucketed by
    their projection onto the plane orthogonal to the ray so each query only
    visits nearby facets.
    """

    def __init__(self, vertices, facets):
        vertices = np.asarray(vertices, dtype=float)
        facets = np.asarray(facets, dtype=np.int64)
        self.n = vertices.shape[1]
        self.ray, self.basis = _ray_frame(self.n)
        proj = vertices @ self.basis
        depth = vertices @ self.ray
        self.fproj = proj[facets]                  # (k, n, n-1)
        self.fdepth = depth[facets]                # (k, n)
        k = len(facets)
        self.lo = proj.min(axis=0)
        self.hi = proj.max(axis=0)
        if self.n == 2:
            nb = int(np.clip(2 * np.sqrt(k), 1, 1024))
        else:
            nb = int(np.clip(np.sqrt(k / 4), 1, 128))
        self.nbins = nb
        width = np.where(self.hi > self.lo, self.hi - self.lo, 1.0)
        self.scale = nb / width
        fmin = self._bin_coord(self.fproj.min(axis=1))
        fmax = self._bin_coord(self.fproj.max(axis=1))
        span = fmax - fmin + 1
        counts = np.prod(span, axis=1)
        owner = np.repeat(np.arange(k), counts)
        within = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        if self.n == 2:
            bins = fmin[owner, 0] + within
        else:
            sx = span[owner, 0]
            bins = (fmin[owner, 0] + within % sx) * nb + fmin[owner, 1] + within // sx
        order = np.argsort(bins, kind="stable")
        self.bin_facets = owner[order]
        total = nb ** (self.n - 1)
        self.bin_start = np.searchsorted(bins[order], np.arange(total + 1))

    def _bin_coord(self, p):
        return np.clip(((p - self.lo) * self.scale).astype(np.int64), 0, self.nbins - 1)

    def _bin_index(self, p):
        c = self._bin_coord(p)
        return c[:, 0] if self.n == 2 else c[:, 0] * self.nbins + c[:, 1]

    def contains(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        shape = points.shape[:-1]
        points = points.reshape(-1, self.n)
        proj = points @ self.basis
        depth = points @ self.ray
        result = np.zeros(len(points), dtype=bool)
        inbox = np.all((proj >= self.lo) & (proj <= self.hi), axis=1)
        idx = np.nonzero(inbox)[0]
        if idx.size:
            bins = self._bin_index(proj[idx])
            order = np.argsort(bins, kind="stable")
            idx, bins = idx[order], bins[order]
            cuts = np.nonzero(np.diff(bins))[0] + 1
            for group in np.split(np.arange(len(idx)), cuts):
                b = bins[group[0]]
                facets = self.bin_facets[self.bin_start[b]:self.bin_start[b + 1]]
                if facets.size == 0:
                    continue
                step = max(1, _WORK_CHUNK // facets.size)
                for s in range(0, len(group), step):
                    pts = idx[group[s:s + step]]
                    hits = self._crossings(proj[pts], depth[pts], facets)
                    result[pts] = hits % 2 == 1
        return result.reshape(shape)

    def _crossings(self, proj, depth, facets):
        fp = self.fproj[facets]
        fd = self.fdepth[facets]
        if self.n == 2:
            ua, ub = fp[None, :, 0, 0], fp[None, :, 1, 0]
            u = proj[:, :1]
            straddle = (ua > u) != (ub > u)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (u - ua) / (ub - ua)
                s = fd[None, :, 0] + t * (fd[None, :, 1] - fd[None, :, 0])
            return np.sum(straddle & (s > depth[:, None] - EDGE_EPS), axis=1)
        a, b, c = fp[:, 0], fp[:, 1], fp[:, 2]
        q = proj[:, None, :]

        def edge(p0, p1):
            return ((p1[..., 0] - p0[..., 0]) * (q[..., 1] - p0[..., 1])
                    - (p1[..., 1] - p0[..., 1]) * (q[..., 0] - p0[..., 0]))

        area = ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))[None, :]
        wa, wb, wc = edge(b, c), edge(c, a), edge(a, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            la, lb, lc = wa / area, wb / area, wc / area
            s = la * fd[None, :, 0] + lb * fd[None, :, 1] + lc * fd[None, :, 2]
        inside = (la >= 0) & (lb >= 0) & (lc >= 0) & (area != 0)
        return np.sum(inside & (s > depth[:, None] - EDGE_EPS), axis=1)


# -- orientation, normals, measures ---------------------------------------------

def signed_measure(vertices, facets) -> float:
    """Signed area (2-D directed segments) or signed volume (3-D triangles)."""
    v = np.asarray(vertices, dtype=float)
    f = np.asarray(facets)
    if v.shape[1] == 2:
        a, b = v[f[:, 0]], v[f[:, 1]]
        return float(0.5 * np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    return float(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c))) / 6.0)


def inward_vertex_normals(vertices, facets) -> np.ndarray:
    """Unit normals pointing into the positively oriented interior.

    2-D segments must have the interior on their left; 3-D triangles must be
    wound with right-hand normals pointing outward.
    """
    v = np.asarray(vertices, dtype=float)
    f = np.asarray(facets)
    acc = np.zeros_like(v)
    if v.shape[1] == 2:
        d = v[f[:, 1]] - v[f[:, 0]]
        length = np.linalg.norm(d, axis=1, keepdims=True)
        length[length == 0] = 1.0
        left = np.column_stack([-d[:, 1], d[:, 0]]) / length
        np.add.at(acc, f[:, 0], left)
        np.add.at(acc, f[:, 1], left)
    else:
        cr = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        for k in range(3):
            np.add.at(acc, f[:, k], -cr)
    norm = np.linalg.norm(acc, axis=1, keepdims=True)
    norm[norm == 0] = 1.0
    return acc / norm


def facet_normals(vertices, facets) -> np.ndarray:
    """Inward unit normal of every facet (same orientation rules as above)."""
    v = np.asarray(vertices, dtype=float)
    f = np.asarray(facets)
    if v.shape[1] == 2:
        d = v[f[:, 1]] - v[f[:, 0]]
        nrm = np.column_stack([-d[:, 1], d[:, 0]])
    else:
        nrm = -np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    length = np.linalg.norm(nrm, axis=1, keepdims=True)
    length[length == 0] = 1.0
    return nrm / length


def diameter(vertices) -> float:
    """Max pairwise vertex distance.

    Exact for up to 4096 vertices; above that an iterated farthest-point
    sweep (at most 20 rounds), which never returns less than half the true
    diameter.
    """
    v = np.asarray(vertices, dtype=float)
    if len(v) < 2:
        return 0.0
    if len(v) <= EXACT_DIAMETER_MAX:
        return float(pdist(v).max())
    best = 0.0
    current = 0
    for _ in range(SWEEPS):
        dist = np.linalg.norm(v - v[current], axis=1)
        far = int(np.argmax(dist))
        if dist[far] <= best:
            break
        best = float(dist[far])
        current = far
    return best


def max_edge_length(vertices, facets) -> float:
    v = np.asarray(vertices, dtype=float)
    f = np.asarray(facets)
    k = f.shape[1]
    return float(max(np.linalg.norm(v[f[:, i]] - v[f[:, (i + 1) % k]], axis=1).max()
                     for i in range(k if k > 2 else 1)))


# -- topology ---------------------------------------------------------------------

def undirected_edges(facets) -> np.ndarray:
    f = np.asarray(facets)
    if f.shape[1] == 2:
        e = f
    else:
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    return np.unique(np.sort(e, axis=1), axis=0)


def euler_characteristic(nverts, facets) -> int:
    """V - E for a polyline, V - E + T for a triangle mesh."""
    f = np.asarray(facets)
    e = len(undirected_edges(f))
    if f.shape[1] == 2:
        return int(nverts - e)
    return int(nverts - e + len(f))


def is_closed(nverts, facets) -> bool:
    """Closed and consistently oriented.

    Polyline: every vertex has exactly one outgoing and one incoming segment.
    Triangle mesh: every directed edge occurs once and its reverse occurs once.
    """
    f = np.asarray(facets)
    if len(f) == 0:
        return False
    if f.shape[1] == 2:
        out = np.bincount(f[:, 0], minlength=nverts)
        inc = np.bincount(f[:, 1], minlength=nverts)
        used = (out + inc) > 0
        return bool(np.all(out[used] == 1) and np.all(inc[used] == 1))
    de = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    m = nverts + 1
    fwd = de[:, 0] * m + de[:, 1]
    rev = de[:, 1] * m + de[:, 0]
    if len(np.unique(fwd)) != len(fwd):
        return False
    return bool(np.all(np.isin(rev, fwd)))


def order_loop(segments) -> np.ndarray:
    """Vertex indices of a single closed loop in traversal order."""
    segments = np.asarray(segments)
    nxt = dict(zip(segments[:, 0].tolist(), segments[:, 1].tolist()))
    start = int(segments[0, 0])
    loop = [start]
    v = nxt[start]
    while v != start:
        loop.append(v)
        v = nxt[v]
        if len(loop) > len(segments):
            raise ValueError("segments do not form a single loop")
    return np.array(loop)


# -- distances ----------------------------------------------------------------------

def point_segment_distance(p, a, b) -> np.ndarray:
    ab = b - a
    denom = np.einsum("...i,...i->...", ab, ab)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.einsum("...i,...i->...", p - a, ab) / denom
    t = np.clip(np.nan_to_num(t), 0.0, 1.0)
    return np.linalg.norm(p - (a + t[..., None] * ab), axis=-1)


def point_triangle_distance(p, a, b, c) -> np.ndarray:
    n = np.cross(b - a, c - a)
    nn = np.einsum("...i,...i->...", n, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.einsum("...i,...i->...", p - a, n) / nn
        foot = p - h[..., None] * n
        # barycentric sign tests of the foot point
        s1 = np.einsum("...i,...i->...", np.cross(b - a, foot - a), n)
        s2 = np.einsum("...i,...i->...", np.cross(c - b, foot - b), n)
        s3 = np.einsum("...i,...i->...", np.cross(a - c, foot - c), n)
    inside = (s1 >= 0) & (s2 >= 0) & (s3 >= 0) & (nn > 0)
    plane = np.abs(h) * np.sqrt(nn)
    edges = np.minimum(np.minimum(point_segment_distance(p, a, b),
                                  point_segment_distance(p, b, c)),
                       point_segment_distance(p, c, a))
    return np.where(inside, np.nan_to_num(plane, nan=np.inf), edges)


# -- reference meshes ----------------------------------------------------------------

def icosphere(subdivisions: int = 2, radius: float = 1.0):
    """Triangulated sphere, outward winding.  Returns ``(vertices, triangles)``."""
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return radius * np.array(verts), np.array(faces, dtype=np.int64)


def torus(major: float = 1.0, minor: float = 0.4, nu: int = 24, nv: int = 12):
    """Triangulated torus around the z axis, outward winding."""
    u = 2 * np.pi * np.arange(nu) / nu
    v = 2 * np.pi * np.arange(nv) / nv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = major + minor * np.cos(vv)
    verts = np.stack([ring * np.cos(uu), ring * np.sin(uu), minor * np.sin(vv)], axis=-1).reshape(-1, 3)
    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    a = i * nv + j
    b = ((i + 1) % nu) * nv + j
    c = ((i + 1) % nu) * nv + (j + 1) % nv
    d = i * nv + (j + 1) % nv
    faces = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3),
                            np.stack([a, c, d], -1).reshape(-1, 3)])
    return verts, faces
