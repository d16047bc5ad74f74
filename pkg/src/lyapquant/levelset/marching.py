"""Vectorized marching squares / marching cubes with linear edge interpolation.

Both extractors key output vertices by the grid edge they lie on, so
neighbouring cells share vertices and the result is an indexed mesh.
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _mc_tables

# -- marching squares tables ---------------------------------------------------

# corner offsets (di, dj) and local edges as (corner, corner)
_SQ_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))
_SQ_EDGES = ((0, 1), (1, 2), (3, 2), (0, 3))


def _edge_mid(e):
    a, b = _SQ_EDGES[e]
    return (np.add(_SQ_CORNERS[a], _SQ_CORNERS[b])) / 2.0


def _orient(ea, eb, below_point):
    p, q = _edge_mid(ea), _edge_mid(eb)
    d, r = q - p, np.asarray(below_point) - p
    return (ea, eb) if d[0] * r[1] - d[1] * r[0] > 0 else (eb, ea)


def _corner_edges(c):
    return [e for e, (a, b) in enumerate(_SQ_EDGES) if c in (a, b)]


def _build_square_table():
    # rows 0..15: plain cases; rows 16+case: saddle with the centre below level
    table = np.full((32, 2, 2), -1, dtype=np.int64)
    count = np.zeros(32, dtype=np.int64)
    center = (0.5, 0.5)
    for case in range(16):
        above = [(case >> c) & 1 for c in range(4)]
        crossing = [e for e, (a, b) in enumerate(_SQ_EDGES) if above[a] != above[b]]
        if not crossing:
            continue
        if len(crossing) == 2:
            below = [c for c in range(4) if not above[c]][0]
            table[case, 0] = _orient(*crossing, _SQ_CORNERS[below])
            count[case] = 1
            continue
        for center_below, row in ((False, case), (True, case + 16)):
            # isolated corners are those whose class differs from the centre
            isolated = [c for c in range(4) if bool(above[c]) == center_below]
            for s, c in enumerate(isolated):
                ref = _SQ_CORNERS[c] if not above[c] else center
                table[row, s] = _orient(*_corner_edges(c), ref)
            count[row] = len(isolated)
    return table, count


_SQ_TABLE, _SQ_COUNT = _build_square_table()
_SADDLE_CASES = (5, 10)


def _interpolate(edge_ids, values, axes, level):
    """Vertex positions for global edge ids (node_linear * n + axis)."""
    n = len(axes)
    shape = values.shape
    node = edge_ids // n
    axis = edge_ids % n
    idx = np.array(np.unravel_index(node, shape))
    idx2 = idx.copy()
    idx2[axis, np.arange(len(axis))] += 1
    v0 = values[tuple(idx)]
    v1 = values[tuple(idx2)]
    t = (level - v0) / (v1 - v0)
    pos = np.stack([axes[k][idx[k]] for k in range(n)], axis=-1)
    end = np.stack([axes[k][idx2[k]] for k in range(n)], axis=-1)
    rows = np.arange(len(axis))
    pos[rows, axis] = pos[rows, axis] + t * (end[rows, axis] - pos[rows, axis])
    return pos


def _index_vertices(edge_ids, values, axes, level):
    unique, inverse = np.unique(edge_ids, return_inverse=True)
    vertices = _interpolate(unique, values, axes, level)
    # a node lying exactly on the level yields one vertex per incident crossing
    # edge, all at the node; weld them and drop the collapsed facets
    vertices, weld = np.unique(vertices, axis=0, return_inverse=True)
    facets = weld.ravel()[inverse].reshape(edge_ids.shape)
    k = facets.shape[1]
    distinct = np.all([facets[:, i] != facets[:, (i + 1) % k] for i in range(k)], axis=0)
    return vertices, facets[distinct]


def marching_squares(values, axes, level, center_value=None):
    """Extract the polyline ``F = level`` from node samples ``values``.

    Parameters
    ----------
    values : (nx+1, ny+1) array of F at grid nodes.
    axes : pair of 1-D node coordinate arrays.
    level : iso-value.
    center_value : callable taking an (m, 2) array of cell centres and
        returning F there; used to split saddle cells.  Defaults to the mean
        of the four corners.

    Returns
    -------
    vertices : (m, 2) array.
    segments : (k, 2) vertex indices, directed so that the region
        ``F < level`` lies on the left.
    """
    values = np.asarray(values, dtype=float)
    above = values >= level
    case = (above[:-1, :-1] * 1 + above[1:, :-1] * 2
            + above[1:, 1:] * 4 + above[:-1, 1:] * 8)
    ci, cj = np.nonzero((case != 0) & (case != 15))
    cases = case[ci, cj].astype(np.int64)

    saddle = np.isin(cases, _SADDLE_CASES)
    if saddle.any():
        si, sj = ci[saddle], cj[saddle]
        if center_value is None:
            centre = 0.25 * (values[si, sj] + values[si + 1, sj]
                             + values[si + 1, sj + 1] + values[si, sj + 1])
        else:
            pts = np.stack([0.5 * (axes[0][si] + axes[0][si + 1]),
                            0.5 * (axes[1][sj] + axes[1][sj + 1])], axis=-1)
            centre = np.asarray(center_value(pts), dtype=float)
        cases[saddle] += 16 * (centre < level)

    ny1 = values.shape[1]
    # global edge ids of the four local edges of each active cell
    local = np.stack([
        (ci * ny1 + cj) * 2 + 0,
        ((ci + 1) * ny1 + cj) * 2 + 1,
        (ci * ny1 + cj + 1) * 2 + 0,
        (ci * ny1 + cj) * 2 + 1,
    ], axis=-1)
    segs = []
    for slot in range(2):
        has = _SQ_COUNT[cases] > slot
        rows = np.nonzero(has)[0]
        ends = _SQ_TABLE[cases[rows], slot]
        segs.append(np.take_along_axis(local[rows], ends, axis=1))
    edge_ids = np.concatenate(segs) if segs else np.empty((0, 2), dtype=np.int64)
    if edge_ids.size == 0:
        return np.empty((0, 2)), np.empty((0, 2), dtype=np.int64)
    return _index_vertices(edge_ids, values, axes, level)


# -- marching cubes -------------------------------------------------------------

def _build_cube_table():
    tri = np.full((256, 15), -1, dtype=np.int64)
    for case, row in enumerate(_mc_tables.TRIANGLES):
        tri[case, :len(row)] = row
    count = (tri >= 0).sum(axis=1) // 3
    # local edge -> (node offset, axis)
    offset = np.zeros((12, 3), dtype=np.int64)
    axis = np.zeros(12, dtype=np.int64)
    for e, (a, b) in enumerate(_mc_tables.EDGES):
        ca, cb = np.array(_mc_tables.CORNERS[a]), np.array(_mc_tables.CORNERS[b])
        axis[e] = int(np.nonzero(ca != cb)[0][0])
        offset[e] = np.minimum(ca, cb)
    return tri.reshape(256, 5, 3), count, offset, axis


_MC_TRI, _MC_COUNT, _MC_OFFSET, _MC_AXIS = _build_cube_table()


def marching_cubes(values, axes, level):
    """Extract the triangle mesh ``F = level`` from 3-D node samples.

    Returns ``(vertices, triangles)``; triangles index into vertices and are
    wound so that right-hand normals point away from ``F < level``.
    Ambiguous faces are resolved by the fixed table, so the caller should
    verify closedness of the component it uses.
    """
    values = np.asarray(values, dtype=float)
    below = values < level
    case = np.zeros(tuple(s - 1 for s in values.shape), dtype=np.int64)
    for c, (di, dj, dk) in enumerate(_mc_tables.CORNERS):
        sl = below[di:di + case.shape[0], dj:dj + case.shape[1], dk:dk + case.shape[2]]
        case |= sl.astype(np.int64) << c
    cells = np.nonzero((case != 0) & (case != 255))
    cases = case[cells]
    cells = np.stack(cells, axis=-1)
    ntri = _MC_COUNT[cases]
    if ntri.sum() == 0:
        return np.empty((0, 3)), np.empty((0, 3), dtype=np.int64)

    slots = np.arange(5)
    cell_of, slot_of = np.nonzero(slots[None, :] < ntri[:, None])
    local = _MC_TRI[cases[cell_of], slot_of]          # (t, 3) local edges
    nodes = cells[cell_of][:, None, :] + _MC_OFFSET[local]
    linear = np.ravel_multi_index(tuple(np.moveaxis(nodes, -1, 0)), values.shape)
    edge_ids = linear * 3 + _MC_AXIS[local]
    # the table winds triangles with normals toward the below region; flip so
    # that, as in 2-D, the below region is the positively oriented interior
    return _index_vertices(edge_ids[:, ::-1], values, axes, level)


# -- components ---------------------------------------------------------------

def facet_components(nverts, facets):
    """Label connected components of an indexed mesh.

    Returns ``(ncomp, vertex_labels)``.
    """
    facets = np.asarray(facets)
    k = facets.shape[1]
    a = np.concatenate([facets[:, i] for i in range(k)])
    b = np.concatenate([facets[:, (i + 1) % k] for i in range(k)])
    adj = coo_matrix((np.ones(len(a)), (a, b)), shape=(nverts, nverts))
    return connected_components(adj, directed=False)
