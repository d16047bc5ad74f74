"""Plain-text exports: Wavefront-style meshes and CSV loops."""
from __future__ import annotations

import numpy as np

from ..errors import Unsupported


def _num(x):
    return format(float(x), ".17g")


def write_obj(H, path):
    """Write a 3-D hypersurface as ``v x y z`` / ``f i j k`` lines (1-based)."""
    if H.n != 3:
        raise Unsupported("mesh export needs a 3-D surface; use write_loop_csv for 2-D")
    with open(path, "w") as fh:
        fh.write(f"# level {_num(H.level)}\n")
        for v in H.vertices:
            fh.write("v " + " ".join(_num(c) for c in v) + "\n")
        for f in H.facets:
            fh.write("f " + " ".join(str(int(i) + 1) for i in f) + "\n")


def read_obj(path):
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    return np.array(verts), np.array(faces, dtype=np.int64)


def write_loop_csv(H, path):
    """Write a 2-D loop as ``x,y`` rows in traversal order; closure is implicit."""
    if H.n != 2:
        raise Unsupported("loop export needs a 2-D surface; use write_obj for 3-D")
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for x, y in H.vertices:
            fh.write(f"{_num(x)},{_num(y)}\n")


def read_loop_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
