"""Level-set extraction and nested hypersurface sequences."""
from .export import read_loop_csv, read_obj, write_loop_csv, write_obj
from .geometry import icosphere, torus
from .grid import Grid
from .surface import (Definiteness, Hypersurface, HypersurfaceSequence,
                      build_sequence, extract_level_component,
                      local_definiteness_probe, select_regular_levels,
                      topology_signature)

__all__ = [
    "Grid", "Hypersurface", "HypersurfaceSequence", "Definiteness",
    "extract_level_component", "select_regular_levels", "build_sequence",
    "local_definiteness_probe", "topology_signature", "icosphere", "torus",
    "write_obj", "read_obj", "write_loop_csv", "read_loop_csv",
]
