from .dual import GAP_MODES, DualLattice, build_dual, extract_dual, hausdorff
from .marching import marching_cubes, marching_cubes_lattice, marching_tetrahedra, tetrahedralize_cube
from .mesh import (
    REGULAR,
    STITCH,
    CrackCensus,
    TriMesh,
    concat,
    euler_characteristic,
    export_obj,
    open_edge_census,
    read_obj,
)
from .resample import (
    VertexGrid,
    demo_1d,
    domain_box,
    extract_resampled,
    resample_to_vertices,
    resolution_advantage,
)

__all__ = [
    "GAP_MODES", "REGULAR", "STITCH", "CrackCensus", "DualLattice", "TriMesh", "VertexGrid",
    "build_dual", "concat", "demo_1d", "domain_box", "euler_characteristic", "export_obj",
    "extract_dual", "extract_resampled", "hausdorff", "marching_cubes", "marching_cubes_lattice",
    "marching_tetrahedra", "open_edge_census", "read_obj", "resample_to_vertices",
    "resolution_advantage", "tetrahedralize_cube",
]
