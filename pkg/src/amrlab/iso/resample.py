"""Cell-to-vertex resampling and the per-level resampled extraction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..amr.build import _require_valid
from ..amr.model import AMRDataset, ScalarGrid, rasterize
from .marching import marching_cubes_lattice
from .mesh import TriMesh, concat


@dataclass
class VertexGrid:
    values: np.ndarray  # (nx+1, ny+1, nz+1)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(n) for n in self.values.shape)

    def flat(self) -> np.ndarray:
        return self.values.ravel(order="F")


def _corner_sums(values: np.ndarray):
    """Sum of ``values`` over the up-to-8 cells adjacent to each vertex."""
    out = np.zeros(tuple(n + 1 for n in values.shape), dtype=np.float64)
    nx, ny, nz = values.shape
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                out[dx:dx + nx, dy:dy + ny, dz:dz + nz] += values
    return out


def resample_masked(values: np.ndarray, occupied: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertex means over occupied adjacent cells only.

    Returns ``(vertex_values, vertex_has_data)``; vertices with no occupied
    neighbour get 0.
    """
    w = occupied.astype(np.float64)
    total = _corner_sums(np.where(occupied, values, 0.0))
    count = _corner_sums(w)
    has = count > 0
    out = np.zeros_like(total)
    out[has] = total[has] / count[has]
    return out, has


def resample_to_vertices(grid: ScalarGrid) -> VertexGrid:
    """Each vertex takes the mean of its 1 to 8 adjacent cells."""
    v = grid.values
    if v.size == 0:
        raise ValueError("cannot resample an empty grid")
    out, _ = resample_masked(v, np.ones(v.shape, dtype=bool))
    return VertexGrid(out)


def fully_covered(ds: AMRDataset, level: int) -> np.ndarray:
    """Cells of ``level`` whose 8 children all exist on ``level + 1``."""
    dims = ds.level_dims(level)
    if level + 1 >= ds.num_levels:
        return np.zeros(dims, dtype=bool)
    _, occ = rasterize(ds.levels[level + 1], ds.level_dims(level + 1))
    r = ds.refinement_ratio
    return occ.reshape(dims[0], r, dims[1], r, dims[2], r).all(axis=(1, 3, 5))


def domain_box(ds: AMRDataset):
    """Physical domain ``(lo, hi)``; a coarse cell has unit size."""
    return np.zeros(3), np.asarray(ds.coarse_dims, dtype=np.float64)


def extract_resampled(ds: AMRDataset, iso: float) -> TriMesh:
    """Per-level resampling and marching cubes.

    Each level is resampled from its own cells only and contoured over the
    cells not fully covered by the next level. Vertices are never shared
    between levels, so level interfaces show cracks.
    """
    _require_valid(ds)
    meshes = []
    offset = 0
    for lev, level in enumerate(ds.levels):
        dims = ds.level_dims(lev)
        vals, occ = rasterize(level, dims)
        verts, _ = resample_masked(vals, occ)
        mask = occ & ~fully_covered(ds, lev)
        if mask.any():
            h = 1.0 / ds.refinement_ratio ** lev
            meshes.append(marching_cubes_lattice(verts, iso, spacing=h, cell_mask=mask,
                                                 id_offset=offset, level=lev))
        offset += verts.size
    return concat(meshes)


def demo_1d(values, block: int) -> dict:
    """Block-average a 1D signal, then resample the result to vertices."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0 or block < 1:
        raise ValueError("need a nonempty sequence and block >= 1")
    blocked = np.empty_like(v)
    for s in range(0, v.size, block):
        blocked[s:s + block] = v[s:s + block].mean()
    resampled = np.empty(v.size + 1)
    resampled[0], resampled[-1] = blocked[0], blocked[-1]
    resampled[1:-1] = 0.5 * (blocked[:-1] + blocked[1:])
    return {"original": v, "blocked": blocked, "resampled": resampled}


def resolution_advantage(n: int) -> float:
    """Linear resolution gain of an (n+1)-vertex lattice over n cells."""
    if n < 1:
        raise ValueError("n must be positive")
    return (n + 1) / n
