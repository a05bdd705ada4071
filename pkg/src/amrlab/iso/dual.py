"""Dual-cell extraction: cell centers become lattice nodes.

Two gap-filling strategies close the hole that opens between the coarse
and fine dual lattices:

* ``padding`` contours every level on its own dual lattice and lets the
  coarse level reach into the refined region using its redundant values.
* ``stitch`` contours the dual of the leaf cells. Around every vertex of
  the finest lattice the eight surrounding leaf cells form a hexahedron;
  where leaves of different levels meet that hexahedron is degenerate
  (repeated nodes) and acts as a stitching cell. All cells go through the
  same face-consistent marching cubes table, so the result has no cracks.

In both modes cells touching the domain boundary are extended to the
wall: an out-of-domain neighbour is replaced by its in-domain cell
projected onto the wall, so surfaces end exactly on the domain box.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation
from scipy.spatial import cKDTree

from ..amr.build import _require_valid
from ..amr.model import AMRDataset, AMRLevel, rasterize
from .marching import marching_cubes
from .mesh import REGULAR, STITCH, TriMesh, concat
from .resample import fully_covered
from .tables import CORNERS

GAP_MODES = ("padding", "stitch", "none")
_WALL_CODES = 27  # 3 states per axis: inside, clamped low, clamped high


@dataclass
class DualLattice:
    """Cell centers of one level and the hexahedra joining them."""

    points: np.ndarray  # (P, 3) physical centers of occupied cells
    values: np.ndarray  # (P,)
    cell_index: np.ndarray  # (P, 3) level index of each point
    hexes: np.ndarray  # (H, 8) point indices, corner order of the MC table

    @property
    def n_cells(self) -> int:
        return len(self.hexes)


def build_dual(level: AMRLevel, dims, cell_size: float | None = None) -> DualLattice:
    """Plain dual lattice of one level (no wall extension).

    A hexahedron exists wherever all 8 neighbouring cell centers exist,
    including across abutting patches.
    """
    h = level.cell_size if cell_size is None else cell_size
    vals, occ = rasterize(level, dims)
    idx = np.argwhere(occ.transpose(2, 1, 0))[:, ::-1]  # x-fastest
    pid = -np.ones(dims, dtype=np.int64)
    pid[idx[:, 0], idx[:, 1], idx[:, 2]] = np.arange(len(idx))
    nx, ny, nz = (d - 1 for d in dims)
    if min(nx, ny, nz) <= 0:
        hexes = np.zeros((0, 8), dtype=np.int64)
    else:
        corner = [pid[dx:dx + nx, dy:dy + ny, dz:dz + nz] for dx, dy, dz in CORNERS]
        stack = np.stack([c.transpose(2, 1, 0).ravel() for c in corner], axis=1)
        hexes = stack[(stack >= 0).all(axis=1)]
    points = (idx + 0.5) * h
    return DualLattice(points, vals[idx[:, 0], idx[:, 1], idx[:, 2]], idx, hexes)


def _extended_hexes(node_id, node_val, node_center, node_level, spacing, iso, keep_fn=None):
    """Hexahedra around every vertex of a cell lattice, walls included.

    ``node_*`` are per-cell arrays on an ``(nx, ny, nz)`` lattice whose cell
    size is ``spacing``; ``node_id < 0`` marks a missing cell. Out-of-domain
    octants are clamped and projected onto the wall. Only hexahedra whose
    8 nodes all exist and that straddle ``iso`` are returned.
    ``keep_fn(octant_levels)`` may veto further hexahedra.
    """
    dims = node_id.shape
    vshape = tuple(n + 1 for n in dims)

    def octants(arr):
        pad = np.pad(arr, [(1, 1)] * 3 + [(0, 0)] * (arr.ndim - 3), mode="edge")
        return [pad[dx:dx + vshape[0], dy:dy + vshape[1], dz:dz + vshape[2]] for dx, dy, dz in CORNERS]

    vals = octants(node_val)
    ids = octants(node_id)
    above = np.stack([v > iso for v in vals])
    exists = np.stack([i >= 0 for i in ids]).all(axis=0)
    sel = exists & above.any(axis=0) & ~above.all(axis=0)
    levels = octants(node_level)
    if keep_fn is not None:
        sel &= keep_fn(levels)
    # x-fastest vertex order keeps the output deterministic
    P = np.argwhere(sel.transpose(2, 1, 0))[:, ::-1]
    n = len(P)
    hex_val = np.empty((n, 8))
    hex_id = np.empty((n, 8), dtype=np.int64)
    hex_pos = np.empty((n, 8, 3))
    hex_lev = np.empty((n, 8), dtype=np.int64)
    centers = octants(node_center)
    pi, pj, pk = P[:, 0], P[:, 1], P[:, 2]
    for v, off in enumerate(CORNERS):
        hex_val[:, v] = vals[v][pi, pj, pk]
        hex_lev[:, v] = levels[v][pi, pj, pk]
        pos = centers[v][pi, pj, pk].copy()
        code = np.zeros(n, dtype=np.int64)
        for ax in range(3):
            cell = P[:, ax] + off[ax] - 1
            low = cell < 0
            high = cell >= dims[ax]
            clamped = low | high
            pos[clamped, ax] = P[clamped, ax] * spacing
            code += (low * 1 + high * 2) * 3 ** ax
        hex_pos[:, v] = pos
        hex_id[:, v] = ids[v][pi, pj, pk] * _WALL_CODES + code
    return hex_pos, hex_val, hex_id, hex_lev


def _level_grids(ds: AMRDataset, lev: int, id_offset: int):
    dims = ds.level_dims(lev)
    vals, occ = rasterize(ds.levels[lev], dims)
    h = ds.levels[lev].cell_size
    ids = np.full(dims, -1, dtype=np.int64)
    flat = np.arange(int(np.prod(dims)), dtype=np.int64).reshape(dims, order="F") + id_offset
    ids[occ] = flat[occ]
    centers = (np.stack(np.meshgrid(*[np.arange(d) for d in dims], indexing="ij"), axis=-1) + 0.5) * h
    return vals, occ, ids, centers, h


def _extract_levels(ds: AMRDataset, iso: float, gap_mode: str, pad_width: int | None) -> TriMesh:
    meshes = []
    offset = 0
    for lev in range(ds.num_levels):
        vals, occ, ids, centers, h = _level_grids(ds, lev, offset)
        offset += vals.size
        if not occ.any():
            continue
        outside = ~fully_covered(ds, lev)
        if gap_mode == "padding":
            if pad_width is None:
                outside[:] = True
            elif pad_width > 0 and outside.any():
                outside = binary_dilation(outside, np.ones((3, 3, 3), dtype=bool), iterations=pad_width)
        lev_arr = np.where(outside, 1, 0)

        def keep(octant_flags):
            flags = np.stack(octant_flags)
            if gap_mode == "padding":
                return flags.any(axis=0)
            return flags.all(axis=0)

        pos, val, hid, _ = _extended_hexes(ids, vals, centers, lev_arr, h, iso, keep)
        meshes.append(marching_cubes(pos, val, iso, hid, level=lev, kind=REGULAR))
    return concat(meshes)


def _extract_stitched(ds: AMRDataset, iso: float) -> TriMesh:
    top = ds.num_levels - 1
    fdims = ds.finest_dims
    leaf_level = -np.ones(fdims, dtype=np.int64)
    leaf_id = -np.ones(fdims, dtype=np.int64)
    leaf_val = np.zeros(fdims)
    leaf_center = np.zeros(fdims + (3,))
    offset = 0
    for lev in range(ds.num_levels):
        vals, occ, ids, centers, _ = _level_grids(ds, lev, offset)
        offset += vals.size
        f = ds.refinement_ratio ** (top - lev)

        def up(a):
            return a.repeat(f, 0).repeat(f, 1).repeat(f, 2) if f > 1 else a

        m = up(occ)
        leaf_level[m] = lev
        leaf_id[m] = up(ids)[m]
        leaf_val[m] = up(vals)[m]
        leaf_center[m] = up(centers)[m]
    if (leaf_id < 0).any():
        raise ValueError("the coarse level does not cover the domain")
    h = 1.0 / ds.refinement_ratio ** top
    vidx = np.stack(np.meshgrid(*[np.arange(n + 1) for n in fdims], indexing="ij"), axis=-1)

    def keep(octant_levels):
        # a hexahedron belongs to the leaf dual iff its vertex is a corner
        # of at least one of the surrounding leaves
        ok = np.zeros(vidx.shape[:3], dtype=bool)
        for lv in octant_levels:
            step = ds.refinement_ratio ** (top - lv)
            ok |= (vidx % step[..., None] == 0).all(axis=-1)
        return ok

    pos, val, hid, lev = _extended_hexes(leaf_id, leaf_val, leaf_center, leaf_level, h, iso, keep)
    kind = np.where(lev.min(axis=1) != lev.max(axis=1), STITCH, REGULAR)
    return marching_cubes(pos, val, iso, hid, level=lev.max(axis=1), kind=kind)


def extract_dual(ds: AMRDataset, iso: float, gap_mode: str = "padding",
                 pad_width: int | None = None) -> TriMesh:
    """Dual-cell iso-surface with the given gap-filling mode.

    ``gap_mode`` is ``padding``, ``stitch`` or ``none`` (coarse dual cells
    stop where the refined region begins, leaving the gap open).

    With padding, a coarse dual cell is kept when one of its points lies
    within ``pad_width`` coarse cells of the unrefined region. ``0`` keeps
    only cells straddling the refinement boundary; ``None`` (default) uses
    all redundant coarse data, so the coarse surface is closed under the
    fine one.
    """
    if pad_width is not None and pad_width < 0:
        raise ValueError("pad_width must be >= 0 or None")
    if gap_mode not in GAP_MODES:
        raise ValueError(f"gap_mode must be one of {GAP_MODES}, got {gap_mode!r}")
    _require_valid(ds)
    if gap_mode == "stitch":
        if ds.refinement_ratio != 2:
            raise ValueError("stitching requires a refinement ratio of 2")
        return _extract_stitched(ds, iso)
    return _extract_levels(ds, iso, gap_mode, pad_width)


def hausdorff(a: TriMesh, b: TriMesh) -> float:
    """Symmetric Hausdorff distance between the vertex sets of two meshes."""
    if a.n_vertices == 0 or b.n_vertices == 0:
        return 0.0 if a.n_vertices == b.n_vertices else float("inf")
    d_ab = cKDTree(b.vertices).query(a.vertices)[0].max()
    d_ba = cKDTree(a.vertices).query(b.vertices)[0].max()
    return float(max(d_ab, d_ba))
