"""Marching cubes over arbitrary hexahedra and marching tetrahedra.

Both take per-cell corner positions and values plus optional global node
ids. Crossing vertices are keyed by the (sorted) node-id pair of their
edge, so cells sharing an edge share the vertex exactly, and the crossing
is always interpolated from the lower id towards the higher one.

A node is inside when its value is strictly greater than ``iso``.
Triangles are wound so their normals point away from the inside region.
"""
from __future__ import annotations

import numpy as np

from .mesh import REGULAR, TriMesh, drop_degenerate
from .tables import CORNERS, EDGES, TETRA_EDGES, TRI_TABLE

_TRI = np.full((256, 15), -1, dtype=np.int64)
for _case, _row in enumerate(TRI_TABLE):
    _TRI[_case, :len(_row)] = _row
_EDGE_A = np.array([a for a, _ in EDGES])
_EDGE_B = np.array([b for _, b in EDGES])
_CORNER_OFFSETS = np.array(CORNERS, dtype=np.int64)
T_MIN = 1e-4


def _tet_table():
    """16-case table: per inside-mask, the crossed tet edges in polygon order."""
    table = []
    edge_index = {e: n for n, e in enumerate(TETRA_EDGES)}

    def eid(a, b):
        return edge_index[(min(a, b), max(a, b))]

    for mask in range(16):
        inside = [v for v in range(4) if mask >> v & 1]
        outside = [v for v in range(4) if not mask >> v & 1]
        if len(inside) in (1, 3):
            lone = inside if len(inside) == 1 else outside
            rest = outside if len(inside) == 1 else inside
            table.append(tuple(eid(lone[0], r) for r in rest))
        elif len(inside) == 2:
            (a, b), (c, d) = inside, outside
            table.append((eid(a, c), eid(a, d), eid(b, d), eid(b, c)))
        else:
            table.append(())
    return tuple(table)


TET_TABLE = _tet_table()


def _crossings(pos, val, ids, cell, ca, cb, iso):
    """Vertex keys and positions for crossings on corner pairs ``(ca, cb)`` of ``cell``.

    The edge parameter is clamped to ``[T_MIN, 1 - T_MIN]``: crossings that
    crowd a node stay distinct points on their own edges, which keeps every
    triangle at nonzero area without changing the mesh connectivity.
    """
    ia = ids[cell, ca]
    ib = ids[cell, cb]
    swap = ib < ia
    lo_c = np.where(swap, cb, ca)
    hi_c = np.where(swap, ca, cb)
    v0 = val[cell, lo_c]
    v1 = val[cell, hi_c]
    p0 = pos[cell, lo_c]
    p1 = pos[cell, hi_c]
    denom = v1 - v0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom != 0.0, (iso - v0) / denom, 0.5)
    t = np.clip(t, T_MIN, 1.0 - T_MIN)
    p = p0 + t[:, None] * (p1 - p0)
    key = np.stack([np.minimum(ia, ib), np.maximum(ia, ib)], axis=1)
    return key, p


def _assemble(keys, points, level, kind) -> TriMesh:
    """``keys``/``points`` hold 3 entries per triangle, in triangle order.

    ``level`` and ``kind`` are scalars or per-triangle arrays.
    """
    if len(keys) == 0:
        return TriMesh()
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    verts = points[first]
    tris = inverse.reshape(-1, 3).astype(np.int64)
    n = len(tris)
    lev = np.broadcast_to(np.asarray(level, dtype=np.int64), (n,)).copy()
    knd = np.broadcast_to(np.asarray(kind, dtype=np.int8), (n,)).copy()
    return drop_degenerate(TriMesh(verts, tris, lev, knd))


def _per_cell(attr, owner):
    attr = np.asarray(attr)
    return attr[owner] if attr.ndim else attr


def _default_ids(n_cells, n_corners):
    return np.arange(n_cells * n_corners, dtype=np.int64).reshape(n_cells, n_corners)


def marching_cubes(points, values, iso: float, node_ids=None, level: int = 0, kind: int = REGULAR) -> TriMesh:
    """Contour hexahedral cells.

    ``points`` is ``(H, 8, 3)``, ``values`` ``(H, 8)``, corners in the
    numbering of :mod:`amrlab.iso.tables`. Corners of a cell may coincide
    (degenerate hexahedra); zero-area triangles are dropped. ``level`` and
    ``kind`` may be per-cell arrays.
    """
    pos = np.asarray(points, dtype=np.float64).reshape(-1, 8, 3)
    val = np.asarray(values, dtype=np.float64).reshape(-1, 8)
    ids = _default_ids(len(val), 8) if node_ids is None else np.asarray(node_ids, dtype=np.int64).reshape(-1, 8)
    outside = ~(val > iso)
    case = (outside.astype(np.int64) << np.arange(8)).sum(axis=1)
    active = np.nonzero((case != 0) & (case != 255))[0]
    if len(active) == 0:
        return TriMesh()
    rows = _TRI[case[active]]  # (A, 15)
    cell_rep = np.repeat(active, 15).reshape(-1, 15)
    valid = rows >= 0
    edges = rows[valid]
    cell = cell_rep[valid]
    key, p = _crossings(pos, val, ids, cell, _EDGE_A[edges], _EDGE_B[edges], iso)
    owner = cell[::3]
    return _assemble(key, p, _per_cell(level, owner), _per_cell(kind, owner))


def marching_tetrahedra(points, values, iso: float, node_ids=None, level: int = 0, kind: int = REGULAR) -> TriMesh:
    """Contour tetrahedra: ``points`` ``(T, 4, 3)``, ``values`` ``(T, 4)``."""
    pos = np.asarray(points, dtype=np.float64).reshape(-1, 4, 3)
    val = np.asarray(values, dtype=np.float64).reshape(-1, 4)
    ids = _default_ids(len(val), 4) if node_ids is None else np.asarray(node_ids, dtype=np.int64).reshape(-1, 4)
    inside = val > iso
    mask = (inside.astype(np.int64) << np.arange(4)).sum(axis=1)
    ea = np.array([a for a, _ in TETRA_EDGES])
    eb = np.array([b for _, b in TETRA_EDGES])
    keys, pts, owners = [], [], []
    for m, poly in enumerate(TET_TABLE):
        if not poly:
            continue
        cells = np.nonzero(mask == m)[0]
        if not len(cells):
            continue
        tris = [poly[:3]] if len(poly) == 3 else [(poly[0], poly[1], poly[2]), (poly[0], poly[2], poly[3])]
        for tri in tris:
            for e in tri:
                k, p = _crossings(pos, val, ids, cells, np.full(len(cells), ea[e]), np.full(len(cells), eb[e]), iso)
                keys.append(k)
                pts.append(p)
            owners.append(cells)
    if not keys:
        return TriMesh()
    # regroup per triangle: each (tri) contributed three consecutive arrays
    k3 = [np.stack(keys[i:i + 3], axis=1) for i in range(0, len(keys), 3)]
    p3 = [np.stack(pts[i:i + 3], axis=1) for i in range(0, len(pts), 3)]
    keys = np.concatenate(k3)  # (N, 3, 2)
    pts = np.concatenate(p3)  # (N, 3, 3)
    owner = np.concatenate(owners)
    # orient: normal must point from inside corners towards outside corners
    ins = inside[owner][:, :, None]
    c_in = (pos[owner] * ins).sum(1) / np.maximum(ins.sum(1), 1)
    c_out = (pos[owner] * ~ins).sum(1) / np.maximum((~ins).sum(1), 1)
    normal = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
    flip = np.einsum("ij,ij->i", normal, c_out - c_in) < 0
    keys[flip] = keys[flip][:, ::-1]
    pts[flip] = pts[flip][:, ::-1]
    return _assemble(keys.reshape(-1, 2), pts.reshape(-1, 3), _per_cell(level, owner), _per_cell(kind, owner))


def lattice_hexes(shape, cells=None):
    """Corner lattice indices ``(H, 8, 3)`` for the cells of a vertex lattice.

    ``shape`` is the vertex-lattice shape; ``cells`` an optional ``(H, 3)``
    array of lower-corner indices (defaults to all cells, x-fastest).
    """
    if cells is None:
        nx, ny, nz = (s - 1 for s in shape)
        k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
        cells = np.stack([i.ravel(), j.ravel(), k.ravel()], axis=1)
    return cells[:, None, :] + _CORNER_OFFSETS[None, :, :]


def marching_cubes_lattice(vertex_values, iso: float, origin=(0.0, 0.0, 0.0), spacing: float = 1.0,
                           cell_mask=None, id_offset: int = 0, level: int = 0, kind: int = REGULAR) -> TriMesh:
    """Marching cubes on a regular vertex lattice.

    ``cell_mask`` (shape = lattice shape - 1) selects which cells to contour.
    """
    vals = np.asarray(vertex_values, dtype=np.float64)
    shape = vals.shape
    if cell_mask is None:
        cell_mask = np.ones(tuple(s - 1 for s in shape), dtype=bool)
    # pre-filter cells whose corners are all on one side
    above = vals > iso
    any_above = np.zeros(cell_mask.shape, dtype=bool)
    all_above = np.ones(cell_mask.shape, dtype=bool)
    for dx, dy, dz in CORNERS:
        a = above[dx:dx + cell_mask.shape[0], dy:dy + cell_mask.shape[1], dz:dz + cell_mask.shape[2]]
        any_above |= a
        all_above &= a
    sel = cell_mask & any_above & ~all_above
    i, j, k = np.nonzero(sel.transpose(2, 1, 0))[::-1]  # x-fastest cell order
    cells = np.stack([i, j, k], axis=1)
    corners = lattice_hexes(shape, cells)
    flat = np.ravel_multi_index((corners[..., 0], corners[..., 1], corners[..., 2]), shape, order="F")
    pos = np.asarray(origin, dtype=np.float64) + spacing * corners
    return marching_cubes(pos, vals.ravel(order="F")[flat], iso, flat + id_offset, level, kind)


def tetrahedralize_cube(points, values, node_ids=None):
    """Split hexahedra into the six tetrahedra of :data:`CUBE_TETS`."""
    from .tables import CUBE_TETS

    pos = np.asarray(points, dtype=np.float64).reshape(-1, 8, 3)
    val = np.asarray(values, dtype=np.float64).reshape(-1, 8)
    ids = _default_ids(len(val), 8) if node_ids is None else np.asarray(node_ids).reshape(-1, 8)
    tets = np.array(CUBE_TETS)
    return (pos[:, tets].reshape(-1, 4, 3), val[:, tets].reshape(-1, 4), ids[:, tets].reshape(-1, 4))

