"""Triangle meshes, open-edge (crack) census and OBJ export."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

REGULAR = 0
STITCH = 1
KIND_NAMES = {REGULAR: "regular", STITCH: "stitch"}
DEGENERATE_AREA = 1e-12


@dataclass
class TriMesh:
    vertices: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    triangles: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))
    tri_level: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    tri_kind: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def areas(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)

    def normals(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        return np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])


def concat(meshes) -> TriMesh:
    """Ordered concatenation; vertex indices are offset, nothing is welded."""
    meshes = [m for m in meshes if m.n_triangles or m.n_vertices]
    if not meshes:
        return TriMesh()
    offsets = np.cumsum([0] + [m.n_vertices for m in meshes[:-1]])
    return TriMesh(
        np.concatenate([m.vertices for m in meshes]),
        np.concatenate([m.triangles + o for m, o in zip(meshes, offsets)]),
        np.concatenate([m.tri_level for m in meshes]),
        np.concatenate([m.tri_kind for m in meshes]),
    )


def drop_degenerate(mesh: TriMesh, eps: float = DEGENERATE_AREA) -> TriMesh:
    t = mesh.triangles
    if not len(t):
        return mesh
    keep = (t[:, 0] != t[:, 1]) & (t[:, 1] != t[:, 2]) & (t[:, 0] != t[:, 2])
    keep &= mesh.areas() > eps
    return TriMesh(mesh.vertices, t[keep], mesh.tri_level[keep], mesh.tri_kind[keep])


def weld(vertices: np.ndarray, tol: float) -> np.ndarray:
    """Label vertices so that points closer than ``tol`` share a label."""
    n = len(vertices)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    pairs = cKDTree(vertices).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        # exact duplicates are caught by query_pairs as well, so labels are unique
        return np.arange(n, dtype=np.int64)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels.astype(np.int64)


def _welded_edges(mesh: TriMesh, tol: float):
    labels = weld(mesh.vertices, tol)
    t = labels[mesh.triangles] if mesh.n_triangles else np.zeros((0, 3), dtype=np.int64)
    keep = (t[:, 0] != t[:, 1]) & (t[:, 1] != t[:, 2]) & (t[:, 0] != t[:, 2])
    t = t[keep]
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    e.sort(axis=1)
    edges, counts = np.unique(e, axis=0, return_counts=True) if len(e) else (np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=np.int64))
    return labels, t, edges, counts


@dataclass(frozen=True)
class CrackCensus:
    interface_open_edges: int
    domain_open_edges: int
    total_open_edge_length: float

    @property
    def open_edges(self) -> int:
        return self.interface_open_edges + self.domain_open_edges

    def as_dict(self) -> dict:
        return {
            "interface_open_edges": self.interface_open_edges,
            "domain_open_edges": self.domain_open_edges,
            "total_open_edge_length": self.total_open_edge_length,
        }


def open_edge_census(mesh: TriMesh, domain, eps: float = 1e-9) -> CrackCensus:
    """Count edges used by exactly one triangle after welding.

    ``domain`` is ``(lo, hi)`` corner points of the axis-aligned domain box.
    Vertices are welded at ``1e-9 * diagonal``. An open edge whose two
    endpoints both lie within ``eps`` of the box boundary is a domain edge;
    every other open edge is an interface edge (a crack).
    """
    lo, hi = (np.asarray(v, dtype=np.float64) for v in domain)
    tol = 1e-9 * float(np.linalg.norm(hi - lo))
    if mesh.n_triangles == 0:
        return CrackCensus(0, 0, 0.0)
    labels, _, edges, counts = _welded_edges(mesh, tol)
    open_e = edges[counts == 1]
    if len(open_e) == 0:
        return CrackCensus(0, 0, 0.0)
    # representative coordinate per label
    rep = np.zeros((labels.max() + 1, 3))
    rep[labels] = mesh.vertices
    p, q = rep[open_e[:, 0]], rep[open_e[:, 1]]

    def near_wall(x):
        return np.min(np.minimum(np.abs(x - lo), np.abs(hi - x)), axis=1) <= eps

    on_domain = near_wall(p) & near_wall(q)
    length = float(np.linalg.norm(p - q, axis=1).sum())
    return CrackCensus(int(np.count_nonzero(~on_domain)), int(np.count_nonzero(on_domain)), length)


def euler_characteristic(mesh: TriMesh, tol: float | None = None) -> int:
    """V - E + F of the welded mesh (only vertices used by triangles count)."""
    if tol is None:
        span = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0) if mesh.n_vertices else np.zeros(3)
        tol = 1e-9 * max(float(np.linalg.norm(span)), 1.0)
    _, t, edges, _ = _welded_edges(mesh, tol)
    return len(np.unique(t)) - len(edges) + len(t)


def export_obj(mesh: TriMesh, path) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# {mesh.n_vertices} vertices, {mesh.n_triangles} triangles\n")
        for x, y, z in mesh.vertices:
            fh.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
        groups = sorted(set(zip(mesh.tri_level.tolist(), mesh.tri_kind.tolist())))
        for level, kind in groups:
            fh.write(f"g level{level}_{KIND_NAMES[kind]}\n")
            sel = (mesh.tri_level == level) & (mesh.tri_kind == kind)
            for a, b, c in mesh.triangles[sel] + 1:
                fh.write(f"f {a} {b} {c}\n")
    return path


def read_obj(path) -> TriMesh:
    verts, tris, levels, kinds = [], [], [], []
    level, kind = 0, REGULAR
    names = {v: k for k, v in KIND_NAMES.items()}
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(v) for v in parts[1:4]])
        elif parts[0] == "g":
            lev, _, kname = parts[1].partition("_")
            level, kind = int(lev.removeprefix("level")), names[kname]
        elif parts[0] == "f":
            tris.append([int(v.split("/")[0]) - 1 for v in parts[1:4]])
            levels.append(level)
            kinds.append(kind)
    return TriMesh(np.array(verts, dtype=np.float64).reshape(-1, 3),
                   np.array(tris, dtype=np.int64).reshape(-1, 3),
                   np.array(levels, dtype=np.int64), np.array(kinds, dtype=np.int8))
