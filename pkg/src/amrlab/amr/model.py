"""Patch-based AMR data model.

Arrays are indexed ``[i, j, k]`` (x, y, z). Whenever data is flattened
(containers, codecs) the order is x-fastest, i.e. ``ravel(order="F")``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

REFINEMENT_RATIO = 2


@dataclass(frozen=True)
class IndexBox:
    """Inclusive cell-index box in one level's index space."""

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(int(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(int(v) for v in self.hi))

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def volume(self) -> int:
        return int(np.prod(self.shape))

    def is_valid(self) -> bool:
        return len(self.lo) == 3 and len(self.hi) == 3 and all(h >= l for l, h in zip(self.lo, self.hi))

    def coarsen(self, ratio: int = REFINEMENT_RATIO) -> "IndexBox":
        return IndexBox(tuple(l // ratio for l in self.lo), tuple(h // ratio for h in self.hi))

    def refine(self, ratio: int = REFINEMENT_RATIO) -> "IndexBox":
        return IndexBox(tuple(l * ratio for l in self.lo), tuple((h + 1) * ratio - 1 for h in self.hi))

    def intersects(self, other: "IndexBox") -> bool:
        return all(l1 <= h2 and l2 <= h1 for l1, h1, l2, h2 in zip(self.lo, self.hi, other.lo, other.hi))

    def slices(self) -> tuple[slice, slice, slice]:
        return tuple(slice(l, h + 1) for l, h in zip(self.lo, self.hi))


@dataclass
class Patch:
    box: IndexBox
    data: np.ndarray  # shape == box.shape, float64

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)


@dataclass
class AMRLevel:
    level_index: int
    patches: list[Patch] = field(default_factory=list)

    @property
    def cell_size(self) -> float:
        return 2.0 ** -self.level_index


@dataclass
class AMRDataset:
    coarse_dims: tuple[int, int, int]
    levels: list[AMRLevel]
    refinement_ratio: int = REFINEMENT_RATIO

    def __post_init__(self):
        self.coarse_dims = tuple(int(v) for v in self.coarse_dims)

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    def level_dims(self, level: int) -> tuple[int, int, int]:
        f = self.refinement_ratio ** level
        return tuple(d * f for d in self.coarse_dims)

    @property
    def finest_dims(self) -> tuple[int, int, int]:
        return self.level_dims(self.num_levels - 1)


@dataclass
class ScalarGrid:
    """Uniform cell-centered scalar field."""

    values: np.ndarray  # shape (nx, ny, nz)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise ValueError("ScalarGrid values must be 3-dimensional")

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(int(v) for v in self.values.shape)

    @classmethod
    def from_flat(cls, dims, flat) -> "ScalarGrid":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != int(np.prod(dims)):
            raise ValueError(f"expected {int(np.prod(dims))} values for dims {tuple(dims)}, got {flat.size}")
        return cls(flat.reshape(tuple(dims), order="F"))

    def flat(self) -> np.ndarray:
        return self.values.ravel(order="F")


def validate(ds: AMRDataset) -> list[str]:
    """Return a list of invariant violations; an empty list means valid."""
    problems: list[str] = []
    if ds.refinement_ratio != REFINEMENT_RATIO:
        problems.append(f"refinement ratio {ds.refinement_ratio} unsupported (must be 2)")
        return problems
    if ds.num_levels < 1:
        problems.append("dataset has no levels")
        return problems
    for lev_no, level in enumerate(ds.levels):
        if level.level_index != lev_no:
            problems.append(f"level {lev_no} has level_index {level.level_index}")
        dims = ds.level_dims(lev_no)
        for p_no, patch in enumerate(level.patches):
            box = patch.box
            if not box.is_valid():
                problems.append(f"invalid box at level {lev_no} patch {p_no}")
                continue
            if patch.data.shape != box.shape:
                problems.append(f"data length mismatch at level {lev_no} patch {p_no}")
            inside = all(l >= 0 and h <= d - 1 for l, h, d in zip(box.lo, box.hi, dims))
            if lev_no == 0:
                if not inside:
                    problems.append(f"domain violation at level 0 patch {p_no}")
            elif not inside or not _nested(box, ds.levels[lev_no - 1], ds.level_dims(lev_no - 1)):
                problems.append(f"nesting violation at level {lev_no} patch {p_no}")
            if not np.all(np.isfinite(patch.data)):
                problems.append(f"non-finite data at level {lev_no} patch {p_no}")
        for a in range(len(level.patches)):
            for b in range(a + 1, len(level.patches)):
                pa, pb = level.patches[a].box, level.patches[b].box
                if pa.is_valid() and pb.is_valid() and pa.intersects(pb):
                    problems.append(f"overlap at level {lev_no} patches {a},{b}")
    return problems


def _nested(box: IndexBox, parent: AMRLevel, parent_dims) -> bool:
    occ = occupancy(parent, parent_dims)
    return bool(occ[box.coarsen().slices()].all())


def occupancy(level: AMRLevel, dims) -> np.ndarray:
    """Boolean mask of cells covered by the level's patches."""
    occ = np.zeros(tuple(dims), dtype=bool)
    for patch in level.patches:
        occ[patch.box.slices()] = True
    return occ


def rasterize(level: AMRLevel, dims) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(values, occupied)`` for a level over its whole index space."""
    vals = np.zeros(tuple(dims), dtype=np.float64)
    occ = np.zeros(tuple(dims), dtype=bool)
    for patch in level.patches:
        sl = patch.box.slices()
        vals[sl] = patch.data
        occ[sl] = True
    return vals, occ
