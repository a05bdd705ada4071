"""Building, flattening and redundancy bookkeeping for two-level AMR data."""
from __future__ import annotations

import numpy as np

from .model import AMRDataset, AMRLevel, IndexBox, Patch, ScalarGrid, occupancy, validate


def block_mean(values: np.ndarray, factor: int = 2) -> np.ndarray:
    nx, ny, nz = values.shape
    v = values.reshape(nx // factor, factor, ny // factor, factor, nz // factor, factor)
    return v.mean(axis=(1, 3, 5))


def gradient_norm(values: np.ndarray) -> np.ndarray:
    """Central-difference gradient magnitude in index units (one-sided at the walls)."""
    gx, gy, gz = np.gradient(values)
    return np.sqrt(gx * gx + gy * gy + gz * gz)


def _check_divisible(dims, tile: int):
    if tile < 1:
        raise ValueError("tile must be positive")
    bad = [d for d in dims if d % (2 * tile)]
    if bad:
        raise ValueError(f"fine dims {tuple(dims)} must be divisible by 2*tile = {2 * tile}")


def tile_max_gradient(fine: ScalarGrid, tile: int = 8) -> np.ndarray:
    """Per-tile maximum of the coarse-field gradient norm."""
    _check_divisible(fine.dims, tile)
    g = gradient_norm(block_mean(fine.values))
    nx, ny, nz = g.shape
    return g.reshape(nx // tile, tile, ny // tile, tile, nz // tile, tile).max(axis=(1, 3, 5))


def build_amr(fine: ScalarGrid, theta: float, tile: int = 8) -> AMRDataset:
    """Two-level dataset: coarse = 2x block mean, fine patches over tagged tiles.

    A coarse cell is tagged when its gradient norm exceeds ``theta``; tags
    are dilated to whole ``tile**3`` coarse tiles, each of which becomes one
    fine patch. The coarse level keeps data everywhere.
    """
    _check_divisible(fine.dims, tile)
    tile_tags = tile_max_gradient(fine, tile) > theta
    return build_amr_from_tiles(fine, tile_tags, tile)


def build_amr_from_tags(fine: ScalarGrid, coarse_tags: np.ndarray, tile: int = 8) -> AMRDataset:
    """Same as :func:`build_amr` but with an explicit coarse-cell tag mask."""
    _check_divisible(fine.dims, tile)
    tags = np.asarray(coarse_tags, dtype=bool)
    expected = tuple(d // 2 for d in fine.dims)
    if tags.shape != expected:
        raise ValueError(f"tag mask shape {tags.shape} != coarse dims {expected}")
    nx, ny, nz = tags.shape
    tile_tags = tags.reshape(nx // tile, tile, ny // tile, tile, nz // tile, tile).any(axis=(1, 3, 5))
    return build_amr_from_tiles(fine, tile_tags, tile)


def build_amr_from_tiles(fine: ScalarGrid, tile_tags: np.ndarray, tile: int = 8) -> AMRDataset:
    coarse_vals = block_mean(fine.values)
    cdims = coarse_vals.shape
    coarse = AMRLevel(0, [Patch(IndexBox((0, 0, 0), tuple(d - 1 for d in cdims)), coarse_vals)])
    patches = []
    # x-fastest tile order
    for tk in range(tile_tags.shape[2]):
        for tj in range(tile_tags.shape[1]):
            for ti in range(tile_tags.shape[0]):
                if not tile_tags[ti, tj, tk]:
                    continue
                lo = tuple(2 * tile * t for t in (ti, tj, tk))
                hi = tuple(l + 2 * tile - 1 for l in lo)
                box = IndexBox(lo, hi)
                patches.append(Patch(box, fine.values[box.slices()].copy()))
    return AMRDataset(cdims, [coarse, AMRLevel(1, patches)])


def theta_for_density(fine: ScalarGrid, density: float, tile: int = 8) -> float:
    """Threshold whose fine-level coverage is closest to ``density``.

    Coverage is a step function of theta over the sorted per-tile maxima, so
    the sweep is exact: candidates sit between consecutive distinct maxima
    (tied maxima are tagged together). Ties in distance go to lower coverage.
    """
    maxima = np.sort(tile_max_gradient(fine, tile).ravel())
    n = maxima.size
    uniq = np.unique(maxima)
    # candidate thresholds: below everything, between distinct values, above everything
    thetas = [-1.0 if uniq[0] > -1.0 else float(uniq[0]) - 1.0]
    thetas += [float(0.5 * (a + b)) for a, b in zip(uniq[:-1], uniq[1:])]
    thetas.append(float(uniq[-1]) + 1.0)
    counts = [n - int(np.searchsorted(maxima, t, side="right")) for t in thetas]
    best = min(range(len(thetas)), key=lambda i: (abs(counts[i] / n - density), counts[i]))
    return thetas[best]


def level_densities(ds: AMRDataset) -> list[float]:
    """Fraction of the domain where each level is the finest available."""
    fdims = ds.finest_dims
    owner = np.zeros(fdims, dtype=np.int64)
    for lev in range(1, ds.num_levels):
        f = 2 ** (ds.num_levels - 1 - lev)
        occ = occupancy(ds.levels[lev], ds.level_dims(lev))
        occ = occ.repeat(f, 0).repeat(f, 1).repeat(f, 2)
        owner[occ] = lev
    total = owner.size
    return [float(np.count_nonzero(owner == lev)) / total for lev in range(ds.num_levels)]


def level_coverage(ds: AMRDataset, level: int) -> float:
    """Fraction of the domain covered by ``level``'s patches."""
    occ = occupancy(ds.levels[level], ds.level_dims(level))
    return float(occ.mean())


def _require_valid(ds: AMRDataset):
    problems = validate(ds)
    if problems:
        raise ValueError("invalid AMR dataset: " + "; ".join(problems))


def uniformize(ds: AMRDataset) -> ScalarGrid:
    """Flatten to the finest index space.

    Coarse data is replicated piecewise-constant into its children, then
    finer patches overwrite their footprint, so redundant coarse values
    never reach the output.
    """
    _require_valid(ds)
    out = np.zeros(ds.finest_dims)
    top = ds.num_levels - 1
    for lev, level in enumerate(ds.levels):
        f = 2 ** (top - lev)
        for patch in level.patches:
            data = patch.data
            if f > 1:
                data = data.repeat(f, 0).repeat(f, 1).repeat(f, 2)
            out[patch.box.refine(f).slices() if f > 1 else patch.box.slices()] = data
    return ScalarGrid(out)


def redundant_mask(ds: AMRDataset, level: int) -> np.ndarray:
    """Cells of ``level`` that lie under any patch of ``level + 1``."""
    if not 0 <= level < ds.num_levels - 1:
        raise ValueError(f"level {level} out of range for a {ds.num_levels}-level dataset")
    mask = np.zeros(ds.level_dims(level), dtype=bool)
    for patch in ds.levels[level + 1].patches:
        mask[patch.box.coarsen().slices()] = True
    return mask
