"""Deterministic synthetic scalar fields."""
from __future__ import annotations

import numpy as np

from .model import ScalarGrid

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

NOISE_OCTAVES = 4
NOISE_BASE_FREQUENCY = 4
IRREGULAR_SKEW = 3.0


def splitmix64(x) -> np.ndarray:
    """Vectorised splitmix64 finaliser applied to ``x + golden``."""
    z = np.asarray(x, dtype=np.uint64) + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _u64(v: int) -> np.ndarray:
    return np.array([int(v) & _MASK64], dtype=np.uint64)


def lattice_values(seed: int, octave: int, n: int) -> np.ndarray:
    """Uniform values in [-1, 1) on an ``n**3`` lattice, indexed ``[ix, iy, iz]``."""
    h = splitmix64(splitmix64(_u64(seed)) ^ _u64(octave))[0]
    ix, iy, iz = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    lin = (ix + n * (iy + n * iz)).astype(np.uint64)
    bits = splitmix64(lin ^ h) >> np.uint64(11)
    return bits.astype(np.float64) * 2.0 ** -52 - 1.0


def _value_noise(dims, seed: int) -> np.ndarray:
    centers = [(np.arange(d) + 0.5) / d for d in dims]
    total = np.zeros(dims)
    norm = 0.0
    for octave in range(NOISE_OCTAVES):
        freq = NOISE_BASE_FREQUENCY << octave
        lat = lattice_values(seed, octave, freq + 1)
        pos = [c * freq for c in centers]
        idx = [np.minimum(np.floor(p).astype(np.int64), freq - 1) for p in pos]
        frac = [p - i for p, i in zip(pos, idx)]
        ix, iy, iz = np.ix_(*idx)
        fx, fy, fz = (f.reshape(shape) for f, shape in
                      zip(frac, [(-1, 1, 1), (1, -1, 1), (1, 1, -1)]))
        acc = np.zeros(dims)
        for dx in (0, 1):
            wx = fx if dx else 1.0 - fx
            for dy in (0, 1):
                wy = fy if dy else 1.0 - fy
                for dz in (0, 1):
                    wz = fz if dz else 1.0 - fz
                    acc += wx * wy * wz * lat[ix + dx, iy + dy, iz + dz]
        amp = 0.5 ** octave
        total += amp * acc
        norm += amp
    return total / norm


def generate_field(kind: str, dims, seed: int = 0) -> ScalarGrid:
    """Synthetic field sampled at the cell centers of the unit cube.

    ``smooth`` is an analytic Gaussian-damped trigonometric product;
    ``irregular`` is exp-skewed 4-octave trilinear value noise keyed by
    ``seed`` through splitmix64, so it is bit-reproducible.
    """
    dims = _as_dims(dims)
    if min(dims) < 8:
        raise ValueError(f"dims must be >= 8 per axis, got {dims}")
    if kind == "smooth":
        x, y, z = np.meshgrid(*[(np.arange(d) + 0.5) / d for d in dims], indexing="ij")
        r2 = (x - 0.5) ** 2 + (y - 0.5) ** 2 + (z - 0.5) ** 2
        vals = np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y) * np.sin(2 * np.pi * z) * np.exp(-4.0 * r2)
    elif kind == "irregular":
        vals = np.exp(IRREGULAR_SKEW * _value_noise(dims, seed))
    else:
        raise ValueError(f"unknown field kind {kind!r} (expected 'smooth' or 'irregular')")
    return ScalarGrid(vals)


def sphere_field(dims, center, radius: float, cell_size: float = 1.0) -> ScalarGrid:
    """``radius - |x - center|`` at cell centers; positive inside the sphere."""
    dims = _as_dims(dims)
    axes = [(np.arange(d) + 0.5) * cell_size for d in dims]
    x, y, z = np.meshgrid(*axes, indexing="ij")
    dist = np.sqrt((x - center[0]) ** 2 + (y - center[1]) ** 2 + (z - center[2]) ** 2)
    return ScalarGrid(radius - dist)


def _as_dims(dims) -> tuple[int, int, int]:
    if np.isscalar(dims):
        return (int(dims),) * 3
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise ValueError(f"dims must have 3 entries, got {dims}")
    return dims
