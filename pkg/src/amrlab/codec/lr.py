"""Block-wise Lorenzo / linear-regression predictor (6x6x6 blocks).

Every block picks one predictor, judged on the original values:

* Lorenzo over reconstructed neighbours inside the block, with neighbours
  outside the block read as 0, so blocks decode independently;
* a least-squares plane ``b0 + b1*i + b2*j + b3*k`` in block-local indices,
  whose four coefficients are stored verbatim.

Blocks are visited x-fastest, and points inside a block x-fastest too.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .quantize import quantize_kernel, dequantize_kernel

BLOCK = 6
LORENZO = 0
REGRESSION = 1


def block_grid(dims, block: int = BLOCK) -> tuple[int, int, int]:
    return tuple(-(-d // block) for d in dims)


def block_extent(dims, index: int, block: int = BLOCK):
    """``(lo, shape)`` of block ``index`` (x-fastest numbering)."""
    nb = block_grid(dims, block)
    bi = index % nb[0]
    bj = (index // nb[0]) % nb[1]
    bk = index // (nb[0] * nb[1])
    lo = (bi * block, bj * block, bk * block)
    shape = tuple(min(block, d - l) for d, l in zip(dims, lo))
    return lo, shape


@njit(cache=True)
def lorenzo3d(r, i, j, k):
    """Lorenzo prediction at local ``(i, j, k)`` of block buffer ``r``; missing neighbours are 0."""
    a = r[i - 1, j, k] if i > 0 else 0.0
    b = r[i, j - 1, k] if j > 0 else 0.0
    c = r[i, j, k - 1] if k > 0 else 0.0
    d = r[i - 1, j - 1, k] if i > 0 and j > 0 else 0.0
    e = r[i - 1, j, k - 1] if i > 0 and k > 0 else 0.0
    f = r[i, j - 1, k - 1] if j > 0 and k > 0 else 0.0
    g = r[i - 1, j - 1, k - 1] if i > 0 and j > 0 and k > 0 else 0.0
    return a + b + c - d - e - f + g


@njit(cache=True)
def _fit_plane(blk, sx, sy, sz, out):
    n = sx * sy * sz
    cx = (sx - 1) / 2.0
    cy = (sy - 1) / 2.0
    cz = (sz - 1) / 2.0
    mean = 0.0
    vx = 0.0
    vy = 0.0
    vz = 0.0
    for k in range(sz):
        for j in range(sy):
            for i in range(sx):
                v = blk[i, j, k]
                mean += v
                vx += (i - cx) * v
                vy += (j - cy) * v
                vz += (k - cz) * v
    mean /= n
    # sum of squared centred indices along one axis of length s: s(s^2-1)/12
    dx = n * (sx * sx - 1) / 12.0
    dy = n * (sy * sy - 1) / 12.0
    dz = n * (sz * sz - 1) / 12.0
    b1 = vx / dx if dx > 0 else 0.0
    b2 = vy / dy if dy > 0 else 0.0
    b3 = vz / dz if dz > 0 else 0.0
    out[0] = mean - b1 * cx - b2 * cy - b3 * cz
    out[1] = b1
    out[2] = b2
    out[3] = b3


@njit(cache=True)
def _plane(coef, i, j, k):
    return coef[0] + coef[1] * i + coef[2] * j + coef[3] * k


@njit(cache=True)
def _encode(data, eb, max_code, block):
    nx, ny, nz = data.shape
    nbx = (nx + block - 1) // block
    nby = (ny + block - 1) // block
    nbz = (nz + block - 1) // block
    nblocks = nbx * nby * nbz
    codes = np.empty(nx * ny * nz, dtype=np.int64)
    outliers = np.empty(nx * ny * nz, dtype=np.float64)
    flags = np.zeros(nblocks, dtype=np.uint8)
    coefs = np.zeros((nblocks, 4), dtype=np.float64)
    blk = np.zeros((block, block, block))
    rec = np.zeros((block, block, block))
    coef = np.zeros(4)
    nc = 0
    no = 0
    b = 0
    for bk in range(nbz):
        for bj in range(nby):
            for bi in range(nbx):
                x0 = bi * block
                y0 = bj * block
                z0 = bk * block
                sx = min(block, nx - x0)
                sy = min(block, ny - y0)
                sz = min(block, nz - z0)
                for k in range(sz):
                    for j in range(sy):
                        for i in range(sx):
                            blk[i, j, k] = data[x0 + i, y0 + j, z0 + k]
                _fit_plane(blk, sx, sy, sz, coef)
                err_lor = 0.0
                err_reg = 0.0
                for k in range(sz):
                    for j in range(sy):
                        for i in range(sx):
                            v = blk[i, j, k]
                            err_lor += abs(v - lorenzo3d(blk, i, j, k))
                            err_reg += abs(v - _plane(coef, i, j, k))
                use_reg = err_reg < err_lor
                if use_reg:
                    flags[b] = 1
                    for c in range(4):
                        coefs[b, c] = coef[c]
                for k in range(sz):
                    for j in range(sy):
                        for i in range(sx):
                            v = blk[i, j, k]
                            if use_reg:
                                pred = _plane(coef, i, j, k)
                            else:
                                pred = lorenzo3d(rec, i, j, k)
                            code, r, is_out = quantize_kernel(v, pred, eb, max_code)
                            codes[nc] = code
                            nc += 1
                            if is_out:
                                outliers[no] = v
                                no += 1
                            rec[i, j, k] = r
                b += 1
    return codes, outliers[:no].copy(), flags, coefs


@njit(cache=True)
def _decode_block(codes, c0, outliers, o0, use_reg, coef, sx, sy, sz, eb, max_code, rec):
    """Fill ``rec[:sx, :sy, :sz]``; returns the number of outliers consumed."""
    nc = c0
    no = o0
    for k in range(sz):
        for j in range(sy):
            for i in range(sx):
                code = codes[nc]
                nc += 1
                if code == max_code:
                    rec[i, j, k] = outliers[no]
                    no += 1
                else:
                    if use_reg:
                        pred = _plane(coef, i, j, k)
                    else:
                        pred = lorenzo3d(rec, i, j, k)
                    rec[i, j, k] = dequantize_kernel(pred, code, eb)
    return no - o0


@njit(cache=True)
def _decode(codes, outliers, flags, coefs, nx, ny, nz, eb, max_code, block):
    out = np.empty((nx, ny, nz))
    nbx = (nx + block - 1) // block
    nby = (ny + block - 1) // block
    nbz = (nz + block - 1) // block
    rec = np.zeros((block, block, block))
    nc = 0
    no = 0
    b = 0
    for bk in range(nbz):
        for bj in range(nby):
            for bi in range(nbx):
                x0 = bi * block
                y0 = bj * block
                z0 = bk * block
                sx = min(block, nx - x0)
                sy = min(block, ny - y0)
                sz = min(block, nz - z0)
                no += _decode_block(codes, nc, outliers, no, flags[b] == 1, coefs[b],
                                    sx, sy, sz, eb, max_code, rec)
                nc += sx * sy * sz
                for k in range(sz):
                    for j in range(sy):
                        for i in range(sx):
                            out[x0 + i, y0 + j, z0 + k] = rec[i, j, k]
                b += 1
    return out


def lr_encode(values: np.ndarray, eb_abs: float, max_code: int, block: int = BLOCK):
    """Returns ``(codes, outliers, flags, coefs)``; ``coefs`` has one row per block."""
    data = np.ascontiguousarray(values, dtype=np.float64)
    return _encode(data, float(eb_abs), int(max_code), int(block))


def lr_decode(codes, outliers, flags, coefs, dims, eb_abs: float, max_code: int, block: int = BLOCK):
    nx, ny, nz = dims
    return _decode(np.asarray(codes, dtype=np.int64), np.asarray(outliers, dtype=np.float64),
                   np.asarray(flags, dtype=np.uint8), np.ascontiguousarray(coefs, dtype=np.float64),
                   nx, ny, nz, float(eb_abs), int(max_code), int(block))


def lr_decode_block(codes, code_offset, outliers, outlier_offset, use_reg, coef, shape,
                    eb_abs: float, max_code: int, block: int = BLOCK) -> np.ndarray:
    rec = np.zeros((block, block, block))
    sx, sy, sz = shape
    _decode_block(np.asarray(codes, dtype=np.int64), int(code_offset),
                  np.asarray(outliers, dtype=np.float64), int(outlier_offset), bool(use_reg),
                  np.asarray(coef, dtype=np.float64), sx, sy, sz, float(eb_abs), int(max_code), rec)
    return rec[:sx, :sy, :sz].copy()
