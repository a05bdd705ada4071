"""Global multilevel linear-interpolation predictor.

Anchors on the stride-``s0`` lattice are kept verbatim. Each refinement
level halves the stride and fills the new lattice points in three passes
(along z, then y, then x), predicting every point as the mean of its two
reconstructed neighbours at distance ``h`` on the pass axis, or copying the
lower neighbour when the upper one falls outside the grid. All points of a
pass depend only on earlier passes, so a pass is one vectorised step.
"""
from __future__ import annotations

import numpy as np

from .quantize import quantize_array


def anchor_stride(dims) -> int:
    """Largest power of two <= min(dims)/2, at least 2."""
    half = min(dims) // 2
    s = 2
    while s * 2 <= half:
        s *= 2
    return s


def _passes(dims, s0: int):
    """Yield ``(axis, h, index)`` where ``index`` selects the pass's targets."""
    nx, ny, nz = dims
    h = s0 // 2
    while h >= 1:
        s = 2 * h
        yield 2, h, (slice(0, nx, s), slice(0, ny, s), slice(h, nz, s))
        yield 1, h, (slice(0, nx, s), slice(h, ny, s), slice(0, nz, h))
        yield 0, h, (slice(h, nx, s), slice(0, ny, h), slice(0, nz, h))
        h //= 2


def _predict(rec: np.ndarray, axis: int, h: int, index) -> np.ndarray:
    lo_idx = list(index)
    hi_idx = list(index)
    sl = index[axis]
    n = rec.shape[axis]
    lo_idx[axis] = slice(sl.start - h, n - h, sl.step)
    hi_idx[axis] = slice(sl.start + h, n, sl.step)
    lo = rec[tuple(lo_idx)]
    hi = rec[tuple(hi_idx)]
    ntarget = len(range(sl.start, n, sl.step))
    lo = np.take(lo, np.arange(ntarget), axis=axis)
    if hi.shape[axis] == ntarget:
        return 0.5 * (lo + hi)
    pred = lo.copy()
    head = [slice(None)] * 3
    head[axis] = slice(0, hi.shape[axis])
    pred[tuple(head)] = 0.5 * (lo[tuple(head)] + hi)
    return pred


def interp_encode(values: np.ndarray, eb_abs: float, max_code: int):
    """Returns ``(codes, outliers, anchors)``; streams are x-fastest per pass."""
    dims = values.shape
    s0 = anchor_stride(dims)
    rec = np.zeros(dims)
    anchor_idx = (slice(None, None, s0),) * 3
    anchors = values[anchor_idx].copy()
    rec[anchor_idx] = anchors
    code_chunks, out_chunks = [], []
    for axis, h, index in _passes(dims, s0):
        target = values[index]
        if target.size == 0:
            continue
        pred = _predict(rec, axis, h, index)
        codes, recon, outl = quantize_array(target, pred, eb_abs, max_code)
        rec[index] = recon
        code_chunks.append(codes.ravel(order="F"))
        out_chunks.append(target.ravel(order="F")[outl.ravel(order="F")])
    codes = np.concatenate(code_chunks) if code_chunks else np.zeros(0, dtype=np.int64)
    outliers = np.concatenate(out_chunks) if out_chunks else np.zeros(0)
    return codes, outliers, anchors.ravel(order="F")


def interp_decode(codes, outliers, anchors, dims, eb_abs: float, max_code: int) -> np.ndarray:
    dims = tuple(dims)
    s0 = anchor_stride(dims)
    rec = np.zeros(dims)
    anchor_idx = (slice(None, None, s0),) * 3
    ashape = rec[anchor_idx].shape
    rec[anchor_idx] = np.asarray(anchors, dtype=np.float64).reshape(ashape, order="F")
    codes = np.asarray(codes, dtype=np.int64)
    outliers = np.asarray(outliers, dtype=np.float64)
    step = 2.0 * eb_abs
    nc = 0
    no = 0
    for axis, h, index in _passes(dims, s0):
        shape = rec[index].shape
        size = int(np.prod(shape))
        if size == 0:
            continue
        pred = _predict(rec, axis, h, index)
        c = codes[nc:nc + size].reshape(shape, order="F")
        nc += size
        outl = c == max_code
        recon = pred + step * np.where(outl, 0, c).astype(np.float64)
        k = int(np.count_nonzero(outl))
        if k:
            fill = np.zeros(size)
            fill[outl.ravel(order="F")] = outliers[no:no + k]
            recon = np.where(outl, fill.reshape(shape, order="F"), recon)
            no += k
        rec[index] = recon
    if nc != codes.size or no != outliers.size:
        raise ValueError("interpolation stream length mismatch")
    return rec
