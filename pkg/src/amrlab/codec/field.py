"""Self-describing compressed field (``AMRZ``) and the public codec API."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..amr.model import ScalarGrid
from . import interp, lr
from .huffman import huffman_blob_size, huffman_decode, huffman_encode
from .quantize import MAX_CODE

MAGIC = b"AMRZ"
CODEC_IDS = {"LR": 0, "INTERP": 1}
CODEC_NAMES = {v: k for k, v in CODEC_IDS.items()}
EB_MODES = {"absolute": 0, "relative": 1}
EB_MODE_NAMES = {v: k for k, v in EB_MODES.items()}
# magic, codec, eb mode, eb value, eb_abs, dims, outlier count
_HEADER = struct.Struct("<4sBBdd3II")


@dataclass(frozen=True)
class ErrorBound:
    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in EB_MODES:
            raise ValueError(f"error-bound mode must be 'absolute' or 'relative', got {self.mode!r}")
        if not (self.value > 0 and np.isfinite(self.value)):
            raise ValueError("error-bound value must be positive and finite")

    def resolve(self, values: np.ndarray | None = None, value_range: float | None = None) -> float:
        """Absolute bound. A relative bound scales by the value range;
        for a constant input (range 0) the raw value is used."""
        if self.mode == "absolute":
            return float(self.value)
        if value_range is None:
            value_range = float(np.max(values) - np.min(values))
        return float(self.value * value_range) if value_range > 0 else float(self.value)


def relative(value: float) -> ErrorBound:
    return ErrorBound("relative", value)


def absolute(value: float) -> ErrorBound:
    return ErrorBound("absolute", value)


@dataclass(frozen=True)
class CompressedField:
    codec_id: str
    dims: tuple[int, int, int]
    eb_mode: str
    eb_value: float
    eb_abs: float
    payload: bytes  # the whole AMRZ byte string, header included

    @property
    def nbytes(self) -> int:
        return len(self.payload)

    def write(self, path) -> Path:
        path = Path(path)
        path.write_bytes(self.payload)
        return path

    @classmethod
    def read(cls, path) -> "CompressedField":
        return parse(Path(path).read_bytes())


@dataclass
class _Parsed:
    header: CompressedField
    n_outliers: int
    huff_offset: int
    outliers: np.ndarray
    side_offset: int


def _check_input(grid: ScalarGrid):
    if not np.all(np.isfinite(grid.values)):
        raise ValueError("cannot compress non-finite data")


def _header(codec: str, dims, eb: ErrorBound, eb_abs: float, n_outliers: int) -> bytes:
    return _HEADER.pack(MAGIC, CODEC_IDS[codec], EB_MODES[eb.mode], eb.value, eb_abs, *dims, n_outliers)


def compress_lr(grid: ScalarGrid, eb: ErrorBound, value_range: float | None = None) -> CompressedField:
    _check_input(grid)
    eb_abs = eb.resolve(grid.values, value_range)
    codes, outliers, flags, coefs = lr.lr_encode(grid.values, eb_abs, MAX_CODE)
    reg = flags == 1
    side = (struct.pack("<I", flags.size) + np.packbits(flags).tobytes()
            + np.ascontiguousarray(coefs[reg], dtype="<f8").tobytes())
    payload = (_header("LR", grid.dims, eb, eb_abs, outliers.size) + huffman_encode(codes)
               + outliers.astype("<f8").tobytes() + side)
    return CompressedField("LR", grid.dims, eb.mode, eb.value, eb_abs, payload)


def compress_interp(grid: ScalarGrid, eb: ErrorBound, value_range: float | None = None) -> CompressedField:
    _check_input(grid)
    eb_abs = eb.resolve(grid.values, value_range)
    codes, outliers, anchors = interp.interp_encode(grid.values, eb_abs, MAX_CODE)
    side = struct.pack("<I", anchors.size) + anchors.astype("<f8").tobytes()
    payload = (_header("INTERP", grid.dims, eb, eb_abs, outliers.size) + huffman_encode(codes)
               + outliers.astype("<f8").tobytes() + side)
    return CompressedField("INTERP", grid.dims, eb.mode, eb.value, eb_abs, payload)


def parse(payload: bytes) -> CompressedField:
    return _parse(payload).header


def _parse(payload: bytes) -> _Parsed:
    if len(payload) < _HEADER.size:
        raise ValueError("truncated AMRZ header")
    magic, cid, mode, eb_value, eb_abs, nx, ny, nz, n_out = _HEADER.unpack_from(payload, 0)
    if magic != MAGIC:
        raise ValueError("not an AMRZ stream (bad magic)")
    if cid not in CODEC_NAMES or mode not in EB_MODE_NAMES:
        raise ValueError("unknown codec id or error-bound mode")
    huff_offset = _HEADER.size
    out_offset = huff_offset + huffman_blob_size(payload, huff_offset)
    side_offset = out_offset + 8 * n_out
    if side_offset > len(payload):
        raise ValueError("truncated AMRZ outlier stream")
    outliers = np.frombuffer(payload, dtype="<f8", count=n_out, offset=out_offset).astype(np.float64)
    header = CompressedField(CODEC_NAMES[cid], (nx, ny, nz), EB_MODE_NAMES[mode], eb_value, eb_abs,
                             bytes(payload))
    return _Parsed(header, n_out, huff_offset, outliers, side_offset)


def _lr_side(p: _Parsed):
    payload = p.header.payload
    (nblocks,) = struct.unpack_from("<I", payload, p.side_offset)
    pos = p.side_offset + 4
    nflag_bytes = (nblocks + 7) // 8
    flags = np.unpackbits(np.frombuffer(payload, dtype=np.uint8, count=nflag_bytes, offset=pos))[:nblocks]
    pos += nflag_bytes
    nreg = int(flags.sum())
    reg = np.frombuffer(payload, dtype="<f8", count=4 * nreg, offset=pos).reshape(nreg, 4)
    coefs = np.zeros((nblocks, 4))
    coefs[flags == 1] = reg
    return flags, coefs


def decompress_lr(cf: CompressedField) -> ScalarGrid:
    p = _parse(cf.payload)
    if p.header.codec_id != "LR":
        raise ValueError("not an LR stream")
    dims = p.header.dims
    codes = huffman_decode(cf.payload, int(np.prod(dims)), p.huff_offset)
    flags, coefs = _lr_side(p)
    return ScalarGrid(lr.lr_decode(codes, p.outliers, flags, coefs, dims, p.header.eb_abs, MAX_CODE))


def decompress_lr_block(cf: CompressedField, index: int) -> np.ndarray:
    """Decode one 6x6x6 block without reconstructing any other block.

    Only the code-stream prefix up to the end of the block is entropy
    decoded; prediction touches this block alone.
    """
    p = _parse(cf.payload)
    dims = p.header.dims
    nb = lr.block_grid(dims)
    if not 0 <= index < int(np.prod(nb)):
        raise IndexError(f"block {index} out of range")
    lo, shape = lr.block_extent(dims, index)
    code_offset = _codes_before_block(dims, index)
    size = int(np.prod(shape))
    codes = huffman_decode(cf.payload, code_offset + size, p.huff_offset)
    outlier_offset = int(np.count_nonzero(codes[:code_offset] == MAX_CODE))
    flags, coefs = _lr_side(p)
    return lr.lr_decode_block(codes, code_offset, p.outliers, outlier_offset, flags[index] == 1,
                              coefs[index], shape, p.header.eb_abs, MAX_CODE)


def _codes_before_block(dims, index: int) -> int:
    nb = lr.block_grid(dims)
    total = 0
    # sum of block volumes for all blocks with smaller x-fastest index
    bi = index % nb[0]
    bj = (index // nb[0]) % nb[1]
    bk = index // (nb[0] * nb[1])
    sizes = [np.array([min(lr.BLOCK, d - b * lr.BLOCK) for b in range(n)]) for d, n in zip(dims, nb)]
    sx, sy, sz = sizes
    total += int(sz[:bk].sum()) * dims[0] * dims[1]
    total += int(sy[:bj].sum()) * dims[0] * int(sz[bk])
    total += int(sx[:bi].sum()) * int(sy[bj]) * int(sz[bk])
    return total


def decompress_interp(cf: CompressedField) -> ScalarGrid:
    p = _parse(cf.payload)
    if p.header.codec_id != "INTERP":
        raise ValueError("not an INTERP stream")
    dims = p.header.dims
    payload = cf.payload
    (n_anchor,) = struct.unpack_from("<I", payload, p.side_offset)
    anchors = np.frombuffer(payload, dtype="<f8", count=n_anchor, offset=p.side_offset + 4)
    codes = huffman_decode(payload, int(np.prod(dims)) - n_anchor, p.huff_offset)
    return ScalarGrid(interp.interp_decode(codes, p.outliers, anchors, dims, p.header.eb_abs, MAX_CODE))


COMPRESSORS = {"LR": compress_lr, "INTERP": compress_interp}


def compress(grid: ScalarGrid, codec: str, eb: ErrorBound, value_range: float | None = None) -> CompressedField:
    try:
        fn = COMPRESSORS[codec.upper()]
    except KeyError:
        raise ValueError(f"unknown codec {codec!r} (expected LR or INTERP)") from None
    return fn(grid, eb, value_range)


def decompress(cf: CompressedField | bytes) -> ScalarGrid:
    if isinstance(cf, (bytes, bytearray)):
        cf = parse(bytes(cf))
    if cf.codec_id == "LR":
        return decompress_lr(cf)
    return decompress_interp(cf)


def compression_ratio(original: ScalarGrid, cf: CompressedField) -> float:
    return 8.0 * int(np.prod(original.dims)) / cf.nbytes


def max_abs_error(a: ScalarGrid, b: ScalarGrid) -> float:
    return float(np.max(np.abs(a.values - b.values))) if a.values.size else 0.0
