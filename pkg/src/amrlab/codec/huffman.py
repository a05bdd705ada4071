"""Canonical Huffman coding of integer symbol streams.

Blob layout (little-endian)::

    u32 nsym | nsym x (i32 symbol, u8 length) | u64 nbits | bitstream

Codes are written MSB-first. A stream with a single distinct symbol gets a
1-bit code but its bitstream is elided (``nbits == 0``): the decoder
already knows the symbol and the count.
"""
from __future__ import annotations

import heapq
import struct

import numpy as np
from numba import njit

MAX_CODE_LENGTH = 63


def code_lengths(symbols: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Huffman code length per symbol (deterministic tie-breaking)."""
    n = len(symbols)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if n == 1:
        return np.ones(1, dtype=np.int64)
    heap = [(int(c), i, (i,)) for i, c in enumerate(counts)]
    heapq.heapify(heap)
    lengths = np.zeros(n, dtype=np.int64)
    order = n
    while len(heap) > 1:
        c1, _, a = heapq.heappop(heap)
        c2, _, b = heapq.heappop(heap)
        for leaf in a + b:
            lengths[leaf] += 1
        heapq.heappush(heap, (c1 + c2, order, a + b))
        order += 1
    return lengths


def canonical_codes(symbols: np.ndarray, lengths: np.ndarray):
    """Sort by (length, symbol) and assign consecutive codes."""
    order = np.lexsort((symbols, lengths))
    syms = symbols[order]
    lens = lengths[order]
    codes = np.zeros(len(syms), dtype=np.uint64)
    code = 0
    prev = int(lens[0]) if len(lens) else 0
    for i, ln in enumerate(lens):
        ln = int(ln)
        code <<= ln - prev
        codes[i] = code
        code += 1
        prev = ln
    return syms, lens, codes


@njit(cache=True)
def _pack(idx, codes, lens, nbits):
    out = np.zeros((nbits + 7) // 8, dtype=np.uint8)
    pos = 0
    for s in idx:
        c = codes[s]
        ln = lens[s]
        for b in range(ln - 1, -1, -1):
            if (c >> np.uint64(b)) & np.uint64(1):
                out[pos >> 3] |= np.uint8(0x80 >> (pos & 7))
            pos += 1
    return out


@njit(cache=True)
def _unpack(buf, nbits, count, syms, first_code, first_index, n_at_len, max_len):
    out = np.empty(count, dtype=np.int64)
    pos = 0
    for t in range(count):
        code = 0
        ln = 0
        while True:
            if pos >= nbits:
                raise ValueError("Huffman stream exhausted")
            bit = (buf[pos >> 3] >> (7 - (pos & 7))) & 1
            pos += 1
            code = (code << 1) | bit
            ln += 1
            if ln > max_len:
                raise ValueError("corrupt Huffman stream")
            off = code - first_code[ln]
            if 0 <= off < n_at_len[ln]:
                out[t] = syms[first_index[ln] + off]
                break
    return out


def huffman_encode(codes) -> bytes:
    codes = np.asarray(codes, dtype=np.int64).ravel()
    if codes.size == 0:
        return struct.pack("<I", 0) + struct.pack("<Q", 0)
    symbols, inverse, counts = np.unique(codes, return_inverse=True, return_counts=True)
    lengths = code_lengths(symbols, counts)
    if lengths.max() > MAX_CODE_LENGTH:
        raise ValueError("Huffman code length exceeds 63 bits")
    syms, lens, cc = canonical_codes(symbols, lengths)
    table = struct.pack("<I", len(syms)) + b"".join(
        struct.pack("<iB", int(s), int(l)) for s, l in zip(syms, lens))
    if len(syms) == 1:
        return table + struct.pack("<Q", 0)
    rank = np.empty(len(syms), dtype=np.int64)
    rank[np.lexsort((symbols, lengths))] = np.arange(len(syms))
    idx = rank[inverse.ravel()]
    nbits = int(np.sum(lens[idx]))
    bits = _pack(idx.astype(np.int64), cc, lens.astype(np.int64), nbits)
    return table + struct.pack("<Q", nbits) + bits.tobytes()


def huffman_blob_size(blob: bytes, offset: int = 0) -> int:
    """Total byte length of the Huffman blob starting at ``offset``."""
    try:
        (nsym,) = struct.unpack_from("<I", blob, offset)
        pos = offset + 4 + 5 * nsym
        (nbits,) = struct.unpack_from("<Q", blob, pos)
    except struct.error as exc:
        raise ValueError(f"truncated Huffman blob: {exc}") from None
    size = pos + 8 + (nbits + 7) // 8 - offset
    if offset + size > len(blob):
        raise ValueError("truncated Huffman bitstream")
    return size


def huffman_decode(blob: bytes, count: int, offset: int = 0) -> np.ndarray:
    """Decode the first ``count`` symbols of the blob at ``offset``."""
    (nsym,) = struct.unpack_from("<I", blob, offset)
    pos = offset + 4
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    if nsym == 0:
        raise ValueError("empty Huffman table but symbols requested")
    syms = np.empty(nsym, dtype=np.int64)
    lens = np.empty(nsym, dtype=np.int64)
    for i in range(nsym):
        s, ln = struct.unpack_from("<iB", blob, pos)
        syms[i], lens[i] = s, ln
        pos += 5
    (nbits,) = struct.unpack_from("<Q", blob, pos)
    pos += 8
    if nsym == 1:
        return np.full(count, syms[0], dtype=np.int64)
    nbytes = (nbits + 7) // 8
    if pos + nbytes > len(blob):
        raise ValueError("truncated Huffman stream")
    buf = np.frombuffer(blob, dtype=np.uint8, count=nbytes, offset=pos)
    # canonical order is (length, symbol); the table is stored in that order
    max_len = int(lens.max())
    n_at_len = np.zeros(max_len + 1, dtype=np.int64)
    for ln in lens:
        n_at_len[ln] += 1
    first_code = np.zeros(max_len + 1, dtype=np.int64)
    first_index = np.zeros(max_len + 1, dtype=np.int64)
    code = 0
    index = 0
    for ln in range(1, max_len + 1):
        code <<= 1
        first_code[ln] = code
        first_index[ln] = index
        code += n_at_len[ln]
        index += n_at_len[ln]
    return _unpack(buf, int(nbits), int(count), syms, first_code, first_index, n_at_len, max_len)
