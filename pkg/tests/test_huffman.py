import heapq

import numpy as np
import pytest
from hypothesis import given, strategies as st

from amrlab.codec import huffman_decode, huffman_encode
from amrlab.codec.huffman import canonical_codes, code_lengths, huffman_blob_size


def reference_lengths(counts):
    """Textbook Huffman code lengths (independent of the library)."""
    if len(counts) == 1:
        return [1]
    heap = [(c, i, [i]) for i, c in enumerate(counts)]
    heapq.heapify(heap)
    depth = [0] * len(counts)
    tick = len(counts)
    while len(heap) > 1:
        c1, _, s1 = heapq.heappop(heap)
        c2, _, s2 = heapq.heappop(heap)
        for s in s1 + s2:
            depth[s] += 1
        heapq.heappush(heap, (c1 + c2, tick, s1 + s2))
        tick += 1
    return depth


def test_all_zero_stream_is_tiny():
    blob = huffman_encode(np.zeros(10_000, dtype=np.int64))
    assert len(blob) < 100
    assert np.array_equal(huffman_decode(blob, 10_000), np.zeros(10_000))


def test_single_symbol_gets_one_bit_code():
    syms = np.array([7])
    lengths = code_lengths(syms, np.array([5]))
    assert list(lengths) == [1]


def test_empty_stream():
    blob = huffman_encode(np.zeros(0, dtype=np.int64))
    assert huffman_decode(blob, 0).size == 0


@given(st.lists(st.integers(1, 1000), min_size=1, max_size=40))
def test_lengths_are_optimal(counts):
    syms = np.arange(len(counts))
    lengths = code_lengths(syms, np.array(counts))
    cost = int(np.dot(lengths, counts))
    ref = int(np.dot(reference_lengths(counts), counts))
    assert cost == ref
    # Kraft equality for a complete prefix code
    if len(counts) > 1:
        assert sum(2.0 ** -l for l in lengths) == pytest.approx(1.0)


@given(st.lists(st.integers(1, 50), min_size=2, max_size=30))
def test_canonical_codes_are_prefix_free(counts):
    syms = np.arange(len(counts)) * 3 - 20
    lengths = code_lengths(syms, np.array(counts))
    _, lens, codes = canonical_codes(syms, lengths)
    words = [format(int(c), f"0{int(l)}b") for c, l in zip(codes, lens)]
    assert len(set(words)) == len(words)
    for a in words:
        for b in words:
            assert a == b or not b.startswith(a)


@given(st.lists(st.integers(-40000, 40000), max_size=400))
def test_roundtrip(codes):
    codes = np.array(codes, dtype=np.int64)
    blob = huffman_encode(codes)
    assert huffman_blob_size(blob) == len(blob)
    assert np.array_equal(huffman_decode(blob, len(codes)), codes)


def test_skewed_stream_roundtrip_with_offset():
    rng = np.random.default_rng(0)
    codes = np.round(rng.laplace(0, 3, 50_000)).astype(np.int64)
    blob = huffman_encode(codes)
    framed = b"xyz" + blob + b"tail"
    assert huffman_blob_size(framed, 3) == len(blob)
    assert np.array_equal(huffman_decode(framed, codes.size, 3), codes)
    # a prefix decode returns the leading symbols only
    assert np.array_equal(huffman_decode(blob, 1000), codes[:1000])
    assert len(blob) < codes.size * 8 / 2


def test_truncated_stream_raises():
    blob = huffman_encode(np.arange(1000) % 17)
    with pytest.raises(ValueError):
        huffman_decode(blob[:-20], 1000)
