from .field import (
    CompressedField,
    ErrorBound,
    absolute,
    compress,
    compress_interp,
    compress_lr,
    compression_ratio,
    decompress,
    decompress_interp,
    decompress_lr,
    decompress_lr_block,
    max_abs_error,
    parse,
    relative,
)
from .huffman import huffman_decode, huffman_encode
from .lr import BLOCK, lorenzo3d
from .quantize import MAX_CODE, QuantOutcome, quantize

__all__ = [
    "BLOCK", "MAX_CODE", "CompressedField", "ErrorBound", "QuantOutcome", "absolute",
    "compress", "compress_interp", "compress_lr", "compression_ratio", "decompress",
    "decompress_interp", "decompress_lr", "decompress_lr_block", "huffman_decode",
    "huffman_encode", "lorenzo3d", "max_abs_error", "parse", "quantize", "relative",
]
