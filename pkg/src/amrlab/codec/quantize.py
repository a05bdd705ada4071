"""Error-bounded linear quantization shared by both codecs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_CODE = 1 << 15
# Outliers travel through the code stream as this symbol; regular codes
# satisfy |code| < max_code so it never collides.
ESCAPE = MAX_CODE


@njit(cache=True)
def quantize_kernel(orig, pred, eb, max_code):
    """Return ``(code, recon, is_outlier)``; ``recon`` honours ``|recon - orig| <= eb``."""
    step = 2.0 * eb
    q = (orig - pred) / step
    if not (abs(q) < max_code - 0.5):
        return max_code, orig, True
    code = int(math.floor(abs(q) + 0.5))
    if q < 0.0:
        code = -code
    recon = pred + step * float(code)
    if not (abs(recon - orig) <= eb):
        return max_code, orig, True
    return code, recon, False


@njit(cache=True)
def dequantize_kernel(pred, code, eb):
    return pred + (2.0 * eb) * float(code)


@dataclass(frozen=True)
class QuantOutcome:
    code: int
    outlier: bool
    reconstruction: float


def quantize(original: float, prediction: float, eb_abs: float, max_code: int = MAX_CODE) -> QuantOutcome:
    if not (eb_abs > 0 and math.isfinite(eb_abs)):
        raise ValueError("eb_abs must be a positive finite number")
    if not (math.isfinite(original) and math.isfinite(prediction)):
        raise ValueError("quantize needs finite inputs")
    code, recon, outlier = quantize_kernel(float(original), float(prediction), float(eb_abs), int(max_code))
    return QuantOutcome(int(code), bool(outlier), float(recon))


def quantize_array(orig: np.ndarray, pred: np.ndarray, eb: float, max_code: int = MAX_CODE):
    """Vectorised twin of :func:`quantize_kernel`.

    Returns ``(codes, recon, outlier_mask)``. ``codes`` holds ``max_code``
    at outliers and ``recon`` holds the verbatim original there.
    """
    step = 2.0 * eb
    with np.errstate(invalid="ignore", over="ignore"):
        q = (orig - pred) / step
        ok = np.abs(q) < max_code - 0.5
        mag = np.where(ok, np.floor(np.abs(q) + 0.5), 0.0).astype(np.int64)
        code = np.where(q < 0.0, -mag, mag)
        recon = pred + step * code.astype(np.float64)
        ok &= np.abs(recon - orig) <= eb
    codes = np.where(ok, code, max_code)
    recon = np.where(ok, recon, orig)
    return codes, recon, ~ok
