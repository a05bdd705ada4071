"""Reconstruction quality metrics and the CSV quality report."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .amr.model import ScalarGrid


def _values(g) -> np.ndarray:
    return g.values if isinstance(g, ScalarGrid) else np.asarray(g, dtype=np.float64)


def _check_same(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def psnr(orig, recon) -> float:
    """Peak signal-to-noise ratio in dB; the peak is the range of ``orig``."""
    a, b = _values(orig), _values(recon)
    _check_same(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    rng = float(a.max() - a.min())
    if rng <= 0:
        raise ValueError("psnr needs an original with nonzero range")
    return 20.0 * math.log10(rng) - 10.0 * math.log10(mse)


def _box_sum(x: np.ndarray, w: int) -> np.ndarray:
    """Sums over all valid ``w^3`` windows (stride 1) via summed-volume tables."""
    c = np.zeros(tuple(n + 1 for n in x.shape))
    c[1:, 1:, 1:] = x.cumsum(0).cumsum(1).cumsum(2)
    nx, ny, nz = (n - w + 1 for n in x.shape)

    def s(i, j, k):
        return c[i:i + nx, j:j + ny, k:k + nz]

    return (s(w, w, w) - s(0, w, w) - s(w, 0, w) - s(w, w, 0)
            + s(0, 0, w) + s(0, w, 0) + s(w, 0, 0) - s(0, 0, 0))


def ssim_map(orig, recon, window: int = 7) -> np.ndarray:
    a, b = _values(orig), _values(recon)
    _check_same(a, b)
    if a.ndim != 3 or min(a.shape) < window:
        raise ValueError(f"ssim needs a 3D grid with every axis >= {window}")
    L = float(a.max() - a.min())
    c1, c2 = (0.01 * L) ** 2, (0.03 * L) ** 2
    # moments of shifted data are better conditioned; the means are restored
    shift = float(a.min())
    x, y = a - shift, b - shift
    n = float(window ** 3)
    mx, my = _box_sum(x, window) / n, _box_sum(y, window) / n
    vx = _box_sum(x * x, window) / n - mx * mx
    vy = _box_sum(y * y, window) / n - my * my
    cxy = _box_sum(x * y, window) / n - mx * my
    mx, my = mx + shift, my + shift
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = num / den
    # only reachable when L == 0 and a window is exactly zero on both sides
    s[den == 0] = 1.0
    return np.clip(s, -1.0, 1.0)


def ssim3d(orig, recon, window: int = 7) -> float:
    """Mean SSIM over uniform ``window^3`` windows, valid positions only.

    Window statistics use population moments. Identical inputs give exactly 1.
    """
    a, b = _values(orig), _values(recon)
    if a.shape == b.shape and np.array_equal(a, b):
        return 1.0
    return float(np.mean(ssim_map(a, b, window)))


def rssim(ssim: float) -> float:
    return 1.0 - ssim


def block_discontinuity(field, reference=None, block: int = 6, centering: str = "cell") -> float:
    """Mean jump across block boundary planes, over all three axes.

    With ``reference`` the jumps of ``field - reference`` are measured, so
    the smooth variation of the data itself does not count. For ``cell``
    data the jump at boundary ``b`` is ``f[b] - f[b-1]``. For ``vertex``
    data (one sample more per axis) the boundary is the vertex ``b`` and
    the jump is the mean of its two one-sided differences.
    """
    f = _values(field)
    if reference is not None:
        r = _values(reference)
        _check_same(f, r)
        f = f - r
    if centering not in ("cell", "vertex"):
        raise ValueError("centering must be 'cell' or 'vertex'")
    total, count = 0.0, 0
    for ax in range(3):
        n = f.shape[ax]
        last = n if centering == "cell" else n - 1
        bounds = np.arange(block, last, block)
        if not len(bounds):
            continue
        d = np.abs(np.diff(f, axis=ax))
        if centering == "cell":
            jumps = np.take(d, bounds - 1, axis=ax)
        else:
            jumps = 0.5 * (np.take(d, bounds - 1, axis=ax) + np.take(d, bounds, axis=ax))
        total += float(jumps.sum())
        count += jumps.size
    if count == 0:
        raise ValueError("field has no interior block boundaries")
    return total / count


@dataclass
class QualityRow:
    codec: str
    eb_mode: str
    eb: float
    cr: float
    psnr_db: float
    ssim: float
    rssim: float
    method: str
    interface_open_edges: int
    domain_open_edges: int
    open_edge_length: float


CSV_HEADER = [f.name for f in fields(QualityRow)]


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


@dataclass
class QualityReport:
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows:
            w.writerow([_fmt(v) for v in astuple(row)])
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path

    @classmethod
    def read(cls, path) -> "QualityReport":
        rows = []
        with Path(path).open(newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append(QualityRow(
                    rec["codec"], rec["eb_mode"], float(rec["eb"]), float(rec["cr"]),
                    float(rec["psnr_db"]), float(rec["ssim"]), float(rec["rssim"]), rec["method"],
                    int(rec["interface_open_edges"]), int(rec["domain_open_edges"]),
                    float(rec["open_edge_length"])))
        return cls(rows)


def make_report(rows) -> QualityReport:
    return QualityReport(list(rows))
