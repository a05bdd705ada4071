"""End-to-end experiment pipeline.

generate -> build AMR -> compress per level -> decompress -> verify bound
-> extract iso-surfaces -> metrics -> report.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .amr.build import _require_valid, build_amr, redundant_mask, theta_for_density, uniformize
from .amr.fields import generate_field
from .amr.model import AMRDataset, AMRLevel, IndexBox, Patch, ScalarGrid
from .codec.field import CompressedField, ErrorBound, compress, decompress
from .iso.dual import extract_dual
from .iso.mesh import TriMesh, open_edge_census
from .iso.resample import domain_box, extract_resampled
from .metrics import QualityReport, QualityRow, psnr, rssim, ssim3d

KINDS = ("smooth", "irregular")
CODECS = ("LR", "INTERP")
BOUNDS = (1e-2, 1e-3, 1e-4)
METHODS = ("resample", "dual-pad", "dual-stitch")
# fine-level share of the domain for each synthetic kind, after the two
# reference runs: smooth data refines little, irregular data a lot
DENSITY = {"smooth": 0.086, "irregular": 0.407}
DEFAULT_SEED = 42
DEFAULT_DIMS = 64
SEED_ENV = "AMRLAB_SEED"


def resolve_seed(seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    return int(env, 0) if env not in (None, "") else int(seed)


def make_dataset(kind: str, dims, seed: int = DEFAULT_SEED, theta: float | None = None,
                 tile: int = 8) -> tuple[AMRDataset, float]:
    """Synthetic two-level dataset; ``theta=None`` picks the kind's reference density."""
    fine = generate_field(kind, dims, seed)
    if theta is None:
        theta = theta_for_density(fine, DENSITY[kind], tile)
    return build_amr(fine, theta, tile), float(theta)


# -- compression of whole datasets -------------------------------------------

@dataclass
class CompressedDataset:
    coarse_dims: tuple
    refinement_ratio: int
    eb: ErrorBound
    codec: str
    level_eb_abs: list
    boxes: list  # per level, list of IndexBox
    fields: list  # per level, list of CompressedField
    zero_redundant: bool = False

    @property
    def nbytes(self) -> int:
        return sum(cf.nbytes for lev in self.fields for cf in lev)

    def raw_nbytes(self) -> int:
        return sum(8 * b.volume for lev in self.boxes for b in lev)

    @property
    def compression_ratio(self) -> float:
        return self.raw_nbytes() / self.nbytes


def _level_range(level: AMRLevel, mask_of=None) -> float:
    lo, hi = np.inf, -np.inf
    for p_no, patch in enumerate(level.patches):
        d = patch.data if mask_of is None else patch.data[~mask_of(p_no)]
        if d.size:
            lo, hi = min(lo, float(d.min())), max(hi, float(d.max()))
    return hi - lo if hi >= lo else 0.0


def compress_dataset(ds: AMRDataset, codec: str, eb: ErrorBound, zero_redundant: bool = False) -> CompressedDataset:
    """Compress every patch separately; a relative bound resolves per level.

    With ``zero_redundant`` the coarse cells shadowed by finer patches are
    set to 0 before compression (they are not needed for uniformization).
    """
    _require_valid(ds)
    boxes, fields_, ebs = [], [], []
    for lev, level in enumerate(ds.levels):
        masks = None
        if zero_redundant and lev < ds.num_levels - 1:
            red = redundant_mask(ds, lev)
            masks = [red[p.box.slices()] for p in level.patches]
        rng = _level_range(level, None if masks is None else (lambda i: masks[i]))
        eb_abs = eb.resolve(value_range=rng)
        boxes.append([p.box for p in level.patches])
        out = []
        for p_no, patch in enumerate(level.patches):
            data = patch.data if masks is None else np.where(masks[p_no], 0.0, patch.data)
            out.append(compress(ScalarGrid(data), codec, eb, value_range=rng))
        fields_.append(out)
        ebs.append(eb_abs)
    return CompressedDataset(ds.coarse_dims, ds.refinement_ratio, eb, codec.upper(), ebs, boxes, fields_,
                             zero_redundant)


def decompress_dataset(cds: CompressedDataset) -> AMRDataset:
    levels = []
    for lev, (boxes, cfs) in enumerate(zip(cds.boxes, cds.fields)):
        levels.append(AMRLevel(lev, [Patch(b, decompress(cf).values) for b, cf in zip(boxes, cfs)]))
    return AMRDataset(cds.coarse_dims, levels, cds.refinement_ratio)


def bound_violations(orig: AMRDataset, recon: AMRDataset, cds: CompressedDataset) -> list[str]:
    """Re-check ``max |orig - recon| <= eb_abs`` for every patch."""
    problems = []
    for lev, (lo, lr) in enumerate(zip(orig.levels, recon.levels)):
        eb_abs = cds.level_eb_abs[lev]
        red = redundant_mask(orig, lev) if cds.zero_redundant and lev < orig.num_levels - 1 else None
        for p_no, (po, pr) in enumerate(zip(lo.patches, lr.patches)):
            err = np.abs(po.data - pr.data)
            if red is not None:
                err = err[~red[po.box.slices()]]
            if err.size and float(err.max()) > eb_abs:
                problems.append(f"level {lev} patch {p_no}: max error {float(err.max()):.6g} > {eb_abs:.6g}")
    return problems


def write_compressed(cds: CompressedDataset, path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    levels = []
    for lev, (boxes, cfs) in enumerate(zip(cds.boxes, cds.fields)):
        entries = []
        for p_no, (box, cf) in enumerate(zip(boxes, cfs)):
            name = f"level{lev}_patch{p_no}.amrz"
            cf.write(path / name)
            entries.append({"lo": list(box.lo), "hi": list(box.hi), "file": name})
        levels.append({"eb_abs": cds.level_eb_abs[lev], "patches": entries})
    manifest = {
        "version": 1,
        "coarse_dims": list(cds.coarse_dims),
        "refinement_ratio": cds.refinement_ratio,
        "codec": cds.codec,
        "eb_mode": cds.eb.mode,
        "eb": cds.eb.value,
        "zero_redundant": cds.zero_redundant,
        "levels": levels,
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return path


def read_compressed(path) -> CompressedDataset:
    path = Path(path)
    try:
        m = json.loads((path / "manifest.json").read_text())
        boxes = [[IndexBox(tuple(e["lo"]), tuple(e["hi"])) for e in lev["patches"]] for lev in m["levels"]]
        files = [[path / e["file"] for e in lev["patches"]] for lev in m["levels"]]
        ebs = [float(lev["eb_abs"]) for lev in m["levels"]]
        eb = ErrorBound(m["eb_mode"], float(m["eb"]))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed compressed dataset at {path}: {exc}") from exc
    fields_ = [[CompressedField.read(f) for f in lev] for lev in files]
    return CompressedDataset(tuple(m["coarse_dims"]), int(m["refinement_ratio"]), eb, m["codec"], ebs, boxes,
                             fields_, bool(m.get("zero_redundant", False)))


# -- iso-surfaces and reports -------------------------------------------------

def extract(ds: AMRDataset, method: str, iso: float) -> TriMesh:
    if method == "resample":
        return extract_resampled(ds, iso)
    if method == "dual-pad":
        return extract_dual(ds, iso, "padding")
    if method == "dual-stitch":
        return extract_dual(ds, iso, "stitch")
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def default_iso(ds: AMRDataset) -> float:
    """Mean of the uniformized field."""
    return float(uniformize(ds).values.mean())


@dataclass
class CellResult:
    """Outcome of one (kind, codec, bound) cell of the experiment matrix."""

    kind: str
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)


def evaluate(orig: AMRDataset, codec: str, eb: ErrorBound, iso: float, methods=METHODS,
             kind: str = "", zero_redundant: bool = False) -> CellResult:
    cds = compress_dataset(orig, codec, eb, zero_redundant)
    recon = decompress_dataset(cds)
    res = CellResult(kind, violations=bound_violations(orig, recon, cds))
    u_o, u_r = uniformize(orig), uniformize(recon)
    p, s = psnr(u_o, u_r), ssim3d(u_o, u_r)
    dom = domain_box(orig)
    for method in methods:
        census = open_edge_census(extract(recon, method, iso), dom)
        res.rows.append(QualityRow(cds.codec, eb.mode, eb.value, cds.compression_ratio, p, s, rssim(s), method,
                                   census.interface_open_edges, census.domain_open_edges,
                                   census.total_open_edge_length))
    return res


@dataclass
class RunConfig:
    kinds: tuple = KINDS
    dims: int = DEFAULT_DIMS
    seed: int = DEFAULT_SEED
    theta: float | None = None
    codecs: tuple = CODECS
    eb_mode: str = "relative"
    bounds: tuple = BOUNDS
    iso: float | None = None
    methods: tuple = METHODS
    out_dir: str | None = None
    jobs: int = 1


def _run_cell(args) -> CellResult:
    kind, dims, seed, theta, codec, eb_mode, eb_value, iso, methods = args
    ds, _ = make_dataset(kind, dims, seed, theta)
    if iso is None:
        iso = default_iso(ds)
    return evaluate(ds, codec, ErrorBound(eb_mode, eb_value), iso, methods, kind)


def run_matrix(cfg: RunConfig) -> tuple[QualityReport, list[str]]:
    """Run every (kind, codec, bound) cell; rows come out in that order.

    Returns the consolidated report and any bound violations. With an
    output directory, each cell is written to ``cells/`` first, then merged
    into ``matrix.csv`` plus one ``matrix_<kind>.csv`` per kind.
    """
    tasks = [(k, cfg.dims, cfg.seed, cfg.theta, c, cfg.eb_mode, e, cfg.iso, tuple(cfg.methods))
             for k in cfg.kinds for c in cfg.codecs for e in cfg.bounds]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]
    violations = [f"{r.kind}: {v}" for r in results for v in r.violations]
    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        cells = out / "cells"
        cells.mkdir(parents=True, exist_ok=True)
        for stale in cells.glob("*.csv"):
            stale.unlink()
        for n, (task, r) in enumerate(zip(tasks, results)):
            QualityReport(r.rows).write(cells / f"{n:03d}_{task[0]}_{task[4]}_{task[6]:g}.csv")
        for kind in cfg.kinds:
            QualityReport([row for r in results if r.kind == kind for row in r.rows]).write(out / f"matrix_{kind}.csv")
        merged = [QualityReport.read(p).rows for p in sorted(cells.glob("*.csv"))]
        report = QualityReport([row for rows in merged for row in rows])
        report.write(out / "matrix.csv")
        return report, violations
    return QualityReport([row for r in results for row in r.rows]), violations
