"""Command-line entry point: ``amrlab <command> [flags]``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .amr.build import level_densities, uniformize
from .amr.container import read_container, write_container
from .codec.field import ErrorBound
from .iso.mesh import export_obj, open_edge_census, read_obj
from .iso.resample import demo_1d, domain_box
from . import pipeline
from .metrics import QualityReport, QualityRow, psnr, rssim, ssim3d

log = logging.getLogger("amrlab")

EXIT_OK = 0
EXIT_BOUND = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _dims(text: str):
    parts = [int(p) for p in text.replace("x", ",").split(",") if p]
    if len(parts) == 1:
        parts *= 3
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("dims must be N or NX,NY,NZ")
    return tuple(parts)


def _floats(text: str):
    return tuple(float(v) for v in text.split(",") if v)


def _names(text: str):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _error_bound(args) -> ErrorBound:
    try:
        return ErrorBound(args.eb_mode, args.eb)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- commands ------------------------------------------------------------------

def cmd_gen(args) -> int:
    seed = pipeline.resolve_seed(args.seed)
    try:
        ds, theta = pipeline.make_dataset(args.kind, args.dims, seed, args.theta, args.tile)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_container(ds, args.output)
    dens = level_densities(ds)
    print(f"wrote {args.output}: kind={args.kind} dims={'x'.join(map(str, args.dims))} seed={seed} "
          f"theta={theta:.6g} densities=" + ",".join(f"{d:.3f}" for d in dens))
    return EXIT_OK


def cmd_compress(args) -> int:
    ds = read_container(args.input)
    eb = _error_bound(args)
    cds = pipeline.compress_dataset(ds, args.codec, eb, args.zero_redundant)
    pipeline.write_compressed(cds, args.output)
    for lev, (boxes, cfs) in enumerate(zip(cds.boxes, cds.fields)):
        raw = sum(8 * b.volume for b in boxes)
        packed = sum(cf.nbytes for cf in cfs)
        cr = f"{raw / packed:.3f}" if packed else "n/a"
        print(f"level {lev}: patches={len(cfs)} eb_abs={cds.level_eb_abs[lev]:.6g} cr={cr}")
    print(f"total: cr={cds.compression_ratio:.3f} bytes={cds.nbytes}")
    # never trust the codec: decode again and re-check the bound
    problems = pipeline.bound_violations(ds, pipeline.decompress_dataset(cds), cds)
    for p in problems:
        print(f"BOUND VIOLATION {p}", file=sys.stderr)
    return EXIT_BOUND if problems else EXIT_OK


def cmd_decompress(args) -> int:
    cds = pipeline.read_compressed(args.input)
    recon = pipeline.decompress_dataset(cds)
    write_container(recon, args.output)
    print(f"wrote {args.output}")
    if args.original is None:
        return EXIT_OK
    problems = pipeline.bound_violations(read_container(args.original), recon, cds)
    for p in problems:
        print(f"BOUND VIOLATION {p}", file=sys.stderr)
    if not problems:
        print("bound verified")
    return EXIT_BOUND if problems else EXIT_OK


def cmd_isosurface(args) -> int:
    ds = read_container(args.input)
    iso = pipeline.default_iso(ds) if args.iso is None else args.iso
    try:
        mesh = pipeline.extract(ds, args.method, iso)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    export_obj(mesh, args.output)
    census = open_edge_census(mesh, domain_box(ds))
    info = {"method": args.method, "iso": iso, "vertices": mesh.n_vertices, "triangles": mesh.n_triangles,
            **census.as_dict()}
    census_path = Path(args.census) if args.census else Path(args.output).with_suffix(".census.json")
    census_path.write_text(json.dumps(info, indent=1))
    print(json.dumps(info))
    return EXIT_OK


def cmd_metrics(args) -> int:
    orig = read_container(args.original)
    recon = read_container(args.recon)
    u_o, u_r = uniformize(orig), uniformize(recon)
    if u_o.dims != u_r.dims:
        raise UsageError("original and reconstruction have different dimensions")
    p, s = psnr(u_o, u_r), ssim3d(u_o, u_r)
    codec, mode, eb, cr = "-", "-", float("nan"), float("nan")
    if args.compressed:
        cds = pipeline.read_compressed(args.compressed)
        codec, mode, eb, cr = cds.codec, cds.eb.mode, cds.eb.value, cds.compression_ratio
    meshes = {}
    for item in args.mesh or []:
        method, _, path = item.partition("=")
        if not path:
            raise UsageError(f"--mesh expects METHOD=PATH, got {item!r}")
        meshes[method] = read_obj(path)
    if not meshes:
        iso = pipeline.default_iso(orig) if args.iso is None else args.iso
        meshes = {m: pipeline.extract(recon, m, iso) for m in args.methods}
    dom = domain_box(orig)
    rows = []
    for method, mesh in meshes.items():
        c = open_edge_census(mesh, dom)
        rows.append(QualityRow(codec, mode, eb, cr, p, s, rssim(s), method, c.interface_open_edges,
                               c.domain_open_edges, c.total_open_edge_length))
    report = QualityReport(rows)
    if args.output:
        report.write(args.output)
    sys.stdout.write(report.to_csv())
    return EXIT_OK


def cmd_matrix(args) -> int:
    cfg = pipeline.RunConfig(kinds=args.kinds, dims=args.dims, seed=pipeline.resolve_seed(args.seed),
                             theta=args.theta, codecs=args.codecs, eb_mode=args.eb_mode, bounds=args.bounds,
                             iso=args.iso, methods=args.methods, out_dir=args.output, jobs=args.jobs)
    for name in cfg.kinds:
        if name not in pipeline.KINDS:
            raise UsageError(f"unknown kind {name!r}")
    for name in cfg.methods:
        if name not in pipeline.METHODS:
            raise UsageError(f"unknown method {name!r}")
    log.info("matrix: %d cells, jobs=%d", len(cfg.kinds) * len(cfg.codecs) * len(cfg.bounds), cfg.jobs)
    report, problems = pipeline.run_matrix(cfg)
    if not args.output:
        sys.stdout.write(report.to_csv())
    else:
        print(f"wrote {len(report.rows)} rows to {Path(args.output) / 'matrix.csv'}")
    for p in problems:
        print(f"BOUND VIOLATION {p}", file=sys.stderr)
    return EXIT_BOUND if problems else EXIT_OK


def cmd_demo1d(args) -> int:
    try:
        out = demo_1d(args.values, args.block)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    w = csv.writer(sys.stdout, lineterminator="\n")
    for name in ("original", "blocked", "resampled"):
        w.writerow([name] + [f"{v:g}" for v in out[name]])
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="amrlab", description="AMR compression and iso-surface experiments.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic two-level AMR container")
    p.add_argument("--kind", choices=pipeline.KINDS, default="smooth")
    p.add_argument("--dims", type=_dims, default=(pipeline.DEFAULT_DIMS,) * 3, help="fine dims: N or NX,NY,NZ")
    p.add_argument("--theta", type=float, default=None,
                   help="refinement threshold; default picks the kind's reference fine density")
    p.add_argument("--tile", type=int, default=8)
    p.add_argument("--seed", type=int, default=pipeline.DEFAULT_SEED)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    def eb_flags(q):
        q.add_argument("--eb", type=float, default=1e-3)
        q.add_argument("--eb-mode", choices=("relative", "absolute"), default="relative")

    p = sub.add_parser("compress", help="compress a container level by level")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--codec", type=str.upper, choices=pipeline.CODECS, default="LR")
    eb_flags(p)
    p.add_argument("--zero-redundant", action="store_true", help="zero shadowed coarse cells first")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="rebuild a container from compressed patches")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--original", help="original container; re-checks the error bound")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("isosurface", help="extract an iso-surface to OBJ plus a census JSON")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True, help="OBJ path")
    p.add_argument("--method", choices=pipeline.METHODS, default="resample")
    p.add_argument("--iso", type=float, default=None, help="default: mean of the uniformized field")
    p.add_argument("--census", help="census JSON path (default: next to the OBJ)")
    p.set_defaults(func=cmd_isosurface)

    p = sub.add_parser("metrics", help="quality report for one reconstruction")
    p.add_argument("--original", required=True)
    p.add_argument("--recon", required=True)
    p.add_argument("--compressed", help="compressed directory, for codec, bound and CR columns")
    p.add_argument("--mesh", action="append", help="METHOD=PATH.obj; repeatable")
    p.add_argument("--methods", type=_names, default=pipeline.METHODS)
    p.add_argument("--iso", type=float, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("matrix", help="full kinds x codecs x bounds x methods sweep")
    p.add_argument("--dims", type=_dims, default=(pipeline.DEFAULT_DIMS,) * 3)
    p.add_argument("--seed", type=int, default=pipeline.DEFAULT_SEED)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--kinds", type=_names, default=pipeline.KINDS)
    p.add_argument("--codecs", type=lambda s: tuple(v.upper() for v in _names(s)), default=pipeline.CODECS)
    p.add_argument("--bounds", type=_floats, default=pipeline.BOUNDS)
    p.add_argument("--eb-mode", choices=("relative", "absolute"), default="relative")
    p.add_argument("--methods", type=_names, default=pipeline.METHODS)
    p.add_argument("--iso", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("demo1d", help="1D block-average and resampling demo")
    p.add_argument("--values", type=_floats, default=tuple(float(v) for v in range(9)))
    p.add_argument("--block", type=int, default=3)
    p.set_defaults(func=cmd_demo1d)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"amrlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
