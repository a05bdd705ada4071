"""On-disk AMR container: ``manifest.json`` + ``data.bin``."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .model import AMRDataset, AMRLevel, IndexBox, Patch

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
DATA = "data.bin"


class ContainerError(ValueError):
    """Raised for malformed, truncated or corrupted containers."""


def write_container(ds: AMRDataset, path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    chunks = []
    offset = 0
    levels = []
    for level in ds.levels:
        entries = []
        for patch in level.patches:
            raw = np.ascontiguousarray(patch.data.ravel(order="F"), dtype="<f8").tobytes()
            entries.append({"lo": list(patch.box.lo), "hi": list(patch.box.hi), "offset": offset})
            chunks.append(raw)
            offset += len(raw)  # multiples of 8, so offsets stay aligned
        levels.append({"patches": entries})
    blob = b"".join(chunks)
    manifest = {
        "version": FORMAT_VERSION,
        "coarse_dims": list(ds.coarse_dims),
        "refinement_ratio": ds.refinement_ratio,
        "levels": levels,
        "data_sha256": hashlib.sha256(blob).hexdigest(),
    }
    (path / DATA).write_bytes(blob)
    (path / MANIFEST).write_text(json.dumps(manifest, indent=1))
    return path


def read_container(path) -> AMRDataset:
    path = Path(path)
    try:
        manifest = json.loads((path / MANIFEST).read_text())
    except FileNotFoundError as exc:
        raise ContainerError(f"missing {MANIFEST} in {path}") from exc
    except json.JSONDecodeError as exc:
        raise ContainerError(f"malformed manifest: {exc}") from exc
    try:
        blob = (path / DATA).read_bytes()
    except FileNotFoundError as exc:
        raise ContainerError(f"missing {DATA} in {path}") from exc

    try:
        if manifest["version"] != FORMAT_VERSION:
            raise ContainerError(f"unsupported container version {manifest['version']}")
        coarse_dims = tuple(int(v) for v in manifest["coarse_dims"])
        ratio = int(manifest["refinement_ratio"])
        level_specs = manifest["levels"]
        expected_sha = manifest.get("data_sha256")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ContainerError):
            raise
        raise ContainerError(f"malformed manifest: {exc!r}") from exc
    if len(coarse_dims) != 3:
        raise ContainerError("malformed manifest: coarse_dims needs 3 entries")
    if expected_sha is not None and hashlib.sha256(blob).hexdigest() != expected_sha:
        raise ContainerError("checksum mismatch in data.bin")

    levels = []
    for lev, lev_info in enumerate(level_specs):
        patches = []
        try:
            entries = lev_info["patches"]
        except (KeyError, TypeError) as exc:
            raise ContainerError(f"malformed manifest: level {lev}") from exc
        for p_no, entry in enumerate(entries):
            try:
                box = IndexBox(tuple(entry["lo"]), tuple(entry["hi"]))
                offset = int(entry["offset"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ContainerError(f"malformed manifest: level {lev} patch {p_no}") from exc
            if not box.is_valid():
                raise ContainerError(f"malformed manifest: bad box at level {lev} patch {p_no}")
            if offset % 8:
                raise ContainerError(f"unaligned offset at level {lev} patch {p_no}")
            nbytes = 8 * box.volume
            if offset < 0 or offset + nbytes > len(blob):
                raise ContainerError(f"truncated data for level {lev} patch {p_no}")
            flat = np.frombuffer(blob, dtype="<f8", count=box.volume, offset=offset)
            patches.append(Patch(box, flat.astype(np.float64).reshape(box.shape, order="F")))
        levels.append(AMRLevel(lev, patches))
    return AMRDataset(coarse_dims, levels, ratio)
