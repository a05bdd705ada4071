import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from amrlab.amr import ContainerError, build_amr, generate_field, read_container, write_container


def same_dataset(a, b):
    assert a.coarse_dims == b.coarse_dims and a.refinement_ratio == b.refinement_ratio
    assert len(a.levels) == len(b.levels)
    for la, lb in zip(a.levels, b.levels):
        assert [p.box for p in la.patches] == [p.box for p in lb.patches]
        for pa, pb in zip(la.patches, lb.patches):
            assert pa.data.tobytes() == pb.data.tobytes()


def test_manifest_layout(tmp_path):
    ds = build_amr(generate_field("irregular", 32, 2), 1.0, tile=4)
    write_container(ds, tmp_path / "c")
    m = json.loads((tmp_path / "c" / "manifest.json").read_text())
    assert m["version"] == 1 and m["coarse_dims"] == [16, 16, 16] and m["refinement_ratio"] == 2
    offsets = [p["offset"] for lev in m["levels"] for p in lev["patches"]]
    assert all(o % 8 == 0 for o in offsets)
    raw = (tmp_path / "c" / "data.bin").read_bytes()
    first = ds.levels[0].patches[0].data
    assert raw[:8 * first.size] == first.ravel(order="F").astype("<f8").tobytes()


@settings(max_examples=15)
@given(seed=st.integers(0, 2**63), theta=st.floats(-1.0, 3.0))
def test_roundtrip_is_bit_exact(tmp_path_factory, seed, theta):
    ds = build_amr(generate_field("irregular", 16, seed), theta, tile=2)
    path = write_container(ds, tmp_path_factory.mktemp("c"))
    same_dataset(ds, read_container(path))


@pytest.fixture
def container(tmp_path):
    ds = build_amr(generate_field("smooth", 32), 0.05, tile=4)
    return write_container(ds, tmp_path / "c")


def test_checksum_mismatch(container):
    raw = bytearray((container / "data.bin").read_bytes())
    raw[0] ^= 1
    (container / "data.bin").write_bytes(bytes(raw))
    with pytest.raises(ContainerError, match="checksum"):
        read_container(container)


def test_truncated_data(container):
    m = json.loads((container / "manifest.json").read_text())
    del m["data_sha256"]
    (container / "manifest.json").write_text(json.dumps(m))
    raw = (container / "data.bin").read_bytes()
    (container / "data.bin").write_bytes(raw[:-8])
    with pytest.raises(ContainerError, match="truncated"):
        read_container(container)


@pytest.mark.parametrize("text", ["{not json", '{"version": 1}', '{"version": 7, "coarse_dims": [1,1,1], '
                                  '"refinement_ratio": 2, "levels": []}'])
def test_malformed_manifest(container, text):
    (container / "manifest.json").write_text(text)
    with pytest.raises(ContainerError):
        read_container(container)


def test_missing_files(tmp_path):
    with pytest.raises(ContainerError):
        read_container(tmp_path)


def test_unaligned_offset(container):
    m = json.loads((container / "manifest.json").read_text())
    del m["data_sha256"]
    m["levels"][0]["patches"][0]["offset"] = 4
    (container / "manifest.json").write_text(json.dumps(m))
    with pytest.raises(ContainerError, match="unaligned"):
        read_container(container)


def test_values_survive(container):
    ds = read_container(container)
    assert np.isfinite(ds.levels[0].patches[0].data).all()
