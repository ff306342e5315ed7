import struct

import numpy as np
import pytest

from desnow import (
    LabeledCloud,
    LabelVector,
    LengthMismatchError,
    MalformedFileError,
    PointCloud,
    attach_labels,
    read_cloud,
    read_labels,
    write_cloud,
    write_labels,
)
from desnow.cloud_io import label_path_for, read_manifest, write_manifest

from conftest import random_cloud


TWO_POINT_BYTES = struct.pack("<8f", 1, 2, 3, 0.5, 4, 5, 6, 0.1)


def test_read_cloud_decodes_hand_written_buffer(tmp_path):
    p = tmp_path / "scan.bin"
    p.write_bytes(TWO_POINT_BYTES)
    cloud = read_cloud(p)
    assert len(cloud) == 2
    expected = np.array([[1, 2, 3, 0.5], [4, 5, 6, 0.1]], dtype=np.float32)
    assert np.array_equal(cloud.points, expected)


def test_read_cloud_empty_file(tmp_path):
    p = tmp_path / "empty.bin"
    p.write_bytes(b"")
    assert len(read_cloud(p)) == 0


def test_read_cloud_rejects_bad_size(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"\x00" * 17)
    with pytest.raises(MalformedFileError):
        read_cloud(p)


def test_read_cloud_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_cloud(tmp_path / "nope.bin")


def test_write_cloud_is_exact_inverse(tmp_path):
    cloud = PointCloud(np.array([[1, 2, 3, 0.5], [4, 5, 6, 0.1]], dtype=np.float32))
    p = tmp_path / "scan.bin"
    write_cloud(cloud, p)
    assert p.read_bytes() == TWO_POINT_BYTES


def test_write_empty_cloud(tmp_path):
    p = tmp_path / "empty.bin"
    write_cloud(PointCloud(np.empty((0, 4), dtype=np.float32)), p)
    assert p.read_bytes() == b""


def test_cloud_round_trip_random(tmp_path, rng):
    for i in range(50):
        n = int(rng.integers(0, 200))
        cloud = random_cloud(rng, n, scale=1e6)
        p = tmp_path / f"{i}.bin"
        write_cloud(cloud, p)
        back = read_cloud(p, frame_id=cloud.frame_id)
        assert np.array_equal(back.points, cloud.points)


def test_nonfinite_coordinates_error_by_default(tmp_path):
    pts = struct.pack("<8f", 1, 2, 3, 0.5, float("nan"), 5, 6, 0.1)
    p = tmp_path / "nan.bin"
    p.write_bytes(pts)
    with pytest.raises(MalformedFileError):
        read_cloud(p)


def test_nonfinite_coordinates_dropped_on_request(tmp_path, caplog):
    pts = struct.pack("<8f", 1, 2, 3, 0.5, float("inf"), 5, 6, 0.1)
    p = tmp_path / "inf.bin"
    p.write_bytes(pts)
    with caplog.at_level("WARNING", logger="desnow.cloud_io"):
        cloud = read_cloud(p, on_nonfinite="drop")
    assert len(cloud) == 1
    assert "dropped 1" in caplog.text
    # non-finite intensity is payload, not validated
    pts = struct.pack("<4f", 1, 2, 3, float("nan"))
    p.write_bytes(pts)
    assert len(read_cloud(p)) == 1


def test_read_labels_decodes_words(tmp_path):
    p = tmp_path / "a.label"
    p.write_bytes(struct.pack("<2I", 110, 0))
    labels = read_labels(p)
    assert labels.values.tolist() == [110, 0]


def test_label_bit_layout():
    labels = LabelVector(np.array([0x0001006E], dtype=np.uint32))
    assert labels.semantic_class.tolist() == [110]
    assert labels.instance_id.tolist() == [1]


def test_read_labels_empty_and_malformed(tmp_path):
    p = tmp_path / "e.label"
    p.write_bytes(b"")
    assert len(read_labels(p)) == 0
    p.write_bytes(b"\x00" * 6)
    with pytest.raises(MalformedFileError):
        read_labels(p)


def test_label_round_trip(tmp_path, rng):
    p = tmp_path / "r.label"
    write_labels(LabelVector(np.array([110, 0], dtype=np.uint32)), p)
    assert read_labels(p).values.tolist() == [110, 0]
    write_labels(LabelVector(np.empty(0, dtype=np.uint32)), p)
    assert p.read_bytes() == b""
    for _ in range(20):
        vals = rng.integers(0, 2**32, size=int(rng.integers(0, 100)), dtype=np.uint64)
        labels = LabelVector(vals.astype(np.uint32))
        write_labels(labels, p)
        assert read_labels(p) == labels


def test_files_are_little_endian(tmp_path):
    cloud = PointCloud(np.array([[1.0, 0, 0, 0]], dtype=np.float32))
    p = tmp_path / "le.bin"
    write_cloud(cloud, p)
    assert p.read_bytes()[:4] == struct.pack("<f", 1.0)
    write_labels(LabelVector(np.array([1], dtype=np.uint32)), tmp_path / "le.label")
    assert (tmp_path / "le.label").read_bytes() == b"\x01\x00\x00\x00"


def test_attach_labels():
    cloud = PointCloud(np.zeros((2, 4), dtype=np.float32))
    labels = LabelVector(np.array([110, 40], dtype=np.uint32))
    labeled = attach_labels(cloud, labels, {110})
    assert isinstance(labeled, LabeledCloud)
    assert labeled.snow_mask.tolist() == [True, False]

    with pytest.raises(LengthMismatchError, match="2.*3|3.*2"):
        attach_labels(cloud, LabelVector(np.array([1, 2, 3], dtype=np.uint32)), {110})

    empty = attach_labels(
        PointCloud(np.empty((0, 4), dtype=np.float32)),
        LabelVector(np.empty(0, dtype=np.uint32)),
        {110},
    )
    assert len(empty) == 0


def test_snow_mask_uses_semantic_class_only():
    cloud = PointCloud(np.zeros((2, 4), dtype=np.float32))
    # instance id 7 in high bits must not affect class matching
    labels = LabelVector(np.array([(7 << 16) | 110, 110], dtype=np.uint32))
    labeled = attach_labels(cloud, labels, {110})
    assert labeled.snow_mask.all()


def test_point_cloud_rejects_nonfinite_coordinates():
    pts = np.zeros((1, 4), dtype=np.float32)
    pts[0, 2] = np.nan
    with pytest.raises(ValueError):
        PointCloud(pts)


def test_order_preserved_and_immutable(tmp_path):
    pts = np.arange(20, dtype=np.float32).reshape(5, 4)
    cloud = PointCloud(pts)
    p = tmp_path / "o.bin"
    write_cloud(cloud, p)
    back = read_cloud(p)
    assert np.array_equal(back.points, pts)
    with pytest.raises(ValueError):
        back.points[0, 0] = 9.0


def test_label_path_convention():
    assert str(label_path_for("seq/velodyne/000123.bin")).endswith("seq/labels/000123.label")


def test_manifest_round_trip(tmp_path):
    pairs = [
        (tmp_path / "velodyne/000000.bin", tmp_path / "labels/000000.label"),
        (tmp_path / "velodyne/000001.bin", None),
    ]
    m = tmp_path / "manifest.txt"
    write_manifest(m, pairs)
    back = read_manifest(m)
    assert back == [(pairs[0][0], pairs[0][1]), (pairs[1][0], None)]
