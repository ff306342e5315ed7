"""KITTI-style binary scan and label I/O.

Scan files (``.bin``) hold N consecutive point records, each four
little-endian float32 values ``(x, y, z, intensity)`` with x/y/z in meters
in the sensor frame, so the file size is always a multiple of 16 bytes.
Label files (``.label``) hold N little-endian uint32 words, one per point:
the low 16 bits carry the semantic class, the high 16 bits an instance id.

Scans and labels are paired by shared stem under sibling directories,
``velodyne/XXXXXX.bin`` <-> ``labels/XXXXXX.label``.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import LengthMismatchError, MalformedFileError

logger = logging.getLogger(__name__)

POINT_RECORD_BYTES = 16
LABEL_RECORD_BYTES = 4

# On-disk layout is fixed little-endian regardless of host.
_SCAN_DTYPE = np.dtype("<f4")
_LABEL_DTYPE = np.dtype("<u4")

SEMANTIC_MASK = 0xFFFF


@dataclass(frozen=True)
class PointCloud:
    """Ordered set of (x, y, z, intensity) records.

    ``points`` is an (N, 4) float32 array; column order is x, y, z,
    intensity. x/y/z must be finite (intensity is carried as payload and is
    not range-checked). The array is frozen so a cloud can be shared freely.
    """

    points: np.ndarray
    frame_id: str | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float32)
        if pts.ndim != 2 or pts.shape[1] != 4:
            raise ValueError(f"expected an (N, 4) array, got shape {self.points.shape}")
        if not np.all(np.isfinite(pts[:, :3])):
            raise ValueError("point coordinates must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def xyz(self) -> np.ndarray:
        """(N, 3) view of the coordinates."""
        return self.points[:, :3]

    @property
    def intensity(self) -> np.ndarray:
        return self.points[:, 3]

    def select(self, index: np.ndarray) -> "PointCloud":
        """Subset by boolean mask or index array, preserving input order."""
        return PointCloud(self.points[index], frame_id=self.frame_id)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.frame_id == other.frame_id and np.array_equal(
            self.points, other.points
        )


@dataclass(frozen=True)
class LabelVector:
    """Per-point uint32 labels: semantic class in the low 16 bits,
    instance id in the high 16 bits."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.uint32)
        if vals.ndim != 1:
            raise ValueError(f"expected a 1-D label array, got shape {self.values.shape}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def semantic_class(self) -> np.ndarray:
        return (self.values & SEMANTIC_MASK).astype(np.uint16)

    @property
    def instance_id(self) -> np.ndarray:
        return (self.values >> 16).astype(np.uint16)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelVector):
            return NotImplemented
        return np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class LabeledCloud:
    """A cloud with index-aligned labels plus the set of semantic class ids
    the caller designates as snow/noise.

    ``snow_classes`` is configuration supplied by the caller (dataset class
    ids are never hardcoded here).
    """

    cloud: PointCloud
    labels: LabelVector
    snow_classes: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.cloud) != len(self.labels):
            raise LengthMismatchError(
                f"cloud has {len(self.cloud)} points but label vector has "
                f"{len(self.labels)} entries"
            )
        object.__setattr__(self, "snow_classes", frozenset(self.snow_classes))

    def __len__(self) -> int:
        return len(self.cloud)

    @property
    def snow_mask(self) -> np.ndarray:
        """Boolean mask, true where the semantic class is a snow class."""
        sem = self.labels.semantic_class
        mask = np.zeros(len(self), dtype=bool)
        for cls in self.snow_classes:
            mask |= sem == cls
        return mask


def read_cloud(
    path: str | os.PathLike,
    frame_id: str | None = None,
    on_nonfinite: str = "error",
) -> PointCloud:
    """Read a binary scan file into a PointCloud (points in file order).

    ``on_nonfinite`` controls what happens when a record has a non-finite
    coordinate: ``"error"`` (default) raises, ``"drop"`` removes the record
    and logs how many were dropped. Non-finite points are never kept.
    """
    if on_nonfinite not in ("error", "drop"):
        raise ValueError(f"on_nonfinite must be 'error' or 'drop', got {on_nonfinite!r}")
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) % POINT_RECORD_BYTES != 0:
        raise MalformedFileError(
            f"{path}: size {len(raw)} is not a multiple of {POINT_RECORD_BYTES} bytes"
        )
    pts = np.frombuffer(raw, dtype=_SCAN_DTYPE).astype(np.float32).reshape(-1, 4)
    bad = ~np.isfinite(pts[:, :3]).all(axis=1)
    if bad.any():
        if on_nonfinite == "error":
            raise MalformedFileError(
                f"{path}: {int(bad.sum())} points have non-finite coordinates"
            )
        logger.warning("%s: dropped %d non-finite points", path, int(bad.sum()))
        pts = pts[~bad]
    if frame_id is None:
        frame_id = path.stem
    return PointCloud(pts, frame_id=frame_id)


def write_cloud(cloud: PointCloud, path: str | os.PathLike) -> None:
    """Write a scan file; ``read_cloud(write_cloud(c)) == c`` bit-exactly."""
    Path(path).write_bytes(cloud.points.astype(_SCAN_DTYPE).tobytes())


def read_labels(path: str | os.PathLike) -> LabelVector:
    """Read a label file into a LabelVector (labels in file order)."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) % LABEL_RECORD_BYTES != 0:
        raise MalformedFileError(
            f"{path}: size {len(raw)} is not a multiple of {LABEL_RECORD_BYTES} bytes"
        )
    return LabelVector(np.frombuffer(raw, dtype=_LABEL_DTYPE).astype(np.uint32))


def write_labels(labels: LabelVector, path: str | os.PathLike) -> None:
    """Write a label file; round-trips bit-exactly through read_labels."""
    Path(path).write_bytes(labels.values.astype(_LABEL_DTYPE).tobytes())


def attach_labels(
    cloud: PointCloud,
    labels: LabelVector,
    snow_classes: frozenset[int] | set[int],
) -> LabeledCloud:
    """Pair a cloud with its label vector (lengths must match)."""
    return LabeledCloud(cloud, labels, frozenset(snow_classes))


def label_path_for(scan_path: str | os.PathLike) -> Path:
    """Map ``.../velodyne/XXXXXX.bin`` to ``.../labels/XXXXXX.label``."""
    scan_path = Path(scan_path)
    return scan_path.parent.parent / "labels" / (scan_path.stem + ".label")


def read_manifest(path: str | os.PathLike) -> list[tuple[Path, Path | None]]:
    """Read a corpus manifest: one scan per line, optionally followed by a
    tab and its label path. Relative paths resolve against the manifest dir.
    """
    path = Path(path)
    base = path.parent
    pairs = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        scan = base / parts[0]
        label = base / parts[1] if len(parts) > 1 and parts[1] else None
        pairs.append((scan, label))
    return pairs


def write_manifest(
    path: str | os.PathLike, pairs: list[tuple[str | os.PathLike, str | os.PathLike | None]]
) -> None:
    """Write a corpus manifest (paths stored relative to the manifest dir
    when possible, for a relocatable corpus)."""
    path = Path(path)
    base = path.parent

    def rel(p):
        p = Path(p)
        try:
            return p.relative_to(base).as_posix()
        except ValueError:
            return p.as_posix()

    lines = []
    for scan, label in pairs:
        if label is None:
            lines.append(rel(scan))
        else:
            lines.append(f"{rel(scan)}\t{rel(label)}")
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
