"""Snow de-noising filters: SOR, ROR, DROR, and DSOR.

All four filters are pure functions of (cloud, params). Each one builds its
own spatial index, classifies every point as kept (inlier) or removed, and
returns a FilterResult carrying the keep mask plus per-point diagnostics.
The statistical filters share the same decision rule

    keep point i  iff  mean_knn_distance_i < threshold_i   (strict)

where SOR uses one global threshold T_g = mu + sigma * s computed from the
mean k-nearest-neighbor distances of the whole cloud, and DSOR rescales it
per point with the sensor range:

    T_d_i = T_g * r * distance_i,   distance_i = sqrt(x^2 + y^2 + z^2)

so that the growing point spacing at range is tolerated while dense snow
clutter near the sensor is not. Equality with the threshold classifies a
point as an outlier; with a zero-variance cloud and s = 0 this removes
every point, which is the documented degenerate case of the strict rule.

The count-based filters keep point i iff it has at least ``min_neighbors``
other points within a search radius: fixed for ROR, range-proportional for
DROR (sr_i = max(sr_min, beta * azimuth_resolution * horizontal_range_i),
the horizontal range being sqrt(x^2 + y^2)).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .cloud_io import PointCloud
from .errors import DegenerateCloudError, LengthMismatchError
from .spatial import SpatialIndex

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SorParams:
    """k: neighbor count; s: stddev multiplier."""

    k: int
    s: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not math.isfinite(self.s):
            raise ValueError(f"s must be finite, got {self.s}")


@dataclass(frozen=True)
class RorParams:
    """radius: fixed search radius in meters; min_neighbors: keep threshold."""

    radius: float
    min_neighbors: int

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.min_neighbors < 1:
            raise ValueError(f"min_neighbors must be >= 1, got {self.min_neighbors}")


@dataclass(frozen=True)
class DrorParams:
    """azimuth_resolution: radians between beams; beta: radius multiplier;
    sr_min: minimum search radius in meters; min_neighbors: keep threshold."""

    azimuth_resolution: float
    beta: float
    sr_min: float
    min_neighbors: int

    def __post_init__(self):
        for name in ("azimuth_resolution", "beta", "sr_min"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.min_neighbors < 1:
            raise ValueError(f"min_neighbors must be >= 1, got {self.min_neighbors}")


@dataclass(frozen=True)
class DsorParams:
    """k: neighbor count; s: stddev multiplier; r: range multiplier in 1/m."""

    k: int
    s: float
    r: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not math.isfinite(self.s):
            raise ValueError(f"s must be finite, got {self.s}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")


@dataclass(frozen=True)
class GlobalStats:
    """Aggregate of the per-point mean kNN distances: mu is their mean,
    sigma the sample standard deviation, t_g = mu + sigma * s."""

    mu: float
    sigma: float
    t_g: float


@dataclass(frozen=True)
class FilterResult:
    """Keep mask plus per-point diagnostics for one filter run.

    keep_mask          (N,) bool, true = inlier/kept
    mean_knn_distance  (N,) float64, only for the statistical filters
    ranges             (N,) float64, the range measure the filter applied
                       (3-D for SOR/ROR/DSOR diagnostics, horizontal for DROR)
    threshold          (N,) float64, the distance threshold or search radius
                       applied at each point
    stats              global mu/sigma/T_g, only for the statistical filters
    """

    keep_mask: np.ndarray
    ranges: np.ndarray
    threshold: np.ndarray
    mean_knn_distance: np.ndarray | None = None
    stats: GlobalStats | None = None

    def __post_init__(self):
        mask = np.ascontiguousarray(self.keep_mask, dtype=bool)
        object.__setattr__(self, "keep_mask", mask)

    @property
    def kept_count(self) -> int:
        return int(self.keep_mask.sum())

    @property
    def removed_count(self) -> int:
        return int((~self.keep_mask).sum())

    def __len__(self) -> int:
        return self.keep_mask.shape[0]


def ranges_3d(cloud: PointCloud) -> np.ndarray:
    """Per-point distance from the sensor origin, sqrt(x^2 + y^2 + z^2)."""
    xyz = cloud.xyz.astype(np.float64)
    return np.sqrt(np.einsum("ij,ij->i", xyz, xyz))


def ranges_horizontal(cloud: PointCloud) -> np.ndarray:
    """Per-point horizontal range, sqrt(x^2 + y^2)."""
    xyz = cloud.xyz.astype(np.float64)
    return np.hypot(xyz[:, 0], xyz[:, 1])


def mean_knn_distances(
    cloud: PointCloud,
    k: int,
    workers: int = 1,
    index: SpatialIndex | None = None,
) -> np.ndarray:
    """Per-point arithmetic mean of the distances to the k nearest
    neighbors (self excluded). k is clamped to N-1 with a warning."""
    n = len(cloud)
    if n < 2:
        raise DegenerateCloudError(f"need at least 2 points, got {n}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n - 1:
        logger.warning("k=%d clamped to N-1=%d for a %d-point cloud", k, n - 1, n)
        k = n - 1
    if index is None:
        index = SpatialIndex(cloud)
    return index.knn_distances_all(k, workers=workers).mean(axis=1)


def global_threshold(mean_distances: np.ndarray, s: float) -> GlobalStats:
    """mu, sigma (sample stddev, N-1 divisor; 0 for a single value) and
    t_g = mu + sigma * s."""
    d = np.asarray(mean_distances, dtype=np.float64)
    if d.size == 0:
        raise ValueError("mean_distances is empty")
    if not np.isfinite(d).all():
        raise ValueError("mean_distances contains non-finite values")
    mu = float(d.mean())
    sigma = float(d.std(ddof=1)) if d.size > 1 else 0.0
    return GlobalStats(mu=mu, sigma=sigma, t_g=mu + sigma * s)


def sor_filter(cloud: PointCloud, params: SorParams, workers: int = 1) -> FilterResult:
    """Statistical outlier removal with a single global threshold."""
    md = mean_knn_distances(cloud, params.k, workers=workers)
    stats = global_threshold(md, params.s)
    thresholds = np.full(len(cloud), stats.t_g)
    return FilterResult(
        keep_mask=md < thresholds,
        ranges=ranges_3d(cloud),
        threshold=thresholds,
        mean_knn_distance=md,
        stats=stats,
    )


def dsor_filter(cloud: PointCloud, params: DsorParams, workers: int = 1) -> FilterResult:
    """Statistical outlier removal with a range-scaled dynamic threshold."""
    md = mean_knn_distances(cloud, params.k, workers=workers)
    stats = global_threshold(md, params.s)
    dist = ranges_3d(cloud)
    thresholds = stats.t_g * params.r * dist
    return FilterResult(
        keep_mask=md < thresholds,
        ranges=dist,
        threshold=thresholds,
        mean_knn_distance=md,
        stats=stats,
    )


def ror_filter(cloud: PointCloud, params: RorParams, workers: int = 1) -> FilterResult:
    """Radius outlier removal with a fixed search radius."""
    index = SpatialIndex(cloud)
    counts = index.radius_counts_all(params.radius, workers=workers)
    thresholds = np.full(len(cloud), float(params.radius))
    return FilterResult(
        keep_mask=counts >= params.min_neighbors,
        ranges=ranges_3d(cloud),
        threshold=thresholds,
    )


def dror_filter(cloud: PointCloud, params: DrorParams, workers: int = 1) -> FilterResult:
    """Radius outlier removal with a range-proportional search radius."""
    index = SpatialIndex(cloud)
    rng_h = ranges_horizontal(cloud)
    radii = np.maximum(params.sr_min, params.beta * params.azimuth_resolution * rng_h)
    counts = index.radius_counts_all(radii, workers=workers)
    return FilterResult(
        keep_mask=counts >= params.min_neighbors,
        ranges=rng_h,
        threshold=radii,
    )


def extract(cloud: PointCloud, result: FilterResult, which: str = "kept") -> PointCloud:
    """Subsequence of the input cloud, in original order, selected by the
    keep mask (``which`` is "kept" or "removed")."""
    if which not in ("kept", "removed"):
        raise ValueError(f"which must be 'kept' or 'removed', got {which!r}")
    if len(result) != len(cloud):
        raise LengthMismatchError(
            f"mask has {len(result)} entries but cloud has {len(cloud)} points"
        )
    mask = result.keep_mask if which == "kept" else ~result.keep_mask
    return cloud.select(mask)


# Registry used by the evaluation harness and the CLI.
FILTERS = {
    "sor": (SorParams, sor_filter),
    "ror": (RorParams, ror_filter),
    "dror": (DrorParams, dror_filter),
    "dsor": (DsorParams, dsor_filter),
}

FilterParams = SorParams | RorParams | DrorParams | DsorParams


def param_type(filter_id: str):
    """Parameter dataclass for a registered filter id."""
    try:
        return FILTERS[filter_id][0]
    except KeyError:
        raise KeyError(
            f"unknown filter {filter_id!r}; expected one of {sorted(FILTERS)}"
        ) from None


def run_filter(
    filter_id: str, cloud: PointCloud, params: FilterParams, workers: int = 1
) -> FilterResult:
    """Dispatch to a registered filter by id."""
    param_cls, fn = FILTERS.get(filter_id, (None, None))
    if fn is None:
        raise KeyError(f"unknown filter {filter_id!r}; expected one of {sorted(FILTERS)}")
    if not isinstance(params, param_cls):
        raise TypeError(f"{filter_id} expects {param_cls.__name__}, got {type(params).__name__}")
    return fn(cloud, params, workers=workers)
