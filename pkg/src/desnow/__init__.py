"""LiDAR point-cloud de-snowing toolkit.

Filters (SOR, ROR, DROR, DSOR) over KITTI-style binary scans, a synthetic
winter-scene generator with ground-truth labels, and an evaluation harness
for precision/recall, range histograms, timing, and scalability fits.
"""

from .cloud_io import (
    LabeledCloud,
    LabelVector,
    PointCloud,
    attach_labels,
    read_cloud,
    read_labels,
    write_cloud,
    write_labels,
)
from .errors import DegenerateCloudError, LengthMismatchError, MalformedFileError
from .evaluate import (
    Confusion,
    EvalReport,
    RangeBin,
    ScalingFit,
    TimingStats,
    TuneResult,
    aggregate_reports,
    benchmark,
    fit_power_law,
    range_histogram,
    scalability_study,
    score,
    subsample,
    tune,
)
from .filters import (
    FILTERS,
    DrorParams,
    DsorParams,
    FilterResult,
    GlobalStats,
    RorParams,
    SorParams,
    dror_filter,
    dsor_filter,
    extract,
    global_threshold,
    mean_knn_distances,
    ror_filter,
    run_filter,
    sor_filter,
)
from .spatial import NeighborList, SpatialIndex, brute_force_knn
from .synth import (
    Box,
    SceneSpec,
    SensorModel,
    SnowSpec,
    default_scene,
    default_snow,
    generate_scene,
    inject_snow,
    make_benchmark,
)

__version__ = "0.1.0"

__all__ = [
    "PointCloud",
    "LabelVector",
    "LabeledCloud",
    "read_cloud",
    "write_cloud",
    "read_labels",
    "write_labels",
    "attach_labels",
    "MalformedFileError",
    "DegenerateCloudError",
    "LengthMismatchError",
    "SpatialIndex",
    "NeighborList",
    "brute_force_knn",
    "SorParams",
    "RorParams",
    "DrorParams",
    "DsorParams",
    "GlobalStats",
    "FilterResult",
    "FILTERS",
    "mean_knn_distances",
    "global_threshold",
    "sor_filter",
    "ror_filter",
    "dror_filter",
    "dsor_filter",
    "extract",
    "run_filter",
    "SensorModel",
    "Box",
    "SceneSpec",
    "SnowSpec",
    "generate_scene",
    "inject_snow",
    "make_benchmark",
    "default_scene",
    "default_snow",
    "Confusion",
    "RangeBin",
    "EvalReport",
    "TimingStats",
    "ScalingFit",
    "TuneResult",
    "score",
    "range_histogram",
    "aggregate_reports",
    "benchmark",
    "subsample",
    "scalability_study",
    "fit_power_law",
    "tune",
    "__version__",
]
