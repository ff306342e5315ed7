"""Synthetic winter LiDAR scenes with ground-truth labels.

A spinning-sensor model casts one ray per (channel, azimuth step) against a
flat ground plane and a set of axis-aligned boxes; the nearest hit becomes
an environment point labeled with the primitive's class. Snow clutter is
then appended as extra points whose sensor range follows a truncated
log-normal distribution, which concentrates them near the sensor the way
falling snow shows up in real scans, and whose labels carry a designated
snow class. Everything is driven by seeded counter-based streams, so a
given spec reproduces the same cloud bit for bit.

Class ids used by the default specs are synthetic-benchmark conventions,
not claims about any real dataset's label map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtr, ndtri

from .cloud_io import LabeledCloud, LabelVector, PointCloud
from .rng import make_generator

# Stream tags (second Philox key word) for the independent random uses.
_STREAM_SCENE = 1
_STREAM_SNOW = 2


@dataclass(frozen=True)
class SensorModel:
    """Spinning LiDAR: evenly spaced channels over the vertical FOV, one
    firing per azimuth step, returns clipped to max_range."""

    channels: int = 64
    vertical_fov: tuple[float, float] = (-25.0, 15.0)  # degrees [min, max]
    azimuth_step: float = 0.2  # degrees
    max_range: float = 120.0  # meters

    def __post_init__(self):
        if self.channels < 1:
            raise ValueError(f"channels must be >= 1, got {self.channels}")
        if not self.azimuth_step > 0:
            raise ValueError(f"azimuth_step must be positive, got {self.azimuth_step}")
        if not self.max_range > 0:
            raise ValueError(f"max_range must be positive, got {self.max_range}")
        if not self.vertical_fov[0] < self.vertical_fov[1]:
            raise ValueError(f"vertical_fov must be increasing, got {self.vertical_fov}")

    @property
    def rays_per_revolution(self) -> int:
        return self.channels * int(round(360.0 / self.azimuth_step))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box primitive with a semantic class."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    zmin: float
    zmax: float
    class_id: int

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax and self.zmin < self.zmax):
            raise ValueError(f"box extents must be positive: {self}")

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([self.xmin, self.ymin, self.zmin])
        hi = np.array([self.xmax, self.ymax, self.zmax])
        return lo, hi


@dataclass(frozen=True)
class SceneSpec:
    """Environment: a square ground patch (|x|,|y| <= ground_extent at
    z = ground_z; disabled when ground_extent <= 0) plus box primitives.
    The seed drives the intensity payload of environment returns."""

    ground_extent: float = 60.0
    ground_z: float = -1.8
    ground_class: int = 40
    boxes: tuple[Box, ...] = ()
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))


@dataclass(frozen=True)
class SnowSpec:
    """Snow clutter: ``count`` points at ranges drawn from
    LogNormal(lognormal_mu, lognormal_sigma) truncated to
    (0, max_snow_range], azimuth uniform over the circle, elevation uniform
    over the sensor's vertical FOV."""

    count: int = 100_000
    lognormal_mu: float = math.log(5.0)  # of ln(range in meters)
    lognormal_sigma: float = 0.55
    max_snow_range: float = 40.0
    class_id: int = 110
    rng_seed: int = 0

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if not self.lognormal_sigma > 0:
            raise ValueError(f"lognormal_sigma must be positive, got {self.lognormal_sigma}")
        if not self.max_snow_range > 0:
            raise ValueError(f"max_snow_range must be positive, got {self.max_snow_range}")


def _ray_directions(sensor: SensorModel) -> np.ndarray:
    """(R, 3) unit directions, channel-major then azimuth order."""
    elev = np.deg2rad(np.linspace(sensor.vertical_fov[0], sensor.vertical_fov[1], sensor.channels))
    n_az = int(round(360.0 / sensor.azimuth_step))
    azim = np.deg2rad(np.arange(n_az) * sensor.azimuth_step)
    cos_e, sin_e = np.cos(elev), np.sin(elev)
    cos_a, sin_a = np.cos(azim), np.sin(azim)
    dirs = np.empty((sensor.channels * n_az, 3))
    dirs[:, 0] = np.outer(cos_e, cos_a).ravel()
    dirs[:, 1] = np.outer(cos_e, sin_a).ravel()
    dirs[:, 2] = np.repeat(sin_e, n_az)
    return dirs


def _intersect_ground(dirs: np.ndarray, scene: SceneSpec, max_range: float) -> np.ndarray:
    """Per-ray hit distance against the ground patch (inf = miss)."""
    t = np.full(dirs.shape[0], np.inf)
    if scene.ground_extent <= 0:
        return t
    dz = dirs[:, 2]
    with np.errstate(divide="ignore"):
        t_plane = scene.ground_z / dz
    valid = (dz < 0) & (t_plane > 0) & (t_plane <= max_range)
    if np.isfinite(scene.ground_extent):
        x = t_plane * dirs[:, 0]
        y = t_plane * dirs[:, 1]
        valid &= (np.abs(x) <= scene.ground_extent) & (np.abs(y) <= scene.ground_extent)
    t[valid] = t_plane[valid]
    return t


def _intersect_box(dirs: np.ndarray, box: Box, max_range: float) -> np.ndarray:
    """Per-ray entry distance against one box via the slab method
    (inf = miss). Rays start at the origin, assumed outside the box."""
    lo, hi = box.bounds
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = lo / dirs
        t2 = hi / dirs
    t_near = np.nanmax(np.minimum(t1, t2), axis=1)
    t_far = np.nanmin(np.maximum(t1, t2), axis=1)
    hit = (t_near <= t_far) & (t_near > 1e-9) & (t_near <= max_range)
    t = np.full(dirs.shape[0], np.inf)
    t[hit] = t_near[hit]
    return t


def generate_scene(sensor: SensorModel, scene: SceneSpec) -> LabeledCloud:
    """Ray-cast one revolution against the scene; first hit per ray becomes
    a labeled point, misses produce nothing. Deterministic given the seed."""
    dirs = _ray_directions(sensor)
    best_t = _intersect_ground(dirs, scene, sensor.max_range)
    labels = np.full(dirs.shape[0], scene.ground_class, dtype=np.uint32)
    for box in scene.boxes:
        t_box = _intersect_box(dirs, box, sensor.max_range)
        closer = t_box < best_t
        best_t[closer] = t_box[closer]
        labels[closer] = box.class_id
    hit = np.isfinite(best_t)
    xyz = dirs[hit] * best_t[hit, None]
    gen = make_generator(scene.rng_seed, _STREAM_SCENE)
    intensity = 0.2 + 0.7 * gen.random(xyz.shape[0])
    points = np.column_stack([xyz, intensity]).astype(np.float32)
    return LabeledCloud(
        cloud=PointCloud(points),
        labels=LabelVector(labels[hit]),
        snow_classes=frozenset(),
    )


def _truncated_lognormal(gen: np.random.Generator, spec: SnowSpec) -> np.ndarray:
    """Inverse-CDF sampling of LogNormal(mu, sigma) truncated to
    (0, max_snow_range]."""
    f_hi = ndtr((math.log(spec.max_snow_range) - spec.lognormal_mu) / spec.lognormal_sigma)
    u = 1.0 - gen.random(spec.count)  # (0, 1], keeps ndtri finite below
    z = ndtri(u * f_hi)
    return np.exp(spec.lognormal_mu + spec.lognormal_sigma * z)


def inject_snow(
    base: LabeledCloud, snow: SnowSpec, sensor: SensorModel | None = None
) -> LabeledCloud:
    """Append snow clutter to a scene; the result's snow_classes gains the
    snow class id. Deterministic given the seed."""
    if snow.count == 0:
        return base
    if sensor is None:
        sensor = SensorModel()
    gen = make_generator(snow.rng_seed, _STREAM_SNOW)
    rng = _truncated_lognormal(gen, snow)
    azim = 2.0 * math.pi * gen.random(snow.count)
    lo, hi = np.deg2rad(sensor.vertical_fov[0]), np.deg2rad(sensor.vertical_fov[1])
    elev = lo + (hi - lo) * gen.random(snow.count)
    intensity = 0.2 * gen.random(snow.count)
    cos_e = np.cos(elev)
    xyz = np.column_stack([rng * cos_e * np.cos(azim), rng * cos_e * np.sin(azim), rng * np.sin(elev)])
    points = np.vstack([base.cloud.points, np.column_stack([xyz, intensity]).astype(np.float32)])
    labels = np.concatenate(
        [base.labels.values, np.full(snow.count, snow.class_id, dtype=np.uint32)]
    )
    return LabeledCloud(
        cloud=PointCloud(points, frame_id=base.cloud.frame_id),
        labels=LabelVector(labels),
        snow_classes=base.snow_classes | {snow.class_id},
    )


def make_benchmark(
    n_clouds: int,
    sensor: SensorModel | None = None,
    scene: SceneSpec | None = None,
    snow: SnowSpec | None = None,
    seed: int = 0,
) -> list[LabeledCloud]:
    """Reproducible corpus of snowy scenes; cloud i uses derived seed
    ``seed + i`` for both its scene and snow streams."""
    if n_clouds < 1:
        raise ValueError(f"n_clouds must be >= 1, got {n_clouds}")
    if sensor is None:
        sensor = SensorModel()
    if scene is None:
        scene = default_scene()
    if snow is None:
        snow = default_snow()
    clouds = []
    for i in range(n_clouds):
        labeled = generate_scene(sensor, replace(scene, rng_seed=seed + i))
        labeled = inject_snow(labeled, replace(snow, rng_seed=seed + i), sensor)
        clouds.append(labeled)
    return clouds


def default_scene() -> SceneSpec:
    """Suburban street stand-in: ground, two building walls, parked cars,
    and a few poles. Dense near the sensor, sparse at range."""
    boxes = (
        # building fronts along the road
        Box(-45.0, 45.0, 9.5, 12.5, -1.8, 4.2, class_id=50),
        Box(-45.0, 45.0, -12.5, -9.5, -1.8, 4.2, class_id=50),
        # end wall ahead
        Box(46.0, 49.0, -12.0, 12.0, -1.8, 4.2, class_id=50),
        # parked cars
        Box(5.0, 9.5, 5.5, 7.5, -1.8, -0.2, class_id=10),
        Box(-14.0, -9.5, 5.5, 7.5, -1.8, -0.2, class_id=10),
        Box(12.0, 16.5, -7.5, -5.5, -1.8, -0.2, class_id=10),
        Box(-25.0, -20.5, -7.5, -5.5, -1.8, -0.2, class_id=10),
        # poles
        Box(19.8, 20.2, 7.8, 8.2, -1.8, 4.5, class_id=80),
        Box(-30.2, -29.8, -8.2, -7.8, -1.8, 4.5, class_id=80),
        Box(34.8, 35.2, 7.8, 8.2, -1.8, 4.5, class_id=80),
    )
    return SceneSpec(ground_extent=60.0, ground_z=-1.8, ground_class=40, boxes=boxes)


def default_snow() -> SnowSpec:
    return SnowSpec()
