"""Plain-text configuration: key = value lines grouped into one section per
filter, plus sections for the synthetic sensor/scene/snow specs and the
tuning grids.

Precedence, lowest to highest: packaged defaults, the file named by the
DESNOW_CONFIG environment variable, an explicit config file, then command
line flags. The packaged defaults carry the tuned operating points for the
synthetic benchmark; they are data, not code constants.
"""

from __future__ import annotations

import configparser
import os
from importlib import resources
from pathlib import Path

from .filters import DrorParams, DsorParams, FilterParams, RorParams, SorParams
from .synth import Box, SceneSpec, SensorModel, SnowSpec

ENV_CONFIG = "DESNOW_CONFIG"

_PARAM_FIELDS = {
    "sor": (("k", int), ("s", float)),
    "ror": (("radius", float), ("min_neighbors", int)),
    "dror": (
        ("azimuth_resolution", float),
        ("beta", float),
        ("sr_min", float),
        ("min_neighbors", int),
    ),
    "dsor": (("k", int), ("s", float), ("r", float)),
}

_PARAM_TYPES = {"sor": SorParams, "ror": RorParams, "dror": DrorParams, "dsor": DsorParams}


def load_config(path: str | os.PathLike | None = None) -> configparser.ConfigParser:
    """Layered config: packaged defaults, then $DESNOW_CONFIG, then an
    explicit file (later layers override earlier ones)."""
    cp = configparser.ConfigParser()
    with resources.files("desnow.data").joinpath("defaults.conf").open() as fh:
        cp.read_file(fh)
    env_path = os.environ.get(ENV_CONFIG)
    if env_path:
        if not Path(env_path).is_file():
            raise FileNotFoundError(f"{ENV_CONFIG} points to a missing file: {env_path}")
        cp.read(env_path)
    if path is not None:
        if not Path(path).is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        cp.read(path)
    return cp


def filter_params(
    cp: configparser.ConfigParser,
    filter_id: str,
    overrides: dict | None = None,
) -> FilterParams:
    """Build a filter's parameter struct from its config section, with
    non-None overrides (typically CLI flags) taking precedence."""
    if filter_id not in _PARAM_FIELDS:
        raise KeyError(f"unknown filter {filter_id!r}; expected one of {sorted(_PARAM_FIELDS)}")
    overrides = overrides or {}
    kwargs = {}
    for name, cast in _PARAM_FIELDS[filter_id]:
        if overrides.get(name) is not None:
            kwargs[name] = cast(overrides[name])
        elif cp.has_option(filter_id, name):
            kwargs[name] = cast(cp.get(filter_id, name))
        else:
            raise KeyError(f"missing parameter {name!r} for filter {filter_id!r}")
    return _PARAM_TYPES[filter_id](**kwargs)


def save_filter_params(params: FilterParams, filter_id: str, path: str | os.PathLike) -> None:
    """Write one filter section; the file can be fed back via --config."""
    cp = configparser.ConfigParser()
    cp[filter_id] = {name: repr(getattr(params, name)) for name, _ in _PARAM_FIELDS[filter_id]}
    with open(path, "w") as fh:
        cp.write(fh)


def param_grid(cp: configparser.ConfigParser, filter_id: str, overrides: dict | None = None):
    """Cartesian-product grid from the [grid.<filter>] section; each key
    holds a comma-separated value list. Overrides replace whole lists."""
    section = f"grid.{filter_id}"
    if not cp.has_section(section):
        raise KeyError(f"no tuning grid section [{section}] in config")
    overrides = overrides or {}
    axes = []
    for name, cast in _PARAM_FIELDS[filter_id]:
        if overrides.get(name) is not None:
            raw = overrides[name]
        elif cp.has_option(section, name):
            raw = cp.get(section, name)
        else:
            raise KeyError(f"missing grid axis {name!r} in [{section}]")
        values = [cast(v.strip()) for v in str(raw).split(",") if v.strip()]
        if not values:
            raise ValueError(f"empty grid axis {name!r} in [{section}]")
        axes.append((name, values))
    grid = [{}]
    for name, values in axes:
        grid = [{**g, name: v} for g in grid for v in values]
    cls = _PARAM_TYPES[filter_id]
    return [cls(**g) for g in grid]


def sensor_spec(cp: configparser.ConfigParser) -> SensorModel:
    sec = cp["sensor"]
    lo, hi = (float(v) for v in sec.get("vertical_fov").split(","))
    return SensorModel(
        channels=sec.getint("channels"),
        vertical_fov=(lo, hi),
        azimuth_step=sec.getfloat("azimuth_step"),
        max_range=sec.getfloat("max_range"),
    )


def scene_spec(cp: configparser.ConfigParser, rng_seed: int = 0) -> SceneSpec:
    sec = cp["scene"]
    boxes = []
    for line in sec.get("boxes", "").strip().splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 7:
            raise ValueError(
                f"box line needs 7 fields (xmin xmax ymin ymax zmin zmax class): {line!r}"
            )
        *extents, class_id = parts
        boxes.append(Box(*(float(v) for v in extents), class_id=int(class_id)))
    return SceneSpec(
        ground_extent=sec.getfloat("ground_extent"),
        ground_z=sec.getfloat("ground_z"),
        ground_class=sec.getint("ground_class"),
        boxes=tuple(boxes),
        rng_seed=rng_seed,
    )


def snow_spec(cp: configparser.ConfigParser, rng_seed: int = 0) -> SnowSpec:
    sec = cp["snow"]
    return SnowSpec(
        count=sec.getint("count"),
        lognormal_mu=sec.getfloat("lognormal_mu"),
        lognormal_sigma=sec.getfloat("lognormal_sigma"),
        max_snow_range=sec.getfloat("max_snow_range"),
        class_id=sec.getint("class_id"),
        rng_seed=rng_seed,
    )
