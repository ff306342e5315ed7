import numpy as np
import pytest

from desnow import PointCloud


def random_cloud(rng: np.random.Generator, n: int, scale: float = 10.0) -> PointCloud:
    """Uniform box cloud with random intensities, for property sweeps."""
    xyz = rng.uniform(-scale, scale, size=(n, 3))
    intensity = rng.uniform(0.0, 1.0, size=(n, 1))
    return PointCloud(np.hstack([xyz, intensity]).astype(np.float32))


def line_cloud(xs) -> PointCloud:
    """Colinear points along x with zero intensity, for hand geometry."""
    pts = np.zeros((len(xs), 4), dtype=np.float32)
    pts[:, 0] = xs
    return PointCloud(pts)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
