"""Exact nearest-neighbor queries over a point cloud.

``brute_force_knn`` is the ground-truth oracle: an exhaustive scan with a
full sort. ``SpatialIndex`` provides the same answers from a balanced k-d
tree (median split on the widest axis, leaf size 16 by default) and exists
only to be fast; everything it returns must agree with the oracle up to
tie-breaking. Distances are plain (un-squared) 3-D Euclidean, and the query
point is never its own neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .cloud_io import PointCloud

DEFAULT_LEAF_SIZE = 16


@dataclass(frozen=True)
class NeighborList:
    """(index, distance) pairs sorted by ascending distance, ties broken by
    ascending point index. Indices refer to the original cloud order."""

    indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        dist = np.ascontiguousarray(self.distances, dtype=np.float64)
        if idx.shape != dist.shape or idx.ndim != 1:
            raise ValueError("indices and distances must be 1-D and the same length")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "distances", dist)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __iter__(self):
        return zip(self.indices.tolist(), self.distances.tolist())


def _sorted_neighbor_list(indices: np.ndarray, distances: np.ndarray) -> NeighborList:
    order = np.lexsort((indices, distances))
    return NeighborList(indices[order], distances[order])


def brute_force_knn(cloud: PointCloud, query_index: int, k: int) -> NeighborList:
    """Exhaustive-scan k-nearest-neighbors, the validation oracle.

    Returns the k nearest points to ``cloud[query_index]`` excluding the
    query point itself; fewer than k when the cloud is small.
    """
    n = len(cloud)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n == 0:
        return NeighborList(np.empty(0, np.int64), np.empty(0, np.float64))
    if not 0 <= query_index < n:
        raise IndexError(f"query_index {query_index} out of bounds for cloud of {n}")
    xyz = cloud.xyz.astype(np.float64)
    deltas = xyz - xyz[query_index]
    dist = np.sqrt(np.einsum("ij,ij->i", deltas, deltas))
    others = np.arange(n) != query_index
    idx = np.nonzero(others)[0]
    d = dist[others]
    order = np.lexsort((idx, d))[: min(k, n - 1)]
    return NeighborList(idx[order], d[order])


class SpatialIndex:
    """k-d tree over an immutable snapshot of a cloud.

    Queries are exact and deterministic; per-point batch queries may be
    parallelized via ``workers`` without changing any result.
    """

    def __init__(self, cloud: PointCloud, leaf_size: int = DEFAULT_LEAF_SIZE):
        self._cloud = cloud
        self._xyz = cloud.xyz.astype(np.float64)
        # balanced_tree=True splits at the median of the widest axis
        self._tree = (
            cKDTree(self._xyz, leafsize=leaf_size, balanced_tree=True)
            if len(cloud)
            else None
        )

    def __len__(self) -> int:
        return len(self._cloud)

    @property
    def cloud(self) -> PointCloud:
        return self._cloud

    def knn(self, query_index: int, k: int) -> NeighborList:
        """k nearest neighbors of point ``query_index``, self excluded."""
        n = len(self)
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if n == 0:
            return NeighborList(np.empty(0, np.int64), np.empty(0, np.float64))
        if not 0 <= query_index < n:
            raise IndexError(f"query_index {query_index} out of bounds for cloud of {n}")
        k_eff = min(k, n - 1)
        if k_eff == 0:
            return NeighborList(np.empty(0, np.int64), np.empty(0, np.float64))
        dist, idx = self._tree.query(self._xyz[query_index], k=k_eff + 1)
        dist, idx = np.atleast_1d(dist), np.atleast_1d(idx)
        keep = idx != query_index
        if keep.all():
            # query point displaced by coincident duplicates: the k+1 hits
            # are all valid neighbors, drop the farthest
            keep[-1] = False
        return _sorted_neighbor_list(idx[keep][:k_eff], dist[keep][:k_eff])

    def knn_distances_all(self, k: int, workers: int = 1) -> np.ndarray:
        """(N, k_eff) distances from every point to its k nearest neighbors
        (self excluded), rows in cloud order, columns ascending."""
        n = len(self)
        k_eff = min(k, n - 1)
        if k_eff <= 0:
            return np.empty((n, 0), dtype=np.float64)
        dist, idx = self._tree.query(self._xyz, k=k_eff + 1, workers=workers)
        drop = idx == np.arange(n)[:, None]
        no_self = ~drop.any(axis=1)
        drop[no_self, -1] = True
        return dist[~drop].reshape(n, k_eff)

    def radius_count(self, query_index: int, radius: float) -> int:
        """Number of points within ``radius`` of the query, self excluded."""
        n = len(self)
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        if n == 0:
            return 0
        if not 0 <= query_index < n:
            raise IndexError(f"query_index {query_index} out of bounds for cloud of {n}")
        count = self._tree.query_ball_point(
            self._xyz[query_index], r=radius, return_length=True
        )
        return int(count) - 1

    def radius_counts_all(self, radii: np.ndarray | float, workers: int = 1) -> np.ndarray:
        """(N,) neighbor counts within per-point radii, self excluded."""
        n = len(self)
        if n == 0:
            return np.empty(0, dtype=np.int64)
        radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (n,))
        if not (radii > 0).all():
            raise ValueError("all radii must be positive")
        counts = self._tree.query_ball_point(
            self._xyz, r=radii, return_length=True, workers=workers
        )
        return counts.astype(np.int64) - 1
