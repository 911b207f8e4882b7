"""Point clouds with a KD-tree index, resolution estimation, and the
adaptive convergence threshold used by pairwise registration.

The horizontal resolution of a cloud is estimated as the mean distance
from each point to its closest other point.  A correspondence counts as
coincident when its distance is at most coincidence_factor * resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyTarget, TooFewPoints
from .geometry import RigidMotion


class PointCloud:
    """Immutable ordered set of 3D points with lazy index and resolution."""

    def __init__(self, points: np.ndarray):
        pts = np.array(points, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        self._points = pts
        self._tree = None
        self._resolution = None

    @property
    def points(self) -> np.ndarray:
        return self._points

    def __len__(self) -> int:
        return self._points.shape[0]

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self._points)
        return self._tree

    @property
    def resolution(self) -> float:
        if self._resolution is None:
            self._resolution = estimate_resolution(self)
        return self._resolution

    def transformed(self, motion: RigidMotion) -> "PointCloud":
        return PointCloud(motion.apply(self._points))


@dataclass(frozen=True)
class Correspondence:
    """One matched pair: source point index, target point index, distance."""

    source_index: int
    target_index: int
    distance: float


def estimate_resolution(cloud: PointCloud) -> float:
    """Mean nearest-neighbor distance over all points of the cloud."""
    if len(cloud) < 2:
        raise TooFewPoints(f"resolution needs >= 2 points, got {len(cloud)}")
    d, _ = cloud.tree.query(cloud.points, k=2)
    return float(np.mean(d[:, 1]))


def _match_arrays(points: np.ndarray, target: PointCloud) -> tuple[np.ndarray, np.ndarray]:
    """Nearest target index and distance per query point.

    Exact lowest-index tie break: a k=2 query exposes exact distance ties,
    which are then resolved with a ball query around the tied points only.
    """
    if len(target) == 0:
        raise EmptyTarget("target cloud has no points")
    if len(target) == 1:
        d = np.linalg.norm(points - target.points[0], axis=1)
        return np.zeros(len(points), dtype=int), d
    dists, idxs = target.tree.query(points, k=2)
    best_d = dists[:, 0]
    best_i = idxs[:, 0].astype(int)
    tied = np.nonzero(dists[:, 1] == best_d)[0]
    for q in tied:
        ball = target.tree.query_ball_point(points[q], best_d[q] * (1.0 + 1e-12))
        exact = [j for j in ball
                 if np.linalg.norm(target.points[j] - points[q]) == best_d[q]]
        if exact:
            best_i[q] = min(exact)
    return best_i, best_d


def nearest_neighbors(source: PointCloud, target: PointCloud) -> list[Correspondence]:
    """One correspondence per source point; ties broken by lowest index."""
    idx, dist = _match_arrays(source.points, target)
    return [Correspondence(i, int(idx[i]), float(dist[i])) for i in range(len(source))]


def count_coincident(corrs: list[Correspondence], resolution: float, coincidence_factor: float) -> int:
    """Number of correspondences within coincidence_factor * resolution."""
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    cutoff = coincidence_factor * resolution
    return sum(1 for c in corrs if c.distance <= cutoff)


def adaptive_threshold(n_coincident: int, n_total: int, resolution: float, range_accuracy: float) -> float:
    """Squared-distance convergence bound from overlap, resolution and
    sensor range accuracy.

    Shrinks toward range_accuracy**2 as the coincident fraction approaches
    one; at zero overlap it allows half a squared resolution step.
    """
    if n_total <= 0:
        raise ValueError("n_total must be positive")
    if not 0 <= n_coincident <= n_total:
        raise ValueError("n_coincident must lie in [0, n_total]")
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    if range_accuracy < 0.0:
        raise ValueError("range_accuracy must be nonnegative")
    miss = 1.0 - n_coincident / n_total
    base = miss * (np.sqrt(2.0) / 2.0) * resolution
    return float(base * base + range_accuracy * range_accuracy)
