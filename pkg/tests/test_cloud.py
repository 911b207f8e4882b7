import math

import numpy as np
import pytest

from mvreg.cloud import (
    Correspondence,
    PointCloud,
    adaptive_threshold,
    count_coincident,
    estimate_resolution,
    nearest_neighbors,
)
from mvreg.errors import EmptyTarget, TooFewPoints


def brute_force_nn(source: np.ndarray, target: np.ndarray):
    """O(n*m) scan; ties resolved by argmin's lowest-index rule."""
    idx = np.empty(len(source), dtype=int)
    dist = np.empty(len(source))
    for k, p in enumerate(source):
        d = np.linalg.norm(target - p, axis=1)
        idx[k] = int(np.argmin(d))
        dist[k] = d[idx[k]]
    return idx, dist


class TestResolution:
    def test_unit_cube_corners(self):
        corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
        assert estimate_resolution(PointCloud(corners)) == pytest.approx(1.0)

    def test_regular_grid(self):
        h = 0.37
        xs, ys = np.meshgrid(np.arange(6) * h, np.arange(5) * h)
        pts = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(xs.size)])
        assert estimate_resolution(PointCloud(pts)) == pytest.approx(h)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(size=(100, 3))
        expected = np.mean([
            np.min(np.linalg.norm(np.delete(pts, k, axis=0) - pts[k], axis=1))
            for k in range(len(pts))
        ])
        assert estimate_resolution(PointCloud(pts)) == pytest.approx(expected, rel=1e-12)

    def test_too_few_points(self):
        with pytest.raises(TooFewPoints):
            estimate_resolution(PointCloud(np.array([[0.0, 0.0, 0.0]])))

    def test_cached_and_positive(self):
        rng = np.random.default_rng(1)
        cloud = PointCloud(rng.uniform(size=(50, 3)))
        assert cloud.resolution > 0.0
        assert cloud.resolution == cloud.resolution


class TestNearestNeighbors:
    def test_self_match(self):
        rng = np.random.default_rng(2)
        cloud = PointCloud(rng.uniform(size=(40, 3)))
        corrs = nearest_neighbors(cloud, cloud)
        assert all(c.target_index == c.source_index and c.distance == 0.0 for c in corrs)

    def test_single_target(self):
        rng = np.random.default_rng(3)
        source = PointCloud(rng.uniform(size=(10, 3)))
        target = PointCloud(np.array([[0.5, 0.5, 0.5]]))
        corrs = nearest_neighbors(source, target)
        assert all(c.target_index == 0 for c in corrs)
        for c in corrs:
            assert c.distance == pytest.approx(
                np.linalg.norm(source.points[c.source_index] - [0.5, 0.5, 0.5])
            )

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        source = PointCloud(rng.uniform(size=(200, 3)))
        target = PointCloud(rng.uniform(size=(300, 3)))
        corrs = nearest_neighbors(source, target)
        idx, dist = brute_force_nn(source.points, target.points)
        for c in corrs:
            assert c.target_index == idx[c.source_index]
            assert c.distance == dist[c.source_index]

    def test_tie_break_lowest_index(self):
        # Query point equidistant from several targets; exact float ties.
        target = PointCloud(np.array([
            [2.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
        ]))
        source = PointCloud(np.array([[0.0, 0.0, 0.0]]))
        corrs = nearest_neighbors(source, target)
        assert corrs[0].target_index == 1
        assert corrs[0].distance == 1.0

    def test_grid_ties_match_brute_force(self):
        xs, ys = np.meshgrid(np.arange(5, dtype=float), np.arange(5, dtype=float))
        target = PointCloud(np.column_stack([xs.ravel(), ys.ravel(), np.zeros(xs.size)]))
        # Midpoints of grid cells are equidistant from four corners.
        mx, my = np.meshgrid(np.arange(4) + 0.5, np.arange(4) + 0.5)
        source = PointCloud(np.column_stack([mx.ravel(), my.ravel(), np.zeros(mx.size)]))
        idx, _ = brute_force_nn(source.points, target.points)
        corrs = nearest_neighbors(source, target)
        for c in corrs:
            assert c.target_index == idx[c.source_index]

    def test_empty_target(self):
        source = PointCloud(np.zeros((3, 3)))
        with pytest.raises(EmptyTarget):
            nearest_neighbors(source, PointCloud(np.zeros((0, 3))))


class TestCountCoincident:
    def test_identical_clouds(self):
        rng = np.random.default_rng(5)
        cloud = PointCloud(rng.uniform(size=(30, 3)))
        corrs = nearest_neighbors(cloud, cloud)
        n = count_coincident(corrs, cloud.resolution, 2.0)
        assert n == len(cloud)
        assert n / len(corrs) == 1.0

    def test_all_far(self):
        corrs = [Correspondence(k, k, 10.0 * 2.0 * 0.1) for k in range(20)]
        assert count_coincident(corrs, 0.1, 2.0) == 0

    def test_half_split(self):
        resolution, c = 0.1, 2.0
        near = [Correspondence(k, k, 0.0) for k in range(10)]
        far = [Correspondence(k + 10, k + 10, 5.0 * c * resolution) for k in range(10)]
        n = count_coincident(near + far, resolution, c)
        assert n / 20 == 0.5

    def test_cutoff_inclusive(self):
        corrs = [Correspondence(0, 0, 0.2), Correspondence(1, 1, 0.2000001)]
        assert count_coincident(corrs, 0.1, 2.0) == 1


class TestAdaptiveThreshold:
    def test_full_overlap_limit(self):
        assert adaptive_threshold(100, 100, 0.5, 0.01) == pytest.approx(1e-4, rel=1e-12)

    def test_zero_overlap_zero_accuracy(self):
        # (sqrt(2)/2)^2 = 1/2
        assert adaptive_threshold(0, 50, 0.01, 0.0) == pytest.approx(0.5e-4, rel=1e-12)

    def test_documented_midpoint_case(self):
        # Frozen value computed independently: (0.5 * 0.0070710678)^2 + 1e-6
        got = adaptive_threshold(50, 100, 0.01, 0.001)
        assert got == pytest.approx(1.3500e-5, rel=1e-4)
        assert got == pytest.approx((0.5 * math.sqrt(2.0) / 2.0 * 0.01) ** 2 + 1e-6, rel=1e-12)

    def test_against_independent_form(self):
        # Algebraically rearranged recomputation as the oracle.
        rng = np.random.default_rng(6)
        for _ in range(50):
            n_t = int(rng.integers(1, 1000))
            n_p = int(rng.integers(0, n_t + 1))
            lr = float(rng.uniform(1e-4, 1.0))
            re = float(rng.uniform(0.0, 0.1))
            expected = ((n_t - n_p) / n_t) ** 2 * (lr * lr / 2.0) + re * re
            assert adaptive_threshold(n_p, n_t, lr, re) == pytest.approx(expected, rel=1e-12)

    def test_monotone_in_coincident_count(self):
        values = [adaptive_threshold(n_p, 200, 0.05, 0.002) for n_p in range(0, 201)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            adaptive_threshold(5, 0, 0.1, 0.0)
        with pytest.raises(ValueError):
            adaptive_threshold(11, 10, 0.1, 0.0)
        with pytest.raises(ValueError):
            adaptive_threshold(1, 10, -0.1, 0.0)
        with pytest.raises(ValueError):
            adaptive_threshold(1, 10, 0.1, -1.0)


class TestPointCloud:
    def test_points_read_only(self):
        cloud = PointCloud(np.zeros((4, 3)))
        with pytest.raises(ValueError):
            cloud.points[0, 0] = 1.0

    def test_transformed(self):
        from mvreg.geometry import RigidMotion
        rng = np.random.default_rng(7)
        cloud = PointCloud(rng.uniform(size=(20, 3)))
        moved = cloud.transformed(RigidMotion(np.eye(3), np.array([1.0, 0.0, 0.0])))
        assert np.allclose(moved.points, cloud.points + [1.0, 0.0, 0.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            PointCloud(np.array([[0.0, 0.0, np.inf]]))
