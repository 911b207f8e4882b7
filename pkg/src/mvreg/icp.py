"""Pairwise ICP with an adaptive convergence threshold.

Each iteration transforms the source by the accumulated motion, matches
every source point to its nearest target point, recounts coincident
pairs, recomputes the squared-distance threshold from the current
coincident fraction, and refits a rigid motion on the coincident
(inlier) correspondences only.  Iteration stops when the mean squared
inlier distance drops below the threshold or the iteration cap is hit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, Correspondence, _match_arrays, adaptive_threshold
from .errors import DegenerateConfiguration
from .geometry import RigidMotion, compose

# Relative singular-value floor below which the rigid fit is ambiguous.
_SV_TOL = 1e-8


@dataclass(frozen=True)
class IcpConfig:
    range_accuracy: float = 1e-3
    max_iterations: int = 50
    coincidence_factor: float = 2.0
    min_overlap: float = 0.5

    def __post_init__(self):
        if self.range_accuracy <= 0.0:
            raise ValueError("range_accuracy must be positive")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        if self.coincidence_factor <= 0.0:
            raise ValueError("coincidence_factor must be positive")
        if not 0.0 < self.min_overlap <= 1.0:
            raise ValueError("min_overlap must lie in (0, 1]")


@dataclass(frozen=True)
class IcpResult:
    motion: RigidMotion
    final_rms: float
    overlap_rate: float
    iterations_used: int
    converged: bool


def _fit_rigid_arrays(p: np.ndarray, q: np.ndarray) -> RigidMotion:
    """Least-squares rigid motion taking points p onto points q."""
    if p.shape[0] < 3:
        raise DegenerateConfiguration(
            f"rigid fit needs >= 3 correspondences, got {p.shape[0]}"
        )
    cp = p.mean(axis=0)
    cq = q.mean(axis=0)
    h = (p - cp).T @ (q - cq)
    u, s, vt = np.linalg.svd(h)
    if s[0] <= 0.0 or s[1] <= _SV_TOL * s[0]:
        raise DegenerateConfiguration(
            "correspondences are collinear or coincident; rotation not unique"
        )
    d = np.sign(np.linalg.det(vt.T @ u.T))
    if d < 0.0 and (s[1] - s[2]) <= _SV_TOL * s[0]:
        raise DegenerateConfiguration(
            "reflection correction is ambiguous (repeated singular value)"
        )
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    return RigidMotion(r, cq - r @ cp)


def fit_rigid(corrs: list[Correspondence], source: PointCloud, target: PointCloud) -> RigidMotion:
    """Rigid motion minimizing the summed squared corresponded distances."""
    src = np.array([c.source_index for c in corrs], dtype=int)
    tgt = np.array([c.target_index for c in corrs], dtype=int)
    if src.size < 3:
        raise DegenerateConfiguration(
            f"rigid fit needs >= 3 correspondences, got {src.size}"
        )
    return _fit_rigid_arrays(source.points[src], target.points[tgt])


def icp_adaptive(source: PointCloud, target: PointCloud,
                 init: RigidMotion, cfg: IcpConfig) -> IcpResult:
    """Register source into the target frame starting from init.

    Returns the accumulated motion mapping the original source points
    into the target frame.  Correspondences beyond
    coincidence_factor * target.resolution are treated as unreasonable
    and excluded from the fit; the convergence test compares the mean
    squared distance of the retained correspondences against the
    adaptive threshold recomputed each iteration.
    """
    if len(source) < 3 or len(target) < 3:
        raise DegenerateConfiguration("registration needs clouds of >= 3 points")
    resolution = target.resolution
    cutoff = cfg.coincidence_factor * resolution
    n_total = len(source)

    current = init
    msd = float("inf")
    overlap = 0.0
    converged = False
    iterations = 0

    for it in range(cfg.max_iterations):
        iterations = it + 1
        moved = current.apply(source.points)
        idx, dist = _match_arrays(moved, target)
        inlier = dist <= cutoff
        n_coincident = int(np.count_nonzero(inlier))
        overlap = n_coincident / n_total
        e_thr = adaptive_threshold(n_coincident, n_total, resolution, cfg.range_accuracy)
        scored = dist[inlier] if n_coincident > 0 else dist
        msd = float(np.mean(scored * scored))
        if msd <= e_thr:
            converged = True
            break
        if it == cfg.max_iterations - 1:
            break
        if n_coincident >= 3:
            delta = _fit_rigid_arrays(moved[inlier], target.points[idx[inlier]])
        else:
            # Too few coincident pairs to fit; fall back to all matches so a
            # poor initialization can still pull the clouds together.
            delta = _fit_rigid_arrays(moved, target.points[idx])
        current = compose(delta, current)

    return IcpResult(
        motion=current,
        final_rms=float(np.sqrt(msd)),
        overlap_rate=overlap,
        iterations_used=iterations,
        converged=converged,
    )
