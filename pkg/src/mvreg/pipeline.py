"""Multi-view registration: overlap gating, all-pairs adaptive ICP, and
motion averaging, repeated until the largest per-view rotation change
between outer iterations falls below a tolerance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .averaging import ViewGraph, motion_average
from .cloud import PointCloud, _match_arrays
from .errors import DisconnectedAfterGating, ShapeMismatch
from .geometry import RigidMotion, Twist, compose, exp_map, inverse, rotation_angle
from .icp import IcpConfig, icp_adaptive


@dataclass(frozen=True)
class PipelineConfig:
    overlap_gate: float = 0.5
    outer_iterations: int = 10
    outer_tolerance: float = 1e-5
    icp: IcpConfig = field(default_factory=IcpConfig)
    averaging_epsilon: float = 1e-6
    averaging_max_rounds: int = 20

    def __post_init__(self):
        if not 0.0 < self.overlap_gate <= 1.0:
            raise ValueError("overlap_gate must lie in (0, 1]")
        if self.outer_iterations <= 0 or self.outer_tolerance <= 0.0:
            raise ValueError("outer loop bounds must be positive")
        if self.averaging_epsilon <= 0.0 or self.averaging_max_rounds <= 0:
            raise ValueError("averaging bounds must be positive")


@dataclass
class RegistrationReport:
    graph: ViewGraph
    error_history: list[float]
    objective: float
    overlap_matrix: np.ndarray
    wall_seconds: float


def compute_overlap(cloud_i: PointCloud, cloud_j: PointCloud, graph: ViewGraph,
                    i: int, j: int, coincidence_factor: float = 2.0) -> float:
    """Fraction of cloud i's points with a coincident neighbor in cloud j
    after both are placed in the reference frame by the current motions."""
    pts_i = graph.global_motions[i].apply(cloud_i.points)
    placed_j = cloud_j.transformed(graph.global_motions[j])
    _, dist = _match_arrays(pts_i, placed_j)
    cutoff = coincidence_factor * cloud_j.resolution
    return float(np.count_nonzero(dist <= cutoff)) / len(cloud_i)


def iteration_error(graph_prev: ViewGraph, graph_next: ViewGraph) -> float:
    """Largest per-view rotation change (radians) between two graphs."""
    if graph_prev.n_views != graph_next.n_views:
        raise ShapeMismatch(
            f"graphs have {graph_prev.n_views} vs {graph_next.n_views} views"
        )
    worst = 0.0
    for a, b in zip(graph_prev.global_motions, graph_next.global_motions):
        worst = max(worst, rotation_angle(b.rotation @ a.rotation.T))
    return worst


def _gated_pairs(clouds, graph, cfg) -> tuple[list[tuple[int, int]], np.ndarray]:
    n = len(clouds)
    overlap = np.eye(n)
    pairs = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            overlap[i, j] = compute_overlap(
                clouds[i], clouds[j], graph, i, j, cfg.icp.coincidence_factor
            )
            if overlap[i, j] > cfg.overlap_gate:
                pairs.append((i, j))
    return pairs, overlap


def _pairs_connected(pairs, n: int) -> bool:
    adj = [[] for _ in range(n)]
    for i, j in pairs:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == n


def register_multiview(clouds: list[PointCloud], init: ViewGraph,
                       cfg: PipelineConfig) -> RegistrationReport:
    """Run the full outer loop and report the final motions.

    Every ordered pair whose overlap passes the gate contributes one
    measured relative motion per outer iteration; motion averaging then
    redistributes the pairwise inconsistencies over all views.
    """
    if len(clouds) < 2:
        raise ValueError("need at least 2 clouds")
    if init.n_views != len(clouds):
        raise ShapeMismatch(
            f"init graph has {init.n_views} views for {len(clouds)} clouds"
        )
    start = time.perf_counter()
    graph = init
    history: list[float] = []
    overlap = np.eye(len(clouds))

    for _ in range(cfg.outer_iterations):
        pairs, overlap = _gated_pairs(clouds, graph, cfg)
        if not _pairs_connected(pairs, len(clouds)):
            raise DisconnectedAfterGating(
                "no spanning set of cloud pairs passes the overlap gate"
            )
        edges = []
        for i, j in pairs:
            warm = compose(inverse(graph.global_motions[j]), graph.global_motions[i])
            result = icp_adaptive(clouds[i], clouds[j], warm, cfg.icp)
            # result.motion maps view i into view j, i.e. the relative
            # motion predicted by inverse(M_j) o M_i.
            edges.append((j, i, result.motion))
        averaged = motion_average(
            graph.with_edges(edges),
            epsilon=cfg.averaging_epsilon,
            max_rounds=cfg.averaging_max_rounds,
        )
        err = iteration_error(graph, averaged)
        history.append(err)
        graph = averaged
        if err <= cfg.outer_tolerance:
            break

    objective = objective_value(clouds, graph, cfg)
    return RegistrationReport(
        graph=graph,
        error_history=history,
        objective=objective,
        overlap_matrix=overlap,
        wall_seconds=time.perf_counter() - start,
    )


def objective_value(clouds: list[PointCloud], graph: ViewGraph,
                    cfg: PipelineConfig) -> float:
    """Mean over gated ordered pairs of the mean squared distance of
    coincident correspondences, with all clouds in the reference frame."""
    n = len(clouds)
    placed = [c.transformed(graph.global_motions[k]) for k, c in enumerate(clouds)]
    per_pair = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            _, dist = _match_arrays(placed[i].points, placed[j])
            cutoff = cfg.icp.coincidence_factor * clouds[j].resolution
            coincident = dist[dist <= cutoff]
            if coincident.size / len(clouds[i]) > cfg.overlap_gate:
                per_pair.append(float(np.mean(coincident * coincident)))
    if not per_pair:
        return math.inf
    return float(np.mean(per_pair))


def perturb_graph(graph: ViewGraph, level: float, seed: int) -> ViewGraph:
    """Compose every non-anchor rotation with a random rotation whose
    axis-angle components are i.i.d. uniform in [-level, level]."""
    if level < 0.0:
        raise ValueError("level must be nonnegative")
    rng = np.random.default_rng(seed)
    motions = [graph.global_motions[0]]
    for m in graph.global_motions[1:]:
        w = rng.uniform(-level, level, size=3)
        bump = exp_map(Twist(w, np.zeros(3)))
        motions.append(RigidMotion(bump.rotation @ m.rotation, m.translation))
    return graph.with_motions(motions)
