"""Least-squares motion averaging over a view graph.

Global motions map each view's local coordinates into the reference
frame of view 0, which is pinned to the identity (gauge anchor).  An
edge (i, j, M) stores a measured relative motion that is consistent
when M equals inverse(M_i) o M_j.  Each averaging round converts every
edge's discrepancy M_i o M o inverse(M_j) to a twist, solves a block
incidence system for one correction twist per non-anchor view, and
left-applies the exponentials; rounds repeat until the stacked
correction norm falls below epsilon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient
from .geometry import (
    RigidMotion,
    Twist,
    cev,
    compose,
    exp_map,
    inverse,
    log_map,
    vec,
)

_ANCHOR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ViewGraph:
    """Per-view global motions plus measured relative motions (edges)."""

    global_motions: tuple[RigidMotion, ...]
    edges: tuple[tuple[int, int, RigidMotion], ...]

    def __post_init__(self):
        motions = tuple(self.global_motions)
        edges = tuple((int(i), int(j), m) for i, j, m in self.edges)
        n = len(motions)
        if n < 2:
            raise ValueError("a view graph needs at least 2 views")
        anchor = motions[0]
        drift = max(
            np.max(np.abs(anchor.rotation - np.eye(3))),
            np.max(np.abs(anchor.translation)),
        )
        if drift > _ANCHOR_TOL:
            raise ValueError("view 0 must carry the identity motion (gauge anchor)")
        seen = set()
        for i, j, _ in edges:
            if i == j:
                raise ValueError(f"self edge ({i}, {j}) not allowed")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} views")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
        object.__setattr__(self, "global_motions", motions)
        object.__setattr__(self, "edges", edges)

    @property
    def n_views(self) -> int:
        return len(self.global_motions)

    def predicted_relative(self, i: int, j: int) -> RigidMotion:
        """Relative motion implied by the current global motions."""
        return compose(inverse(self.global_motions[i]), self.global_motions[j])

    def is_connected(self) -> bool:
        n = self.n_views
        adj = [[] for _ in range(n)]
        for i, j, _ in self.edges:
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

    def with_motions(self, motions) -> "ViewGraph":
        return ViewGraph(tuple(motions), self.edges)

    def with_edges(self, edges) -> "ViewGraph":
        return ViewGraph(self.global_motions, tuple(edges))

    @staticmethod
    def anchored(motions, edges=()) -> "ViewGraph":
        """Build a graph re-gauged so view 0 carries the identity."""
        motions = list(motions)
        to_anchor = inverse(motions[0])
        rebased = [RigidMotion.identity()]
        rebased += [compose(to_anchor, m) for m in motions[1:]]
        return ViewGraph(tuple(rebased), tuple(edges))


@dataclass(frozen=True, eq=False)
class IncidenceSystem:
    """Stacked -I/+I block system D x = delta_v over non-anchor views."""

    matrix: np.ndarray
    delta_v: np.ndarray


def edge_correction(graph: ViewGraph, edge: tuple[int, int, RigidMotion]) -> Twist:
    """Twist of the discrepancy M_i o M_ij o inverse(M_j) for one edge."""
    i, j, measured = edge
    discrepancy = compose(
        compose(graph.global_motions[i], measured),
        inverse(graph.global_motions[j]),
    )
    return log_map(discrepancy)


def build_incidence_system(graph: ViewGraph) -> IncidenceSystem:
    n_edges = len(graph.edges)
    n_free = graph.n_views - 1
    d = np.zeros((6 * n_edges, 6 * n_free))
    delta_v = np.zeros(6 * n_edges)
    eye6 = np.eye(6)
    for row, edge in enumerate(graph.edges):
        i, j, _ = edge
        rb = slice(6 * row, 6 * row + 6)
        if i > 0:
            d[rb, 6 * (i - 1):6 * i] = -eye6
        if j > 0:
            d[rb, 6 * (j - 1):6 * j] = eye6
        delta_v[rb] = vec(edge_correction(graph, edge))
    return IncidenceSystem(matrix=d, delta_v=delta_v)


def solve_corrections(system: IncidenceSystem) -> list[Twist]:
    """Least-squares corrections, one twist per non-anchor view."""
    n_free = system.matrix.shape[1] // 6
    x, _, rank, _ = np.linalg.lstsq(system.matrix, system.delta_v, rcond=None)
    if rank < system.matrix.shape[1]:
        raise RankDeficient(
            f"incidence system rank {rank} < {system.matrix.shape[1]}; "
            "view graph is not connected"
        )
    return [cev(x[6 * k:6 * k + 6]) for k in range(n_free)]


def apply_corrections(graph: ViewGraph, corrections: list[Twist]) -> ViewGraph:
    """Left-multiply each non-anchor view's motion by exp(correction)."""
    if len(corrections) != graph.n_views - 1:
        raise ValueError(
            f"expected {graph.n_views - 1} corrections, got {len(corrections)}"
        )
    motions = [graph.global_motions[0]]
    for k in range(1, graph.n_views):
        motions.append(compose(exp_map(corrections[k - 1]), graph.global_motions[k]))
    return graph.with_motions(motions)


def motion_average(graph: ViewGraph, epsilon: float = 1e-6, max_rounds: int = 20) -> ViewGraph:
    """Iterate correction rounds until the stacked correction norm drops
    below epsilon or max_rounds is reached."""
    if not graph.is_connected():
        raise RankDeficient("view graph is not connected; cannot average")
    current = graph
    for _ in range(max_rounds):
        system = build_incidence_system(current)
        corrections = solve_corrections(system)
        current = apply_corrections(current, corrections)
        norm = float(np.linalg.norm(np.concatenate([vec(c) for c in corrections])))
        if norm < epsilon:
            break
    return current
