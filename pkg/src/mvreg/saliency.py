"""Per-vertex geometric saliency of a triangle mesh.

Mean curvature is discretized with the cotangent Laplacian (barycentric
vertex areas), saliency is the absolute difference of Gaussian-weighted
curvature at paired fine/coarse scales, and the five scale maps are
combined after promoting maps with one dominant peak.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import DegenerateBoundingBox, UnreferencedVertex

# Guard against zero-area faces when forming cotangents.
_AREA_FLOOR = 1e-300


class TriangleMesh:
    """Vertices and triangular faces with cached derived quantities."""

    def __init__(self, vertices: np.ndarray, faces: np.ndarray):
        v = np.array(vertices, dtype=float).reshape(-1, 3)
        f = np.array(faces, dtype=int).reshape(-1, 3)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise ValueError("degenerate face with a repeated vertex index")
        v.setflags(write=False)
        f.setflags(write=False)
        self._vertices = v
        self._faces = f
        self._tree = None
        self._curvature = None
        self._normals = None
        self._edges = None

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def faces(self) -> np.ndarray:
        return self._faces

    @property
    def n_vertices(self) -> int:
        return self._vertices.shape[0]

    @property
    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self._vertices)
        return self._tree

    @property
    def bounding_box_diagonal(self) -> float:
        span = self._vertices.max(axis=0) - self._vertices.min(axis=0)
        return float(np.linalg.norm(span))

    @property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (e, 2) index array."""
        if self._edges is None:
            f = self._faces
            pairs = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
            pairs.sort(axis=1)
            self._edges = np.unique(pairs, axis=0)
        return self._edges

    def vertex_normals(self) -> np.ndarray:
        """Area-weighted vertex normals from the face winding order."""
        if self._normals is None:
            v, f = self._vertices, self._faces
            fn = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
            acc = np.zeros_like(v)
            for k in range(3):
                np.add.at(acc, f[:, k], fn)
            norms = np.linalg.norm(acc, axis=1)
            norms[norms == 0.0] = 1.0
            self._normals = acc / norms[:, None]
        return self._normals

    @property
    def curvature(self) -> np.ndarray:
        if self._curvature is None:
            self._curvature = mean_curvature(self)
        return self._curvature

    def boundary_vertices(self) -> np.ndarray:
        """Boolean mask of vertices on an edge used by exactly one face."""
        f = self._faces
        pairs = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        pairs.sort(axis=1)
        uniq, counts = np.unique(pairs, axis=0, return_counts=True)
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[uniq[counts == 1].ravel()] = True
        return mask


@dataclass(frozen=True, eq=False)
class SaliencyField:
    """Final per-vertex saliency plus the scale ladder that produced it."""

    values: np.ndarray
    scale_base: float
    scales: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class SalientCluster:
    members: np.ndarray
    centroid: np.ndarray
    peak_saliency: float


@dataclass(frozen=True)
class RetrievalConfig:
    th_saliency: float | None = None
    saliency_percentile: float = 70.0
    th_dist: float | None = None
    thres_ft: float = 0.5
    scale_fraction: float = 0.003

    def __post_init__(self):
        if not 0.0 <= self.saliency_percentile <= 100.0:
            raise ValueError("saliency_percentile must lie in [0, 100]")
        if self.th_dist is not None and self.th_dist <= 0.0:
            raise ValueError("th_dist must be positive")
        if self.thres_ft <= 0.0:
            raise ValueError("thres_ft must be positive")
        if self.scale_fraction <= 0.0:
            raise ValueError("scale_fraction must be positive")


def mean_curvature(mesh: TriangleMesh) -> np.ndarray:
    """Signed discrete mean curvature per vertex.

    Cotangent-weighted Laplacian with barycentric areas; the magnitude is
    half the curvature-normal length and the sign follows the vertex
    normal (convex regions of an outward-oriented surface are positive).
    Boundary vertices copy the value of their nearest interior vertex.
    """
    v, f = mesh.vertices, mesh.faces
    referenced = np.zeros(mesh.n_vertices, dtype=bool)
    referenced[f.ravel()] = True
    if not referenced.all():
        missing = int(np.nonzero(~referenced)[0][0])
        raise UnreferencedVertex(f"vertex {missing} belongs to no face")

    rows, cols, vals = [], [], []
    corners = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
    cots = []
    face_area = None
    for a, b, c in corners:
        e1 = v[f[:, b]] - v[f[:, a]]
        e2 = v[f[:, c]] - v[f[:, a]]
        crossed = np.cross(e1, e2)
        double_area = np.linalg.norm(crossed, axis=1)
        if face_area is None:
            face_area = 0.5 * double_area
        cot = np.einsum("ij,ij->i", e1, e2) / np.maximum(double_area, _AREA_FLOOR)
        cots.append(cot)
        rows.extend([f[:, b], f[:, c]])
        cols.extend([f[:, c], f[:, b]])
        vals.extend([cot, cot])

    # Mixed Voronoi areas: cotangent formula on acute triangles, area/2 at
    # the obtuse corner and area/4 at the others on obtuse ones.
    cots = np.column_stack(cots)
    areas = np.zeros(mesh.n_vertices)
    sq = np.stack([
        np.sum((v[f[:, 1]] - v[f[:, 2]]) ** 2, axis=1),  # opposite corner 0
        np.sum((v[f[:, 2]] - v[f[:, 0]]) ** 2, axis=1),
        np.sum((v[f[:, 0]] - v[f[:, 1]]) ** 2, axis=1),
    ], axis=1)
    obtuse = cots < 0.0
    any_obtuse = obtuse.any(axis=1)
    for k in range(3):
        voronoi = (sq[:, (k + 1) % 3] * cots[:, (k + 1) % 3]
                   + sq[:, (k + 2) % 3] * cots[:, (k + 2) % 3]) / 8.0
        mixed = np.where(
            any_obtuse,
            np.where(obtuse[:, k], face_area / 2.0, face_area / 4.0),
            voronoi,
        )
        np.add.at(areas, f[:, k], mixed)

    w = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.n_vertices, mesh.n_vertices),
    ).tocsr()
    wsum = np.asarray(w.sum(axis=1)).ravel()
    k_vec = (wsum[:, None] * v - w @ v) / np.maximum(2.0 * areas, _AREA_FLOOR)[:, None]
    magnitude = 0.5 * np.linalg.norm(k_vec, axis=1)
    orientation = np.sign(np.einsum("ij,ij->i", k_vec, mesh.vertex_normals()))
    orientation[orientation == 0.0] = 1.0
    h = orientation * magnitude

    boundary = mesh.boundary_vertices()
    interior = np.nonzero(~boundary)[0]
    if interior.size and boundary.any():
        interior_tree = cKDTree(v[interior])
        _, nearest = interior_tree.query(v[boundary])
        h[boundary] = h[interior[nearest]]
    return h


def weighted_curvature(mesh: TriangleMesh, vertex: int, sigma: float) -> float:
    """Gaussian-weighted mean of curvature over the open ball of radius
    sigma around one vertex (the vertex itself always participates)."""
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    values = mesh.curvature
    center = mesh.vertices[vertex]
    idx = np.array(mesh.tree.query_ball_point(center, sigma), dtype=int)
    d = np.linalg.norm(mesh.vertices[idx] - center, axis=1)
    keep = d < sigma
    idx, d = idx[keep], d[keep]
    w = np.exp(-d * d / (2.0 * sigma * sigma))
    return float(np.sum(w * values[idx]) / np.sum(w))


def _smoothed_fields(mesh: TriangleMesh, values: np.ndarray, sigmas: list[float]) -> list[np.ndarray]:
    """Gaussian-weighted neighborhood means of a vertex field, one array
    per sigma, sharing a single neighbor-pair pass at the largest radius."""
    n = mesh.n_vertices
    pairs = mesh.tree.query_pairs(max(sigmas), output_type="ndarray")
    if pairs.size:
        d = np.linalg.norm(mesh.vertices[pairs[:, 0]] - mesh.vertices[pairs[:, 1]], axis=1)
    else:
        d = np.zeros(0)
    out = []
    for sigma in sigmas:
        mask = d < sigma
        pi, pj, dm = pairs[mask, 0], pairs[mask, 1], d[mask]
        w = np.exp(-dm * dm / (2.0 * sigma * sigma))
        num = values.copy()
        num += np.bincount(pi, weights=w * values[pj], minlength=n)
        num += np.bincount(pj, weights=w * values[pi], minlength=n)
        den = np.ones(n)
        den += np.bincount(pi, weights=w, minlength=n)
        den += np.bincount(pj, weights=w, minlength=n)
        out.append(num / den)
    return out


def _peak_promotion(field: np.ndarray, edges: np.ndarray) -> float:
    """Itti-style weight: squared gap between the global maximum and the
    mean of the remaining local maxima over the mesh adjacency."""
    neighbor_max = np.full(field.shape, -np.inf)
    np.maximum.at(neighbor_max, edges[:, 0], field[edges[:, 1]])
    np.maximum.at(neighbor_max, edges[:, 1], field[edges[:, 0]])
    local_max = field[field >= neighbor_max]
    top = float(field.max())
    others = local_max[local_max < top]
    mean_others = float(others.mean()) if others.size else 0.0
    return (top - mean_others) ** 2


def saliency(mesh: TriangleMesh, cfg: RetrievalConfig,
             curvature: np.ndarray | None = None) -> SaliencyField:
    """Multi-scale saliency from center/surround curvature differences.

    The scale base is scale_fraction of the bounding-box diagonal; each
    of the five scales compares the Gaussian-weighted curvature at sigma
    with the one at 2*sigma.
    """
    diag = mesh.bounding_box_diagonal
    if diag <= 0.0:
        raise DegenerateBoundingBox("mesh bounding box has zero diagonal")
    values = mesh.curvature if curvature is None else np.asarray(curvature, dtype=float)
    base = cfg.scale_fraction * diag
    scales = tuple(m * base for m in (2, 3, 4, 5, 6))
    sigmas = list(scales) + [2.0 * s for s in scales]
    smoothed = _smoothed_fields(mesh, values, sigmas)
    edges = mesh.edges
    total = np.zeros(mesh.n_vertices)
    for k in range(5):
        per_scale = np.abs(smoothed[k] - smoothed[k + 5])
        total += per_scale * _peak_promotion(per_scale, edges)
    return SaliencyField(values=total, scale_base=base, scales=scales)


def cluster_salient(field: SaliencyField, mesh: TriangleMesh,
                    cfg: RetrievalConfig) -> list[SalientCluster]:
    """Single-linkage clusters of super-threshold vertices.

    Vertices closer than the linkage distance join the same cluster;
    clusters of fewer than 3 vertices are dropped as noise.
    """
    values = field.values
    if cfg.th_saliency is not None:
        th = cfg.th_saliency
        selected = np.nonzero(values >= th)[0]
    elif float(values.max()) <= 0.0:
        selected = np.zeros(0, dtype=int)
    else:
        th = float(np.percentile(values, cfg.saliency_percentile))
        selected = np.nonzero((values >= th) & (values > 0.0))[0]
    if selected.size == 0:
        return []
    link = cfg.th_dist if cfg.th_dist is not None else 5.0 * field.scale_base
    pos = mesh.vertices[selected]
    tree = cKDTree(pos)
    pairs = tree.query_pairs(link, output_type="ndarray")
    if pairs.size:
        d = np.linalg.norm(pos[pairs[:, 0]] - pos[pairs[:, 1]], axis=1)
        pairs = pairs[d < link]
    m = selected.size
    adj = sparse.coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m)
    )
    n_comp, labels = connected_components(adj, directed=False)
    clusters = []
    for comp in range(n_comp):
        members = selected[labels == comp]
        if members.size < 3:
            continue
        clusters.append(SalientCluster(
            members=members,
            centroid=mesh.vertices[members].mean(axis=0),
            peak_saliency=float(values[members].max()),
        ))
    clusters.sort(key=lambda c: int(c.members.min()))
    return clusters
