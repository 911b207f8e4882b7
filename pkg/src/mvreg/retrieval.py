"""Facial-triangle matching and face/non-face retrieval.

A facial triangle is three labeled salient-region centroids.  Matching
aligns a test triangle to the standard one by centroid translation,
normal-vector rotation, an in-plane rotation, and a positive uniform
scale, then scores the mean remaining vertex distance, minimized over
the three cyclic vertex correspondences.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTriangle, InputError
from .saliency import RetrievalConfig, TriangleMesh, cluster_salient, saliency

_COLLINEAR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FacialTriangle:
    """Three ordered 3D vertices; the winding order fixes the normal."""

    vertices: np.ndarray
    centroid: np.ndarray = field(init=False)
    normal: np.ndarray = field(init=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(3, 3)
        crossed = np.cross(v[1] - v[0], v[2] - v[0])
        area2 = np.linalg.norm(crossed)
        edge = max(np.linalg.norm(v[1] - v[0]), np.linalg.norm(v[2] - v[0]), 1e-300)
        if area2 <= _COLLINEAR_TOL * edge * edge:
            raise DegenerateTriangle("triangle vertices are collinear or coincident")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "centroid", v.mean(axis=0))
        object.__setattr__(self, "normal", crossed / area2)


@dataclass(frozen=True)
class RetrievalResult:
    model_id: str
    cluster_count: int
    best_error: float
    is_face: bool
    skipped_degenerate: int = 0


def _rotation_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimal rotation taking unit vector a onto unit vector b."""
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    c = float(np.dot(a, b))
    if s < 1e-12:
        if c > 0.0:
            return np.eye(3)
        # Antiparallel: rotate pi about any axis perpendicular to a.
        pick = np.zeros(3)
        pick[int(np.argmin(np.abs(a)))] = 1.0
        u = np.cross(a, pick)
        u /= np.linalg.norm(u)
        return 2.0 * np.outer(u, u) - np.eye(3)
    k = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    theta = math.atan2(s, c)
    k /= s
    return np.eye(3) + math.sin(theta) * k + (1.0 - math.cos(theta)) * (k @ k)


def match_triangle(test: FacialTriangle, standard: FacialTriangle) -> float:
    """Mean vertex distance after the best similarity alignment.

    Translation and normal rotation are exact constructions; the in-plane
    angle and the positive scale minimizing the summed squared vertex
    distance have a joint closed form in the common triangle plane.
    """
    p = (test.vertices - test.centroid) @ _rotation_between(test.normal, standard.normal).T
    q = standard.vertices - standard.centroid
    n = standard.normal
    e1 = q[0] / np.linalg.norm(q[0])
    e2 = np.cross(n, e1)
    pc = p @ e1 + 1j * (p @ e2)
    qc = q @ e1 + 1j * (q @ e2)
    power = float(np.sum(np.abs(pc) ** 2))
    best = math.inf
    for shift in range(3):
        qk = qc[[(0 + shift) % 3, (1 + shift) % 3, (2 + shift) % 3]]
        a = np.sum(qk * np.conj(pc)) / power
        err = float(np.mean(np.abs(a * pc - qk)))
        best = min(best, err)
    return best


def _oriented_candidate(points: np.ndarray, outward: np.ndarray) -> FacialTriangle:
    """Triangle over three centroids, wound so its normal faces outward."""
    crossed = np.cross(points[1] - points[0], points[2] - points[0])
    if np.dot(crossed, outward) < 0.0:
        points = points[[0, 2, 1]]
    return FacialTriangle(points)


def retrieve_faces(models, standard: FacialTriangle, cfg: RetrievalConfig,
                   ids=None) -> list[RetrievalResult]:
    """Score every model's best candidate triangle against the standard.

    For each mesh the salient clusters are formed and every combination
    of three cluster centroids becomes a candidate; a model with fewer
    than three clusters has no candidate and cannot be a face.
    """
    if ids is None:
        ids = [str(k) for k in range(len(models))]
    results = []
    for model_id, mesh in zip(ids, models):
        field_ = saliency(mesh, cfg)
        clusters = cluster_salient(field_, mesh, cfg)
        if len(clusters) < 3:
            results.append(RetrievalResult(
                model_id=str(model_id),
                cluster_count=len(clusters),
                best_error=math.inf,
                is_face=False,
            ))
            continue
        normals = mesh.vertex_normals()
        best = math.inf
        skipped = 0
        for trio in itertools.combinations(range(len(clusters)), 3):
            picked = [clusters[k] for k in trio]
            points = np.array([c.centroid for c in picked])
            outward = np.concatenate([normals[c.members] for c in picked]).mean(axis=0)
            try:
                candidate = _oriented_candidate(points, outward)
            except DegenerateTriangle:
                skipped += 1
                continue
            best = min(best, match_triangle(candidate, standard))
        results.append(RetrievalResult(
            model_id=str(model_id),
            cluster_count=len(clusters),
            best_error=best,
            is_face=best < cfg.thres_ft,
            skipped_degenerate=skipped,
        ))
    return results


_LABELS = ("eye_l", "eye_r", "nose")


def write_standard_triangle(tri: FacialTriangle, path) -> None:
    """Write the labeled three-point standard triangle file."""
    with open(path, "w", encoding="ascii") as f:
        for label, vert in zip(_LABELS, tri.vertices):
            f.write(label + " " + " ".join(repr(float(x)) for x in vert) + "\n")


def read_standard_triangle(path) -> FacialTriangle:
    """Read a standard triangle file: one 'label x y z' line per vertex
    with labels eye_l, eye_r, nose in any order."""
    found = {}
    with open(path, "r", encoding="ascii") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise InputError(f"bad standard-triangle line: {line!r}")
            label = parts[0]
            if label not in _LABELS:
                raise InputError(f"unknown vertex label {label!r}")
            if label in found:
                raise InputError(f"duplicate vertex label {label!r}")
            try:
                found[label] = [float(x) for x in parts[1:]]
            except ValueError:
                raise InputError(f"bad coordinates in line: {line!r}") from None
    missing = [lab for lab in _LABELS if lab not in found]
    if missing:
        raise InputError(f"standard triangle file missing labels: {missing}")
    return FacialTriangle(np.array([found[lab] for lab in _LABELS]))
