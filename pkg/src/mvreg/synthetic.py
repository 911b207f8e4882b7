"""Synthetic scenes, clouds, and meshes for tests and benchmarks.

Registration scenes are samples of a smooth random height field over a
desk-scale rectangle, viewed through overlapping windows with per-view
poses.  Mesh generators cover the analytic shapes (sphere, plane,
cylinder) and a battery of face/non-face models with planted features.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .averaging import ViewGraph
from .cloud import PointCloud
from .geometry import RigidMotion, Twist, compose, exp_map, inverse
from .saliency import TriangleMesh


def _random_motion(rng: np.random.Generator, max_angle: float, max_shift: float) -> RigidMotion:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.2 * max_angle, max_angle) if max_angle > 0 else 0.0
    shift = rng.uniform(-max_shift, max_shift, size=3)
    return compose(exp_map(Twist(axis * angle, np.zeros(3))),
                   RigidMotion(np.eye(3), shift))


def _height_field(rng: np.random.Generator, n_bumps: int, amplitude: float, extent):
    (x0, x1), (y0, y1) = extent
    cx = rng.uniform(x0, x1, n_bumps)
    cy = rng.uniform(y0, y1, n_bumps)
    width = rng.uniform(0.06, 0.22, n_bumps) * (x1 - x0)
    height = rng.uniform(-amplitude, amplitude, n_bumps)

    def f(x, y):
        z = np.zeros_like(x)
        for k in range(n_bumps):
            z += height[k] * np.exp(
                -((x - cx[k]) ** 2 + (y - cy[k]) ** 2) / (2.0 * width[k] ** 2)
            )
        return z

    return f


def make_pair(seed: int, n_points: int = 1000, max_rotation_deg: float = 30.0,
              overlap: float = 0.7, noise_factor: float = 0.3):
    """Source/target cloud pair with known ground-truth motion.

    The target covers only an `overlap` fraction of the source's domain,
    both are sampled independently, and Gaussian noise scaled by the
    source resolution is added to each.  Returns
    (source, target, truth) where truth maps source into the target frame.
    """
    rng = np.random.default_rng(seed)
    extent = ((0.0, 1.0), (0.0, 1.0))
    surf = _height_field(rng, 7, 0.22, extent)

    sx = rng.uniform(0.0, 1.0, n_points)
    sy = rng.uniform(0.0, 1.0, n_points)
    source_pts = np.column_stack([sx, sy, surf(sx, sy)])

    tx = rng.uniform(1.0 - overlap, 1.0, n_points)
    ty = rng.uniform(0.0, 1.0, n_points)
    target_world = np.column_stack([tx, ty, surf(tx, ty)])

    truth = _random_motion(rng, math.radians(max_rotation_deg), 0.15)
    target_pts = truth.apply(target_world)

    resolution = PointCloud(source_pts).resolution
    sigma = noise_factor * resolution
    source_pts = source_pts + rng.normal(scale=sigma, size=source_pts.shape)
    target_pts = target_pts + rng.normal(scale=sigma, size=target_pts.shape)
    return PointCloud(source_pts), PointCloud(target_pts), truth


def make_multiview_scene(seed: int, n_views: int = 4, points_per_view: int = 700,
                         share_samples: bool = False, noise_factor: float = 0.2,
                         window_width: float = 0.5, window_step: float = 0.1):
    """Overlapping-window views of one desk-scale surface.

    Returns (clouds, truth) where truth is the anchored ViewGraph whose
    motions place every local cloud back into the world frame.  With
    share_samples=True all views draw from one world sample set (overlap
    regions then contain identical points) and no noise is added.
    """
    rng = np.random.default_rng(seed)
    span = window_width + window_step * (n_views - 1)
    extent = ((0.0, span), (0.0, 0.5))
    surf = _height_field(rng, 8, 0.08, extent)

    motions = [RigidMotion.identity()]
    for _ in range(n_views - 1):
        motions.append(_random_motion(rng, math.radians(12.0), 0.15))
    truth = ViewGraph(tuple(motions), ())

    if share_samples:
        n_world = points_per_view * n_views
        wx = rng.uniform(0.0, span, n_world)
        wy = rng.uniform(0.0, 0.5, n_world)
        world = np.column_stack([wx, wy, surf(wx, wy)])
        clouds = []
        for k in range(n_views):
            lo = window_step * k
            mask = (wx >= lo) & (wx <= lo + window_width)
            local = inverse(motions[k]).apply(world[mask])
            clouds.append(PointCloud(local))
        return clouds, truth

    clouds = []
    for k in range(n_views):
        lo = window_step * k
        vx = rng.uniform(lo, lo + window_width, points_per_view)
        vy = rng.uniform(0.0, 0.5, points_per_view)
        world = np.column_stack([vx, vy, surf(vx, vy)])
        local = inverse(motions[k]).apply(world)
        cloud = PointCloud(local)
        sigma = noise_factor * cloud.resolution
        local = local + rng.normal(scale=sigma, size=local.shape)
        clouds.append(PointCloud(local))
    return clouds, truth


def icosphere(subdivisions: int, radius: float = 1.0) -> TriangleMesh:
    """Subdivided icosahedron projected onto the sphere of given radius."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts[0])
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = list(verts)
    for _ in range(subdivisions):
        midpoint = {}

        def midpoint_index(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in midpoint:
                m = verts[a] + verts[b]
                m /= np.linalg.norm(m)
                midpoint[key] = len(verts)
                verts.append(m)
            return midpoint[key]

        new_faces = []
        for a, b, c in faces:
            ab = midpoint_index(a, b)
            bc = midpoint_index(b, c)
            ca = midpoint_index(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return TriangleMesh(np.array(verts) * radius, np.array(faces))


def grid_mesh(nx: int, ny: int, spacing: float = 1.0, height_fn=None) -> TriangleMesh:
    """Regular triangulated grid in the xy plane, optionally displaced in
    z by height_fn(x, y).  Normals point toward +z."""
    xs = np.arange(nx) * spacing
    ys = np.arange(ny) * spacing
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    gz = height_fn(gx, gy) if height_fn is not None else np.zeros_like(gx)
    verts = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    faces = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j
            b = (i + 1) * ny + j
            c = (i + 1) * ny + j + 1
            d = i * ny + j + 1
            faces += [(a, b, c), (a, c, d)]
    return TriangleMesh(verts, np.array(faces))


def cylinder_mesh(radius: float, height: float, n_around: int = 48,
                  n_along: int = 24) -> TriangleMesh:
    """Open-ended tube along z, outward normals."""
    verts = []
    for i in range(n_along):
        z = height * i / (n_along - 1)
        for j in range(n_around):
            a = 2.0 * math.pi * j / n_around
            verts.append((radius * math.cos(a), radius * math.sin(a), z))
    faces = []
    for i in range(n_along - 1):
        for j in range(n_around):
            a = i * n_around + j
            b = i * n_around + (j + 1) % n_around
            c = (i + 1) * n_around + (j + 1) % n_around
            d = (i + 1) * n_around + j
            faces += [(a, b, c), (a, c, d)]
    return TriangleMesh(np.array(verts), np.array(faces))


@dataclass(frozen=True)
class BatteryModel:
    model_id: str
    mesh: TriangleMesh
    is_face: bool


def _bumpy_grid(rng: np.random.Generator, bumps, n: int = 56) -> TriangleMesh:
    """Unit grid with a gentle random undulation plus planted bumps,
    each bump given as (cx, cy, height, width)."""
    amp = 0.004
    kx, ky = rng.uniform(1.0, 2.5, 2)
    px, py = rng.uniform(0.0, 2.0 * math.pi, 2)

    def height(x, y):
        z = amp * np.sin(kx * math.pi * x + px) * np.sin(ky * math.pi * y + py)
        for cx, cy, h, w in bumps:
            z = z + h * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * w ** 2))
        return z

    return grid_mesh(n, n, spacing=1.0 / (n - 1), height_fn=height)


def _face_bumps(rng: np.random.Generator, jitter: float = 0.012):
    """Eye/eye/nose bump layout with positional jitter, random in-plane
    rotation, and a random overall scale."""
    base = np.array([[0.12, 0.12], [-0.12, 0.12], [0.0, -0.12]])
    scale = rng.uniform(0.9, 1.15)
    angle = rng.uniform(0.0, 2.0 * math.pi)
    rot = np.array([[math.cos(angle), -math.sin(angle)],
                    [math.sin(angle), math.cos(angle)]])
    pts = (base * scale) @ rot.T + rng.uniform(-jitter, jitter, size=(3, 2))
    pts += np.array([0.5, 0.5])
    return [(p[0], p[1], 0.1, 0.04) for p in pts]


def face_battery(seed: int, n_models: int = 36):
    """Battery of face and non-face meshes with planted features.

    Half the models carry the eye/eye/nose bump layout; the rest are
    smooth, under-featured, or carry bump layouts of clearly different
    shape.  Returns (models, standard_layout_points) where the layout
    points are the unjittered bump centers of the canonical face lifted
    to the surface, ordered eye_l, eye_r, nose.
    """
    rng = np.random.default_rng(seed)
    n_faces = n_models // 2
    models: list[BatteryModel] = []
    for k in range(n_faces):
        mesh = _bumpy_grid(rng, _face_bumps(rng))
        models.append(BatteryModel(f"face_{k:02d}", mesh, True))
    kinds = ["smooth", "two", "line", "flat", "tall"]
    for k in range(n_models - n_faces):
        kind = kinds[k % len(kinds)]
        if kind == "smooth":
            bumps = []
        elif kind == "two":
            bumps = [(0.35, 0.5, 0.1, 0.04), (0.65, 0.5, 0.1, 0.04)]
        elif kind == "line":
            bumps = [(0.3, 0.42, 0.1, 0.04), (0.5, 0.5, 0.1, 0.04),
                     (0.7, 0.58, 0.1, 0.04)]
        elif kind == "flat":
            bumps = [(0.2, 0.5, 0.1, 0.04), (0.8, 0.5, 0.1, 0.04),
                     (0.5, 0.44, 0.1, 0.04)]
        else:  # tall and narrow
            bumps = [(0.45, 0.8, 0.1, 0.04), (0.55, 0.8, 0.1, 0.04),
                     (0.5, 0.2, 0.1, 0.04)]
        mesh = _bumpy_grid(rng, bumps)
        models.append(BatteryModel(f"other_{k:02d}", mesh, False))

    # Canonical unjittered layout for the standard triangle, lifted to
    # the bump height so the points sit on the surface.  Ordered eye_l,
    # eye_r, nose such that the winding normal points +z (outward).
    canonical = np.array([[0.62, 0.62], [0.38, 0.62], [0.5, 0.38]])
    standard_points = np.column_stack([
        canonical[:, 0], canonical[:, 1], np.full(3, 0.1)
    ])
    return models, standard_points
