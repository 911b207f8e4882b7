"""Rigid-motion algebra on SE(3).

A RigidMotion is a rotation matrix plus a translation vector; applying it
to a point computes R @ p + t.  compose(a, b) applies b first, then a.
Twists are the tangent-space (Lie algebra) representation used by motion
averaging, packed rotation-first into 6-vectors by vec()/cev().
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AngleAtBranchCut

# Numerical guards: small-angle series switches, allowed orthonormality
# drift before re-orthonormalization, and the rejected band around pi.
_TINY_ANGLE = 1e-12
_SERIES_ANGLE = 1e-3  # below this, Taylor series beat the closed forms
_ORTHO_DRIFT = 1e-12
_BRANCH_MARGIN = 1e-6


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def _unskew(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _nearest_rotation(m: np.ndarray) -> np.ndarray:
    """Project a near-rotation matrix onto SO(3) (polar decomposition)."""
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u[:, -1] *= -1.0
        r = u @ vt
    return r


@dataclass(frozen=True, eq=False)
class Twist:
    """se(3) element: rotation part omega (rad), translation part nu."""

    omega: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float).reshape(3)
        nu = np.array(self.nu, dtype=float).reshape(3)
        if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(nu))):
            raise ValueError("twist components must be finite")
        omega.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "nu", nu)

    @staticmethod
    def zero() -> "Twist":
        return Twist(np.zeros(3), np.zeros(3))


@dataclass(frozen=True, eq=False)
class RigidMotion:
    """SE(3) element: orthonormal rotation (det +1) and translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise ValueError("motion components must be finite")
        drift = np.linalg.norm(r.T @ r - np.eye(3))
        if drift > 1e-9:
            raise ValueError(f"rotation is not orthonormal (drift {drift:.3e})")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation determinant must be +1")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "RigidMotion":
        return RigidMotion(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one (3,) point or an (n, 3) batch."""
        p = np.asarray(points, dtype=float)
        if p.ndim == 1:
            return self.rotation @ p + self.translation
        return p @ self.rotation.T + self.translation

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @staticmethod
    def from_matrix(m: np.ndarray) -> "RigidMotion":
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"expected 4x4 matrix, got {m.shape}")
        if np.max(np.abs(m[3] - np.array([0.0, 0.0, 0.0, 1.0]))) > 1e-9:
            raise ValueError("last row must be [0, 0, 0, 1]")
        return RigidMotion(m[:3, :3], m[:3, 3])


def compose(a: RigidMotion, b: RigidMotion) -> RigidMotion:
    """Motion applying b first, then a."""
    r = a.rotation @ b.rotation
    if np.linalg.norm(r.T @ r - np.eye(3)) > _ORTHO_DRIFT:
        r = _nearest_rotation(r)
    t = a.rotation @ b.translation + a.translation
    return RigidMotion(r, t)


def inverse(m: RigidMotion) -> RigidMotion:
    rt = m.rotation.T
    return RigidMotion(rt, -rt @ m.translation)


def rotation_angle(r: np.ndarray) -> float:
    """Geodesic angle of a rotation matrix, in [0, pi].

    atan2 of the skew-part norm against the trace stays well conditioned
    at both ends of the range, unlike the plain acos form.
    """
    s = 0.5 * np.linalg.norm(_unskew(r - r.T))
    c = (np.trace(r) - 1.0) / 2.0
    return math.atan2(s, c)


def _so3_exp(omega: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(omega)
    k = _skew(omega)
    k2 = k @ k
    if theta < _TINY_ANGLE:
        return np.eye(3) + k + 0.5 * k2
    half = math.sin(0.5 * theta)
    s = math.sin(theta) / theta
    c = 2.0 * half * half / (theta * theta)  # (1 - cos)/theta^2, no cancellation
    return np.eye(3) + s * k + c * k2


def _so3_log(r: np.ndarray) -> np.ndarray:
    theta = rotation_angle(r)
    if math.pi - theta < _BRANCH_MARGIN:
        raise AngleAtBranchCut(
            f"rotation angle {theta:.9f} within {_BRANCH_MARGIN} of pi"
        )
    w = _unskew(r - r.T)
    if theta < _SERIES_ANGLE:
        return (0.5 + theta * theta / 12.0) * w
    return (theta / (2.0 * math.sin(theta))) * w


def _left_jacobian(omega: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(omega)
    k = _skew(omega)
    k2 = k @ k
    t2 = theta * theta
    if theta < _SERIES_ANGLE:
        b = 1.0 / 6.0 - t2 / 120.0
        return np.eye(3) + 0.5 * k + b * k2
    half = math.sin(0.5 * theta)
    a = 2.0 * half * half / t2
    b = (theta - math.sin(theta)) / (t2 * theta)
    return np.eye(3) + a * k + b * k2


def _left_jacobian_inv(omega: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(omega)
    k = _skew(omega)
    k2 = k @ k
    t2 = theta * theta
    if theta < _SERIES_ANGLE:
        b = 1.0 / 12.0 + t2 / 720.0
    else:
        # 1 - (theta/2)*cot(theta/2), written without the 1-cos term
        b = (1.0 - 0.5 * theta / math.tan(0.5 * theta)) / t2
    return np.eye(3) - 0.5 * k + b * k2


def exp_map(tw: Twist) -> RigidMotion:
    """se(3) -> SE(3): Rodrigues rotation, left-Jacobian translation."""
    r = _so3_exp(tw.omega)
    if np.linalg.norm(r.T @ r - np.eye(3)) > _ORTHO_DRIFT:
        r = _nearest_rotation(r)
    t = _left_jacobian(tw.omega) @ tw.nu
    return RigidMotion(r, t)


def log_map(m: RigidMotion) -> Twist:
    """SE(3) -> se(3), principal branch.

    Raises AngleAtBranchCut when the rotation angle is within 1e-6 of pi,
    where the axis is not recoverable from R - R^T.
    """
    omega = _so3_log(m.rotation)
    nu = _left_jacobian_inv(omega) @ m.translation
    return Twist(omega, nu)


def vec(tw: Twist) -> np.ndarray:
    """Pack a twist into a 6-vector, rotation part first."""
    return np.concatenate([tw.omega, tw.nu])


def cev(v: np.ndarray) -> Twist:
    """Inverse of vec(): unpack [omega; nu]."""
    v = np.asarray(v, dtype=float).reshape(6)
    return Twist(v[:3], v[3:])


def write_transform(m: RigidMotion, path) -> None:
    """Write a 4x4 homogeneous matrix, row-major ASCII, one row per line."""
    rows = m.matrix()
    with open(path, "w", encoding="ascii") as f:
        for row in rows:
            f.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_transform(path) -> RigidMotion:
    with open(path, "r", encoding="ascii") as f:
        values = [float(tok) for tok in f.read().split()]
    if len(values) != 16:
        raise ValueError(f"transform file must hold 16 numbers, got {len(values)}")
    return RigidMotion.from_matrix(np.array(values).reshape(4, 4))
