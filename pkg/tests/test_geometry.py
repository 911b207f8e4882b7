import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from mvreg.errors import AngleAtBranchCut
from mvreg.geometry import (
    RigidMotion,
    Twist,
    cev,
    compose,
    exp_map,
    inverse,
    log_map,
    read_transform,
    rotation_angle,
    vec,
    write_transform,
)


def rot_z(deg: float) -> np.ndarray:
    a = math.radians(deg)
    return np.array([
        [math.cos(a), -math.sin(a), 0.0],
        [math.sin(a), math.cos(a), 0.0],
        [0.0, 0.0, 1.0],
    ])


def random_motion(rng, max_angle=3.0) -> RigidMotion:
    w = rng.normal(size=3)
    w *= rng.uniform(0.0, max_angle) / np.linalg.norm(w)
    return RigidMotion(Rotation.from_rotvec(w).as_matrix(), rng.normal(size=3))


def motions_close(a: RigidMotion, b: RigidMotion, tol=1e-9) -> bool:
    return (np.abs(a.rotation - b.rotation).max() < tol
            and np.abs(a.translation - b.translation).max() < tol)


class TestCompose:
    def test_identity(self):
        eye = RigidMotion.identity()
        assert motions_close(compose(eye, eye), eye)

    def test_inverse_law(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m = random_motion(rng)
            assert motions_close(compose(m, inverse(m)), RigidMotion.identity())
            assert motions_close(compose(inverse(m), m), RigidMotion.identity())

    def test_planar_rotation_addition(self):
        a = RigidMotion(rot_z(30.0), np.zeros(3))
        b = RigidMotion(rot_z(60.0), np.zeros(3))
        assert motions_close(compose(a, b), RigidMotion(rot_z(90.0), np.zeros(3)))

    def test_applies_b_then_a(self):
        a = RigidMotion(rot_z(90.0), np.array([1.0, 0.0, 0.0]))
        b = RigidMotion(np.eye(3), np.array([0.0, 2.0, 0.0]))
        p = np.array([1.0, 0.0, 0.0])
        assert np.allclose(compose(a, b).apply(p), a.apply(b.apply(p)))

    def test_associativity(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a, b, c = (random_motion(rng) for _ in range(3))
            left = compose(compose(a, b), c)
            right = compose(a, compose(b, c))
            assert motions_close(left, right, tol=1e-9)

    def test_long_chain_stays_orthonormal(self):
        rng = np.random.default_rng(3)
        m = RigidMotion.identity()
        for _ in range(2000):
            m = compose(m, random_motion(rng, max_angle=0.5))
        assert np.linalg.norm(m.rotation.T @ m.rotation - np.eye(3)) < 1e-9


class TestInverse:
    def test_identity(self):
        assert motions_close(inverse(RigidMotion.identity()), RigidMotion.identity())

    def test_pure_translation(self):
        m = RigidMotion(np.eye(3), np.array([1.0, 2.0, 3.0]))
        assert np.allclose(inverse(m).translation, [-1.0, -2.0, -3.0])

    def test_pure_rotation(self):
        m = RigidMotion(rot_z(90.0), np.zeros(3))
        assert motions_close(inverse(m), RigidMotion(rot_z(-90.0), np.zeros(3)))


class TestExpLog:
    def test_log_identity(self):
        tw = log_map(RigidMotion.identity())
        assert np.all(tw.omega == 0.0) and np.all(tw.nu == 0.0)

    def test_log_pure_translation(self):
        t = np.array([0.3, -0.7, 2.0])
        tw = log_map(RigidMotion(np.eye(3), t))
        assert np.allclose(tw.omega, 0.0) and np.allclose(tw.nu, t)

    def test_log_pure_rotation(self):
        theta = 0.8
        tw = log_map(RigidMotion(rot_z(math.degrees(theta)), np.zeros(3)))
        assert np.allclose(tw.omega, [0.0, 0.0, theta], atol=1e-12)
        assert np.allclose(tw.nu, 0.0, atol=1e-12)

    def test_exp_zero(self):
        assert motions_close(exp_map(Twist.zero()), RigidMotion.identity())

    def test_exp_pure_translation(self):
        t = np.array([1.0, -2.0, 0.5])
        m = exp_map(Twist(np.zeros(3), t))
        assert np.allclose(m.rotation, np.eye(3)) and np.allclose(m.translation, t)

    def test_exp_matches_independent_rotation_construction(self):
        # Rodrigues output checked against axis-angle rotations built by scipy.
        rng = np.random.default_rng(4)
        for _ in range(50):
            w = rng.normal(size=3)
            w *= 0.5 / np.linalg.norm(w)
            m = exp_map(Twist(w, np.zeros(3)))
            assert np.abs(m.rotation - Rotation.from_rotvec(w).as_matrix()).max() < 1e-12

    def test_exp_log_roundtrip_from_sampled_rotations(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            m = random_motion(rng, max_angle=0.5)
            again = exp_map(log_map(m))
            assert motions_close(m, again, tol=1e-9)

    def test_roundtrip_sweep(self):
        # 1000 random twists with |omega| <= 3.0 at 1e-8.
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(1000):
            w = rng.normal(size=3)
            w *= rng.uniform(0.0, 3.0) / np.linalg.norm(w)
            tw = Twist(w, rng.normal(size=3) * 2.0)
            back = log_map(exp_map(tw))
            worst = max(worst, np.abs(back.omega - tw.omega).max(),
                        np.abs(back.nu - tw.nu).max())
        assert worst < 1e-8

    def test_tiny_and_series_boundary_angles(self):
        rng = np.random.default_rng(7)
        for mag in (1e-13, 1e-9, 1e-6, 1e-4, 1e-3, 2e-3):
            w = rng.normal(size=3)
            w *= mag / np.linalg.norm(w)
            tw = Twist(w, rng.normal(size=3))
            back = log_map(exp_map(tw))
            assert np.abs(back.omega - tw.omega).max() < 1e-12
            assert np.abs(back.nu - tw.nu).max() < 1e-10

    def test_exp_output_orthonormal(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            w = rng.normal(size=3) * 2.0
            m = exp_map(Twist(w, rng.normal(size=3)))
            assert np.linalg.norm(m.rotation.T @ m.rotation - np.eye(3)) < 1e-12

    def test_branch_cut_rejected(self):
        near_pi = RigidMotion(rot_z(math.degrees(math.pi - 1e-7)), np.zeros(3))
        with pytest.raises(AngleAtBranchCut):
            log_map(near_pi)
        at_pi = RigidMotion(np.diag([1.0, -1.0, -1.0]), np.zeros(3))
        with pytest.raises(AngleAtBranchCut):
            log_map(at_pi)

    def test_angle_below_cut_accepted(self):
        m = RigidMotion(rot_z(math.degrees(math.pi - 1e-4)), np.zeros(3))
        assert abs(np.linalg.norm(log_map(m).omega) - (math.pi - 1e-4)) < 1e-9


class TestVecCev:
    def test_zero(self):
        assert np.all(vec(Twist.zero()) == 0.0)

    def test_packing_order(self):
        v = vec(Twist(np.array([0.0, 0.0, 0.7]), np.array([1.0, 0.0, 0.0])))
        assert np.array_equal(v, [0.0, 0.0, 0.7, 1.0, 0.0, 0.0])

    def test_exact_bijection(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            tw = Twist(rng.normal(size=3), rng.normal(size=3))
            back = cev(vec(tw))
            assert np.array_equal(back.omega, tw.omega)
            assert np.array_equal(back.nu, tw.nu)
            v = rng.normal(size=6)
            assert np.array_equal(vec(cev(v)), v)


class TestValidation:
    def test_non_orthonormal_rejected(self):
        bad = np.eye(3)
        bad[0, 0] = 1.1
        with pytest.raises(ValueError):
            RigidMotion(bad, np.zeros(3))

    def test_reflection_rejected(self):
        with pytest.raises(ValueError):
            RigidMotion(np.diag([1.0, 1.0, -1.0]), np.zeros(3))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            RigidMotion(np.eye(3), np.array([np.nan, 0.0, 0.0]))
        with pytest.raises(ValueError):
            Twist(np.array([np.inf, 0.0, 0.0]), np.zeros(3))

    def test_rotation_angle(self):
        assert rotation_angle(np.eye(3)) == 0.0
        assert abs(rotation_angle(rot_z(90.0)) - math.pi / 2) < 1e-12


class TestTransformFile:
    def test_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(10)
        for k in range(10):
            m = random_motion(rng)
            path = tmp_path / f"t{k}.txt"
            write_transform(m, path)
            back = read_transform(path)
            assert np.array_equal(back.rotation, m.rotation)
            assert np.array_equal(back.translation, m.translation)

    def test_format_is_row_major_ascii(self, tmp_path):
        m = RigidMotion(rot_z(30.0), np.array([1.5, -2.0, 0.25]))
        path = tmp_path / "t.txt"
        write_transform(m, path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 4
        grid = np.array([[float(x) for x in line.split()] for line in lines])
        assert grid.shape == (4, 4)
        assert np.allclose(grid[:3, :3], m.rotation)
        assert np.allclose(grid[:3, 3], m.translation)
        assert np.array_equal(grid[3], [0.0, 0.0, 0.0, 1.0])

    def test_bad_file_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 0 0\n0 1 0\n")
        with pytest.raises(ValueError):
            read_transform(path)
