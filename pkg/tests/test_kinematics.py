import math

import numpy as np
import pytest

from warebot.geometry import SE3Transform, exp_twist, transform_point, wrap_angle
from warebot.kinematics import (
    BodyVelocity,
    RobotPose,
    WheelSpeeds,
    bearing,
    body_to_world,
    body_velocity_from_wheels,
    kinematic_matrix,
    robot_pose_from_transforms,
    wheel_speeds,
    world_to_body,
)


def test_pure_rotation_drives_all_wheels_equally():
    w = wheel_speeds(BodyVelocity(0.0, 0.0, 2.0), 0.1)
    assert w.v1 == pytest.approx(0.2)
    assert w.v2 == pytest.approx(0.2)
    assert w.v3 == pytest.approx(0.2)


def test_unit_x_velocity_hand_multiply():
    w = wheel_speeds(BodyVelocity(1.0, 0.0, 0.0), 0.1)
    assert w.v1 == pytest.approx(-0.5)
    assert w.v2 == pytest.approx(-0.5)
    assert w.v3 == pytest.approx(1.0)


def test_zero_in_zero_out():
    w = wheel_speeds(BodyVelocity(0.0, 0.0, 0.0), 0.1)
    assert (w.v1, w.v2, w.v3) == (0.0, 0.0, 0.0)
    v = body_velocity_from_wheels(WheelSpeeds(0.0, 0.0, 0.0), 0.1)
    assert (v.vx, v.vz, v.omega) == (0.0, 0.0, 0.0)


def test_wheels_to_body_pure_rotation():
    v = body_velocity_from_wheels(WheelSpeeds(0.3, 0.3, 0.3), 0.1)
    assert v.vx == pytest.approx(0.0, abs=1e-12)
    assert v.vz == pytest.approx(0.0, abs=1e-12)
    assert v.omega == pytest.approx(3.0, abs=1e-12)


def test_kinematics_round_trip(rng):
    for _ in range(100):
        L = float(rng.uniform(0.02, 0.5))
        v = BodyVelocity(*rng.uniform(-2, 2, size=3))
        back = body_velocity_from_wheels(wheel_speeds(v, L), L)
        assert back.vx == pytest.approx(v.vx, abs=1e-12)
        assert back.vz == pytest.approx(v.vz, abs=1e-12)
        assert back.omega == pytest.approx(v.omega, abs=1e-12)
        w = WheelSpeeds(*rng.uniform(-2, 2, size=3))
        back_w = wheel_speeds(body_velocity_from_wheels(w, L), L)
        assert back_w.v1 == pytest.approx(w.v1, abs=1e-12)
        assert back_w.v2 == pytest.approx(w.v2, abs=1e-12)
        assert back_w.v3 == pytest.approx(w.v3, abs=1e-12)


def test_matrix_full_rank_for_any_positive_arm(rng):
    for L in rng.uniform(1e-3, 10.0, size=20):
        assert np.linalg.matrix_rank(kinematic_matrix(float(L))) == 3


def test_matrix_rejects_bad_arm():
    with pytest.raises(ValueError):
        kinematic_matrix(0.0)


# ------------------------------------------------------------------- pose

def test_pose_identity_chain():
    pose = robot_pose_from_transforms([], SE3Transform.identity())
    assert (pose.x, pose.z, pose.theta) == (0.0, 0.0, 0.0)


def test_pose_forward_translation():
    # camera moved forward: current-frame transform translates by -1 along z
    T = SE3Transform(translation=[0.0, 0.0, -1.0])
    pose = robot_pose_from_transforms([], T)
    assert pose.x == pytest.approx(0.0, abs=1e-12)
    assert pose.z == pytest.approx(1.0, abs=1e-12)
    assert pose.theta == pytest.approx(0.0, abs=1e-12)


def test_pose_quarter_turn_sign_matches_axis_oracle():
    T = exp_twist([0, 0, 0, 0, np.pi / 2, 0])
    pose = robot_pose_from_transforms([T], SE3Transform.identity())
    from warebot.geometry import invert
    axis = transform_point(invert(T), [0, 0, 1]) - transform_point(invert(T), [0, 0, 0])
    expected = math.atan2(axis[0], axis[2])
    assert pose.theta == pytest.approx(expected, abs=1e-12)
    assert abs(pose.theta) == pytest.approx(np.pi / 2, abs=1e-12)


def test_pose_position_matches_matrix_oracle(rng):
    from warebot.geometry import compose, invert
    from conftest import random_twist
    chain = [exp_twist(random_twist(rng, max_angle=0.8)) for _ in range(4)]
    current = exp_twist(random_twist(rng, max_angle=0.8))
    full = SE3Transform.identity()
    for T in chain:
        full = compose(full, invert(T))
    full = compose(full, invert(current))
    origin = transform_point(full, [0.0, 0.0, 0.0])
    pose = robot_pose_from_transforms(chain, current)
    assert pose.x == pytest.approx(origin[0], abs=1e-12)
    assert pose.z == pytest.approx(origin[2], abs=1e-12)


def test_heading_rotation_equivariance(rng):
    base_chain = [exp_twist([0.1, 0.0, 0.2, 0.0, 0.3, 0.0])]
    current = SE3Transform.identity()
    theta0 = robot_pose_from_transforms(base_chain, current).theta
    for alpha in rng.uniform(-np.pi + 0.1, np.pi - 0.1, size=10):
        spin = exp_twist([0, 0, 0, 0, -float(alpha), 0])
        theta1 = robot_pose_from_transforms([spin] + base_chain, current).theta
        assert wrap_angle(theta1 - theta0 - alpha) == pytest.approx(0.0, abs=1e-9)


def test_degenerate_heading_rejected():
    # quarter turn about x points the optical axis straight out of the plane
    T = exp_twist([0, 0, 0, np.pi / 2, 0, 0])
    with pytest.raises(ValueError):
        robot_pose_from_transforms([], T)


def test_pose_theta_normalized():
    pose = RobotPose(0.0, 0.0, 3 * np.pi)
    assert pose.theta == pytest.approx(np.pi)


# ------------------------------------------------------------ plane frames

def test_bearing_convention():
    assert bearing(0.0, 1.0) == pytest.approx(0.0)
    assert bearing(1.0, 0.0) == pytest.approx(np.pi / 2)
    assert bearing(0.0, -1.0) == pytest.approx(np.pi)


def test_world_body_round_trip(rng):
    for _ in range(50):
        theta = float(rng.uniform(-np.pi, np.pi))
        dx, dz = rng.uniform(-2, 2, size=2)
        bx, bz = world_to_body(dx, dz, theta)
        wx, wz = body_to_world(bx, bz, theta)
        assert wx == pytest.approx(dx, abs=1e-12)
        assert wz == pytest.approx(dz, abs=1e-12)


def test_facing_direction_is_forward_in_body_frame(rng):
    for theta in rng.uniform(-np.pi, np.pi, size=20):
        bx, bz = world_to_body(math.sin(theta), math.cos(theta), float(theta))
        assert bx == pytest.approx(0.0, abs=1e-12)
        assert bz == pytest.approx(1.0, abs=1e-12)
