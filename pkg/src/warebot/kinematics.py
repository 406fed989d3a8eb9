"""Three-wheeled omnidirectional kinematics and planar pose extraction.

Wheels sit at 120 degrees on a disc of radius L; body velocity (vx, vz,
omega) maps to signed wheel rim speeds through a fixed 3x3 matrix, which is
invertible for any positive L, giving velocity feedback from encoders.

Heading convention: theta = 0 faces the +z (optical) axis, theta grows
counterclockwise toward +x, normalized to (-pi, pi].
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SE3Transform, compose, invert, wrap_angle


@dataclass(frozen=True)
class BodyVelocity:
    vx: float      # m/s across the robot plane
    vz: float      # m/s along the forward axis
    omega: float   # rad/s, counterclockwise positive

    def __post_init__(self):
        if not all(math.isfinite(f) for f in (self.vx, self.vz, self.omega)):
            raise ValueError("body velocity must be finite")


@dataclass(frozen=True)
class WheelSpeeds:
    v1: float
    v2: float
    v3: float

    def __post_init__(self):
        if not all(math.isfinite(f) for f in (self.v1, self.v2, self.v3)):
            raise ValueError("wheel speeds must be finite")


@dataclass(frozen=True)
class RobotPose:
    x: float
    z: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))


def kinematic_matrix(wheel_radius_arm: float) -> np.ndarray:
    """Body velocity to wheel rim speeds; rows are the three wheels."""
    if wheel_radius_arm <= 0:
        raise ValueError("wheel arm radius must be positive")
    L = wheel_radius_arm
    return np.array([
        [-0.5, math.sqrt(3.0) / 2.0, L],
        [-0.5, -math.sqrt(3.0) / 2.0, L],
        [1.0, 0.0, L],
    ])


def wheel_speeds(v: BodyVelocity, wheel_radius_arm: float) -> WheelSpeeds:
    """Signed rim speeds driving the commanded body velocity."""
    out = kinematic_matrix(wheel_radius_arm) @ [v.vx, v.vz, v.omega]
    return WheelSpeeds(float(out[0]), float(out[1]), float(out[2]))


def body_velocity_from_wheels(w: WheelSpeeds, wheel_radius_arm: float) -> BodyVelocity:
    """Velocity feedback: exact inverse of :func:`wheel_speeds`."""
    M_inv = np.linalg.inv(kinematic_matrix(wheel_radius_arm))
    out = M_inv @ [w.v1, w.v2, w.v3]
    return BodyVelocity(float(out[0]), float(out[1]), float(out[2]))


def robot_pose_from_transforms(chain_transforms, current: SE3Transform) -> RobotPose:
    """Planar pose from the keyframe chain and the current-frame transform.

    The camera origin is pushed through the chained inverse transforms; the
    heading comes from the rotated optical axis projected onto the motion
    plane (two-argument arctangent, so the full (-pi, pi] range is
    reachable).
    """
    full = SE3Transform.identity()
    for T in chain_transforms:
        full = compose(full, invert(T))
    full = compose(full, invert(current))
    position = full.translation
    axis = full.rotation @ np.array([0.0, 0.0, 1.0])
    planar = math.hypot(axis[0], axis[2])
    if planar < 1e-9:
        raise ValueError("optical axis is perpendicular to the motion plane")
    theta = math.atan2(axis[0], axis[2])
    return RobotPose(x=float(position[0]), z=float(position[2]), theta=theta)


def bearing(dx: float, dz: float) -> float:
    """Heading of a planar direction under the +z = 0 convention."""
    return math.atan2(dx, dz)


def world_to_body(dx: float, dz: float, theta: float):
    """Rotate a planar world vector into the robot frame."""
    c, s = math.cos(theta), math.sin(theta)
    return (c * dx - s * dz, s * dx + c * dz)


def body_to_world(bx: float, bz: float, theta: float):
    """Rotate a planar robot-frame vector into the world frame."""
    c, s = math.cos(theta), math.sin(theta)
    return (c * bx + s * bz, -s * bx + c * bz)
