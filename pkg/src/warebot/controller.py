"""Two-phase waypoint tracking along a planned grid path.

Far from the active waypoint the robot drives at constant speed straight at
the cell centre while correcting heading; inside the arrival circle it
stops, rotates until the bearing error to the next waypoint is inside the
tolerance band, then drives on. The final waypoint's circle is terminal.
"""

import enum
import math
from dataclasses import dataclass

from .geometry import wrap_angle
from .kinematics import BodyVelocity, RobotPose, bearing, world_to_body
from .planner import PlannedPath


class Phase(enum.Enum):
    FAR = "FAR"
    ALIGNING = "ALIGNING"
    DONE = "DONE"


@dataclass(frozen=True)
class ControllerConfig:
    speed_gain: float = 0.05        # commanded speed magnitude, units/s
    heading_gain: float = 1.5       # rad/s per rad of heading error
    arrival_radius: float = 0.01    # waypoint circle, map units
    heading_tolerance: float = 0.1  # rad band that ends the aligning phase

    def __post_init__(self):
        if min(self.speed_gain, self.heading_gain, self.arrival_radius,
               self.heading_tolerance) <= 0:
            raise ValueError("controller gains must be positive")
        if self.heading_tolerance >= math.pi / 2:
            raise ValueError("heading tolerance must stay below pi/2")


@dataclass(frozen=True)
class TrackingStatus:
    phase: Phase = Phase.FAR
    waypoint_index: int = 0
    error: tuple = (0.0, 0.0, 0.0)  # (e_x, e_z, e_theta) to the active waypoint


def grid_center(cell, cell_size_h: float, cell_size_v: float):
    """Centre of a signed grid cell in map units."""
    h, v = cell
    return ((h + 0.5) * cell_size_h, (v + 0.5) * cell_size_v)


def waypoint_reached(pose: RobotPose, center, arrival_radius: float) -> bool:
    """Inside the waypoint circle, boundary inclusive."""
    if arrival_radius <= 0:
        raise ValueError("arrival radius must be positive")
    return math.hypot(center[0] - pose.x, center[1] - pose.z) <= arrival_radius


_STOP = BodyVelocity(0.0, 0.0, 0.0)


def control_step(pose: RobotPose, path: PlannedPath, status: TrackingStatus,
                 cfg: ControllerConfig, cell_size_h: float, cell_size_v: float):
    """One control tick: body-velocity command plus the updated status.

    Phase transitions resolve within the tick, so entering a waypoint
    circle immediately yields the aligning command (or DONE on the last
    waypoint), and a finished alignment yields the drive command toward the
    next cell.
    """
    if not path.cells:
        raise ValueError("path is empty")
    if not all(math.isfinite(f) for f in (pose.x, pose.z, pose.theta)):
        raise ValueError("pose estimate is not finite")
    if status.waypoint_index >= len(path.cells):
        raise ValueError("waypoint index beyond path end")

    phase = status.phase
    idx = status.waypoint_index
    while True:
        if phase is Phase.DONE:
            return _STOP, TrackingStatus(Phase.DONE, idx, status.error)

        target = grid_center(path.cells[idx], cell_size_h, cell_size_v)
        ex = target[0] - pose.x
        ez = target[1] - pose.z
        dist = math.hypot(ex, ez)

        if phase is Phase.FAR:
            if dist <= cfg.arrival_radius:
                if idx == len(path.cells) - 1:
                    phase = Phase.DONE
                    continue
                phase = Phase.ALIGNING
                continue
            e_theta = wrap_angle(bearing(ex, ez) - pose.theta)
            ux, uz = ex / dist, ez / dist
            bx, bz = world_to_body(cfg.speed_gain * ux, cfg.speed_gain * uz,
                                   pose.theta)
            cmd = BodyVelocity(bx, bz, cfg.heading_gain * e_theta)
            return cmd, TrackingStatus(Phase.FAR, idx, (ex, ez, e_theta))

        # ALIGNING: rotate in place toward the next waypoint
        nxt = grid_center(path.cells[idx + 1], cell_size_h, cell_size_v)
        e_theta = wrap_angle(bearing(nxt[0] - pose.x, nxt[1] - pose.z) - pose.theta)
        if abs(e_theta) <= cfg.heading_tolerance:
            idx += 1
            phase = Phase.FAR
            continue
        cmd = BodyVelocity(0.0, 0.0, cfg.heading_gain * e_theta)
        return cmd, TrackingStatus(Phase.ALIGNING, idx, (ex, ez, e_theta))
