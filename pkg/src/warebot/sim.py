"""Closed-loop kinematic simulation of the navigation stack.

One episode plans a path on an occupancy map, then ticks at the camera rate:
noisy pose and wheel measurements feed the Kalman filter, the tracking
controller turns the estimate into a body-velocity command, and the world
integrates the command (with actuation noise) forward. The log records the
desired position on the path against the true position for the tracking
error metrics.
"""

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .controller import (
    ControllerConfig,
    Phase,
    TrackingStatus,
    control_step,
    grid_center,
)
from .geometry import wrap_angle
from .kalman import (
    FilterState,
    kf_predict,
    kf_update,
    process_noise,
    transition_matrix,
)
from .kinematics import (
    BodyVelocity,
    RobotPose,
    body_to_world,
    body_velocity_from_wheels,
    kinematic_matrix,
    wheel_speeds,
)
from .mapping import OccupancyGridMap, inflate_obstacles, load_map
from .planner import astar_search
from .scenes import generate_synthetic_scene  # noqa: F401  (harness surface)


class EpisodeTimeoutError(RuntimeError):
    """Tick budget exhausted before the controller reached DONE."""

    def __init__(self, message, log):
        super().__init__(message)
        self.log = log


@dataclass(frozen=True)
class SimNoise:
    """Default levels are tuning choices: strong enough that the filter has
    visible work to do, small enough that tracking stays inside the error
    budget of the closed-loop checks."""

    pose_xy: float = 0.01       # visual position noise, map units
    pose_theta: float = 0.02    # visual heading noise, rad
    wheel: float = 0.01         # per-wheel rim-speed noise
    actuation: float = 0.01     # executed body-velocity noise

    def __post_init__(self):
        if min(self.pose_xy, self.pose_theta, self.wheel, self.actuation) < 0:
            raise ValueError("noise levels must be non-negative")

    @classmethod
    def off(cls):
        return cls(0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1.0 / 60.0
    wheel_rate: float = 1000.0      # encoder sampling rate, Hz
    tick_budget: int = 20000
    wheel_arm: float = 0.1          # wheel-centre radius of the platform
    accel_noise: tuple = (2.0, 2.0, 10.0)   # filter process noise (x, z, theta)
    noise: SimNoise = field(default_factory=SimNoise)
    controller: ControllerConfig | None = None  # None: derive radius from map
    scale_h: float = 0.2921         # map units per metre, horizontal
    scale_v: float = 0.2628         # map units per metre, vertical
    obstacle_inflation_cells: int = 0   # optional footprint margin for planning
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0 or self.wheel_rate <= 0 or self.tick_budget < 1:
            raise ValueError("invalid simulation timing")
        if self.obstacle_inflation_cells < 0:
            raise ValueError("inflation radius must be non-negative")


@dataclass(frozen=True)
class SimWorld:
    """Ground truth: the robot pose plus the integration step."""

    pose: RobotPose
    dt: float


def step_world(world: SimWorld, cmd: BodyVelocity, noise: SimNoise | None = None,
               rng: np.random.Generator | None = None):
    """Integrate one tick; actuation noise perturbs the command first.

    Returns the new world and the body velocity actually executed.
    """
    executed = cmd
    if noise is not None and noise.actuation > 0:
        if rng is None:
            raise ValueError("noisy stepping needs a random generator")
        jitter = rng.normal(scale=noise.actuation, size=3)
        executed = BodyVelocity(cmd.vx + jitter[0], cmd.vz + jitter[1],
                                cmd.omega + jitter[2])
    pose = world.pose
    wx, wz = body_to_world(executed.vx, executed.vz, pose.theta)
    new_pose = RobotPose(
        pose.x + wx * world.dt,
        pose.z + wz * world.dt,
        wrap_angle(pose.theta + executed.omega * world.dt),
    )
    return SimWorld(new_pose, world.dt), executed


def calibrate_scale(pairs) -> float:
    """Least-squares slope through the origin of measured vs real distance.

    ``pairs`` holds (real_distance_m, measured_map_distance) tuples from
    straight axis runs; the slope is the map-units-per-metre factor.
    """
    arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if len(arr) < 1:
        raise ValueError("need at least one calibration pair")
    real, measured = arr[:, 0], arr[:, 1]
    denom = float(np.sum(real * real))
    if denom <= 0:
        raise ValueError("calibration requires non-zero commanded distances")
    return float(np.sum(measured * real) / denom)


@dataclass
class TickRecord:
    t: float
    x_e: float
    z_e: float
    x_r: float          # true position (the simulator's ground truth)
    z_r: float
    theta: float        # true heading
    est_x: float
    est_z: float
    est_theta: float
    phase: str
    waypoint: int
    cmd_vx: float
    cmd_vz: float
    cmd_w: float


@dataclass
class EpisodeLog:
    records: list
    cell_size_h: float = 1.0
    cell_size_v: float = 1.0
    outcome: str = "done"

    def __post_init__(self):
        times = [r.t for r in self.records]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self):
        return len(self.records)


EPISODE_CSV_COLUMNS = [
    "t", "phase", "waypoint", "x_e", "z_e", "x_r", "z_r", "theta",
    "cmd_vx", "cmd_vz", "cmd_w", "est_x", "est_z", "est_theta",
]


def write_episode_csv(fh, log: EpisodeLog) -> None:
    writer = csv.writer(fh)
    writer.writerow(EPISODE_CSV_COLUMNS)
    for r in log.records:
        writer.writerow([
            f"{r.t:.9g}", r.phase, r.waypoint,
            f"{r.x_e:.12g}", f"{r.z_e:.12g}", f"{r.x_r:.12g}", f"{r.z_r:.12g}",
            f"{r.theta:.12g}", f"{r.cmd_vx:.12g}", f"{r.cmd_vz:.12g}",
            f"{r.cmd_w:.12g}", f"{r.est_x:.12g}", f"{r.est_z:.12g}",
            f"{r.est_theta:.12g}",
        ])


def read_episode_csv(fh) -> EpisodeLog:
    reader = csv.DictReader(fh)
    records = []
    for row in reader:
        records.append(TickRecord(
            t=float(row["t"]), x_e=float(row["x_e"]), z_e=float(row["z_e"]),
            x_r=float(row["x_r"]), z_r=float(row["z_r"]), theta=float(row["theta"]),
            est_x=float(row["est_x"]), est_z=float(row["est_z"]),
            est_theta=float(row["est_theta"]), phase=row["phase"],
            waypoint=int(row["waypoint"]), cmd_vx=float(row["cmd_vx"]),
            cmd_vz=float(row["cmd_vz"]), cmd_w=float(row["cmd_w"]),
        ))
    return EpisodeLog(records)


def rmse(log: EpisodeLog):
    """Root-mean-square tracking errors: per axis plus the combined track.

    The track value satisfies track^2 = x^2 + z^2 exactly (same samples).
    """
    if len(log) == 0:
        raise ValueError("episode log is empty")
    dx = np.array([r.x_r - r.x_e for r in log.records])
    dz = np.array([r.z_r - r.z_e for r in log.records])
    mx = float(np.mean(dx * dx))
    mz = float(np.mean(dz * dz))
    return math.sqrt(mx), math.sqrt(mz), math.sqrt(mx + mz)


def rmse_metric(log: EpisodeLog, scale_h: float, scale_v: float):
    """RMSE converted to metres: x by the horizontal scale, z by the vertical."""
    rx, rz, _ = rmse(log)
    mx, mz = rx / scale_h, rz / scale_v
    return mx, mz, math.hypot(mx, mz)


def closest_point_on_path(point, centers: np.ndarray):
    """Nearest point on the waypoint polyline to the query point."""
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    p = np.asarray(point, dtype=float)
    if len(centers) == 1:
        return centers[0].copy()
    a = centers[:-1]
    b = centers[1:]
    ab = b - a
    denom = np.sum(ab * ab, axis=1)
    denom[denom == 0] = 1.0
    t = np.clip(np.sum((p - a) * ab, axis=1) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    dist2 = np.sum((proj - p) ** 2, axis=1)
    return proj[int(np.argmin(dist2))]


def default_measurement_cov(cfg: SimConfig) -> np.ndarray:
    """Measurement covariance matched to the configured sensor noise.

    Wheel noise propagates through the inverse kinematic matrix and the
    per-tick encoder averaging; the planar velocity channels use the
    rotation-averaged variance.
    """
    m = max(1, int(round(cfg.dt * cfg.wheel_rate)))
    M_inv = np.linalg.inv(kinematic_matrix(cfg.wheel_arm))
    body_cov = (cfg.noise.wheel ** 2 / m) * (M_inv @ M_inv.T)
    vel_var = float(body_cov[0, 0] + body_cov[1, 1]) / 2.0
    omega_var = float(body_cov[2, 2])
    floor = 1e-12  # keeps the innovation covariance invertible when noise is off
    return np.diag([
        max(cfg.noise.pose_xy ** 2, floor), max(vel_var, floor),
        max(cfg.noise.pose_xy ** 2, floor), max(vel_var, floor),
        max(cfg.noise.pose_theta ** 2, floor), max(omega_var, floor),
    ])


def controller_for_map(ogm: OccupancyGridMap,
                       base: ControllerConfig | None = None) -> ControllerConfig:
    """Derive the arrival radius from the cell size (half the smaller side)."""
    radius = 0.5 * min(ogm.cell_size_h, ogm.cell_size_v)
    if base is None:
        return ControllerConfig(arrival_radius=radius)
    return replace(base, arrival_radius=radius)


def _simulate_wheel_measurement(executed: BodyVelocity, cfg: SimConfig,
                                rng: np.random.Generator) -> BodyVelocity:
    """Encoder readback: per-wheel noise at the encoder rate, averaged."""
    if cfg.noise.wheel == 0:
        return executed
    m = max(1, int(round(cfg.dt * cfg.wheel_rate)))
    w = wheel_speeds(executed, cfg.wheel_arm)
    noise = rng.normal(scale=cfg.noise.wheel, size=(m, 3)).mean(axis=0)
    return body_velocity_from_wheels(
        type(w)(w.v1 + noise[0], w.v2 + noise[1], w.v3 + noise[2]),
        cfg.wheel_arm)


def sim_config_from_dict(data: dict) -> SimConfig:
    """Build a SimConfig from a parsed JSON config file."""
    kwargs = dict(data)
    if "noise" in kwargs and kwargs["noise"] is not None:
        kwargs["noise"] = SimNoise(**kwargs["noise"])
    if "controller" in kwargs and kwargs["controller"] is not None:
        kwargs["controller"] = ControllerConfig(**kwargs["controller"])
    if "accel_noise" in kwargs:
        kwargs["accel_noise"] = tuple(kwargs["accel_noise"])
    return SimConfig(**kwargs)


class ClosedLoop:
    """Sequential sense -> filter -> control -> integrate loop.

    Owns the ground-truth world, the Kalman filter and the tracking status;
    a path may be attached and replaced between ticks, so the same loop
    drives offline episodes and the live operator service.
    """

    def __init__(self, ogm: OccupancyGridMap, cfg: SimConfig, start_cell):
        self.ogm = inflate_obstacles(ogm, cfg.obstacle_inflation_cells)
        self.cfg = cfg
        self.controller_cfg = cfg.controller or controller_for_map(ogm)
        self.rng = np.random.default_rng(cfg.seed)
        start_xy = grid_center(tuple(start_cell), ogm.cell_size_h, ogm.cell_size_v)
        self.world = SimWorld(RobotPose(start_xy[0], start_xy[1], 0.0), cfg.dt)
        self._transition = transition_matrix(cfg.dt)
        self._process_cov = process_noise(cfg.dt, *cfg.accel_noise)
        self._measurement_cov = default_measurement_cov(cfg)
        init_cov = np.diag([
            max(cfg.noise.pose_xy ** 2, 1e-8), 1e-4,
            max(cfg.noise.pose_xy ** 2, 1e-8), 1e-4,
            max(cfg.noise.pose_theta ** 2, 1e-8), 1e-4,
        ])
        self.state = FilterState(
            np.array([start_xy[0], 0.0, start_xy[1], 0.0, 0.0, 0.0]), init_cov)
        self.executed = BodyVelocity(0.0, 0.0, 0.0)
        self.tick_index = 0
        self.path = None
        self.status = None
        self._centers = None
        self.filter_trace = None    # optional list of (t, FilterState, z)

    @property
    def t(self) -> float:
        return self.tick_index * self.cfg.dt

    def estimated_pose(self) -> RobotPose:
        return RobotPose(self.state.mean[0], self.state.mean[2], self.state.mean[4])

    def estimated_cell(self):
        pose = self.estimated_pose()
        return (int(math.floor(pose.x / self.ogm.cell_size_h)),
                int(math.floor(pose.z / self.ogm.cell_size_v)))

    def plan_to(self, goal_cell, start_cell=None):
        """Plan from the given (or currently estimated) cell and track it."""
        start = tuple(start_cell) if start_cell is not None else self.estimated_cell()
        path = astar_search(start, tuple(goal_cell), self.ogm)
        self.path = path
        self.status = TrackingStatus()
        self._centers = np.array([
            grid_center(c, self.ogm.cell_size_h, self.ogm.cell_size_v)
            for c in path.cells])
        return path

    def clear_path(self):
        self.path = None
        self.status = None
        self._centers = None

    def tick(self) -> TickRecord:
        """One control period; with no path attached the robot idles."""
        cfg = self.cfg
        truth = self.world.pose
        rng = self.rng

        # vision measurement: position plus heading
        mx = truth.x + (rng.normal(scale=cfg.noise.pose_xy) if cfg.noise.pose_xy else 0.0)
        mz = truth.z + (rng.normal(scale=cfg.noise.pose_xy) if cfg.noise.pose_xy else 0.0)
        mtheta = wrap_angle(
            truth.theta
            + (rng.normal(scale=cfg.noise.pose_theta) if cfg.noise.pose_theta else 0.0))

        # wheel odometry of the previous interval, rotated into the world
        # frame with the measured heading
        wheel_meas = _simulate_wheel_measurement(self.executed, cfg, rng)
        wvx, wvz = body_to_world(wheel_meas.vx, wheel_meas.vz, mtheta)
        z = np.array([mx, wvx, mz, wvz, mtheta, wheel_meas.omega])

        self.state = kf_predict(self.state, self._transition, self._process_cov)
        self.state = kf_update(self.state, z, self._measurement_cov)
        if self.filter_trace is not None:
            self.filter_trace.append((self.t, self.state, z))
        est = self.estimated_pose()

        if self.path is not None:
            cmd, self.status = control_step(est, self.path, self.status,
                                            self.controller_cfg,
                                            self.ogm.cell_size_h,
                                            self.ogm.cell_size_v)
            expected = closest_point_on_path((truth.x, truth.z), self._centers)
            phase = self.status.phase.value
            waypoint = self.status.waypoint_index
        else:
            cmd = BodyVelocity(0.0, 0.0, 0.0)
            expected = np.array([math.nan, math.nan])
            phase = "IDLE"
            waypoint = -1

        record = TickRecord(
            t=self.t, x_e=float(expected[0]), z_e=float(expected[1]),
            x_r=truth.x, z_r=truth.z, theta=truth.theta,
            est_x=est.x, est_z=est.z, est_theta=est.theta,
            phase=phase, waypoint=waypoint,
            cmd_vx=cmd.vx, cmd_vz=cmd.vz, cmd_w=cmd.omega,
        )
        self.tick_index += 1
        if phase != Phase.DONE.value:
            self.world, self.executed = step_world(self.world, cmd, cfg.noise, rng)
        return record


def run_episode(ogm, start_cell, goal_cell, cfg: SimConfig | None = None,
                filter_trace: list | None = None) -> EpisodeLog:
    """Plan, then track the path closed-loop until DONE or the tick budget.

    ``ogm`` may be an OccupancyGridMap or a map file path. Raises
    EpisodeTimeoutError (carrying the partial log) when the budget runs out
    and propagates planner errors for unreachable goals. Pass a list as
    ``filter_trace`` to collect (t, FilterState, measurement) tuples.
    """
    if not isinstance(ogm, OccupancyGridMap):
        ogm = load_map(Path(ogm))
    cfg = cfg or SimConfig()
    loop = ClosedLoop(ogm, cfg, start_cell)
    loop.filter_trace = filter_trace
    loop.plan_to(goal_cell, start_cell=start_cell)
    records = []
    for _ in range(cfg.tick_budget):
        record = loop.tick()
        records.append(record)
        if record.phase == Phase.DONE.value:
            return EpisodeLog(records, ogm.cell_size_h, ogm.cell_size_v, "done")
    raise EpisodeTimeoutError(
        f"no DONE within {cfg.tick_budget} ticks",
        EpisodeLog(records, ogm.cell_size_h, ogm.cell_size_v, "timeout"))
