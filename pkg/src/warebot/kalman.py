"""Linear Kalman filter over the planar robot state.

State vector: [x, x_dot, z, z_dot, theta, theta_dot]. Constant-velocity
transition per axis; white acceleration drives the process noise. The full
state is observed directly (identity observation): position and heading
from the visual localisation, velocities from wheel odometry. Noise
matrices are named by role (process vs measurement) throughout.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .geometry import wrap_angle

STATE_DIM = 6
THETA_INDEX = 4

# Yaw-channel measurement covariance identified from logged sensor data
# (heading, heading-rate), used as the default yaw block.
DEFAULT_YAW_MEASUREMENT_COV = np.array([
    [1023.684, 0.221],
    [0.221, 25.228],
])


@dataclass
class FilterState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(STATE_DIM)
        cov = np.asarray(self.covariance, dtype=float).reshape(STATE_DIM, STATE_DIM)
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("filter state must be finite")
        if np.max(np.abs(cov - cov.T)) > 1e-9:
            raise ValueError("covariance must be symmetric")
        if np.min(np.linalg.eigvalsh(cov)) < -1e-9:
            raise ValueError("covariance must be positive semi-definite")
        self.mean = mean
        self.covariance = cov


def transition_matrix(sample_interval: float) -> np.ndarray:
    """Block-diagonal constant-velocity transition."""
    if sample_interval <= 0:
        raise ValueError("sample interval must be positive")
    block = np.array([[1.0, sample_interval], [0.0, 1.0]])
    out = np.zeros((STATE_DIM, STATE_DIM))
    for i in range(3):
        out[2 * i:2 * i + 2, 2 * i:2 * i + 2] = block
    return out


def process_noise(sample_interval: float, accel_std_x: float, accel_std_z: float,
                  accel_std_theta: float) -> np.ndarray:
    """White-acceleration process covariance, one 2x2 block per axis.

    Each block is the outer product of (T^2/2, T) scaled by the squared
    acceleration noise of its axis.
    """
    if sample_interval <= 0:
        raise ValueError("sample interval must be positive")
    if min(accel_std_x, accel_std_z, accel_std_theta) <= 0:
        raise ValueError("acceleration noise levels must be positive")
    T = sample_interval
    coupling = np.array([0.5 * T * T, T])
    block = np.outer(coupling, coupling)
    out = np.zeros((STATE_DIM, STATE_DIM))
    for i, k in enumerate((accel_std_x, accel_std_z, accel_std_theta)):
        out[2 * i:2 * i + 2, 2 * i:2 * i + 2] = k * k * block
    return out


def kf_predict(state: FilterState, transition: np.ndarray,
               process_cov: np.ndarray) -> FilterState:
    """Push the state through the motion model and inflate the covariance."""
    mean = transition @ state.mean
    cov = transition @ state.covariance @ transition.T + process_cov
    return FilterState(mean, (cov + cov.T) / 2.0)


def kf_update(state: FilterState, measurement,
              measurement_cov: np.ndarray) -> FilterState:
    """Fuse a full-state measurement into the predicted state.

    The heading component of the innovation is wrapped to (-pi, pi] before
    the gain is applied, so measurements across the branch cut pull the
    estimate the short way around.
    """
    z = np.asarray(measurement, dtype=float).reshape(STATE_DIM)
    cov = state.covariance
    innovation_cov = cov + np.asarray(measurement_cov, dtype=float)
    try:
        # gain = cov @ inv(innovation_cov), via a solve on the transpose
        gain = np.linalg.solve(innovation_cov.T, cov.T).T
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular innovation covariance") from exc
    innovation = z - state.mean
    innovation[THETA_INDEX] = wrap_angle(innovation[THETA_INDEX])
    mean = state.mean + gain @ innovation
    posterior = (np.eye(STATE_DIM) - gain) @ cov
    return FilterState(mean, (posterior + posterior.T) / 2.0)


def estimate_measurement_covariance(samples) -> np.ndarray:
    """Unbiased sample covariance of measurement channels (rows = samples)."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] < 2:
        raise ValueError("need at least two samples")
    out = np.cov(arr, rowvar=False, ddof=1)
    return np.atleast_2d(out)


def mask_measurement_cov(measurement_cov: np.ndarray, missing_channels,
                         inflation: float = 1e12) -> np.ndarray:
    """Soft-mask channels absent in a tick by inflating their variance."""
    out = np.asarray(measurement_cov, dtype=float).copy()
    for idx in missing_channels:
        out[idx, idx] = inflation
    return out


def write_filter_trace(fh, records) -> None:
    """CSV trace: t, mean, covariance diagonal, measurement, per tick."""
    writer = csv.writer(fh)
    writer.writerow(
        ["t"]
        + [f"mu{i}" for i in range(STATE_DIM)]
        + [f"sigma{i}" for i in range(STATE_DIM)]
        + [f"z{i}" for i in range(STATE_DIM)]
    )
    for t, state, z in records:
        writer.writerow(
            [f"{t:.6f}"]
            + [f"{m:.9g}" for m in state.mean]
            + [f"{s:.9g}" for s in np.diag(state.covariance)]
            + [f"{v:.9g}" for v in np.asarray(z).reshape(STATE_DIM)]
        )
