"""SE(3) rigid-body transform algebra.

Transforms carry a 3x3 rotation matrix and a 3-vector translation and act on
points as ``R @ p + t``. Twists are 6-vectors ``(tx, ty, tz, wx, wy, wz)``:
translational part first, rotational part in radians.
"""

import numpy as np

# Below this rotation angle exp/log switch to Taylor branches to avoid 0/0.
SMALL_ANGLE = 1e-8

_ORTHO_TOL = 1e-9


class SE3Transform:
    """Rigid-body pose: rotation + translation.

    Construction validates the rotation matrix (orthonormal, det +1 within
    1e-9); pass arrays that already satisfy the invariant.
    """

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation=None, translation=None):
        R = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        t = np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {R.shape}")
        if t.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got {t.shape}")
        if not np.all(np.isfinite(R)) or not np.all(np.isfinite(t)):
            raise ValueError("transform entries must be finite")
        if np.max(np.abs(R.T @ R - np.eye(3))) > _ORTHO_TOL:
            raise ValueError("rotation matrix is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation matrix determinant is not +1")
        self.rotation = R
        self.translation = t

    @classmethod
    def identity(cls):
        return cls()

    @property
    def matrix(self):
        """4x4 homogeneous matrix."""
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def __repr__(self):
        return f"SE3Transform(R={self.rotation.tolist()}, t={self.translation.tolist()})"


def _skew(v):
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def _vee(M):
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


def _rot_coefficients(theta):
    """Coefficients a, b, c of R = I + a W + b W^2 and V = I + b W + c W^2."""
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
        c = 1.0 / 6.0 - t2 / 120.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
        c = (theta - np.sin(theta)) / (theta ** 3)
    return a, b, c


def exp_twist(delta) -> SE3Transform:
    """Exponential map se(3) -> SE(3).

    Closed-form Rodrigues rotation plus the V-matrix acting on the
    translational part; Taylor branch near zero rotation.
    """
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (6,):
        raise ValueError(f"twist must be a 6-vector, got {delta.shape}")
    if not np.all(np.isfinite(delta)):
        raise ValueError("twist entries must be finite")
    rho, omega = delta[:3], delta[3:]
    theta = np.linalg.norm(omega)
    W = _skew(omega)
    W2 = W @ W
    a, b, c = _rot_coefficients(theta)
    R = np.eye(3) + a * W + b * W2
    V = np.eye(3) + b * W + c * W2
    return SE3Transform(R, V @ rho)


def log_transform(T: SE3Transform):
    """Logarithm map SE(3) -> se(3), inverse of :func:`exp_twist`.

    Raises ValueError for rotation angle at pi, where the axis sign is
    ambiguous.
    """
    R, t = T.rotation, T.translation
    cos_theta = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_theta)
    if theta > np.pi - 1e-6:
        raise ValueError("rotation angle at pi: logarithm branch is ambiguous")
    if theta < SMALL_ANGLE:
        omega = _vee(R - R.T) / 2.0
        d = 1.0 / 12.0 + theta * theta / 720.0
    else:
        omega = theta / (2.0 * np.sin(theta)) * _vee(R - R.T)
        a, b, _ = _rot_coefficients(theta)
        d = (1.0 - a / (2.0 * b)) / (theta * theta)
    W = _skew(omega)
    V_inv = np.eye(3) - 0.5 * W + d * (W @ W)
    return np.concatenate([V_inv @ t, omega])


def invert(T: SE3Transform) -> SE3Transform:
    """Inverse transform: (R, t) -> (R^T, -R^T t)."""
    Rt = T.rotation.T
    return SE3Transform(Rt, -Rt @ T.translation)


def compose(A: SE3Transform, B: SE3Transform) -> SE3Transform:
    """Composition applying B first, then A: (A*B) p = A (B p)."""
    return SE3Transform(A.rotation @ B.rotation,
                        A.rotation @ B.translation + A.translation)


def transform_point(T: SE3Transform, point):
    """Apply the transform to one point or to an (N, 3) stack of points."""
    p = np.asarray(point, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    if p.ndim == 1:
        return T.rotation @ p + T.translation
    return p @ T.rotation.T + T.translation


def transform_direction(T: SE3Transform, direction):
    """Rotate a direction vector (translation does not apply)."""
    return T.rotation @ np.asarray(direction, dtype=float)


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    wrapped = (theta + np.pi) % (2.0 * np.pi) - np.pi
    if wrapped <= -np.pi:
        wrapped += 2.0 * np.pi
    return float(wrapped)
