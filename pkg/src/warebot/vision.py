"""Direct-method visual localization on grayscale frames.

Pixels with strong image gradient are selected on a keyframe, back-projected
with their inverse-depth estimates, warped into the incoming frame under a
candidate motion, and the weighted photometric error is minimised with
Levenberg-Marquardt. Inverse depths are per-pixel Gaussians fused
observation by observation until the keyframe is retired.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import SE3Transform, compose, exp_twist, invert


class NoOverlapError(RuntimeError):
    """No selected pixel lands inside the frame under the candidate motion."""


class TrackingLostError(RuntimeError):
    """Too few selected pixels remain in view to keep optimising."""


class GrayImage:
    """Grayscale image with intensities in [0, 1] and bilinear sub-pixel sampling."""

    __slots__ = ("intensities", "height", "width")

    def __init__(self, intensities):
        arr = np.asarray(intensities, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError("image must be at least 2x2")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image intensities must be finite")
        if arr.min() < -1e-9 or arr.max() > 1.0 + 1e-9:
            raise ValueError("image intensities must lie in [0, 1]")
        self.intensities = arr
        self.height, self.width = arr.shape

    def sample(self, u, v):
        """Bilinear sample at sub-pixel coordinates (u: column, v: row).

        Coordinates must lie in [0, width-1] x [0, height-1]; the caller is
        responsible for masking out-of-view points.
        """
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u0 = np.clip(np.floor(u).astype(int), 0, self.width - 2)
        v0 = np.clip(np.floor(v).astype(int), 0, self.height - 2)
        du = u - u0
        dv = v - v0
        img = self.intensities
        top = (1.0 - du) * img[v0, u0] + du * img[v0, u0 + 1]
        bot = (1.0 - du) * img[v0 + 1, u0] + du * img[v0 + 1, u0 + 1]
        return (1.0 - dv) * top + dv * bot


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class InverseDepthEstimate:
    """Gaussian inverse-depth belief for one pixel."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("inverse-depth variance must be positive")
        if self.mean <= 0:
            raise ValueError("inverse-depth mean must be positive")


@dataclass
class FrontendConfig:
    gradient_threshold: float = 0.05   # intensity per pixel
    keyframe_distance: float = 0.1     # camera-scale translation that retires a keyframe
    image_noise: float = 1e-4          # constant grayscale noise variance
    lm_max_iters: int = 50
    lm_init_lambda: float = 1e-4
    convergence_tol: float = 1e-8
    depth_init_variance: float = 1.0
    min_overlap: float = 0.25          # fraction of selected pixels that must stay in view
    depth_fd_step: float = 1e-4        # central-difference step on inverse depth

    def __post_init__(self):
        for name in ("gradient_threshold", "keyframe_distance", "image_noise",
                     "lm_init_lambda", "convergence_tol", "depth_init_variance",
                     "depth_fd_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lm_max_iters < 1:
            raise ValueError("lm_max_iters must be at least 1")


@dataclass
class KeyFrame:
    """Reference frame: image, selected pixels with inverse-depth beliefs,
    transform to its successor, and the cached pose in the world chain."""

    image: GrayImage
    pixel_u: np.ndarray
    pixel_v: np.ndarray
    depth_mean: np.ndarray
    depth_var: np.ndarray
    to_next: SE3Transform | None = None
    world_pose: SE3Transform = field(default_factory=SE3Transform.identity)

    @property
    def selected_pixels(self):
        """Selected pixels as (u, v, InverseDepthEstimate) tuples."""
        return [
            (int(u), int(v), InverseDepthEstimate(float(m), float(s2)))
            for u, v, m, s2 in zip(self.pixel_u, self.pixel_v,
                                   self.depth_mean, self.depth_var)
        ]

    def __len__(self):
        return len(self.pixel_u)


@dataclass
class TrackResult:
    twist: np.ndarray
    energies: list          # energy at init plus after every accepted step
    iterations: int         # LM iterations spent (accepted + rejected)


def gradient_magnitudes(img: GrayImage):
    """Central-difference gradient magnitude on interior pixels.

    Returns an array of shape (height-2, width-2) for pixels
    v in [1, height-2], u in [1, width-2].
    """
    i = img.intensities
    gu = (i[1:-1, 2:] - i[1:-1, :-2]) / 2.0
    gv = (i[2:, 1:-1] - i[:-2, 1:-1]) / 2.0
    return np.hypot(gu, gv)


def select_pixels(img: GrayImage, gradient_threshold: float):
    """Interior pixels whose gradient magnitude exceeds the threshold.

    Returns an (N, 2) int array of (u, v) in deterministic row-major order.
    """
    mag = gradient_magnitudes(img)
    rows, cols = np.nonzero(mag > gradient_threshold)
    return np.column_stack([cols + 1, rows + 1]).astype(int)


def backproject(pixel, inv_depth: float, intr: CameraIntrinsics):
    """Pixel plus inverse depth to a 3D point in the camera frame."""
    if inv_depth <= 0:
        raise ValueError("inverse depth must be positive")
    u, v = pixel
    z = 1.0 / inv_depth
    return np.array([(u - intr.cx) / intr.fx * z, (v - intr.cy) / intr.fy * z, z])


def project(point, intr: CameraIntrinsics):
    """Pinhole projection; the point must have positive depth."""
    x, y, z = point
    if z <= 0:
        raise ValueError("point is behind the camera")
    return np.array([intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy])


def _warp_arrays(us, vs, inv_depths, T: SE3Transform, intr: CameraIntrinsics):
    """Vectorised backproject -> transform -> project.

    Returns (u', v', positive-depth mask); coordinates are NaN where the
    warped point falls behind the camera.
    """
    z = 1.0 / inv_depths
    pts = np.column_stack([(us - intr.cx) / intr.fx * z,
                           (vs - intr.cy) / intr.fy * z,
                           z])
    warped = pts @ T.rotation.T + T.translation
    zc = warped[:, 2]
    ok = zc > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        un = np.where(ok, intr.fx * warped[:, 0] / zc + intr.cx, np.nan)
        vn = np.where(ok, intr.fy * warped[:, 1] / zc + intr.cy, np.nan)
    return un, vn, ok


def _in_view(un, vn, img: GrayImage):
    return ((un >= 0.0) & (un <= img.width - 1.0)
            & (vn >= 0.0) & (vn <= img.height - 1.0))


def warp_pixel(pixel, inv_depth, delta, intr: CameraIntrinsics):
    """Warp one keyframe pixel into the frame moved by twist delta.

    Returns the sub-pixel (u', v') or None when the warped point is behind
    the camera (out-of-view marker; image-bounds checks are the sampler's
    concern and depend on the target image).
    """
    return warp_pixel_transform(pixel, inv_depth, exp_twist(delta), intr)


def warp_pixel_transform(pixel, inv_depth, T: SE3Transform, intr: CameraIntrinsics):
    """Like :func:`warp_pixel` but with an explicit transform."""
    if inv_depth <= 0:
        raise ValueError("inverse depth must be positive")
    u, v = pixel
    un, vn, ok = _warp_arrays(np.array([float(u)]), np.array([float(v)]),
                              np.array([float(inv_depth)]), T, intr)
    if not ok[0]:
        return None
    return np.array([un[0], vn[0]])


def _residual_state(kf: KeyFrame, frame: GrayImage, T: SE3Transform,
                    intr: CameraIntrinsics, cfg: FrontendConfig):
    """Residuals, weights and energy of the in-view pixel subset."""
    us = kf.pixel_u.astype(float)
    vs = kf.pixel_v.astype(float)
    un, vn, ok = _warp_arrays(us, vs, kf.depth_mean, T, intr)
    mask = ok & _in_view(un, vn, frame)
    if not np.any(mask):
        raise NoOverlapError("no keyframe pixel is visible in the frame")
    ref = kf.image.intensities[kf.pixel_v[mask], kf.pixel_u[mask]]
    r = ref - frame.sample(un[mask], vn[mask])

    # dr/dmu by central difference on the inverse depth; sampling positions
    # of the perturbed warps are clipped into the image so border pixels
    # still get a finite derivative.
    h = cfg.depth_fd_step
    deriv = np.zeros(mask.sum())
    samples = []
    for signed in (h, -h):
        up, vp, okp = _warp_arrays(us[mask], vs[mask],
                                   kf.depth_mean[mask] + signed, T, intr)
        up = np.clip(np.where(okp, up, un[mask]), 0.0, frame.width - 1.0)
        vp = np.clip(np.where(okp, vp, vn[mask]), 0.0, frame.height - 1.0)
        samples.append((frame.sample(up, vp), okp))
    both_ok = samples[0][1] & samples[1][1]
    deriv[both_ok] = -(samples[0][0][both_ok] - samples[1][0][both_ok]) / (2.0 * h)

    var = kf.depth_var[mask]
    w = 1.0 / (2.0 * cfg.image_noise + deriv ** 2 * var)
    energy = float(np.sum(w * r * r))
    return mask, r, w, energy


def photometric_residual(kf: KeyFrame, frame: GrayImage, delta,
                         intr: CameraIntrinsics, cfg: FrontendConfig):
    """Weighted photometric residuals of the keyframe against a frame.

    Returns (residuals, weights, energy) over the in-view pixels; raises
    NoOverlapError when nothing is visible.
    """
    _, r, w, energy = _residual_state(kf, frame, exp_twist(delta), intr, cfg)
    return r, w, energy


def _masked_residual(kf, frame, delta, mask, base_un, base_vn, intr):
    """Residual over a fixed pixel subset, for Jacobian differencing.

    Out-of-bounds samples are clipped and behind-camera points fall back to
    the unperturbed coordinates, keeping the vector length fixed.
    """
    T = exp_twist(delta)
    un, vn, ok = _warp_arrays(kf.pixel_u[mask].astype(float),
                              kf.pixel_v[mask].astype(float),
                              kf.depth_mean[mask], T, intr)
    un = np.clip(np.where(ok, un, base_un), 0.0, frame.width - 1.0)
    vn = np.clip(np.where(ok, vn, base_vn), 0.0, frame.height - 1.0)
    ref = kf.image.intensities[kf.pixel_v[mask], kf.pixel_u[mask]]
    return ref - frame.sample(un, vn)


def track_frame(kf: KeyFrame, frame: GrayImage, delta_init,
                intr: CameraIntrinsics, cfg: FrontendConfig) -> TrackResult:
    """Align the frame against the keyframe with damped weighted Gauss-Newton.

    The damping factor is multiplied by 10 on a rejected step and divided by
    10 on an accepted one; iteration stops when the step norm drops below
    the configured tolerance or the iteration budget runs out. The returned
    twist never has higher energy than the initial guess.
    """
    delta = np.asarray(delta_init, dtype=float).copy()
    total = len(kf)
    if total == 0:
        raise NoOverlapError("keyframe has no selected pixels")
    min_pixels = max(1, int(np.ceil(cfg.min_overlap * total)))

    mask, r, w, energy = _residual_state(kf, frame, exp_twist(delta), intr, cfg)
    if mask.sum() < min_pixels:
        raise TrackingLostError(
            f"only {int(mask.sum())}/{total} pixels in view at the initial guess")

    energies = [energy]
    lam = cfg.lm_init_lambda
    step_h = 1e-6
    iterations = 0
    base_un, base_vn, _ = _warp_arrays(kf.pixel_u[mask].astype(float),
                                       kf.pixel_v[mask].astype(float),
                                       kf.depth_mean[mask],
                                       exp_twist(delta), intr)
    while iterations < cfg.lm_max_iters:
        iterations += 1
        J = np.empty((int(mask.sum()), 6))
        for k in range(6):
            dp = delta.copy(); dp[k] += step_h
            dm = delta.copy(); dm[k] -= step_h
            J[:, k] = (_masked_residual(kf, frame, dp, mask, base_un, base_vn, intr)
                       - _masked_residual(kf, frame, dm, mask, base_un, base_vn, intr)) / (2 * step_h)
        JtW = J.T * w
        A = JtW @ J + lam * np.eye(6)
        g = JtW @ r
        try:
            step = np.linalg.solve(A, -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue

        candidate = delta + step
        try:
            c_mask, c_r, c_w, c_energy = _residual_state(
                kf, frame, exp_twist(candidate), intr, cfg)
        except NoOverlapError:
            c_energy = np.inf
        if c_energy < energy:
            if c_mask.sum() < min_pixels:
                raise TrackingLostError(
                    f"overlap dropped to {int(c_mask.sum())}/{total} pixels")
            delta, mask, r, w, energy = candidate, c_mask, c_r, c_w, c_energy
            energies.append(energy)
            lam = max(lam / 10.0, 1e-12)
            base_un, base_vn, _ = _warp_arrays(kf.pixel_u[mask].astype(float),
                                               kf.pixel_v[mask].astype(float),
                                               kf.depth_mean[mask],
                                               exp_twist(delta), intr)
        else:
            lam *= 10.0
            if lam > 1e12:
                break
        if np.linalg.norm(step) < cfg.convergence_tol:
            break
    return TrackResult(twist=delta, energies=energies, iterations=iterations)


def fuse_inverse_depth(prior: InverseDepthEstimate,
                       obs: InverseDepthEstimate) -> InverseDepthEstimate:
    """Product of two Gaussian inverse-depth beliefs."""
    sp, so = prior.variance, obs.variance
    if sp <= 0 or so <= 0:
        raise ValueError("variances must be positive")
    denom = sp + so
    return InverseDepthEstimate(
        mean=(sp * obs.mean + so * prior.mean) / denom,
        variance=(sp * so) / denom,
    )


def fuse_keyframe_depths(kf: KeyFrame, obs_means, obs_vars) -> None:
    """Fuse one depth observation per selected pixel into the keyframe.

    Vectorised form of :func:`fuse_inverse_depth`; observations come from a
    depth observer (ground truth plus noise in the simulator).
    """
    obs_means = np.asarray(obs_means, dtype=float)
    obs_vars = np.asarray(obs_vars, dtype=float)
    if obs_means.shape != kf.depth_mean.shape or obs_vars.shape != kf.depth_var.shape:
        raise ValueError("observation arrays must match the selected pixels")
    if np.any(obs_vars <= 0) or np.any(kf.depth_var <= 0):
        raise ValueError("variances must be positive")
    sp, so = kf.depth_var, obs_vars
    denom = sp + so
    kf.depth_mean = (sp * obs_means + so * kf.depth_mean) / denom
    kf.depth_var = (sp * so) / denom


def camera_from_dict(data: dict) -> CameraIntrinsics:
    """Camera intrinsics from a run-config mapping (keys fx, fy, cx, cy)."""
    return CameraIntrinsics(fx=float(data["fx"]), fy=float(data["fy"]),
                            cx=float(data["cx"]), cy=float(data["cy"]))


def frontend_config_from_dict(data: dict) -> FrontendConfig:
    """Frontend tuning from a run-config mapping; unknown keys rejected."""
    return FrontendConfig(**data)


def make_keyframe(image: GrayImage, cfg: FrontendConfig,
                  world_pose: SE3Transform | None = None) -> KeyFrame:
    """Select pixels on the image and start fresh inverse-depth beliefs."""
    pixels = select_pixels(image, cfg.gradient_threshold)
    n = len(pixels)
    return KeyFrame(
        image=image,
        pixel_u=pixels[:, 0] if n else np.empty(0, dtype=int),
        pixel_v=pixels[:, 1] if n else np.empty(0, dtype=int),
        depth_mean=np.ones(n),
        depth_var=np.full(n, cfg.depth_init_variance),
        world_pose=world_pose if world_pose is not None else SE3Transform.identity(),
    )


def advance_keyframe(chain: list, current_pose, frame: GrayImage,
                     cfg: FrontendConfig) -> list:
    """Promote the frame to a new keyframe once enough distance is covered.

    When the tracked twist's translation reaches the configured keyframe
    distance (inclusive), the current keyframe's depths freeze, its
    transform to the successor is recorded, and the frame becomes the new
    keyframe with re-selected pixels and unit inverse-depth priors.
    """
    current_pose = np.asarray(current_pose, dtype=float)
    if np.linalg.norm(current_pose[:3]) < cfg.keyframe_distance:
        return chain
    last = chain[-1]
    last.to_next = exp_twist(current_pose)
    new_world = compose(last.world_pose, invert(last.to_next))
    chain.append(make_keyframe(frame, cfg, world_pose=new_world))
    return chain
