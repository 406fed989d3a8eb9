"""Synthetic grayscale scenes for exercising the visual pipeline.

A textured plane sits perpendicular to the reference camera's optical axis;
frames are rendered analytically for arbitrary camera motions by
intersecting each pixel ray with the plane and evaluating a smooth random
texture at the hit point. Also provides 8-bit binary PGM (P5) image I/O.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import exp_twist, invert
from .vision import CameraIntrinsics, GrayImage


@dataclass(frozen=True)
class PlaneSceneSpec:
    width: int = 96
    height: int = 96
    intrinsics: CameraIntrinsics = field(
        default_factory=lambda: CameraIntrinsics(fx=100.0, fy=100.0, cx=47.5, cy=47.5))
    plane_depth: float = 2.0       # camera-scale distance along the optical axis
    texture_waves: int = 6
    min_wavelength_px: float = 10.0
    max_wavelength_px: float = 28.0
    seed: int = 0


@dataclass
class SyntheticScene:
    spec: PlaneSceneSpec
    frames: list                   # GrayImage per pose, frames[0] at identity
    poses: list                    # twist per frame, poses[0] = zeros(6)

    @property
    def true_inverse_depth(self) -> float:
        """Inverse depth of every keyframe pixel (fronto-parallel plane)."""
        return 1.0 / self.spec.plane_depth


class _PlaneTexture:
    """Sum of random sinusoids, scaled into [0.1, 0.9]."""

    def __init__(self, spec: PlaneSceneSpec):
        rng = np.random.default_rng(spec.seed)
        n = spec.texture_waves
        if n < 1:
            raise ValueError("texture needs at least one wave (nonzero variance)")
        wavelengths_px = rng.uniform(spec.min_wavelength_px, spec.max_wavelength_px, n)
        # convert pixel-domain wavelengths at the plane to spatial frequencies
        freq = 2.0 * np.pi * spec.intrinsics.fx / (wavelengths_px * spec.plane_depth)
        angles = rng.uniform(0.0, 2.0 * np.pi, n)
        self.fx = freq * np.cos(angles)
        self.fy = freq * np.sin(angles)
        self.phase = rng.uniform(0.0, 2.0 * np.pi, n)
        amp = rng.uniform(0.5, 1.0, n)
        self.amp = 0.4 * amp / np.sum(amp)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        waves = self.amp * np.sin(x * self.fx + y * self.fy + self.phase)
        return 0.5 + waves.sum(axis=-1)


def _render(texture, spec: PlaneSceneSpec, twist) -> GrayImage:
    """Render the plane from the camera moved by the given twist.

    The twist maps reference-camera coordinates to the moved camera's
    coordinates, matching the pose the tracker estimates.
    """
    intr = spec.intrinsics
    T_inv = invert(exp_twist(twist))  # moved camera -> reference/world
    us, vs = np.meshgrid(np.arange(spec.width, dtype=float),
                         np.arange(spec.height, dtype=float))
    dirs = np.stack([(us - intr.cx) / intr.fx,
                     (vs - intr.cy) / intr.fy,
                     np.ones_like(us)], axis=-1)
    d = dirs @ T_inv.rotation.T
    o = T_inv.translation
    dz = d[..., 2]
    if np.any(dz <= 1e-9):
        raise ValueError("camera ray parallel to the plane; motion too large")
    s = (spec.plane_depth - o[2]) / dz
    hit_x = o[0] + s * d[..., 0]
    hit_y = o[1] + s * d[..., 1]
    return GrayImage(texture(hit_x, hit_y))


def generate_synthetic_scene(spec: PlaneSceneSpec, twists) -> SyntheticScene:
    """Render the reference frame plus one frame per twist, deterministically."""
    texture = _PlaneTexture(spec)
    poses = [np.zeros(6)] + [np.asarray(t, dtype=float) for t in twists]
    frames = [_render(texture, spec, pose) for pose in poses]
    return SyntheticScene(spec=spec, frames=frames, poses=poses)


def plane_hit_point(spec: PlaneSceneSpec, twist, pixel):
    """World-plane point seen by a pixel of the moved camera (test oracle)."""
    intr = spec.intrinsics
    T_inv = invert(exp_twist(twist))
    u, v = pixel
    d = T_inv.rotation @ np.array([(u - intr.cx) / intr.fx,
                                   (v - intr.cy) / intr.fy, 1.0])
    o = T_inv.translation
    s = (spec.plane_depth - o[2]) / d[2]
    return o + s * d


class GroundTruthDepthObserver:
    """Depth observations for synthetic scenes: plane truth plus noise.

    Stands in for a stereo-matching depth estimator; emits one Gaussian
    inverse-depth observation per selected keyframe pixel.
    """

    def __init__(self, scene: SyntheticScene, noise_std: float = 0.02, seed: int = 0):
        if noise_std <= 0:
            raise ValueError("observation noise must be positive")
        self.scene = scene
        self.noise_std = noise_std
        self.rng = np.random.default_rng(seed)

    def observe(self, n_pixels: int):
        """(means, variances) for n_pixels selected pixels."""
        truth = self.scene.true_inverse_depth
        means = truth + self.rng.normal(scale=self.noise_std, size=n_pixels)
        return np.clip(means, 1e-6, None), np.full(n_pixels, self.noise_std ** 2)


def write_pgm(path, image: GrayImage) -> None:
    """Write an 8-bit binary PGM (P5); intensities quantised from [0, 1]."""
    data = np.clip(np.rint(image.intensities * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.width} {image.height}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def read_pgm(path) -> GrayImage:
    """Read an 8-bit binary PGM (P5) into intensities in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError("not a binary PGM (P5) file")

    # header tokens (magic, width, height, maxval) may be separated by
    # whitespace and '#' comments
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    raw = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return GrayImage(raw.reshape(height, width).astype(float) / 255.0)
