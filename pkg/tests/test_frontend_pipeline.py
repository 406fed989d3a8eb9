"""End-to-end visual frontend: tracking, depth fusion and keyframe
advancement over a synthetic multi-frame sequence."""

import numpy as np
import pytest

from warebot.geometry import compose, exp_twist, invert, log_transform
from warebot.mapping import OccupancyGridMap, inflate_obstacles
from warebot.scenes import (
    GroundTruthDepthObserver,
    PlaneSceneSpec,
    generate_synthetic_scene,
)
from warebot.vision import (
    CameraIntrinsics,
    FrontendConfig,
    InverseDepthEstimate,
    advance_keyframe,
    camera_from_dict,
    frontend_config_from_dict,
    fuse_inverse_depth,
    fuse_keyframe_depths,
    make_keyframe,
    track_frame,
)


def test_fuse_keyframe_depths_matches_scalar(rng):
    spec = PlaneSceneSpec(width=48, height=48, seed=8)
    scene = generate_synthetic_scene(spec, [])
    cfg = FrontendConfig(gradient_threshold=0.02)
    kf = make_keyframe(scene.frames[0], cfg)
    n = len(kf)
    assert n > 50
    obs_means = rng.uniform(0.3, 0.8, size=n)
    obs_vars = rng.uniform(0.001, 0.1, size=n)
    expected = [
        fuse_inverse_depth(InverseDepthEstimate(1.0, cfg.depth_init_variance),
                           InverseDepthEstimate(m, v))
        for m, v in zip(obs_means, obs_vars)
    ]
    fuse_keyframe_depths(kf, obs_means, obs_vars)
    assert np.allclose(kf.depth_mean, [e.mean for e in expected], atol=1e-15)
    assert np.allclose(kf.depth_var, [e.variance for e in expected], atol=1e-15)


def test_fuse_keyframe_depths_shape_mismatch():
    spec = PlaneSceneSpec(width=32, height=32, seed=8)
    scene = generate_synthetic_scene(spec, [])
    kf = make_keyframe(scene.frames[0], FrontendConfig(gradient_threshold=0.02))
    with pytest.raises(ValueError):
        fuse_keyframe_depths(kf, np.ones(3), np.ones(3))


def test_depth_observer_converges_to_truth():
    spec = PlaneSceneSpec(width=48, height=48, seed=4)
    scene = generate_synthetic_scene(spec, [])
    cfg = FrontendConfig(gradient_threshold=0.02)
    kf = make_keyframe(scene.frames[0], cfg)
    observer = GroundTruthDepthObserver(scene, noise_std=0.03, seed=11)
    for _ in range(40):
        means, variances = observer.observe(len(kf))
        fuse_keyframe_depths(kf, means, variances)
    assert np.all(kf.depth_var < 1e-4)
    assert np.allclose(kf.depth_mean, scene.true_inverse_depth, atol=0.02)


def test_frontend_pipeline_tracks_a_moving_camera():
    intr = CameraIntrinsics(fx=80.0, fy=80.0, cx=47.5, cy=47.5)
    spec = PlaneSceneSpec(width=96, height=96, intrinsics=intr,
                          plane_depth=1.75, seed=31)
    # absolute camera twists: sideways slide plus slow retreat
    step = np.array([0.012, 0.0, -0.008, 0.0, 0.0, 0.0])
    truths = [step * k for k in range(1, 7)]
    scene = generate_synthetic_scene(spec, truths)
    cfg = FrontendConfig(gradient_threshold=0.02, keyframe_distance=0.05,
                         lm_max_iters=40, convergence_tol=1e-10)
    observer = GroundTruthDepthObserver(scene, noise_std=0.01, seed=7)

    chain = [make_keyframe(scene.frames[0], cfg)]
    # settle the fresh keyframe's unit-depth prior before moving
    for _ in range(25):
        means, variances = observer.observe(len(chain[-1]))
        fuse_keyframe_depths(chain[-1], means, variances)

    delta = np.zeros(6)
    for k, frame in enumerate(scene.frames[1:]):
        # ground-truth twist of this frame relative to the current keyframe
        kf = chain[-1]
        absolute = exp_twist(scene.poses[k + 1])
        relative = compose(absolute, kf.world_pose)
        result = track_frame(kf, frame, delta, intr, cfg)
        delta = result.twist
        assert np.linalg.norm(delta - log_transform(relative)) < 2e-3
        before = len(chain)
        advance_keyframe(chain, delta, frame, cfg)
        if len(chain) > before:
            delta = np.zeros(6)
            for _ in range(25):
                means, variances = observer.observe(len(chain[-1]))
                fuse_keyframe_depths(chain[-1], means, variances)

    assert len(chain) >= 2  # the slide crosses the keyframe distance
    # the chain pose of the newest keyframe matches the true camera pose
    final_abs = invert(chain[-1].world_pose)
    k_last = [i for i, _ in enumerate(scene.frames[1:])
              if np.linalg.norm(scene.poses[i + 1][:3]) > 0][-1]
    # world_pose corresponds to the frame at which the last advance happened
    expected_positions = [exp_twist(p).translation for p in scene.poses]
    dists = [np.linalg.norm(final_abs.translation - t) for t in expected_positions]
    assert min(dists) < 5e-3


def test_camera_from_dict():
    intr = camera_from_dict({"fx": 80, "fy": 82.5, "cx": 47.5, "cy": 40})
    assert intr.fx == 80.0 and intr.cy == 40.0
    with pytest.raises(ValueError):
        camera_from_dict({"fx": -1, "fy": 1, "cx": 0, "cy": 0})


def test_frontend_config_from_dict():
    cfg = frontend_config_from_dict({"gradient_threshold": 0.08, "lm_max_iters": 10})
    assert cfg.gradient_threshold == 0.08
    assert cfg.lm_max_iters == 10
    with pytest.raises(TypeError):
        frontend_config_from_dict({"bogus": 1})


# ------------------------------------------------------- obstacle inflation

def test_inflation_zero_is_identity():
    reach = np.ones((5, 5), dtype=bool)
    reach[2, 2] = False
    ogm = OccupancyGridMap.from_reachable(reach)
    assert inflate_obstacles(ogm, 0) is ogm


def test_inflation_blocks_neighbours():
    reach = np.ones((5, 5), dtype=bool)
    reach[2, 2] = False
    ogm = inflate_obstacles(OccupancyGridMap.from_reachable(reach), 1)
    for dh in (-1, 0, 1):
        for dv in (-1, 0, 1):
            assert not ogm.reachable(2 + dh, 2 + dv)
    assert ogm.reachable(0, 0)
    assert ogm.reachable(2, 4)


def test_inflation_monotone(rng):
    reach = rng.random((12, 12)) >= 0.2
    ogm = OccupancyGridMap.from_reachable(reach)
    small = inflate_obstacles(ogm, 1)
    large = inflate_obstacles(ogm, 2)
    for h in range(12):
        for v in range(12):
            if not small.reachable(h, v):
                assert not large.reachable(h, v)
