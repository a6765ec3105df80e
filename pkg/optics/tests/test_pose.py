import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from optics.exceptions import (
    AllParallelDirections,
    NonConvergence,
    RankDeficient,
    ValidationError,
)
from optics.experiments.metrics import metric_rotation
from optics.experiments.noise import perturb_point
from optics.experiments.scenes import make_scene, sample_spread_points, visible_pool
from optics.geometry import (
    Pixel,
    PlueckerLine,
    angle_between_lines,
    pixel_to_mirror,
    project_to_pixel,
    scene_direction_at,
)
from optics.pose import (
    DirectionCorrespondence,
    LineCorrespondence,
    Pose,
    absolute_pose,
    fit_line_to_pixels,
    relative_rotation,
    rotation_procrustes,
    translation_from_lines,
    triangulate_line,
)
from optics.vanishing_points import DirectionVector, vps_from_direction

TRANSLATION = np.array([0.3, -0.2, 0.5])
NON_COPLANAR = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.2], [0.3, 0.4, 1.0], [-0.5, 0.7, 0.1]]


def correspondences(R, world, signs):
    return [
        DirectionCorrespondence(
            cam_dir=DirectionVector.of(sign * (R @ w)),
            world_dir=DirectionVector.of(w),
        )
        for w, sign in zip(world, signs)
    ]


def test_half_turn_rotation_error():
    half_turn = Rotation.from_euler("z", 180, degrees=True).as_matrix()

    assert metric_rotation(np.eye(3), half_turn) == pytest.approx(math.sqrt(8.0))


@pytest.mark.parametrize(
    "count, signs",
    [
        (3, (1, 1, 1)),
        (3, (-1, 1, -1)),
        (4, (1, -1, -1, 1)),
    ],
)
def test_rotation_procrustes_recovers_signs(count, signs):
    R = Rotation.from_rotvec([0.3, -0.5, 0.8]).as_matrix()

    estimate = rotation_procrustes(correspondences(R, NON_COPLANAR[:count], signs))

    assert metric_rotation(R, estimate) < 1e-12
    assert np.linalg.det(estimate) == pytest.approx(1.0)


def test_rotation_procrustes_greedy_signs(rng):
    R = Rotation.random(None, rng).as_matrix()
    world = rng.standard_normal((8, 3))
    signs = rng.choice([-1.0, 1.0], size=8)

    estimate = rotation_procrustes(correspondences(R, world, signs))

    assert metric_rotation(R, estimate) < 1e-12


def test_rotation_from_two_directions_aligns_them():
    R = Rotation.from_rotvec([0.1, 0.2, -0.3]).as_matrix()
    world = NON_COPLANAR[:2]

    estimate = rotation_procrustes(correspondences(R, world, (1, 1)))

    for w in world:
        assert angle_between_lines(estimate @ w, R @ w) < 1e-12


def test_rotation_needs_two_directions():
    with pytest.raises(ValidationError):
        rotation_procrustes(correspondences(np.eye(3), NON_COPLANAR[:1], (1,)))


def test_rotation_rejects_parallel_directions():
    world = [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [0.0, 0.0, 1.0]]

    with pytest.raises(AllParallelDirections):
        rotation_procrustes(correspondences(np.eye(3), world, (1, 1, 1)))


def line_rays(camera_line, rng, count):
    """Random rays through `count` points of a camera-frame line"""
    rays = []
    for lam in np.linspace(-1.0, 1.0, count):
        point = camera_line.point_at(lam)
        rays.append(PlueckerLine.through(point, rng.standard_normal(3)))
    return tuple(rays)


def test_translation_from_two_lines(rng):
    R = Rotation.from_rotvec([0.2, 0.1, -0.4]).as_matrix()
    pose = Pose(R, TRANSLATION)
    world_lines = [
        PlueckerLine.through([1.0, 0.0, 2.0], [0.0, 1.0, 0.3]),
        PlueckerLine.through([-1.0, 0.5, 3.0], [1.0, 0.2, 0.0]),
    ]
    lines = [
        LineCorrespondence(line, line_rays(pose.transform_line(line), rng, 3))
        for line in world_lines
    ]

    assert np.allclose(translation_from_lines(R, lines), TRANSLATION, atol=1e-10)


def test_translation_needs_three_constraints(rng):
    line = PlueckerLine.through([1.0, 0.0, 2.0], [0.0, 1.0, 0.0])
    lines = [LineCorrespondence(line, line_rays(line, rng, 2))]

    with pytest.raises(RankDeficient):
        translation_from_lines(np.eye(3), lines)


def test_line_correspondence_needs_rays():
    with pytest.raises(ValidationError):
        LineCorrespondence(PlueckerLine.through([0, 0, 0], [1, 0, 0]), ())


def test_pose_inverse_round_trip():
    pose = Pose(Rotation.from_rotvec([0.4, 0.0, 0.3]).as_matrix(), TRANSLATION)
    point = np.array([0.5, -1.0, 2.0])

    moved = pose.transform_point(point)

    assert np.allclose(pose.inverse().transform_point(moved), point)


def test_pose_rejects_reflection():
    with pytest.raises(ValidationError):
        Pose(np.diag([1.0, 1.0, -1.0]))


def test_triangulate_line_from_five_rays(rng):
    line = PlueckerLine.through([0.2, -0.3, 2.0], [0.5, 0.5, 0.1])

    found = triangulate_line(line_rays(line, rng, 5))

    assert angle_between_lines(found.s, line.s) < 1e-9
    assert line.distance_to(found.closest_point) < 1e-9


def test_triangulate_line_needs_four_rays(rng):
    line = PlueckerLine.through([0.2, -0.3, 2.0], [0.5, 0.5, 0.1])

    assert triangulate_line(line_rays(line, rng, 3)) is None


def test_absolute_pose_exact_scene(camera_rig, rng):
    scene = make_scene(camera_rig, rng)

    pose = absolute_pose(camera_rig, scene.vp_pairs, scene.line_pixels)

    assert metric_rotation(scene.pose.R, pose.R) < 1e-8
    assert np.linalg.norm(pose.t - scene.pose.t) < 1e-6


def test_absolute_pose_with_known_translation(camera_rig, rng):
    R = Rotation.from_rotvec([0.1, -0.2, 0.3]).as_matrix()
    scene = make_scene(camera_rig, rng, pose=Pose(R, TRANSLATION))

    pose = absolute_pose(camera_rig, scene.vp_pairs, scene.line_pixels)

    assert np.allclose(pose.t, TRANSLATION, atol=1e-6)


def test_relative_rotation(camera_rig, rng):
    R = Rotation.from_rotvec([0.05, -0.03, 0.06]).as_matrix()
    pool = visible_pool(camera_rig)
    matches = []
    for r in sample_spread_points(camera_rig, pool, rng, 4):
        moved = R @ scene_direction_at(camera_rig, r.r)
        for second, px in vps_from_direction(camera_rig, moved).imaged:
            if np.linalg.norm(pixel_to_mirror(camera_rig, px).r - second.r) < 1e-6:
                matches.append((r, second))
                break
    assert len(matches) >= 3

    assert metric_rotation(R, relative_rotation(camera_rig, matches)) < 1e-8


@pytest.mark.slow
def test_fit_line_to_pixels(camera_rig, rng):
    scene = make_scene(
        camera_rig, rng, bundles=2, lines_per_bundle=1, pixels_per_line=5
    )
    world_line, pixels = scene.line_pixels[0]
    truth = scene.pose.transform_line(world_line)

    fit = fit_line_to_pixels(camera_rig, pixels)

    assert fit.converged
    assert fit.rms < 1e-6
    assert angle_between_lines(fit.line.s, truth.s) < 1e-6
    assert truth.distance_to(fit.line.closest_point) < 1e-5


def test_fit_line_needs_four_pixels(camera_rig):
    px = project_to_pixel(camera_rig, [0.0, 0.6, 0.8])

    with pytest.raises(ValidationError):
        fit_line_to_pixels(camera_rig, [px, px, px])


@pytest.fixture
def imaged_line(camera_rig, rng):
    scene = make_scene(
        camera_rig, rng, bundles=2, lines_per_bundle=1, pixels_per_line=8
    )
    world_line, pixels = scene.line_pixels[0]
    return scene.pose.transform_line(world_line), pixels


@pytest.mark.slow
def test_fit_line_to_noisy_pixels(camera_rig, imaged_line, rng):
    truth, pixels = imaged_line
    noisy = [perturb_point(px, 2.0, rng) for px in pixels]

    strict_threshold = fit_line_to_pixels(camera_rig, noisy)
    fit = fit_line_to_pixels(camera_rig, noisy, noise=2.0)

    assert not strict_threshold.converged
    assert fit.converged
    assert 0.25 < fit.rms < 4.25
    assert angle_between_lines(fit.line.s, truth.s) < 0.2


@pytest.mark.slow
def test_fit_line_raises_when_strict(camera_rig, imaged_line):
    _, pixels = imaged_line
    moved = list(pixels)
    moved[0] = Pixel(pixels[0].u + 5.0, pixels[0].v)

    with pytest.raises(NonConvergence):
        fit_line_to_pixels(camera_rig, moved, strict=True)


def test_fit_line_rejects_negative_noise(camera_rig, imaged_line):
    _, pixels = imaged_line

    with pytest.raises(ValidationError):
        fit_line_to_pixels(camera_rig, pixels, noise=-1.0)
