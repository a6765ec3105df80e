import math

import numpy as np
import pytest

from optics.exceptions import (
    BehindCamera,
    DegenerateNormal,
    RayMissesMirror,
    ValidationError,
)
from optics.experiments.scenes import visible_pool
from optics.geometry import (
    CameraRig,
    MirrorPoint,
    MirrorShape,
    Pixel,
    PlueckerLine,
    angle_between_lines,
    axis_point,
    canonicalize_rig,
    focal_geometry,
    forward_project,
    forward_project_near,
    mirror_eval,
    mirror_normal,
    pixel_to_mirror,
    pixel_to_plucker,
    project_to_pixel,
    reflect_direction,
    scene_direction_at,
    snell_residual,
)

SPHERE = MirrorShape(1.0, 0.0, 1.0)


@pytest.mark.parametrize(
    "raw_center, expected",
    [
        ([0.0, 0.0, 3.0], [0.0, 0.0, 3.0]),
        ([3.0, 0.0, 5.0], [0.0, 3.0, 5.0]),
        ([1.0, 1.0, 2.0], [0.0, math.sqrt(2.0), 2.0]),
    ],
)
def test_canonicalize_rig(raw_center, expected):
    rig = canonicalize_rig(SPHERE, raw_center)

    assert np.allclose(rig.c, expected, atol=1e-12)
    assert np.allclose(rig.world_rotation @ raw_center, expected, atol=1e-12)
    assert rig.c[0] == 0.0


def test_canonicalize_rig_axis_swap():
    rig = canonicalize_rig(SPHERE, [3.0, 0.0, 5.0])

    expected = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(rig.world_rotation.T, expected, atol=1e-12)


def test_rig_rejects_non_canonical_center():
    with pytest.raises(ValidationError):
        CameraRig(shape=SPHERE, c=[0.5, 0.0, 3.0])


def test_rig_rejects_center_on_mirror():
    with pytest.raises(ValidationError):
        CameraRig(shape=SPHERE, c=[0.0, 0.0, 1.0])


def test_empty_mirror_is_rejected():
    with pytest.raises(ValidationError):
        MirrorShape(1.0, 0.0, -1.0)


def test_camera_rig_factory(camera_rig):
    assert camera_rig.c[1] == pytest.approx(0.2)
    assert not camera_rig.is_axial


@pytest.mark.parametrize(
    "shape, r, expected",
    [
        (SPHERE, [1.0, 0.0, 0.0], 0.0),
        (SPHERE, [0.0, 0.0, 0.0], -1.0),
        (MirrorShape(2.0, 1.0, 3.0), [1.0, 1.0, 1.0], 2.0),
    ],
)
def test_mirror_eval(shape, r, expected):
    assert mirror_eval(shape, r) == pytest.approx(expected)


@pytest.mark.parametrize(
    "shape, r, expected",
    [
        (SPHERE, [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]),
        (MirrorShape(0.0, 2.0, 0.0), [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
    ],
)
def test_mirror_normal(shape, r, expected):
    assert np.allclose(mirror_normal(shape, r), expected)


def test_mirror_normal_at_cone_apex():
    with pytest.raises(DegenerateNormal):
        mirror_normal(MirrorShape.conical(-1.0), [0.0, 0.0, 0.0])


@pytest.mark.parametrize(
    "shape, r, expected",
    [
        (SPHERE, [0.6, 0.0, 0.8], [0.0, 0.0, 0.0]),
        (MirrorShape.cylindrical(), [0.6, 0.8, 2.0], [0.0, 0.0, 2.0]),
        (MirrorShape(2.0, 1.0, 3.0), [0.5, 0.5, 1.0], [0.0, 0.0, -1.5]),
    ],
)
def test_axis_point(shape, r, expected):
    assert np.allclose(axis_point(shape, r), expected)


@pytest.mark.parametrize(
    "n, d_in, expected",
    [
        ([0, 0, 1], [0, 0, -1], [0, 0, 1]),
        ([0, 0, 1], [1 / math.sqrt(2), 0, -1 / math.sqrt(2)], [1, 0, 1]),
        ([0, 1, 0], [1, 0, 0], [1, 0, 0]),
    ],
)
def test_reflect_direction(n, d_in, expected):
    expected = np.array(expected, dtype=float) / np.linalg.norm(expected)
    assert np.allclose(reflect_direction(n, d_in), expected, atol=1e-12)


def test_scene_direction_at_apex(axial_sphere_rig):
    assert np.allclose(scene_direction_at(axial_sphere_rig, [0, 0, 1]), [0, 0, 1])


def test_scene_direction_in_symmetry_plane(axial_sphere_rig):
    d = scene_direction_at(axial_sphere_rig, [0.0, 0.6, 0.8])

    assert d[0] == pytest.approx(0.0, abs=1e-15)
    assert np.linalg.norm(d) == pytest.approx(1.0)


def test_scene_direction_obeys_law_of_reflection(axial_sphere_rig):
    r = np.array([0.6, 0.0, 0.8])
    n = r / np.linalg.norm(r)
    incoming = (axial_sphere_rig.c - r) / np.linalg.norm(axial_sphere_rig.c - r)
    outgoing = scene_direction_at(axial_sphere_rig, r)

    assert incoming @ n == pytest.approx(outgoing @ n)
    assert np.linalg.det(np.array([incoming, outgoing, n])) == pytest.approx(
        0.0, abs=1e-12
    )


def test_project_to_pixel_unit_offset(axial_sphere_rig):
    # viewing axis is -z, image x is +x
    px = project_to_pixel(axial_sphere_rig, [1.0, 0.0, 2.0])

    assert px.u == pytest.approx(820.0)
    assert px.v == pytest.approx(320.0)


def test_project_to_pixel_principal_point(axial_sphere_rig):
    px = project_to_pixel(axial_sphere_rig, [0.0, 0.0, 1.0])

    assert (px.u, px.v) == (pytest.approx(320.0), pytest.approx(320.0))


def test_project_to_pixel_behind_camera(axial_sphere_rig):
    with pytest.raises(BehindCamera):
        project_to_pixel(axial_sphere_rig, [0.0, 0.0, 4.0])


def test_pixel_to_plucker_at_apex(axial_sphere_rig):
    line = pixel_to_plucker(axial_sphere_rig, Pixel(320.0, 320.0))

    assert np.allclose(line.s, [0.0, 0.0, 1.0], atol=1e-12)
    assert np.allclose(line.m, [0.0, 0.0, 0.0], atol=1e-12)


def test_pixel_to_mirror_misses_silhouette(axial_sphere_rig):
    with pytest.raises(RayMissesMirror):
        pixel_to_mirror(axial_sphere_rig, Pixel(0.0, 0.0))


def test_pixel_round_trip(noncentral_rig, rng):
    pool = visible_pool(noncentral_rig)
    for r in pool[rng.choice(len(pool), size=20, replace=False)]:
        px = project_to_pixel(noncentral_rig, r)
        line = pixel_to_plucker(noncentral_rig, px)

        assert np.linalg.norm(pixel_to_mirror(noncentral_rig, px).r - r) < 1e-9
        assert line.distance_to(r) < 1e-9


def test_forward_project_retraces_axis(axial_sphere_rig):
    solutions = forward_project(axial_sphere_rig, [0.0, 0.0, 5.0])

    assert any(np.allclose(r.r, [0.0, 0.0, 1.0], atol=1e-7) for r, _ in solutions)


def test_forward_project_stays_in_symmetry_plane(axial_sphere_rig):
    solutions = forward_project(axial_sphere_rig, [0.0, 5.0, 3.0])

    assert solutions
    for r, _ in solutions:
        assert abs(r.x) < 1e-7
        assert abs(mirror_eval(axial_sphere_rig.shape, r.r)) < 1e-9


def test_forward_project_finds_constructed_reflection(noncentral_rig, rng):
    pool = visible_pool(noncentral_rig)
    r = pool[rng.integers(len(pool))]
    p = r + 2.0 * scene_direction_at(noncentral_rig, r)

    solutions = forward_project(noncentral_rig, p)

    matches = [px for found, px in solutions if np.linalg.norm(found.r - r) < 1e-6]
    assert len(matches) == 1
    assert pixel_to_plucker(noncentral_rig, matches[0]).distance_to(p) < 1e-6
    for found, _ in solutions:
        assert snell_residual(noncentral_rig, found.r, p) < 1e-8


def test_forward_project_near(axial_sphere_rig):
    r = np.array([0.0, 0.6, 0.8])
    p = r + 1.5 * scene_direction_at(axial_sphere_rig, r)

    found, px = forward_project_near(axial_sphere_rig, p, r + [0.01, 0.02, -0.01])

    assert np.linalg.norm(found.r - r) < 1e-8
    assert px.distance_to(project_to_pixel(axial_sphere_rig, r)) < 1e-6


def test_mirror_point_on_surface():
    assert MirrorPoint.on(SPHERE, [0.0, 0.6, 0.8]).y == pytest.approx(0.6)
    with pytest.raises(ValidationError):
        MirrorPoint.on(SPHERE, [0.0, 0.6, 0.9])


def test_plucker_line_operations():
    line = PlueckerLine.through([1.0, 2.0, 3.0], [0.0, 0.0, 2.0])

    assert np.allclose(line.closest_point, [1.0, 2.0, 0.0])
    assert line.distance_to([1.0, 2.0, -7.0]) == pytest.approx(0.0, abs=1e-12)
    assert line.distance_to([1.0, 3.0, 0.0]) == pytest.approx(1.0)

    R = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    moved = line.transformed(R, [0.5, 0.0, 0.0])
    assert moved.distance_to(R @ [1.0, 2.0, 3.0] + [0.5, 0.0, 0.0]) < 1e-12


def test_plucker_line_rejects_inconsistent_moment():
    with pytest.raises(ValidationError):
        PlueckerLine([0.0, 0.0, 1.0], [0.0, 0.0, 1.0])


def test_nearest_point_to_line():
    first = PlueckerLine.through([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    second = PlueckerLine.through([2.0, 0.0, 1.0], [0.0, 1.0, 0.0])

    assert np.allclose(first.nearest_point_to_line(second), [2.0, 0.0, 0.0])
    assert first.incidence(second) == pytest.approx(-1.0)


def test_angle_between_lines_is_unoriented_and_accurate():
    assert angle_between_lines([1, 0, 0], [-1, 0, 0]) == 0.0
    assert angle_between_lines([1, 0, 0], [1, 1e-10, 0]) == pytest.approx(1e-10)


def test_focal_geometry_of_central_hyperboloid():
    focal = focal_geometry(MirrorShape.central_hyperboloid(1.0, 1.0))

    assert focal.kind == "hyperboloid"
    assert focal.e == pytest.approx(math.sqrt(2.0))
    assert np.allclose(focal.foci[1], [0.0, 0.0, -math.sqrt(2.0)])


def test_focal_geometry_absent_for_sphere():
    assert focal_geometry(SPHERE) is None


def test_reflection_is_an_involution(any_rig, visible_directions, rng):
    for r, _ in visible_directions(any_rig, rng, 20):
        n = mirror_normal(any_rig.shape, r.r)
        incoming = r.r - any_rig.c

        reflected = reflect_direction(n, incoming)
        back = reflect_direction(n, reflected)

        assert np.allclose(back, incoming / np.linalg.norm(incoming), atol=1e-12)


def test_reflection_keeps_angle_to_normal(any_rig, visible_directions, rng):
    for r, outgoing in visible_directions(any_rig, rng, 20):
        n = mirror_normal(any_rig.shape, r.r)
        n = n / np.linalg.norm(n)
        incoming = (any_rig.c - r.r) / np.linalg.norm(any_rig.c - r.r)

        assert incoming @ n == pytest.approx(outgoing @ n, abs=1e-12)
        assert np.linalg.det(np.array([incoming, outgoing, n])) == pytest.approx(
            0.0, abs=1e-12
        )
        assert snell_residual(any_rig, r.r, r.r + 3.0 * outgoing) < 1e-9
