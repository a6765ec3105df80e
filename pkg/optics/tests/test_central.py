import math

import numpy as np
import pytest

from optics.central import (
    central_backproject,
    central_deviation,
    central_vp,
    unified_model,
)
from optics.enums import MirrorConfiguration, MirrorPreset
from optics.exceptions import RigNotCentral
from optics.geometry import (
    MirrorShape,
    angle_between_lines,
    canonicalize_rig,
    mirror_eval,
    project_to_pixel,
    scene_direction_at,
)
from optics.presets import preset_rig


def test_unified_model_parameters(central_rig):
    model = unified_model(central_rig)

    assert model.configuration == MirrorConfiguration.CENTRAL_HYPERBOLIC
    assert model.e == pytest.approx(math.sqrt(2.0))
    assert model.xi == pytest.approx(2.0 * math.sqrt(2.0) / 3.0)
    assert model.gamma == pytest.approx(1.0 / 3.0)
    assert np.allclose(model.viewpoint, [0.0, 0.0, math.sqrt(2.0)])


@pytest.mark.parametrize(
    "shape, center",
    [
        (MirrorShape.spherical(), [0.0, 0.0, 3.0]),
        (MirrorShape.central_hyperboloid(1.0, 1.0), [0.0, 0.0, -2.0]),
    ],
)
def test_unified_model_needs_central_rig(shape, center):
    with pytest.raises(RigNotCentral):
        unified_model(canonicalize_rig(shape, center))


def test_scene_rays_pass_through_viewpoint(central_rig, visible_directions, rng):
    model = unified_model(central_rig)
    for r, d in visible_directions(central_rig, rng, 10):
        to_point = r.r - model.viewpoint

        assert angle_between_lines(to_point, d) < 1e-9


def test_unified_projection_matches_pinhole(central_rig, visible_directions, rng):
    model = unified_model(central_rig)
    for r, _ in visible_directions(central_rig, rng, 10):
        sigma = r.r - model.viewpoint

        mirror_point = model.mirror_point(sigma)
        px = model.project(sigma)

        assert abs(mirror_eval(central_rig.shape, mirror_point.r)) < 1e-9
        assert np.linalg.norm(mirror_point.r - r.r) < 1e-9
        assert px.distance_to(project_to_pixel(central_rig, r.r)) < 1e-6


def test_backprojection_inverts_projection(central_rig, visible_directions, rng):
    model = unified_model(central_rig)
    for r, _ in visible_directions(central_rig, rng, 10):
        sigma = r.r - model.viewpoint
        px = project_to_pixel(central_rig, r.r)

        assert angle_between_lines(central_backproject(model, px).s, sigma) < 1e-9


def test_central_vp_agrees_with_exact_solver(central_rig, visible_directions, rng):
    directions = [d for _, d in visible_directions(central_rig, rng, 10)]

    deviations = central_deviation(central_rig, central_rig, directions)

    for deviation in deviations:
        assert deviation.pixel_error < 1e-6
        assert deviation.angle_error < 1e-9


def test_central_vp_reflects_onto_direction(central_rig, visible_directions, rng):
    for _, d in visible_directions(central_rig, rng, 5):
        found = central_vp(central_rig, d)

        assert found
        for r, _ in found:
            assert angle_between_lines(scene_direction_at(central_rig, r.r), d) < 1e-9


def test_off_focus_camera_deviates_from_unified_model(
    central_rig, visible_directions, rng
):
    shifted = preset_rig(MirrorPreset.NEAR_CENTRAL_HYPERBOLIC)
    directions = [d for _, d in visible_directions(central_rig, rng, 20)]

    deviations = central_deviation(shifted, central_rig, directions)

    assert len(deviations) == 20
    assert any(1.0 < d.pixel_error < math.inf for d in deviations)
