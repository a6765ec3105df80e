"""
Noise protocols of the simulation sweeps. Each trial draws a random instance
on the rig, corrupts its measurements at the given noise level and returns
the error of the recovered quantity.
"""
import math

import numpy as np
from scipy.spatial.transform import Rotation

from ..enums import ExperimentKind, NoiseKind
from ..exceptions import NoSolution, RayMissesMirror
from ..geometry import (
    pixel_to_mirror,
    project_to_pixel,
    reflected_line,
    scene_direction_at,
    unit,
)
from ..pose import (
    DirectionCorrespondence,
    LineCorrespondence,
    relative_rotation,
    rotation_procrustes,
    translation_from_lines,
)
from ..vanishing_points import DirectionVector, direction_from_vp, vps_from_direction
from .base import Experiment, register_experiment
from .metrics import (
    match_vanishing_points,
    metric_direction,
    metric_rotation,
    metric_translation,
)
from .noise import perturb_direction, perturb_pixel_on_mirror
from .scenes import (
    make_scene,
    random_pose,
    sample_mirror_point,
    sample_spread_points,
    visible_pool,
)

ROTATION_DIRECTIONS = 4
MIN_RELATIVE_MATCHES = 2
RELATIVE_ANGLE_RANGE = (math.radians(5.0), math.radians(25.0))


class PoolExperiment(Experiment):
    def setup(self):
        self.pool = visible_pool(self.rig)


@register_experiment
class VanishingPointsFromDirection(PoolExperiment):
    """Distance from the true vanishing point to the nearest one of a
    perturbed direction"""

    name = ExperimentKind.VP_FROM_DIRECTION
    noise_kinds = (NoiseKind.ANGLE,)

    def trial(self, level, rng):
        r_gt, _ = sample_mirror_point(self.rig, self.pool, rng)
        s_gt = scene_direction_at(self.rig, r_gt.r)
        vps = vps_from_direction(self.rig, perturb_direction(s_gt, level, rng))
        if vps.degenerate or not len(vps):
            raise NoSolution(f"no vanishing point for the perturbed {s_gt}")
        matches = match_vanishing_points([r_gt], vps)
        return matches[0][2]


@register_experiment
class DirectionFromVanishingPoint(PoolExperiment):
    """Angle in degrees between the true direction and the one recovered
    from a noisy vanishing point pixel"""

    name = ExperimentKind.DIRECTION_FROM_VP
    unit = " deg"

    def trial(self, level, rng):
        r_gt, px = sample_mirror_point(self.rig, self.pool, rng)
        s_gt = scene_direction_at(self.rig, r_gt.r)
        r = perturb_pixel_on_mirror(self.rig, px, level, rng)
        s, _ = direction_from_vp(self.rig, r.r)
        return metric_direction(s_gt, s.s)


@register_experiment
class AbsoluteRotation(PoolExperiment):
    """Frobenius error of the rotation fitted to noisy camera directions"""

    name = ExperimentKind.ABSOLUTE_ROTATION
    noise_kinds = (NoiseKind.ANGLE, NoiseKind.PIXEL)

    def measured_direction(self, r, level, rng) -> DirectionVector:
        if self.config.noise_kind == NoiseKind.ANGLE:
            return perturb_direction(scene_direction_at(self.rig, r.r), level, rng)
        px = project_to_pixel(self.rig, r.r)
        r_noisy = perturb_pixel_on_mirror(self.rig, px, level, rng)
        s, _ = direction_from_vp(self.rig, r_noisy.r)
        return s

    def trial(self, level, rng):
        pose = random_pose(rng)
        points = sample_spread_points(self.rig, self.pool, rng, ROTATION_DIRECTIONS)
        correspondences = [
            DirectionCorrespondence(
                cam_dir=self.measured_direction(r, level, rng),
                world_dir=DirectionVector.of(
                    pose.R.T @ scene_direction_at(self.rig, r.r)
                ),
            )
            for r in points
        ]
        return metric_rotation(pose.R, rotation_procrustes(correspondences))


@register_experiment
class AbsoluteTranslation(PoolExperiment):
    """
    Error of the translation recovered from noisy line pixels. The rotation
    is the ground truth so the metric isolates the line constraints.
    """

    name = ExperimentKind.ABSOLUTE_TRANSLATION

    def measured_rays(self, pixels, level, rng):
        rays = []
        for px in pixels:
            try:
                r = perturb_pixel_on_mirror(self.rig, px, level, rng)
            except RayMissesMirror as e:
                self.logger.debug("Dropping line pixel: %s", e)
                continue
            rays.append(reflected_line(self.rig, r.r))
        return tuple(rays)

    def trial(self, level, rng):
        scene = make_scene(self.rig, rng, pool=self.pool)
        lines = []
        for world_line, pixels in scene.line_pixels:
            rays = self.measured_rays(pixels, level, rng)
            if rays:
                lines.append(
                    LineCorrespondence(world_line=world_line, measured_rays=rays)
                )
        t = translation_from_lines(scene.pose.R, lines)
        return metric_translation(scene.pose.t, t)


@register_experiment
class RelativeRotation(PoolExperiment):
    """
    Frobenius error of the rotation between two views recovered from matched
    vanishing points whose pixels are noisy in both views
    """

    name = ExperimentKind.RELATIVE_ROTATION

    def second_view_vp(self, s):
        for r, px in vps_from_direction(self.rig, s).imaged:
            if np.linalg.norm(pixel_to_mirror(self.rig, px).r - r.r) < 1e-6:
                return px
        raise NoSolution(
            f"direction {s} has no visible vanishing point in the second view"
        )

    def trial(self, level, rng):
        axis = unit(rng.standard_normal(3))
        angle = rng.uniform(*RELATIVE_ANGLE_RANGE)
        R_rel = Rotation.from_rotvec(axis * angle).as_matrix()
        points = sample_spread_points(self.rig, self.pool, rng, ROTATION_DIRECTIONS)
        pixel_pairs = []
        for r in points:
            s = DirectionVector.of(R_rel @ scene_direction_at(self.rig, r.r))
            first = project_to_pixel(self.rig, r.r)
            pixel_pairs.append((first, self.second_view_vp(s)))
        matches = []
        for first, second in pixel_pairs:
            try:
                matches.append(
                    (
                        perturb_pixel_on_mirror(self.rig, first, level, rng),
                        perturb_pixel_on_mirror(self.rig, second, level, rng),
                    )
                )
            except RayMissesMirror as e:
                self.logger.debug("Dropping vanishing point match: %s", e)
        if len(matches) < MIN_RELATIVE_MATCHES:
            raise NoSolution(f"only {len(matches)} vanishing point matches remain")
        return metric_rotation(R_rel, relative_rotation(self.rig, matches))
