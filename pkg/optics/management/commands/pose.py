import numpy as np

from optics.config import read_config_file, rig_from_config, scene_from_config
from optics.experiments.metrics import metric_rotation, metric_translation
from optics.experiments.noise import perturb_point
from optics.experiments.scenes import make_scene
from optics.geometry import pixel_to_mirror, project_to_pixel
from optics.pose import absolute_pose

from ._base import OpticsCommand, format_vector


class Command(OpticsCommand):
    help = "Estimate the absolute pose of the camera in a synthetic scene"

    def add_arguments(self, parser):
        parser.add_argument(
            "--scene",
            dest="scene",
            required=True,
            help="INI file with the rig and a [scene] section",
        )

    def run(self, *args, **options):
        parser = read_config_file(options["scene"])
        rig = rig_from_config(parser)
        scene_options = scene_from_config(parser)
        rng = np.random.default_rng(scene_options["seed"])
        scene = make_scene(
            rig,
            rng,
            bundles=scene_options["bundles"],
            lines_per_bundle=scene_options["lines_per_bundle"],
            pixels_per_line=scene_options["pixels_per_line"],
        )
        sigma = scene_options["noise"]
        self.logger.info(
            "Scene has %d bundles and %d lines, pixel noise %g",
            len(scene.bundles),
            len(scene.line_pixels),
            sigma,
        )

        vps = []
        for r, world_dir in scene.vp_pairs:
            px = perturb_point(project_to_pixel(rig, r.r), sigma, rng)
            vps.append((pixel_to_mirror(rig, px), world_dir))
        line_pixels = [
            (world_line, [perturb_point(px, sigma, rng) for px in pixels])
            for world_line, pixels in scene.line_pixels
        ]
        pose = absolute_pose(rig, vps, line_pixels)

        for row in pose.R:
            self.stdout.write("R %s" % format_vector(row))
        self.stdout.write("t %s" % format_vector(pose.t))
        self.stdout.write(
            "rotation error %.3e" % metric_rotation(scene.pose.R, pose.R)
        )
        self.stdout.write(
            "translation error %.3e" % metric_translation(scene.pose.t, pose.t)
        )
