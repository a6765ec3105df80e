from optics.central import central_vp
from optics.enums import MirrorConfiguration
from optics.vanishing_points import (
    classify_configuration,
    expected_degree,
    vp_oracle,
    vps_from_direction,
)

from ._base import OpticsCommand, format_vector, vector_argument


class Command(OpticsCommand):
    help = "Compute the vanishing points of a line direction"

    def add_arguments(self, parser):
        parser.add_argument(
            "--dir", dest="direction", type=vector_argument, required=True
        )
        self.add_rig_argument(parser)
        parser.add_argument(
            "--oracle",
            action="store_true",
            dest="oracle",
            help="Also run the brute-force grid search",
        )

    def run(self, *args, **options):
        rig = self.get_rig(options)
        configuration = classify_configuration(rig)
        degree = expected_degree(configuration)
        self.stdout.write(
            "configuration: %s%s"
            % (
                configuration.value,
                "" if degree is None else " (eliminant degree %d)" % degree,
            )
        )
        vps = vps_from_direction(rig, options["direction"])
        if vps.degenerate:
            self.stdout.write(
                "direction %s is degenerate: vanishing points form a circle, "
                "showing its representatives" % format_vector(vps.direction.s)
            )
        for r, px in zip(vps.points, vps.pixels):
            pixel = "behind camera" if px is None else "(%.6f, %.6f)" % (px.u, px.v)
            self.stdout.write("r=%s pixel=%s" % (format_vector(r.r), pixel))
        if not len(vps):
            self.stdout.write("no visible vanishing point")

        if configuration in MirrorConfiguration.central_configurations():
            for r, px in central_vp(rig, vps.direction):
                self.stdout.write(
                    "unified model: r=%s pixel=(%.6f, %.6f)"
                    % (format_vector(r.r), px.u, px.v)
                )
        if options["oracle"]:
            for r in vp_oracle(rig, vps.direction):
                self.stdout.write("oracle: r=%s" % format_vector(r.r))
