from optics.vanishing_points import direction_from_vp

from ._base import OpticsCommand, format_vector, vector_argument


class Command(OpticsCommand):
    help = "Recover the line direction whose vanishing point is a mirror point"

    def add_arguments(self, parser):
        parser.add_argument(
            "--point", dest="point", type=vector_argument, required=True
        )
        self.add_rig_argument(parser)

    def run(self, *args, **options):
        rig = self.get_rig(options)
        first, second = direction_from_vp(rig, options["point"])
        self.stdout.write("s=%s" % format_vector(first.s))
        self.stdout.write("s=%s" % format_vector(second.s))
