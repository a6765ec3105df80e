import csv

from optics.vanishing_curves import trace_vanishing_curve

from ._base import OpticsCommand, format_vector, vector_argument


class Command(OpticsCommand):
    help = "Trace the vanishing curve of a plane on the mirror"

    def add_arguments(self, parser):
        parser.add_argument(
            "--normal", dest="normal", type=vector_argument, required=True
        )
        self.add_rig_argument(parser)
        parser.add_argument(
            "--step", dest="step", type=float, default=1e-2, help="Arc length step"
        )
        parser.add_argument(
            "--output", dest="output", help="Write the samples to this CSV file"
        )

    def run(self, *args, **options):
        rig = self.get_rig(options)
        curve = trace_vanishing_curve(rig, options["normal"], arc_step=options["step"])
        self.stdout.write(
            "normal %s: %d segment(s), %d samples"
            % (format_vector(curve.normal.n), len(curve.segments), len(curve.samples))
        )
        for index, (segment, closed) in enumerate(
            zip(curve.segments, curve.closed_segments)
        ):
            self.stdout.write(
                "segment %d: %s, %d samples from %s to %s"
                % (
                    index,
                    "closed" if closed else "open",
                    len(segment),
                    format_vector(segment[0]),
                    format_vector(segment[-1]),
                )
            )
        if options["output"]:
            with open(options["output"], "w", newline="") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(["segment", "x", "y", "z"])
                for index, segment in enumerate(curve.segments):
                    for r in segment:
                        writer.writerow([index] + ["%.12g" % value for value in r])
            self.logger.info("Wrote %s", options["output"])
