from django.core.management.base import CommandError

from optics.config import noise_from_config, read_config_file, rig_from_config
from optics.enums import ExperimentKind, MirrorPreset
from optics.experiments import SweepConfig, emit_outputs, run_sweep

from ._base import OpticsCommand


class Command(OpticsCommand):
    help = "Run a Monte-Carlo noise sweep and write CSV tables and an SVG plot"

    def add_arguments(self, parser):
        parser.add_argument(
            "--experiment",
            dest="experiment",
            required=True,
            choices=[kind.value for kind in ExperimentKind],
        )
        parser.add_argument(
            "--config",
            dest="config",
            required=True,
            help="INI file with a [noise] section and optionally the rig",
        )
        parser.add_argument(
            "--rig",
            dest="rigs",
            action="append",
            choices=[preset.value for preset in MirrorPreset],
            help="Preset to sweep, may be repeated. Defaults to the sweep presets "
            "unless the config file defines the rig.",
        )
        parser.add_argument(
            "--output-dir", dest="output_dir", default="sweep_output"
        )
        parser.add_argument("--trials", dest="trials", type=int)
        parser.add_argument("--seed", dest="seed", type=int)

    def get_configs(self, options):
        parser = read_config_file(options["config"])
        noise = noise_from_config(parser)
        for key in ("trials", "seed"):
            if options[key] is not None:
                noise[key] = options[key]
        if parser.has_section("mirror") and not options["rigs"]:
            return [SweepConfig(rig=rig_from_config(parser), **noise)]
        presets = options["rigs"] or [p.value for p in MirrorPreset.sweep_presets()]
        return [SweepConfig(preset=MirrorPreset(value), **noise) for value in presets]

    def run(self, *args, **options):
        if options["trials"] is not None and options["trials"] < 1:
            raise CommandError("--trials must be positive", returncode=2)
        results = []
        for config in self.get_configs(options):
            self.logger.info(
                "Running %s on %s with %d trials per level",
                options["experiment"],
                config.label,
                config.trials,
            )
            result = run_sweep(config, options["experiment"])
            results.append(result)
            self.stdout.write(
                "%s %s: medians %s, %d failed trials"
                % (
                    result.experiment.value,
                    config.label,
                    ", ".join("%.4g" % row.median for row in result.rows),
                    result.failures,
                )
            )
        for path in emit_outputs(results, options["output_dir"]):
            self.stdout.write("wrote %s" % path)
