import argparse
import logging

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from optics.config import resolve_rig
from optics.exceptions import CatadioptricError


def vector_argument(value: str) -> np.ndarray:
    """argparse type for comma separated 3-vectors such as 1,0,1"""
    try:
        vector = np.array([float(part) for part in value.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a list of numbers")
    if vector.shape != (3,):
        raise argparse.ArgumentTypeError(f"{value!r} must have three components")
    return vector


def format_vector(v) -> str:
    return "(%s)" % ", ".join("%.9g" % x for x in np.asarray(v, dtype=float))


class OpticsCommand(BaseCommand):
    """
    Base for the optics commands. Subclasses implement run(); library errors
    become CommandErrors carrying the error family's exit code.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.logger = logging.getLogger(self.__module__.rpartition(".")[2])

    def add_rig_argument(self, parser, default="spherical"):
        parser.add_argument(
            "--rig",
            dest="rig",
            default=default,
            help="Rig preset name or INI file with [mirror] and [camera] sections",
        )

    def get_rig(self, options):
        rig, _ = resolve_rig(options["rig"])
        return rig

    def run(self, *args, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            self.run(*args, **options)
        except CatadioptricError as e:
            self.logger.debug("%s failed", self.__module__, exc_info=True)
            raise CommandError(
                "%s: %s" % (type(e).__name__, e), returncode=e.exit_code
            )
