import numpy as np
from django.conf import settings

from optics.config import resolve_rig
from optics.exceptions import CatadioptricError, ResidualTooLarge
from optics.experiments.metrics import hausdorff_distance
from optics.experiments.scenes import sample_mirror_point, visible_pool
from optics.geometry import scene_direction_at
from optics.vanishing_points import vp_oracle, vps_from_direction

from ._base import OpticsCommand

DEFAULT_RIGS = ["spherical", "hyperbolic-offaxis", "ellipsoidal"]
HAUSDORFF_TOLERANCE = 1e-6


class Command(OpticsCommand):
    help = (
        "Compare the analytic vanishing points with the brute-force grid search "
        "on random directions"
    )

    def add_arguments(self, parser):
        parser.add_argument("--trials", dest="trials", type=int, default=20)
        parser.add_argument("--seed", dest="seed", type=int, default=0)
        parser.add_argument(
            "--rig",
            dest="rigs",
            action="append",
            help="Rig preset or INI file, may be repeated",
        )

    def check(self, rig, s) -> float:
        limit = getattr(settings, "MIRROR_SEARCH_LIMIT", 5.0)
        vps = vps_from_direction(rig, s)
        analytic = [r for r in vps if abs(r.z) <= limit]
        return hausdorff_distance(analytic, vp_oracle(rig, s, limit=limit))

    def run(self, *args, **options):
        rng = np.random.default_rng(options["seed"])
        rigs = [resolve_rig(value)[0] for value in options["rigs"] or DEFAULT_RIGS]
        pools = [visible_pool(rig) for rig in rigs]
        mismatches, skipped = 0, 0
        for trial in range(options["trials"]):
            index = trial % len(rigs)
            rig = rigs[index]
            try:
                r, _ = sample_mirror_point(rig, pools[index], rng)
                s = scene_direction_at(rig, r.r)
                distance = self.check(rig, s)
            except CatadioptricError as e:
                self.logger.warning("Trial %d skipped: %s", trial, e)
                skipped += 1
                continue
            if distance >= HAUSDORFF_TOLERANCE:
                mismatches += 1
                self.logger.warning(
                    "Trial %d: point sets differ by %.3e for direction %s",
                    trial,
                    distance,
                    s,
                )
        self.stdout.write(
            "%d trials, %d mismatches, %d skipped"
            % (options["trials"], mismatches, skipped)
        )
        if mismatches:
            raise ResidualTooLarge(
                "%d of %d directions disagree with the grid search"
                % (mismatches, options["trials"])
            )
