import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings

from ..enums import ExperimentKind, MirrorPreset, NoiseKind
from ..exceptions import CatadioptricError, ValidationError
from ..geometry import CameraRig
from ..presets import preset_rig

DEFAULT_TRIALS = 100


@dataclass(frozen=True)
class SweepConfig:
    preset: Optional[MirrorPreset] = None
    noise_kind: NoiseKind = NoiseKind.PIXEL
    levels: Tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    rig: Optional[CameraRig] = field(default=None, compare=False)

    def __post_init__(self):
        levels = tuple(float(level) for level in self.levels)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "noise_kind", NoiseKind(self.noise_kind))
        if self.preset is not None:
            object.__setattr__(self, "preset", MirrorPreset(self.preset))
        if any(level < 0 or not math.isfinite(level) for level in levels):
            raise ValidationError("noise levels must be finite and non-negative")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValidationError("noise levels must be strictly ascending")
        if self.trials < 1:
            raise ValidationError("at least one trial per level is needed")
        if self.rig is None and self.preset is None:
            raise ValidationError("a sweep needs either a rig preset or a rig")

    @property
    def label(self) -> str:
        return self.preset.value if self.preset is not None else "custom"

    def get_rig(self) -> CameraRig:
        return self.rig if self.rig is not None else preset_rig(self.preset)


@dataclass(frozen=True)
class LevelStatistics:
    noise_level: float
    median: float
    mean: float
    q25: float
    q75: float
    failures: int

    @classmethod
    def from_errors(cls, noise_level: float, errors: Sequence[Optional[float]]):
        failures = sum(1 for e in errors if e is None)
        values = np.array([e for e in errors if e is not None], dtype=float)
        if not len(values):
            return cls(noise_level, math.nan, math.nan, math.nan, math.nan, failures)
        q25, median, q75 = np.percentile(values, [25, 50, 75])
        return cls(
            noise_level=noise_level,
            median=float(median),
            mean=float(np.mean(values)),
            q25=float(q25),
            q75=float(q75),
            failures=failures,
        )


@dataclass(frozen=True)
class SweepResult:
    experiment: ExperimentKind
    config: SweepConfig
    rows: Tuple[LevelStatistics, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.config.levels):
            raise ValidationError("a sweep result needs one row per noise level")

    @property
    def medians(self) -> np.ndarray:
        return np.array([row.median for row in self.rows])

    @property
    def failures(self) -> int:
        return sum(row.failures for row in self.rows)


class Experiment(object):
    """
    One noise protocol. Subclasses set `name`, the noise kinds they accept
    and implement trial(), which returns the error of a single random
    instance at the given noise level.
    """

    name: ExperimentKind
    noise_kinds: Tuple[NoiseKind, ...] = (NoiseKind.PIXEL,)
    unit = ""

    def __init__(self, rig: CameraRig, config: SweepConfig):
        self.logger = logging.getLogger("%s_experiment" % self.name.value)
        if config.noise_kind not in self.noise_kinds:
            raise ValidationError(
                "experiment %s does not support %s noise, use one of %s"
                % (
                    self.name.value,
                    config.noise_kind.value,
                    ", ".join(kind.value for kind in self.noise_kinds),
                )
            )
        self.rig = rig
        self.config = config
        self.setup()

    def setup(self):
        pass

    def trial(self, level: float, rng: np.random.Generator) -> float:
        raise NotImplementedError

    def run_trial(self, level: float, trial: int) -> Optional[float]:
        # Every level replays the same random instances.
        rng = np.random.default_rng(np.random.SeedSequence([self.config.seed, trial]))
        try:
            error = float(self.trial(level, rng))
        except CatadioptricError as e:
            self.logger.debug("Trial %d at level %g failed: %s", trial, level, e)
            return None
        if not math.isfinite(error):
            self.logger.debug("Trial %d at level %g gave %r", trial, level, error)
            return None
        return error

    def run(self) -> SweepResult:
        workers = max(1, int(getattr(settings, "SWEEP_WORKERS", 1)))
        rows = []
        with ThreadPoolExecutor(max_workers=workers) as executor:
            for level in self.config.levels:
                errors = list(
                    executor.map(
                        lambda trial: self.run_trial(level, trial),
                        range(self.config.trials),
                    )
                )
                row = LevelStatistics.from_errors(level, errors)
                if row.failures:
                    self.logger.warning(
                        "%d of %d trials failed at noise level %g",
                        row.failures,
                        self.config.trials,
                        level,
                    )
                self.logger.info(
                    "Level %g: median %.4g%s", level, row.median, self.unit
                )
                rows.append(row)
        return SweepResult(self.name, self.config, tuple(rows))


experiments = {}


def register_experiment(klass):
    experiments[klass.name] = klass
    return klass


def get_experiments():
    if experiments:
        return experiments
    module_path = __name__.rpartition(".")[0]
    # Importing the protocol modules registers their experiments.
    for fname in sorted(os.listdir(os.path.dirname(__file__))):
        module, ext = os.path.splitext(fname)
        if ext.lower() != ".py" or module in ("__init__", "base"):
            continue
        __import__("%s.%s" % (module_path, module))
    return experiments


def run_sweep(
    config: SweepConfig, experiment: Union[ExperimentKind, str]
) -> SweepResult:
    try:
        kind = ExperimentKind(experiment)
    except ValueError:
        raise ValidationError(
            "unknown experiment %r, choose one of %s"
            % (experiment, ", ".join(kind.value for kind in ExperimentKind))
        )
    klass = get_experiments()[kind]
    return klass(config.get_rig(), config).run()
