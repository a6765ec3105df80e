from .base import (  # noqa: F401
    LevelStatistics,
    SweepConfig,
    SweepResult,
    get_experiments,
    run_sweep,
)
from .outputs import emit_outputs  # noqa: F401
