"""
Documented rigs for the command line and the experiment sweeps.

No published rig parameters exist for these experiments, so these are
declared replacements: the curves they produce are qualitative.
"""
import math
from typing import Optional, Union

from .enums import MirrorPreset
from .exceptions import ValidationError
from .geometry import CameraRig, Intrinsics, MirrorShape, canonicalize_rig

CENTRAL_FOCAL_DISTANCE = math.sqrt(2.0)
NEAR_CENTRAL_SHIFT = 0.09

PRESETS = {
    MirrorPreset.SPHERICAL: (MirrorShape(1.0, 0.0, 1.0), (0.0, 0.2, 3.0)),
    MirrorPreset.HYPERBOLIC: (MirrorShape(-2.0, 2.0, 1.0), (0.0, 0.0, 3.0)),
    MirrorPreset.HYPERBOLIC_OFFAXIS: (MirrorShape(-2.0, 2.0, 1.0), (0.0, 0.3, 3.0)),
    MirrorPreset.ELLIPSOIDAL: (MirrorShape(2.0, 0.0, 1.0), (0.0, 0.2, 3.0)),
    MirrorPreset.CENTRAL_HYPERBOLIC: (
        MirrorShape.central_hyperboloid(1.0, 1.0),
        (0.0, 0.0, -CENTRAL_FOCAL_DISTANCE),
    ),
    MirrorPreset.NEAR_CENTRAL_HYPERBOLIC: (
        MirrorShape.central_hyperboloid(1.0, 1.0),
        (
            0.0,
            NEAR_CENTRAL_SHIFT * 2.0 * CENTRAL_FOCAL_DISTANCE,
            -CENTRAL_FOCAL_DISTANCE,
        ),
    ),
}


def preset_rig(
    preset: Union[MirrorPreset, str], intrinsics: Optional[Intrinsics] = None
) -> CameraRig:
    try:
        preset = MirrorPreset(preset)
    except ValueError:
        raise ValidationError(
            "unknown rig preset %r, choose one of %s"
            % (preset, ", ".join(p.value for p in MirrorPreset))
        )
    shape, center = PRESETS[preset]
    return canonicalize_rig(shape, center, intrinsics)
