import math
from typing import Optional, Union

import numpy as np
from scipy.spatial.transform import Rotation

from ..exceptions import RayMissesMirror, ValidationError
from ..geometry import (
    CameraRig,
    MirrorPoint,
    MirrorShape,
    Pixel,
    pixel_to_mirror,
    project_points_to_surface,
    unit,
)
from ..vanishing_points import DirectionVector

MAX_RESAMPLES = 20


def perturb_direction(s, angle_deg: float, rng: np.random.Generator) -> DirectionVector:
    """
    Rotate s about a uniformly random perpendicular axis by a gaussian angle
    whose standard deviation is angle_deg degrees
    """
    if angle_deg < 0:
        raise ValidationError("noise angle must be non-negative")
    s = DirectionVector.of(s)
    v = rng.standard_normal(3)
    angle = rng.normal(0.0, math.radians(angle_deg))
    if angle_deg == 0:
        return s
    axis = v - (v @ s.s) * s.s
    if np.linalg.norm(axis) < 1e-12:
        axis = np.cross(s.s, np.eye(3)[np.argmin(np.abs(s.s))])
    rotation = Rotation.from_rotvec(unit(axis) * angle)
    return DirectionVector(unit(rotation.apply(s.s)))


def perturb_point(
    value: Union[Pixel, MirrorPoint],
    sigma: float,
    rng: np.random.Generator,
    shape: Optional[MirrorShape] = None,
):
    """
    Add iid gaussian noise of standard deviation sigma to every coordinate.
    Mirror points need the mirror `shape` and are moved back onto it.
    """
    if sigma < 0:
        raise ValidationError("noise level must be non-negative")
    if isinstance(value, Pixel):
        du, dv = rng.normal(0.0, sigma, size=2)
        if sigma == 0:
            return value
        return Pixel(value.u + du, value.v + dv)
    if isinstance(value, MirrorPoint):
        if shape is None:
            raise ValidationError("perturbing a mirror point needs the mirror shape")
        offset = rng.normal(0.0, sigma, size=3)
        if sigma == 0:
            return value
        return MirrorPoint(project_points_to_surface(shape, value.r + offset))
    raise ValidationError(f"cannot perturb {type(value).__name__}")


def perturb_pixel_on_mirror(
    rig: CameraRig,
    px: Pixel,
    sigma: float,
    rng: np.random.Generator,
    attempts: int = MAX_RESAMPLES,
) -> MirrorPoint:
    """
    Mirror point seen through a noisy copy of px. Noise draws whose ray
    misses the mirror are redrawn, up to `attempts` times.
    """
    for _ in range(attempts):
        try:
            return pixel_to_mirror(rig, perturb_point(px, sigma, rng))
        except RayMissesMirror:
            continue
    raise RayMissesMirror(
        f"no noisy copy of ({px.u}, {px.v}) hit the mirror in {attempts} draws"
    )
