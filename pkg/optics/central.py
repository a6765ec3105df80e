"""
Unified sphere model of central catadioptric rigs.

A rig is central when its pinhole sits at one focus of a two-sheet
hyperboloid or a prolate ellipsoid: every scene ray then passes through the
other focus (the effective viewpoint) and the image of a direction is a
closed-form function of that direction.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .enums import MirrorConfiguration
from .exceptions import CatadioptricError, RayMissesMirror, RigNotCentral
from .geometry import (
    CameraRig,
    MirrorPoint,
    Pixel,
    angle_between_lines,
    focal_geometry,
    unit,
)
from .vanishing_points import DirectionVector, vps_from_direction

logger = logging.getLogger(__name__)

FOCUS_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class UnifiedSphereModel:
    """
    Parameters:
    configuration: central hyperbolic or central ellipsoidal
    a, b, e: semi-axes and focal distance of the mirror
    xi, gamma: unified model distortion and scale
    epsilon: +1 when the viewing axis points from the camera to the viewpoint
    viewpoint: focus every scene ray passes through
    """

    configuration: MirrorConfiguration
    a: float
    b: float
    e: float
    xi: float
    gamma: float
    epsilon: float
    viewpoint: np.ndarray
    axis: np.ndarray
    rig: CameraRig

    @property
    def _curvature_sign(self) -> float:
        if self.configuration == MirrorConfiguration.CENTRAL_HYPERBOLIC:
            return 1.0
        return -1.0

    def ray_length(self, sigma: np.ndarray) -> float:
        """Distance from the viewpoint to the mirror along sigma"""
        cos = float(sigma @ self.axis)
        denominator = self.a - self._curvature_sign * self.e * cos
        return self.b * self.b / denominator if denominator != 0 else math.inf

    def mirror_point(self, sigma) -> Optional[MirrorPoint]:
        sigma = unit(sigma)
        t = self.ray_length(sigma)
        if not 0 < t < math.inf:
            return None
        return MirrorPoint(self.viewpoint + t * sigma)

    def project(self, sigma) -> Optional[Pixel]:
        """Image of the mirror point seen from the viewpoint along sigma"""
        sigma = unit(sigma)
        t = self.ray_length(sigma)
        if not 0 < t < math.inf:
            return None
        local = self.rig.camera_rotation @ sigma
        depth = 2.0 * self.e * self.epsilon + t * local[2]
        if depth <= 0:
            return None
        denominator = self.xi - self._curvature_sign * self.epsilon * local[2]
        m = self.epsilon * self.gamma * local[:2] / denominator
        k = self.rig.intrinsics
        return Pixel(k.fx * m[0] + k.cx, k.fy * m[1] + k.cy)

    def backproject(self, px: Pixel) -> np.ndarray:
        """Unit direction from the viewpoint to the mirror point imaged at px"""
        k = self.rig.intrinsics
        m = np.array([(px.u - k.cx) / k.fx, (px.v - k.cy) / k.fy])
        mu = self.epsilon * m / self.gamma
        mu2 = mu @ mu
        root = math.sqrt(1.0 + mu2 * (1.0 - self.xi * self.xi))
        candidates = []
        for tau in (self.xi * mu2 - root, self.xi * mu2 + root):
            tau /= 1.0 + mu2
            local_z = self._curvature_sign * self.epsilon * tau
            local = np.concatenate([mu * (self.xi - tau), [local_z]])
            sigma = unit(self.rig.camera_rotation.T @ local)
            image = self.project(sigma)
            if image is not None:
                candidates.append((image.distance_to(px), tuple(sigma)))
        if not candidates:
            raise RayMissesMirror(f"pixel ({px.u}, {px.v}) is outside the mirror image")
        return np.array(min(candidates)[1])


def unified_model(rig: CameraRig) -> UnifiedSphereModel:
    focal = focal_geometry(rig.shape)
    if focal is None:
        raise RigNotCentral("the mirror has no pair of foci on its axis")
    upper, lower = focal.foci
    scale = max(1.0, focal.e)
    if np.linalg.norm(rig.c - lower) <= FOCUS_TOLERANCE * scale:
        camera_focus, viewpoint = lower, upper
    elif np.linalg.norm(rig.c - upper) <= FOCUS_TOLERANCE * scale:
        camera_focus, viewpoint = upper, lower
    else:
        raise RigNotCentral(f"camera center {rig.c} is not at a focus of the mirror")

    a, b, e = focal.a, focal.b, focal.e
    axis = (viewpoint - camera_focus) / (2.0 * e)
    configuration = (
        MirrorConfiguration.CENTRAL_HYPERBOLIC
        if focal.kind == "hyperboloid"
        else MirrorConfiguration.CENTRAL_ELLIPSOIDAL
    )
    return UnifiedSphereModel(
        configuration=configuration,
        a=a,
        b=b,
        e=e,
        xi=2.0 * e * a / (a * a + e * e),
        gamma=b * b / (a * a + e * e),
        epsilon=float(np.sign(axis @ rig.camera_rotation[2])),
        viewpoint=viewpoint,
        axis=axis,
        rig=rig,
    )


def central_vp(rig: CameraRig, s) -> List[Tuple[MirrorPoint, Pixel]]:
    """Vanishing points of +-s on a central rig through the unified model"""
    model = unified_model(rig)
    s = DirectionVector.of(s).s
    found = []
    for sigma in (s, -s):
        r = model.mirror_point(sigma)
        px = model.project(sigma)
        if r is None or px is None:
            continue
        found.append((r, px))
    return found


def central_backproject(model: UnifiedSphereModel, px: Pixel) -> DirectionVector:
    return DirectionVector(model.backproject(px))


@dataclass(frozen=True)
class CentralDeviation:
    direction: DirectionVector
    pixel_error: float
    angle_error: float


def central_deviation(
    rig: CameraRig, nominal: CameraRig, directions: Sequence
) -> List[CentralDeviation]:
    """
    How far the exact vanishing points of `rig` are from the unified model of
    the central rig `nominal`: the pixel distance between matched vanishing
    points and the angle between each direction and the unified model's
    reading of the exact vanishing point's pixel
    """
    model = unified_model(nominal)
    deviations = []
    for s in directions:
        s = DirectionVector.of(s)
        try:
            exact = vps_from_direction(rig, s).imaged
        except CatadioptricError as e:
            logger.debug("No exact vanishing points for %s: %s", s, e)
            exact = []
        central = [px for _, px in central_vp(nominal, s)]
        if not exact or not central:
            deviations.append(CentralDeviation(s, math.inf, math.inf))
            continue
        pixel_error = max(
            min(px.distance_to(other) for _, other in exact) for px in central
        )
        angles = []
        for _, px in exact:
            try:
                angles.append(angle_between_lines(model.backproject(px), s.s))
            except RayMissesMirror:
                angles.append(math.inf)
        deviations.append(CentralDeviation(s, pixel_error, max(angles)))
    return deviations
