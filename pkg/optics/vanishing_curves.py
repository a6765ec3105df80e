"""
Vanishing curves: the locus of vanishing points of every direction lying in
a plane. A mirror point belongs to the curve of the plane with normal n when
its reflected camera ray is perpendicular to n, which after eliminating x^2
reads Gamma(r) = kappa20(y, z) x + kappa21(y, z) = 0.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from django.conf import settings

from .exceptions import (
    CatadioptricError,
    DegenerateNormalPlane,
    EmptyCurve,
    ResidualTooLarge,
    ValidationError,
)
from .geometry import (
    CameraRig,
    MirrorPoint,
    as_vector,
    mirror_eval,
    surface_normals,
    unit,
)
from .polynomial import BivariatePolynomial, MonomialBasis2
from .vanishing_points import DirectionVector, reflection_parts, vps_from_direction

logger = logging.getLogger(__name__)

KAPPA20_BASIS = MonomialBasis2.total_degree(2)
KAPPA21_BASIS = MonomialBasis2.total_degree(3)

CERTIFICATE_TOLERANCE = 1e-7
CORRECTOR_TOLERANCE = 1e-13
SEED_DIRECTIONS = 12
MAX_SAMPLES = 200000


@dataclass(frozen=True, eq=False)
class PlaneNormal:
    n: np.ndarray

    def __post_init__(self):
        n = as_vector(self.n, "plane normal")
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValidationError(f"plane normal {n} is not unit length")
        n.flags.writeable = False
        object.__setattr__(self, "n", n)

    @classmethod
    def of(cls, value) -> "PlaneNormal":
        if isinstance(value, PlaneNormal):
            return value
        return cls(unit(as_vector(value, "plane normal")))

    def in_plane(self, theta: float) -> DirectionVector:
        first, second = perpendicular_basis(self)
        return DirectionVector(
            unit(math.cos(theta) * first.s + math.sin(theta) * second.s)
        )


def perpendicular_basis(n) -> Tuple[DirectionVector, DirectionVector]:
    """Two independent unit directions perpendicular to n"""
    n = PlaneNormal.of(n).n
    candidates = [np.cross(n, axis) for axis in np.eye(3)]
    order = sorted(range(3), key=lambda i: -np.linalg.norm(candidates[i]))
    return tuple(DirectionVector(unit(candidates[i])) for i in order[:2])


def _snap(coeffs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    coeffs = coeffs.copy()
    coeffs[np.abs(coeffs) <= tol] = 0.0
    return coeffs


@dataclass(frozen=True, eq=False)
class GammaSurface:
    normal: PlaneNormal
    kappa20: BivariatePolynomial
    kappa21: BivariatePolynomial

    def __call__(self, r) -> float:
        x, y, z = np.asarray(r, dtype=float)
        return float(self.kappa20(y, z) * x + self.kappa21(y, z))

    def gradient(self, r) -> np.ndarray:
        x, y, z = np.asarray(r, dtype=float)
        return np.array(
            [
                float(self.kappa20(y, z)),
                float(x * self.kappa20.partial_y(y, z) + self.kappa21.partial_y(y, z)),
                float(x * self.kappa20.partial_z(y, z) + self.kappa21.partial_z(y, z)),
            ]
        )


def gamma_surface(rig: CameraRig, n, certify: bool = True) -> GammaSurface:
    """
    Gamma for the plane with normal n, interpolated from <w, d(r)> where
    w = s(0) x s(1) spans the normal of the two basis directions.
    Coefficients are scaled so the largest one is 1.
    """
    normal = PlaneNormal.of(n)
    first, second = perpendicular_basis(normal)
    w = np.cross(second.s, first.s)

    def x_part(y, z):
        delta1, _, _ = reflection_parts(rig, y, z)
        return delta1 * w[0]

    def rest(y, z):
        _, d2, d3 = reflection_parts(rig, y, z)
        return d2 * w[1] + d3 * w[2]

    kappa20 = BivariatePolynomial.interpolate(x_part, KAPPA20_BASIS)
    kappa21 = BivariatePolynomial.interpolate(rest, KAPPA21_BASIS)
    scale = max(kappa20.scale, kappa21.scale)
    if scale < 1e-12:
        raise DegenerateNormalPlane(
            f"no reflected ray depends on the plane {normal.n}"
        )
    surface = GammaSurface(
        normal=normal,
        kappa20=BivariatePolynomial(KAPPA20_BASIS, _snap(kappa20.coeffs / scale)),
        kappa21=BivariatePolynomial(KAPPA21_BASIS, _snap(kappa21.coeffs / scale)),
    )
    if certify:
        certify_gamma_surface(rig, surface)
    return surface


def certify_gamma_surface(
    rig: CameraRig, surface: GammaSurface, samples: int = 24
) -> float:
    """Largest |Gamma| over the vanishing points of sampled in-plane directions"""
    worst = 0.0
    for theta in np.linspace(0.0, math.pi, samples, endpoint=False):
        s = surface.normal.in_plane(theta)
        try:
            vps = vps_from_direction(rig, s)
        except CatadioptricError as e:
            logger.debug("Skipping in-plane direction %s: %s", s, e)
            continue
        if vps.degenerate:
            continue
        for r in vps:
            worst = max(worst, abs(surface(r.r)))
    if worst > CERTIFICATE_TOLERANCE:
        raise ResidualTooLarge(f"vanishing points leave Gamma at {worst:.3e}")
    return worst


@dataclass(frozen=True, eq=False)
class VanishingCurve:
    normal: PlaneNormal
    segments: Tuple[np.ndarray, ...]
    closed_segments: Tuple[bool, ...]
    arc_step: float

    @property
    def closed(self) -> bool:
        return bool(self.segments) and all(self.closed_segments)

    @property
    def samples(self) -> List[MirrorPoint]:
        return [MirrorPoint(r) for segment in self.segments for r in segment]

    def as_array(self) -> np.ndarray:
        return np.concatenate(self.segments) if self.segments else np.zeros((0, 3))

    def _edges(self):
        for segment, closed in zip(self.segments, self.closed_segments):
            if len(segment) == 1:
                yield segment[0], segment[0]
                continue
            ends = np.vstack([segment[1:], segment[:1]]) if closed else segment[1:]
            for start, end in zip(segment, ends):
                yield start, end

    def distance_to(self, p) -> float:
        """Distance from p to the traced polyline"""
        p = np.asarray(p, dtype=float)
        best = math.inf
        for start, end in self._edges():
            edge = end - start
            length2 = edge @ edge
            t = 0.0
            if length2 > 0:
                t = min(1.0, max(0.0, (p - start) @ edge / length2))
            best = min(best, float(np.linalg.norm(start + t * edge - p)))
        return best


class _Tracer:
    def __init__(self, rig: CameraRig, surface: GammaSurface, arc_step: float, limit):
        self.rig = rig
        self.surface = surface
        self.step = arc_step
        self.limit = limit

    def residual(self, r) -> np.ndarray:
        return np.array([mirror_eval(self.rig.shape, r), self.surface(r)])

    def jacobian(self, r) -> np.ndarray:
        return np.vstack(
            [2.0 * surface_normals(self.rig.shape, r), self.surface.gradient(r)]
        )

    def tangent(self, r) -> Optional[np.ndarray]:
        J = self.jacobian(r)
        t = np.cross(J[0], J[1])
        norm = np.linalg.norm(t)
        if norm < 1e-12 * max(1.0, np.linalg.norm(J[0]) * np.linalg.norm(J[1])):
            return None
        return t / norm

    def correct(self, r, iterations: int = 20) -> Optional[np.ndarray]:
        """Minimum-norm Gauss-Newton projection onto both implicit surfaces"""
        for _ in range(iterations):
            F = self.residual(r)
            if np.max(np.abs(F)) < CORRECTOR_TOLERANCE:
                return r
            J = self.jacobian(r)
            JJt = J @ J.T
            if abs(np.linalg.det(JJt)) < 1e-24:
                return None
            r = r - J.T @ np.linalg.solve(JJt, F)
        return r if np.max(np.abs(self.residual(r))) < 1e-11 else None

    def inside(self, r) -> bool:
        return abs(r[2]) <= self.limit and self.rig.is_facing(r)

    def march(self, start: np.ndarray, orientation: float):
        points = [start]
        previous = self.tangent(start)
        if previous is None:
            return points, False
        previous = orientation * previous
        r = start
        while len(points) < MAX_SAMPLES:
            t = self.tangent(r)
            if t is None:
                logger.debug("Curve is singular at %s", r)
                return points, False
            if t @ previous < 0:
                t = -t
            h = 0.9 * self.step
            candidate = None
            while h > 1e-4 * self.step:
                candidate = self.correct(r + h * t)
                if candidate is not None:
                    moved = np.linalg.norm(candidate - r)
                    if 0.25 * h < moved < self.step:
                        break
                candidate = None
                h /= 2.0
            if candidate is None or not self.inside(candidate):
                return points, False
            if len(points) > 3 and np.linalg.norm(candidate - start) < self.step:
                return points, True
            points.append(candidate)
            previous, r = t, candidate
        logger.warning("Stopped tracing after %d samples", MAX_SAMPLES)
        return points, False


def trace_vanishing_curve(
    rig: CameraRig,
    n,
    arc_step: float = 1e-2,
    limit: Optional[float] = None,
    surface: Optional[GammaSurface] = None,
) -> VanishingCurve:
    """
    Trace the intersection of Gamma = 0 with the camera-facing mirror.

    Seeds are the vanishing points of a fan of in-plane directions. Each seed
    not already on a traced branch is marched both ways with a tangent
    predictor and a Gauss-Newton corrector until the branch closes or leaves
    the facing part of the search region.
    """
    if arc_step <= 0:
        raise ValidationError("arc step must be positive")
    limit = limit or getattr(settings, "MIRROR_SEARCH_LIMIT", 5.0)
    surface = surface or gamma_surface(rig, n)
    tracer = _Tracer(rig, surface, arc_step, limit)

    seeds = []
    for theta in np.linspace(0.0, math.pi, SEED_DIRECTIONS, endpoint=False):
        try:
            vps = vps_from_direction(rig, surface.normal.in_plane(theta))
        except CatadioptricError:
            continue
        if not vps.degenerate:
            seeds.extend(r.r for r in vps if abs(r.z) <= limit)
    if not seeds:
        raise EmptyCurve(
            f"no vanishing points of the plane {surface.normal.n} are visible"
        )

    segments: List[np.ndarray] = []
    closed_segments: List[bool] = []
    for seed in seeds:
        partial = VanishingCurve(
            surface.normal, tuple(segments), tuple(closed_segments), arc_step
        )
        if segments and partial.distance_to(seed) < 2.0 * arc_step:
            continue
        start = tracer.correct(np.array(seed, dtype=float))
        if start is None:
            continue
        forward, closed = tracer.march(start, 1.0)
        if not closed:
            backward, _ = tracer.march(start, -1.0)
            forward = backward[:0:-1] + forward
        segments.append(np.array(forward))
        closed_segments.append(closed)
        logger.debug(
            "Traced %s segment of %d samples",
            "closed" if closed else "open",
            len(forward),
        )
    return VanishingCurve(
        surface.normal, tuple(segments), tuple(closed_segments), arc_step
    )


def on_curve(
    rig: CameraRig,
    n,
    r,
    tol: float = 1e-9,
    surface: Optional[GammaSurface] = None,
) -> bool:
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        return False
    surface = surface or gamma_surface(rig, n, certify=False)
    if abs(mirror_eval(rig.shape, r)) >= tol or abs(surface(r)) >= tol:
        return False
    return rig.is_facing(r)
