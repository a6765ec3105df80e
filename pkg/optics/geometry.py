"""
Quadric-of-revolution mirrors, the catadioptric camera rig and the geometric
primitives every analytic result is checked against.

All points are expressed in the canonical rig frame: the mirror axis is the
z-axis and the perspective camera center lies in the x = 0 plane.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy.optimize import least_squares

from .exceptions import (
    BehindCamera,
    DegenerateNormal,
    NoSolution,
    RayMissesMirror,
    ValidationError,
)

logger = logging.getLogger(__name__)

SURFACE_TOLERANCE = 1e-9
SNELL_TOLERANCE = 1e-8
DUPLICATE_TOLERANCE = 1e-7


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise ValidationError(f"cannot normalize vector {v}")
    return v / norm


def as_vector(value, name: str = "vector") -> np.ndarray:
    v = np.asarray(value, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ValidationError(f"{name} must have 3 components, got {value}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} must be finite, got {value}")
    return v


def _frozen_array(value) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class MirrorShape:
    """Quadric of revolution x^2 + y^2 + A z^2 + B z - C = 0 about the z-axis"""

    A: float
    B: float
    C: float

    def __post_init__(self):
        for name in ("A", "B", "C"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"mirror coefficient {name} must be finite")
            object.__setattr__(self, name, value)
        if not self.z_intervals(limit=math.inf):
            raise ValidationError(
                f"mirror A={self.A}, B={self.B}, C={self.C} describes an empty surface"
            )

    @classmethod
    def spherical(cls, radius: float = 1.0) -> "MirrorShape":
        if radius <= 0:
            raise ValidationError("sphere radius must be positive")
        return cls(A=1.0, B=0.0, C=radius * radius)

    @classmethod
    def ellipsoid_axial(cls, B: float) -> "MirrorShape":
        """The A = 0, C = 0 row of the degree table"""
        if B == 0:
            raise ValidationError("B must be nonzero when A = C = 0")
        return cls(A=0.0, B=B, C=0.0)

    @classmethod
    def conical(cls, A: float) -> "MirrorShape":
        if A >= 0:
            raise ValidationError("a real cone needs A < 0")
        return cls(A=A, B=0.0, C=0.0)

    @classmethod
    def cylindrical(cls, radius: float = 1.0) -> "MirrorShape":
        if radius <= 0:
            raise ValidationError("cylinder radius must be positive")
        return cls(A=0.0, B=0.0, C=radius * radius)

    @classmethod
    def central_hyperboloid(cls, a: float, b: float) -> "MirrorShape":
        """Two-sheet hyperboloid z^2/a^2 - (x^2 + y^2)/b^2 = 1"""
        if a <= 0 or b <= 0:
            raise ValidationError("hyperboloid semi-axes must be positive")
        return cls(A=-(b * b) / (a * a), B=0.0, C=-(b * b))

    @property
    def center_z(self) -> float:
        return -self.B / (2.0 * self.A) if self.A != 0 else 0.0

    def z_intervals(self, limit: float) -> List[Tuple[float, float]]:
        """
        Intervals of z where the surface has real points (A z^2 + B z - C <= 0),
        clipped to [-limit, limit].
        """
        A, B, C = self.A, self.B, self.C
        if A == 0 and B == 0:
            raw = [(-math.inf, math.inf)] if C >= 0 else []
        elif A == 0:
            raw = [(-math.inf, C / B)] if B > 0 else [(C / B, math.inf)]
        else:
            disc = B * B + 4.0 * A * C
            if disc < 0:
                raw = [(-math.inf, math.inf)] if A < 0 else []
            else:
                sq = math.sqrt(disc)
                z1, z2 = sorted(((-B - sq) / (2 * A), (-B + sq) / (2 * A)))
                raw = [(z1, z2)] if A > 0 else [(-math.inf, z1), (z2, math.inf)]
        intervals = []
        for lo, hi in raw:
            lo, hi = max(lo, -limit), min(hi, limit)
            if lo <= hi:
                intervals.append((lo, hi))
        return intervals

    def axis_roots(self) -> np.ndarray:
        """Heights where the surface meets its axis"""
        roots = np.roots([self.A, self.B, -self.C]) if self.A or self.B else []
        return np.array(sorted(z.real for z in roots if abs(z.imag) < 1e-12))

    def radius_at(self, z):
        return np.sqrt(np.maximum(0.0, self.C - self.A * z * z - self.B * z))


@dataclass(frozen=True)
class FocalGeometry:
    """Semi-axes and foci of a two-sheet hyperboloid or prolate ellipsoid"""

    kind: str
    a: float
    b: float
    e: float
    center_z: float

    @property
    def foci(self) -> Tuple[np.ndarray, np.ndarray]:
        return (
            np.array([0.0, 0.0, self.center_z + self.e]),
            np.array([0.0, 0.0, self.center_z - self.e]),
        )


def focal_geometry(shape: MirrorShape) -> Optional[FocalGeometry]:
    """
    Foci of the mirror when it is a quadric with two distinct foci on its
    axis, None otherwise (paraboloids, cones, one-sheet hyperboloids, spheres
    and oblate ellipsoids).
    """
    A = shape.A
    if A == 0:
        return None
    center_z = shape.center_z
    shifted_c = shape.C + shape.B**2 / (4.0 * A)
    if A < 0 and shifted_c < 0:
        a2, b2 = shifted_c / A, -shifted_c
        return FocalGeometry("hyperboloid", *np.sqrt([a2, b2, a2 + b2]), center_z)
    if 0 < A < 1 and shifted_c > 0:
        a2, b2 = shifted_c / A, shifted_c
        return FocalGeometry("ellipsoid", *np.sqrt([a2, b2, a2 - b2]), center_z)
    return None


@dataclass(frozen=True)
class Intrinsics:
    fx: float = 500.0
    fy: float = 500.0
    cx: float = 320.0
    cy: float = 320.0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValidationError("focal lengths must be positive")


@dataclass(frozen=True)
class Pixel:
    u: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValidationError(f"pixel ({self.u}, {self.v}) is not finite")
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))

    def __array__(self, dtype=None):
        return np.array([self.u, self.v], dtype=dtype)

    def distance_to(self, other: "Pixel") -> float:
        return math.hypot(self.u - other.u, self.v - other.v)


@dataclass(frozen=True, eq=False)
class MirrorPoint:
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", _frozen_array(as_vector(self.r, "point")))

    def __array__(self, dtype=None):
        return np.array(self.r, dtype=dtype)

    def __repr__(self):
        return "MirrorPoint(%.9g, %.9g, %.9g)" % tuple(self.r)

    @classmethod
    def on(cls, shape: MirrorShape, r, tol: float = SURFACE_TOLERANCE):
        value = mirror_eval(shape, r)
        if abs(value) > tol:
            raise ValidationError(f"point {r} is not on the mirror (residual {value})")
        return cls(r)

    @property
    def x(self) -> float:
        return float(self.r[0])

    @property
    def y(self) -> float:
        return float(self.r[1])

    @property
    def z(self) -> float:
        return float(self.r[2])


@dataclass(frozen=True, eq=False)
class PlueckerLine:
    """3D line with unit direction s and moment m = q x s"""

    s: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        s = as_vector(self.s, "line direction")
        m = as_vector(self.m, "line moment")
        if abs(np.linalg.norm(s) - 1.0) > 1e-12:
            raise ValidationError(f"line direction {s} is not unit length")
        if abs(s @ m) > 1e-12 * max(1.0, np.linalg.norm(m)):
            raise ValidationError("line direction and moment are not orthogonal")
        object.__setattr__(self, "s", _frozen_array(s))
        object.__setattr__(self, "m", _frozen_array(m))

    @classmethod
    def through(cls, point, direction) -> "PlueckerLine":
        s = unit(as_vector(direction, "line direction"))
        q = as_vector(point, "line point")
        m = np.cross(q, s)
        return cls(s, m - (m @ s) * s)

    @property
    def closest_point(self) -> np.ndarray:
        return np.cross(self.s, self.m)

    def point_at(self, lam: float) -> np.ndarray:
        return self.closest_point + lam * self.s

    def distance_to(self, p) -> float:
        p = np.asarray(p, dtype=float)
        return float(np.linalg.norm(np.cross(p, self.s) - self.m))

    def transformed(self, R: np.ndarray, t) -> "PlueckerLine":
        """The line after the rigid motion X -> R X + t"""
        s = R @ self.s
        return PlueckerLine.through(R @ self.closest_point + np.asarray(t), s)

    def nearest_point_to_line(self, other: "PlueckerLine") -> np.ndarray:
        """Point of this line closest to `other`"""
        n = np.cross(self.s, other.s)
        nn = n @ n
        q1, q2 = self.closest_point, other.closest_point
        if nn < 1e-24:
            return q1 + ((q2 - q1) @ self.s) * self.s
        lam = np.cross(q2 - q1, other.s) @ n / nn
        return q1 + lam * self.s

    def incidence(self, other: "PlueckerLine") -> float:
        """Reciprocal product; zero iff the lines are coplanar"""
        return float(self.s @ other.m + other.s @ self.m)


@dataclass(frozen=True, eq=False)
class CameraRig:
    shape: MirrorShape
    c: np.ndarray
    intrinsics: Intrinsics = field(default_factory=Intrinsics)
    world_rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        c = as_vector(self.c, "camera center")
        if c[0] != 0.0:
            raise ValidationError(
                f"camera center {c} is not canonical, use canonicalize_rig()"
            )
        R = np.asarray(self.world_rotation, dtype=float)
        if R.shape != (3, 3) or np.linalg.norm(R.T @ R - np.eye(3)) > 1e-12:
            raise ValidationError("world rotation is not orthonormal")
        if np.linalg.det(R) < 0:
            raise ValidationError("world rotation is a reflection")
        if abs(mirror_eval(self.shape, c)) <= 1e-12:
            raise ValidationError(f"camera center {c} lies on the mirror")
        object.__setattr__(self, "c", _frozen_array(c))
        object.__setattr__(self, "world_rotation", _frozen_array(R))

    @property
    def is_axial(self) -> bool:
        return abs(self.c[1]) < 1e-12

    @cached_property
    def apex(self) -> np.ndarray:
        """
        Mirror point the pinhole looks at: the axis crossing nearest to the
        camera, or the quadric's center when the axis misses the surface
        """
        roots = self.shape.axis_roots()
        if len(roots):
            z = roots[np.argmin(np.abs(roots - self.c[2]))]
        else:
            z = self.shape.center_z
        return np.array([0.0, 0.0, z])

    @cached_property
    def camera_rotation(self) -> np.ndarray:
        """Rows are the pinhole's image x, image y and viewing axes"""
        axis = self.apex - self.c
        if np.linalg.norm(axis) < 1e-12:
            axis = np.array([0.0, 0.0, -1.0])
        w = unit(axis)
        ref = np.array([1.0, 0.0, 0.0])
        if abs(ref @ w) > 0.9:
            ref = np.array([0.0, 1.0, 0.0])
        u = unit(ref - (ref @ w) * w)
        return np.vstack([u, np.cross(w, u), w])

    def is_facing(self, r) -> bool:
        r = np.asarray(r, dtype=float)
        return bool(surface_normals(self.shape, r) @ (self.c - r) > 0.0)


def surface_normals(shape: MirrorShape, r: np.ndarray) -> np.ndarray:
    n = np.array(r, dtype=float, copy=True)
    n[..., 2] = shape.A * r[..., 2] + shape.B / 2.0
    return n


def _reflect(n: np.ndarray, d: np.ndarray) -> np.ndarray:
    nn = np.sum(n * n, axis=-1, keepdims=True)
    dn = np.sum(d * n, axis=-1, keepdims=True)
    out = nn * d - 2.0 * n * dn
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def mirror_eval(shape: MirrorShape, r):
    r = np.asarray(r, dtype=float)
    x, y, z = r[..., 0], r[..., 1], r[..., 2]
    value = x * x + y * y + shape.A * z * z + shape.B * z - shape.C
    return float(value) if r.ndim == 1 else value


def mirror_normal(shape: MirrorShape, r) -> np.ndarray:
    """Unnormalized outward normal [x, y, A z + B/2]"""
    n = surface_normals(shape, as_vector(r, "mirror point"))
    if np.linalg.norm(n) < 1e-14:
        raise DegenerateNormal(f"mirror normal vanishes at {r}")
    return n


def axis_point(shape: MirrorShape, r) -> np.ndarray:
    r = as_vector(r, "mirror point")
    return np.array([0.0, 0.0, r[2] - shape.A * r[2] - shape.B / 2.0])


def reflect_direction(n, d_in) -> np.ndarray:
    n = as_vector(n, "normal")
    d_in = as_vector(d_in, "incident direction")
    if np.linalg.norm(n) == 0.0:
        raise DegenerateNormal("cannot reflect about a zero normal")
    if np.linalg.norm(d_in) == 0.0:
        raise ValidationError("cannot reflect a zero direction")
    return _reflect(n, d_in)


def scene_direction_at(rig: CameraRig, r) -> np.ndarray:
    r = as_vector(r, "mirror point")
    if np.allclose(r, rig.c, rtol=0.0, atol=1e-15):
        raise ValidationError("mirror point coincides with the camera center")
    return reflect_direction(mirror_normal(rig.shape, r), r - rig.c)


def scene_directions(rig: CameraRig, points: np.ndarray) -> np.ndarray:
    """Vectorized scene_direction_at over an array of points (..., 3)"""
    return _reflect(surface_normals(rig.shape, points), points - rig.c)


def canonicalize_rig(
    shape: MirrorShape, raw_center, intrinsics: Optional[Intrinsics] = None
) -> CameraRig:
    raw = as_vector(raw_center, "camera center")
    rho = math.hypot(raw[0], raw[1])
    if rho < 1e-15:
        R = np.eye(3)
    else:
        theta = math.pi / 2.0 - math.atan2(raw[1], raw[0])
        cos, sin = math.cos(theta), math.sin(theta)
        R = np.array([[cos, -sin, 0.0], [sin, cos, 0.0], [0.0, 0.0, 1.0]])
    c = R @ raw
    c[0] = 0.0
    c[1] = rho
    return CameraRig(
        shape=shape,
        c=c,
        intrinsics=intrinsics or Intrinsics(),
        world_rotation=R,
    )


def project_to_pixel(rig: CameraRig, r) -> Pixel:
    X = rig.camera_rotation @ (as_vector(r, "mirror point") - rig.c)
    if X[2] <= 1e-12:
        raise BehindCamera(f"point {r} is behind the camera")
    k = rig.intrinsics
    return Pixel(k.fx * X[0] / X[2] + k.cx, k.fy * X[1] / X[2] + k.cy)


def pixel_ray(rig: CameraRig, px: Pixel) -> np.ndarray:
    """Unit direction of the pinhole ray through px in the rig frame"""
    k = rig.intrinsics
    local = np.array([(px.u - k.cx) / k.fx, (px.v - k.cy) / k.fy, 1.0])
    return unit(rig.camera_rotation.T @ local)


def pixel_to_mirror(rig: CameraRig, px: Pixel) -> MirrorPoint:
    """Nearest camera-facing intersection of the pixel's ray with the mirror"""
    d = pixel_ray(rig, px)
    c = rig.c
    A, B = rig.shape.A, rig.shape.B
    qa = d[0] ** 2 + d[1] ** 2 + A * d[2] ** 2
    qb = 2.0 * (c[0] * d[0] + c[1] * d[1] + A * c[2] * d[2]) + B * d[2]
    qc = mirror_eval(rig.shape, c)
    if abs(qa) < 1e-14:
        roots = [-qc / qb] if abs(qb) > 1e-14 else []
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0:
            roots = []
        else:
            sq = math.sqrt(disc)
            roots = [(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)]
    for t in sorted(t for t in roots if t > 1e-12):
        r = c + t * d
        if rig.is_facing(r):
            return MirrorPoint(r)
    raise RayMissesMirror(f"ray through pixel ({px.u}, {px.v}) misses the mirror")


def pixel_to_plucker(rig: CameraRig, px: Pixel) -> PlueckerLine:
    return reflected_line(rig, pixel_to_mirror(rig, px).r)


def reflected_line(rig: CameraRig, r) -> PlueckerLine:
    """Scene line carrying the camera ray reflected at the mirror point r"""
    r = as_vector(r, "mirror point")
    return PlueckerLine.through(r, scene_direction_at(rig, r))


def surface_grid(
    shape: MirrorShape, n_azimuth: int, n_z: int, limit: float
) -> np.ndarray:
    """Points on the mirror sampled over (z, azimuth), shape (n_z, n_azimuth, 3)"""
    intervals = shape.z_intervals(limit)
    total = sum(hi - lo for lo, hi in intervals) or 1.0
    zs = []
    for lo, hi in intervals:
        count = max(2, int(round(n_z * (hi - lo) / total)))
        zs.append(np.linspace(lo, hi, count))
    z = np.concatenate(zs)
    phi = np.linspace(0.0, 2.0 * math.pi, n_azimuth, endpoint=False)
    rho = shape.radius_at(z)
    grid = np.empty((len(z), n_azimuth, 3))
    grid[..., 0] = rho[:, None] * np.cos(phi)[None, :]
    grid[..., 1] = rho[:, None] * np.sin(phi)[None, :]
    grid[..., 2] = z[:, None]
    return grid


def _fermat_residual(rig: CameraRig, p: np.ndarray):
    def residual(r):
        n = surface_normals(rig.shape, r)
        to_scene = p - r
        dist = np.linalg.norm(to_scene)
        out = _reflect(n, r - rig.c) - (to_scene / dist if dist > 0 else 0.0)
        surface = mirror_eval(rig.shape, r) / (2.0 * max(np.linalg.norm(n), 1e-12))
        return np.concatenate([[surface], out])

    return residual


def snell_residual(rig: CameraRig, r, p) -> float:
    r = np.asarray(r, dtype=float)
    return float(np.linalg.norm(np.cross(scene_direction_at(rig, r), unit(p - r))))


def _accept_reflection(rig: CameraRig, r: np.ndarray, p: np.ndarray, limit) -> bool:
    if not np.all(np.isfinite(r)) or abs(r[2]) > limit:
        return False
    if abs(mirror_eval(rig.shape, r)) > SURFACE_TOLERANCE or not rig.is_facing(r):
        return False
    if np.linalg.norm(p - r) < 1e-12:
        return True
    d = scene_direction_at(rig, r)
    return d @ (p - r) > 0 and snell_residual(rig, r, p) < SNELL_TOLERANCE


def _solve_reflection(rig: CameraRig, p: np.ndarray, r0: np.ndarray) -> np.ndarray:
    result = least_squares(
        _fermat_residual(rig, p),
        r0,
        method="lm",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=400,
    )
    return result.x


def forward_project_near(
    rig: CameraRig, p, r0, limit: Optional[float] = None
) -> Tuple[MirrorPoint, Pixel]:
    """Reflection point of p found by a single local solve started at r0"""
    p = as_vector(p, "scene point")
    limit = limit or getattr(settings, "MIRROR_SEARCH_LIMIT", 5.0)
    r = _solve_reflection(rig, p, np.asarray(r0, dtype=float))
    if not _accept_reflection(rig, r, p, limit):
        raise NoSolution(f"no reflection of {p} near {r0}")
    return MirrorPoint(r), project_to_pixel(rig, r)


def forward_project(
    rig: CameraRig,
    p,
    starts: Optional[int] = None,
    limit: Optional[float] = None,
) -> List[Tuple[MirrorPoint, Pixel]]:
    """
    All reflection points of the scene point p on the camera-facing mirror.

    Stationary points of the path length |r - c| + |r - p| on the mirror are
    found by multi-start local solves seeded on a (z, azimuth) grid of the
    surface. Points behind the pinhole are dropped.
    """
    p = as_vector(p, "scene point")
    starts = starts or getattr(settings, "FORWARD_PROJECTION_STARTS", 16)
    limit = limit or getattr(settings, "MIRROR_SEARCH_LIMIT", 5.0)

    seeds = surface_grid(rig.shape, starts, starts, limit).reshape(-1, 3)
    facing = np.einsum("ij,ij->i", surface_normals(rig.shape, seeds), rig.c - seeds)
    seeds = seeds[facing > 0]

    found: List[np.ndarray] = []
    for seed in seeds:
        r = _solve_reflection(rig, p, seed)
        if not _accept_reflection(rig, r, p, limit):
            continue
        if any(np.linalg.norm(r - other) < DUPLICATE_TOLERANCE for other in found):
            continue
        found.append(r)

    solutions = []
    for r in sorted(found, key=lambda v: tuple(v)):
        try:
            solutions.append((MirrorPoint(r), project_to_pixel(rig, r)))
        except BehindCamera:
            logger.debug("Dropping reflection point %s behind the camera", r)
    if not solutions:
        raise NoSolution(f"scene point {p} is not visible in the search region")
    return solutions


def project_points_to_surface(shape: MirrorShape, r, iterations: int = 50):
    """Move a point onto the mirror along the local gradient"""
    r = np.array(r, dtype=float)
    for _ in range(iterations):
        value = mirror_eval(shape, r)
        if abs(value) < 1e-13:
            break
        grad = 2.0 * surface_normals(shape, r)
        gg = grad @ grad
        if gg < 1e-24:
            raise DegenerateNormal(f"cannot project {r} onto the mirror")
        r = r - value * grad / gg
    return r


def angle_between_lines(a: Sequence[float], b: Sequence[float]) -> float:
    """Numerically stable unoriented angle, accurate for tiny angles"""
    a, b = unit(a), unit(b)
    return float(
        min(
            math.atan2(np.linalg.norm(np.cross(a, b)), a @ b),
            math.atan2(np.linalg.norm(np.cross(a, -b)), -(a @ b)),
        )
    )
