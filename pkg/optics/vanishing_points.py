"""
Vanishing points of line directions on an axially symmetric quadric mirror.

A vanishing point of a direction s is a mirror point whose reflected camera
ray is parallel to s. Substituting x^2 from the mirror equation leaves two
polynomial conditions in (y, z): the Snell row kappa9, which is free of x,
and the reflection plane condition x kappa1 + kappa3 = 0, whose square is
kappa10. Eliminating y gives a univariate polynomial in z whose real roots
are back-substituted and filtered.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy.ndimage import minimum_filter
from scipy.optimize import least_squares

from .enums import MirrorConfiguration
from .exceptions import (
    BehindCamera,
    DegenerateDirection,
    DegenerateNormal,
    InconsistentVanishingPoint,
    NoSolution,
    ValidationError,
    ZeroPolynomial,
)
from .geometry import (
    DUPLICATE_TOLERANCE,
    CameraRig,
    MirrorPoint,
    Pixel,
    PlueckerLine,
    angle_between_lines,
    as_vector,
    focal_geometry,
    mirror_eval,
    project_to_pixel,
    scene_direction_at,
    scene_directions,
    surface_grid,
    surface_normals,
    unit,
)
from .polynomial import (
    BivariatePolynomial,
    MonomialBasis2,
    Polynomial,
    linear_eliminant,
    linear_parts,
    poly_compose_resultant,
    real_roots,
)

logger = logging.getLogger(__name__)

KAPPA9_BASIS = MonomialBasis2.of(
    (2, 0), (1, 2), (1, 1), (1, 0), (0, 3), (0, 2), (0, 1), (0, 0)
)
KAPPA10_BASIS = MonomialBasis2.of(
    (2, 2),
    (2, 1),
    (2, 0),
    (1, 2),
    (1, 1),
    (1, 0),
    (0, 4),
    (0, 3),
    (0, 2),
    (0, 1),
    (0, 0),
)

DEGENERATE_TOLERANCE = 1e-12
CANDIDATE_TOLERANCE = 1e-6
VALID_ANGLE_TOLERANCE = 1e-6
CROSS_CHECK_TOLERANCE = 1e-9
ORACLE_SEED_THRESHOLD = 0.25
ORACLE_ACCEPT_ANGLE = 1e-9
ORACLE_DUPLICATE_TOLERANCE = 1e-6
ORACLE_VALLEY_THRESHOLD = 0.05
ORACLE_VALLEY_SPACING = 2
ORACLE_MAX_SEEDS = 256

DEGREE_TABLE = {
    MirrorConfiguration.GENERAL: 10,
    MirrorConfiguration.GENERAL_AXIAL: 8,
    MirrorConfiguration.SPHERICAL_AXIAL: 4,
    MirrorConfiguration.ELLIPSOID_AXIAL: 6,
    MirrorConfiguration.CONICAL_AXIAL: 4,
    MirrorConfiguration.CYLINDRICAL_AXIAL: 4,
}


@dataclass(frozen=True, eq=False)
class DirectionVector:
    """Unit line direction; s and -s describe the same bundle of lines"""

    s: np.ndarray

    def __post_init__(self):
        s = as_vector(self.s, "direction")
        if abs(np.linalg.norm(s) - 1.0) > 1e-12:
            raise ValidationError(f"direction {s} is not unit length")
        s.flags.writeable = False
        object.__setattr__(self, "s", s)

    @classmethod
    def of(cls, value) -> "DirectionVector":
        if isinstance(value, DirectionVector):
            return value
        return cls(unit(as_vector(value, "direction")))

    def __array__(self, dtype=None):
        return np.array(self.s, dtype=dtype)

    def __neg__(self) -> "DirectionVector":
        return DirectionVector(-self.s)

    def __repr__(self):
        return "DirectionVector(%.9g, %.9g, %.9g)" % tuple(self.s)

    def angle_to(self, other) -> float:
        return angle_between_lines(self.s, np.asarray(other, dtype=float))


@dataclass(frozen=True, eq=False)
class PlaneConstraint:
    """
    x * kappa1(z) + kappa3(y, z) = 0 for every vanishing point of a direction.

    kappa1 holds [constant, z] coefficients, kappa3 holds [yz, y, z, constant].
    """

    kappa1: np.ndarray
    kappa3: np.ndarray

    @property
    def scale(self) -> float:
        return float(max(np.max(np.abs(self.kappa1)), np.max(np.abs(self.kappa3))))

    def is_degenerate(self, tol: float = DEGENERATE_TOLERANCE) -> bool:
        return np.linalg.norm(self.kappa1) < tol and np.linalg.norm(self.kappa3) < tol

    def kappa1_at(self, z):
        return self.kappa1[0] + self.kappa1[1] * z

    def kappa3_at(self, y, z):
        k = self.kappa3
        return k[0] * y * z + k[1] * y + k[2] * z + k[3]

    def residual(self, r) -> float:
        x, y, z = np.asarray(r, dtype=float)
        return float(x * self.kappa1_at(z) + self.kappa3_at(y, z))

    def is_satisfied(self, r, tol: float = CANDIDATE_TOLERANCE) -> bool:
        x, y, z = np.asarray(r, dtype=float)
        magnitude = abs(x * self.kappa1_at(z)) + abs(self.kappa3_at(y, z))
        bound = tol * magnitude + DEGENERATE_TOLERANCE * self.scale
        return abs(self.residual(r)) <= bound


@dataclass(frozen=True, eq=False)
class VanishingPointSet:
    direction: DirectionVector
    points: List[MirrorPoint] = field(default_factory=list)
    pixels: List[Optional[Pixel]] = field(default_factory=list)
    degenerate: bool = False

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index) -> MirrorPoint:
        return self.points[index]

    @property
    def imaged(self) -> List[Tuple[MirrorPoint, Pixel]]:
        return [(r, px) for r, px in zip(self.points, self.pixels) if px is not None]

    def as_array(self) -> np.ndarray:
        return np.array([r.r for r in self.points]).reshape(-1, 3)


def reflection_parts(rig: CameraRig, y, z):
    """
    The reflected ray ||n||^2 (r - c) - 2 n <r - c, n> with x^2 eliminated:
    its x component is x * delta1, the y and z components are d2 and d3.
    """
    A, B, C = rig.shape.A, rig.shape.B, rig.shape.C
    c2, c3 = rig.c[1], rig.c[2]
    nn = (A * A - A) * z * z + (A * B - B) * z + C + B * B / 4.0
    dn = C - B * z / 2.0 - c2 * y - A * c3 * z - c3 * B / 2.0
    delta1 = nn - 2.0 * dn
    d2 = nn * (y - c2) - 2.0 * y * dn
    d3 = nn * (z - c3) - (2.0 * A * z + B) * dn
    return delta1, d2, d3


def plane_constraint(rig: CameraRig, s) -> PlaneConstraint:
    s1, s2, s3 = DirectionVector.of(s).s
    A, B = rig.shape.A, rig.shape.B
    c2, c3 = rig.c[1], rig.c[2]
    kappa1 = np.array([2 * s3 * c2 - 2 * s2 * c3 - B * s2, 2 * s2 * (1 - A)])
    kappa3 = np.array(
        [
            s1 * (2 * A - 2),
            s1 * (B + 2 * c3),
            -2 * A * s1 * c2,
            -B * s1 * c2,
        ]
    )
    return PlaneConstraint(kappa1=kappa1, kappa3=kappa3)


def kappa9(rig: CameraRig, s) -> BivariatePolynomial:
    """The x-free Snell row d2 s3 - d3 s2 as a polynomial in (y, z)"""
    _, s2, s3 = DirectionVector.of(s).s

    def evaluator(y, z):
        _, d2, d3 = reflection_parts(rig, y, z)
        return d2 * s3 - d3 * s2

    return BivariatePolynomial.interpolate(evaluator, KAPPA9_BASIS).snapped()


def kappa10(rig: CameraRig, s) -> BivariatePolynomial:
    """The squared plane condition kappa3^2 + (y^2 + A z^2 + B z - C) kappa1^2"""
    constraint = plane_constraint(rig, s)
    A, B, C = rig.shape.A, rig.shape.B, rig.shape.C

    def evaluator(y, z):
        k1 = constraint.kappa1_at(z)
        omega = y * y + A * z * z + B * z - C
        return constraint.kappa3_at(y, z) ** 2 + omega * k1 * k1

    return BivariatePolynomial.interpolate(evaluator, KAPPA10_BASIS).snapped()


def _is_linear_in_y(q3: BivariatePolynomial) -> bool:
    return abs(q3[(2, 0)]) <= 1e-10 * q3.scale


def _eliminant(q4: BivariatePolynomial, q3: BivariatePolynomial) -> Polynomial:
    if not _is_linear_in_y(q3):
        return poly_compose_resultant(q4, q3)
    L, M = linear_parts(q3)
    if L.scale <= DEGENERATE_TOLERANCE * q3.scale:
        return M
    return linear_eliminant(q4, q3)


def kappa16(rig: CameraRig, s) -> Polynomial:
    """Univariate polynomial in z whose real roots hold every vanishing point"""
    return _eliminant(kappa10(rig, s), kappa9(rig, s))


def _solve_system(
    q4: BivariatePolynomial, q3: BivariatePolynomial
) -> List[Tuple[float, float]]:
    """Real (y, z) candidates of q3 = q4 = 0, extraneous roots included"""
    try:
        zs = real_roots(_eliminant(q4, q3))
    except ZeroPolynomial:
        raise DegenerateDirection("the eliminant vanishes identically")

    linear = _is_linear_in_y(q3)
    L, M = linear_parts(q3)
    candidates = []
    for z in zs:
        if not linear:
            ys = q3.y_roots(z)
        elif abs(L(z)) > DEGENERATE_TOLERANCE * q3.scale:
            ys = [-M(z) / L(z)]
        else:
            ys = q4.y_roots(z)
        candidates.extend((float(y), float(z)) for y in ys)
    return candidates


def _relative_residual(poly: BivariatePolynomial, y: float, z: float) -> float:
    monomials = np.abs(poly.basis.vandermonde(y, z))
    magnitude = monomials @ np.abs(poly.coeffs)
    return abs(float(poly(y, z))) / magnitude if magnitude > 0 else 0.0


def refine_vanishing_point(rig: CameraRig, r0, s) -> np.ndarray:
    """Polish a surface point so that its reflected ray is parallel to +-s"""
    s = DirectionVector.of(s).s

    def residual(r):
        n = surface_normals(rig.shape, r)
        d = scene_direction_at(rig, r) if np.linalg.norm(n) > 0 else np.zeros(3)
        surface = mirror_eval(rig.shape, r) / (2.0 * max(np.linalg.norm(n), 1e-12))
        return np.concatenate([[surface], np.cross(d, s)])

    try:
        result = least_squares(
            residual,
            np.asarray(r0, dtype=float),
            method="lm",
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
            max_nfev=200,
        )
    except (DegenerateNormal, ValidationError) as e:
        raise NoSolution(f"refinement from {r0} failed: {e}")
    if not np.all(np.isfinite(result.x)):
        raise NoSolution(f"refinement from {r0} diverged")
    return result.x


def filter_valid(
    rig: CameraRig, candidates: Sequence, s, tol: float = VALID_ANGLE_TOLERANCE
) -> List[MirrorPoint]:
    """
    Keep candidates whose reflected ray is parallel to +-s and that lie on the
    side of the mirror facing the camera
    """
    s = DirectionVector.of(s).s
    valid = []
    for candidate in candidates:
        r = np.asarray(candidate, dtype=float)
        try:
            angle = angle_between_lines(scene_direction_at(rig, r), s)
        except (DegenerateNormal, ValidationError):
            continue
        if angle > tol:
            logger.debug("Rejecting %s: reflected ray is %.3e rad off", r, angle)
            continue
        if not rig.is_facing(r):
            logger.debug("Rejecting %s: mirror faces away from the camera", r)
            continue
        if not isinstance(candidate, MirrorPoint):
            candidate = MirrorPoint(r)
        valid.append(candidate)
    return valid


def _dedupe(points: List[np.ndarray], tol: float) -> List[np.ndarray]:
    unique: List[np.ndarray] = []
    for r in sorted(points, key=lambda v: tuple(np.round(v, 12))):
        if all(np.linalg.norm(r - other) > tol for other in unique):
            unique.append(r)
    return unique


def _with_pixels(
    rig: CameraRig, direction: DirectionVector, points, degenerate: bool = False
) -> VanishingPointSet:
    pixels = []
    for r in points:
        try:
            pixels.append(project_to_pixel(rig, r.r))
        except BehindCamera:
            pixels.append(None)
    return VanishingPointSet(
        direction=direction, points=list(points), pixels=pixels, degenerate=degenerate
    )


def _meridian(rig: CameraRig) -> BivariatePolynomial:
    coeffs = np.zeros(len(KAPPA10_BASIS))
    for exponent, value in (
        ((2, 0), 1.0),
        ((0, 2), rig.shape.A),
        ((0, 1), rig.shape.B),
        ((0, 0), -rig.shape.C),
    ):
        coeffs[KAPPA10_BASIS.index(*exponent)] = value
    return BivariatePolynomial(KAPPA10_BASIS, coeffs)


def _degenerate_vanishing_points(rig: CameraRig, s: DirectionVector):
    """
    Symmetry representatives of a continuum of vanishing points: the solutions
    of the Snell row on the meridian x = 0
    """
    q3 = kappa9(rig, s)
    if q3.is_zero():
        raise DegenerateDirection(f"every mirror point is a vanishing point of {s}")
    candidates = [np.array([0.0, y, z]) for y, z in _solve_system(_meridian(rig), q3)]
    representatives = filter_valid(rig, _dedupe(candidates, DUPLICATE_TOLERANCE), s)
    if not representatives:
        raise DegenerateDirection(f"direction {s} has no visible representative")
    logger.debug("Direction %s is degenerate for this rig", s)
    return _with_pixels(rig, s, representatives, degenerate=True)


def vps_from_direction(rig: CameraRig, s) -> VanishingPointSet:
    s = DirectionVector.of(s)
    constraint = plane_constraint(rig, s)
    if constraint.is_degenerate():
        return _degenerate_vanishing_points(rig, s)

    q3 = kappa9(rig, s)
    q4 = kappa10(rig, s)
    if q3.is_zero():
        raise DegenerateDirection(f"the Snell row vanishes for direction {s}")

    A, B, C = rig.shape.A, rig.shape.B, rig.shape.C
    candidates = []
    for y, z in _solve_system(q4, q3):
        x2 = C - y * y - A * z * z - B * z
        if x2 < -CANDIDATE_TOLERANCE * max(1.0, abs(C), y * y, abs(A) * z * z):
            continue
        x = math.sqrt(max(x2, 0.0))
        for r in {(x, y, z), (-x, y, z)}:
            r = np.array(r)
            if not constraint.is_satisfied(r):
                logger.debug("Rejecting extraneous root %s of the squared system", r)
                continue
            if _relative_residual(q3, y, z) > CANDIDATE_TOLERANCE:
                continue
            candidates.append(r)

    refined = []
    for r in candidates:
        try:
            refined.append(refine_vanishing_point(rig, r, s))
        except NoSolution as e:
            logger.debug(str(e))
    points = filter_valid(rig, _dedupe(refined, DUPLICATE_TOLERANCE), s)
    return _with_pixels(rig, s, points)


def _closed_form_direction(rig: CameraRig, r: np.ndarray) -> np.ndarray:
    """
    Direction whose vanishing point is r from the linear Snell row
    a1 s2 + a2 s3 = 0 and the squared plane condition
    """
    A, B, C = rig.shape.A, rig.shape.B, rig.shape.C
    c2, c3 = rig.c[1], rig.c[2]
    x, y, z = r
    _, d2, d3 = reflection_parts(rig, y, z)
    a1, a2 = -d3, d2
    alpha = -2 * c3 - B + 2 * (1 - A) * z
    beta = 2 * c2
    gamma = (2 * A - 2) * y * z + (B + 2 * c3) * y - 2 * A * c2 * z - B * c2
    x2 = C - y * y - A * z * z - B * z
    scale = max(1.0, abs(alpha), abs(beta), abs(d2), abs(d3))

    if abs(gamma) <= 1e-9 * scale:
        raise DegenerateDirection(
            "the plane condition does not fix the first component"
        )
    if max(abs(a1), abs(a2)) <= DEGENERATE_TOLERANCE * scale:
        raise DegenerateDirection("the Snell row vanishes at this point")

    g2 = gamma * gamma
    if abs(a2) >= abs(a1):
        k = -a1 / a2
        denominator = g2 * (1 + k * k) + x2 * (alpha + beta * k) ** 2
        s2 = math.sqrt(max(0.0, g2 / denominator))
        s3 = k * s2
    else:
        k = -a2 / a1
        denominator = g2 * (1 + k * k) + x2 * (alpha * k + beta) ** 2
        s3 = math.sqrt(max(0.0, g2 / denominator))
        s2 = k * s3
    squared = g2 / denominator
    if not -1e-9 <= squared <= 1.0 + 1e-9:
        raise InconsistentVanishingPoint(
            f"{r} is not the vanishing point of any direction"
        )
    s1 = -x * (s2 * alpha + s3 * beta) / gamma
    s = np.array([s1, s2, s3])
    if abs(np.linalg.norm(s) - 1.0) > 1e-6:
        raise InconsistentVanishingPoint(f"closed form at {r} is not a unit direction")
    return unit(s)


def direction_from_vp(rig: CameraRig, r) -> Tuple[DirectionVector, DirectionVector]:
    """
    The +- pair of line directions vanishing at the mirror point r, oriented
    like the reflected camera ray first
    """
    r = as_vector(r, "vanishing point")
    scale = max(1.0, abs(rig.shape.C), float(r @ r))
    if abs(mirror_eval(rig.shape, r)) > 1e-6 * scale:
        raise InconsistentVanishingPoint(f"{r} is not on the mirror")
    geometric = scene_direction_at(rig, r)
    try:
        s = _closed_form_direction(rig, r)
        if angle_between_lines(s, geometric) > CROSS_CHECK_TOLERANCE:
            logger.debug(
                "Closed form direction at %s is %.3e rad off, using the reflected ray",
                r,
                angle_between_lines(s, geometric),
            )
            s = geometric
    except (DegenerateDirection, InconsistentVanishingPoint, ZeroDivisionError) as e:
        logger.debug("Using the reflected ray at %s: %s", r, e)
        s = geometric
    if s @ geometric < 0:
        s = -s
    s = DirectionVector(unit(s))
    return s, -s


def line_parameter_at(rig: CameraRig, line: PlueckerLine, r) -> float:
    """
    Parameter lambda of the point closest_point + lambda s of `line` whose
    reflection is seen at r; infinite when r is the line's vanishing point
    """
    r = as_vector(r, "mirror point")
    d = scene_direction_at(rig, r)
    across = np.cross(d, line.s)
    offset = np.cross(d, line.closest_point - r)
    denominator = across @ across
    if denominator < 1e-30:
        return math.inf
    return float(-(offset @ across) / denominator)


def _valley_cells(score: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Low-score cells at least ORACLE_VALLEY_SPACING apart, best first; two
    vanishing points near a fold can share one basin of the score
    """
    n_azimuth = score.shape[1]
    cells = np.argwhere(score < ORACLE_VALLEY_THRESHOLD)
    cells = cells[np.argsort(score[tuple(cells.T)], kind="stable")]
    chosen: List[np.ndarray] = []
    for cell in cells:
        if len(chosen) >= ORACLE_MAX_SEEDS:
            break
        if chosen:
            delta = np.abs(np.asarray(chosen) - cell)
            delta[:, 1] = np.minimum(delta[:, 1], n_azimuth - delta[:, 1])
            if np.any(delta.max(axis=1) < ORACLE_VALLEY_SPACING):
                continue
        chosen.append(cell)
    rows = np.array([c[0] for c in chosen], dtype=int)
    columns = np.array([c[1] for c in chosen], dtype=int)
    return rows, columns


def vp_oracle(
    rig: CameraRig,
    s,
    grid_size: Optional[int] = None,
    limit: Optional[float] = None,
) -> List[MirrorPoint]:
    """
    Brute-force vanishing points: local minima and low valley cells of the
    angle between the reflected ray and +-s over an (azimuth, z) grid of the
    camera-facing mirror, each polished by a local solve
    """
    s = DirectionVector.of(s).s
    size = grid_size or getattr(settings, "ORACLE_GRID_SIZE", 360)
    limit = limit or getattr(settings, "MIRROR_SEARCH_LIMIT", 5.0)
    grid = surface_grid(rig.shape, size, size, limit)

    with np.errstate(invalid="ignore", divide="ignore"):
        normals = surface_normals(rig.shape, grid)
        facing = np.einsum("...i,...i->...", normals, rig.c - grid) > 0
        score = np.linalg.norm(np.cross(scene_directions(rig, grid), s), axis=-1)
    score[~facing | ~np.isfinite(score)] = np.inf
    minima = score == minimum_filter(score, size=3, mode=("nearest", "wrap"))
    candidates = np.concatenate(
        [grid[minima & (score < ORACLE_SEED_THRESHOLD)], grid[_valley_cells(score)]]
    )
    seeds = np.unique(np.round(candidates, 12), axis=0)

    found = []
    for seed in seeds:
        try:
            r = refine_vanishing_point(rig, seed, s)
        except NoSolution:
            continue
        if abs(r[2]) > limit or abs(mirror_eval(rig.shape, r)) > 1e-9:
            continue
        if not rig.is_facing(r):
            continue
        if angle_between_lines(scene_direction_at(rig, r), s) > ORACLE_ACCEPT_ANGLE:
            continue
        found.append(r)
    return [MirrorPoint(r) for r in _dedupe(found, ORACLE_DUPLICATE_TOLERANCE)]


def classify_configuration(rig: CameraRig) -> MirrorConfiguration:
    shape = rig.shape
    focal = focal_geometry(shape)
    if focal is not None:
        for focus in focal.foci:
            if np.linalg.norm(rig.c - focus) <= 1e-9 * max(1.0, np.linalg.norm(focus)):
                if focal.kind == "hyperboloid":
                    return MirrorConfiguration.CENTRAL_HYPERBOLIC
                return MirrorConfiguration.CENTRAL_ELLIPSOIDAL
    if not rig.is_axial:
        return MirrorConfiguration.GENERAL
    if shape.A == 1 and shape.B == 0 and shape.C > 0:
        return MirrorConfiguration.SPHERICAL_AXIAL
    if shape.A == 0 and shape.C == 0:
        return MirrorConfiguration.ELLIPSOID_AXIAL
    if shape.B == 0 and shape.C == 0:
        return MirrorConfiguration.CONICAL_AXIAL
    if shape.A == 0 and shape.B == 0:
        return MirrorConfiguration.CYLINDRICAL_AXIAL
    return MirrorConfiguration.GENERAL_AXIAL


def expected_degree(configuration: MirrorConfiguration) -> Optional[int]:
    """
    Degree of kappa16 for the configuration; the conical row counts the
    polynomial left after dividing out its roots at z = 0. Central rows have
    no fixed entry.
    """
    return DEGREE_TABLE.get(configuration)
