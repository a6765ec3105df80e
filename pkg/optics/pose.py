"""
Camera pose from vanishing points and backprojected line pixels.

Poses map world coordinates into the canonical rig frame: X_rig = R X + t.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from .exceptions import (
    AllParallelDirections,
    CatadioptricError,
    NonConvergence,
    RankDeficient,
    ValidationError,
)
from .geometry import (
    CameraRig,
    MirrorPoint,
    Pixel,
    PlueckerLine,
    forward_project_near,
    pixel_to_mirror,
    pixel_to_plucker,
    scene_direction_at,
    unit,
)
from .vanishing_points import DirectionVector, direction_from_vp

logger = logging.getLogger(__name__)

PARALLEL_TOLERANCE = 1e-9
EXHAUSTIVE_SIGNS = 4
FIT_RMS_THRESHOLD = 0.25
FIT_MAX_ITERATIONS = 100
FIT_NOISE_FACTOR = 2.0
MISSED_PIXEL_RESIDUAL = 1e3


@dataclass(frozen=True)
class DirectionCorrespondence:
    cam_dir: DirectionVector
    world_dir: DirectionVector


@dataclass(frozen=True)
class LineCorrespondence:
    world_line: PlueckerLine
    measured_rays: Tuple[PlueckerLine, ...]

    def __post_init__(self):
        if not self.measured_rays:
            raise ValidationError("a line correspondence needs at least one ray")
        object.__setattr__(self, "measured_rays", tuple(self.measured_rays))


@dataclass(frozen=True, eq=False)
class Pose:
    R: np.ndarray
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        if R.shape != (3, 3) or np.linalg.norm(R.T @ R - np.eye(3)) > 1e-10:
            raise ValidationError("pose rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-10:
            raise ValidationError("pose rotation is not proper")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float).reshape(3))

    def transform_point(self, X) -> np.ndarray:
        return self.R @ np.asarray(X, dtype=float) + self.t

    def transform_line(self, line: PlueckerLine) -> PlueckerLine:
        return line.transformed(self.R, self.t)

    def transform_direction(self, s) -> DirectionVector:
        return DirectionVector(unit(self.R @ np.asarray(s, dtype=float)))

    def inverse(self) -> "Pose":
        return Pose(self.R.T, -self.R.T @ self.t)


def _procrustes(world: np.ndarray, cam: np.ndarray) -> np.ndarray:
    H = cam.T @ world
    U, _, Vt = np.linalg.svd(H)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt)) or 1.0])
    return U @ D @ Vt


def _augmented(world: np.ndarray, cam: np.ndarray):
    if len(world) != 2:
        return world, cam
    return (
        np.vstack([world, unit(np.cross(world[0], world[1]))]),
        np.vstack([cam, unit(np.cross(cam[0], cam[1]))]),
    )


def _fit(world: np.ndarray, cam: np.ndarray) -> Tuple[np.ndarray, float]:
    world_fit, cam_fit = _augmented(world, cam)
    R = _procrustes(world_fit, cam_fit)
    residual = float(np.sum((world_fit @ R.T - cam_fit) ** 2))
    return R, residual


def _check_spread(directions: np.ndarray):
    for a, b in itertools.combinations(directions, 2):
        if np.linalg.norm(np.cross(a, b)) >= PARALLEL_TOLERANCE:
            return
    raise AllParallelDirections("rotation about the common direction is unobservable")


def rotation_procrustes(
    correspondences: Sequence[DirectionCorrespondence],
) -> np.ndarray:
    """
    Rotation R minimizing sum |R world_dir - cam_dir|^2 over the signs of the
    unoriented camera directions.

    Every sign pattern is tried for up to four correspondences; the first
    pattern with the smallest residual wins. Larger sets fix the signs of
    the remaining directions greedily against that first estimate.
    """
    if len(correspondences) < 2:
        raise ValidationError("at least two direction correspondences are needed")
    world = np.array([c.world_dir.s for c in correspondences])
    cam = np.array([c.cam_dir.s for c in correspondences])
    _check_spread(world)
    _check_spread(cam)

    head = min(len(world), EXHAUSTIVE_SIGNS)
    best = None
    for signs in itertools.product((1.0, -1.0), repeat=head):
        signed = cam[:head] * np.array(signs)[:, None]
        if head == 2 and np.linalg.norm(np.cross(*signed)) < PARALLEL_TOLERANCE:
            continue
        R, residual = _fit(world[:head], signed)
        if best is None or residual < best[1] - 1e-12:
            best = (R, residual, signs)
    R, _, signs = best
    if len(world) == head:
        return R

    signs = list(signs)
    for w, c in zip(world[head:], cam[head:]):
        signs.append(1.0 if (R @ w) @ c >= 0 else -1.0)
    R, _ = _fit(world, cam * np.array(signs)[:, None])
    return R


def translation_from_lines(
    R: np.ndarray, lines: Sequence[LineCorrespondence]
) -> np.ndarray:
    """
    Least-squares translation from rays meeting known world lines.

    A world line (s_w, m_w) moves to (R s_w, R m_w + t x R s_w); it meets the
    ray (s, m) when (R s_w x s) . t = -(<R s_w, m> + <R m_w, s>).
    """
    A, b = linear_translation_system(R, lines)
    scale = max(1.0, float(np.max(np.abs(A)))) if len(A) else 1.0
    if len(A) < 3 or np.linalg.matrix_rank(A, tol=1e-9 * scale) < 3:
        raise RankDeficient(
            "the rays do not constrain all three translation components"
        )
    return np.linalg.pinv(A) @ b


def linear_translation_system(R: np.ndarray, lines: Sequence[LineCorrespondence]):
    rows, rhs = [], []
    for correspondence in lines:
        s_w = R @ correspondence.world_line.s
        m_w = R @ correspondence.world_line.m
        for ray in correspondence.measured_rays:
            rows.append(np.cross(s_w, ray.s))
            rhs.append(-(s_w @ ray.m + m_w @ ray.s))
    return np.array(rows).reshape(-1, 3), np.array(rhs)


def absolute_pose(
    rig: CameraRig,
    vps: Sequence[Tuple[MirrorPoint, DirectionVector]],
    line_pixels: Sequence[Tuple[PlueckerLine, Sequence[Pixel]]],
) -> Pose:
    correspondences = [
        DirectionCorrespondence(
            cam_dir=direction_from_vp(rig, r)[0], world_dir=DirectionVector.of(world)
        )
        for r, world in vps
    ]
    R = rotation_procrustes(correspondences)
    lines = [
        LineCorrespondence(
            world_line=world_line,
            measured_rays=tuple(pixel_to_plucker(rig, px) for px in pixels),
        )
        for world_line, pixels in line_pixels
    ]
    return Pose(R, translation_from_lines(R, lines))


def relative_rotation(
    rig: CameraRig, vp_matches: Sequence[Tuple[MirrorPoint, MirrorPoint]]
) -> np.ndarray:
    """Rotation taking directions of the first view into the second"""
    correspondences = [
        DirectionCorrespondence(
            cam_dir=direction_from_vp(rig, second)[0],
            world_dir=direction_from_vp(rig, first)[0],
        )
        for first, second in vp_matches
    ]
    return rotation_procrustes(correspondences)


def triangulate_line(rays: Sequence[PlueckerLine]) -> Optional[PlueckerLine]:
    """
    Line meeting every ray: null vector of the stacked incidence rows
    [m_i, s_i] . (s, m) = 0 pushed back onto the Pluecker quadric.
    None when the rays leave more than a pencil of solutions.
    """
    rows = np.array([np.concatenate([ray.m, ray.s]) for ray in rays]).reshape(-1, 6)
    if len(rows) < 4:
        return None
    _, singular, Vt = np.linalg.svd(rows)
    rank = int(np.sum(singular > 1e-9 * singular[0]))
    if rank < 4:
        return None
    if rank >= 5:
        candidates = [Vt[-1]]
    else:
        candidates = _pencil_transversals(Vt[-2], Vt[-1])
    lines = []
    for v in candidates:
        s, m = v[:3], v[3:]
        norm = np.linalg.norm(s)
        if norm < 1e-12:
            continue
        s, m = s / norm, m / norm
        lines.append(PlueckerLine(s, m - (m @ s) * s))
    if not lines:
        return None
    if len(lines) > 1:
        logger.debug("Four rays admit %d transversals, keeping the first", len(lines))
    return lines[0]


def _pencil_transversals(u: np.ndarray, v: np.ndarray) -> List[np.ndarray]:
    def product(a, b):
        return a[:3] @ b[3:] + b[:3] @ a[3:]

    quadratic = np.array([product(v, v) / 2.0, product(u, v), product(u, u) / 2.0])
    roots = np.roots(quadratic) if np.any(quadratic) else []
    return [u + root.real * v for root in roots if abs(root.imag) < 1e-9]


@dataclass(frozen=True)
class LineFit:
    line: PlueckerLine
    rms: float
    iterations: int
    converged: bool


def _line_from_parameters(
    base: PlueckerLine, basis: np.ndarray, params
) -> PlueckerLine:
    s = unit(base.s + params[0] * basis[0] + params[1] * basis[1])
    q = base.closest_point + params[2] * basis[0] + params[3] * basis[1]
    return PlueckerLine.through(q, s)


def _image_residuals(rig, line, rays, seeds, pixels):
    residuals = []
    for ray, seed, px in zip(rays, seeds, pixels):
        X = line.nearest_point_to_line(ray)
        try:
            _, image = forward_project_near(rig, X, seed)
            residuals.extend([image.u - px.u, image.v - px.v])
        except CatadioptricError:
            residuals.extend([MISSED_PIXEL_RESIDUAL, MISSED_PIXEL_RESIDUAL])
    return np.array(residuals)


def fit_line_to_pixels(
    rig: CameraRig,
    pixels: Sequence[Pixel],
    init: Optional[PlueckerLine] = None,
    threshold: float = FIT_RMS_THRESHOLD,
    max_iterations: int = FIT_MAX_ITERATIONS,
    noise: float = 0.0,
    strict: bool = False,
) -> LineFit:
    """
    3D line whose image best matches `pixels`.

    The line is moved in a local 4-parameter chart around the initial
    estimate. Each pixel's residual is the image of the line point closest to
    that pixel's ray, found by a warm-started reflection solve.

    A fit counts as converged when its RMS is within
    threshold + FIT_NOISE_FACTOR * noise, where noise is the expected pixel
    standard deviation. With strict=True a fit that did not converge raises
    NonConvergence instead of being returned.
    """
    if len(pixels) < 4:
        raise ValidationError("a line fit needs at least four pixels")
    if noise < 0:
        raise ValidationError("pixel noise must be non-negative")
    rays = [pixel_to_plucker(rig, px) for px in pixels]
    seeds = [pixel_to_mirror(rig, px).r for px in pixels]
    init = init or triangulate_line(rays)
    if init is None:
        if strict:
            raise NonConvergence("rays do not determine a line")
        logger.warning("Rays do not determine a line, no fit attempted")
        fallback = PlueckerLine.through(seeds[0], scene_direction_at(rig, seeds[0]))
        return LineFit(fallback, float("inf"), 0, False)

    helper = np.eye(3)[np.argmin(np.abs(init.s))]
    first = unit(np.cross(init.s, helper))
    basis = np.array([first, np.cross(init.s, first)])

    def residual(params):
        line = _line_from_parameters(init, basis, params)
        return _image_residuals(rig, line, rays, seeds, pixels)

    result = least_squares(
        residual,
        np.zeros(4),
        method="lm",
        xtol=1e-12,
        ftol=1e-12,
        max_nfev=5 * max_iterations,
    )
    line = _line_from_parameters(init, basis, result.x)
    rms = float(np.sqrt(np.mean(result.fun**2)))
    bound = threshold + FIT_NOISE_FACTOR * noise
    converged = bool(result.status > 0 and rms <= bound)
    if not converged:
        if strict:
            raise NonConvergence(
                f"line fit stopped at {rms:.3f} px RMS above {bound:.3f} px"
            )
        logger.debug("Line fit stopped at %.3f px RMS: %s", rms, result.message)
    return LineFit(line, rms, int(result.nfev), converged)
