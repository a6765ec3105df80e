"""
Synthetic scenes built backwards from the image: every scene point is placed
on a reflected camera ray, so its pixel is known without a multi-start
reflection search.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy.spatial.transform import Rotation

from ..exceptions import CatadioptricError, NoSolution, ValidationError
from ..geometry import (
    CameraRig,
    MirrorPoint,
    Pixel,
    PlueckerLine,
    angle_between_lines,
    forward_project_near,
    pixel_to_mirror,
    project_to_pixel,
    scene_direction_at,
    surface_grid,
    surface_normals,
    unit,
)
from ..pose import Pose
from ..vanishing_points import DirectionVector

logger = logging.getLogger(__name__)

POOL_SIZE = 48
MIN_DIRECTION_ANGLE = np.radians(15.0)
MAX_ATTEMPTS = 50


def gen_parallel_bundle(
    direction, count: int, spread: float, rng: np.random.Generator, center=None
) -> List[PlueckerLine]:
    """`count` lines of a common direction crossing the plane through
    `center` perpendicular to it within `spread` of `center`"""
    if count < 1:
        raise ValidationError("a bundle needs at least one line")
    s = DirectionVector.of(direction).s
    center = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    helper = np.eye(3)[np.argmin(np.abs(s))]
    first = unit(np.cross(s, helper))
    second = np.cross(s, first)
    offsets = rng.uniform(-spread, spread, size=(count, 2))
    return [
        PlueckerLine.through(center + a * first + b * second, s) for a, b in offsets
    ]


def visible_pool(rig: CameraRig, size: int = POOL_SIZE, limit=None) -> np.ndarray:
    """
    Mirror points on a surface grid that the pinhole sees unoccluded inside
    the image frame
    """
    limit = limit or getattr(settings, "MIRROR_SEARCH_LIMIT", 5.0)
    k = rig.intrinsics
    grid = surface_grid(rig.shape, size, size, limit).reshape(-1, 3)
    with np.errstate(invalid="ignore"):
        facing = np.einsum("ij,ij->i", surface_normals(rig.shape, grid), rig.c - grid)
    pool = []
    for r in grid[facing > 0]:
        try:
            px = project_to_pixel(rig, r)
            if not (0 <= px.u <= 2 * k.cx and 0 <= px.v <= 2 * k.cy):
                continue
            if np.linalg.norm(pixel_to_mirror(rig, px).r - r) > 1e-6:
                continue
        except CatadioptricError:
            continue
        pool.append(r)
    if not pool:
        raise NoSolution("the camera sees no part of the mirror")
    return np.array(pool)


def sample_mirror_point(
    rig: CameraRig, pool: np.ndarray, rng: np.random.Generator, jitter: float = 2.0
) -> Tuple[MirrorPoint, Pixel]:
    """A visible mirror point near a random pool point and its pixel"""
    for _ in range(MAX_ATTEMPTS):
        seed = pool[rng.integers(len(pool))]
        du, dv = rng.uniform(-jitter, jitter, size=2)
        try:
            px = project_to_pixel(rig, seed)
            r = pixel_to_mirror(rig, Pixel(px.u + du, px.v + dv))
            return r, project_to_pixel(rig, r.r)
        except CatadioptricError:
            continue
    raise NoSolution("no visible mirror point found near the sampled pixels")


def sample_spread_points(
    rig: CameraRig,
    pool: np.ndarray,
    rng: np.random.Generator,
    count: int,
    min_angle: float = MIN_DIRECTION_ANGLE,
) -> List[MirrorPoint]:
    """Mirror points whose reflected rays are pairwise at least min_angle apart"""
    points: List[MirrorPoint] = []
    directions: List[np.ndarray] = []
    for _ in range(MAX_ATTEMPTS * count):
        r, _ = sample_mirror_point(rig, pool, rng)
        d = scene_direction_at(rig, r.r)
        if any(angle_between_lines(d, other) < min_angle for other in directions):
            continue
        points.append(r)
        directions.append(d)
        if len(points) == count:
            return points
    raise NoSolution(f"cannot find {count} well separated vanishing points")


def random_pose(rng: np.random.Generator, translation: float = 1.0) -> Pose:
    R = Rotation.random(None, rng).as_matrix()
    return Pose(R, rng.uniform(-translation, translation, size=3))


@dataclass(frozen=True, eq=False)
class Scene:
    """
    Parallel line bundles in the world frame seen through `rig` from `pose`.

    `line_pixels` pairs every world line with the pixels of its image.
    """

    rig: CameraRig
    pose: Pose
    directions: Tuple[DirectionVector, ...]
    bundles: Tuple[Tuple[PlueckerLine, ...], ...]
    vanishing_points: Tuple[MirrorPoint, ...]
    line_pixels: Tuple[Tuple[PlueckerLine, Tuple[Pixel, ...]], ...]

    def __post_init__(self):
        for direction, bundle in zip(self.directions, self.bundles):
            for line in bundle:
                if np.linalg.norm(np.cross(line.s, direction.s)) > 1e-12:
                    raise ValidationError("bundle lines do not share a direction")

    @property
    def vp_pairs(self) -> List[Tuple[MirrorPoint, DirectionVector]]:
        return list(zip(self.vanishing_points, self.directions))


def _line_pixels(
    rig: CameraRig,
    line: PlueckerLine,
    anchor: np.ndarray,
    seed: np.ndarray,
    offsets: Sequence[float],
) -> List[Pixel]:
    pixels = []
    for offset in offsets:
        try:
            _, px = forward_project_near(rig, anchor + offset * line.s, seed)
        except CatadioptricError:
            continue
        pixels.append(px)
    return pixels


def make_scene(
    rig: CameraRig,
    rng: np.random.Generator,
    bundles: int = 3,
    lines_per_bundle: int = 2,
    pixels_per_line: int = 3,
    spread: float = 0.05,
    depth: Tuple[float, float] = (1.5, 4.0),
    extent: float = 0.3,
    pose: Optional[Pose] = None,
    pool: Optional[np.ndarray] = None,
) -> Scene:
    """
    Random scene: each bundle takes its camera-frame direction from the
    reflected ray at a random visible vanishing point, its lines pass near a
    point placed at random depth on another reflected ray and their pixels
    come from local reflection solves started at that ray's mirror point.
    """
    if pixels_per_line < 1:
        raise ValidationError("each line needs at least one pixel")
    pose = pose or random_pose(rng)
    pool = visible_pool(rig) if pool is None else pool
    inverse = pose.inverse()
    offsets = np.linspace(-extent, extent, max(pixels_per_line + 2, 5))

    vps = sample_spread_points(rig, pool, rng, bundles)
    directions, world_bundles, line_pixels = [], [], []
    for vp in vps:
        s_cam = scene_direction_at(rig, vp.r)
        direction = DirectionVector.of(inverse.R @ s_cam)
        bundle = []
        for _ in range(MAX_ATTEMPTS):
            r, _ = sample_mirror_point(rig, pool, rng)
            d = scene_direction_at(rig, r.r)
            if angle_between_lines(d, s_cam) < MIN_DIRECTION_ANGLE:
                continue
            anchor = r.r + rng.uniform(*depth) * d
            lines = gen_parallel_bundle(s_cam, lines_per_bundle, spread, rng, anchor)
            for line in lines:
                base = line.point_at((anchor - line.closest_point) @ line.s)
                pixels = _line_pixels(rig, line, base, r.r, offsets)
                if len(pixels) < pixels_per_line:
                    logger.debug("Line image has %d samples, skipping", len(pixels))
                    continue
                world_line = inverse.transform_line(line)
                bundle.append(world_line)
                line_pixels.append((world_line, tuple(pixels[:pixels_per_line])))
            if bundle:
                break
        if not bundle:
            raise NoSolution("no visible line found for a bundle")
        directions.append(direction)
        world_bundles.append(tuple(bundle))
    return Scene(
        rig=rig,
        pose=pose,
        directions=tuple(directions),
        bundles=tuple(world_bundles),
        vanishing_points=tuple(vps),
        line_pixels=tuple(line_pixels),
    )
