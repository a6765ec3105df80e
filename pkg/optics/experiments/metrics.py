"""
Error metrics reported by the experiment sweeps. Angles are in degrees.
"""
import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import directed_hausdorff
from scipy.stats import linregress

from ..geometry import angle_between_lines


def metric_vp_distance(r_gt, r) -> float:
    difference = np.asarray(r_gt, dtype=float) - np.asarray(r, dtype=float)
    return float(np.linalg.norm(difference))


def match_vanishing_points(
    truth: Sequence, estimated: Sequence
) -> List[Tuple[int, int, float]]:
    """Pairs (truth index, estimate index, distance) of minimum total distance"""
    if not len(truth) or not len(estimated):
        return []
    cost = np.array([[metric_vp_distance(a, b) for b in estimated] for a in truth])
    rows, cols = linear_sum_assignment(cost)
    return [(int(i), int(j), float(cost[i, j])) for i, j in zip(rows, cols)]


def metric_rotation(R_gt, R) -> float:
    return float(np.linalg.norm(np.asarray(R_gt) - np.asarray(R), ord="fro"))


def metric_direction(s_gt, s) -> float:
    return math.degrees(angle_between_lines(s_gt, s))


def metric_translation(t_gt, t) -> float:
    return float(np.linalg.norm(np.asarray(t, dtype=float) - t_gt))


def linear_fit_r2(levels: Sequence[float], values: Sequence[float]) -> float:
    """Coefficient of determination of a least-squares line through the points"""
    levels = np.asarray(levels, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = np.isfinite(values)
    if keep.sum() < 3 or np.ptp(values[keep]) == 0:
        return 0.0
    return float(linregress(levels[keep], values[keep]).rvalue ** 2)


def is_monotone(values: Sequence[float], rtol: float = 0.0) -> bool:
    values = [v for v in values if math.isfinite(v)]
    return all(b >= a * (1.0 - rtol) for a, b in zip(values, values[1:]))


def hausdorff_distance(first: Sequence, second: Sequence) -> float:
    """Symmetric Hausdorff distance between two point sets; 0 for two empty
    sets and infinite when only one is empty"""
    first = np.asarray([np.asarray(p, dtype=float) for p in first]).reshape(-1, 3)
    second = np.asarray([np.asarray(p, dtype=float) for p in second]).reshape(-1, 3)
    if not len(first) and not len(second):
        return 0.0
    if not len(first) or not len(second):
        return math.inf
    return float(
        max(directed_hausdorff(first, second)[0], directed_hausdorff(second, first)[0])
    )
