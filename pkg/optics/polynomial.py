import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npp

from .exceptions import (
    DegenerateQuadratic,
    RankDeficient,
    ResidualTooLarge,
    ZeroPolynomial,
)

logger = logging.getLogger(__name__)

TRIM_TOLERANCE = 1e-11
IMAGINARY_TOLERANCE = 1e-6
ROOT_CERTIFICATE = 1e-7
INTERPOLATION_TOLERANCE = 1e-9
MAX_CONDITION = 1e8
RESULTANT_DEGREE = 10
RESULTANT_TAIL_TOLERANCE = 1e-8


class Polynomial:
    """
    Dense real polynomial with ascending coefficients.

    `degree` is the effective degree: trailing coefficients smaller than
    `trim_tolerance` times the largest one do not count. The zero polynomial
    has degree -1.
    """

    def __init__(self, coeffs, trim_tolerance: float = TRIM_TOLERANCE):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if coeffs.ndim != 1:
            raise ValueError("polynomial coefficients must be one-dimensional")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("polynomial coefficients must be finite")
        self.coeffs = coeffs
        self.trim_tolerance = trim_tolerance
        scale = np.max(np.abs(coeffs)) if len(coeffs) else 0.0
        significant = np.nonzero(np.abs(coeffs) > trim_tolerance * scale)[0]
        self.degree = int(significant[-1]) if scale > 0 and len(significant) else -1

    def __repr__(self):
        return "Polynomial(%s)" % np.array2string(self.trimmed, precision=6)

    def __call__(self, z):
        return npp.polyval(z, self.trimmed)

    def __add__(self, other):
        return Polynomial(npp.polyadd(self.trimmed, _coeffs_of(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Polynomial(npp.polysub(self.trimmed, _coeffs_of(other)))

    def __mul__(self, other):
        return Polynomial(npp.polymul(self.trimmed, _coeffs_of(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return Polynomial(-self.trimmed)

    @property
    def trimmed(self) -> np.ndarray:
        if self.degree < 0:
            return np.zeros(1)
        return self.coeffs[: self.degree + 1]

    @property
    def is_zero(self) -> bool:
        return self.degree < 0

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    def truncated(self, degree: int) -> "Polynomial":
        return Polynomial(self.coeffs[: degree + 1], self.trim_tolerance)

    def derivative(self) -> "Polynomial":
        if self.degree < 1:
            return Polynomial([0.0])
        return Polynomial(npp.polyder(self.trimmed))


def _coeffs_of(value) -> np.ndarray:
    if isinstance(value, Polynomial):
        return value.trimmed
    return np.atleast_1d(np.asarray(value, dtype=float))


def deflate_zero_roots(p: Polynomial) -> Tuple[Polynomial, int]:
    """Divide out z^k where the k lowest coefficients are negligible"""
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has no finite root count")
    coeffs = p.trimmed
    tol = p.trim_tolerance * p.scale
    k = 0
    while k < p.degree and abs(coeffs[k]) <= tol:
        k += 1
    return Polynomial(coeffs[k:], p.trim_tolerance), k


def _polish(coeffs: np.ndarray, root: float, iterations: int = 8) -> float:
    derivative = npp.polyder(coeffs)
    best, best_value = root, abs(npp.polyval(root, coeffs))
    z = root
    for _ in range(iterations):
        slope = npp.polyval(z, derivative)
        if slope == 0.0:
            break
        z = z - npp.polyval(z, coeffs) / slope
        value = abs(npp.polyval(z, coeffs))
        if not np.isfinite(value):
            break
        if value < best_value:
            best, best_value = z, value
    return best


def real_roots(p: Polynomial, tol: float = IMAGINARY_TOLERANCE) -> List[float]:
    """
    Real roots of p, sorted ascending with repeated roots collapsed.

    Roots come from the companion matrix eigenvalues and are Newton polished.
    A root whose imaginary part is below tol * (1 + |root|) counts as real.
    """
    if p.is_zero:
        raise ZeroPolynomial("the zero polynomial has every number as a root")
    if p.degree == 0:
        return []
    coeffs = p.trimmed / p.scale
    candidates = npp.polyroots(coeffs)
    roots = []
    for root in candidates:
        if abs(root.imag) > tol * (1.0 + abs(root.real)):
            continue
        z = _polish(coeffs, float(root.real))
        bound = ROOT_CERTIFICATE * max(1.0, abs(z)) ** p.degree
        if abs(npp.polyval(z, coeffs)) > bound:
            logger.debug("Dropping uncertified root %.12g of %s", z, p)
            continue
        roots.append(z)
    roots.sort()
    collapsed: List[float] = []
    for z in roots:
        if collapsed and abs(z - collapsed[-1]) <= 1e-7 * (1.0 + abs(z)):
            continue
        collapsed.append(z)
    return collapsed


@dataclass(frozen=True)
class MonomialBasis2:
    """Exponent pairs (i, j) of the monomials y^i z^j"""

    exponents: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        exponents = tuple((int(i), int(j)) for i, j in self.exponents)
        if len(set(exponents)) != len(exponents):
            raise ValueError("monomial basis has repeated exponents")
        object.__setattr__(self, "exponents", exponents)

    @classmethod
    def of(cls, *exponents: Tuple[int, int]) -> "MonomialBasis2":
        return cls(tuple(exponents))

    @classmethod
    def total_degree(cls, degree: int) -> "MonomialBasis2":
        return cls(
            tuple(
                (i, total - i)
                for total in range(degree, -1, -1)
                for i in range(total, -1, -1)
            )
        )

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    @property
    def degree_y(self) -> int:
        return max(i for i, _ in self.exponents)

    @property
    def degree_z(self) -> int:
        return max(j for _, j in self.exponents)

    def index(self, i: int, j: int) -> int:
        return self.exponents.index((i, j))

    def vandermonde(self, y, z) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        return np.stack([y**i * z**j for i, j in self.exponents], axis=-1)


def chebyshev_nodes(count: int, scale: float = 1.0) -> np.ndarray:
    k = np.arange(count)
    return scale * np.cos((2 * k + 1) * np.pi / (2 * count))


def default_nodes(basis: MonomialBasis2, extra: int = 0) -> np.ndarray:
    """Tensor Chebyshev grid unisolvent for the basis, as (y, z) rows"""
    ys = chebyshev_nodes(basis.degree_y + 2 + extra)
    zs = chebyshev_nodes(basis.degree_z + 2 + extra)
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    return np.column_stack([yy.ravel(), zz.ravel()])


def interpolate_coeffs(
    evaluator: Callable,
    basis: MonomialBasis2,
    nodes: Optional[np.ndarray] = None,
    holdout: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Coefficients a with evaluator(y, z) = sum a_k y^i_k z^j_k.

    The evaluator is called with arrays of y and z. The fit is certified on
    held-out nodes; a residual there means the evaluator is not in the span of
    the basis.
    """
    nodes = default_nodes(basis) if nodes is None else np.asarray(nodes, dtype=float)
    if len(nodes) < len(basis):
        raise RankDeficient(
            f"{len(nodes)} nodes cannot determine {len(basis)} coefficients"
        )
    V = basis.vandermonde(nodes[:, 0], nodes[:, 1])
    singular = np.linalg.svd(V, compute_uv=False)
    if singular[-1] <= singular[0] / MAX_CONDITION:
        raise RankDeficient("interpolation nodes do not determine the basis")
    f = np.asarray(evaluator(nodes[:, 0], nodes[:, 1]), dtype=float)
    coeffs, *_ = np.linalg.lstsq(V, f, rcond=None)

    if holdout is None:
        holdout = 0.9 * default_nodes(basis, extra=1)
    holdout = np.asarray(holdout, dtype=float)
    expected = np.asarray(evaluator(holdout[:, 0], holdout[:, 1]), dtype=float)
    predicted = basis.vandermonde(holdout[:, 0], holdout[:, 1]) @ coeffs
    scale = max(np.max(np.abs(expected)), np.max(np.abs(f)))
    residual = np.max(np.abs(predicted - expected))
    if residual > INTERPOLATION_TOLERANCE * scale:
        raise ResidualTooLarge(
            f"interpolation residual {residual:.3e} exceeds tolerance for scale "
            f"{scale:.3e}"
        )
    return coeffs


class BivariatePolynomial:
    """Polynomial in (y, z) over an explicit monomial basis"""

    def __init__(self, basis: MonomialBasis2, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (len(basis),):
            raise ValueError("coefficient count does not match the basis")
        self.basis = basis
        self.coeffs = coeffs

    @classmethod
    def interpolate(cls, evaluator, basis: MonomialBasis2) -> "BivariatePolynomial":
        return cls(basis, interpolate_coeffs(evaluator, basis))

    def __repr__(self):
        terms = ", ".join(
            "y^%d z^%d: %.6g" % (i, j, a) for (i, j), a in zip(self.basis, self.coeffs)
        )
        return "BivariatePolynomial(%s)" % terms

    def __call__(self, y, z):
        return self.basis.vandermonde(y, z) @ self.coeffs

    def __getitem__(self, exponent: Tuple[int, int]) -> float:
        try:
            return float(self.coeffs[self.basis.index(*exponent)])
        except ValueError:
            return 0.0

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_zero(self, tol: float = 1e-12) -> bool:
        return self.scale <= tol

    def snapped(self, tol: float = 1e-12) -> "BivariatePolynomial":
        """Copy with coefficients below tol relative set to exactly zero"""
        coeffs = self.coeffs.copy()
        coeffs[np.abs(coeffs) <= tol * self.scale] = 0.0
        return BivariatePolynomial(self.basis, coeffs)

    def partial_y(self, y, z):
        y, z = np.asarray(y, dtype=float), np.asarray(z, dtype=float)
        terms = [
            a * i * y ** (i - 1) * z**j
            for (i, j), a in zip(self.basis, self.coeffs)
            if i > 0
        ]
        return sum(terms) if terms else np.zeros_like(y)

    def partial_z(self, y, z):
        y, z = np.asarray(y, dtype=float), np.asarray(z, dtype=float)
        terms = [
            a * j * y**i * z ** (j - 1)
            for (i, j), a in zip(self.basis, self.coeffs)
            if j > 0
        ]
        return sum(terms) if terms else np.zeros_like(z)

    def in_y(self) -> Dict[int, Polynomial]:
        """The coefficients of each power of y as polynomials in z"""
        columns: Dict[int, np.ndarray] = {}
        for (i, j), a in zip(self.basis, self.coeffs):
            column = columns.setdefault(i, np.zeros(self.basis.degree_z + 1))
            column[j] += a
        return {i: Polynomial(column) for i, column in columns.items()}

    def y_roots(self, z: float) -> List[float]:
        """Real y with p(y, z) = 0 for a polynomial of degree two or less in y"""
        parts = self.in_y()
        q2, q1, q0 = (float(parts[k](z)) if k in parts else 0.0 for k in (2, 1, 0))
        scale = max(abs(q2), abs(q1), abs(q0), 1e-300)
        if abs(q2) <= 1e-12 * scale:
            return [] if abs(q1) <= 1e-12 * scale else [-q0 / q1]
        disc = q1 * q1 - 4.0 * q2 * q0
        if disc < 0:
            if disc < -1e-10 * q1 * q1 - 1e-12 * scale * scale:
                return []
            disc = 0.0
        sq = np.sqrt(disc)
        return sorted({(-q1 - sq) / (2 * q2), (-q1 + sq) / (2 * q2)})


def _quadratic_parts(quadratic: BivariatePolynomial) -> Tuple[Polynomial, ...]:
    parts = quadratic.in_y()
    if any(power > 2 for power in parts):
        raise ValueError("elimination needs a polynomial of degree two in y")
    return tuple(parts.get(k, Polynomial([0.0])) for k in (2, 1, 0))


def poly_compose_resultant(
    q4: BivariatePolynomial, q3: BivariatePolynomial, tol: float = 1e-10
) -> Polynomial:
    """
    Eliminate y between q4 and q3, both quadratic in y.

    q3 = a1 y^2 + P2(z) y + P3(z) with constant a1 is solved for
    y = (k11 +- sqrt(k12)) / (2 a1) with k11 = -P2 and k12 = P2^2 - 4 a1 P3.
    Substituting into q4 = Q1 y^2 + Q2 y + Q3 gives U + V sqrt(k12) and the
    product of both branches U^2 - V^2 k12 is the eliminant, truncated to the
    degree of the resultant. Coefficients above that degree must cancel to
    within RESULTANT_TAIL_TOLERANCE of the larger product, else
    ResidualTooLarge is raised.
    """
    a1, P2, P3 = _quadratic_parts(q3)
    if a1.degree > 0:
        raise ValueError(
            "the y^2 coefficient of the eliminated polynomial must be constant"
        )
    a = float(a1.trimmed[0]) if not a1.is_zero else 0.0
    if abs(a) <= tol * q3.scale:
        raise DegenerateQuadratic(
            "leading y coefficient vanishes, use the linear branch"
        )
    Q1, Q2, Q3 = _quadratic_parts(q4)

    k11 = -P2
    k12 = P2 * P2 - 4.0 * a * P3
    U = Q1 * (k11 * k11 + k12) + 2.0 * a * Q2 * k11 + 4.0 * a * a * Q3
    V = 2.0 * (Q1 * k11 + a * Q2)
    first, second = U * U, V * V * k12
    product = first - second
    tail = np.abs(product.coeffs[RESULTANT_DEGREE + 1 :])
    scale = max(first.scale, second.scale)
    if len(tail) and np.max(tail) > RESULTANT_TAIL_TOLERANCE * scale:
        raise ResidualTooLarge(
            f"eliminant keeps a degree {RESULTANT_DEGREE + len(tail)} term of "
            f"{np.max(tail):.3e} against scale {scale:.3e}"
        )
    return product.truncated(RESULTANT_DEGREE)


def linear_eliminant(q4: BivariatePolynomial, q3: BivariatePolynomial) -> Polynomial:
    """
    Eliminate y when q3 = y L(z) + M(z) is linear in y: substituting
    y = -M / L into q4 and clearing L^2 gives Q1 M^2 - Q2 M L + Q3 L^2.
    """
    _, L, M = _quadratic_parts(q3)
    Q1, Q2, Q3 = _quadratic_parts(q4)
    return Q1 * M * M - Q2 * M * L + Q3 * L * L


def linear_parts(q3: BivariatePolynomial) -> Tuple[Polynomial, Polynomial]:
    _, L, M = _quadratic_parts(q3)
    return L, M
