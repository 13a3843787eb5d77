"""Filippov layer for two affine zones glued along the switching line x = 0.

Inputs: `PiecewiseAffineSystem` (left zone for x < 0, right zone for x > 0) and positions y on
the switching line.
Outputs: Lie derivatives, point classes and the ordered partition of the switching line, the
sliding vector field and its pseudo-equilibria, order-two fold points with visibility,
equilibrium status per zone and the Lienard canonical reduction.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

import numpy as np
from numpy.polynomial import Polynomial
from numpy.typing import ArrayLike

from .. import config
from ..errors import (
    BoundaryEquilibriumCollision,
    NotSlidingPoint,
    StatusMismatch,
    TangencyDegenerate,
    VisibilityMismatch,
)
from .affine2d import AffineSystem2, equilibrium, flow, lie_rows, spectrum

logger = logging.getLogger(__name__)


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class SigmaClass(str, Enum):
    POSITIVE_CROSSING = "positive_crossing"
    NEGATIVE_CROSSING = "negative_crossing"
    SLIDING = "sliding"
    ESCAPING = "escaping"
    LEFT_TANGENCY = "left_tangency"
    RIGHT_TANGENCY = "right_tangency"
    DOUBLE_TANGENCY = "double_tangency"


class Visibility(str, Enum):
    VISIBLE = "visible"
    INVISIBLE = "invisible"


class EquilibriumKind(str, Enum):
    REAL = "real"
    VIRTUAL = "virtual"
    BOUNDARY = "boundary"


@dataclass(frozen=True, slots=True)
class PiecewiseAffineSystem:
    """Left zone governs x < 0, right zone governs x > 0; the switching line is x = 0."""

    left: AffineSystem2
    right: AffineSystem2

    def zone(self, side: Side) -> AffineSystem2:
        return self.left if side is Side.LEFT else self.right


@dataclass(frozen=True, slots=True)
class SigmaInterval:
    """Open interval (lower, upper) of the switching line; bounds may be infinite."""

    lower: float
    upper: float
    kind: SigmaClass

    def contains(self, y: float) -> bool:
        return self.lower < y < self.upper


@dataclass(frozen=True, slots=True)
class SigmaPartition:
    intervals: tuple[SigmaInterval, ...]
    tangency_points: tuple[tuple[float, SigmaClass], ...]
    degenerate_field: bool = False

    def intervals_of(self, kind: SigmaClass) -> list[SigmaInterval]:
        return [interval for interval in self.intervals if interval.kind is kind]


@dataclass(frozen=True, slots=True)
class FoldPoint:
    location: tuple[float, float]
    side: Side
    order: int
    visibility: Visibility
    second_lie_derivative: float


@dataclass(frozen=True, slots=True)
class EquilibriumStatus:
    kind: EquilibriumKind
    point: tuple[float, float]
    node_type: str


@dataclass(frozen=True, slots=True)
class PseudoEquilibrium:
    y: float
    region: SigmaClass
    stable: bool


class ThresholdSource(Protocol):
    alpha_L: float
    alpha_R: float


@dataclass(frozen=True, slots=True, eq=False)
class CanonicalTransform:
    """Per-zone affine homeomorphism h(x) = M x + c onto the Lienard canonical form.

    Inputs: built by `to_lienard_canonical`.
    Outputs: the matrices and offsets of both branches, the canonical system, the x-jump
    parameter `b` and the constants `a_left`, `a_right`. `apply` and `invert` pick the branch
    from the sign of the first coordinate; both branches agree on the switching line.
    """

    left_matrix: np.ndarray
    left_offset: np.ndarray
    right_matrix: np.ndarray
    right_offset: np.ndarray
    system: PiecewiseAffineSystem
    b: float
    a_left: float
    a_right: float

    def branch(self, side: Side) -> tuple[np.ndarray, np.ndarray]:
        if side is Side.LEFT:
            return self.left_matrix, self.left_offset
        return self.right_matrix, self.right_offset

    def apply(self, point: ArrayLike) -> np.ndarray:
        vector = np.asarray(point, dtype=float).reshape(2)
        matrix, offset = self.branch(Side.LEFT if vector[0] <= 0.0 else Side.RIGHT)
        return matrix @ vector + offset

    def invert(self, point: ArrayLike) -> np.ndarray:
        vector = np.asarray(point, dtype=float).reshape(2)
        # the first row of each branch is a positive multiple of (1, 0), so sides are kept
        matrix, offset = self.branch(Side.LEFT if vector[0] <= 0.0 else Side.RIGHT)
        return np.linalg.solve(matrix, vector - offset)


def _tangency_tolerance(y: float) -> float:
    return config.TANGENCY_TOL * (1.0 + abs(y))


def _normal_line(zone: AffineSystem2) -> tuple[float, float]:
    """Return (slope, constant) of y -> first field component on x = 0."""

    return float(zone.A[0, 1]), float(-zone.b[0])


def lie_derivatives(pws: PiecewiseAffineSystem, y: float) -> tuple[float, float]:
    """Return (Z^-f, Z^+f) at (0, y): the x-components of the left and right fields.

    Inputs: pws (PiecewiseAffineSystem), y (float).
    Outputs: tuple of floats (left value, right value).
    """

    left_slope, left_const = _normal_line(pws.left)
    right_slope, right_const = _normal_line(pws.right)
    return left_slope * y + left_const, right_slope * y + right_const


def second_lie_derivatives(pws: PiecewiseAffineSystem, y: float) -> tuple[float, float]:
    """Return the derivative of each zone's x-velocity along its own flow at (0, y)."""

    return lie_rows(pws.left, y)[1], lie_rows(pws.right, y)[1]


def classify_sigma_point(pws: PiecewiseAffineSystem, y: float) -> SigmaClass:
    """Classify the point (0, y) of the switching line.

    Inputs: pws (PiecewiseAffineSystem), y (float).
    Outputs: SigmaClass. A Lie derivative within 1e-12 * (1 + |y|) of zero is a tangency.
    Sliding means Z^+f < 0 < Z^-f and escaping means Z^-f < 0 < Z^+f.
    """

    left, right = lie_derivatives(pws, y)
    tolerance = _tangency_tolerance(y)
    left_zero = abs(left) <= tolerance
    right_zero = abs(right) <= tolerance
    if left_zero and right_zero:
        return SigmaClass.DOUBLE_TANGENCY
    if left_zero:
        return SigmaClass.LEFT_TANGENCY
    if right_zero:
        return SigmaClass.RIGHT_TANGENCY
    if left > 0.0 and right > 0.0:
        return SigmaClass.POSITIVE_CROSSING
    if left < 0.0 and right < 0.0:
        return SigmaClass.NEGATIVE_CROSSING
    if left > 0.0:
        return SigmaClass.SLIDING
    return SigmaClass.ESCAPING


def _zone_zero(zone: AffineSystem2) -> float | None:
    slope, constant = _normal_line(zone)
    if slope == 0.0:
        return None
    return -constant / slope


def partition_sigma(pws: PiecewiseAffineSystem) -> SigmaPartition:
    """Split the switching line into maximal intervals of constant class.

    Inputs: pws (PiecewiseAffineSystem).
    Outputs: SigmaPartition with ordered intervals (unbounded ends use +-inf), the tangency
    points and a `degenerate_field` flag set when a zone's x-velocity on the line does not
    depend on y (no fold in that zone).
    """

    zeros = [value for value in (_zone_zero(pws.left), _zone_zero(pws.right)) if value is not None]
    degenerate = len(zeros) < 2
    breakpoints = sorted(set(zeros))
    edges = [-math.inf, *breakpoints, math.inf]

    intervals: list[SigmaInterval] = []
    for lower, upper in zip(edges[:-1], edges[1:]):
        if math.isinf(lower) and math.isinf(upper):
            sample = 0.0
        elif math.isinf(lower):
            sample = upper - max(1.0, abs(upper))
        elif math.isinf(upper):
            sample = lower + max(1.0, abs(lower))
        else:
            sample = 0.5 * (lower + upper)
        kind = classify_sigma_point(pws, sample)
        if intervals and intervals[-1].kind is kind:
            intervals[-1] = SigmaInterval(intervals[-1].lower, upper, kind)
        else:
            intervals.append(SigmaInterval(lower, upper, kind))

    points = tuple((point, classify_sigma_point(pws, point)) for point in breakpoints)
    if degenerate:
        logger.info("switching line has a zone without fold; partition flagged degenerate")
    return SigmaPartition(tuple(intervals), points, degenerate)


def sliding_field(pws: PiecewiseAffineSystem, y: float) -> tuple[float, float]:
    """Return the Filippov convex weight and the sliding velocity at (0, y).

    Inputs: pws (PiecewiseAffineSystem), y on a sliding or escaping segment.
    Outputs: (lam, velocity) with lam = Z^-f / (Z^-f - Z^+f) in (0, 1) and velocity the
    y-component of (1 - lam) Z^- + lam Z^+.
    Raises: NotSlidingPoint when (0, y) is not a sliding or escaping point.
    """

    kind = classify_sigma_point(pws, y)
    if kind not in (SigmaClass.SLIDING, SigmaClass.ESCAPING):
        raise NotSlidingPoint(f"(0, {y:.6g}) is a {kind.value} point")
    point = np.array([0.0, y])
    left_field = pws.left.vector_field(point)
    right_field = pws.right.vector_field(point)
    lam = left_field[0] / (left_field[0] - right_field[0])
    velocity = (1.0 - lam) * left_field[1] + lam * right_field[1]
    return float(lam), float(velocity)


def sliding_polynomials(pws: PiecewiseAffineSystem) -> tuple[Polynomial, Polynomial]:
    """Return (numerator, denominator) with sliding velocity = numerator(y) / denominator(y).

    numerator = Z^-f Z^+_2 - Z^+f Z^-_2 and denominator = Z^-f - Z^+f, both polynomials in y.
    """

    def component(zone: AffineSystem2, row: int) -> Polynomial:
        return Polynomial([float(-zone.b[row]), float(zone.A[row, 1])])

    left_normal, right_normal = component(pws.left, 0), component(pws.right, 0)
    left_tangent, right_tangent = component(pws.left, 1), component(pws.right, 1)
    return left_normal * right_tangent - right_normal * left_tangent, left_normal - right_normal


def sliding_bounds(pws: PiecewiseAffineSystem, kind: SigmaClass = SigmaClass.SLIDING) -> tuple[float, float] | None:
    """Return the open y-interval of sliding (or escaping) points, or None when it is empty."""

    lower, upper = -math.inf, math.inf
    # sliding: Z^-f > 0 and Z^+f < 0; escaping: the reverse signs
    wanted = (1.0, -1.0) if kind is SigmaClass.SLIDING else (-1.0, 1.0)
    for zone, sign in zip((pws.left, pws.right), wanted):
        slope, constant = _normal_line(zone)
        if slope == 0.0:
            if sign * constant <= 0.0:
                return None
            continue
        zero = -constant / slope
        if sign * slope > 0.0:
            lower = max(lower, zero)
        else:
            upper = min(upper, zero)
    if lower >= upper:
        return None
    return lower, upper


def pseudo_equilibria(pws: PiecewiseAffineSystem) -> list[PseudoEquilibrium]:
    """Return the zeros of the sliding field lying on sliding or escaping segments.

    Inputs: pws (PiecewiseAffineSystem).
    Outputs: list of PseudoEquilibrium sorted by y; `stable` means the sliding velocity
    decreases through the zero.
    """

    numerator, denominator = sliding_polynomials(pws)
    trimmed = numerator.trim()
    if trimmed.degree() < 1:
        return []
    found = []
    for root in trimmed.roots():
        if abs(root.imag) > 1e-12 * (1.0 + abs(root.real)):
            continue
        y = float(root.real)
        region = classify_sigma_point(pws, y)
        if region not in (SigmaClass.SLIDING, SigmaClass.ESCAPING):
            continue
        slope = float(trimmed.deriv()(y) / denominator(y))
        found.append(PseudoEquilibrium(y, region, slope < 0.0))
    return sorted(found, key=lambda item: item.y)


def _finite_difference_curvature(zone: AffineSystem2, y: float) -> float:
    step = config.FOLD_FD_STEP
    start = np.array([0.0, y])
    forward = flow(zone, start, step)[0]
    backward = flow(zone, start, -step)[0]
    return float((forward + backward) / (step * step))


def fold_points(pws: PiecewiseAffineSystem) -> list[FoldPoint]:
    """Return the order-two fold points of both zones with their visibility.

    Inputs: pws (PiecewiseAffineSystem).
    Outputs: list of FoldPoint (left first). A left fold is visible when its second Lie
    derivative is negative; a right fold when it is positive. The sign is confirmed by a
    symmetric finite difference of the exact flow.
    Raises: BoundaryEquilibriumCollision when a second Lie derivative vanishes;
    VisibilityMismatch when the finite-difference sign contradicts the analytic one.
    """

    folds = []
    for side in (Side.LEFT, Side.RIGHT):
        zone = pws.zone(side)
        y = _zone_zero(zone)
        if y is None:
            continue
        _, second = lie_rows(zone, y)
        if abs(second) <= config.FOLD_COLLISION_TOL * (1.0 + abs(y)):
            raise BoundaryEquilibriumCollision(
                f"{side.value} fold at y={y:.6g} has vanishing second Lie derivative: it meets a boundary equilibrium"
            )
        numeric = _finite_difference_curvature(zone, y)
        if np.sign(numeric) != np.sign(second) and abs(second) > config.FOLD_FD_STEP**2:
            raise VisibilityMismatch(
                f"{side.value} fold: analytic curvature {second:.6g} vs finite difference {numeric:.6g}"
            )
        visible = second < 0.0 if side is Side.LEFT else second > 0.0
        visibility = Visibility.VISIBLE if visible else Visibility.INVISIBLE
        logger.debug("%s fold at y=%.17g is %s", side.value, y, visibility.value)
        folds.append(FoldPoint((0.0, y), side, 2, visibility, second))
    return folds


def _node_type(zone: AffineSystem2) -> str:
    eig = spectrum(zone)
    if eig.lambda_i < 0.0:
        kind = "attractor"
    elif eig.lambda_j > 0.0:
        kind = "repeller"
    else:
        return "saddle"
    return f"{kind}_degenerate_node" if eig.repeated else f"{kind}_node"


def _threshold_kind(side: Side, alpha: float, thresholds: ThresholdSource) -> EquilibriumKind:
    threshold = thresholds.alpha_L if side is Side.LEFT else thresholds.alpha_R
    if abs(alpha - threshold) <= config.BOUNDARY_TOL * (1.0 + abs(alpha)):
        return EquilibriumKind.BOUNDARY
    real = alpha > threshold if side is Side.LEFT else alpha < threshold
    return EquilibriumKind.REAL if real else EquilibriumKind.VIRTUAL


def equilibrium_status(
    pws: PiecewiseAffineSystem,
    side: Side,
    alpha: float | None = None,
    thresholds: ThresholdSource | None = None,
) -> EquilibriumStatus:
    """Return whether the equilibrium of one zone is real, virtual or on the boundary.

    Inputs: pws (PiecewiseAffineSystem), side (Side), optional `alpha` with `thresholds`
    (anything exposing alpha_L and alpha_R) for the Welander threshold rule.
    Outputs: EquilibriumStatus with the equilibrium point and its node type. The geometric
    rule (sign of x_e) always runs; when thresholds are given the two rules must agree.
    Raises: SingularMatrix; StatusMismatch when the rules disagree away from the boundary.
    """

    zone = pws.zone(side)
    point = equilibrium(zone)
    x_e, y_e = float(point[0]), float(point[1])
    if abs(x_e) <= config.BOUNDARY_TOL * (1.0 + abs(y_e)):
        geometric = EquilibriumKind.BOUNDARY
    elif (x_e < 0.0) == (side is Side.LEFT):
        geometric = EquilibriumKind.REAL
    else:
        geometric = EquilibriumKind.VIRTUAL

    kind = geometric
    if thresholds is not None and alpha is not None:
        kind = _threshold_kind(side, alpha, thresholds)
        if EquilibriumKind.BOUNDARY not in (kind, geometric) and kind is not geometric:
            raise StatusMismatch(
                f"{side.value} equilibrium: threshold rule says {kind.value}, x_e={x_e:.6g} says {geometric.value}"
            )
    return EquilibriumStatus(kind, (x_e, y_e), _node_type(zone))


def to_lienard_canonical(pws: PiecewiseAffineSystem) -> CanonicalTransform:
    """Reduce `pws` to the Lienard canonical form by a homeomorphism preserving x = 0.

    Inputs: pws (PiecewiseAffineSystem) with a12 of both zones nonzero and of equal sign.
    Outputs: CanonicalTransform whose system has zones d/dt x = [[tr, -1], [det, 0]] x - c
    with c = (0, a_left) on the left and c = (-b, a_right) on the right.
    Raises: TangencyDegenerate when a12^L * a12^R <= 0.
    """

    a12_left = float(pws.left.A[0, 1])
    a12_right = float(pws.right.A[0, 1])
    if a12_left * a12_right <= 0.0:
        raise TangencyDegenerate(f"a12^L * a12^R = {a12_left * a12_right:.6g} must be positive")

    # forcing written as d/dt x = A x + p, i.e. p = -b
    p_left = -pws.left.b
    p_right = -pws.right.b
    a22_left = float(pws.left.A[1, 1])
    a22_right = float(pws.right.A[1, 1])
    ratio = a12_left / a12_right

    a_left = float(a12_left * p_left[1] - a22_left * p_left[0])
    a_right = float(ratio * (a12_right * p_right[1] - a22_right * p_right[0]))
    jump = float(ratio * p_right[0] - p_left[0])

    left_matrix = np.array([[1.0, 0.0], [a22_left, -a12_left]])
    right_matrix = ratio * np.array([[1.0, 0.0], [a22_right, -a12_right]])
    offset = np.array([0.0, -float(p_left[0])])

    def companion(zone: AffineSystem2, forcing: tuple[float, float]) -> AffineSystem2:
        return AffineSystem2(np.array([[zone.trace, -1.0], [zone.det, 0.0]]), np.array(forcing))

    system = PiecewiseAffineSystem(
        companion(pws.left, (0.0, a_left)),
        companion(pws.right, (-jump, a_right)),
    )
    logger.debug("canonical form: a_left=%.17g a_right=%.17g b=%.17g", a_left, a_right, jump)
    return CanonicalTransform(left_matrix, offset, right_matrix, offset.copy(), system, jump, a_left, a_right)
