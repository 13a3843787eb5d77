"""Closed-form toolkit for planar affine systems d/dt x = A x - b with real spectra.

Inputs: `AffineSystem2` instances (2x2 matrix plus forcing vector), initial states and times.
Outputs: Ordered spectra with eigenvectors, equilibria, invariant lines through the equilibrium,
the auxiliary function `psi`, the exact flow and first-coordinate crossing times.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from .. import config
from ..errors import (
    BracketFailure,
    ComplexSpectrum,
    InvalidParameters,
    NoSignChange,
    SingularMatrix,
    VerticalInvariantLine,
    ZeroEigenvalue,
)

logger = logging.getLogger(__name__)

Vector = NDArray[np.float64]


def _as_vector(values: ArrayLike) -> Vector:
    return np.asarray(values, dtype=float).reshape(2)


@dataclass(frozen=True, slots=True, eq=False)
class AffineSystem2:
    """One zone of a piecewise-affine system, stored as d/dt x = A x - b.

    Inputs: `A` (2x2 array-like) and `b` (length-2 array-like).
    Outputs: Immutable system exposing `trace`, `det`, `discriminant` (tr^2 - 4 det) and a
    `complex_spectrum` flag. Construction with complex eigenvalues is allowed but flagged.
    """

    A: Vector
    b: Vector
    trace: float = field(init=False)
    det: float = field(init=False)
    discriminant: float = field(init=False)

    def __post_init__(self) -> None:
        matrix = np.array(self.A, dtype=float).reshape(2, 2)
        offset = np.array(self.b, dtype=float).reshape(2)
        if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(offset))):
            raise InvalidParameters("affine system coefficients must be finite")
        matrix.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "A", matrix)
        object.__setattr__(self, "b", offset)
        trace = float(matrix[0, 0] + matrix[1, 1])
        det = float(matrix[0, 0] * matrix[1, 1] - matrix[0, 1] * matrix[1, 0])
        object.__setattr__(self, "trace", trace)
        object.__setattr__(self, "det", det)
        object.__setattr__(self, "discriminant", trace * trace - 4.0 * det)

    @classmethod
    def from_forcing(cls, A: ArrayLike, forcing: ArrayLike) -> AffineSystem2:
        """Build a system written as d/dt x = A x + forcing (the raw model convention)."""

        return cls(np.asarray(A, dtype=float), -np.asarray(forcing, dtype=float))

    @property
    def complex_spectrum(self) -> bool:
        return self.discriminant < -_discriminant_tolerance(self.trace, self.det)

    def vector_field(self, point: ArrayLike) -> Vector:
        """Return the vector field A p - b at `point`."""

        return self.A @ _as_vector(point) - self.b


@dataclass(frozen=True, slots=True)
class Spectrum:
    """Real eigenvalues ordered lambda_i >= lambda_j with matching eigenvectors.

    For companion matrices the eigenvector of each eigenvalue is (1, other eigenvalue).
    """

    lambda_i: float
    lambda_j: float
    xi_i: tuple[float, float]
    xi_j: tuple[float, float]
    repeated: bool = False


@dataclass(frozen=True, slots=True)
class InvariantLine:
    """The line y = slope * x + intercept."""

    slope: float
    intercept: float

    def y_at(self, x: float) -> float:
        return self.slope * x + self.intercept

    def distance(self, point: ArrayLike) -> float:
        """Return the Euclidean distance from `point` to the line."""

        px, py = _as_vector(point)
        return abs(py - self.slope * px - self.intercept) / math.hypot(1.0, self.slope)


def _discriminant_tolerance(trace: float, det: float) -> float:
    return config.REPEATED_EIGENVALUE_TOL * max(1.0, trace * trace, 4.0 * abs(det))


def _eigenvalues(sys: AffineSystem2) -> tuple[float, float, bool]:
    tolerance = _discriminant_tolerance(sys.trace, sys.det)
    if sys.discriminant < -tolerance:
        raise ComplexSpectrum(
            f"tr(A)^2 - 4 det(A) = {sys.discriminant:.6g} < 0: complex eigenvalues are not supported"
        )
    if abs(sys.discriminant) <= tolerance:
        root = 0.5 * sys.trace
        return root, root, True

    # stable quadratic formula: the small root comes from det / large root
    root_disc = math.sqrt(sys.discriminant)
    large = 0.5 * (sys.trace + math.copysign(root_disc, sys.trace))
    small = sys.det / large
    return max(large, small), min(large, small), False


def _eigenvector(A: Vector, eigenvalue: float, fallback: tuple[float, float]) -> tuple[float, float]:
    a11, a12 = A[0]
    a21, a22 = A[1]
    if a12 != 0.0:
        return 1.0, float((eigenvalue - a11) / a12)
    if a21 != 0.0:
        return float((eigenvalue - a22) / a21), 1.0
    return fallback


def spectrum(sys: AffineSystem2) -> Spectrum:
    """Return the ordered real spectrum of `sys`.

    Inputs: sys (AffineSystem2) with tr^2 >= 4 det.
    Outputs: Spectrum with lambda_i > lambda_j (or equal, flagged `repeated`) and eigenvectors
    normalised to first component one whenever the matrix allows it.
    Raises: ComplexSpectrum when the eigenvalues are complex.
    """

    lambda_i, lambda_j, repeated = _eigenvalues(sys)
    A = sys.A
    if A[0, 1] == 0.0 and A[1, 0] == 0.0:
        # diagonal: the eigenvectors are the axes
        if repeated:
            return Spectrum(lambda_i, lambda_j, (1.0, 0.0), (0.0, 1.0), True)
        first_is_i = abs(A[0, 0] - lambda_i) <= abs(A[1, 1] - lambda_i)
        xi_i = (1.0, 0.0) if first_is_i else (0.0, 1.0)
        xi_j = (0.0, 1.0) if first_is_i else (1.0, 0.0)
        return Spectrum(lambda_i, lambda_j, xi_i, xi_j, False)

    xi_i = _eigenvector(A, lambda_i, (1.0, 0.0))
    xi_j = _eigenvector(A, lambda_j, (0.0, 1.0))
    return Spectrum(lambda_i, lambda_j, xi_i, xi_j, repeated)


def equilibrium(sys: AffineSystem2) -> Vector:
    """Return the equilibrium x_e solving A x_e = b.

    Inputs: sys (AffineSystem2) with non-zero determinant.
    Outputs: numpy array of shape (2,).
    Raises: SingularMatrix when det(A) = 0.
    """

    if sys.det == 0.0:
        raise SingularMatrix("det(A) = 0: the zone has no isolated equilibrium")
    (a11, a12), (a21, a22) = sys.A
    b1, b2 = sys.b
    # Cramer's rule keeps the companion-form closed expressions exact
    x = (b1 * a22 - a12 * b2) / sys.det
    y = (a11 * b2 - a21 * b1) / sys.det
    return np.array([x, y], dtype=float)


def invariant_lines(sys: AffineSystem2) -> tuple[InvariantLine, InvariantLine]:
    """Return the two invariant lines through the equilibrium.

    Inputs: sys (AffineSystem2) with real distinct non-zero eigenvalues.
    Outputs: (line along xi_i, line along xi_j). For a companion matrix the first has slope
    lambda_j and intercept b2/lambda_j - b1, the second slope lambda_i and intercept
    b2/lambda_i - b1.
    Raises: ComplexSpectrum, ZeroEigenvalue, InvalidParameters (repeated eigenvalues),
    VerticalInvariantLine (eigenvector parallel to the y axis).
    """

    eig = spectrum(sys)
    if eig.lambda_i == 0.0 or eig.lambda_j == 0.0:
        raise ZeroEigenvalue("an eigenvalue is zero: invariant lines are undefined")
    if eig.repeated:
        raise InvalidParameters("repeated eigenvalues do not give two distinct invariant lines")
    point = equilibrium(sys)
    lines = []
    for vector in (eig.xi_i, eig.xi_j):
        if vector[0] == 0.0:
            raise VerticalInvariantLine("an eigenvector is vertical; the line has no slope form")
        slope = vector[1] / vector[0]
        lines.append(InvariantLine(float(slope), float(point[1] - slope * point[0])))
    return lines[0], lines[1]


def _psi_series(r1: NDArray[np.float64], r2: NDArray[np.float64], t: NDArray[np.float64]) -> NDArray[np.float64]:
    total = np.zeros(np.broadcast(r1, r2, t).shape)
    product = r1 * r2
    for order in range(2, 2 + config.PSI_SERIES_TERMS):
        power = order - 1
        total = total + product * (r1**power - r2**power) * t**order / math.factorial(order)
    return total


def psi(r1: ArrayLike, r2: ArrayLike, t: ArrayLike) -> float | NDArray[np.float64]:
    """Evaluate psi(r1, r2, t) = r1 - r2 + r2 e^{r1 t} - r1 e^{r2 t}.

    Inputs: r1, r2, t (floats or broadcastable arrays).
    Outputs: float for scalar input, otherwise an array. Uses r2*expm1(r1 t) - r1*expm1(r2 t),
    and a six-term Taylor series when max(|r1 t|, |r2 t|) < 1e-4.
    """

    r1_arr = np.asarray(r1, dtype=float)
    r2_arr = np.asarray(r2, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = r2_arr * np.expm1(r1_arr * t_arr) - r1_arr * np.expm1(r2_arr * t_arr)
        scale = np.maximum(np.abs(r1_arr * t_arr), np.abs(r2_arr * t_arr))
        result = np.where(scale < config.PSI_SERIES_THRESHOLD, _psi_series(r1_arr, r2_arr, t_arr), direct)
    if result.ndim == 0:
        return float(result)
    return result


def _exp_coefficients(
    eig: Spectrum, times: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return (c0, c1) with e^{At} = c0 I + c1 A."""

    lam1, lam2 = eig.lambda_i, eig.lambda_j
    if eig.repeated:
        decay = np.exp(lam1 * times)
        c1 = times * decay
        return decay - lam1 * c1, c1
    gap = lam1 - lam2
    base = np.exp(lam2 * times)
    c1 = base * np.expm1(gap * times) / gap
    return base - lam2 * c1, c1


def _integral_coefficients(
    eig: Spectrum, times: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return (g0, g1) with the integral of e^{As} over [0, t] equal to g0 I + g1 A."""

    def primitive(lam: float) -> NDArray[np.float64]:
        if lam == 0.0:
            return times.copy()
        return np.expm1(lam * times) / lam

    def primitive_slope(lam: float) -> NDArray[np.float64]:
        if lam == 0.0:
            return 0.5 * times**2
        return (lam * times * np.exp(lam * times) - np.expm1(lam * times)) / lam**2

    lam1, lam2 = eig.lambda_i, eig.lambda_j
    divided = primitive_slope(lam1) if eig.repeated else (primitive(lam1) - primitive(lam2)) / (lam1 - lam2)
    # F(A) = F(lam2) I + F[lam1, lam2] (A - lam2 I)
    return primitive(lam2) - lam2 * divided, divided


def flow_samples(sys: AffineSystem2, x0: ArrayLike, times: ArrayLike) -> NDArray[np.float64]:
    """Evaluate the exact solution from `x0` at every entry of `times`.

    Inputs: sys (AffineSystem2, real spectrum), x0 (length-2), times (array-like of floats).
    Outputs: array of shape (len(times), 2).
    Raises: ComplexSpectrum.
    """

    eig = spectrum(sys)
    start = _as_vector(x0)
    t_arr = np.atleast_1d(np.asarray(times, dtype=float))
    c0, c1 = _exp_coefficients(eig, t_arr)
    scale = max(1.0, sys.trace * sys.trace)
    if abs(sys.det) > config.REPEATED_EIGENVALUE_TOL * scale:
        centre = equilibrium(sys)
        offset = start - centre
        moved = np.outer(c0, offset) + np.outer(c1, sys.A @ offset)
        return centre + moved
    g0, g1 = _integral_coefficients(eig, t_arr)
    homogeneous = np.outer(c0, start) + np.outer(c1, sys.A @ start)
    forced = np.outer(g0, sys.b) + np.outer(g1, sys.A @ sys.b)
    return homogeneous - forced


def flow(sys: AffineSystem2, x0: ArrayLike, t: float) -> Vector:
    """Return the exact state at time `t` of d/dt x = A x - b started at `x0`.

    Inputs: sys (AffineSystem2, real spectrum), x0 (length-2), t (float, any sign).
    Outputs: numpy array of shape (2,). The repeated-eigenvalue case uses t e^{lambda t} terms.
    Raises: ComplexSpectrum.
    """

    return flow_samples(sys, x0, [t])[0]


def critical_time(sys: AffineSystem2, x0: ArrayLike) -> float | None:
    """Return the positive time where the first coordinate of the flow is stationary, if any.

    Inputs: sys (AffineSystem2, real spectrum), x0 (length-2).
    Outputs: float t > 0 with d/dt x_1(t) = 0, or None. With real eigenvalues the derivative
    is a combination of two exponentials, so it has at most one zero.
    """

    eig = spectrum(sys)
    velocity = sys.vector_field(x0)
    if eig.repeated:
        slope = float((sys.A @ velocity - eig.lambda_i * velocity)[0])
        if slope == 0.0:
            return None
        t_c = -float(velocity[0]) / slope
        return t_c if t_c > 0.0 else None

    lam1, lam2 = eig.lambda_i, eig.lambda_j
    weight_1 = float((sys.A @ velocity - lam2 * velocity)[0])
    weight_2 = float((sys.A @ velocity - lam1 * velocity)[0])
    # x1'(t) (lam1 - lam2) = weight_1 e^{lam1 t} - weight_2 e^{lam2 t}
    if weight_1 == 0.0 or weight_2 == 0.0:
        return None
    ratio = weight_2 / weight_1
    if ratio <= 1.0:
        return None
    return math.log(ratio) / (lam1 - lam2)


def crossing_time(sys: AffineSystem2, x0: ArrayLike, t_lo: float, t_hi: float) -> float:
    """Refine the time in [t_lo, t_hi] where the first flow coordinate vanishes.

    Inputs: sys (AffineSystem2), x0 (length-2), bracket t_lo < t_hi whose endpoint values of
    x_1 have opposite signs (or one is exactly zero).
    Outputs: float t* found with Brent's method to near machine precision.
    Raises: NoSignChange when the bracket encloses no sign change.
    """

    start = _as_vector(x0)

    def first_coordinate(t: float) -> float:
        return float(flow(sys, start, t)[0])

    value_lo = first_coordinate(t_lo)
    value_hi = first_coordinate(t_hi)
    if value_lo == 0.0:
        return t_lo
    if value_hi == 0.0:
        return t_hi
    if value_lo * value_hi > 0.0:
        raise NoSignChange(
            f"x_1 keeps its sign on [{t_lo:.6g}, {t_hi:.6g}] (values {value_lo:.3g}, {value_hi:.3g})"
        )
    try:
        root = brentq(
            first_coordinate,
            t_lo,
            t_hi,
            xtol=config.HALF_MAP_XTOL,
            rtol=config.HALF_MAP_RTOL,
            maxiter=config.ROOT_MAXITER,
        )
    except RuntimeError as exc:
        raise BracketFailure(f"crossing refinement did not converge: {exc}") from exc
    logger.debug("crossing refined at t=%.17g", root)
    return float(root)


def lie_rows(sys: AffineSystem2, y: float) -> tuple[float, float]:
    """Return (x-velocity, second Lie derivative along the flow) at the point (0, y)."""

    point = np.array([0.0, y])
    velocity = sys.vector_field(point)
    return float(velocity[0]), float(sys.A[0] @ velocity)
