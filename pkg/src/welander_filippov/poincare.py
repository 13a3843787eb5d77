"""Poincare half maps, the displacement function and certified crossing limit cycles.

Inputs: `WelanderParams`, or a canonical `PiecewiseAffineSystem` for the half-map and Taylor
utilities.
Outputs: Flight-time parametrisations of the left and right half maps, their inverses and
tangency Taylor data, the displacement function, the unique stable crossing cycle when the
regime allows one, and the trace-area identity residual that certifies it.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from . import config
from .dynamics.affine2d import AffineSystem2, flow_samples, psi, spectrum
from .dynamics.filippov import PiecewiseAffineSystem, Side
from .errors import (
    AsymptoteReached,
    BracketFailure,
    DegenerateBeta,
    InvalidParameters,
    NonzeroOffset,
    OutOfDomain,
    WrongRegime,
)
from .welander import Regime, WelanderParams, canonical_system, regime

logger = logging.getLogger(__name__)

MapSource = WelanderParams | PiecewiseAffineSystem


@dataclass(frozen=True, slots=True)
class HalfMapPoint:
    t: float
    y_start: float
    y_end: float


@dataclass(frozen=True, slots=True)
class TaylorData:
    d1: float
    d2: float
    d3: float
    d4: float


@dataclass(frozen=True, slots=True)
class CrossingCycle:
    """A crossing limit cycle through (0, y_upper) and (0, y_lower)."""

    y_upper: float
    y_lower: float
    t_left: float
    t_right: float
    multiplier: float

    @property
    def period(self) -> float:
        return self.t_left + self.t_right

    @property
    def amplitude(self) -> float:
        return self.y_upper - self.y_lower


@dataclass(frozen=True, slots=True)
class HalfMap:
    """Transition map of one canonical zone, in coordinates u = y - shift.

    Inputs: built by `half_map` from the zone d/dt x = tr x - (y - shift), d/dt y = det x - a.
    Outputs: `start(t)` and `end(t)` give the departure and arrival heights after flight time t;
    `forward` and `backward` invert them; `derivative(t)` is the map slope at that flight time.
    """

    side: Side
    a: float
    trace: float
    det: float
    lambda_i: float
    lambda_j: float
    shift: float

    @property
    def asymptote(self) -> float:
        return self.a / self.lambda_j

    def values(self, t: float) -> tuple[float, float]:
        li, lj, a, det = self.lambda_i, self.lambda_j, self.a, self.det
        if li > 0.0 or t * max(abs(li), abs(lj)) <= config.HALF_MAP_SCALED_EXPONENT:
            with np.errstate(over="ignore", invalid="ignore"):
                denominator = det * np.exp(lj * t) * np.expm1((li - lj) * t)
                start = a * psi(li, lj, t) / denominator
                end = -a * np.exp((li + lj) * t) * psi(li, lj, -t) / denominator
            return float(start), float(end)

        # both eigenvalues negative and t large: divide through by e^{lambda_i t}
        with np.errstate(over="ignore"):
            gap = -np.expm1((lj - li) * t)
            start = a / det * ((li - lj) * np.exp(-li * t) + lj - li * np.exp((lj - li) * t)) / gap
            end = -a / det * ((li - lj) * np.exp(lj * t) + lj * np.exp((lj - li) * t) - li) / gap
        return float(start), float(end)

    def start(self, t: float) -> float:
        return self.values(t)[0]

    def end(self, t: float) -> float:
        return self.values(t)[1]

    def derivative(self, t: float) -> float:
        """Slope of the map at the point reached with flight time t: -psi(t) / psi(-t)."""

        return -float(psi(self.lambda_i, self.lambda_j, t)) / float(psi(self.lambda_i, self.lambda_j, -t))

    def forward(self, u: float) -> tuple[float, float]:
        """Return (arrival u, flight time) for departure height u."""

        t = _solve_flight_time(self.start, u)
        if t is None:
            raise OutOfDomain(f"departure height {u:.6g} is beyond the {self.side.value} map range")
        return self.end(t), t

    def backward(self, u: float) -> tuple[float, float]:
        """Return (departure u, flight time) for arrival height u."""

        t = _solve_flight_time(self.end, u)
        if t is None:
            raise AsymptoteReached(f"arrival height {u:.6g} is not reached before the asymptote")
        return self.start(t), t

    def taylor(self) -> TaylorData:
        """Derivatives of the map at its tangency point u = 0."""

        c = -self.trace
        li, lj, a = self.lambda_i, self.lambda_j, self.a
        quartic = 22.0 * li**3 + 57.0 * li**2 * lj + 57.0 * li * lj**2 + 22.0 * lj**3
        return TaylorData(
            d1=-1.0,
            d2=4.0 * c / (3.0 * a),
            d3=-8.0 * c * c / (3.0 * a * a),
            d4=-16.0 * quartic / (45.0 * a**3),
        )


def _solve_flight_time(profile: Callable[[float], float], target: float) -> float | None:
    """Invert a profile with profile(0) = 0 and |profile| increasing; None past the cap."""

    if target == 0.0:
        return 0.0
    sign = math.copysign(1.0, target)
    goal = abs(target)

    def residual(t: float) -> float:
        return sign * profile(t) - goal

    lo = config.HALF_MAP_T_START
    while residual(lo) >= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise OutOfDomain(f"height {target:.3g} is too close to the tangency to resolve")

    previous, hi = lo, max(config.HALF_MAP_T_INITIAL_HI, 2.0 * lo)
    while True:
        value = residual(hi)
        while not math.isfinite(value):
            hi = 0.5 * (previous + hi)
            value = residual(hi)
        if value >= 0.0:
            break
        if hi >= config.HALF_MAP_T_CAP:
            return None
        previous, hi = hi, min(2.0 * hi, config.HALF_MAP_T_CAP)
        logger.debug("flight-time bracket expanded to %.6g", hi)

    try:
        root = brentq(
            residual,
            previous if residual(previous) < 0.0 else lo,
            hi,
            xtol=config.HALF_MAP_XTOL,
            rtol=config.HALF_MAP_RTOL,
            maxiter=config.ROOT_MAXITER,
        )
    except RuntimeError as exc:
        raise BracketFailure(f"flight-time inversion did not converge: {exc}") from exc
    return float(root)


def _canonical_source(source: MapSource) -> PiecewiseAffineSystem:
    if isinstance(source, WelanderParams):
        if source.beta == 1.0:
            raise DegenerateBeta("beta = 1 gives repeated eigenvalues; half maps need distinct ones")
        return canonical_system(source)
    return source


def half_map(source: MapSource, side: Side) -> HalfMap:
    """Return the half map of one zone.

    Inputs: source (WelanderParams or canonical PiecewiseAffineSystem), side (Side).
    Outputs: HalfMap. The left map needs a > 0 and the right map a < 0 (virtual node).
    Raises: WrongRegime when the sign condition fails; DegenerateBeta for repeated eigenvalues;
    InvalidParameters when the zone is not in companion form.
    """

    zone: AffineSystem2 = _canonical_source(source).zone(side)
    if zone.A[0, 1] != -1.0 or zone.A[1, 1] != 0.0:
        raise InvalidParameters(f"{side.value} zone is not in Lienard canonical form")
    eig = spectrum(zone)
    if eig.repeated:
        raise DegenerateBeta(f"{side.value} zone has repeated eigenvalues")
    a = float(zone.b[1])
    needs_positive = side is Side.LEFT
    if (a > 0.0) != needs_positive or a == 0.0:
        relation = "> 0" if needs_positive else "< 0"
        raise WrongRegime(f"{side.value} half map needs a {relation} (virtual node), got a = {a:.6g}")
    return HalfMap(side, a, zone.trace, zone.det, eig.lambda_i, eig.lambda_j, float(-zone.b[0]))


def half_map_parametric(params: MapSource, side: Side, t: float) -> HalfMapPoint:
    """Return the departure and arrival heights of the orbit with flight time t.

    Inputs: params (WelanderParams or canonical system), side (Side), t > 0.
    Outputs: HalfMapPoint with absolute heights on the switching line.
    Raises: OutOfDomain for t <= 0, plus the errors of `half_map`.
    """

    if not t > 0.0:
        raise OutOfDomain(f"flight time must be positive, got {t}")
    transition = half_map(params, side)
    start, end = transition.values(t)
    return HalfMapPoint(t, transition.shift + start, transition.shift + end)


def left_map(params: MapSource, y0: float) -> tuple[float, float]:
    """Return (P_L(y0), flight time) for y0 > 0.

    Raises: OutOfDomain when y0 <= 0; WrongRegime when the left node is real.
    """

    transition = half_map(params, Side.LEFT)
    if not y0 > transition.shift:
        raise OutOfDomain(f"left map needs y0 > {transition.shift}, got {y0}")
    end, t = transition.forward(y0 - transition.shift)
    return transition.shift + end, t


def right_map(params: MapSource, y0: float) -> tuple[float, float]:
    """Return (P_R(y0), flight time) for y0 < B."""

    transition = half_map(params, Side.RIGHT)
    if not y0 < transition.shift:
        raise OutOfDomain(f"right map needs y0 < {transition.shift}, got {y0}")
    end, t = transition.forward(y0 - transition.shift)
    return transition.shift + end, t


def right_map_domain(params: MapSource) -> tuple[float, float]:
    """Return (B, B + a^R / lambda_j^R), the open range of the right map."""

    transition = half_map(params, Side.RIGHT)
    return transition.shift, transition.shift + transition.asymptote


def right_map_inverse(params: MapSource, y0: float) -> tuple[float, float]:
    """Return (y1, flight time) with y1 < B and P_R(y1) = y0.

    Inputs: params, y0 in (B, B + a^R / lambda_j^R).
    Outputs: tuple of floats.
    Raises: OutOfDomain outside the interval; AsymptoteReached within 1e-13 of its upper end.
    """

    transition = half_map(params, Side.RIGHT)
    lower, upper = transition.shift, transition.shift + transition.asymptote
    tolerance = config.ASYMPTOTE_TOL * (1.0 + abs(upper))
    if abs(upper - y0) <= tolerance:
        raise AsymptoteReached(f"y0 = {y0:.17g} sits on the right asymptote {upper:.17g}")
    if not lower < y0 < upper:
        raise OutOfDomain(f"right inverse map needs {lower:.6g} < y0 < {upper:.6g}, got {y0:.6g}")
    start, t = transition.backward(y0 - lower)
    return lower + start, t


def displacement(params: MapSource, y0: float) -> float:
    """Return P_L(y0) - P_R^{-1}(y0) on (max(0, B), B + a^R / lambda_j^R).

    Raises: OutOfDomain outside the shared domain, plus the half-map errors.
    """

    lower, upper = right_map_domain(params)
    if not max(0.0, lower) < y0 < upper:
        raise OutOfDomain(f"displacement needs {max(0.0, lower):.6g} < y0 < {upper:.6g}, got {y0:.6g}")
    return left_map(params, y0)[0] - right_map_inverse(params, y0)[0]


def cycle_multiplier(left: HalfMap, right: HalfMap, t_left: float, t_right: float) -> float:
    return left.derivative(t_left) * right.derivative(t_right)


def find_cycle(params: WelanderParams) -> CrossingCycle | None:
    """Locate the crossing limit cycle surrounding the escaping segment.

    Inputs: params (WelanderParams).
    Outputs: CrossingCycle when the regime is UniqueStableCycle, else None. The upper height is
    the root of the displacement on (B, B + a^R / lambda_j^R); the multiplier is the product of
    the closed-form half-map slopes at the converged flight times.
    Raises: BracketFailure when the displacement does not change sign (a defect).
    """

    current = regime(params)
    if current is not Regime.UNIQUE_STABLE_CYCLE:
        logger.info("no crossing cycle: regime %s", current.value)
        return None

    left = half_map(params, Side.LEFT)
    right = half_map(params, Side.RIGHT)
    lower = right.shift
    upper = lower + right.asymptote
    width = upper - lower

    def gap(y: float) -> float:
        return (left.shift + left.forward(y - left.shift)[0]) - (lower + right.backward(y - lower)[0])

    bracket_lo = lower + 1e-9 * width
    if gap(bracket_lo) >= 0.0:
        raise BracketFailure(f"displacement is not negative next to B = {lower:.6g}")
    bracket_hi = None
    for decade in range(1, config.CYCLE_BRACKET_DECADES + 1):
        candidate = upper - width * 10.0**-decade
        if gap(candidate) > 0.0:
            bracket_hi = candidate
            break
    if bracket_hi is None:
        raise BracketFailure("displacement stays negative up to the right asymptote")

    try:
        y_upper = brentq(
            gap, bracket_lo, bracket_hi, xtol=config.HALF_MAP_XTOL, rtol=config.HALF_MAP_RTOL, maxiter=config.ROOT_MAXITER
        )
    except RuntimeError as exc:
        raise BracketFailure(f"cycle refinement did not converge: {exc}") from exc

    y_lower, t_left = left.forward(y_upper - left.shift)
    _, t_right = right.backward(y_upper - lower)
    cycle = CrossingCycle(
        y_upper=float(y_upper),
        y_lower=float(left.shift + y_lower),
        t_left=t_left,
        t_right=t_right,
        multiplier=cycle_multiplier(left, right, t_left, t_right),
    )
    logger.info(
        "crossing cycle: y_upper=%.17g y_lower=%.17g period=%.6g multiplier=%.6g",
        cycle.y_upper,
        cycle.y_lower,
        cycle.period,
        cycle.multiplier,
    )
    return cycle


def taylor_at_tangency(params: MapSource, side: Side) -> TaylorData:
    """Return d1..d4 of one half map at its fold (y = 0 on the left, y = B on the right).

    d1 = -1, d2 = 4c/(3a), d3 = -8c^2/(3a^2), d4 = -16(22li^3 + 57li^2 lj + 57li lj^2 + 22lj^3)/(45a^3),
    with c = -tr and a the zone constant. Raises WrongRegime when the node on that side is real.
    """

    return half_map(params, side).taylor()


def full_map_taylor(source: MapSource) -> TaylorData:
    """Return the derivatives at 0 of the full return map P_R o P_L when both folds coincide.

    Inputs: source (WelanderParams with epsilon = 0, or a canonical system with b = 0) with
    virtual nodes on both sides.
    Outputs: TaylorData composed from the half-map series: d1 = +1,
    d2 = (4/3)(c_R/a^R - c_L/a^L), d3 and d4 by the chain rule. The gap between d3 and
    (3/2) d2^2 is logged as a diagnostic.
    Raises: NonzeroOffset when the folds are apart; WrongRegime.
    """

    if isinstance(source, WelanderParams) and source.epsilon != 0.0:
        raise NonzeroOffset(f"full-map Taylor data need epsilon = 0, got {source.epsilon}")
    left = half_map(source, Side.LEFT)
    right = half_map(source, Side.RIGHT)
    if left.shift != 0.0 or right.shift != 0.0:
        raise NonzeroOffset(f"full-map Taylor data need b = 0, got b = {right.shift:.6g}")

    inner, outer = left.taylor(), right.taylor()
    a2, a3, a4 = inner.d2 / 2.0, inner.d3 / 6.0, inner.d4 / 24.0
    c2, c3, c4 = outer.d2 / 2.0, outer.d3 / 6.0, outer.d4 / 24.0
    d2 = 2.0 * (c2 - a2)
    d3 = 6.0 * (-a3 - 2.0 * a2 * c2 - c3)
    d4 = 24.0 * (-a4 + c4 + c2 * a2 * a2 - 2.0 * a3 * c2 + 3.0 * a2 * c3)
    logger.info("full map: d3 - 1.5 d2^2 = %.3g", d3 - 1.5 * d2 * d2)
    return TaylorData(1.0, d2, d3, d4)


def _arc_area(zone: AffineSystem2, start: tuple[float, float], duration: float) -> float:
    if duration <= 0.0:
        return 0.0
    times = np.linspace(0.0, duration, config.AREA_SAMPLES)
    points = flow_samples(zone, start, times)
    velocity = points @ zone.A.T - zone.b
    integrand = points[:, 0] * velocity[:, 1] - points[:, 1] * velocity[:, 0]
    # chords on x = 0 contribute nothing to x dy - y dx
    return 0.5 * abs(float(simpson(integrand, x=times)))


def cycle_areas(params: WelanderParams, cycle: CrossingCycle) -> tuple[float, float]:
    """Return (sigma_L, sigma_R), the areas cut by the cycle on each side of the switching line."""

    system = canonical_system(params)
    sigma_left = _arc_area(system.left, (0.0, cycle.y_upper), cycle.t_left)
    sigma_right = _arc_area(system.right, (0.0, cycle.y_lower), cycle.t_right)
    return sigma_left, sigma_right


def area_identity_residual(params: WelanderParams, cycle: CrossingCycle) -> float:
    """Return tr(A^L) sigma_L + tr(A^R) sigma_R + b h for a cycle; zero for a true cycle.

    Inputs: params (WelanderParams), cycle (CrossingCycle).
    Outputs: float with h = y_upper - y_lower and b = (k0 - k1) epsilon. Areas use Simpson's
    rule on 4097 exact-flow samples per arc.
    """

    system = canonical_system(params)
    sigma_left, sigma_right = cycle_areas(params, cycle)
    height = cycle.y_upper - cycle.y_lower
    return system.left.trace * sigma_left + system.right.trace * sigma_right + params.sigma_offset * height


def cycle_polyline(params: WelanderParams, cycle: CrossingCycle, points: int) -> list[tuple[float, float, float, str]]:
    """Sample the cycle as (t, x, y, side) rows, left arc first, in the canonical frame."""

    if points < 2:
        raise InvalidParameters(f"a polyline needs at least two points per arc, got {points}")
    system = canonical_system(params)
    rows: list[tuple[float, float, float, str]] = []
    arcs = ((Side.LEFT, (0.0, cycle.y_upper), cycle.t_left, 0.0), (Side.RIGHT, (0.0, cycle.y_lower), cycle.t_right, cycle.t_left))
    for side, start, duration, offset in arcs:
        times = np.linspace(0.0, duration, points)
        for t, (x, y) in zip(times, flow_samples(system.zone(side), start, times)):
            rows.append((offset + float(t), float(x), float(y), side.value))
    return rows
