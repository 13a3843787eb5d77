"""Exact event-driven integrator for planar piecewise-affine Filippov systems.

Inputs: `PiecewiseAffineSystem`, an initial state, a horizon T and an output spacing.
Outputs: `Trajectory` assembled from exact zone flows between switching-line hits and exact
(or tightly integrated) sliding arcs. The spacing only controls output density.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from numpy.typing import ArrayLike
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .. import config
from ..dynamics.affine2d import AffineSystem2, critical_time, crossing_time, equilibrium, flow, flow_samples, spectrum
from ..dynamics.filippov import (
    PiecewiseAffineSystem,
    SigmaClass,
    Side,
    classify_sigma_point,
    lie_derivatives,
    pseudo_equilibria,
    second_lie_derivatives,
    sliding_bounds,
    sliding_polynomials,
)
from ..errors import EscapingArrival, EscapingStart, InternalDefect, InvalidParameters
from .trajectory import Event, EventKind, Segment, SegmentKind, Trajectory, sample_times

logger = logging.getLogger(__name__)

_SIGN = {Side.LEFT: -1.0, Side.RIGHT: 1.0}
_TANGENCIES = (SigmaClass.LEFT_TANGENCY, SigmaClass.RIGHT_TANGENCY, SigmaClass.DOUBLE_TANGENCY)


@dataclass(slots=True)
class _Arc:
    segment: Segment
    t_end: float
    end: np.ndarray
    stop: EventKind | None


def _opposite(side: Side) -> Side:
    return Side.RIGHT if side is Side.LEFT else Side.LEFT


def _slides_from(pws: PiecewiseAffineSystem, y: float) -> bool:
    numerator, denominator = sliding_polynomials(pws)
    scale = denominator(y)
    if scale == 0.0:
        return False
    velocity = numerator(y) / scale
    if velocity == 0.0:
        return False
    nudged = y + math.copysign(1e-9 * (1.0 + abs(y)), velocity)
    return classify_sigma_point(pws, nudged) is SigmaClass.SLIDING


def _departure(pws: PiecewiseAffineSystem, y: float, arrival: Side | None, at_start: bool) -> SegmentKind | None:
    """Choose how the solution continues from (0, y); None means it stays put.

    Crossing points continue into the zone the fields point to. At a tangency a side is
    admissible when its field points into it, or is tangent with a visible fold. When both
    sides are admissible an arriving arc continues to the opposite side.
    """

    kind = classify_sigma_point(pws, y)
    if kind is SigmaClass.POSITIVE_CROSSING:
        return SegmentKind.RIGHT_ZONE
    if kind is SigmaClass.NEGATIVE_CROSSING:
        return SegmentKind.LEFT_ZONE
    if kind is SigmaClass.SLIDING:
        return SegmentKind.SLIDING
    bounds = sliding_bounds(pws, SigmaClass.ESCAPING)
    if kind is SigmaClass.ESCAPING:
        if at_start:
            raise EscapingStart(f"(0, {y:.6g}) lies on the escaping segment {bounds}; the forward solution is not unique")
        raise EscapingArrival(f"an arc reached the escaping segment {bounds} at y = {y:.17g}")

    left, right = lie_derivatives(pws, y)
    second_left, second_right = second_lie_derivatives(pws, y)
    tolerance = config.TANGENCY_TOL * (1.0 + abs(y))
    left_ok = left < -tolerance or (abs(left) <= tolerance and second_left < 0.0)
    right_ok = right > tolerance or (abs(right) <= tolerance and second_right > 0.0)
    if left_ok and right_ok:
        if at_start:
            raise EscapingStart(f"(0, {y:.6g}) bounds the escaping segment {bounds}; both zones are reachable")
        if arrival is None:
            raise EscapingArrival(f"a sliding arc ended at the escaping endpoint y = {y:.17g}")
        return SegmentKind.for_side(_opposite(arrival))
    if left_ok:
        return SegmentKind.LEFT_ZONE
    if right_ok:
        return SegmentKind.RIGHT_ZONE
    return SegmentKind.SLIDING if _slides_from(pws, y) else None


def _first_return(zone: AffineSystem2, origin: np.ndarray, side: Side, horizon: float) -> float | None:
    """Return the first positive time the zone flow from `origin` reaches x = 0, if within horizon."""

    sign = _SIGN[side]
    breaks = [0.0]
    turning = critical_time(zone, origin)
    if turning is not None and turning < horizon:
        breaks.append(turning)
    breaks.append(horizon)
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if lo == 0.0 and origin[0] == 0.0:
            # leaving the switching line: x moves away until the turning time
            continue
        if sign * flow(zone, origin, hi)[0] <= 0.0:
            return crossing_time(zone, origin, lo, hi)
    return None


def _settling_time(zone: AffineSystem2, side: Side, origin: np.ndarray) -> float | None:
    """Return when the flow is within tolerance of a real equilibrium of this zone, if ever."""

    if zone.det == 0.0:
        return None
    centre = equilibrium(zone)
    if _SIGN[side] * centre[0] <= 0.0:
        return None
    eig = spectrum(zone)
    if eig.lambda_i >= 0.0:
        return None

    offset = origin - centre
    tolerance = config.EQUILIBRIUM_TOL * (1.0 + float(np.linalg.norm(centre)))
    if eig.repeated:
        drift = float(np.linalg.norm((zone.A - eig.lambda_i * np.eye(2)) @ offset))
        size = float(np.linalg.norm(offset))

        def bound(s: float) -> float:
            return math.exp(eig.lambda_i * s) * (size + s * drift)

    else:
        part_i = (zone.A - eig.lambda_j * np.eye(2)) @ offset / (eig.lambda_i - eig.lambda_j)
        norm_i = float(np.linalg.norm(part_i))
        norm_j = float(np.linalg.norm(offset - part_i))

        def bound(s: float) -> float:
            return norm_i * math.exp(eig.lambda_i * s) + norm_j * math.exp(eig.lambda_j * s)

    if bound(0.0) <= tolerance:
        return 0.0
    hi = 1.0
    while bound(hi) > tolerance:
        hi *= 2.0
    return float(brentq(lambda s: bound(s) - tolerance, 0.0, hi, rtol=config.ROOT_RTOL, maxiter=config.ROOT_MAXITER))


def _zone_evaluator(zone: AffineSystem2, origin: np.ndarray, t0: float) -> Callable[[float], tuple[float, float]]:
    def evaluate(t: float) -> tuple[float, float]:
        x, y = flow(zone, origin, t - t0)
        return float(x), float(y)

    return evaluate


def _zone_arc(pws: PiecewiseAffineSystem, side: Side, origin: np.ndarray, t0: float, T: float, dt: float) -> _Arc:
    zone = pws.zone(side)
    horizon = T - t0
    hit = _first_return(zone, origin, side, horizon)
    settle = _settling_time(zone, side, origin)

    if settle is not None and settle <= horizon and (hit is None or settle < hit):
        duration, stop = settle, EventKind.EQUILIBRATED
    elif hit is not None:
        duration, stop = hit, None
    else:
        duration, stop = horizon, EventKind.TIME_LIMIT

    t_end = t0 + duration
    end = flow(zone, origin, duration)
    if stop is None:
        end = np.array([0.0, end[1]])
    times = sample_times(t0, t_end, dt)
    states = flow_samples(zone, origin, times - t0)
    states[0] = origin
    states[-1] = end
    samples = np.column_stack((times, states))
    segment = Segment(SegmentKind.for_side(side), t0, t_end, samples, _zone_evaluator(zone, origin.copy(), t0))
    logger.debug("%s arc [%.17g, %.17g] ends at y=%.17g", side.value, t0, t_end, end[1])
    return _Arc(segment, t_end, end, stop)


def _padded(poly: Polynomial, size: int) -> np.ndarray:
    coef = np.zeros(size)
    trimmed = poly.trim().coef
    coef[: len(trimmed)] = trimmed
    return coef


def _sliding_arc(pws: PiecewiseAffineSystem, y0: float, t0: float, T: float, dt: float) -> _Arc:
    bounds = sliding_bounds(pws)
    if bounds is None:
        raise InternalDefect("sliding was entered but the system has no sliding segment")
    lower, upper = bounds
    numerator, denominator = sliding_polynomials(pws)
    num = _padded(numerator, 3)
    den = _padded(denominator, 2)
    horizon = T - t0
    if den[1] == 0.0 and num[2] == 0.0:
        return _affine_sliding_arc(num[0] / den[0], num[1] / den[0], bounds, y0, t0, horizon, dt)
    return _numeric_sliding_arc(pws, numerator, denominator, lower, upper, y0, t0, horizon, dt)


def _affine_sliding_arc(
    p: float, q: float, bounds: tuple[float, float], y0: float, t0: float, horizon: float, dt: float
) -> _Arc:
    """Solve d/dt y = p + q y exactly and stop at a fold endpoint, a stable pseudo-equilibrium or the horizon."""

    lower, upper = bounds
    target = -p / q if q != 0.0 else math.nan

    def position(s: float) -> float:
        if q == 0.0:
            return y0 + p * s
        return target + (y0 - target) * math.exp(q * s)

    exits: list[tuple[float, EventKind | None, float]] = [(horizon, EventKind.TIME_LIMIT, math.nan)]
    for endpoint in (lower, upper):
        if not math.isfinite(endpoint):
            continue
        if q == 0.0:
            duration = (endpoint - y0) / p if p != 0.0 else -1.0
        else:
            ratio = (endpoint - target) / (y0 - target) if y0 != target else -1.0
            duration = math.log(ratio) / q if ratio > 0.0 and ratio != 1.0 else -1.0
        if duration > 0.0:
            exits.append((duration, None, endpoint))

    if q == 0.0 and p == 0.0:
        exits.append((0.0, EventKind.EQUILIBRATED, y0))
    elif q < 0.0 and lower < target < upper:
        gap = abs(y0 - target)
        tolerance = config.EQUILIBRIUM_TOL * (1.0 + abs(target))
        exits.append((0.0 if gap <= tolerance else math.log(gap / tolerance) / -q, EventKind.EQUILIBRATED, math.nan))

    duration, stop, endpoint = min(exits, key=lambda item: item[0])
    duration = min(duration, horizon)
    y_end = endpoint if stop is None else position(duration)
    times = sample_times(t0, t0 + duration, dt)
    ys = np.array([position(t - t0) for t in times])
    ys[0], ys[-1] = y0, y_end
    samples = np.column_stack((times, np.zeros_like(times), ys))

    def evaluate(t: float) -> tuple[float, float]:
        return 0.0, position(t - t0)

    segment = Segment(SegmentKind.SLIDING, t0, t0 + duration, samples, evaluate)
    return _Arc(segment, t0 + duration, np.array([0.0, y_end]), stop)


def _numeric_sliding_arc(
    pws: PiecewiseAffineSystem,
    numerator: Polynomial,
    denominator: Polynomial,
    lower: float,
    upper: float,
    y0: float,
    t0: float,
    horizon: float,
    dt: float,
) -> _Arc:
    """Integrate a non-affine sliding field with solve_ivp, stopping at endpoints and attractors."""

    def rhs(_: float, state: np.ndarray) -> list[float]:
        return [float(numerator(state[0]) / denominator(state[0]))]

    events = []
    levels = []
    for endpoint, direction in ((lower, -1.0), (upper, 1.0)):
        if math.isfinite(endpoint):
            events.append(_level_event(endpoint, direction, 0.0))
            levels.append(endpoint)
    for item in pseudo_equilibria(pws):
        if item.stable and item.region is SigmaClass.SLIDING:
            tolerance = config.EQUILIBRIUM_TOL * (1.0 + abs(item.y))
            events.append(_level_event(item.y, -1.0, tolerance, absolute=True))

    solution = solve_ivp(
        rhs,
        (t0, t0 + horizon),
        [y0],
        events=events,
        dense_output=True,
        rtol=config.SLIDING_RTOL,
        atol=config.SLIDING_ATOL,
    )
    t_end = float(solution.t[-1])
    y_end = float(solution.y[0, -1])
    stop: EventKind | None = EventKind.TIME_LIMIT
    for index, hits in enumerate(solution.t_events):
        if len(hits):
            t_end = float(hits[0])
            y_end = float(solution.y_events[index][0][0])
            if index < len(levels):
                stop, y_end = None, levels[index]
            else:
                stop = EventKind.EQUILIBRATED
            break

    dense = solution.sol
    times = sample_times(t0, t_end, dt)
    ys = np.array([float(dense(t)[0]) for t in times])
    ys[0], ys[-1] = y0, y_end
    samples = np.column_stack((times, np.zeros_like(times), ys))

    def evaluate(t: float) -> tuple[float, float]:
        return 0.0, float(dense(t)[0])

    segment = Segment(SegmentKind.SLIDING, t0, t_end, samples, evaluate)
    return _Arc(segment, t_end, np.array([0.0, y_end]), stop)


def _level_event(
    level: float, direction: float, tolerance: float, absolute: bool = False
) -> Callable[[float, np.ndarray], float]:
    def event(_: float, state: np.ndarray) -> float:
        if absolute:
            return abs(state[0] - level) - tolerance
        return state[0] - level

    event.terminal = True  # type: ignore[attr-defined]
    event.direction = direction  # type: ignore[attr-defined]
    return event


def integrate(pws: PiecewiseAffineSystem, x0: ArrayLike, T: float, dt_sample: float) -> Trajectory:
    """Integrate the Filippov solution from `x0` up to time T.

    Inputs: pws (PiecewiseAffineSystem with real spectra), x0 (length-2), T > 0, dt_sample > 0.
    Outputs: Trajectory whose last event is Equilibrated (within 1e-12 of a real equilibrium or a
    stable pseudo-equilibrium) or TimeLimit. Crossings record the direction, e.g. "right_to_left".
    Raises: InvalidParameters for a non-positive horizon or spacing; EscapingStart when x0 lies
    on the closure of the escaping segment; EscapingArrival (a defect) when an arc lands inside it.
    """

    if not (T > 0.0 and dt_sample > 0.0):
        raise InvalidParameters(f"horizon and sample spacing must be positive, got T={T}, dt_sample={dt_sample}")
    point = np.asarray(x0, dtype=float).reshape(2).copy()
    if not np.all(np.isfinite(point)):
        raise InvalidParameters(f"initial state must be finite, got {point.tolist()}")

    max_segments = int(config.get_integrator_settings()["max_segments"])
    segments: list[Segment] = []
    events: list[Event] = []
    t = 0.0
    if point[0] < 0.0:
        mode: SegmentKind | None = SegmentKind.LEFT_ZONE
    elif point[0] > 0.0:
        mode = SegmentKind.RIGHT_ZONE
    else:
        mode = _departure(pws, float(point[1]), None, at_start=True)
        if mode is SegmentKind.SLIDING:
            events.append(Event(0.0, EventKind.ENTER_SLIDING, (0.0, float(point[1]))))
    if mode is None:
        samples = np.array([[0.0, point[0], point[1]]])
        segments.append(Segment(SegmentKind.SLIDING, 0.0, 0.0, samples, lambda _: (0.0, float(point[1]))))
        events.append(Event(0.0, EventKind.EQUILIBRATED, (0.0, float(point[1])), at_fold=True))
        return Trajectory(tuple(segments), tuple(events))

    while True:
        if len(segments) >= max_segments:
            logger.warning("segment cap %d reached at t=%.6g; stopping", max_segments, t)
            events.append(Event(t, EventKind.TIME_LIMIT, (float(point[0]), float(point[1])), detail="segment_cap"))
            break

        if mode is SegmentKind.SLIDING:
            arc = _sliding_arc(pws, float(point[1]), t, T, dt_sample)
        else:
            side = mode.side
            assert side is not None
            arc = _zone_arc(pws, side, point, t, T, dt_sample)
        segments.append(arc.segment)
        t, point = arc.t_end, arc.end
        state = (float(point[0]), float(point[1]))
        if arc.stop is not None:
            events.append(Event(t, arc.stop, state))
            break

        y = state[1]
        if mode is SegmentKind.SLIDING:
            events.append(Event(t, EventKind.LEAVE_SLIDING, state, at_fold=True))
            following = _departure(pws, y, None, at_start=False)
            if following is None or following is SegmentKind.SLIDING:
                events.append(Event(t, EventKind.EQUILIBRATED, state, at_fold=True))
                break
            logger.debug("left sliding at y=%.17g into the %s zone", y, following.value)
            mode = following
            continue

        arrival = mode.side
        assert arrival is not None
        at_fold = classify_sigma_point(pws, y) in _TANGENCIES
        following = _departure(pws, y, arrival, at_start=False)
        if following is None:
            events.append(Event(t, EventKind.EQUILIBRATED, state, at_fold=at_fold))
            break
        if following is SegmentKind.SLIDING:
            events.append(Event(t, EventKind.ENTER_SLIDING, state, at_fold=at_fold))
        elif following is not mode:
            if at_fold and classify_sigma_point(pws, y) is not SigmaClass.DOUBLE_TANGENCY:
                left, right = lie_derivatives(pws, y)
                if left <= 0.0 <= right:
                    events.append(Event(t, EventKind.REACH_ESCAPING, state, at_fold=True))
            detail = f"{arrival.value}_to_{_opposite(arrival).value}"
            events.append(Event(t, EventKind.CROSS, state, detail=detail, at_fold=at_fold))
        mode = following

    return Trajectory(tuple(segments), tuple(events))
