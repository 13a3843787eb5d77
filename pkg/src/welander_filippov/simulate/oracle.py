"""Fixed-step fourth-order Runge-Kutta oracle for the raw Welander model.

Inputs: a convection law (`NonsmoothLaw` or `SmoothLaw`), `WelanderParams`, an initial state in
the raw frame (x = rho - epsilon, y = T), a horizon and a step.
Outputs: `Trajectory` sampled at every step. Steps that straddle the switching line are bisected
to the crossing before the law switches, so the oracle stays independent of the exact flows.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence

import numpy as np

from .. import config
from ..dynamics.filippov import Side
from ..errors import EscapingStart, InvalidParameters
from ..welander import ConvectionLaw, SmoothLaw, WelanderParams, convection_rate
from .trajectory import Event, EventKind, Segment, SegmentKind, Trajectory

logger = logging.getLogger(__name__)

Field = Callable[[float, float], tuple[float, float]]


def _raw_velocity(params: WelanderParams, k: float, x: float, y: float) -> tuple[float, float]:
    dx = -(k + params.beta) * x + params.alpha * (1.0 - params.beta) * y - params.alpha + params.beta
    dx -= (k + params.beta) * params.epsilon
    return dx, -(1.0 + k) * y + 1.0


def _rk4(field: Field, x: float, y: float, h: float) -> tuple[float, float]:
    k1 = field(x, y)
    k2 = field(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1])
    k3 = field(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1])
    k4 = field(x + h * k3[0], y + h * k3[1])
    return (
        x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    )


def _bisect_step(
    advance: Callable[[float], tuple[float, float]], keeps: Callable[[float, float], bool], h: float, tol: float
) -> float:
    """Return the smallest step (to within `tol`) after which `keeps` fails."""

    lo, hi = 0.0, h
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if keeps(*advance(mid)):
            lo = mid
        else:
            hi = mid
    return hi


def _linear_evaluator(rows: np.ndarray) -> Callable[[float], tuple[float, float]]:
    def evaluate(t: float) -> tuple[float, float]:
        return float(np.interp(t, rows[:, 0], rows[:, 1])), float(np.interp(t, rows[:, 0], rows[:, 2]))

    return evaluate


class _Recorder:
    """Collect step rows and cut them into segments at switching events."""

    def __init__(self, kind: SegmentKind, t: float, x: float, y: float) -> None:
        self.kind = kind
        self.rows: list[tuple[float, float, float]] = [(t, x, y)]
        self.segments: list[Segment] = []
        self.events: list[Event] = []

    def add(self, t: float, x: float, y: float) -> None:
        self.rows.append((t, x, y))

    def switch(self, kind: SegmentKind, event: Event | Sequence[Event]) -> None:
        self._close()
        t, x, y = self.rows[-1]
        self.kind = kind
        self.rows = [(t, x, y)]
        self.events.extend([event] if isinstance(event, Event) else event)

    def _close(self) -> None:
        table = np.array(self.rows, dtype=float)
        self.segments.append(Segment(self.kind, float(table[0, 0]), float(table[-1, 0]), table, _linear_evaluator(table)))

    def finish(self) -> Trajectory:
        self._close()
        t, x, y = self.rows[-1]
        self.events.append(Event(t, EventKind.TIME_LIMIT, (x, y)))
        return Trajectory(tuple(self.segments), tuple(self.events))


def _normal_speeds(params: WelanderParams, y: float) -> tuple[float, float]:
    return _raw_velocity(params, params.k0, 0.0, y)[0], _raw_velocity(params, params.k1, 0.0, y)[0]


def _mode_on_line(params: WelanderParams, y: float, arrival: Side | None) -> SegmentKind:
    left, right = _normal_speeds(params, y)
    if left > 0.0 and right > 0.0:
        return SegmentKind.RIGHT_ZONE
    if left < 0.0 and right < 0.0:
        return SegmentKind.LEFT_ZONE
    if left >= 0.0 >= right:
        return SegmentKind.SLIDING
    if arrival is None:
        raise EscapingStart(f"(0, {y:.6g}) is an escaping point of the switching line")
    return SegmentKind.RIGHT_ZONE if arrival is Side.LEFT else SegmentKind.LEFT_ZONE


def _sliding_speed(params: WelanderParams, y: float) -> float:
    left, right = _normal_speeds(params, y)
    weight = left / (left - right)
    return (1.0 - weight) * _raw_velocity(params, params.k0, 0.0, y)[1] + weight * _raw_velocity(params, params.k1, 0.0, y)[1]


def _is_sliding(params: WelanderParams, y: float) -> bool:
    left, right = _normal_speeds(params, y)
    return left > 0.0 > right


def oracle_rk4(model: ConvectionLaw, params: WelanderParams, x0: Sequence[float], T: float, h: float) -> Trajectory:
    """Integrate the raw Welander model with classical RK4 at fixed step h.

    Inputs: model (NonsmoothLaw or SmoothLaw), params, x0 = (x, y) in the raw frame, T > 0, h > 0.
    Outputs: Trajectory with one row per step. The non-smooth law switches at bisected crossings
    and follows the Filippov sliding field on sliding points; the smooth law only records the
    crossings of x = 0 so that section returns are comparable.
    Raises: InvalidParameters for non-positive T or h; EscapingStart for a non-smooth start on an
    escaping point.
    """

    if not (T > 0.0 and h > 0.0):
        raise InvalidParameters(f"horizon and step must be positive, got T={T}, h={h}")
    x, y = float(x0[0]), float(x0[1])
    smooth = isinstance(model, SmoothLaw)

    def zone_field(kind: SegmentKind) -> Field:
        if smooth:
            return lambda u, v: _raw_velocity(params, convection_rate(u + params.epsilon, model, params), u, v)
        rate = params.k0 if kind is SegmentKind.LEFT_ZONE else params.k1
        return lambda u, v: _raw_velocity(params, rate, u, v)

    if x < 0.0:
        kind = SegmentKind.LEFT_ZONE
    elif x > 0.0:
        kind = SegmentKind.RIGHT_ZONE
    elif smooth:
        kind = SegmentKind.RIGHT_ZONE if zone_field(SegmentKind.RIGHT_ZONE)(x, y)[0] > 0.0 else SegmentKind.LEFT_ZONE
    else:
        kind = _mode_on_line(params, y, None)
    recorder = _Recorder(kind, 0.0, x, y)
    if kind is SegmentKind.SLIDING:
        recorder.events.append(Event(0.0, EventKind.ENTER_SLIDING, (x, y)))

    switch_tol = float(config.get_integrator_settings()["oracle_switch_tol"])
    t = 0.0
    steps = 0
    while T - t > switch_tol:
        step = min(h, T - t)
        steps += 1
        if kind is SegmentKind.SLIDING:

            def glide(s: float, start: float = y) -> tuple[float, float]:
                return 0.0, _rk4(lambda _, v: (0.0, _sliding_speed(params, v)), 0.0, start, s)[1]

            _, y_next = glide(step)
            if _is_sliding(params, y_next):
                t, y = t + step, y_next
                recorder.add(t, 0.0, y)
                continue
            used = _bisect_step(glide, lambda _, v: _is_sliding(params, v), step, switch_tol)
            t, (_, y) = t + used, glide(used)
            x = 0.0
            recorder.add(t, x, y)
            left, _ = _normal_speeds(params, y)
            kind_next = SegmentKind.LEFT_ZONE if left <= 0.0 else SegmentKind.RIGHT_ZONE
            recorder.switch(kind_next, Event(t, EventKind.LEAVE_SLIDING, (x, y), at_fold=True))
            kind = kind_next
            continue

        field = zone_field(kind)
        sign = -1.0 if kind is SegmentKind.LEFT_ZONE else 1.0
        x_next, y_next = _rk4(field, x, y, step)
        if sign * x_next >= 0.0 or (x == 0.0 and x_next == 0.0):
            t, x, y = t + step, x_next, y_next
            recorder.add(t, x, y)
            continue

        start_x, start_y = x, y
        used = _bisect_step(lambda s: _rk4(field, start_x, start_y, s), lambda u, _: sign * u > 0.0, step, switch_tol)
        t, (_, y) = t + used, _rk4(field, start_x, start_y, used)
        x = 0.0
        recorder.add(t, x, y)
        arrival = Side.LEFT if kind is SegmentKind.LEFT_ZONE else Side.RIGHT
        if smooth:
            kind_next = SegmentKind.RIGHT_ZONE if arrival is Side.LEFT else SegmentKind.LEFT_ZONE
        else:
            kind_next = _mode_on_line(params, y, arrival)
        if kind_next is SegmentKind.SLIDING:
            event = Event(t, EventKind.ENTER_SLIDING, (x, y))
        else:
            detail = f"{arrival.value}_to_{kind_next.value}"
            event = Event(t, EventKind.CROSS, (x, y), detail=detail)
        recorder.switch(kind_next, event)
        kind = kind_next

    logger.debug("oracle finished %d steps at t=%.6g", steps, t)
    return recorder.finish()
