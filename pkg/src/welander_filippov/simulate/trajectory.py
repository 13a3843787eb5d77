"""Trajectory containers shared by the exact and oracle integrators.

Inputs: Segments and events produced by `simulate.integrator` and `simulate.oracle`.
Outputs: `Trajectory` with ordered `Segment` arcs (left zone, right zone, sliding), ordered
`Event` records, state lookup at any time and flat sample rows for CSV export.
"""

from __future__ import annotations

import bisect
from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from ..dynamics.filippov import Side
from ..errors import OutOfDomain


class SegmentKind(str, Enum):
    LEFT_ZONE = "left"
    RIGHT_ZONE = "right"
    SLIDING = "sliding"

    @classmethod
    def for_side(cls, side: Side) -> SegmentKind:
        return cls.LEFT_ZONE if side is Side.LEFT else cls.RIGHT_ZONE

    @property
    def side(self) -> Side | None:
        if self is SegmentKind.SLIDING:
            return None
        return Side.LEFT if self is SegmentKind.LEFT_ZONE else Side.RIGHT


class EventKind(str, Enum):
    CROSS = "cross_sigma"
    ENTER_SLIDING = "enter_sliding"
    LEAVE_SLIDING = "leave_sliding"
    REACH_ESCAPING = "reach_escaping"
    EQUILIBRATED = "equilibrated"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True, slots=True)
class Event:
    """One switching-line or stopping event; `detail` names the crossing direction."""

    t: float
    kind: EventKind
    state: tuple[float, float]
    detail: str = ""
    at_fold: bool = False

    def as_dict(self) -> dict[str, object]:
        return {
            "t": self.t,
            "kind": self.kind.value,
            "x": self.state[0],
            "y": self.state[1],
            "detail": self.detail,
            "at_fold": self.at_fold,
        }


@dataclass(frozen=True, slots=True, eq=False)
class Segment:
    """A single arc on [t_start, t_end].

    Inputs: kind, the time span, the sample table (rows t, x, y including both endpoints) and an
    evaluator returning the state at any absolute time inside the span.
    Outputs: Immutable arc; `state_at` defers to the evaluator.
    """

    kind: SegmentKind
    t_start: float
    t_end: float
    samples: NDArray[np.float64]
    evaluator: Callable[[float], tuple[float, float]]

    @property
    def start(self) -> tuple[float, float]:
        return float(self.samples[0, 1]), float(self.samples[0, 2])

    @property
    def end(self) -> tuple[float, float]:
        return float(self.samples[-1, 1]), float(self.samples[-1, 2])

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def state_at(self, t: float) -> tuple[float, float]:
        if t == self.t_end:
            return self.end
        return self.evaluator(t)


@dataclass(frozen=True, slots=True)
class Trajectory:
    segments: tuple[Segment, ...]
    events: tuple[Event, ...]

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    @property
    def final_state(self) -> tuple[float, float]:
        return self.segments[-1].end

    @property
    def equilibrated(self) -> bool:
        return bool(self.events) and self.events[-1].kind is EventKind.EQUILIBRATED

    def events_of(self, kind: EventKind) -> list[Event]:
        return [event for event in self.events if event.kind is kind]

    def state_at(self, t: float) -> tuple[float, float]:
        """Return the state at time t; after an equilibrated stop the final state persists.

        Raises: OutOfDomain for t < 0, or t past the end of a trajectory that did not settle.
        """

        if t < self.segments[0].t_start:
            raise OutOfDomain(f"t = {t} precedes the trajectory start")
        if t > self.t_end:
            if self.equilibrated:
                return self.final_state
            raise OutOfDomain(f"t = {t} lies beyond the trajectory end {self.t_end}")
        starts = [segment.t_start for segment in self.segments]
        index = max(bisect.bisect_right(starts, t) - 1, 0)
        # segments share endpoints; prefer the earlier one at a shared boundary
        while index > 0 and self.segments[index].t_start == t and self.segments[index - 1].t_end == t:
            index -= 1
        return self.segments[index].state_at(t)

    def sample_rows(self) -> list[tuple[float, float, float, str, int]]:
        """Flatten the sample tables into (t, x, y, segment_kind, segment_index) rows."""

        rows = []
        for index, segment in enumerate(self.segments):
            for t, x, y in segment.samples:
                rows.append((float(t), float(x), float(y), segment.kind.value, index))
        return rows


def section_returns(trajectory: Trajectory) -> list[tuple[float, float]]:
    """Return (t, y) of every crossing from the right zone into the left zone, in time order."""

    return [
        (event.t, event.state[1])
        for event in trajectory.events
        if event.kind is EventKind.CROSS and event.detail == "right_to_left"
    ]


def sample_times(t_start: float, t_end: float, dt_sample: float) -> NDArray[np.float64]:
    """Return t_start, every multiple of dt_sample strictly inside the span, and t_end."""

    if t_end <= t_start:
        return np.array([t_start])
    first = int(np.floor(t_start / dt_sample)) + 1
    last = int(np.ceil(t_end / dt_sample)) - 1
    inner = np.arange(first, last + 1, dtype=float) * dt_sample
    inner = inner[(inner > t_start) & (inner < t_end)]
    return np.concatenate(([t_start], inner, [t_end]))
