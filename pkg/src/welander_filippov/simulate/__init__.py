"""Expose the trajectory-generation API.

Inputs: Proxied to the exact integrator, the RK4 oracle and the epsilon sweep.
Outputs: Re-exported utilities so callers can import from `welander_filippov.simulate`.
"""

from __future__ import annotations

from .integrator import integrate
from .oracle import oracle_rk4
from .scan import ScanRow, scan_epsilon
from .trajectory import Event, EventKind, Segment, SegmentKind, Trajectory, section_returns

__all__ = [
    "Event",
    "EventKind",
    "ScanRow",
    "Segment",
    "SegmentKind",
    "Trajectory",
    "integrate",
    "oracle_rk4",
    "scan_epsilon",
    "section_returns",
]
