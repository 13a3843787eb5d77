"""Sweep the convection threshold epsilon and tabulate the crossing cycles.

Inputs: base `WelanderParams` and a sequence of epsilon values.
Outputs: One `ScanRow` per epsilon, in input order, optionally evaluated in worker processes.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..errors import InternalDefect, InvalidParameters, WelanderError
from ..poincare import find_cycle
from ..welander import NO_CYCLE_REASONS, WelanderParams, regime

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class ScanRow:
    epsilon: float
    has_cycle: bool
    y_upper: float | None = None
    y_lower: float | None = None
    period: float | None = None
    multiplier: float | None = None
    reason: str | None = None

    @property
    def amplitude(self) -> float | None:
        if self.y_upper is None or self.y_lower is None:
            return None
        return self.y_upper - self.y_lower


def _scan_point(base: WelanderParams, epsilon: float) -> ScanRow:
    params = base.with_epsilon(epsilon)
    try:
        cycle = find_cycle(params)
    except (WelanderError, InternalDefect) as exc:
        logger.warning("epsilon=%.6g: %s: %s", epsilon, type(exc).__name__, exc)
        return ScanRow(epsilon, False, reason=f"error:{type(exc).__name__}")
    if cycle is None:
        return ScanRow(epsilon, False, reason=NO_CYCLE_REASONS[regime(params)])
    return ScanRow(epsilon, True, cycle.y_upper, cycle.y_lower, cycle.period, cycle.multiplier)


def scan_epsilon(base: WelanderParams, eps_list: Sequence[float], workers: int = 1) -> list[ScanRow]:
    """Run `find_cycle` for every epsilon in `eps_list`.

    Inputs: base (WelanderParams whose epsilon is replaced), eps_list (non-empty), workers
    (number of processes; 1 runs inline).
    Outputs: list[ScanRow] in the order of `eps_list`. Rows without a cycle carry the regime
    reason, or "error:<class>" when a point failed.
    Raises: InvalidParameters for an empty list or a non-positive worker count.
    """

    values = [float(value) for value in eps_list]
    if not values:
        raise InvalidParameters("epsilon list must not be empty")
    if workers < 1:
        raise InvalidParameters(f"workers must be at least 1, got {workers}")
    if workers == 1 or len(values) == 1:
        return [_scan_point(base, value) for value in values]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_scan_point, [base] * len(values), values))
