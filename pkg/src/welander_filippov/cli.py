"""Command-line interface for analysing the non-smooth Welander model.

Inputs: Subcommands `analyze`, `cycle`, `scan`, `trajectory` and `portrait`; parameters from
`--alpha/--beta/--epsilon/--k0/--k1`, a `--preset` name or a JSON `--config` file (flags win over
the file, the file over the preset); the `WELANDER_LOG` environment variable.
Outputs: JSON reports and CSV tables on standard output or `--out`. Exit code 0 on success
(including a legitimate `no_cycle`), 2 on invalid input and 3 on an internal defect, with a JSON
error object on standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import config, io
from .dynamics import (
    PiecewiseAffineSystem,
    Side,
    SigmaClass,
    equilibrium_status,
    fold_points,
    partition_sigma,
    pseudo_equilibria,
    sliding_bounds,
    spectrum,
)
from .errors import BoundaryEquilibriumCollision, InternalDefect, InvalidParameters, WelanderError
from .poincare import area_identity_residual, cycle_polyline, find_cycle
from .simulate import ScanRow, Trajectory, integrate, oracle_rk4, scan_epsilon
from .welander import (
    NO_CYCLE_REASONS,
    PARAMETER_NAMES,
    Regime,
    SmoothLaw,
    WelanderParams,
    canonical_constant,
    canonical_system,
    coupling,
    manifold_intercepts,
    preset,
    raw_system,
    regime,
    thresholds,
)

logger = logging.getLogger(__name__)

SCAN_HEADER = ("epsilon", "has_cycle", "y_upper", "y_lower", "period", "multiplier")
TRAJECTORY_HEADER = ("t", "x", "y", "segment_kind", "segment_index")
POLYLINE_HEADER = ("t", "x", "y", "side")


@dataclass(slots=True)
class RunConfig:
    """Validated parameters plus the command options resolved from flags, file and defaults."""

    params: WelanderParams
    options: dict[str, Any] = field(default_factory=dict)

    def option(self, name: str) -> Any:
        return self.options.get(name)


def _parse_pair(text: str) -> tuple[float, float]:
    try:
        first, second = (float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from exc
    return first, second


def _parse_grid(text: str) -> tuple[float, float, float, float, int]:
    parts = text.split(",")
    if len(parts) != 5:
        raise argparse.ArgumentTypeError(f"expected 'xmin,xmax,ymin,ymax,n', got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), float(parts[2]), float(parts[3]), int(parts[4])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"malformed grid {text!r}") from exc


def _parameter_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("model parameters")
    for name in PARAMETER_NAMES:
        group.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, default=None)
    group.add_argument("--preset", type=str, default=None, help="Start from a bundled parameter set.")
    group.add_argument("--config", type=str, default=None, help="JSON file with params and options.")
    parent.add_argument("--out", type=str, default=None, help="Output path (defaults to standard output).")
    parent.add_argument("--format", choices=("json", "csv"), default=None, help="Output format.")
    return parent


def _add_trajectory_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--horizon", type=float, default=None, help="Integration horizon T.")
    parser.add_argument("--dt-sample", dest="dt_sample", type=float, default=None, help="Output spacing.")
    parser.add_argument("--frame", choices=("canonical", "raw"), default=None, help="Coordinate frame.")
    parser.add_argument("--smooth", type=float, default=None, help="Use the arctan law of this width (raw frame).")
    parser.add_argument("--step", type=float, default=None, help="RK4 step for the smooth model.")


def _parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse recognised CLI arguments for the `welander` command.

    Inputs: argv (Sequence[str] | None): optional argument list excluding the program name.
    Outputs: argparse.Namespace with the subcommand handler stored under `handler`.
    """

    parent = _parameter_parent()
    parser = argparse.ArgumentParser(prog="welander", description="Analyse the non-smooth Welander model.")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", parents=[parent], help="Regime, equilibria, folds and partition.")
    analyze.set_defaults(handler=_run_analyze)

    cycle = commands.add_parser("cycle", parents=[parent], help="Locate and certify the crossing cycle.")
    cycle.add_argument("--polyline", type=str, default=None, help="Write the sampled cycle to this CSV file.")
    cycle.add_argument("--polyline-points", dest="polyline_points", type=int, default=None)
    cycle.set_defaults(handler=_run_cycle)

    scan = commands.add_parser(
        "scan",
        parents=[parent],
        help="Sweep epsilon and tabulate cycles.",
        description="Sweep epsilon and tabulate cycles. Failed points are reported per row and logged; "
        "the sweep exits 0 as long as its inputs are valid.",
    )
    scan.add_argument("--eps-from", dest="eps_from", type=float, default=None)
    scan.add_argument("--eps-to", dest="eps_to", type=float, default=None)
    scan.add_argument("--eps-step", dest="eps_step", type=float, default=None)
    scan.add_argument("--workers", type=int, default=None, help="Worker processes for the sweep.")
    scan.set_defaults(handler=_run_scan)

    trajectory = commands.add_parser("trajectory", parents=[parent], help="Integrate one trajectory.")
    trajectory.add_argument("--x0", type=float, default=None)
    trajectory.add_argument("--y0", type=float, default=None)
    trajectory.add_argument("--events", type=str, default=None, help="Write the event list to this JSON file.")
    _add_trajectory_options(trajectory)
    trajectory.set_defaults(handler=_run_trajectory)

    portrait = commands.add_parser("portrait", parents=[parent], help="Integrate a family of trajectories.")
    portrait.add_argument("--start", dest="starts", type=_parse_pair, action="append", default=None)
    portrait.add_argument("--grid", type=_parse_grid, default=None, help="xmin,xmax,ymin,ymax,n start grid.")
    _add_trajectory_options(portrait)
    portrait.set_defaults(handler=_run_portrait)

    return parser.parse_args(argv)


def _build_run_config(args: argparse.Namespace, option_names: Sequence[str]) -> RunConfig:
    """Merge preset, config file and flags into a validated RunConfig.

    Inputs: parsed arguments and the option names the subcommand understands.
    Outputs: RunConfig; options missing everywhere fall back to `config.get_cli_defaults()`.
    Raises: InvalidParameters naming the violated constraint.
    """

    loaded = io.load_run_config(args.config) if args.config else {"params": {}, "options": {}}
    file_options = loaded["options"]
    values: dict[str, Any] = {}
    preset_name = args.preset or file_options.get("preset")
    if preset_name:
        values.update(preset(str(preset_name)).as_dict())
    values.update(loaded["params"])
    for name in PARAMETER_NAMES:
        flag = getattr(args, name)
        if flag is not None:
            values[name] = flag
    params = WelanderParams.from_mapping(values)

    defaults = config.get_cli_defaults()
    options: dict[str, Any] = {}
    for name in option_names:
        flag = getattr(args, name, None)
        if flag is not None:
            options[name] = flag
        elif name in file_options:
            options[name] = file_options[name]
        elif name in defaults:
            options[name] = defaults[name]
    return RunConfig(params, options)


def _pws_for(params: WelanderParams, frame: str) -> PiecewiseAffineSystem:
    return canonical_system(params) if frame == "canonical" else raw_system(params)


def _interval_payload(bounds: tuple[float, float] | None) -> dict[str, Any]:
    if bounds is None:
        return {"interval": None, "length": 0.0}
    return {"interval": [bounds[0], bounds[1]], "length": bounds[1] - bounds[0]}


def cmd_analyze(run: RunConfig) -> dict[str, Any]:
    """Return the analysis report: thresholds, regime, spectra, equilibria, folds and partition.

    The canonical frame is used unless alpha (1 - beta) = 0, where only the raw frame exists.
    A fold meeting a boundary equilibrium is reported as `fold_status = boundary_collision`.
    """

    params = run.params
    frame = "canonical" if coupling(params) != 0.0 else "raw"
    pws = _pws_for(params, frame)
    limits = thresholds(params)
    current = regime(params)

    zones: dict[str, Any] = {}
    for side in (Side.LEFT, Side.RIGHT):
        eig = spectrum(pws.zone(side))
        status = equilibrium_status(pws, side, params.alpha, limits)
        zones[side.value] = {
            "eigenvalues": [eig.lambda_i, eig.lambda_j],
            "equilibrium": {
                "kind": status.kind.value,
                "x": status.point[0],
                "y": status.point[1],
                "node_type": status.node_type,
            },
            "canonical_constant": canonical_constant(params, side),
        }

    try:
        folds = [
            {
                "side": fold.side.value,
                "x": fold.location[0],
                "y": fold.location[1],
                "order": fold.order,
                "visibility": fold.visibility.value,
                "second_lie_derivative": fold.second_lie_derivative,
            }
            for fold in fold_points(pws)
        ]
        fold_status = "ok"
    except BoundaryEquilibriumCollision as exc:
        logger.info("fold analysis: %s", exc)
        folds, fold_status = [], "boundary_collision"

    partition = partition_sigma(pws)
    report: dict[str, Any] = {
        "status": "ok",
        "frame": frame,
        "params": params.as_dict(),
        "regime": current.value,
        "has_cycle": current is Regime.UNIQUE_STABLE_CYCLE,
        "thresholds": {"alpha_L": limits.alpha_L, "alpha_R": limits.alpha_R, "eps_star": limits.eps_star},
        "sigma_offset": params.sigma_offset,
        "zones": zones,
        "folds": folds,
        "fold_status": fold_status,
        "sigma_partition": [
            {"kind": interval.kind.value, "lower": interval.lower, "upper": interval.upper}
            for interval in partition.intervals
        ],
        "tangency_points": [{"y": y, "kind": kind.value} for y, kind in partition.tangency_points],
        "degenerate_field": partition.degenerate_field,
        "sliding": _interval_payload(sliding_bounds(pws, SigmaClass.SLIDING)),
        "escaping": _interval_payload(sliding_bounds(pws, SigmaClass.ESCAPING)),
        "pseudo_equilibria": [
            {"y": item.y, "region": item.region.value, "stable": item.stable} for item in pseudo_equilibria(pws)
        ],
    }
    if frame == "canonical":
        report["manifolds"] = manifold_intercepts(params)
    if current in NO_CYCLE_REASONS:
        report["no_cycle_reason"] = NO_CYCLE_REASONS[current]
    return report


def cmd_cycle(run: RunConfig) -> dict[str, Any]:
    """Return the cycle report, or a `no_cycle` status object when the regime forbids one.

    With the `polyline` option set, the sampled cycle is written to that CSV path.
    """

    params = run.params
    cycle = find_cycle(params)
    if cycle is None:
        current = regime(params)
        return {
            "status": "no_cycle",
            "reason": NO_CYCLE_REASONS[current],
            "regime": current.value,
            "params": params.as_dict(),
        }
    report = {
        "status": "cycle",
        "params": params.as_dict(),
        "y_upper": cycle.y_upper,
        "y_lower": cycle.y_lower,
        "t_left": cycle.t_left,
        "t_right": cycle.t_right,
        "period": cycle.period,
        "multiplier": cycle.multiplier,
        "area_residual": area_identity_residual(params, cycle),
    }
    if run.option("polyline"):
        points = int(run.option("polyline_points"))
        io.write_csv(POLYLINE_HEADER, cycle_polyline(params, cycle, points), run.option("polyline"))
    return report


def epsilon_grid(eps_from: float, eps_to: float, eps_step: float) -> list[float]:
    """Return the inclusive grid eps_from, eps_from + step, ... <= eps_to, rounded to 12 decimals.

    Raises: InvalidParameters for a non-positive step or a reversed range.
    """

    if not all(math.isfinite(value) for value in (eps_from, eps_to, eps_step)):
        raise InvalidParameters("epsilon grid bounds and step must be finite")
    if eps_step <= 0.0:
        raise InvalidParameters(f"eps-step must be positive, got {eps_step}")
    if eps_to < eps_from:
        raise InvalidParameters(f"eps-to ({eps_to}) must not be below eps-from ({eps_from})")
    count = int(math.floor((eps_to - eps_from) / eps_step + 1e-9)) + 1
    return [round(eps_from + index * eps_step, 12) + 0.0 for index in range(count)]


def cmd_scan(run: RunConfig) -> list[ScanRow]:
    """Sweep the configured epsilon grid.

    Points that fail keep their row (reason "error:<class>") and are logged at error level; the
    sweep itself never turns them into a non-zero exit code.
    """

    grid = epsilon_grid(float(run.option("eps_from")), float(run.option("eps_to")), float(run.option("eps_step")))
    rows = scan_epsilon(run.params, grid, workers=int(run.option("workers")))
    failed = [row for row in rows if row.reason is not None and row.reason.startswith("error:")]
    if failed:
        logger.error(
            "%d of %d scan points failed: %s",
            len(failed),
            len(rows),
            ", ".join(f"epsilon={row.epsilon:.6g} ({row.reason})" for row in failed),
        )
    return rows


def _trajectory_setup(run: RunConfig) -> tuple[str, Callable[[tuple[float, float]], Trajectory]]:
    horizon = float(run.option("horizon"))
    smooth = run.option("smooth")
    frame = run.option("frame")
    if smooth is not None:
        if frame == "canonical":
            raise InvalidParameters("the smooth model is integrated in the raw frame; drop --frame canonical")
        law = SmoothLaw(float(smooth))
        step = float(run.option("step") or config.get_integrator_settings()["oracle_step"])
        return "raw", lambda start: oracle_rk4(law, run.params, start, horizon, step)
    frame = frame or "canonical"
    pws = _pws_for(run.params, frame)
    dt_sample = float(run.option("dt_sample"))
    return frame, lambda start: integrate(pws, start, horizon, dt_sample)


def cmd_trajectory(run: RunConfig) -> Trajectory:
    """Integrate from (x0, y0); the smooth option routes through the RK4 oracle."""

    _, run_from = _trajectory_setup(run)
    x0, y0 = run.option("x0"), run.option("y0")
    if x0 is None or y0 is None:
        raise InvalidParameters("trajectory needs an initial condition: set --x0 and --y0")
    return run_from((float(x0), float(y0)))


def _grid_starts(grid: Sequence[float]) -> list[tuple[float, float]]:
    x_min, x_max, y_min, y_max, count = grid
    count = int(count)
    if count < 1:
        raise InvalidParameters(f"grid needs at least one point per axis, got {count}")
    xs = np.linspace(float(x_min), float(x_max), count)
    ys = np.linspace(float(y_min), float(y_max), count)
    return [(float(x), float(y)) for x in xs for y in ys]


def cmd_portrait(run: RunConfig) -> list[tuple[tuple[float, float], Trajectory]]:
    """Integrate every start from the `starts` list and the optional `grid`."""

    _, run_from = _trajectory_setup(run)
    starts = [tuple(map(float, start)) for start in run.option("starts") or []]
    if run.option("grid") is not None:
        starts.extend(_grid_starts(run.option("grid")))
    if not starts:
        raise InvalidParameters("portrait needs at least one --start x,y or a --grid")
    return [((start[0], start[1]), run_from((start[0], start[1]))) for start in starts]


def _require_format(args: argparse.Namespace, allowed: Sequence[str], default: str) -> str:
    chosen = args.format or default
    if chosen not in allowed:
        raise InvalidParameters(f"{args.command} does not support --format {chosen}")
    return chosen


def _run_analyze(args: argparse.Namespace) -> int:
    _require_format(args, ("json",), "json")
    io.write_json(cmd_analyze(_build_run_config(args, ())), args.out)
    return 0


def _run_cycle(args: argparse.Namespace) -> int:
    _require_format(args, ("json",), "json")
    run = _build_run_config(args, ("polyline", "polyline_points"))
    io.write_json(cmd_cycle(run), args.out)
    return 0


def _run_scan(args: argparse.Namespace) -> int:
    chosen = _require_format(args, ("csv", "json"), "csv")
    run = _build_run_config(args, ("eps_from", "eps_to", "eps_step", "workers"))
    rows = cmd_scan(run)
    if chosen == "csv":
        io.write_csv(
            SCAN_HEADER,
            [(row.epsilon, row.has_cycle, row.y_upper, row.y_lower, row.period, row.multiplier) for row in rows],
            args.out,
        )
    else:
        payload = {
            "params": run.params.as_dict(),
            "rows": [
                {
                    "epsilon": row.epsilon,
                    "has_cycle": row.has_cycle,
                    "y_upper": row.y_upper,
                    "y_lower": row.y_lower,
                    "period": row.period,
                    "multiplier": row.multiplier,
                    "reason": row.reason,
                }
                for row in rows
            ],
        }
        io.write_json(payload, args.out)
    return 0


_TRAJECTORY_OPTIONS = ("horizon", "dt_sample", "frame", "smooth", "step")


def _events_payload(frame: str, trajectory: Trajectory) -> dict[str, Any]:
    return {
        "frame": frame,
        "t_end": trajectory.t_end,
        "final_state": list(trajectory.final_state),
        "equilibrated": trajectory.equilibrated,
        "events": [event.as_dict() for event in trajectory.events],
    }


def _run_trajectory(args: argparse.Namespace) -> int:
    _require_format(args, ("csv",), "csv")
    run = _build_run_config(args, ("x0", "y0", "events", *_TRAJECTORY_OPTIONS))
    frame, _ = _trajectory_setup(run)
    trajectory = cmd_trajectory(run)
    io.write_csv(TRAJECTORY_HEADER, trajectory.sample_rows(), args.out)
    if run.option("events"):
        io.write_json(_events_payload(frame, trajectory), run.option("events"))
    return 0


def _run_portrait(args: argparse.Namespace) -> int:
    _require_format(args, ("csv",), "csv")
    run = _build_run_config(args, ("starts", "grid", *_TRAJECTORY_OPTIONS))
    rows = [
        (start_id, *row)
        for start_id, (_, trajectory) in enumerate(cmd_portrait(run))
        for row in trajectory.sample_rows()
    ]
    io.write_csv(("start_id", *TRAJECTORY_HEADER), rows, args.out)
    return 0


def _report_error(exc: BaseException) -> None:
    payload = {"status": "error", "error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point for the `welander` executable.

    Inputs: argv (Sequence[str] | None): optional arguments forwarded from the shell.
    Outputs: int exit code (0 success, 2 invalid input, 3 internal defect).
    """

    settings = config.get_logging_settings()
    logging.basicConfig(level=int(settings["level"]), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if not settings["recognised"]:
        logger.warning("unrecognised %s value; using %s", config.LOG_ENV_VAR, settings["name"])

    args = _parse_args(argv)
    try:
        return int(args.handler(args))
    except WelanderError as exc:
        _report_error(exc)
        return 2
    except InternalDefect as exc:
        logger.error("internal defect: %s", exc)
        _report_error(exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
