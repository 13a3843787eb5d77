"""Define tunable tolerances, presets, and runtime defaults for the Welander analysis package.

Inputs: None; module-level constants configured inside this file plus the `WELANDER_LOG`
environment variable read by `get_logging_settings`.
Outputs: Named constants consumed across the package for reproducible numerics, the historical
parameter presets, and CLI defaults.
"""

from __future__ import annotations

import logging
import os

import numpy as np

MACHINE_EPSILON = float(np.finfo(float).eps)

# Sigma classification
TANGENCY_TOL = 1e-12
BOUNDARY_TOL = 1e-12
FOLD_COLLISION_TOL = 1e-12
# step used when confirming fold visibility by finite differences
FOLD_FD_STEP = 1e-3

# Spectra
REPEATED_EIGENVALUE_TOL = 1e-12

# Psi evaluation
PSI_SERIES_THRESHOLD = 1e-4
PSI_SERIES_TERMS = 6

# Root refinement
ROOT_RTOL = 1e-13
ROOT_MAXITER = 200
HALF_MAP_RTOL = 4 * MACHINE_EPSILON
HALF_MAP_XTOL = 1e-300

# Half-map bracketing in flight time
HALF_MAP_T_START = 1e-12
HALF_MAP_T_INITIAL_HI = 1.0
HALF_MAP_T_CAP = 1e3
ASYMPTOTE_TOL = 1e-13
# beyond t * max|lambda| the half maps switch to their overflow-free scaled forms
HALF_MAP_SCALED_EXPONENT = 50.0

# Cycle search: the upper bracket approaches the right asymptote by powers of ten
CYCLE_BRACKET_DECADES = 14

# Area quadrature
AREA_SAMPLES = 4097

# Hybrid integrator
EQUILIBRIUM_TOL = 1e-12
MAX_SEGMENTS = 20000
SLIDING_RTOL = 1e-12
SLIDING_ATOL = 1e-14

# Oracle integrator
ORACLE_SWITCH_TOL = 1e-12
ORACLE_DEFAULT_STEP = 1e-3

# Historical parameter sets (alpha, beta, epsilon, k0, k1)
REFERENCE_PARAMS = {"alpha": 0.8, "beta": 0.5, "epsilon": -0.01, "k0": 0.0, "k1": 1.0}
WELANDER_NONSMOOTH_PARAMS = {"alpha": 0.2, "beta": 0.1, "epsilon": -0.01, "k0": 0.0, "k1": 5.0}
WELANDER_SMOOTH_PARAMS = {"alpha": 0.8, "beta": 0.5, "epsilon": -1.0 / 30.0, "k0": 0.0, "k1": 1.0}
WELANDER_SMOOTH_A = 1.0 / 500.0

# CLI defaults (overridable via flags or a JSON config file)
DEFAULT_HORIZON = 20.0
DEFAULT_DT_SAMPLE = 0.01
DEFAULT_EPS_FROM = -0.05
DEFAULT_EPS_TO = 0.05
DEFAULT_EPS_STEP = 0.01
DEFAULT_SCAN_WORKERS = 1
DEFAULT_POLYLINE_POINTS = 400

# Logging
LOG_ENV_VAR = "WELANDER_LOG"
LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
DEFAULT_LOG_LEVEL = "quiet"


def get_integrator_settings() -> dict[str, float | int]:
    """Return limits applied by the hybrid and oracle integrators.

    Inputs: None.
    Outputs: dict with `max_segments` (segment cap of the exact integrator), `oracle_switch_tol`
    (bisection width at switches) and `oracle_step` (default RK4 step for the smooth model).
    """

    return {
        "max_segments": MAX_SEGMENTS,
        "oracle_switch_tol": ORACLE_SWITCH_TOL,
        "oracle_step": ORACLE_DEFAULT_STEP,
    }


def get_cli_defaults() -> dict[str, float | int]:
    """Return the defaults the CLI falls back to when neither flags nor a config file set a value.

    Inputs: None.
    Outputs: dict[str, float | int] with horizon, sample spacing, epsilon grid and worker count.
    """

    return {
        "horizon": DEFAULT_HORIZON,
        "dt_sample": DEFAULT_DT_SAMPLE,
        "eps_from": DEFAULT_EPS_FROM,
        "eps_to": DEFAULT_EPS_TO,
        "eps_step": DEFAULT_EPS_STEP,
        "workers": DEFAULT_SCAN_WORKERS,
        "polyline_points": DEFAULT_POLYLINE_POINTS,
    }


def get_logging_settings() -> dict[str, str | int | bool]:
    """Resolve the log level requested through the environment.

    Inputs: None; reads `WELANDER_LOG` (quiet | info | debug, case-insensitive).
    Outputs: dict with `name` (the resolved level name), `level` (logging level integer) and
    `recognised` (False when the variable held an unknown value and the default was used).
    """

    raw = os.environ.get(LOG_ENV_VAR, DEFAULT_LOG_LEVEL).strip().lower()
    recognised = raw in LOG_LEVELS
    name = raw if recognised else DEFAULT_LOG_LEVEL
    return {"name": name, "level": LOG_LEVELS[name], "recognised": bool(recognised)}
