"""Penalised smoothing of NPMLE survival estimates for censored data."""

from ._sise import (
    FitReport,
    GriddedDensity,
    SiseError,
    SmoothedFit,
    __version__,
    bootstrap,
    count_turning_points,
    fit,
    impute,
    kaplan_meier,
    nw_smooth,
    preset,
    run_scenario,
    simulate_cohort,
    turnbull,
)

__all__ = [
    "FitReport",
    "GriddedDensity",
    "SiseError",
    "SmoothedFit",
    "__version__",
    "bootstrap",
    "count_turning_points",
    "fit",
    "impute",
    "kaplan_meier",
    "nw_smooth",
    "preset",
    "run_scenario",
    "simulate_cohort",
    "turnbull",
]
