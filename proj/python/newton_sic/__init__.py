"""Python bindings for the newton_sic C++ library."""

from ._core import (
    NewtonSicError,
    ResistanceEstimate,
    Surface,
    baseline_ua,
    baseline_ub,
    besicovitch,
    bound,
    cone_fixture,
    export,
    flat_fixture,
    pack,
    regular_polygon,
    resistance,
    resistance_bound,
    shrink,
    sic_report,
    trap_resistance_semianalytic,
)

__all__ = [
    "NewtonSicError",
    "ResistanceEstimate",
    "Surface",
    "baseline_ua",
    "baseline_ub",
    "besicovitch",
    "bound",
    "cone_fixture",
    "export",
    "flat_fixture",
    "pack",
    "regular_polygon",
    "resistance",
    "resistance_bound",
    "shrink",
    "sic_report",
    "trap_resistance_semianalytic",
]
