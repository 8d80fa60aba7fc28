"""Pinwheel scheduling: exact and approximate deciders, folding, and hardness reductions."""

from .core import (
    HOLIDAY,
    Job,
    PinwheelError,
    PinwheelInstance,
    Schedule,
    ScheduleRepr,
    density,
    format_instance,
    parse_instance,
    scale,
    validate_schedule,
    validate_window,
)
from .exact import (
    Block,
    EpsOffsetAssignment,
    Schedulable,
    Unschedulable,
    max_holiday_cycle,
    solve_eps_offsets,
    solve_exact,
    validate_offsets,
)
from .fold import fold, schedule_density_half, unfold_schedule
from .ptas import construct_schedule, decide
from .reductions import build_eps_witness, red_concise, red_eps, red_ps
from .sat import CnfFormula, brute_force_sat, gen_random_34sat, parse_dimacs

__all__ = [
    "HOLIDAY",
    "Block",
    "CnfFormula",
    "EpsOffsetAssignment",
    "Job",
    "PinwheelError",
    "PinwheelInstance",
    "Schedulable",
    "Schedule",
    "ScheduleRepr",
    "Unschedulable",
    "brute_force_sat",
    "build_eps_witness",
    "construct_schedule",
    "decide",
    "density",
    "fold",
    "format_instance",
    "gen_random_34sat",
    "max_holiday_cycle",
    "parse_dimacs",
    "parse_instance",
    "red_concise",
    "red_eps",
    "red_ps",
    "scale",
    "schedule_density_half",
    "solve_eps_offsets",
    "solve_exact",
    "unfold_schedule",
    "validate_offsets",
    "validate_schedule",
]
