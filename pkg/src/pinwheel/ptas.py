"""Approximate decision with constructive schedules.

``decide`` either proves an integer instance unschedulable or certifies that
the instance with every period stretched by (1 + eps) is schedulable, in
which case ``construct_schedule`` builds a layered schedule for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor, log2
from typing import Any

from .core import (
    HOLIDAY,
    HolidayInsert,
    Job,
    PinwheelError,
    PinwheelInstance,
    PlaceInHolidays,
    Schedule,
    ScheduleRepr,
    as_rational,
    scale,
    validate_schedule,
    validate_window,
)
from .exact import NoCycle, max_holiday_cycle
from .fold import ConstructionFailed, fold, schedule_small_jobs, unfold_schedule


class EpsOutOfRange(PinwheelError):
    pass


EPS_LIMIT = Fraction(2, 7)


@dataclass(frozen=True)
class PtasParams:
    """Final window bounds.  ``None`` stands for a bound beyond every period."""

    eps: Fraction
    n: int
    ell: int | None
    u: int | None
    iterations: int


@dataclass(frozen=True)
class JobClassification:
    big: PinwheelInstance
    medium: PinwheelInstance
    small: PinwheelInstance


@dataclass
class Decision:
    schedulable: bool
    reason: str
    params: PtasParams | None = None
    h_max: Fraction | None = None
    d_not_big: Fraction | None = None
    cycle: Schedule | None = None
    repr: ScheduleRepr | None = None
    info: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.schedulable


def snap_eps(eps: Any) -> tuple[Fraction, int]:
    eps = as_rational(eps)
    if not 0 < eps < EPS_LIMIT:
        raise EpsOutOfRange(f"eps must lie in (0, 2/7), got {eps}")
    n = ceil(1 / eps)
    return Fraction(1, n), n


def _next_u(n: int, ell: int, ceiling: int) -> int | None:
    """16 n^2 ell^ell, or None once it certainly exceeds ``ceiling``."""
    if ell * log2(ell) > log2(ceiling) + 8:
        return None
    u = 16 * n * n * ell**ell
    return u if u <= ceiling else None


def _sub(inst: PinwheelInstance, keep) -> PinwheelInstance:
    pairs = [(i, j) for i, j in zip(inst.ids, inst.jobs) if keep(j.period)]
    return PinwheelInstance([j for _, j in pairs], [i for i, _ in pairs])


def window_search(inst: PinwheelInstance, eps: Any) -> tuple[PtasParams, JobClassification]:
    """Grow (ell, u) until the jobs strictly between them have density at most 1/(2(n+1))."""
    eps, n = snap_eps(eps)
    inst = inst.expand()
    ceiling = max((ceil(p) for p in inst.periods), default=1)
    threshold = Fraction(1, 2 * (n + 1))
    ell: int | None = n
    u = _next_u(n, n, ceiling)
    iterations = 0
    while True:
        iterations += 1
        if iterations > 2 * (n + 1):
            raise AssertionError("window search ran past 2(n+1) iterations")
        if ell is None:
            break
        medium = _sub(inst, lambda p: p > ell and (u is None or p < u))
        if medium.density() <= threshold:
            break
        ell = u
        u = None if ell is None else _next_u(n, ell, ceiling)
    if ell is None:
        big, medium, small = inst, PinwheelInstance(), PinwheelInstance()
    else:
        big = _sub(inst, lambda p: p <= ell)
        medium = _sub(inst, lambda p: p > ell and (u is None or p < u))
        small = _sub(inst, lambda p: u is not None and p >= u)
    return PtasParams(eps, n, ell, u, iterations), JobClassification(big, medium, small)


def decide(inst: PinwheelInstance, eps: Any, *, construct: bool = False, budget: int | None = None) -> Decision:
    """Unschedulable, or schedulable after stretching every period by (1 + eps)."""
    eps_snapped, n = snap_eps(eps)
    inst = inst.expand()
    if not inst.is_integral():
        raise ValueError("decide needs integer periods")
    if inst.density() > 1:
        return Decision(False, "density exceeds 1")
    params, classes = window_search(inst, eps_snapped)
    try:
        h_max, cycle = max_holiday_cycle(classes.big, budget=budget)
    except NoCycle:
        return Decision(False, "big jobs alone admit no periodic schedule", params)
    d_not_big = classes.medium.density() + classes.small.density()
    if h_max < d_not_big:
        return Decision(False, "holiday fraction of big jobs below density of the rest", params, h_max, d_not_big, cycle)
    decision = Decision(True, "holidays suffice", params, h_max, d_not_big, cycle)
    if construct:
        rep, info = construct_schedule(inst, eps_snapped, cycle, _params=(params, classes, h_max))
        decision.repr = rep
        decision.info = info
    return decision


def _validate(inst: PinwheelInstance, rep: ScheduleRepr, window: int, cap: int, stage: str) -> None:
    period = rep.period()
    if period <= cap:
        verdict = validate_schedule(inst, Schedule(rep.window(0, period)))
    else:
        verdict = validate_window(inst, rep.window(0, window))
    if not verdict:
        raise ConstructionFailed(f"validation failed: {verdict}", stage)


def construct_schedule(
    inst: PinwheelInstance,
    eps: Any,
    cycle: Schedule | None = None,
    *,
    cap: int = 200_000,
    window_cap: int = 4_000_000,
    _params=None,
) -> tuple[ScheduleRepr, dict]:
    """Layered schedule for scale(inst, 1 + eps); also returns the intermediate quantities.

    Layers: the best big-job cycle repeated n times, one inserted slot after
    every n slots, the folded medium jobs placed in inserted slots, and the
    rescaled small jobs placed in the remaining holidays.
    """
    eps, n = snap_eps(eps)
    inst = inst.expand()
    if _params is None:
        params, classes = window_search(inst, eps)
        h_max, best = max_holiday_cycle(classes.big)
        if cycle is None:
            cycle = best
    else:
        params, classes, h_max = _params
    if cycle is None:
        raise ConstructionFailed("no big-job cycle supplied", "input")
    if cycle.holiday_fraction() != h_max:
        raise ConstructionFailed("cycle does not attain the maximum holiday fraction", "input")
    d_medium = classes.medium.density()
    d_small = classes.small.density()
    if h_max < d_medium + d_small:
        raise ConstructionFailed("instance was not certified schedulable", "input")
    stretched = scale(inst, 1 + eps)
    info: dict[str, Any] = {"h_max": h_max, "d_medium": d_medium, "d_small": d_small}

    # S2 and S3: repeat the cycle n times, then open one slot after every n slots
    s2 = Schedule(list(cycle.slots) * n)
    len_s3 = len(s2) + len(s2) // n
    marker = inst.max_id() + 1
    s3 = ScheduleRepr(s2, [HolidayInsert(n, None)])
    big_stretched = scale(classes.big, 1 + eps)
    _validate(big_stretched, s3, 8 * len_s3, cap, "S3 insertion")
    h_s3 = s3.holiday_fraction()
    if h_s3 != h_max / (1 + eps) + eps / (1 + eps):
        raise ConstructionFailed(f"h(S3) = {h_s3} off the expected value", "S3 insertion")
    info["len_s3"] = len_s3
    info["h_s3"] = h_s3

    # S4: medium jobs in the inserted slots
    if d_medium == 0:
        case = 0
        s4 = s3
        h_s4 = h_s3
    else:
        case = 1 if d_medium <= Fraction(1, 4 * (n + 1)) else 2
        theta = 4 * (n + 1) if case == 1 else 2 * (n + 1)
        res = fold(classes.medium, theta, next_id=marker + 1)
        if len(res.folded) != 1:
            raise ConstructionFailed(f"medium fold left {len(res.folded)} jobs", "medium fold")
        only = res.folded.ids[0]
        spacing = 2 * (n + 1) if case == 1 else n + 1
        if res.folded.periods[0] < spacing:
            raise ConstructionFailed("folded medium job is shorter than the inserted-slot spacing", "medium fold")
        inner_base = Schedule([only, HOLIDAY] if case == 1 else [only])
        inner = unfold_schedule(ScheduleRepr(inner_base), res.directives)
        s4 = ScheduleRepr(s2, [HolidayInsert(n, marker), PlaceInHolidays(inner, marker)])
        h_s4 = s4.holiday_fraction()
        expected = h_s3 - (Fraction(1, 2 * (n + 1)) if case == 1 else Fraction(1, n + 1))
        if h_s4 != expected:
            raise ConstructionFailed(f"h(S4) = {h_s4}, expected {expected}", "medium fold")
        medium_part = PinwheelInstance(
            list(classes.big.jobs) + list(classes.medium.jobs), list(classes.big.ids) + list(classes.medium.ids)
        )
        _validate(scale(medium_part, 1 + eps), s4, 8 * len_s3, cap, "medium fold")
    info["case"] = case
    info["h_s4"] = h_s4
    if case == 0 and h_s4 != h_max / (1 + eps) + eps / (1 + eps):
        raise ConstructionFailed("case 0 holiday fraction mismatch", "medium fold")
    if h_s4 > 0 and d_small / h_s4 > 1 + Fraction(3, 4) * eps:
        raise ConstructionFailed("small density exceeds (1 + 3 eps/4) h(S4)", "small rescale")

    if not len(classes.small):
        _validate(stretched, s4, _window(stretched, len_s3, window_cap), cap, "final")
        return s4, info

    # S5: small jobs stretched, rounded down to multiples of 2 len(S3), then scaled by h(S4)
    grain = 2 * len_s3
    jobs4 = []
    for job in classes.small.jobs:
        p2 = job.period * (1 + eps)
        p3 = floor(p2 / grain) * grain
        if p3 < 1:
            raise ConstructionFailed("small period rounds to zero", "small rescale")
        p4 = p3 * h_s4
        if p4.denominator != 1:
            raise ConstructionFailed(f"rescaled small period {p4} is not integral", "small rescale")
        jobs4.append(Job(p4))
    small4 = PinwheelInstance(jobs4, classes.small.ids)
    d4 = small4.density()
    info["d_small4"] = d4
    if d4 > 1 - Fraction(13, 160) * eps:
        raise ConstructionFailed(f"D(A_small,4) = {d4} exceeds 1 - 13 eps/160", "small rescale")
    f1 = int(min(small4.periods))
    s5 = schedule_small_jobs(small4, f1, enforce_bound=False)
    s6 = ScheduleRepr(s4.base, s4.directives + (PlaceInHolidays(s5, HOLIDAY),))
    _validate(stretched, s6, _window(stretched, len_s3, window_cap), cap, "placement")
    return s6, info


def _window(inst: PinwheelInstance, len_s3: int, window_cap: int) -> int:
    longest = max((ceil(p) for p in inst.periods), default=1)
    return min(max(8 * len_s3, 4 * longest), window_cap)
