"""Folding long periods together, unfolding schedules, and fold-based schedulers."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from math import floor, isqrt
from typing import Any, Sequence

from .core import (
    HOLIDAY,
    FoldMerge,
    FoldMonotone,
    Job,
    Partition,
    PinwheelError,
    PinwheelInstance,
    Schedule,
    ScheduleRepr,
    as_rational,
    validate_schedule,
    validate_window,
)


class DensityTooHigh(PinwheelError):
    pass


class ConstructionFailed(PinwheelError):
    def __init__(self, message: str, stage: str | None = None):
        self.stage = stage
        super().__init__(f"[{stage}] {message}" if stage else message)


class JobAbsent(PinwheelError):
    pass


@dataclass(frozen=True)
class FoldResult:
    original: PinwheelInstance
    folded: PinwheelInstance
    directives: tuple
    theta: Fraction


def fold(inst: PinwheelInstance, theta: Any, *, next_id: int | None = None) -> FoldResult:
    """Repeatedly fold the longest periods until every period is at most theta.

    While the two longest periods a >= b both exceed theta they are replaced by
    one job of period b/2; once only the longest exceeds theta it is replaced
    by a job of period theta.  Ties go to the lowest id.  New jobs get fresh
    ids counting up from ``next_id`` (default: one past the largest id).
    """
    theta = as_rational(theta)
    if theta <= 0:
        raise ValueError("theta must be positive")
    inst = inst.expand()
    jobs = dict(zip(inst.ids, inst.periods))
    heap = [(-period, ident) for ident, period in jobs.items()]
    heapq.heapify(heap)
    if next_id is None:
        next_id = inst.max_id() + 1
    directives = []
    while heap and -heap[0][0] > theta:
        _, a = heapq.heappop(heap)
        if heap and -heap[0][0] > theta:
            _, b = heapq.heappop(heap)
            new_period = jobs.pop(b) / 2
            if new_period < 1:
                raise ValueError(f"folding at theta = {theta} would create period {new_period} below 1")
            del jobs[a]
            directives.append(FoldMerge(next_id, a, b))
        else:
            new_period = theta
            del jobs[a]
            directives.append(FoldMonotone(next_id, a))
        jobs[next_id] = new_period
        heapq.heappush(heap, (-new_period, next_id))
        next_id += 1
    ids = sorted(jobs)
    folded = PinwheelInstance([Job(jobs[i]) for i in ids], ids)
    return FoldResult(inst, folded, tuple(directives), theta)


def unfold_schedule(rep: ScheduleRepr, directives: Sequence) -> ScheduleRepr:
    """Turn a schedule of the folded instance into one of the original.

    Directives are undone last-first, so the most recent fold expands first.
    """
    for d in directives:
        if not isinstance(d, (FoldMerge, FoldMonotone)):
            raise ConstructionFailed(f"not a fold directive: {d!r}", "unfold")
    return rep.with_directives(reversed(tuple(directives)))


def _check_window(inst: PinwheelInstance, rep: ScheduleRepr, stage: str, cap: int) -> None:
    longest = max((ceil_fraction(p) for p in inst.periods), default=1)
    period = rep.period()
    if period <= cap:
        verdict = validate_schedule(inst, Schedule(rep.window(0, period)))
    else:
        verdict = validate_window(inst, rep.window(0, min(max(4 * longest, cap), 4_000_000)))
    if not verdict:
        raise ConstructionFailed(f"constructed schedule fails validation: {verdict}", stage)


def ceil_fraction(x: Fraction) -> int:
    return -floor(-x)


def schedule_density_half(inst: PinwheelInstance, *, check: bool = True, cap: int = 200_000) -> ScheduleRepr:
    """Any instance of density at most 1/2, rational periods allowed.

    Folding at theta = 2 leaves at most one job, which runs every slot.
    """
    inst = inst.expand()
    if inst.density() > Fraction(1, 2):
        raise DensityTooHigh(f"density {inst.density()} exceeds 1/2")
    res = fold(inst, 2)
    if len(res.folded) > 1:
        raise ConstructionFailed("folding at 2 left more than one job", "fold")
    base = Schedule([res.folded.ids[0]] if len(res.folded) else [HOLIDAY])
    rep = unfold_schedule(ScheduleRepr(base), res.directives)
    if check:
        _check_window(inst, rep, "density-half", cap)
    return rep


def small_jobs_bound(f1: int) -> tuple[Fraction, Fraction]:
    """Rational bracket (low, high) around 1 - (1+ln 2)/(1+sqrt f1) - 3/(2 f1)."""
    ln2_lo = Fraction(693147180559945, 10**15)
    ln2_hi = Fraction(693147180559946, 10**15)
    r = isqrt(f1)
    sqrt_lo = Fraction(r)
    sqrt_hi = Fraction(r if r * r == f1 else r + 1)
    tail = Fraction(3, 2 * f1)
    low = 1 - (1 + ln2_hi) / (1 + sqrt_lo) - tail
    high = 1 - (1 + ln2_lo) / (1 + sqrt_hi) - tail
    return low, high


def _channels(periods: dict[int, Fraction], g: int) -> list[list[int]] | None:
    """Group jobs into at most g channels; a channel of r jobs serves each every r*g slots."""
    order = sorted(periods, key=lambda i: (periods[i], i))
    channels: list[list[int]] = []
    limit = 0
    for ident in order:
        k = floor(periods[ident] / g)
        if k < 1:
            return None
        if channels and len(channels[-1]) < limit:
            channels[-1].append(ident)
        else:
            channels.append([ident])
            limit = k
        if len(channels) > g:
            return None
    return channels


def schedule_small_jobs(
    inst: PinwheelInstance, f1: int, *, check: bool = True, enforce_bound: bool = True, cap: int = 200_000
) -> ScheduleRepr:
    """Schedule jobs whose periods are all at least f1 at density close to 1.

    After folding at f1 every period lies in (f1/2, f1].  Time is cut into
    frames of g ~ sqrt(f1) slots; each frame position is a channel, and the
    jobs of a channel take its slots in rotation.
    """
    inst = inst.expand()
    if not inst.is_integral():
        raise ConstructionFailed("small-job scheduler needs integer periods", "input")
    if len(inst) and min(inst.periods) < f1:
        raise ConstructionFailed(f"a period is below f1 = {f1}", "input")
    if enforce_bound:
        low, _ = small_jobs_bound(f1)
        if inst.density() > low:
            raise DensityTooHigh(f"density {inst.density()} above the small-job bound for f1 = {f1}")
    if not len(inst):
        return ScheduleRepr(Schedule([HOLIDAY]))
    res = fold(inst, f1)
    periods = dict(zip(res.folded.ids, res.folded.periods))
    root = isqrt(f1)
    channels = None
    for g in sorted({max(1, root + delta) for delta in range(-2, 3)}, key=lambda x: (abs(x - root), x)):
        channels = _channels(periods, g)
        if channels is not None:
            break
    if channels is None:
        raise ConstructionFailed("jobs do not fit into the frame channels", "channels")
    next_id = max(max(periods), res.original.max_id()) + 1
    frame: list = []
    directives = []
    for members in channels:
        if len(members) == 1:
            frame.append(members[0])
            continue
        frame.append(next_id)
        directives.append(Partition(next_id, len(members), tuple(members)))
        next_id += 1
    frame.extend([HOLIDAY] * (g - len(frame)))
    rep = ScheduleRepr(Schedule(frame), directives)
    rep = unfold_schedule(rep, res.directives)
    if check:
        _check_window(inst, rep, "small-jobs", cap)
    return rep


def partition_substitute(
    rep: ScheduleRepr, job: int, q: int, new_ids: Sequence[int] | None = None
) -> ScheduleRepr:
    """Share job's slots round-robin among q new jobs, each of period q times job's."""
    if q < 1:
        raise ValueError("q must be positive")
    if q == 1 and new_ids is None:
        return rep
    _, counts = rep.period_counts()
    if counts.get(job, 0) == 0:
        raise JobAbsent(f"job {job} never occurs in the schedule")
    if new_ids is None:
        top = max((v for v in counts if v is not HOLIDAY), default=0)
        new_ids = tuple(range(top + 1, top + 1 + q))
    if len(new_ids) != q:
        raise ValueError("need exactly q new ids")
    return rep.with_directives([Partition(job, q, tuple(new_ids))])
