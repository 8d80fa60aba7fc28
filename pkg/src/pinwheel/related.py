"""Neighbouring problems reached from pinwheel instances, and their evaluators.

Bamboo garden trimming, recurrent scheduling, the constant gap problem and
windows scheduling.  Evaluators work on one period of a cyclic schedule.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod
from typing import Sequence

from .core import HOLIDAY, InvalidInstance, PinwheelError, PinwheelInstance, Schedule
from .exact import Unschedulable, solve_exact


class NonDense(PinwheelError):
    pass


class Undecided(PinwheelError):
    pass


def _cyclic_gaps(sched: Schedule, arm: int) -> list[int]:
    """Distance from each occurrence back to the previous one, wrapping around."""
    occ = sched.occurrences(arm)
    if not occ:
        return []
    p = len(sched)
    return [occ[0] + p - occ[-1]] + [b - a for a, b in zip(occ, occ[1:])]


def _arm_periods(inst: PinwheelInstance) -> list[int]:
    inst = inst.expand()
    if not inst.is_integral():
        raise InvalidInstance("integer periods required")
    return [int(p) for p in inst.periods]


# ---------------------------------------------------------------------------
# bamboo garden trimming


@dataclass(frozen=True)
class BgtInstance:
    growth_rates: tuple[int, ...]
    K: int


@dataclass(frozen=True)
class Unbounded:
    """Objective of a schedule that never cuts some bamboo."""

    arm: int

    def __bool__(self) -> bool:
        return False


def red_bgt(inst: PinwheelInstance) -> BgtInstance:
    """Growth rate L/a_i per job with L the product of all periods; threshold K = L."""
    periods = _arm_periods(inst)
    big_l = prod(periods)
    return BgtInstance(tuple(big_l // a for a in periods), big_l)


def bgt_objective(bgt: BgtInstance, sched: Schedule) -> Fraction | Unbounded:
    """max over arms of growth rate times largest cyclic gap; arm i is schedule id i."""
    worst = Fraction(0)
    for arm, rate in enumerate(bgt.growth_rates, 1):
        gaps = _cyclic_gaps(sched, arm)
        if not gaps:
            return Unbounded(arm)
        worst = max(worst, Fraction(rate * max(gaps)))
    return worst


# ---------------------------------------------------------------------------
# recurrent scheduling


@dataclass(frozen=True)
class RecurrentInstance:
    """Arm i pays min(1, t / caps[i]) when pulled t days after its previous pull."""

    caps: tuple[int, ...]
    L: Fraction

    def payoff(self, arm: int, t: int) -> Fraction:
        return min(Fraction(1), Fraction(t, self.caps[arm - 1]))


def red_rs(inst: PinwheelInstance) -> RecurrentInstance:
    periods = _arm_periods(inst)
    if sum(Fraction(1, a) for a in periods) != 1:
        raise NonDense("recurrent-scheduling reduction needs density exactly 1")
    return RecurrentInstance(tuple(periods), Fraction(1))


def rs_value(ri: RecurrentInstance, sched: Schedule) -> Fraction:
    """Average payoff per day over one period of the cyclic schedule."""
    total = Fraction(0)
    for arm in range(1, len(ri.caps) + 1):
        for gap in _cyclic_gaps(sched, arm):
            total += ri.payoff(arm, gap)
    return total / len(sched)


# ---------------------------------------------------------------------------
# constant gap


@dataclass(frozen=True)
class ExactCover:
    moduli: tuple[int, ...]

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Failure:
    reason: str

    def __bool__(self) -> bool:
        return False


def constant_gap_check(demands: Sequence[int], offsets: Sequence[int]) -> ExactCover | Failure:
    """Whether residues offsets[i] mod D/demands[i] partition the integers, D = sum(demands)."""
    if len(demands) != len(offsets):
        return Failure("demands and offsets differ in length")
    if not demands or any(d < 1 for d in demands):
        return Failure("demands must be positive")
    total = sum(demands)
    if any(total % d for d in demands):
        return Failure("NonIntegralModulus")
    moduli = tuple(total // d for d in demands)
    for i in range(len(moduli)):
        for j in range(i + 1, len(moduli)):
            if (offsets[i] - offsets[j]) % gcd(moduli[i], moduli[j]) == 0:
                return Failure(f"progressions {i + 1} and {j + 1} overlap")
    # disjoint progressions of total density sum(d_i)/D = 1 cover everything
    return ExactCover(moduli)


# ---------------------------------------------------------------------------
# windows scheduling


@dataclass(frozen=True)
class WindowsInstance:
    instance: PinwheelInstance
    machines: int


def windows_embed(inst: PinwheelInstance, h: int) -> WindowsInstance:
    if h < 1:
        raise ValueError("need at least one machine")
    return WindowsInstance(inst, h)


@dataclass(frozen=True)
class WindowsSchedulable:
    """One cyclic schedule per machine."""

    machines: tuple[Schedule, ...]

    def __bool__(self) -> bool:
        return True


def windows_verdict(w: WindowsInstance) -> WindowsSchedulable | Unschedulable:
    """One machine is plain pinwheel; more machines are only decided in the trivial cases."""
    if w.machines == 1:
        res = solve_exact(w.instance)
        return WindowsSchedulable((res.schedule,)) if res else res
    exp = w.instance.expand()
    if len(exp) <= w.machines:
        # every job gets a machine to itself
        lanes = [Schedule([ident]) for ident in exp.ids]
        lanes += [Schedule([HOLIDAY])] * (w.machines - len(lanes))
        return WindowsSchedulable(tuple(lanes))
    if w.instance.density() > w.machines:
        return Unschedulable()
    raise Undecided("windows scheduling with several machines is only represented, not solved")
