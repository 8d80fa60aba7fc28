from fractions import Fraction
from math import ceil

import pytest
from hypothesis import given, strategies as st

from pinwheel.core import HOLIDAY, Job, PinwheelInstance, Schedule, ScheduleRepr, validate_window
from pinwheel.exact import solve_exact
from pinwheel.fold import (
    DensityTooHigh,
    JobAbsent,
    fold,
    partition_substitute,
    schedule_density_half,
    schedule_small_jobs,
    small_jobs_bound,
    unfold_schedule,
)

rational_periods = st.lists(st.fractions(min_value=1, max_value=200, max_denominator=5), min_size=1, max_size=8)


def inst(*periods):
    return PinwheelInstance.from_periods(periods)


def test_fold_examples():
    assert fold(inst(2, 3), 4).folded.periods == [2, 3]
    assert fold(inst(10, 6), 4).folded.periods == [3]
    assert fold(inst(5, 3), 2).folded.periods == [Fraction(3, 2)]
    assert fold(inst(5), 1).folded.periods == [1]
    with pytest.raises(ValueError):
        fold(inst(2, Fraction(3, 2)), 1)


@given(rational_periods, st.fractions(min_value=2, max_value=30, max_denominator=3))
def test_fold_properties(periods, theta):
    original = inst(*periods)
    res = fold(original, theta)
    assert res.folded.density() - original.density() < 1 / theta
    assert all(p <= theta for p in res.folded.periods)
    # jobs already at or below theta survive untouched
    kept = {i: p for i, p in zip(original.ids, original.periods) if p <= theta}
    folded = dict(zip(res.folded.ids, res.folded.periods))
    assert all(folded.get(i) == p for i, p in kept.items())


@given(st.lists(st.integers(1, 60), min_size=1, max_size=6), st.integers(2, 8))
def test_unfold_validates(periods, theta):
    original = inst(*periods)
    res = fold(original, theta)
    if not res.folded.is_integral() or len(res.folded) > 3:
        return
    found = solve_exact(res.folded)
    if not found:
        return
    rep = unfold_schedule(ScheduleRepr(found.schedule), res.directives)
    window = rep.window(0, 4 * max(periods) + 4 * rep.period())
    assert validate_window(original, window)


def test_unfold_merge_example():
    res = fold(inst(10, 6), 4)
    new = res.folded.ids[0]
    rep = unfold_schedule(ScheduleRepr(Schedule([new, HOLIDAY, HOLIDAY])), res.directives)
    assert validate_window(inst(10, 6), rep.window(0, 120))
    assert unfold_schedule(ScheduleRepr(Schedule([1])), ()) == ScheduleRepr(Schedule([1]))


def test_density_half_examples():
    rep = schedule_density_half(PinwheelInstance())
    assert rep.window(0, 3) == [HOLIDAY] * 3
    assert schedule_density_half(inst(2)).window(0, 4) == [1, 1, 1, 1]
    rep = schedule_density_half(inst(4, 8, 16))
    assert validate_window(inst(4, 8, 16), rep.window(0, 256))
    with pytest.raises(DensityTooHigh):
        schedule_density_half(inst(2, 3))


@given(rational_periods)
def test_density_half_random(periods):
    original = inst(*periods)
    if original.density() > Fraction(1, 2):
        return
    rep = schedule_density_half(original)
    assert validate_window(original, rep.window(0, 8 * ceil(max(periods)) + 8))


def test_small_jobs_examples():
    rep = schedule_small_jobs(inst(100), 64)
    assert validate_window(inst(100), rep.window(0, 400))
    chain = inst(64, 128, 256, 512)
    assert chain.density() <= small_jobs_bound(64)[0]
    rep = schedule_small_jobs(chain, 64)
    assert validate_window(chain, rep.window(0, 4096))


def test_small_jobs_large_f1():
    import random

    rng = random.Random(7)
    f1 = 65536
    instance = inst(*(rng.randint(f1, 4 * f1) for _ in range(40)))
    assert instance.density() <= small_jobs_bound(f1)[0]
    rep = schedule_small_jobs(instance, f1)
    assert validate_window(instance, rep.window(0, 4 * 4 * f1))


@pytest.mark.parametrize("seed", range(5))
def test_small_jobs_near_bound(seed):
    import random

    rng = random.Random(seed)
    f1 = 256
    low, _ = small_jobs_bound(f1)
    periods = []
    while True:
        p = rng.randint(f1, 3 * f1)
        if inst(*periods, p).density() > low:
            break
        periods.append(p)
    instance = inst(*periods)
    rep = schedule_small_jobs(instance, f1)
    assert validate_window(instance, rep.window(0, 16 * f1))


def test_partition_substitute():
    rep = ScheduleRepr(Schedule([1]))
    assert partition_substitute(rep, 1, 1) == rep
    two = partition_substitute(ScheduleRepr(Schedule([1, HOLIDAY])), 1, 2, (2, 3))
    window = two.window(0, 16)
    for ident in (2, 3):
        occ = [t for t, s in enumerate(window) if s == ident]
        assert all(b - a == 4 for a, b in zip(occ, occ[1:]))
    three = partition_substitute(ScheduleRepr(Schedule([1, HOLIDAY, HOLIDAY])), 1, 3, (2, 3, 4))
    assert validate_window(PinwheelInstance([Job(9)] * 3, [2, 3, 4]), three.window(0, 90))
    with pytest.raises(JobAbsent):
        partition_substitute(rep, 5, 2)
