"""Acceptance criteria 1-11, each recorded as one PASS/FAIL line in the terminal summary."""

import random
import time
from fractions import Fraction
from math import ceil, isqrt, prod

import pytest

from conftest import catalog_periods, formula_corpus, record
from oracles import brute_bgt_best, brute_rs_full, brute_schedulable
from pinwheel.core import PinwheelInstance, Schedule, scale, validate_repr, validate_window
from pinwheel.exact import StateBudgetExceeded, solve_exact, validate_offsets
from pinwheel.fold import fold, schedule_density_half, unfold_schedule
from pinwheel.ptas import decide
from pinwheel.reductions import (
    LiteralReps,
    allowed_periods,
    build_eps_witness,
    clause_sum,
    greedy_counts,
    primes_above,
    red_concise,
    red_eps,
    red_ps,
    warm_greedy_counts,
)
from pinwheel.related import red_bgt, red_rs, rs_value
from pinwheel.sat import CnfFormula, brute_force_sat

CATALOG = list(catalog_periods(3, 6))


def inst(*periods):
    return PinwheelInstance.from_periods(periods)


def density_of(counts):
    return sum((Fraction(k, p) for p, k in counts.items()), Fraction(0))


def is_prime(x):
    return x >= 2 and all(x % d for d in range(2, isqrt(x) + 1))


def test_criterion_01_exact_catalog():
    t0 = time.perf_counter()
    mismatches = [p for p in CATALOG if bool(solve_exact(inst(*p))) != (brute_schedulable(p) is not None)]
    anchors = not solve_exact(inst(2, 3, 6)) and bool(solve_exact(inst(2, 4, 4)))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and anchors and elapsed < 60
    record(1, ok, f"{len(CATALOG)} instances, {len(mismatches)} mismatches, {elapsed:.1f}s")
    assert ok, mismatches


def test_criterion_02_density_one(corpus):
    t0 = time.perf_counter()
    assert len(corpus) >= 50 and all(f.num_vars <= 8 for f in corpus)
    bad = [k for k, f in enumerate(corpus) if red_ps(f).density() != 1]
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 120
    record(2, ok, f"{len(corpus)} formulas, {len(bad)} off density 1, {elapsed:.1f}s")
    assert ok, bad


def test_criterion_03_witness(corpus):
    t0 = time.perf_counter()
    checked = 0
    failures = []
    for k, f in enumerate(corpus):
        found = brute_force_sat(f)
        if not found:
            continue
        checked += 1
        instance = red_ps(f)
        if not validate_offsets(instance, build_eps_witness(f, found.assignment, instance)):
            failures.append(k)
    elapsed = time.perf_counter() - t0
    ok = not failures and checked > 0 and elapsed < 600
    record(3, ok, f"{checked} satisfiable formulas, {len(failures)} failures, {elapsed:.1f}s")
    assert ok, failures


def test_criterion_04_allowed_periods(corpus):
    problems = []
    for k, f in enumerate(corpus):
        n = f.num_vars
        v = LiteralReps.of(f).v
        tables = {i: allowed_periods(i, f) for i in range(1, n + 1)}
        if len({t[-1] for t in tables.values()}) != 1:
            problems.append((k, "tail"))
        for i, t in tables.items():
            if any(b % a or b <= a for a, b in zip(t, t[1:])):
                problems.append((k, i, "chain"))
            if not 2 * n * v**28 <= t[0] <= 2 * n * v**84:
                problems.append((k, i, "bounds"))
            nxt = tables[i % n + 1]
            if any(2 * n * t[j] != t[0] * nxt[j - 1] for j in range(1, n)):
                problems.append((k, i, "cyclic"))
    record(4, not problems, f"{len(corpus)} formulas, {len(problems)} violations")
    assert not problems


def _grain(rng, top, lo, hi):
    a = -(-lo.numerator * top // lo.denominator)
    b = hi.numerator * top // hi.denominator
    return Fraction(rng.randint(a, b), top)


def test_criterion_05_greedy_exact(corpus):
    rng = random.Random(55)
    draws = 1000
    bad = 0
    precondition = 0
    for f in corpus:
        n = f.num_vars
        cs = clause_sum(f)
        for i in range(1, n + 1):
            precondition += cs < Fraction(2, allowed_periods(i, f)[0])
        for _ in range(draws):
            ind = rng.randint(1, n)
            periods = allowed_periods(ind, f)
            d = _grain(rng, periods[-1], Fraction(0), Fraction(1, n))
            bad += density_of(greedy_counts(ind, d, f)) != d
            warm_ind = rng.randint(1, n - 1)
            wp = allowed_periods(warm_ind, f)
            d = _grain(rng, wp[-1], Fraction(wp[0], n * wp[1]), Fraction(1, n))
            bad += density_of(warm_greedy_counts(warm_ind, d, f)) != d
    ok = bad == 0 and precondition == 0
    record(5, ok, f"{len(corpus)} formulas x {draws} draws x 2 greedies, {bad} inexact, {precondition} precondition failures")
    assert ok


def test_criterion_06_ptas_catalog():
    t0 = time.perf_counter()
    eps = Fraction(1, 4)
    contradictions = []
    positive = 0
    for p in CATALOG:
        instance = inst(*p)
        dec = decide(instance, eps, construct=True)
        if not dec:
            if solve_exact(instance):
                contradictions.append(p)
            continue
        positive += 1
        stretched = scale(instance, 1 + eps)
        length = max(8 * dec.info["len_s3"], 4 * max(ceil(q) for q in stretched.periods))
        if not validate_window(stretched, dec.repr.window(0, length)):
            contradictions.append(p)
    elapsed = time.perf_counter() - t0
    ok = not contradictions and elapsed < 600
    record(6, ok, f"{len(CATALOG)} instances, {positive} constructed, {len(contradictions)} contradictions, {elapsed:.1f}s")
    assert ok, contradictions


def _folded_schedule(folded):
    if folded.density() <= Fraction(1, 2):
        return schedule_density_half(folded)
    if folded.is_integral() and len(folded) <= 4:
        try:
            found = solve_exact(folded, budget=50_000)
        except StateBudgetExceeded:
            return None
        if found:
            from pinwheel.core import ScheduleRepr

            return ScheduleRepr(found.schedule)
    return None


def test_criterion_07_fold():
    rng = random.Random(77)
    count = 1000
    failures = []
    unfolded = 0
    for k in range(count):
        if k % 2:
            periods = [Fraction(rng.randint(2, 400), rng.randint(1, 5)) for _ in range(rng.randint(1, 8))]
        else:
            periods = [rng.randint(1, 60) for _ in range(rng.randint(1, 5))]
        periods = [p for p in periods if p >= 1] or [1]
        theta = Fraction(rng.randint(4, 60), rng.randint(1, 2))
        original = inst(*periods)
        res = fold(original, theta)
        if not res.folded.density() - original.density() < 1 / theta:
            failures.append((k, "density"))
        folded = dict(zip(res.folded.ids, res.folded.periods))
        if any(folded.get(i) != p for i, p in zip(original.ids, original.periods) if p <= theta / 2):
            failures.append((k, "preservation"))
        rep = _folded_schedule(res.folded)
        if rep is None:
            continue
        unfolded += 1
        window = 4 * ceil(max(periods)) + 4 * rep.base.period
        if not validate_repr(original, unfold_schedule(rep, res.directives), limit=100_000, window=window):
            failures.append((k, "unfold"))
    ok = not failures and unfolded >= count // 2
    record(7, ok, f"{count} folds, {unfolded} unfolded schedules validated, {len(failures)} failures")
    assert ok, failures[:10]


def test_criterion_08_density_half():
    rng = random.Random(88)
    count = 200
    failures = []
    for k in range(count):
        periods = [Fraction(rng.randint(2, 300), rng.randint(1, 6)) for _ in range(rng.randint(1, 10))]
        periods = [p for p in periods if p >= 1]
        d = sum((1 / p for p in periods), Fraction(0))
        if d > Fraction(1, 2):
            # stretch uniformly so the density lands at or below 1/2
            periods = [p * d * 2 for p in periods]
        instance = inst(*periods)
        assert instance.density() <= Fraction(1, 2)
        rep = schedule_density_half(instance)
        if not validate_repr(instance, rep, limit=100_000, window=8 * ceil(max(periods)) + 8):
            failures.append(k)
    record(8, not failures, f"{count} instances, {len(failures)} failures")
    assert not failures


def test_criterion_09_related_equivalences():
    bgt_bad = []
    rs_bad = []
    dense = 0
    for p in CATALOG:
        schedulable = brute_schedulable(p) is not None
        bgt = red_bgt(inst(*p))
        if brute_bgt_best(bgt.growth_rates, bgt.K, prod(p)) != schedulable:
            bgt_bad.append(p)
        if inst(*p).density() != 1:
            continue
        dense += 1
        ri = red_rs(inst(*p))
        full = brute_rs_full(ri.caps, prod(p))
        if (full is not None) != schedulable:
            rs_bad.append(p)
        elif full is not None and rs_value(ri, Schedule([s + 1 for s in full])) != 1:
            rs_bad.append(p)
    ok = not bgt_bad and not rs_bad
    record(9, ok, f"BGT {len(CATALOG)} instances {len(bgt_bad)} mismatches; RS {dense} dense {len(rs_bad)} mismatches")
    assert ok, (bgt_bad, rs_bad)


def random_3sat(rng, n, m):
    clauses = []
    for _ in range(m):
        vars_ = rng.sample(range(1, n + 1), min(3, n))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vars_))
    return CnfFormula(n, clauses)


def test_criterion_10_concise():
    rng = random.Random(1010)
    formulas = [random_3sat(rng, n, rng.randint(1, 2 * n)) for n in [rng.randint(3, 6) for _ in range(20)]]
    bad = []
    for k, f in enumerate(formulas):
        out = red_concise(f)
        base = red_eps(f).density()
        pads = [j for j in out.jobs if j.tag == ("pad",)]
        integral = all(isinstance(j.multiplicity, int) and j.multiplicity >= 0 for j in out.jobs)
        pad_mass = sum((Fraction(j.multiplicity, j.period) for j in pads), Fraction(0))
        if out.density() != 1 or not integral or base + pad_mass != 1:
            bad.append(k)
    record(10, not bad, f"{len(formulas)} formulas, {len(bad)} failures")
    assert not bad


def test_criterion_11_primes(corpus):
    problems = []
    for v in range(3, 9):
        in_range = [x for x in range(v + 1, v**3 + 1) if is_prime(x)]
        if len(in_range) < 2 * v:
            problems.append((v, "count"))
        if primes_above(v, 2 * v) != in_range[: 2 * v]:
            problems.append((v, "sieve"))
    for f in corpus + formula_corpus(count=40, seed=11, max_n=8):
        reps = LiteralReps.of(f)
        v = reps.v
        if any(not (v < r <= v**3 and is_prime(r)) for r in reps.rep1.values()):
            problems.append((f.num_vars, f.num_clauses, "rep1"))
    record(11, not problems, f"v = 3..8 and 100 formulas, {len(problems)} violations")
    assert not problems
