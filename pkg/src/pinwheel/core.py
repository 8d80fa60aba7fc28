"""Instances, schedules, exact density, and the ground-truth schedule validator.

All period and density arithmetic uses :class:`fractions.Fraction`; nothing in
this module touches floating point.
"""

from __future__ import annotations

import json
import os
import re
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd, lcm
from typing import Any, Iterable, Iterator, Sequence

HOLIDAY = None

DEFAULT_STATE_BUDGET = 10**7
DEFAULT_SEARCH_BUDGET = 10**6


class PinwheelError(Exception):
    """Base class for all package errors."""


class InvalidInstance(PinwheelError):
    pass


class InvalidSchedule(PinwheelError):
    pass


class ParseError(PinwheelError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedRepr(PinwheelError):
    pass


def state_budget() -> int:
    return int(os.environ.get("PINWHEEL_STATE_BUDGET", DEFAULT_STATE_BUDGET))


def search_budget() -> int:
    return int(os.environ.get("PINWHEEL_SEARCH_BUDGET", DEFAULT_SEARCH_BUDGET))


def as_rational(value: Any) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a normalized Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; pass a Fraction or 'p/q'")
    return Fraction(value)


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Job:
    period: Fraction
    multiplicity: int = 1
    label: str | None = None
    tag: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "period", as_rational(self.period))
        if self.period < 1:
            raise InvalidInstance(f"period {self.period} is below 1")
        if not isinstance(self.multiplicity, int) or self.multiplicity < 1:
            raise InvalidInstance(f"multiplicity {self.multiplicity!r} must be a positive integer")

    @property
    def density(self) -> Fraction:
        return self.multiplicity / self.period


class PinwheelInstance:
    """Ordered multiset of jobs; each job has a stable integer id (default 1..k)."""

    __slots__ = ("jobs", "ids")

    def __init__(self, jobs: Iterable[Job | Any] = (), ids: Sequence[int] | None = None):
        built = []
        for job in jobs:
            if isinstance(job, Job):
                built.append(job)
            elif isinstance(job, tuple):
                built.append(Job(*job))
            else:
                built.append(Job(job))
        self.jobs: tuple[Job, ...] = tuple(built)
        if ids is None:
            ids = range(1, len(self.jobs) + 1)
        self.ids: tuple[int, ...] = tuple(ids)
        if len(self.ids) != len(self.jobs):
            raise InvalidInstance("ids and jobs differ in length")
        if len(set(self.ids)) != len(self.ids):
            raise InvalidInstance("job ids must be distinct")

    @classmethod
    def from_periods(cls, periods: Iterable[Any]) -> "PinwheelInstance":
        return cls([Job(p) for p in periods])

    def __len__(self) -> int:
        return len(self.jobs)

    def __iter__(self) -> Iterator[Job]:
        return iter(self.jobs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PinwheelInstance):
            return NotImplemented
        return self.jobs == other.jobs and self.ids == other.ids

    def __hash__(self) -> int:
        return hash((self.jobs, self.ids))

    def __repr__(self) -> str:
        parts = []
        for job in self.jobs:
            s = str(job.period)
            if job.multiplicity != 1:
                s += f"x{job.multiplicity}"
            parts.append(s)
        return f"PinwheelInstance({', '.join(parts)})"

    @property
    def periods(self) -> list[Fraction]:
        return [job.period for job in self.jobs]

    def job(self, ident: int) -> Job:
        try:
            return self.jobs[self.ids.index(ident)]
        except ValueError:
            raise KeyError(ident) from None

    def by_id(self) -> dict[int, Job]:
        return dict(zip(self.ids, self.jobs))

    def total_jobs(self) -> int:
        return sum(job.multiplicity for job in self.jobs)

    def density(self) -> Fraction:
        return sum((job.density for job in self.jobs), Fraction(0))

    def is_integral(self) -> bool:
        return all(job.period.denominator == 1 for job in self.jobs)

    def is_expanded(self) -> bool:
        return all(job.multiplicity == 1 for job in self.jobs)

    def expand(self) -> "PinwheelInstance":
        """One job per unit of multiplicity; ids are renumbered 1..N."""
        if self.is_expanded():
            return self
        jobs = []
        for job in self.jobs:
            for copy in range(job.multiplicity):
                jobs.append(Job(job.period, 1, job.label, job.tag + (("copy", copy),) if job.tag else ()))
        return PinwheelInstance(jobs)

    def max_id(self) -> int:
        return max(self.ids, default=0)


def density(inst: PinwheelInstance) -> Fraction:
    """Exact sum of multiplicity / period."""
    return inst.density()


def scale(inst: PinwheelInstance, alpha: Any) -> PinwheelInstance:
    alpha = as_rational(alpha)
    if alpha <= 0:
        raise InvalidInstance("scale factor must be positive")
    return PinwheelInstance(
        [Job(job.period * alpha, job.multiplicity, job.label, job.tag) for job in inst.jobs], inst.ids
    )


def floor_periods(inst: PinwheelInstance) -> PinwheelInstance:
    jobs = []
    for job in inst.jobs:
        p = floor(job.period)
        if p < 1:
            raise InvalidInstance(f"flooring {job.period} gives a period below 1")
        jobs.append(Job(p, job.multiplicity, job.label, job.tag))
    return PinwheelInstance(jobs, inst.ids)


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Schedule:
    """One period of a periodic schedule; slot values are job ids or HOLIDAY."""

    slots: tuple

    def __init__(self, slots: Iterable[int | None]):
        slots = tuple(slots)
        if not slots:
            raise InvalidSchedule("a schedule needs period at least 1")
        object.__setattr__(self, "slots", slots)

    @property
    def period(self) -> int:
        return len(self.slots)

    def __len__(self) -> int:
        return len(self.slots)

    def holiday_fraction(self) -> Fraction:
        return Fraction(sum(1 for s in self.slots if s is HOLIDAY), len(self.slots))

    def occurrences(self, ident: int) -> list[int]:
        return [t for t, s in enumerate(self.slots) if s == ident]


@dataclass(frozen=True)
class Valid:
    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Violation:
    job: int
    start: int
    length: int

    def __bool__(self) -> bool:
        return False

    @property
    def interval(self) -> tuple[int, int]:
        return (self.start, self.start + self.length)


def _check_ids(inst: PinwheelInstance, slots: Iterable[Any]) -> None:
    known = set(inst.ids)
    for s in slots:
        if s is not HOLIDAY and s not in known:
            raise InvalidSchedule(f"slot references unknown job {s!r}")


def _counting_violation(
    positions: Sequence[int], period: Fraction, lo_sentinel: bool
) -> tuple[int, int] | None:
    """Scan occurrence times for a window with fewer than floor(L/period) hits.

    Uses y_k = t_k - k*period: a window strictly between occurrences i < j
    breaks the requirement exactly when y_j - y_i >= 1.  Returns the offending
    (start, length) or None.
    """
    num, den = period.numerator, period.denominator
    best_val = None
    best_idx = 0
    for k, t in enumerate(positions):
        y = den * t - k * num
        if best_val is not None and y - best_val >= den:
            ti = positions[best_idx]
            return (ti + 1, t - ti - 1)
        if best_val is None or y < best_val:
            best_val, best_idx = y, k
    return None


def validate_schedule(inst: PinwheelInstance, sched: Schedule) -> Valid | Violation:
    """Check the periodic schedule against every job of ``inst``.

    Integer periods use the cyclic-gap test; fractional periods use the
    counting criterion (every window of length L holds floor(L/a) occurrences).
    """
    inst = inst.expand()
    _check_ids(inst, sched.slots)
    p = sched.period
    for ident, job in zip(inst.ids, inst.jobs):
        occ = sched.occurrences(ident)
        a = job.period
        if not occ:
            return Violation(ident, 0, ceil(a))
        if a.denominator == 1:
            bad = cyclic_gap_violation(occ, p, int(a))
            if bad is not None:
                return Violation(ident, bad[0], bad[1])
            continue
        c = len(occ)
        drift = p - c * a
        if drift > 0:
            k = ceil(1 / drift)
            return Violation(ident, occ[0] + 1, k * p - 1)
        doubled = occ + [t + p for t in occ]
        bad = _counting_violation(doubled, a, False)
        if bad is not None:
            return Violation(ident, bad[0] % p, bad[1])
    return Valid()


def cyclic_gap_violation(occ: Sequence[int], p: int, a: int) -> tuple[int, int] | None:
    """For an integer period, the largest cyclic gap must not exceed ``a``."""
    for prev, nxt in zip(occ, list(occ[1:]) + [occ[0] + p]):
        if nxt - prev > a:
            return (prev + 1, nxt - prev - 1)
    return None


def validate_window(inst: PinwheelInstance, slots: Sequence[Any]) -> Valid | Violation:
    """Check every sub-interval of a finite window (no wrap-around)."""
    inst = inst.expand()
    _check_ids(inst, slots)
    w = len(slots)
    by_job: dict[Any, list[int]] = {ident: [-1] for ident in inst.ids}
    for t, s in enumerate(slots):
        if s is not HOLIDAY:
            by_job[s].append(t)
    for ident, job in zip(inst.ids, inst.jobs):
        positions = by_job[ident] + [w]
        bad = _counting_violation(positions, job.period, True)
        if bad is not None:
            return Violation(ident, bad[0], bad[1])
    return Valid()


# ---------------------------------------------------------------------------
# layered schedule representation


@dataclass(frozen=True)
class FoldMerge:
    """Occurrences of ``merged`` alternate between ``a`` and ``b`` (``a`` first)."""

    merged: int
    a: int
    b: int


@dataclass(frozen=True)
class FoldMonotone:
    """Occurrences of ``new`` are handed to ``old`` unchanged."""

    new: int
    old: int


@dataclass(frozen=True)
class HolidayInsert:
    """After every ``every`` slots one extra slot is inserted.

    The inserted slot holds ``marker`` (a placeholder id consumed later by
    :class:`PlaceInHolidays`) or a holiday when ``marker`` is None.
    """

    every: int
    marker: int | None = None


@dataclass(frozen=True)
class PlaceInHolidays:
    """Slots equal to ``target`` are filled consecutively by ``inner``."""

    inner: "ScheduleRepr"
    target: int | None = None


@dataclass(frozen=True)
class Partition:
    """The k-th occurrence of ``job`` goes to ``new_ids[k % q]``."""

    job: int
    q: int
    new_ids: tuple


def _inner_index(t: int, every: int) -> int:
    """Slots of the layer below that precede position t after holiday insertion."""
    q, r = divmod(t, every + 1)
    return q * every + min(r, every)


def _positions(slots: Sequence[Any]) -> dict:
    pos: dict = {}
    for i, s in enumerate(slots):
        pos.setdefault(s, []).append(i)
    return pos


def _assign(slots: list, pos: dict, value: Any, idx: list[int]) -> None:
    if not idx:
        return
    for i in idx:
        slots[i] = value
    old = pos.get(value)
    pos[value] = sorted(old + idx) if old else list(idx)


Directive = FoldMerge | FoldMonotone | HolidayInsert | PlaceInHolidays | Partition


class ScheduleRepr:
    """Base schedule plus an ordered chain of substitution directives.

    Any slot, and any prefix count of a value, is computable in time linear
    in the directive count, so windows can be expanded anywhere.
    """

    def __init__(self, base: Schedule, directives: Iterable[Directive] = ()):
        self.base = base
        self.directives: tuple = tuple(directives)
        self._prefix: dict[Any, list[int]] = {}
        self._check()

    def _check(self) -> None:
        for d in self.directives:
            if isinstance(d, HolidayInsert) and d.every < 1:
                raise MalformedRepr("HolidayInsert.every must be >= 1")
            if isinstance(d, Partition) and (d.q < 1 or len(d.new_ids) != d.q):
                raise MalformedRepr("Partition needs q >= 1 new ids")
            if isinstance(d, PlaceInHolidays) and not isinstance(d.inner, ScheduleRepr):
                raise MalformedRepr("PlaceInHolidays.inner must be a ScheduleRepr")

    def with_directives(self, extra: Iterable[Directive]) -> "ScheduleRepr":
        return ScheduleRepr(self.base, self.directives + tuple(extra))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScheduleRepr):
            return NotImplemented
        return self.base == other.base and self.directives == other.directives

    # -- counting -----------------------------------------------------------

    def _base_counts(self, t: int) -> dict:
        if not self._prefix:
            for pos, s in enumerate(self.base.slots):
                self._prefix.setdefault(s, []).append(pos)
        p = len(self.base.slots)
        q, r = divmod(t, p)
        return {v: q * len(pos) + bisect_left(pos, r) for v, pos in self._prefix.items()}

    def _level_times(self, t: int) -> list[int]:
        """Position in each layer's own time line that corresponds to t at the top."""
        d = len(self.directives)
        ts = [0] * (d + 1)
        ts[d] = t
        for level in range(d, 0, -1):
            directive = self.directives[level - 1]
            if isinstance(directive, HolidayInsert):
                ts[level - 1] = _inner_index(ts[level], directive.every)
            else:
                ts[level - 1] = ts[level]
        return ts

    @staticmethod
    def _lift_counts(directive: Directive, counts: dict, t: int) -> None:
        """Turn counts of the layer below into counts of this layer, in place.

        ``t`` is the prefix length in this layer's time line.
        """
        if isinstance(directive, HolidayInsert):
            q = t // (directive.every + 1)
            if q:
                counts[directive.marker] = counts.get(directive.marker, 0) + q
        elif isinstance(directive, FoldMerge):
            m = counts.pop(directive.merged, 0)
            if m:
                counts[directive.a] = counts.get(directive.a, 0) + (m + 1) // 2
                counts[directive.b] = counts.get(directive.b, 0) + m // 2
        elif isinstance(directive, FoldMonotone):
            m = counts.pop(directive.new, 0)
            if m:
                counts[directive.old] = counts.get(directive.old, 0) + m
        elif isinstance(directive, Partition):
            m = counts.pop(directive.job, 0)
            if m:
                q, rem = divmod(m, directive.q)
                for r, ident in enumerate(directive.new_ids):
                    counts[ident] = counts.get(ident, 0) + q + (1 if r < rem else 0)
        elif isinstance(directive, PlaceInHolidays):
            m = counts.pop(directive.target, 0)
            if m:
                for v, c in directive.inner.counts_at(m).items():
                    counts[v] = counts.get(v, 0) + c
        else:
            raise MalformedRepr(f"unknown directive {directive!r}")

    def counts_at(self, t: int) -> dict:
        """Occurrences of every value in the slots [0, t)."""
        if t <= 0:
            return {}
        ts = self._level_times(t)
        counts = self._base_counts(ts[0])
        for level, directive in enumerate(self.directives, start=1):
            self._lift_counts(directive, counts, ts[level])
        return {v: c for v, c in counts.items() if c}

    def count(self, value: Any, t: int) -> int:
        """Number of slots in [0, t) holding ``value``."""
        return self.counts_at(t).get(value, 0)

    # -- expansion ----------------------------------------------------------

    def window(self, t0: int, t1: int) -> list:
        if t0 < 0:
            raise MalformedRepr("window start must be non-negative")
        if t1 <= t0:
            return []
        lo = self._level_times(t0)
        hi = self._level_times(t1 - 1)
        base = self.base.slots
        p = len(base)
        slots = [base[t % p] for t in range(lo[0], hi[0] + 1)]
        pos = _positions(slots)
        counts = self._base_counts(lo[0])
        for level, d in enumerate(self.directives, start=1):
            if isinstance(d, HolidayInsert):
                e = d.every
                start = lo[level - 1]
                out = []
                for t in range(lo[level], hi[level] + 1):
                    if t % (e + 1) == e:
                        out.append(d.marker)
                    else:
                        out.append(slots[_inner_index(t, e) - start])
                slots = out
                pos = _positions(slots)
            elif isinstance(d, FoldMerge):
                k = counts.get(d.merged, 0)
                hits = pos.pop(d.merged, [])
                first = hits[k % 2 :: 2]
                second = hits[1 - k % 2 :: 2]
                _assign(slots, pos, d.a, first)
                _assign(slots, pos, d.b, second)
            elif isinstance(d, FoldMonotone):
                _assign(slots, pos, d.old, pos.pop(d.new, []))
            elif isinstance(d, Partition):
                k = counts.get(d.job, 0)
                hits = pos.pop(d.job, [])
                for r, ident in enumerate(d.new_ids):
                    _assign(slots, pos, ident, hits[(r - k) % d.q :: d.q])
            elif isinstance(d, PlaceInHolidays):
                k = counts.get(d.target, 0)
                hits = pos.pop(d.target, [])
                fill = d.inner.window(k, k + len(hits))
                groups: dict = {}
                for i, v in zip(hits, fill):
                    groups.setdefault(v, []).append(i)
                for v, idx in groups.items():
                    _assign(slots, pos, v, idx)
            else:
                raise MalformedRepr(f"unknown directive {d!r}")
            self._lift_counts(d, counts, lo[level])
        return slots

    def slot(self, t: int) -> Any:
        return self.window(t, t + 1)[0]

    # -- periodicity --------------------------------------------------------

    def period_counts(self) -> tuple[int, dict]:
        """A period of the represented schedule and per-value counts in it."""
        # true count of v is stored[v] * mult; rescaling a whole layer only touches mult
        stored: dict = {}
        for s in self.base.slots:
            stored[s] = stored.get(s, 0) + 1
        mult = 1
        p = len(self.base.slots)

        def take(v: Any) -> int:
            c = stored.pop(v, 0) * mult
            assert c == int(c)
            return int(c)

        def add(v: Any, c: int) -> None:
            if c:
                stored[v] = stored.get(v, 0) + Fraction(c, mult)

        def peek(v: Any) -> int:
            return int(stored.get(v, 0) * mult)

        for d in self.directives:
            if isinstance(d, HolidayInsert):
                k = d.every // gcd(p, d.every)
                mult *= k
                p = p * k // d.every * (d.every + 1)
                add(d.marker, p // (d.every + 1))
            elif isinstance(d, FoldMerge):
                k = 2 if peek(d.merged) % 2 else 1
                mult *= k
                p *= k
                m = take(d.merged)
                add(d.a, m // 2)
                add(d.b, m // 2)
            elif isinstance(d, FoldMonotone):
                add(d.old, take(d.new))
            elif isinstance(d, Partition):
                c = peek(d.job)
                k = d.q // gcd(c, d.q) if c else 1
                mult *= k
                p *= k
                m = take(d.job)
                for ident in d.new_ids:
                    add(ident, m // d.q)
            elif isinstance(d, PlaceInHolidays):
                c = peek(d.target)
                if c:
                    pi, inner = d.inner.period_counts()
                    k = pi // gcd(c, pi)
                    mult *= k
                    p *= k
                    reps = take(d.target) // pi
                    for v, ci in inner.items():
                        add(v, ci * reps)
            else:
                raise MalformedRepr(f"unknown directive {d!r}")
        counts = {}
        for v, c in stored.items():
            c = c * mult
            if c:
                counts[v] = int(c)
        return p, counts

    def period(self) -> int:
        return self.period_counts()[0]

    def holiday_fraction(self) -> Fraction:
        p, counts = self.period_counts()
        return Fraction(counts.get(HOLIDAY, 0), p)

    def to_schedule(self, limit: int | None = None) -> Schedule:
        p = self.period()
        if limit is not None and p > limit:
            raise MalformedRepr(f"period {p} exceeds expansion limit {limit}")
        return Schedule(self.window(0, p))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {"base": list(self.base.slots), "directives": [_directive_to_dict(d) for d in self.directives]}

    @classmethod
    def from_dict(cls, data: dict) -> "ScheduleRepr":
        try:
            base = Schedule(data["base"])
            return cls(base, [_directive_from_dict(d) for d in data.get("directives", [])])
        except (KeyError, TypeError) as exc:
            raise MalformedRepr(f"bad representation: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ScheduleRepr":
        return cls.from_dict(json.loads(text))


def _directive_to_dict(d: Directive) -> dict:
    if isinstance(d, FoldMerge):
        return {"op": "FOLD_MERGE", "merged": d.merged, "a": d.a, "b": d.b}
    if isinstance(d, FoldMonotone):
        return {"op": "FOLD_MONOTONE", "new": d.new, "old": d.old}
    if isinstance(d, HolidayInsert):
        return {"op": "HOLIDAY_INSERT", "every": d.every, "marker": d.marker}
    if isinstance(d, PlaceInHolidays):
        return {"op": "PLACE_IN_HOLIDAYS", "target": d.target, "inner": d.inner.to_dict()}
    if isinstance(d, Partition):
        return {"op": "PARTITION", "job": d.job, "q": d.q, "new_ids": list(d.new_ids)}
    raise MalformedRepr(f"unknown directive {d!r}")


def _directive_from_dict(data: dict) -> Directive:
    op = data.get("op")
    if op == "FOLD_MERGE":
        return FoldMerge(data["merged"], data["a"], data["b"])
    if op == "FOLD_MONOTONE":
        return FoldMonotone(data["new"], data["old"])
    if op == "HOLIDAY_INSERT":
        return HolidayInsert(data["every"], data.get("marker"))
    if op == "PLACE_IN_HOLIDAYS":
        return PlaceInHolidays(ScheduleRepr.from_dict(data["inner"]), data.get("target"))
    if op == "PARTITION":
        return Partition(data["job"], data["q"], tuple(data["new_ids"]))
    raise MalformedRepr(f"unknown directive op {op!r}")


def expand_repr(rep: ScheduleRepr, window: tuple[int, int]) -> list:
    t0, t1 = window
    if t0 >= t1:
        raise MalformedRepr("window must satisfy t0 < t1")
    return rep.window(t0, t1)


def validate_repr(
    inst: PinwheelInstance, rep: ScheduleRepr, *, limit: int = 2_000_000, window: int | None = None
) -> Valid | Violation:
    """Validate a representation: a full period when it fits under ``limit``,
    otherwise the finite window [0, window)."""
    p = rep.period()
    if p <= limit:
        return validate_schedule(inst, Schedule(rep.window(0, p)))
    w = window if window is not None else limit
    return validate_window(inst, rep.window(0, w))


# ---------------------------------------------------------------------------
# text formats

_JOB_LINE = re.compile(r"^(\d+)(?:\s*/\s*(\d+))?(?:\s+x\s*(\d+))?$")


def parse_instance(text: str) -> PinwheelInstance:
    """One job per line: ``period[/denominator][ xMULT]``; '#' starts a comment."""
    jobs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _JOB_LINE.match(line)
        if not m:
            raise ParseError(f"cannot parse job line {raw!r}", lineno)
        num, den, mult = m.groups()
        if den is not None and int(den) == 0:
            raise ParseError("zero denominator", lineno)
        period = Fraction(int(num), int(den) if den else 1)
        try:
            jobs.append(Job(period, int(mult) if mult else 1))
        except InvalidInstance as exc:
            raise ParseError(str(exc), lineno) from exc
    return PinwheelInstance(jobs)


def format_instance(inst: PinwheelInstance) -> str:
    lines = []
    for job in inst.jobs:
        p = job.period
        s = str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"
        if job.multiplicity != 1:
            s += f" x{job.multiplicity}"
        lines.append(s)
    return "\n".join(lines) + ("\n" if lines else "")


def format_schedule(sched: Schedule) -> str:
    body = " ".join("-" if s is HOLIDAY else str(s) for s in sched.slots)
    return f"period: {sched.period}\nslots: {body}\n"


def parse_schedule(text: str) -> Schedule:
    slots = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(":")
        key = key.strip()
        if key == "slots":
            try:
                slots = [None if tok in ("-", "H") else int(tok) for tok in value.split()]
            except ValueError as exc:
                raise ParseError(f"bad slot token: {exc}", lineno) from exc
        elif key != "period":
            raise ParseError(f"unexpected key {key!r}", lineno)
    if slots is None:
        raise ParseError("missing 'slots:' line")
    return Schedule(slots)
