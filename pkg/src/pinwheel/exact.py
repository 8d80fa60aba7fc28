"""Exact decision procedures.

The state of an integer instance after a slot records, per job, how many
slots have passed since that job last ran.  A schedule is a walk in this
finite graph, and periodic schedules are exactly its cycles, so both the
decision problem and the best achievable holiday fraction reduce to cycle
questions on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

from .core import (
    HOLIDAY,
    InvalidInstance,
    PinwheelError,
    PinwheelInstance,
    Schedule,
    Valid,
    search_budget,
    state_budget,
)


class StateBudgetExceeded(PinwheelError):
    pass


class BudgetExceeded(PinwheelError):
    pass


class NoCycle(PinwheelError):
    """The state graph has no cycle, so no periodic schedule exists."""


@dataclass(frozen=True)
class Schedulable:
    schedule: Schedule

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Unschedulable:
    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Exhausted:
    def __bool__(self) -> bool:
        return False


def _integer_periods(inst: PinwheelInstance) -> tuple[list[int], list[int]]:
    inst = inst.expand()
    if not inst.is_integral():
        raise InvalidInstance("exact procedures need integer periods")
    return [int(p) for p in inst.periods], list(inst.ids)


def _check_budget(periods: Sequence[int], budget: int | None) -> int:
    budget = state_budget() if budget is None else budget
    size = 1
    for a in periods:
        size *= a
        if size > budget:
            raise StateBudgetExceeded(f"state graph exceeds budget of {budget} states")
    return size


class StateGraph:
    """Mixed-radix encoding of states; coordinate i ranges over 0..a_i-1."""

    def __init__(self, periods: Sequence[int]):
        self.periods = list(periods)
        self.strides = []
        s = 1
        for a in self.periods:
            self.strides.append(s)
            s *= a
        self.size = s
        self.all_step = sum(self.strides)

    def decode(self, idx: int) -> list[int]:
        return [(idx // st) % a for st, a in zip(self.strides, self.periods)]

    def successors(self, idx: int) -> list[tuple[int | None, int]]:
        """(action, next state) pairs, job with least slack first, holiday last.

        Action k is the 0-based job index scheduled; None is a holiday.
        """
        s = self.decode(idx)
        tight = [i for i, (x, a) in enumerate(zip(s, self.periods)) if x + 1 >= a]
        if len(tight) > 1:
            return []
        if len(tight) == 1:
            k = tight[0]
            return [(k, idx + self.all_step - (s[k] + 1) * self.strides[k])]
        order = sorted(range(len(s)), key=lambda i: (self.periods[i] - 1 - s[i], i))
        out = [(k, idx + self.all_step - (s[k] + 1) * self.strides[k]) for k in order]
        out.append((None, idx + self.all_step))
        return out

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All edges as arrays (src, dst, holiday-weight, action); action -1 is a holiday."""
        idx = np.arange(self.size, dtype=np.int64)
        coords = [(idx // st) % a for st, a in zip(self.strides, self.periods)]
        # number of jobs that cannot wait another slot
        tight = np.zeros(self.size, dtype=np.int64)
        for c, a in zip(coords, self.periods):
            tight += (c + 1 >= a)
        srcs, dsts, ws, acts = [], [], [], []
        for k, (c, a, st) in enumerate(zip(coords, self.periods, self.strides)):
            ok = (tight == 0) | ((tight == 1) & (c + 1 >= a))
            src = idx[ok]
            srcs.append(src)
            dsts.append(src + self.all_step - (c[ok] + 1) * st)
            ws.append(np.zeros(len(src), dtype=np.int64))
            acts.append(np.full(len(src), k, dtype=np.int64))
        src = idx[tight == 0]
        srcs.append(src)
        dsts.append(src + self.all_step)
        ws.append(np.ones(len(src), dtype=np.int64))
        acts.append(np.full(len(src), -1, dtype=np.int64))
        return np.concatenate(srcs), np.concatenate(dsts), np.concatenate(ws), np.concatenate(acts)


def solve_exact(inst: PinwheelInstance, *, budget: int | None = None) -> Schedulable | Unschedulable:
    """Decide schedulability by searching the state graph for a cycle."""
    periods, ids = _integer_periods(inst)
    if not periods:
        return Schedulable(Schedule([HOLIDAY]))
    _check_budget(periods, budget)
    graph = StateGraph(periods)
    # 0 unvisited, 1 on stack, 2 finished
    color = bytearray(graph.size)
    for root in range(graph.size):
        if color[root]:
            continue
        path_states = [root]
        path_actions: list = []
        stack = [iter(graph.successors(root))]
        color[root] = 1
        while stack:
            step = next(stack[-1], None)
            if step is None:
                stack.pop()
                color[path_states.pop()] = 2
                if path_actions:
                    path_actions.pop()
                continue
            action, nxt = step
            if color[nxt] == 1:
                start = path_states.index(nxt)
                cycle = path_actions[start:] + [action]
                return Schedulable(Schedule([HOLIDAY if k is None else ids[k] for k in cycle]))
            if color[nxt] == 0:
                color[nxt] = 1
                path_states.append(nxt)
                path_actions.append(action)
                stack.append(iter(graph.successors(nxt)))
    return Unschedulable()


# ---------------------------------------------------------------------------
# maximum holiday fraction


_NEG = np.int64(-(1 << 50))


def _trim(size: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Boolean mask of states that can lie on a cycle (iterated source/sink removal)."""
    alive = np.ones(size, dtype=bool)
    while True:
        live_edge = alive[src] & alive[dst]
        outdeg = np.bincount(src[live_edge], minlength=size)
        indeg = np.bincount(dst[live_edge], minlength=size)
        keep = alive & (outdeg > 0) & (indeg > 0)
        if keep.sum() == alive.sum():
            return alive
        alive = keep


def _relax(d: np.ndarray, src: np.ndarray, dst: np.ndarray, w: np.ndarray, size: int) -> np.ndarray:
    cand = d[src] + w
    out = np.full(size, _NEG, dtype=np.int64)
    np.maximum.at(out, dst, cand)
    out[out < _NEG // 2] = _NEG
    return out


def _karp_max_mean(size: int, src: np.ndarray, dst: np.ndarray, w: np.ndarray) -> Fraction:
    """Karp's characterization for the maximum cycle mean, with D_0 = 0 everywhere.

    Two passes: the first computes D_n, the second streams D_k for k < n and
    keeps, per vertex, the minimum of (D_n - D_k) / (n - k).
    """
    n = size
    d = np.zeros(size, dtype=np.int64)
    for _ in range(n):
        d = _relax(d, src, dst, w, size)
    dn = d
    finite = dn > _NEG // 2
    if not finite.any():
        raise NoCycle("state graph has no cycle")
    best_num = np.zeros(size, dtype=np.int64)
    best_den = np.zeros(size, dtype=np.int64)  # 0 marks "no candidate yet"
    d = np.zeros(size, dtype=np.int64)
    for k in range(n):
        ok = finite & (d > _NEG // 2)
        num = dn - d
        den = n - k
        better = ok & ((best_den == 0) | (num * best_den < best_num * den))
        best_num = np.where(better, num, best_num)
        best_den = np.where(better, den, best_den)
        d = _relax(d, src, dst, w, size)
    result = None
    for v in np.flatnonzero(finite & (best_den > 0)):
        r = Fraction(int(best_num[v]), int(best_den[v]))
        if result is None or r > result:
            result = r
    if result is None:
        raise NoCycle("state graph has no cycle")
    return result


def _tight_cycle(
    size: int, src: np.ndarray, dst: np.ndarray, w: np.ndarray, act: np.ndarray, mean: Fraction
) -> list[int]:
    """Return the action sequence of a cycle whose mean weight equals ``mean``."""
    p, q = mean.numerator, mean.denominator
    wp = q * w - p
    pot = np.zeros(size, dtype=np.int64)
    for _ in range(size + 1):
        cand = pot[src] + wp
        new = pot.copy()
        np.maximum.at(new, dst, cand)
        if np.array_equal(new, pot):
            break
        pot = new
    else:
        raise AssertionError("positive cycle after reweighting; mean is not maximal")
    tight = pot[src] + wp == pot[dst]
    ts, td, ta = src[tight], dst[tight], act[tight]
    alive = _trim(size, ts, td)
    keep = alive[ts] & alive[td]
    ts, td, ta = ts[keep], td[keep], ta[keep]
    if len(ts) == 0:
        raise AssertionError("no tight cycle found")
    succ = {}
    for s, d_, a in zip(ts.tolist(), td.tolist(), ta.tolist()):
        succ.setdefault(s, (d_, a))
    v = int(ts[0])
    seen: dict[int, int] = {}
    walk: list[int] = []
    while v not in seen:
        seen[v] = len(walk)
        v2, a = succ[v]
        walk.append(a)
        v = v2
    return walk[seen[v]:]


def max_holiday_cycle(inst: PinwheelInstance, *, budget: int | None = None) -> tuple[Fraction, Schedule]:
    """Largest holiday fraction over periodic schedules, plus a schedule attaining it."""
    periods, ids = _integer_periods(inst)
    if not periods:
        return Fraction(1), Schedule([HOLIDAY])
    _check_budget(periods, budget)
    graph = StateGraph(periods)
    src, dst, w, act = graph.edges()
    alive = _trim(graph.size, src, dst)
    if not alive.any():
        raise NoCycle("instance is unschedulable")
    # compact the graph to its cycle-carrying core
    keep = alive[src] & alive[dst]
    src, dst, w, act = src[keep], dst[keep], w[keep], act[keep]
    remap = np.full(graph.size, -1, dtype=np.int64)
    core_states = np.flatnonzero(alive)
    remap[core_states] = np.arange(len(core_states))
    src, dst = remap[src], remap[dst]
    size = len(core_states)
    mean = _karp_max_mean(size, src, dst, w)
    cycle = _tight_cycle(size, src, dst, w, act, mean)
    sched = Schedule([HOLIDAY if a < 0 else ids[a] for a in cycle])
    if sched.holiday_fraction() != mean:
        raise AssertionError("extracted cycle does not attain the maximum mean")
    return mean, sched


def max_holiday_fraction(inst: PinwheelInstance, *, budget: int | None = None) -> Fraction:
    return max_holiday_cycle(inst, budget=budget)[0]


# ---------------------------------------------------------------------------
# exact pinwheel offsets


@dataclass(frozen=True)
class Block:
    """Residues {start + k*step mod modulus : 0 <= k < count}.

    Each residue class is split among jobs of period P (a multiple of
    ``modulus``) at offsets c, c + modulus, ..., so one block stands for
    count * P / modulus jobs.
    """

    start: int
    step: int
    count: int
    modulus: int

    def residues(self) -> list[int]:
        return [(self.start + k * self.step) % self.modulus for k in range(self.count)]


OffsetEntry = Union[int, Sequence[int], Sequence[Block]]


@dataclass(frozen=True)
class Collision:
    i: int
    j: int
    reason: str = ""

    def __bool__(self) -> bool:
        return False


class EpsOffsetAssignment:
    """Map from job id to an offset, a list of offsets (one per copy), or blocks."""

    def __init__(self, offsets: Mapping[int, OffsetEntry] | None = None):
        self.offsets: dict[int, OffsetEntry] = dict(offsets or {})
        self.meta: dict[str, Any] = {}

    def __getitem__(self, ident: int) -> OffsetEntry:
        return self.offsets[ident]

    def __contains__(self, ident: object) -> bool:
        return ident in self.offsets

    def __len__(self) -> int:
        return len(self.offsets)

    def items(self):
        return self.offsets.items()

    def __repr__(self) -> str:
        return f"EpsOffsetAssignment({self.offsets!r})"


def floor_sum(n: int, m: int, a: int, b: int) -> int:
    """Sum of floor((a*i + b) / m) for 0 <= i < n, with a, b >= 0 and m >= 1."""
    total = 0
    while True:
        if a >= m:
            total += (n - 1) * n // 2 * (a // m)
            a %= m
        if b >= m:
            total += n * (b // m)
            b %= m
        y_max = a * n + b
        if y_max < m:
            return total
        n, b = divmod(y_max, m)
        m, a = a, m


def blocks_intersect(b1: Block, b2: Block) -> bool:
    """Whether some residue of b1 and some residue of b2 agree modulo gcd of the moduli."""
    a1, s1, c1, m1 = b1.start, b1.step, b1.count, b1.modulus
    a2, s2, c2, m2 = b2.start, b2.step, b2.count, b2.modulus
    if c1 <= 0 or c2 <= 0:
        return False
    g = gcd(m1, m2)
    s1 %= g
    s2 %= g
    e1 = gcd(s1, g)
    t1 = g // e1
    # need k2 with a2 + k2*s2 == a1 (mod e1)
    h = gcd(s2, e1)
    diff = (a1 - a2) % e1
    if diff % h:
        return False
    tau = e1 // h
    if tau == 1:
        k0 = 0
    else:
        k0 = (diff // h) * pow(s2 // h, -1, tau) % tau
    if k0 >= c2:
        return False
    n_t = (c2 - k0 + tau - 1) // tau
    if c1 >= t1:
        return True
    inv = pow(s1 // e1, -1, t1) if t1 > 1 else 0
    alpha = ((a2 + k0 * s2 - a1) // e1) * inv % t1
    beta = (tau * s2 // e1) * inv % t1
    hits = floor_sum(n_t, t1, beta, alpha) - floor_sum(n_t, t1, beta, alpha + t1 - c1) + n_t
    return hits > 0


def _items(inst: PinwheelInstance, offs: EpsOffsetAssignment) -> list[tuple[int, int, Block]]:
    """Flatten offsets into (job id, period, block) triples after structural checks."""
    if not inst.is_integral():
        raise InvalidInstance("offsets need integer periods")
    out = []
    for ident, job in zip(inst.ids, inst.jobs):
        if ident not in offs:
            raise InvalidInstance(f"job {ident} has no offset")
        period = int(job.period)
        entry = offs[ident]
        if isinstance(entry, int):
            entry = [entry]
        covered = 0
        for item in entry:
            if isinstance(item, Block):
                blk = item
                if blk.modulus < 1 or period % blk.modulus:
                    raise InvalidInstance(f"job {ident}: block modulus must divide the period")
                if blk.step < 1 or blk.modulus % blk.step or blk.count * blk.step > blk.modulus:
                    raise InvalidInstance(f"job {ident}: block residues must be distinct")
                if not 0 <= blk.start < blk.modulus:
                    raise InvalidInstance(f"job {ident}: block start out of range")
                covered += blk.count * (period // blk.modulus)
            else:
                o = int(item)
                if not 0 <= o < period:
                    raise InvalidInstance(f"job {ident}: offset {o} not in [0, {period})")
                blk = Block(o, 1, 1, period)
                covered += 1
            out.append((ident, period, blk))
        if covered != job.multiplicity:
            raise InvalidInstance(f"job {ident}: offsets cover {covered} copies, expected {job.multiplicity}")
    return out


def validate_offsets(inst: PinwheelInstance, offs: EpsOffsetAssignment) -> Valid | Collision:
    """Pairwise congruence check: no two residue sets meet modulo the gcd of their moduli.

    Blocks are first bucketed by their residue modulo the gcd of all moduli
    and steps, since blocks in different buckets can never meet.
    """
    items = _items(inst, offs)
    big_g = 0
    for _, _, blk in items:
        big_g = gcd(big_g, blk.modulus)
        if blk.count > 1:
            big_g = gcd(big_g, blk.step)
    buckets: dict[int, list[tuple[int, int, Block]]] = {}
    for item in items:
        key = item[2].start % big_g if big_g else 0
        buckets.setdefault(key, []).append(item)
    for bucket in buckets.values():
        for x in range(len(bucket)):
            id1, _, b1 = bucket[x]
            for y in range(x + 1, len(bucket)):
                id2, _, b2 = bucket[y]
                if blocks_intersect(b1, b2):
                    return Collision(id1, id2, f"{b1} meets {b2}")
    return Valid()


def offsets_to_schedule(inst: PinwheelInstance, offs: EpsOffsetAssignment, *, limit: int = 10**6) -> Schedule:
    """Explicit schedule of one LCM period; expanded jobs get ids 1..N in instance order."""
    items = _items(inst, offs)
    period = 1
    for _, p, _ in items:
        period = period * p // gcd(period, p)
        if period > limit:
            raise BudgetExceeded(f"schedule period exceeds {limit}")
    slots: list = [HOLIDAY] * period
    exp_id = 0
    for ident, p, blk in items:
        for c in blk.residues():
            for j in range(p // blk.modulus):
                exp_id += 1
                for t in range(c + j * blk.modulus, period, p):
                    if slots[t] is not HOLIDAY:
                        raise InvalidInstance("offsets collide")
                    slots[t] = exp_id
    return Schedule(slots)


def solve_eps_offsets(
    inst: PinwheelInstance, *, budget: int | None = None
) -> EpsOffsetAssignment | Exhausted:
    """Backtracking over residues, shortest period first."""
    budget = search_budget() if budget is None else budget
    exp = inst.expand()
    if not exp.is_integral():
        raise InvalidInstance("offsets need integer periods")
    if exp.density() > 1:
        return Exhausted()
    order = sorted(range(len(exp)), key=lambda k: (exp.jobs[k].period, k))
    periods = [int(exp.jobs[k].period) for k in order]
    chosen: list[int] = []
    nodes = 0

    def fits(p: int, o: int) -> bool:
        for q, r in zip(periods, chosen):
            if (o - r) % gcd(p, q) == 0:
                return False
        return True

    def search(depth: int) -> bool:
        nonlocal nodes
        if depth == len(periods):
            return True
        p = periods[depth]
        # copies of one period are interchangeable; keep their offsets increasing
        lo = 0
        if depth and periods[depth - 1] == p and _same_job(depth):
            lo = chosen[-1] + 1
        for o in range(lo, p):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"offset search exceeded {budget} nodes")
            if fits(p, o):
                chosen.append(o)
                if search(depth + 1):
                    return True
                chosen.pop()
        return False

    def _same_job(depth: int) -> bool:
        return exp.jobs[order[depth]].period == exp.jobs[order[depth - 1]].period

    if not search(0):
        return Exhausted()
    result: dict[int, int] = {}
    for k, o in zip(order, chosen):
        result[exp.ids[k]] = o
    if exp is inst:
        return EpsOffsetAssignment(result)
    # fold copies back onto the original ids as offset lists
    grouped: dict[int, list[int]] = {}
    pos = 0
    for ident, job in zip(inst.ids, inst.jobs):
        grouped[ident] = [result[exp.ids[pos + c]] for c in range(job.multiplicity)]
        pos += job.multiplicity
    return EpsOffsetAssignment(grouped)
