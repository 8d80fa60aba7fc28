"""From 3-SAT to exact and dense pinwheel instances, plus satisfying-assignment witnesses.

The gadget periods are products of squared primes, so job counts and
periods are astronomically large even for a handful of variables.  Jobs are
therefore kept as (period, multiplicity) groups and witnesses are expressed
as residue-class blocks (see :class:`~pinwheel.exact.Block`), never as
explicit slot arrays.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt, lcm
from typing import Any, Hashable, Mapping, Sequence

from .core import InvalidInstance, Job, PinwheelError, PinwheelInstance, as_rational
from .exact import Block, EpsOffsetAssignment
from .sat import CnfFormula, InvalidFormula, is_34sat


class Not34Sat(PinwheelError):
    pass


class PreconditionViolated(PinwheelError):
    pass


class InfeasibleFlow(PinwheelError):
    pass


class SplitFailed(PinwheelError):
    pass


class DensityExceeded(PinwheelError):
    pass


class NotDivisibleChain(PinwheelError):
    pass


class WitnessFailed(PinwheelError):
    def __init__(self, message: str, stage: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


# ---------------------------------------------------------------------------
# primes and literal gadgets


def primes_above(v: int, count: int) -> list[int]:
    """The first ``count`` primes strictly greater than v (sieve, widened on demand)."""
    if count <= 0:
        return []
    limit = max(v**3, v + 16, 32)
    while True:
        sieve = bytearray([1]) * (limit + 1)
        sieve[0:2] = b"\x00\x00"
        for p in range(2, isqrt(limit) + 1):
            if sieve[p]:
                sieve[p * p :: p] = bytearray(len(range(p * p, limit + 1, p)))
        found = [p for p in range(v + 1, limit + 1) if sieve[p]]
        if len(found) >= count:
            return found[:count]
        limit *= 2


def _check_3sat(formula: CnfFormula) -> None:
    for j, c in enumerate(formula.clauses, 1):
        if not c or len(c) > 3:
            raise InvalidFormula(f"clause {j} has {len(c)} literals")
        if len(set(c)) != len(c):
            raise InvalidFormula(f"clause {j} repeats a literal")
        if any(-l in c for l in c):
            raise InvalidFormula(f"clause {j} contains a variable and its negation")


def _check_34sat(formula: CnfFormula) -> None:
    if not is_34sat(formula):
        raise Not34Sat("formula is not 3,4-SAT")


@dataclass(frozen=True)
class LiteralReps:
    """Prime gadgets per literal; literals are +i / -i for variable i."""

    n: int
    m: int
    rep1: dict[int, int]
    rep2: dict[int, int]
    b: dict[int, int]
    f: dict[int, int]
    clause_rep2: tuple[int, ...]

    @classmethod
    def of(cls, formula: CnfFormula) -> "LiteralReps":
        return _reps(formula)

    @property
    def v(self) -> int:
        return max(self.m, self.n)


@lru_cache(maxsize=256)
def _reps(formula: CnfFormula) -> LiteralReps:
    n, m = formula.num_vars, formula.num_clauses
    primes = primes_above(max(m, n), 2 * n)
    rep1: dict[int, int] = {}
    for i in range(1, n + 1):
        rep1[i] = primes[2 * i - 2]
        rep1[-i] = primes[2 * i - 1]
    rep2 = {lit: 2 * n * r * r for lit, r in rep1.items()}
    b = {lit: r * r - r for lit, r in rep1.items()}
    f = {i: 2 * n * rep1[i] * rep1[-i] for i in range(1, n + 1)}
    clause_rep2 = []
    for c in formula.clauses:
        prod = 1
        for lit in c:
            prod *= rep1[lit]
        clause_rep2.append(2 * n * prod * prod)
    return LiteralReps(n, m, rep1, rep2, b, f, tuple(clause_rep2))


def red_eps(formula: CnfFormula) -> PinwheelInstance:
    """Exact-pinwheel instance that is EPS-schedulable iff the formula is satisfiable.

    Tags: ("rep2", literal), ("f", variable), ("clause", clause index).
    """
    _check_3sat(formula)
    reps = _reps(formula)
    jobs = []
    for i in range(1, formula.num_vars + 1):
        for lit in (i, -i):
            jobs.append(Job(reps.rep2[lit], reps.b[lit], f"rep2[{lit}]", ("rep2", lit)))
    for i in range(1, formula.num_vars + 1):
        jobs.append(Job(reps.f[i], 1, f"f[{i}]", ("f", i)))
    for j, period in enumerate(reps.clause_rep2, 1):
        jobs.append(Job(period, 1, f"clause[{j}]", ("clause", j)))
    return PinwheelInstance(jobs)


def red_concise(formula: CnfFormula) -> PinwheelInstance:
    """red_eps padded to density exactly 1 with copies of the LCM period (tag ("pad",))."""
    base = red_eps(formula)
    big_l = 1
    for p in base.periods:
        big_l = lcm(big_l, int(p))
    pad = big_l * (1 - base.density())
    if pad.denominator != 1 or pad < 0:
        raise AssertionError(f"padding multiplicity {pad} is not a non-negative integer")
    jobs = list(base.jobs)
    if pad:
        jobs.append(Job(big_l, int(pad), "pad", ("pad",)))
    return PinwheelInstance(jobs)


# ---------------------------------------------------------------------------
# allowed periods and the greedy fillers


def allowed_periods(ind: int, formula: CnfFormula) -> list[int]:
    """Divisibility chain of n periods starting from variable ``ind`` and cycling through the rest."""
    _check_34sat(formula)
    n = formula.num_vars
    if not 1 <= ind <= n:
        raise ValueError(f"variable index {ind} outside 1..{n}")
    return list(_allowed(formula, ind))


def period_factor(var: int, formula: CnfFormula) -> int:
    """What one visit to ``var`` multiplies the running period by."""
    reps = _reps(formula)
    factor = 1
    clauses = 0
    for c in formula.clauses:
        if any(abs(l) == var for l in c):
            for lit in c:
                factor *= reps.rep1[lit] ** 2
            clauses += 1
    factor *= reps.rep1[var] ** 2 * reps.rep1[-var] ** 2 * reps.rep1[var] ** ((4 - clauses) * 6)
    return factor


@lru_cache(maxsize=1024)
def _allowed(formula: CnfFormula, ind: int) -> tuple[int, ...]:
    n = formula.num_vars
    period = 2 * n
    out = []
    for i in range(n):
        nxt = (ind + i - 1) % n + 1
        period *= period_factor(nxt, formula)
        out.append(period)
    return tuple(out)


def _greedy_counts(periods: Sequence[int], d: Fraction, start: int = 0) -> tuple[dict[int, int], Fraction]:
    counts: dict[int, int] = {}
    for p in periods[start:]:
        k = (p * d.numerator) // d.denominator
        if k:
            counts[p] = counts.get(p, 0) + k
            d -= Fraction(k, p)
    return counts, d


def _check_grain(d: Fraction, periods: Sequence[int], n: int) -> None:
    if d < 0 or d > Fraction(1, n):
        raise PreconditionViolated(f"d = {d} outside [0, 1/{n}]")
    if (d * periods[-1]).denominator != 1:
        raise PreconditionViolated("d is not a multiple of 1/P for the last allowed period P")


def greedy_counts(ind: int, d: Any, formula: CnfFormula) -> dict[int, int]:
    """Period -> count; largest-first filling of density d from the allowed periods of ``ind``."""
    d = as_rational(d)
    periods = allowed_periods(ind, formula)
    _check_grain(d, periods, formula.num_vars)
    counts, rest = _greedy_counts(periods, d)
    if rest != 0:
        raise AssertionError(f"greedy left density {rest}")
    return counts


def warm_greedy_counts(ind: int, d: Any, formula: CnfFormula) -> dict[int, int]:
    """Fixed warm-start copies at every period past the second, then greedy from the second period on."""
    d = as_rational(d)
    n = formula.num_vars
    periods = allowed_periods(ind, formula)
    if n < 2:
        raise PreconditionViolated("warm greedy needs at least two variables")
    _check_grain(d, periods, n)
    if d == 0:
        # formulas without clauses: nothing to reserve
        return {}
    floor_d = Fraction(periods[0], n * periods[1])
    if d < floor_d:
        raise PreconditionViolated(f"d = {d} below the warm-start requirement {floor_d}")
    counts: dict[int, int] = {}
    for i in range(3, n + 1):
        k, r = divmod(periods[0] * periods[i - 1], 2 * n * periods[i - 2])
        assert r == 0
        counts[periods[i - 1]] = k
        d -= Fraction(k, periods[i - 1])
        if d < 0:
            raise AssertionError("warm start overdrew the density")
    more, rest = _greedy_counts(periods, d, start=1)
    if rest != 0:
        raise AssertionError(f"warm greedy left density {rest}")
    for p, k in more.items():
        counts[p] = counts.get(p, 0) + k
    return counts


def _as_jobs(counts: Mapping[int, int], periods: Sequence[int], role: str, ind: int) -> list[Job]:
    return [
        Job(p, counts[p], f"{role}[{ind}][{periods.index(p)}]", (role, ind, periods.index(p)))
        for p in periods
        if counts.get(p)
    ]


def greedy_jobs(ind: int, d: Any, formula: CnfFormula) -> list[Job]:
    """Tagged ("greedy", ind, level) job groups of total density exactly d."""
    return _as_jobs(greedy_counts(ind, d, formula), allowed_periods(ind, formula), "greedy", ind)


def warm_greedy_jobs(ind: int, d: Any, formula: CnfFormula) -> list[Job]:
    """Tagged ("warm", ind, level) job groups of total density exactly d."""
    return _as_jobs(warm_greedy_counts(ind, d, formula), allowed_periods(ind, formula), "warm", ind)


def clause_sum(formula: CnfFormula) -> Fraction:
    return sum((Fraction(1, p) for p in _reps(formula).clause_rep2), Fraction(0))


def eps_density_of_variable(i: int, formula: CnfFormula) -> Fraction:
    """Density of the literal and f jobs of variable i plus the full clause budget."""
    reps = _reps(formula)
    return (
        Fraction(reps.b[i], reps.rep2[i])
        + Fraction(reps.b[-i], reps.rep2[-i])
        + Fraction(1, reps.f[i])
        + clause_sum(formula)
    )


def red_ps(formula: CnfFormula) -> PinwheelInstance:
    """Dense pinwheel instance, schedulable iff the formula is satisfiable.

    red_eps plus greedy jobs per variable topping it up to 1/n, plus warm
    greedy jobs of density clause_sum for variables 1..n-1.
    """
    _check_34sat(formula)
    jobs = list(red_eps(formula).jobs)
    n = formula.num_vars
    cs = clause_sum(formula)
    for i in range(1, n + 1):
        jobs += greedy_jobs(i, Fraction(1, n) - eps_density_of_variable(i, formula), formula)
    for ind in range(1, n):
        jobs += warm_greedy_jobs(ind, cs, formula)
    inst = PinwheelInstance(jobs)
    if n and inst.density() != 1:
        raise AssertionError(f"reduced density is {inst.density()}, not 1")
    return inst


# ---------------------------------------------------------------------------
# flow, combining, splitting


@dataclass(frozen=True)
class FlowAssignment:
    """d3[i-1] is the room left in variable i; warm jobs of variable i send d4 to i and d5 to i+1."""

    clause_sum: Fraction
    d3: tuple[Fraction, ...]
    d4: tuple[Fraction, ...]
    d5: tuple[Fraction, ...]


def flow_construct(d3: Sequence[Any], clause_sum: Any) -> FlowAssignment:
    cs = as_rational(clause_sum)
    d3 = tuple(as_rational(x) for x in d3)
    n = len(d3)
    if n == 0:
        return FlowAssignment(cs, (), (), ())
    if sum(d3) != (n - 1) * cs:
        raise InfeasibleFlow(f"room sums to {sum(d3)}, expected {(n - 1) * cs}")
    if not 0 <= d3[0] <= cs:
        raise InfeasibleFlow("first room outside [0, clause_sum]")
    d4: list[Fraction] = []
    d5: list[Fraction] = []
    for i in range(n - 1):
        d4.append(d3[i] - (d5[-1] if d5 else 0))
        d5.append(cs - d4[-1])
        if not (0 <= d4[-1] <= cs and 0 <= d5[-1] <= cs):
            raise InfeasibleFlow(f"capacity violated at variable {i + 1}")
    if n > 1 and d3[-1] != d5[-1]:
        raise InfeasibleFlow("last variable does not absorb the incoming flow")
    return FlowAssignment(cs, d3, tuple(d4), tuple(d5))


def _level_index(periods: Sequence[int], p: int) -> int:
    try:
        return list(periods).index(p)
    except ValueError:
        raise InvalidInstance(f"period {p} is not an allowed period") from None


def combine_jobs(n: int, jobs: Mapping[int, int], periods: Sequence[int], level: int) -> dict[int, int]:
    """Merge every full set of periods[i]/periods[i-1] copies into one copy of periods[i-1], top down to ``level``."""
    counts = {p: 0 for p in periods}
    for p, k in jobs.items():
        counts[periods[_level_index(periods, p)]] += k
    for i in range(n - 1, level, -1):
        factor = periods[i] // periods[i - 1]
        groups = counts[periods[i]] // factor
        counts[periods[i]] -= groups * factor
        counts[periods[i - 1]] += groups
    return {p: k for p, k in counts.items() if k}


# Tracked variant: each virtual job remembers which original warm jobs it stands for.
# A pool is a list of runs (recipe, multiplicity); a recipe is a tuple of
# (original period, count) pairs describing a single virtual job.

Recipe = tuple[tuple[int, int], ...]


def _merge(acc: dict[int, int], recipe: Recipe, times: int) -> None:
    for p, k in recipe:
        acc[p] = acc.get(p, 0) + k * times


def _take(pool: list[list], k: int) -> list[tuple[Recipe, int]]:
    """Remove the first k virtual jobs from a pool."""
    out = []
    while k:
        recipe, mult = pool[0]
        t = min(k, mult)
        out.append((recipe, t))
        k -= t
        if t == mult:
            pool.pop(0)
        else:
            pool[0][1] = mult - t
    return out


def _chunk(runs: list[tuple[Recipe, int]], size: int) -> list[list]:
    """Group consecutive virtual jobs into bundles of ``size``; the total must divide evenly."""
    out: list[list] = []
    acc: dict[int, int] = {}
    filled = 0
    for recipe, mult in runs:
        if filled:
            t = min(size - filled, mult)
            _merge(acc, recipe, t)
            filled += t
            mult -= t
            if filled == size:
                out.append([tuple(sorted(acc.items())), 1])
                acc, filled = {}, 0
        if mult >= size:
            q, mult = divmod(mult, size)
            out.append([tuple((p, k * size) for p, k in recipe), q])
        if mult:
            _merge(acc, recipe, mult)
            filled = mult
    if filled:
        raise AssertionError("bundle size does not divide the run total")
    return out


@dataclass
class _SplitTrace:
    stay: dict[int, int]  # original period -> count kept in this variable
    stay_virtual: dict[int, int]  # combined counts kept (what the splitter returns)
    moved: dict[int, int]  # next variable's period -> number of virtual jobs sent
    sources: dict[int, dict[int, int]]  # next variable's period -> original period -> count


def _split_tracked(periods: Sequence[int], wg: Mapping[int, int], g: Mapping[int, int]) -> _SplitTrace:
    n = len(periods)
    pools: dict[int, list[list]] = {p: [] for p in periods}
    for p, k in wg.items():
        _level_index(periods, p)
        if k:
            pools[p].append([((p, 1),), k])
    g = {p: k for p, k in g.items() if k}
    moved: dict[int, int] = {}
    sources: dict[int, dict[int, int]] = {}

    def pool_size(p: int) -> int:
        return sum(m for _, m in pools.get(p, ()))

    def convert(m: int) -> None:
        for p in sorted(g):
            have = pool_size(p * m) // m if p * m in pools else 0
            k = min(g[p], have)
            if not k:
                continue
            taken = _take(pools[p * m], k * m)
            acc = sources.setdefault(p, {})
            for recipe, t in taken:
                _merge(acc, recipe, t)
            moved[p] = moved.get(p, 0) + k
            g[p] -= k
            if not g[p]:
                del g[p]

    def combine(level: int) -> None:
        for i in range(n - 1, level, -1):
            factor = periods[i] // periods[i - 1]
            reps = pool_size(periods[i])
            remove = reps // factor * factor
            if remove:
                pools[periods[i - 1]].extend(_chunk(_take(pools[periods[i]], remove), factor))

    big_m = periods[0] // (2 * n)
    convert(1)
    convert(big_m)
    combine(1)
    convert(big_m)
    if g:
        raise SplitFailed(f"jobs left over after splitting: {g}")
    stay: dict[int, int] = {}
    stay_virtual: dict[int, int] = {}
    for p, runs in pools.items():
        for recipe, mult in runs:
            _merge(stay, recipe, mult)
            stay_virtual[p] = stay_virtual.get(p, 0) + mult
    return _SplitTrace(stay, stay_virtual, moved, sources)


def split_jobs(
    periods_i: Sequence[int], wg_i: Mapping[int, int], g_i: Mapping[int, int]
) -> tuple[dict[int, int], dict[int, int]]:
    """(kept in this variable after combining, moved to the next variable in its periods)."""
    trace = _split_tracked(periods_i, wg_i, g_i)
    return trace.stay_virtual, trace.moved


# ---------------------------------------------------------------------------
# filling holes of a periodic exact schedule


def _block_size(blk: Block, base: int) -> int:
    return blk.count * (base // blk.modulus)


class _Holes:
    """Disjoint blocks of free residues modulo ``base``, indexed class by class."""

    def __init__(self, blocks: Sequence[Block], base: int):
        self.base = base
        self.blocks = [b for b in blocks if b.count]
        for b in self.blocks:
            if base % b.modulus:
                raise InvalidInstance(f"hole block modulus {b.modulus} does not divide {base}")
        self.starts = []
        total = 0
        for b in self.blocks:
            self.starts.append(total)
            total += _block_size(b, base)
        self.size = total

    def residue(self, idx: int) -> int:
        k = bisect_right(self.starts, idx) - 1
        b = self.blocks[k]
        lift = self.base // b.modulus
        q, l = divmod(idx - self.starts[k], lift)
        return (b.start + q * b.step) % b.modulus + b.modulus * l

    def range_blocks(self, lo: int, hi: int) -> list[Block]:
        """Blocks covering exactly the hole residues with index in [lo, hi)."""
        out = []
        k = max(0, bisect_right(self.starts, lo) - 1)
        while lo < hi and k < len(self.blocks):
            b = self.blocks[k]
            s0 = self.starts[k]
            lift = self.base // b.modulus
            a, e = lo - s0, min(hi, s0 + _block_size(b, self.base)) - s0
            if a < e:
                out += _range_in_block(b, lift, self.base, a, e)
                lo = s0 + e
            k += 1
        if lo < hi:
            raise AssertionError("hole range runs past the last hole")
        return out


def _range_in_block(b: Block, lift: int, base: int, a: int, e: int) -> list[Block]:
    def cls(q: int) -> int:
        return (b.start + q * b.step) % b.modulus

    k0, l0 = divmod(a, lift)
    k1, l1 = divmod(e, lift)
    if k0 == k1:
        return [Block(cls(k0) + b.modulus * l0, b.modulus, l1 - l0, base)]
    out = []
    if l0:
        out.append(Block(cls(k0) + b.modulus * l0, b.modulus, lift - l0, base))
        k0 += 1
    if k1 > k0:
        out.append(Block(cls(k0), b.step, k1 - k0, b.modulus))
    if l1:
        out.append(Block(cls(k1), b.modulus, l1, base))
    return out


def fill_holes(
    holes: Sequence[Block], base: int, items: Sequence[tuple[Hashable, int, int]]
) -> dict[Hashable, list[Block]]:
    """Give each (owner, period, count) item its own residue classes inside the holes.

    Periods must be multiples of ``base`` and pairwise divisible.  Hole
    number k (counting across periods of length ``base``) plays the role of
    time k in a fresh schedule, where the items form a divisible chain of
    density at most 1; such a chain is packed by laying out, shortest period
    first, consecutive intervals in digit-reversed residue order.
    """
    hz = _Holes(holes, base)
    h0 = hz.size
    items = sorted((it for it in items if it[2]), key=lambda it: it[1])
    out: dict[Hashable, list[Block]] = {}
    if not items:
        return out
    if h0 == 0:
        raise DensityExceeded("no holes to fill")
    q = [1, h0]
    level_of: dict[int, int] = {}
    prev = base
    for _, p, _ in items:
        if p % prev:
            raise NotDivisibleChain(f"period {p} is not a multiple of {prev}")
        prev = p
        if p not in level_of:
            if h0 * p // base != q[-1]:
                q.append(h0 * p // base)
            level_of[p] = len(q) - 1
    used = sum((Fraction(c, p) for _, p, c in items), Fraction(0))
    if used > Fraction(h0, base):
        raise DensityExceeded(f"items need density {used}, holes offer {Fraction(h0, base)}")
    factors = [1] + [q[j] // q[j - 1] for j in range(1, len(q))]
    cursor = Fraction(0)
    for owner, p, c in items:
        lvl = level_of[p]
        lo = cursor * q[lvl]
        assert lo.denominator == 1
        lo = int(lo)
        blocks = out.setdefault(owner, [])
        for j, u0, cnt in _decompose(lo, lo + c, lvl, q):
            prefix, a = divmod(u0, factors[j])
            x = 0
            for l in range(j - 1, 0, -1):
                prefix, e = divmod(prefix, factors[l])
                x += e * q[l - 1]
            if j == 1:
                blocks += hz.range_blocks(a, a + cnt)
            else:
                e1 = x % h0
                u = (x - e1 + a * q[j - 1]) // h0
                blocks.append(
                    Block(hz.residue(e1) + base * u, base * q[j - 1] // h0, cnt, base * q[j] // h0)
                )
        cursor += Fraction(c, q[lvl])
    return out


def _decompose(lo: int, hi: int, lvl: int, q: Sequence[int]) -> list[tuple[int, int, int]]:
    """Split [lo, hi) at level lvl into aligned runs (level j, first unit, unit count)."""
    width = [q[lvl] // q[j] for j in range(lvl + 1)]
    pieces = []
    while lo < hi:
        j = next(j for j in range(1, lvl + 1) if lo % width[j] == 0 and lo + width[j] <= hi)
        parent_end = (lo // width[j - 1] + 1) * width[j - 1]
        cnt = (min(hi, parent_end) - lo) // width[j]
        pieces.append((j, lo // width[j], cnt))
        lo += cnt * width[j]
    return pieces


def _explicit_holes(periods: Sequence[int], offsets: Sequence[Sequence[int]], base: int) -> list[Block]:
    taken = bytearray(base)
    for p, offs in zip(periods, offsets):
        for o in offs:
            for t in range(o % p, base, p):
                if taken[t]:
                    raise InvalidInstance("existing offsets collide")
                taken[t] = 1
    holes = []
    t = 0
    while t < base:
        if taken[t]:
            t += 1
            continue
        s = t
        while t < base and not taken[t]:
            t += 1
        holes.append(Block(s, 1, t - s, base))
    return holes


def eps_fill(
    a: PinwheelInstance,
    a_offsets: EpsOffsetAssignment,
    b: PinwheelInstance,
    *,
    limit: int = 10**6,
) -> EpsOffsetAssignment:
    """Extend an exact schedule of A (given by offsets) with a divisible chain B placed in its holes.

    Every period of B must be a multiple of L = LCM(A) and the periods of B
    must divide one another.  The result carries ``meta["fillers"]``: how
    many period-LCM(hB) padding jobs would top the rescaled chain up to
    density 1 (they occupy the unused tail and are dropped).
    """
    if set(a.ids) & set(b.ids):
        raise InvalidInstance("A and B share job ids")
    if not (a.is_integral() and b.is_integral()):
        raise InvalidInstance("eps_fill needs integer periods")
    base = 1
    for p in a.periods:
        base = lcm(base, int(p))
    if base > limit:
        raise InvalidInstance(f"LCM(A) = {base} exceeds the explicit limit {limit}")
    if a.density() + b.density() > 1:
        raise DensityExceeded(f"D(A) + D(B) = {a.density() + b.density()} exceeds 1")
    offs_a = []
    for ident, job in zip(a.ids, a.jobs):
        entry = a_offsets[ident]
        entry = [entry] if isinstance(entry, int) else list(entry)
        if len(entry) != job.multiplicity or not all(isinstance(o, int) for o in entry):
            raise InvalidInstance(f"job {ident} needs one integer offset per copy")
        offs_a.append(entry)
    holes = _explicit_holes([int(p) for p in a.periods], offs_a, base)
    h0 = sum(blk.count for blk in holes)
    items = []
    for ident, job in zip(b.ids, b.jobs):
        if int(job.period) % base:
            raise NotDivisibleChain(f"period {job.period} is not a multiple of LCM(A) = {base}")
        items.append((ident, int(job.period), job.multiplicity))
    ps = sorted({p for _, p, _ in items})
    for x, y in zip(ps, ps[1:]):
        if y % x:
            raise NotDivisibleChain(f"{x} does not divide {y}")
    placed = fill_holes(holes, base, items)
    result = dict(a_offsets.items())
    result.update(placed)
    out = EpsOffsetAssignment(result)
    # rescaled chain hB: periods p*h0/base, padded with LCM(hB) * (1 - D(hB)) fillers
    scaled = [p * h0 // base for p in ps]
    top = max(scaled, default=1)
    d_scaled = sum((Fraction(c, p * h0 // base) for _, p, c in items), Fraction(0)) if h0 else Fraction(0)
    out.meta["fillers"] = int(top * (1 - d_scaled)) if items else 0
    return out


# ---------------------------------------------------------------------------
# the completeness witness


def literal_residue(lit: int) -> int:
    """Residue modulo 2n reserved for a literal: x_i -> 2(i-1), not x_i -> 2(i-1)+1."""
    return 2 * (abs(lit) - 1) + (lit < 0)


def _index_jobs(inst: PinwheelInstance) -> dict[tuple, int]:
    return {job.tag: ident for ident, job in zip(inst.ids, inst.jobs)}


def build_eps_witness(
    formula: CnfFormula, assignment: Sequence[bool], instance: PinwheelInstance | None = None
) -> EpsOffsetAssignment:
    """Residue-block offsets for every job of red_ps(formula) from a satisfying assignment.

    Residue 2(i-1) mod 2n hosts x_i and 2(i-1)+1 hosts its negation.  Each
    literal gets its rep2 jobs on the non-multiples of its prime; f_i sits
    with the false literal; every clause sits with its first true literal.
    The greedy and warm greedy jobs then fill the remaining holes of each
    variable, after the flow decides how much of each warm group moves on to
    the next variable.
    """
    _check_34sat(formula)
    n = formula.num_vars
    assignment = tuple(bool(x) for x in assignment)
    if len(assignment) != n:
        raise WitnessFailed(f"assignment has {len(assignment)} values for {n} variables", "assignment")
    if not formula.satisfied_by(assignment):
        raise WitnessFailed("assignment does not satisfy the formula", "assignment")
    inst = red_ps(formula) if instance is None else instance
    ids = _index_jobs(inst)
    reps = _reps(formula)
    cs = clause_sum(formula)
    offsets: dict[int, Any] = {}

    routed: dict[int, list[int]] = {}
    for j, c in enumerate(formula.clauses, 1):
        lit = next(l for l in c if assignment[abs(l) - 1] == (l > 0))
        routed.setdefault(lit, []).append(j)

    holes: dict[int, list[Block]] = {}
    room: list[Fraction] = []
    for i in range(1, n + 1):
        true_lit = i if assignment[i - 1] else -i
        false_lit = -true_lit
        rt, rf = reps.rep1[true_lit], reps.rep1[false_lit]
        for lit in (i, -i):
            r, res = reps.rep1[lit], literal_residue(lit)
            offsets[ids[("rep2", lit)]] = [Block(res + 2 * n, 2 * n, r - 1, 2 * n * r)]
        res_f, res_t = literal_residue(false_lit), literal_residue(true_lit)
        offsets[ids[("f", i)]] = res_f
        hz = [Block(res_f + 2 * n * rf, 2 * n * rf, rt - 1, 2 * n * rf * rt)]
        mine = routed.get(true_lit, [])
        if len(mine) >= rt:
            raise WitnessFailed(f"{len(mine)} clauses routed to a literal with prime {rt}", "routing")
        if len(mine) < rt:
            hz.append(Block(res_t + 2 * n * rt * len(mine), 2 * n * rt, rt - len(mine), 2 * n * rt * rt))
        used = Fraction(0)
        for k, j in enumerate(mine):
            period = reps.clause_rep2[j - 1]
            offsets[ids[("clause", j)]] = res_t + 2 * n * k * rt
            used += Fraction(1, period)
            inner = period // (2 * n * rt * rt)
            if inner > 1:
                hz.append(Block(res_t + 2 * n * (k * rt + rt * rt), 2 * n * rt * rt, inner - 1, period))
        holes[i] = hz
        room.append(cs - used)

    flow = flow_construct(room, cs)
    moved_in: dict[int, _SplitTrace] = {}
    kept: dict[int, _SplitTrace] = {}
    for ind in range(1, n):
        wg = warm_greedy_counts(ind, cs, formula)
        g = greedy_counts(ind + 1, flow.d5[ind - 1], formula) if flow.d5[ind - 1] else {}
        try:
            trace = _split_tracked(allowed_periods(ind, formula), wg, g)
        except SplitFailed as exc:
            raise WitnessFailed(str(exc), "split") from exc
        kept[ind] = trace
        moved_in[ind + 1] = trace

    blocks: dict[int, list[Block]] = {}
    for i in range(1, n + 1):
        periods = allowed_periods(i, formula)
        base = periods[0]
        own = eps_density_of_variable(i, formula) - cs + (cs - room[i - 1])
        free = Fraction(1, n) - own
        h0 = sum(_block_size(blk, base) for blk in holes[i])
        if Fraction(h0, base) != free:
            raise WitnessFailed(f"variable {i}: holes give {Fraction(h0, base)}, expected {free}", "holes")
        items: list[tuple[Hashable, int, int]] = []
        d_greedy = Fraction(1, n) - eps_density_of_variable(i, formula)
        for p, k in greedy_counts(i, d_greedy, formula).items():
            items.append((ids[("greedy", i, periods.index(p))], p, k))
        if i in kept:
            for p, k in kept[i].stay.items():
                items.append((ids[("warm", i, periods.index(p))], p, k))
        if i in moved_in:
            for p, k in moved_in[i].moved.items():
                items.append((("relay", p), p, k))
        total = sum((Fraction(k, p) for _, p, k in items), Fraction(0))
        if total != free:
            raise WitnessFailed(f"variable {i}: jobs need {total}, holes offer {free}", "accounting")
        try:
            placed = fill_holes(holes[i], base, items)
        except (DensityExceeded, NotDivisibleChain) as exc:
            raise WitnessFailed(f"variable {i}: {exc}", "fill") from exc
        for owner, blks in placed.items():
            if isinstance(owner, tuple):
                p = owner[1]
                prev = allowed_periods(i - 1, formula)
                sub = [
                    (ids[("warm", i - 1, prev.index(q))], q, k)
                    for q, k in moved_in[i].sources[p].items()
                ]
                try:
                    nested = fill_holes(blks, p, sub)
                except (DensityExceeded, NotDivisibleChain) as exc:
                    raise WitnessFailed(f"variable {i}: relayed jobs of period {p}: {exc}", "relay") from exc
                for ident, bl in nested.items():
                    blocks.setdefault(ident, []).extend(bl)
            else:
                blocks.setdefault(owner, []).extend(blks)
    offsets.update(blocks)
    return EpsOffsetAssignment(offsets)


# ---------------------------------------------------------------------------
# 3-SAT to 3,4-SAT


def tovey_transform(formula: CnfFormula) -> CnfFormula:
    """Equisatisfiable formula in which every variable occurs in at most four clauses.

    Duplicate literals are merged and tautological clauses dropped.  A
    variable occurring k > 4 times gets k fresh copies, one per occurrence,
    tied together by the implication cycle y_1 -> y_k -> ... -> y_2 -> y_1
    written as clauses (y_j or not y_{j+1}).
    """
    clauses = []
    for c in formula.clauses:
        lits = tuple(dict.fromkeys(c))
        if any(-l in lits for l in lits):
            continue
        if not lits or len(lits) > 3:
            raise InvalidFormula(f"clause {c} is not a 3-SAT clause")
        clauses.append(lits)
    occ: dict[int, list[tuple[int, int]]] = {}
    for j, c in enumerate(clauses):
        for pos, lit in enumerate(c):
            occ.setdefault(abs(lit), []).append((j, pos))
    out = [list(c) for c in clauses]
    extra = []
    next_var = 0
    for v in range(1, formula.num_vars + 1):
        places = occ.get(v, [])
        if len(places) <= 4:
            next_var += 1
            for j, pos in places:
                out[j][pos] = next_var if out[j][pos] > 0 else -next_var
            continue
        fresh = list(range(next_var + 1, next_var + len(places) + 1))
        next_var += len(places)
        for (j, pos), y in zip(places, fresh):
            out[j][pos] = y if out[j][pos] > 0 else -y
        for k, y in enumerate(fresh):
            extra.append((y, -fresh[(k + 1) % len(fresh)]))
    result = CnfFormula(next_var, [tuple(c) for c in out] + extra)
    assert is_34sat(result)
    return result
