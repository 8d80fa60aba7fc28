"""CNF formulas: DIMACS I/O, an exhaustive oracle, a DPLL cross-check, and a 3,4-SAT generator."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import ParseError, PinwheelError

DEFAULT_VAR_LIMIT = 24


class InvalidFormula(PinwheelError):
    pass


class VarLimitExceeded(PinwheelError):
    pass


class Infeasible(PinwheelError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    """Variables are 1..num_vars; a literal is +v or -v."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]]):
        object.__setattr__(self, "num_vars", int(num_vars))
        object.__setattr__(self, "clauses", tuple(tuple(int(l) for l in c) for c in clauses))
        if self.num_vars < 0:
            raise InvalidFormula("negative variable count")
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise InvalidFormula(f"literal {lit} out of range 1..{self.num_vars}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> dict[int, int]:
        """Number of clauses each variable appears in."""
        occ = {v: 0 for v in range(1, self.num_vars + 1)}
        for c in self.clauses:
            for v in {abs(l) for l in c}:
                occ[v] += 1
        return occ

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


@dataclass(frozen=True)
class Sat:
    assignment: tuple[bool, ...]

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Unsat:
    def __bool__(self) -> bool:
        return False


def parse_dimacs(text: str) -> CnfFormula:
    num_vars = num_clauses = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("malformed problem line", lineno)
            if num_vars is not None:
                raise ParseError("second problem line", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("non-integer counts in problem line", lineno) from None
            continue
        if num_vars is None:
            raise ParseError("clause before problem line", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
            elif abs(lit) > num_vars:
                raise ParseError(f"literal {lit} exceeds declared {num_vars} variables", lineno)
            else:
                current.append(lit)
    if num_vars is None:
        raise ParseError("missing problem line")
    if current:
        raise ParseError("last clause is not terminated by 0")
    if len(clauses) != num_clauses:
        raise ParseError(f"header declares {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, clauses)


def to_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    lines += [" ".join(map(str, c)) + " 0" for c in formula.clauses]
    return "\n".join(lines) + "\n"


def brute_force_sat(formula: CnfFormula, *, limit: int = DEFAULT_VAR_LIMIT) -> Sat | Unsat:
    """Try every assignment, 2**20 at a time; bit v-1 of the counter is variable v."""
    n = formula.num_vars
    if n > limit:
        raise VarLimitExceeded(f"{n} variables exceeds the exhaustive limit {limit}")
    masks = []
    for c in formula.clauses:
        pos = neg = 0
        for l in c:
            if l > 0:
                pos |= 1 << (l - 1)
            else:
                neg |= 1 << (-l - 1)
        masks.append((pos, neg))
    total = 1 << n
    chunk = 1 << 20
    for lo in range(0, total, chunk):
        a = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        ok = np.ones(len(a), dtype=bool)
        for pos, neg in masks:
            ok &= ((a & pos) != 0) | ((~a & neg) != 0)
        hits = np.flatnonzero(ok)
        if len(hits):
            x = int(a[hits[0]])
            return Sat(tuple(bool(x >> v & 1) for v in range(n)))
    return Unsat()


def dpll_sat(formula: CnfFormula) -> Sat | Unsat:
    """Plain DPLL with unit propagation; an independent cross-check for the oracle."""

    def simplify(clauses: list[frozenset], lit: int) -> list[frozenset] | None:
        out = []
        for c in clauses:
            if lit in c:
                continue
            if -lit in c:
                c = c - {-lit}
                if not c:
                    return None
            out.append(c)
        return out

    def solve(clauses: list[frozenset], fixed: dict[int, bool]) -> dict[int, bool] | None:
        while True:
            unit = next((c for c in clauses if len(c) == 1), None)
            if unit is None:
                break
            (lit,) = unit
            fixed = {**fixed, abs(lit): lit > 0}
            clauses = simplify(clauses, lit)
            if clauses is None:
                return None
        if not clauses:
            return fixed
        lit = next(iter(clauses[0]))
        for choice in (lit, -lit):
            rest = simplify(clauses, choice)
            if rest is not None:
                found = solve(rest, {**fixed, abs(choice): choice > 0})
                if found is not None:
                    return found
        return None

    if any(len(c) == 0 for c in formula.clauses):
        return Unsat()
    found = solve([frozenset(c) for c in formula.clauses], {})
    if found is None:
        return Unsat()
    return Sat(tuple(found.get(v, False) for v in range(1, formula.num_vars + 1)))


def is_34sat(formula: CnfFormula) -> bool:
    """At most 3 distinct literals per clause, none complementary, each variable in at most 4 clauses."""
    for c in formula.clauses:
        if not c or len(c) > 3 or len(set(c)) != len(c):
            return False
        if any(-l in c for l in c):
            return False
    return all(k <= 4 for k in formula.occurrences().values())


def gen_random_34sat(n: int, m: int, seed: int) -> CnfFormula:
    """Random formula with m three-literal clauses over n variables, each variable in at most 4 clauses."""
    if m < 0 or n < 0:
        raise Infeasible("negative size")
    if 3 * m > 4 * n or (m > 0 and n < 3):
        raise Infeasible(f"{m} three-literal clauses do not fit {n} variables used at most 4 times")
    rng = random.Random(seed)
    for _ in range(1000):
        left = {v: 4 for v in range(1, n + 1)}
        clauses = []
        for _ in range(m):
            free = [v for v, k in left.items() if k > 0]
            if len(free) < 3:
                break
            # weight by remaining capacity so the budget is spent evenly
            chosen: list[int] = []
            while len(chosen) < 3:
                v = rng.choices(free, weights=[left[u] for u in free])[0]
                if v not in chosen:
                    chosen.append(v)
            for v in chosen:
                left[v] -= 1
            clauses.append(tuple(v if rng.random() < 0.5 else -v for v in chosen))
        if len(clauses) == m:
            return CnfFormula(n, clauses)
    raise Infeasible("generator failed to place all clauses")
