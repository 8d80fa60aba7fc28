from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import HealthCheck, settings

from pinwheel.sat import CnfFormula, gen_random_34sat

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def catalog_periods(max_jobs: int = 3, max_period: int = 6):
    for m in range(1, max_jobs + 1):
        yield from itertools.combinations_with_replacement(range(1, max_period + 1), m)


def formula_corpus(count: int = 60, seed: int = 2024, max_n: int = 8) -> list[CnfFormula]:
    """Seeded 3,4-SAT formulas with 3 <= n <= max_n and 1 <= m <= 4n/3."""
    rng = random.Random(seed)
    out = []
    for k in range(count):
        n = rng.randint(3, max_n)
        m = rng.randint(1, 4 * n // 3)
        out.append(gen_random_34sat(n, m, seed * 10_000 + k))
    return out


@pytest.fixture(scope="session")
def corpus() -> list[CnfFormula]:
    return formula_corpus()


def record(criterion: int, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS[criterion] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
