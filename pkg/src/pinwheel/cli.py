"""Command-line interface.

Output is line-oriented ``key: value`` text with rationals printed as p/q.
Exit status: 0 success or positive verdict, 1 negative verdict, 2 error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import exact, ptas, reductions, related, sat
from .fold import fold as fold_instance
from .core import (
    PinwheelError,
    PinwheelInstance,
    Schedule,
    ScheduleRepr,
    _directive_to_dict,
    format_instance,
    format_rational,
    format_schedule,
    parse_instance,
    parse_schedule,
    scale,
    validate_repr,
    validate_schedule,
)
from .exact import Block, EpsOffsetAssignment

EXIT_OK, EXIT_NO, EXIT_ERROR = 0, 1, 2


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(**fields: Any) -> None:
    for key, value in fields.items():
        if isinstance(value, Fraction):
            value = format_rational(value)
        print(f"{key}: {value}")


# ---------------------------------------------------------------------------
# offsets as JSON


def offsets_to_json(offs: EpsOffsetAssignment) -> str:
    data = {}
    for ident, entry in offs.items():
        if isinstance(entry, int):
            data[str(ident)] = entry
        else:
            data[str(ident)] = [
                {"start": b.start, "step": b.step, "count": b.count, "modulus": b.modulus}
                if isinstance(b, Block)
                else int(b)
                for b in entry
            ]
    return json.dumps(data, sort_keys=True)


def offsets_from_json(text: str) -> EpsOffsetAssignment:
    data = json.loads(text)
    out: dict[int, Any] = {}
    for key, entry in data.items():
        if isinstance(entry, int):
            out[int(key)] = entry
        else:
            out[int(key)] = [Block(**e) if isinstance(e, dict) else int(e) for e in entry]
    return EpsOffsetAssignment(out)


def parse_assignment(text: str, n: int) -> tuple[bool, ...]:
    """Signed literals (DIMACS 'v' lines allowed), e.g. ``1 -2 3 0``; unmentioned variables are false."""
    values = [False] * n
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("s"):
            continue
        if line.startswith("v"):
            line = line[1:]
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                continue
            if abs(lit) > n:
                raise PinwheelError(f"assignment mentions variable {abs(lit)} beyond {n}")
            values[abs(lit) - 1] = lit > 0
    return tuple(values)


def _tags_json(inst: PinwheelInstance) -> str:
    return json.dumps([[ident, list(job.tag)] for ident, job in zip(inst.ids, inst.jobs)])


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve_exact(args: argparse.Namespace) -> int:
    inst = parse_instance(_read(args.instance))
    res = exact.solve_exact(inst, budget=args.budget)
    if res:
        _emit(verdict="Schedulable")
        print(format_schedule(res.schedule), end="")
        return EXIT_OK
    _emit(verdict="Unschedulable")
    return EXIT_NO


def cmd_decide(args: argparse.Namespace) -> int:
    inst = parse_instance(_read(args.instance))
    dec = ptas.decide(inst, args.eps, construct=args.construct, budget=args.budget)
    _emit(verdict="Schedulable" if dec else "Unschedulable", reason=dec.reason)
    if dec.params is not None:
        p = dec.params
        _emit(eps=p.eps, n=p.n, ell=p.ell, u=p.u, iterations=p.iterations)
    if dec.h_max is not None:
        _emit(h_max=dec.h_max, d_not_big=dec.d_not_big)
    for key, value in dec.info.items():
        if key not in ("h_max",):
            _emit(**{key: value})
    if dec.repr is not None:
        print(f"repr: {dec.repr.to_json()}")
    return EXIT_OK if dec else EXIT_NO


def cmd_fold(args: argparse.Namespace) -> int:
    inst = parse_instance(_read(args.instance))
    res = fold_instance(inst, args.theta)
    print(f"# theta: {format_rational(res.theta)}")
    print(f"# density_before: {format_rational(inst.density())}")
    print(f"# density_after: {format_rational(res.folded.density())}")
    print(f"# ids: {' '.join(map(str, res.folded.ids))}")
    for d in res.directives:
        print(f"# directive: {json.dumps(_directive_to_dict(d), default=str)}")
    print(format_instance(res.folded), end="")
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    kind = args.kind
    if kind in ("eps", "concise", "ps"):
        if not args.cnf:
            raise PinwheelError(f"reduce {kind} needs --cnf")
        formula = sat.parse_dimacs(_read(args.cnf))
        fn = {"eps": reductions.red_eps, "concise": reductions.red_concise, "ps": reductions.red_ps}[kind]
        inst = fn(formula)
        print(f"# density: {format_rational(inst.density())}")
        print(format_instance(inst), end="")
        if args.tags:
            with open(args.tags, "w", encoding="utf-8") as fh:
                fh.write(_tags_json(inst))
        return EXIT_OK
    if not args.instance:
        raise PinwheelError(f"reduce {kind} needs --instance")
    inst = parse_instance(_read(args.instance))
    if kind == "bgt":
        bgt = related.red_bgt(inst)
        _emit(K=bgt.K, growth_rates=" ".join(map(str, bgt.growth_rates)))
    else:
        ri = related.red_rs(inst)
        _emit(L=ri.L, caps=" ".join(map(str, ri.caps)))
    return EXIT_OK


def cmd_witness(args: argparse.Namespace) -> int:
    formula = sat.parse_dimacs(_read(args.cnf))
    if args.assignment:
        assignment = parse_assignment(_read(args.assignment), formula.num_vars)
    else:
        found = sat.brute_force_sat(formula)
        if not found:
            _emit(verdict="Unsat")
            return EXIT_NO
        assignment = found.assignment
    inst = reductions.red_ps(formula)
    offs = reductions.build_eps_witness(formula, assignment, inst)
    verdict = exact.validate_offsets(inst, offs)
    _emit(validation="Valid" if verdict else f"Collision jobs={verdict.i},{verdict.j}")
    print(f"offsets: {offsets_to_json(offs)}")
    return EXIT_OK if verdict else EXIT_NO


def cmd_validate(args: argparse.Namespace) -> int:
    inst = parse_instance(_read(args.instance))
    if args.scale is not None:
        inst = scale(inst, args.scale)
    if args.repr:
        text = _read(args.repr)
        # accept the raw JSON or the full output of decide --construct
        for line in text.splitlines():
            if line.startswith("repr:"):
                text = line.split(":", 1)[1]
        verdict = validate_repr(inst, ScheduleRepr.from_json(text), window=args.window)
    else:
        # keep only the schedule lines so solve-exact output can be fed back in
        lines = [l for l in _read(args.schedule).splitlines() if l.split(":", 1)[0].strip() in ("period", "slots")]
        verdict = validate_schedule(inst, parse_schedule("\n".join(lines)))
    _emit(validation="Valid" if verdict else f"Violation job={verdict.job} start={verdict.start} length={verdict.length}")
    return EXIT_OK if verdict else EXIT_NO


def cmd_validate_offsets(args: argparse.Namespace) -> int:
    inst = parse_instance(_read(args.instance))
    text = _read(args.offsets)
    # accept the raw JSON or the full output of the witness subcommand
    for line in text.splitlines():
        if line.startswith("offsets:"):
            text = line.split(":", 1)[1]
    verdict = exact.validate_offsets(inst, offsets_from_json(text))
    _emit(validation="Valid" if verdict else f"Collision jobs={verdict.i},{verdict.j}")
    return EXIT_OK if verdict else EXIT_NO


def cmd_validate_density(args: argparse.Namespace) -> int:
    inst = parse_instance(_read(args.instance))
    _emit(density=inst.density())
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    demands = [int(x) for x in args.demands.split(",")]
    offsets = [int(x) for x in args.offsets.split(",")]
    res = related.constant_gap_check(demands, offsets)
    if res:
        _emit(verdict="ExactCover", moduli=" ".join(map(str, res.moduli)))
        return EXIT_OK
    _emit(verdict="Failure", reason=res.reason)
    return EXIT_NO


def cmd_gen(args: argparse.Namespace) -> int:
    print(sat.to_dimacs(sat.gen_random_34sat(args.n, args.m, args.seed)), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# batch verification


def _catalog(max_jobs: int = 3, max_period: int = 6):
    for m in range(1, max_jobs + 1):
        for periods in itertools.combinations_with_replacement(range(1, max_period + 1), m):
            yield PinwheelInstance.from_periods(periods)


def _suite_reductions(count: int, seed: int) -> tuple[bool, str]:
    rng = random.Random(seed)
    bad = 0
    witnesses = 0
    for k in range(count):
        n = rng.randint(3, 8)
        formula = sat.gen_random_34sat(n, rng.randint(1, 4 * n // 3), seed * 1000 + k)
        inst = reductions.red_ps(formula)
        if inst.density() != 1:
            bad += 1
            continue
        found = sat.brute_force_sat(formula)
        if found:
            witnesses += 1
            offs = reductions.build_eps_witness(formula, found.assignment, inst)
            bad += not exact.validate_offsets(inst, offs)
    return bad == 0, f"{count} formulas, {witnesses} witnesses, {bad} failures"


def _suite_ptas(eps: Fraction) -> tuple[bool, str]:
    bad = 0
    total = 0
    for inst in _catalog():
        total += 1
        dec = ptas.decide(inst, eps, construct=True)
        truth = exact.solve_exact(inst)
        if not dec and truth:
            bad += 1
    return bad == 0, f"{total} instances, {bad} contradictions"


def _suite_fold(count: int, seed: int) -> tuple[bool, str]:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        periods = [Fraction(rng.randint(2, 400), rng.randint(1, 4)) for _ in range(rng.randint(1, 8))]
        inst = PinwheelInstance.from_periods(p for p in periods if p >= 1)
        theta = rng.randint(2, 20)
        res = fold_instance(inst, theta)
        bad += not res.folded.density() - inst.density() < Fraction(1, theta)
    return bad == 0, f"{count} folds, {bad} failures"


SUITE: dict[str, Callable[[argparse.Namespace], tuple[bool, str]]] = {
    "reductions": lambda a: _suite_reductions(a.count, a.seed),
    "ptas": lambda a: _suite_ptas(Fraction(1, 4)),
    "fold": lambda a: _suite_fold(10 * a.count, a.seed),
}


def cmd_verify_suite(args: argparse.Namespace) -> int:
    names = args.only or list(SUITE)
    ok_all = True
    for name in names:
        ok, detail = SUITE[name](args)
        ok_all &= ok
        print(f"{name}: {'pass' if ok else 'FAIL'} ({detail})")
    return EXIT_OK if ok_all else EXIT_NO


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinwheel", description="Pinwheel scheduling toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-exact", help="decide schedulability exactly")
    p.add_argument("instance")
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("decide", help="approximate decision with optional construction")
    p.add_argument("instance")
    p.add_argument("--eps", type=Fraction, required=True)
    p.add_argument("--construct", action="store_true")
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("fold", help="fold long periods down to theta")
    p.add_argument("instance")
    p.add_argument("--theta", type=Fraction, required=True)
    p.set_defaults(func=cmd_fold)

    p = sub.add_parser("reduce", help="build a reduced instance")
    p.add_argument("kind", choices=["eps", "concise", "ps", "bgt", "rs"])
    p.add_argument("--cnf")
    p.add_argument("--instance")
    p.add_argument("--tags", help="write job tags as JSON to this file")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("witness", help="offsets for the dense reduction from a satisfying assignment")
    p.add_argument("--cnf", required=True)
    p.add_argument("--assignment")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("validate", help="check a schedule or layered representation against an instance")
    p.add_argument("--instance", required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--schedule")
    target.add_argument("--repr", help="JSON representation, e.g. from decide --construct")
    p.add_argument("--scale", type=Fraction, help="stretch every period by this factor first")
    p.add_argument("--window", type=int, help="window length when the full period is too long")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("validate-offsets", help="check exact offsets against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--offsets", required=True)
    p.set_defaults(func=cmd_validate_offsets)

    p = sub.add_parser("validate-density", help="print the exact density of an instance")
    p.add_argument("instance", nargs="?", default="-")
    p.set_defaults(func=cmd_validate_density)

    p = sub.add_parser("check", help="problem-specific checks")
    csub = p.add_subparsers(dest="what", required=True)
    q = csub.add_parser("constant-gap")
    q.add_argument("--demands", required=True)
    q.add_argument("--offsets", required=True)
    q.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate inputs")
    gsub = p.add_subparsers(dest="what", required=True)
    q = gsub.add_parser("sat")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify-suite", help="run the batch verification checks")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", action="append", choices=list(SUITE))
    p.set_defaults(func=cmd_verify_suite)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (PinwheelError, ValueError, OSError, KeyError, TypeError, ZeroDivisionError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
