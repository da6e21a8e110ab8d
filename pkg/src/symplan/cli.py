"""Command-line interface.

Exit codes: 0 success, 1 no plan, 2 usage or validation error,
3 oracle mismatch, 4 decision-diagram node limit exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .astar import parse_heuristic, run_astar
from .axioms import MODES, TRANSLATE
from .dd import NODE_LIMIT_ENV, NodeLimitExceeded
from .encoding import FILE_ORDER, INTERLEAVED
from .fixtures import BUILDERS, fixture_names, load_fixture
from .oracle import PROFILES, OracleLimit, oracle_optimal, oracle_osp, oracle_topk, oracle_topk_osp, random_task
from .osp import osp_search
from .search import BID, BWD, FWD, ev_search, search
from .symbolic import SymbolicTask
from .task import INF, Task, TaskError, format_plan, load_task, serialize_task, validate_plan
from .topk import topk_osp, topk_search

OK, NO_PLAN, USAGE, MISMATCH, NODE_LIMIT = 0, 1, 2, 3, 4
FIXTURE_PREFIX = "fixture:"

log = logging.getLogger("symplan")


class Mismatch(Exception):
    pass


def read_task(spec: str) -> Task:
    """A task file path, or fixture:NAME for a bundled or generated task."""
    if spec.startswith(FIXTURE_PREFIX):
        name = spec[len(FIXTURE_PREFIX):]
        if name in BUILDERS:
            return BUILDERS[name]()
        if name in fixture_names():
            return load_fixture(name)
        known = ", ".join(sorted(set(fixture_names()) | set(BUILDERS)))
        raise TaskError(f"unknown fixture {name!r} (known: {known})")
    return load_task(spec)


def node_limit() -> int | None:
    raw = os.environ.get(NODE_LIMIT_ENV)
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise TaskError(f"{NODE_LIMIT_ENV} must be an integer, got {raw!r}") from None
    if value <= 0:
        raise TaskError(f"{NODE_LIMIT_ENV} must be positive")
    return value


def parse_k(text: str):
    if text.lower() in ("inf", "all"):
        return INF
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be a positive integer or 'inf', got {text!r}") from None
    if k < 1:
        raise argparse.ArgumentTypeError("k must be at least 1")
    return k


def symbolic(args, task: Task) -> SymbolicTask:
    return SymbolicTask(task, axioms=args.axioms, order=args.order, node_limit=node_limit())


def write_plan(path: Path, plan) -> None:
    path.write_text(format_plan(plan))


def write_stats(args, stats: dict) -> None:
    if not args.stats:
        return
    text = json.dumps(stats, indent=2, sort_keys=True) + "\n"
    if args.stats == "-":
        sys.stdout.write(text)
    else:
        Path(args.stats).write_text(text)


def check_plan(task: Task, plan) -> None:
    if plan is not None and not validate_plan(task, plan):
        raise Mismatch(f"emitted plan does not validate: {plan.ops}")


def compare(what: str, got, want) -> None:
    if got != want:
        raise Mismatch(f"{what}: symbolic {got} vs oracle {want}")
    log.info("oracle agrees on %s: %s", what, got)


# ----------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    task = read_task(args.task)
    st = symbolic(args, task)
    if args.cost_repr == "ev":
        if args.direction != FWD:
            raise TaskError("edge-valued search runs forward only; use --direction fwd")
        res = ev_search(st)
    else:
        res = search(st, args.direction)
    check_plan(task, res.plan)
    if args.oracle:
        want = oracle_optimal(task)
        compare("optimal cost", res.cost, None if want is None else want.cost)
    write_stats(args, res.stats)
    if res.plan is None:
        print("no plan")
        return NO_PLAN
    write_plan(Path(args.plan), res.plan)
    print(f"plan cost {res.plan.cost}, {len(res.plan.ops)} steps -> {args.plan}")
    return OK


def cmd_topk(args) -> int:
    task = read_task(args.task)
    st = symbolic(args, task)
    if args.rank_by_utility:
        if args.direction != FWD:
            raise TaskError("utility ranking runs forward only; use --direction fwd")
        res = topk_osp(st, args.k, args.utility_repr)
    else:
        res = topk_search(st, args.k, args.direction)
    for p in res.plans:
        check_plan(task, p)
    if args.oracle:
        if args.rank_by_utility:
            want = oracle_topk_osp(task, args.k)
            compare("ranking", [(p.utility, p.cost) for p in res.plans],
                    [(p.utility, p.cost) for p in want])
        else:
            want = oracle_topk(task, args.k)
            compare("plan costs", [p.cost for p in res.plans], [p.cost for p in want])
    write_stats(args, res.stats)
    if not res.plans:
        print("no plan")
        return NO_PLAN
    for i, p in enumerate(res.plans, 1):
        write_plan(Path(f"{args.plan}.{i}"), p)
    costs = ", ".join(str(p.cost) for p in res.plans)
    print(f"{len(res.plans)} plans (costs {costs}) -> {args.plan}.1 .. {args.plan}.{len(res.plans)}")
    return OK


def cmd_osp(args) -> int:
    task = read_task(args.task)
    if args.direction != FWD:
        raise TaskError("oversubscription search runs forward only")
    st = symbolic(args, task)
    res = osp_search(st, args.utility_repr)
    check_plan(task, res.plan)
    if args.oracle:
        want = oracle_osp(task)
        got = None if res.plan is None else (res.plan.utility, res.plan.cost)
        compare("(utility, cost)", got, None if want is None else (want.utility, want.cost))
    write_stats(args, res.stats)
    if res.plan is None:
        print("no plan")
        return NO_PLAN
    write_plan(Path(args.plan), res.plan)
    print(f"utility {res.plan.utility}, cost {res.plan.cost} -> {args.plan}")
    return OK


def cmd_astar(args) -> int:
    task = read_task(args.task)
    parse_heuristic(args.heuristic)
    st = symbolic(args, task)
    res = run_astar(st, args.heuristic)
    check_plan(task, res.plan)
    if args.oracle:
        want = oracle_optimal(task)
        compare("optimal cost", res.cost, None if want is None else want.cost)
    write_stats(args, res.stats)
    if res.plan is None:
        print("no plan")
        return NO_PLAN
    write_plan(Path(args.plan), res.plan)
    print(f"plan cost {res.plan.cost}, {len(res.plan.ops)} steps -> {args.plan}")
    return OK


def cmd_gen(args) -> int:
    text = serialize_task(random_task(args.seed, args.profile))
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return OK


def cmd_dump_dd(args) -> int:
    task = read_task(args.task)
    st = symbolic(args, task)
    s = st.store
    if args.what == "init":
        roots = {"init": st.init}
    elif args.what == "goal":
        roots = {"goal": st.goal}
    elif args.what == "tr":
        roots = {f"tr cost {tr.cost}": tr.node for tr in st.trs}
    elif args.what == "ev-tr":
        roots = {name: ev for name, ev in st.ev_trs()}
    else:
        if task.utility is None:
            raise TaskError("task has no utility")
        roots = {"utility": st.utility_add()}
    text = s.to_dot(roots)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return OK


# ----------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symplan", description="Symbolic cost-optimal planning.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, direction_default=BID, plan_default="sas_plan"):
        sp.add_argument("task", help="task file, or fixture:NAME for a bundled task")
        sp.add_argument("--direction", choices=(FWD, BWD, BID), default=direction_default,
                        help="search direction (default %(default)s)")
        sp.add_argument("--axioms", choices=MODES, default=TRANSLATE,
                        help="axiom encoding (default %(default)s)")
        sp.add_argument("--order", choices=(INTERLEAVED, FILE_ORDER), default=INTERLEAVED,
                        help="variable order: current/next bits interleaved or grouped")
        sp.add_argument("--oracle", action="store_true",
                        help="also run the explicit-state oracle and exit 3 on disagreement")
        sp.add_argument("--stats", metavar="PATH", help="write run statistics as JSON ('-' for stdout)")
        sp.add_argument("--plan", default=plan_default, metavar="PATH",
                        help="plan file (top-k appends .1, .2, ...)")
        sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("solve", help="optimal plan by symbolic uniform-cost search")
    common(sp)
    sp.add_argument("--cost-repr", choices=("bdd", "ev"), default="bdd",
                    help="cost handling: one relation per cost value, or edge-valued relations")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("topk", help="the k cheapest plans")
    common(sp)
    sp.add_argument("--k", type=parse_k, default=1, help="number of plans, or 'inf'")
    sp.add_argument("--rank-by-utility", action="store_true",
                    help="rank by utility (descending), then cost; needs a finite bound")
    sp.add_argument("--utility-repr", choices=("bdd", "add"), default="bdd")
    sp.set_defaults(func=cmd_topk)

    sp = sub.add_parser("osp", help="maximal utility within the cost bound")
    common(sp, direction_default=FWD)
    sp.add_argument("--utility-repr", choices=("bdd", "add"), default="bdd",
                    help="utility as value-partitioned BDDs or as one ADD")
    sp.set_defaults(func=cmd_osp)

    sp = sub.add_parser("astar", help="BDDA* with a blind, perfect or scaled perfect heuristic")
    common(sp, direction_default=FWD)
    sp.add_argument("--heuristic", default="blind",
                    help="blind, perfect or fraction:P/Q (scaled perfect heuristic)")
    sp.set_defaults(func=cmd_astar)

    sp = sub.add_parser("gen", help="write a random task")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--profile", choices=PROFILES, default="plain")
    sp.add_argument("-o", "--output", help="output file (default stdout)")
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("dump-dd", help="Graphviz dot of a task's decision diagrams")
    common(sp)
    sp.add_argument("--what", choices=("init", "goal", "tr", "ev-tr", "utility"), default="tr")
    sp.add_argument("-o", "--output", help="output file (default stdout)")
    sp.set_defaults(func=cmd_dump_dd)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "axioms", TRANSLATE) != TRANSLATE and args.direction != FWD:
        parser.error(f"--axioms {args.axioms} only supports --direction fwd")
    try:
        return args.func(args)
    except Mismatch as exc:
        print(f"oracle mismatch: {exc}", file=sys.stderr)
        return MISMATCH
    except NodeLimitExceeded as exc:
        print(f"node limit exceeded: {exc}", file=sys.stderr)
        return NODE_LIMIT
    except (TaskError, OracleLimit, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
