"""BDDA*: symbolic A* over (g, h) buckets with a partitioned heuristic."""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

from .dd import INF, Store
from .search import BWD, ClosedList, Frontier, SearchResult, Stats, make_stats, state_cube, trace_back, FWD
from .symbolic import SymbolicTask
from .task import Axiom, Literal, Operator, Plan, Task, TaskError, Variable


@dataclass
class HeuristicBuckets:
    """Disjoint state sets with their heuristic value, ascending; INF last."""

    buckets: list[tuple[float, int]]

    def value_of(self, store: Store, state: int):
        for h, node in self.buckets:
            if store.conj(node, state) != store.false:
                return h
        return None


def blind_heuristic(st: SymbolicTask) -> HeuristicBuckets:
    return HeuristicBuckets([(0, st.valid)])


def perfect_heuristic(st: SymbolicTask) -> HeuristicBuckets:
    """Exact goal distances from an exhaustive backward sweep."""
    if not st.supports_backward:
        raise TaskError("the perfect heuristic needs translated axioms")
    s = st.store
    fr = Frontier(st, BWD, Stats(), bound=INF)
    while True:
        item = fr.pop()
        if item is None:
            break
        g, states = item
        fr.close(g, states)
        fr.successors(g, states)
    by_h: dict[int, int] = {}
    for e in fr.closed.entries:
        by_h[e.g] = s.disj(by_h.get(e.g, s.false), e.states)
    buckets = sorted(by_h.items())
    dead = s.diff(st.valid, fr.closed.union)
    if dead != s.false:
        buckets.append((INF, dead))
    return HeuristicBuckets(buckets)


def fraction_heuristic(st: SymbolicTask, hstar: HeuristicBuckets, frac) -> tuple[int, HeuristicBuckets]:
    """c * h* as integers: returns (cost scale q, buckets holding p * h*) for c = p/q."""
    frac = Fraction(frac)
    if not 0 <= frac <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    p, q = frac.numerator, frac.denominator
    if p == 0:
        return q, blind_heuristic(st)
    return q, HeuristicBuckets([(h if h == INF else p * h, node) for h, node in hstar.buckets])


def bdda_star(st: SymbolicTask, heuristic: HeuristicBuckets | None = None,
              cost_scale: int = 1) -> SearchResult:
    """Expand buckets by ascending f = g + h, ties by ascending g.

    `cost_scale` multiplies every operator cost (used for fractional
    heuristics); the reported plan cost is in the original units.
    """
    t0 = time.perf_counter()
    s = st.store
    hb = heuristic if heuristic is not None else blind_heuristic(st)
    stats = Stats()
    open_: dict[tuple[int, int], int] = {}

    def insert(g, states):
        for h, node in hb.buckets:
            if h == INF:
                continue
            part = s.conj(states, node)
            if part != s.false:
                key = (g, h)
                open_[key] = s.disj(open_.get(key, s.false), part)

    insert(0, st.init)
    closed = ClosedList(s)
    bound = st.bound * cost_scale
    plan = None
    while open_:
        key = min(open_, key=lambda k: (k[0] + k[1], k[0]))
        g, h = key
        states = s.diff(open_.pop(key), closed.union)
        if states == s.false:
            continue
        if g > bound:
            continue
        stats.record(s, states, key)
        entry = closed.add(g // cost_scale, states)
        hit = s.conj(states, st.goal)
        if hit != s.false:
            cube = state_cube(st, hit)
            plan = Plan(tuple(trace_back(st, closed, cube, entry, FWD, st.init)), g // cost_scale)
            break
        for tr in st.trs:
            c = tr.cost * cost_scale
            if g + c > bound:
                continue
            succ = st.image(states, tr.node)
            if succ != s.false:
                insert(g + c, succ)
    extra = {"schedule": stats.schedule, "expansion_size_f_ordered": stats.expansion_size}
    return SearchResult(plan, make_stats("bdda*", st, stats, plan, t0, **extra))


def parse_heuristic(spec: str):
    """'blind', 'perfect' or 'fraction:P/Q'."""
    if spec in ("blind", "perfect"):
        return spec, None
    if spec.startswith("fraction:"):
        try:
            frac = Fraction(spec.split(":", 1)[1])
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad fraction in {spec!r}") from None
        if not 0 <= frac <= 1:
            raise ValueError("fraction must lie in [0, 1]")
        return "fraction", frac
    raise ValueError(f"unknown heuristic {spec!r}")


def run_astar(st: SymbolicTask, spec: str) -> SearchResult:
    kind, frac = parse_heuristic(spec)
    if kind == "blind":
        return bdda_star(st)
    hstar = perfect_heuristic(st)
    if kind == "perfect":
        return bdda_star(st, hstar)
    q, hb = fraction_heuristic(st, hstar, frac)
    return bdda_star(st, hb, cost_scale=q)


# ----------------------------------------------------------------------
# a family where the perfect heuristic splits states into large diagrams


def witness(store: Store, first: list[str], second: list[str]) -> int:
    """OR over i of (first[i] AND second[i])."""
    r = store.false
    for a, b in zip(first, second):
        r = store.disj(r, store.conj(store.literal(a), store.literal(b)))
    return r


def blowup_family(n: int, ticks: int | None = None) -> Task:
    """Phase counter p plus 2n flags set in order, followed by idle ticks.

    Phase j-1 -> j either sets flag v_j or skips it.  After all flags come
    `ticks` unit steps; the goal needs the last phase and some pair
    (v_i, v_{n+i}) both set.  With flags ordered v_1..v_2n the goal
    condition has an exponential diagram, which the perfect heuristic copies
    into every tick bucket while blind search never builds it.
    """
    ticks = 2 * n if ticks is None else ticks
    last = 2 * n + ticks
    variables = [Variable("p", last + 1)]
    variables += [Variable(f"v{i}", 2) for i in range(1, 2 * n + 1)]
    variables.append(Variable("pair", 2, 0))
    ops = []
    for j in range(1, 2 * n + 1):
        ops.append(Operator(f"set-v{j}", (("p", j - 1),), (("v%d" % j, 1), ("p", j))))
        ops.append(Operator(f"skip-{j}", (("p", j - 1),), (("p", j),)))
    for t in range(2 * n, last):
        ops.append(Operator(f"tick-{t + 1}", (("p", t),), (("p", t + 1),)))
    axioms = [Axiom("pair", (Literal(f"v{i}"), Literal(f"v{n + i}"))) for i in range(1, n + 1)]
    init = {v.name: 0 for v in variables if not v.derived}
    return Task(variables, init, {"p": last, "pair": 1}, ops, axioms, metric="unit")
