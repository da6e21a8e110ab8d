"""Oversubscription planning: maximise utility within a cost bound."""
from __future__ import annotations

import time

from .search import FWD, Frontier, SearchResult, Stats, make_stats, state_cube, trace_back
from .symbolic import SymbolicTask
from .task import Plan, TaskError

BDD_REPR = "bdd"
ADD_REPR = "add"


class UtilityFunction:
    """State utility as a value-partitioned BDD list or as one ADD."""

    def __init__(self, st: SymbolicTask, repr: str = BDD_REPR):
        if repr not in (BDD_REPR, ADD_REPR):
            raise ValueError(f"unknown utility representation {repr!r}")
        self.st = st
        self.repr = repr
        s = st.store
        self.add = st.utility_add()
        parts = s.partition(self.add, st.valid)
        for u, _ in parts:
            if u < 0:
                raise TaskError(f"negative utility {u}")
        # descending, so the first non-empty intersection is the best one
        self.parts = list(reversed(parts))
        self.max = self.parts[0][0] if self.parts else 0

    def best(self, states: int) -> tuple[int, int] | None:
        """(highest utility in the set, the states reaching it)."""
        s = self.st.store
        if states == s.false:
            return None
        if self.repr == BDD_REPR:
            for u, node in self.parts:
                hit = s.conj(states, node)
                if hit != s.false:
                    return u, hit
            return None
        u = s.max_value(self.add, states)
        if u is None:
            return None
        return u, s.conj(states, s.equals_value(self.add, u))


def osp_search(st: SymbolicTask, utility_repr: str = BDD_REPR) -> SearchResult:
    """Forward search within the bound; the best goal state of the cheapest
    bucket reaching the highest utility is turned into a plan."""
    t0 = time.perf_counter()
    s = st.store
    util = UtilityFunction(st, utility_repr)
    stats = Stats()
    fr = Frontier(st, FWD, stats)
    best = None
    while True:
        item = fr.pop()
        if item is None:
            break
        g, states = item
        entry = fr.close(g, states)
        found = util.best(s.conj(states, st.goal))
        if found is not None and (best is None or found[0] > best[0]):
            best = (found[0], found[1], entry)
            if found[0] >= util.max:
                break
        fr.successors(g, states)
    plan = None
    if best is not None:
        u, hit, entry = best
        cube = state_cube(st, hit)
        ops = trace_back(st, fr.closed, cube, entry, FWD, st.init)
        plan = Plan(tuple(ops), entry.g, u)
    return SearchResult(plan, make_stats(f"osp-{utility_repr}", st, stats, plan, t0,
                                         max_utility=util.max))


def bounded_utility_check(st: SymbolicTask, u: int) -> bool:
    """Is there a plan within the bound reaching utility at least u?"""
    res = osp_search(st)
    return res.plan is not None and res.plan.utility >= u
