"""Symbolic uniform-cost search: forward, backward, bidirectional, edge-valued."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .dd import INF
from .symbolic import SymbolicTask
from .task import Plan, TaskError

FWD, BWD, BID = "fwd", "bwd", "bid"


@dataclass
class ClosedEntry:
    g: int
    index: int
    states: int


class ClosedList:
    """Expanded sets in expansion order, indexed by g."""

    def __init__(self, store):
        self.store = store
        self.entries: list[ClosedEntry] = []
        self.by_g: dict[int, list[ClosedEntry]] = {}
        self.union = store.false

    def add(self, g: int, states: int) -> ClosedEntry:
        e = ClosedEntry(g, len(self.entries), states)
        self.entries.append(e)
        self.by_g.setdefault(g, []).append(e)
        self.union = self.store.disj(self.union, states)
        return e

    def find(self, states: int) -> ClosedEntry | None:
        f = self.store.false
        for e in self.entries:
            if self.store.conj(e.states, states) != f:
                return e
        return None


@dataclass
class Stats:
    expansions: int = 0
    expansion_size: int = 0
    schedule: list = field(default_factory=list)

    def record(self, store, states: int, key=None):
        self.expansions += 1
        self.expansion_size += store.node_count(states)
        if key is not None:
            self.schedule.append(key)


@dataclass
class SearchResult:
    plan: Plan | None
    stats: dict

    @property
    def cost(self):
        return None if self.plan is None else self.plan.cost

    @property
    def solved(self) -> bool:
        return self.plan is not None


def make_stats(mode: str, st: SymbolicTask, stats: Stats, plan: Plan | None, t0: float,
               **extra) -> dict:
    out = {
        "mode": mode,
        "plan_cost": None if plan is None else plan.cost,
        "plan_utility": None if plan is None else plan.utility,
        "expansions": stats.expansions,
        "expansion_size": stats.expansion_size,
        "image_time_ms": round(st.images.time * 1000, 3),
        "total_time_ms": round((time.perf_counter() - t0) * 1000, 3),
        "peak_live_nodes": len(st.store),
        "tr_sizes": st.tr_sizes(),
    }
    out.update(extra)
    return out


# ----------------------------------------------------------------------
# plan reconstruction


def state_cube(st: SymbolicTask, states: int) -> int:
    """A single state of the set, as a cube over all current-state bits."""
    s = st.store
    bits = s.pick(states)
    if bits is None:
        raise ValueError("empty set")
    r = s.true
    for lv in sorted(st.enc.unprimed, reverse=True):
        r = s.conj(r, s.literal(lv, bool(bits[lv])))
    return r


def _ordered_op_trs(st: SymbolicTask):
    # descending cost, operator order among equal costs
    return sorted(st.op_trs, key=lambda tr: -tr.cost)


def trace_back(st: SymbolicTask, closed: ClosedList, state: int, entry: ClosedEntry,
               direction: str, start: int) -> list[str]:
    """Walk from a state in `entry` back to `start` through the closed list.

    For forward lists the returned operators are in execution order ending at
    the state; for backward lists they run from the state to the goal.
    """
    s = st.store
    ops: list[str] = []
    trs = _ordered_op_trs(st)
    while not (entry.g == 0 and s.conj(state, start) != s.false):
        for tr in trs:
            if tr.cost > entry.g:
                continue
            if direction == FWD:
                cands = st.images.preimage(state, tr.node)
            else:
                cands = st.images.image(state, tr.node)
            if cands == s.false:
                continue
            target = entry.g - tr.cost
            hit = None
            for e in closed.by_g.get(target, ()):
                if tr.cost == 0 and e.index >= entry.index:
                    continue
                both = s.conj(cands, e.states)
                if both != s.false:
                    hit = (e, both)
                    break
            if hit is not None:
                entry, both = hit
                state = state_cube(st, both)
                ops.append(tr.ops[0])
                break
        else:
            raise RuntimeError("plan reconstruction failed")
    if direction == FWD:
        ops.reverse()
    return ops


# ----------------------------------------------------------------------
# one search direction


class Frontier:
    def __init__(self, st: SymbolicTask, direction: str, stats: Stats, bound=None):
        self.st = st
        self.s = st.store
        self.direction = direction
        self.stats = stats
        self.bound = st.bound if bound is None else bound
        self.start = st.init if direction == FWD else st.goal
        self.target = st.goal if direction == FWD else st.init
        self.open: dict[int, int] = {0: self.start}
        self.closed = ClosedList(self.s)
        self._peeked = None

    def peek(self):
        """(g, states) of the next set to expand, or None when exhausted."""
        if self._peeked is not None:
            return self._peeked
        s = self.s
        while self.open:
            g = min(self.open)
            if g > self.bound:
                self.open.clear()
                break
            states = s.diff(self.open[g], self.closed.union)
            if states == s.false:
                del self.open[g]
                continue
            self._peeked = (g, states)
            return self._peeked
        return None

    def next_g(self):
        p = self.peek()
        return INF if p is None else p[0]

    def pop(self) -> tuple[int, int] | None:
        p = self.peek()
        if p is not None:
            del self.open[p[0]]
            self._peeked = None
        return p

    def close(self, g: int, states: int) -> ClosedEntry:
        self.stats.record(self.s, states)
        return self.closed.add(g, states)

    def successors(self, g: int, states: int) -> list[tuple[int, int]]:
        s, st = self.s, self.st
        out = []
        for tr in st.trs:
            if g + tr.cost > self.bound:
                continue
            if self.direction == FWD:
                succ = st.image(states, tr.node)
            else:
                succ = st.preimage(states, tr.node)
            if succ == s.false:
                continue
            out.append((tr.cost, succ))
            key = g + tr.cost
            self.open[key] = s.disj(self.open.get(key, s.false), succ)
        self._peeked = None
        return out


def uniform_cost_search(st: SymbolicTask, direction: str = FWD) -> SearchResult:
    """Blind search in one direction with g-bucketed open and closed lists."""
    if direction == BID:
        return bidirectional_search(st)
    st.check_direction(direction)
    t0 = time.perf_counter()
    stats = Stats()
    fr = Frontier(st, direction, stats)
    s = st.store
    plan = None
    while True:
        item = fr.pop()
        if item is None:
            break
        g, states = item
        entry = fr.close(g, states)
        hit = s.conj(states, fr.target)
        if hit != s.false:
            cube = state_cube(st, hit)
            ops = trace_back(st, fr.closed, cube, entry, direction, fr.start)
            plan = Plan(tuple(ops), g)
            break
        fr.successors(g, states)
    return SearchResult(plan, make_stats(f"ucs-{direction}", st, stats, plan, t0))


def bidirectional_search(st: SymbolicTask) -> SearchResult:
    """Alternate the cheaper frontier and stop once no cheaper meeting is possible."""
    st.check_direction(BID)
    t0 = time.perf_counter()
    stats = Stats()
    s = st.store
    fw = Frontier(st, FWD, stats)
    bw = Frontier(st, BWD, stats)
    best = INF
    meet = None
    while True:
        gf, gb = fw.next_g(), bw.next_g()
        # an exhausted side has closed every state it can reach
        if gf == INF or gb == INF or best <= gf + gb:
            break
        nf = s.node_count(fw.peek()[1])
        nb = s.node_count(bw.peek()[1])
        cur, other = (fw, bw) if nf <= nb else (bw, fw)
        g, states = cur.pop()
        entry = cur.close(g, states)
        hit = s.conj(states, cur.target)
        if hit != s.false and g < best:
            best, meet = g, ("target", cur, entry, hit)
        # same states already closed on the other side
        for e in other.closed.entries:
            if g + e.g >= best:
                continue
            both = s.conj(states, e.states)
            if both != s.false:
                best, meet = g + e.g, ("state", cur, entry, both, e)
        for c, succ in cur.successors(g, states):
            for e in other.closed.entries:
                if g + c + e.g >= best:
                    continue
                both = s.conj(succ, e.states)
                if both != s.false:
                    best, meet = g + c + e.g, ("edge", cur, entry, both, e, c)
    plan = None
    if meet is not None and best <= st.bound:
        plan = Plan(tuple(_bid_plan(st, fw, bw, meet)), best)
    return SearchResult(plan, make_stats("ucs-bid", st, stats, plan, t0))


def _bid_plan(st, fw: Frontier, bw: Frontier, meet) -> list[str]:
    s = st.store
    kind, cur = meet[0], meet[1]
    if kind == "target":
        _, _, entry, hit = meet
        cube = state_cube(st, hit)
        return trace_back(st, cur.closed, cube, entry, cur.direction, cur.start)
    if kind == "state":
        _, _, entry, both, e = meet
        cube = state_cube(st, both)
        f_entry, b_entry = (entry, e) if cur is fw else (e, entry)
        pre = trace_back(st, fw.closed, cube, f_entry, FWD, fw.start)
        post = trace_back(st, bw.closed, cube, b_entry, BWD, bw.start)
        return pre + post
    _, _, entry, both, e, c = meet
    far = state_cube(st, both)
    # find the expanded state and operator that produced `far`
    for tr in st.op_trs:
        if tr.cost != c:
            continue
        if cur is fw:
            near = s.conj(st.images.preimage(far, tr.node), entry.states)
        else:
            near = s.conj(st.images.image(far, tr.node), entry.states)
        if near != s.false:
            near = state_cube(st, near)
            break
    else:
        raise RuntimeError("meeting edge not found")
    if cur is fw:
        pre = trace_back(st, fw.closed, near, entry, FWD, fw.start)
        post = trace_back(st, bw.closed, far, e, BWD, bw.start)
    else:
        pre = trace_back(st, fw.closed, far, e, FWD, fw.start)
        post = trace_back(st, bw.closed, near, entry, BWD, bw.start)
    return pre + [tr.ops[0]] + post


def search(st: SymbolicTask, direction: str = BID) -> SearchResult:
    if direction == BID:
        return bidirectional_search(st)
    return uniform_cost_search(st, direction)


# ----------------------------------------------------------------------
# edge-valued search


def ev_search(st: SymbolicTask) -> SearchResult:
    """Forward uniform-cost search driven by edge-valued relations.

    The open list is one EV function mapping each state to its best known
    g value (INF when unreached); its root weight is the next g to expand.
    """
    if not st.supports_backward:
        raise TaskError("edge-valued search needs translated axioms")
    t0 = time.perf_counter()
    s, enc = st.store, st.enc
    stats = Stats()
    rel = (INF, 0)
    for _, ev in st.ev_trs():
        rel = s.ev_apply("min", rel, ev)
    open_ = s.ev_from_bdd(st.init)
    closed = ClosedList(s)
    plan = None
    while open_[0] != INF:
        g = open_[0]
        if g > st.bound:
            break
        states = s.diff(s.ev_argmin(open_), closed.union)
        open_ = s.ev_apply("add", open_, s.ev_from_bdd(s.neg(states)))
        stats.record(s, states)
        entry = closed.add(g, states)
        hit = s.conj(states, st.goal)
        if hit != s.false:
            cube = state_cube(st, hit)
            plan = Plan(tuple(trace_back(st, closed, cube, entry, FWD, st.init)), g)
            break
        t1 = time.perf_counter()
        succ = s.ev_apply("add", s.ev_from_bdd(states, g), rel)
        succ = s.ev_exists_min(succ, enc.unprimed)
        succ = s.ev_rename(succ, enc.to_unprimed, check=False)
        st.images.time += time.perf_counter() - t1
        succ = s.ev_apply("add", succ, s.ev_from_bdd(s.neg(closed.union)))
        open_ = s.ev_apply("min", open_, succ)
    return SearchResult(plan, make_stats("ev-fwd", st, stats, plan, t0))
