"""Top-k planning: the k cheapest plans, and utility-ranked plans for OSP.

Layers are computed without duplicate elimination: the forward layer for
cost g holds every state reachable by some path of cost exactly g (and the
backward layer every state that reaches the goal with cost exactly g).
All plans of a given cost are then enumerated explicitly by walking back
through the layers, which never hits a dead end because layers are exact.

With zero-cost cycles the number of plans of one cost can be infinite; the
enumeration then proceeds by the number of zero-cost steps, which is always
finite per step count.
"""
from __future__ import annotations

import itertools
import time
from collections.abc import Iterator

from .dd import INF
from .osp import UtilityFunction
from .search import BID, BWD, FWD, SearchResult, Stats, make_stats
from .symbolic import SymbolicTask
from .task import Plan, TaskError


class Layers:
    """Cost layers of one direction, computed lazily in ascending g."""

    def __init__(self, st: SymbolicTask, direction: str, stats: Stats, close: bool = False):
        self.st = st
        self.s = st.store
        self.direction = direction
        self.stats = stats
        self.close = close
        self.start = st.init if direction == FWD else st.goal
        self.open: dict[int, int] = {0: self.start}
        self.layers: dict[int, int] = {}
        self.seen = self.s.false
        self.zero = [tr for tr in st.trs if tr.cost == 0]
        self.positive = [tr for tr in st.trs if tr.cost > 0]

    def _step(self, states: int, rel: int) -> int:
        if self.direction == FWD:
            return self.st.image(states, rel)
        return self.st.preimage(states, rel)

    def next_key(self):
        return min(self.open) if self.open else INF

    @property
    def complete(self):
        """Largest g such that every layer up to g is final (-1 if none)."""
        return self.next_key() - 1 if self.open else INF

    def peek_size(self) -> int:
        return self.s.node_count(self.open[min(self.open)])

    def expand(self):
        s = self.s
        g = min(self.open)
        layer = self.open.pop(g)
        if self.close:
            layer = s.diff(layer, self.seen)
        frontier = layer
        while frontier != s.false:
            new = s.false
            for tr in self.zero:
                new = s.disj(new, self._step(frontier, tr.node))
            frontier = s.diff(new, layer)
            if self.close:
                frontier = s.diff(frontier, self.seen)
            layer = s.disj(layer, frontier)
        if layer == s.false:
            return
        self.stats.record(s, layer)
        self.layers[g] = layer
        self.seen = s.disj(self.seen, layer)
        for tr in self.positive:
            key = g + tr.cost
            if key > self.st.bound:
                continue
            succ = self._step(layer, tr.node)
            if succ != s.false:
                self.open[key] = s.disj(self.open.get(key, s.false), succ)

    def exhausted(self) -> bool:
        return not self.open

    def stale(self, goal_paths: int) -> bool:
        """Only already expanded states off known plans are left to expand."""
        s = self.s
        pending = s.disj_all(self.open.values())
        return s.diff(pending, self.seen) == s.false and s.conj(pending, goal_paths) == s.false


class PathWalker:
    """Explicit path enumeration through the layers of one direction."""

    def __init__(self, st: SymbolicTask, layers: Layers):
        self.st = st
        self.s = st.store
        self.enc = st.enc
        self.L = layers
        self.trs = sorted(st.op_trs, key=lambda tr: -tr.cost)
        self._has: dict = {}

    def cube(self, state: dict) -> int:
        return self.enc.state(state)

    def neighbours(self, cube: int, g: int, z):
        """(op, state dict, g', z') one step closer to the start."""
        s = self.s
        for tr in self.trs:
            c = tr.cost
            if c > g:
                continue
            if c == 0:
                if z == 0:
                    continue
                g2, z2 = g, (None if z is None else z - 1)
            else:
                g2, z2 = g - c, z
            layer = self.L.layers.get(g2)
            if layer is None:
                continue
            if self.L.direction == FWD:
                cand = self.st.images.preimage(cube, tr.node)
            else:
                cand = self.st.images.image(cube, tr.node)
            cand = s.conj(cand, layer)
            if cand == s.false:
                continue
            for other in self.enc.iter_states(cand):
                yield tr.ops[0], other, g2, z2

    def at_start(self, cube: int) -> bool:
        if self.L.direction == FWD:
            return cube == self.L.start
        return self.s.conj(cube, self.L.start) != self.s.false

    def paths(self, state: dict, g: int, z=None) -> Iterator[tuple[list[str], list[int]]]:
        """Operator sequences between the start and `state` with cost g.

        Each item is (ops, cubes): for forward layers ops run from the start
        to the state, for backward layers from the state to the goal; cubes
        are the states visited.
        """
        cube = self.cube(state)
        if z is not None and not self._reach(cube, g, z):
            return
        if g == 0 and (z is None or z == 0) and self.at_start(cube):
            yield [], [cube]
        for op, other, g2, z2 in self.neighbours(cube, g, z):
            for ops, cubes in self.paths(other, g2, z2):
                if self.L.direction == FWD:
                    yield ops + [op], cubes + [cube]
                else:
                    yield [op] + ops, [cube] + cubes

    def _reach(self, cube: int, g: int, z: int) -> bool:
        key = (cube, g, z)
        r = self._has.get(key)
        if r is None:
            self._has[key] = False  # guards against re-entry on the same key
            r = (g == 0 and z == 0 and self.at_start(cube)) or any(
                self._reach(self.cube(o), g2, z2) for _, o, g2, z2 in self.neighbours(cube, g, z))
            self._has[key] = r
        return r


def _closure(st: SymbolicTask, start: int, forward: bool) -> int:
    s = st.store
    rel = s.disj_all(tr.node for tr in st.trs)
    seen = frontier = start
    while frontier != s.false:
        nxt = st.image(frontier, rel) if forward else st.preimage(frontier, rel)
        frontier = s.diff(nxt, seen)
        seen = s.disj(seen, frontier)
    return seen


def zero_cycle_states(st: SymbolicTask) -> tuple[int, int]:
    """(states on or leading into zero-cost cycles, states that can lie on
    a plan); both are restricted to reachable states."""
    s = st.store
    zero = [tr for tr in st.trs if tr.cost == 0]
    if not zero:
        return s.false, s.false
    relevant = _closure(st, st.init, True)
    if st.supports_backward:
        relevant = s.conj(relevant, _closure(st, st.goal, False))
    rel = s.disj_all(tr.node for tr in zero)
    cur = relevant
    while True:
        nxt = s.conj(cur, s.conj(st.images.image(cur, rel), st.images.preimage(cur, rel)))
        if nxt == cur:
            return cur, relevant
        cur = nxt


class TopK:
    def __init__(self, st: SymbolicTask, k, direction: str = FWD, close: bool = False):
        st.check_direction(direction)
        self.st = st
        self.s = st.store
        self.k = k
        self.direction = direction
        self.stats = Stats()
        self.fw = Layers(st, FWD, self.stats, close) if direction in (FWD, BID) else None
        self.bw = Layers(st, BWD, self.stats, close) if direction in (BWD, BID) else None
        self.pf = PathWalker(st, self.fw) if self.fw else None
        self.pb = PathWalker(st, self.bw) if self.bw else None
        cycles, relevant = zero_cycle_states(st)
        self.cyclic = cycles != self.s.false
        if self.cyclic and k == INF:
            raise TaskError("zero-cost cycles may allow infinitely many plans; give a finite k")
        self.plans: list[Plan] = []
        self.goal_paths = self.s.false
        self.n_states = max(1, st.enc.count(relevant)) if self.cyclic else 1

    # -- enumeration of all plans with one cost

    def _limit(self):
        gf = self.fw.complete if self.fw else -1
        gb = self.bw.complete if self.bw else -1
        if gf == INF and self.fw:
            return max(self.fw.layers, default=-1)
        if gb == INF and self.bw:
            return max(self.bw.layers, default=-1)
        if gf < 0:
            return gb
        if gb < 0:
            return gf
        return gf + gb + 1

    def _of_cost(self, C: int, z) -> Iterator[tuple[list[str], list[int]]]:
        s, st = self.s, self.st
        gf = self.fw.complete if self.fw else -1
        if self.fw and gf >= C:
            layer = self.fw.layers.get(C)
            if layer is None:
                return
            for state in st.enc.iter_states(s.conj(layer, st.goal)):
                yield from self.pf.paths(state, C, z)
            return
        if not self.fw or not self.fw.layers:
            layer = self.bw.layers.get(C)
            if layer is None or s.conj(layer, st.init) == s.false:
                return
            for state in st.enc.iter_states(st.init):
                yield from self.pb.paths(state, C, z)
            return
        # split at the single edge that leaves the completed forward layers
        for p in sorted(self.fw.layers):
            if p > gf:
                break
            fl = self.fw.layers[p]
            for tr in sorted(st.op_trs, key=lambda t: -t.cost):
                c = tr.cost
                q = C - p - c
                if c == 0 or p + c <= gf or q < 0:
                    continue
                bl = self.bw.layers.get(q)
                if bl is None:
                    continue
                far = s.conj(st.images.image(fl, tr.node), bl)
                if far == s.false:
                    continue
                for after in st.enc.iter_states(far):
                    after_cube = st.enc.state(after)
                    near = s.conj(st.images.preimage(after_cube, tr.node), fl)
                    for before in st.enc.iter_states(near):
                        zs = [(None, None)] if z is None else [(z1, z - z1) for z1 in range(z + 1)]
                        for z1, z2 in zs:
                            tails = list(self.pb.paths(after, q, z2))
                            if not tails:
                                continue
                            for head, hc in self.pf.paths(before, p, z1):
                                for tail, tc in tails:
                                    yield head + [tr.ops[0]] + tail, hc + tc

    def _collect(self, C: int) -> bool:
        """Add plans of cost C; True once k plans are known."""
        if not self.cyclic:
            for ops, cubes in self._of_cost(C, None):
                if self._add(ops, C, cubes):
                    return True
            return False
        cap = (C + 1) * self.n_states
        quiet = 0
        for z in itertools.count():
            found = False
            for ops, cubes in self._of_cost(C, z):
                found = True
                if self._add(ops, C, cubes):
                    return True
            quiet = 0 if found else quiet + 1
            if z > cap and quiet > self.n_states:
                return False

    def _add(self, ops, cost, cubes) -> bool:
        self.plans.append(Plan(tuple(ops), cost))
        self.goal_paths = self.s.disj(self.goal_paths, self.s.disj_all(cubes))
        return len(self.plans) >= self.k

    # -- main loop

    def run(self) -> list[Plan]:
        done = -1
        while True:
            limit = min(self._limit(), self.st.bound)
            while done < limit:
                done += 1
                if self._collect(done):
                    return self.plans[: int(self.k) if self.k != INF else None]
            sides = [x for x in (self.fw, self.bw) if x is not None]
            if all(x.exhausted() for x in sides):
                return self.plans
            if any(x.stale(self.goal_paths) for x in sides if not x.exhausted()):
                return self.plans
            live = [x for x in sides if not x.exhausted()]
            if len(live) == 2:
                cur = live[0] if live[0].peek_size() <= live[1].peek_size() else live[1]
            else:
                cur = live[0]
            cur.expand()


def topk_search(st: SymbolicTask, k, direction: str = FWD, close: bool = False) -> SearchResult:
    """The k cheapest plans (k may be INF). `close` enables duplicate
    elimination, which loses plans and is only there for comparison."""
    t0 = time.perf_counter()
    tk = TopK(st, k, direction, close)
    plans = tk.run()
    best = plans[0] if plans else None
    stats = make_stats(f"topk-{direction}", st, tk.stats, best, t0, plans_found=len(plans))
    res = SearchResult(best, stats)
    res.plans = plans
    return res


def topk_osp(st: SymbolicTask, k, utility_repr: str = "bdd") -> SearchResult:
    """Plans within the bound ranked by utility (descending), then cost."""
    if st.bound == INF:
        raise TaskError("ranking plans by utility needs a finite cost bound")
    t0 = time.perf_counter()
    s = st.store
    stats = Stats()
    layers = Layers(st, FWD, stats)
    while not layers.exhausted():
        layers.expand()
    walker = PathWalker(st, layers)
    util = UtilityFunction(st, utility_repr)
    cycles, relevant = zero_cycle_states(st)
    cyclic = cycles != s.false
    if cyclic and k == INF:
        raise TaskError("zero-cost cycles may allow infinitely many plans; give a finite k")
    n_states = max(1, st.enc.count(relevant))
    plans: list[Plan] = []

    def emit(ops, g, u):
        plans.append(Plan(tuple(ops), g, u))
        return len(plans) >= k

    for u, part in util.parts:
        for g in sorted(layers.layers):
            targets = s.conj(s.conj(layers.layers[g], st.goal), part)
            if targets == s.false:
                continue
            states = list(st.enc.iter_states(targets))
            if not cyclic:
                for state in states:
                    for ops, _ in walker.paths(state, g):
                        if emit(ops, g, u):
                            break
                    if len(plans) >= k:
                        break
            else:
                quiet = 0
                for z in itertools.count():
                    found = False
                    for state in states:
                        for ops, _ in walker.paths(state, g, z):
                            found = True
                            if emit(ops, g, u):
                                break
                        if len(plans) >= k:
                            break
                    if len(plans) >= k:
                        break
                    quiet = 0 if found else quiet + 1
                    if z > (g + 1) * n_states and quiet > n_states:
                        break
            if len(plans) >= k:
                break
        if len(plans) >= k:
            break
    best = plans[0] if plans else None
    res = SearchResult(best, make_stats("topk-osp", st, stats, best, t0, plans_found=len(plans)))
    res.plans = plans
    return res
