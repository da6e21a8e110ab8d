"""Explicit-state reference planners and a random task generator.

Nothing here touches decision diagrams: states are tuples of primary values
and search is plain Dijkstra or best-first path enumeration.
"""
from __future__ import annotations

import heapq
import itertools
import math
import random

from .task import (Abs, Axiom, BinOp, Const, Expr, Literal, Operator, Plan, Task, TaskError, Var,
                   Variable, applicable, eval_expr, evaluate_axioms, is_goal, op_cost, utility_of)

INF = math.inf
STATE_CAP = 2_000_000


class OracleLimit(RuntimeError):
    pass


class ExplicitSpace:
    """Successor and predecessor functions over primary-state tuples."""

    def __init__(self, task: Task, cap: int = STATE_CAP):
        self.task = task
        self.names = [v.name for v in task.primary]
        self.index = {n: i for i, n in enumerate(self.names)}
        self.cap = cap
        self._ext: dict[tuple, dict] = {}
        self._succ: dict[tuple, list] = {}
        self.init = tuple(task.init[n] for n in self.names)

    def ext(self, state: tuple) -> dict:
        e = self._ext.get(state)
        if e is None:
            if len(self._ext) >= self.cap:
                raise OracleLimit(f"more than {self.cap} states")
            e = evaluate_axioms(self.task, dict(zip(self.names, state)))
            self._ext[state] = e
        return e

    def is_goal(self, state: tuple) -> bool:
        return is_goal(self.task, self.ext(state))

    def utility(self, state: tuple) -> int:
        return utility_of(self.task, self.ext(state))

    def successors(self, state: tuple) -> list[tuple[str, int, tuple]]:
        out = self._succ.get(state)
        if out is not None:
            return out
        e = self.ext(state)
        out = []
        for op in self.task.operators:
            if not applicable(op, e):
                continue
            nxt = list(state)
            for var, val in op.eff:
                nxt[self.index[var]] = val
            out.append((op.name, op_cost(op, e), tuple(nxt)))
        self._succ[state] = out
        return out

    def reachable(self, bound=INF) -> dict[tuple, int]:
        """Dijkstra distances from the initial state, up to the bound."""
        dist = {self.init: 0}
        heap = [(0, self.init)]
        while heap:
            g, s = heapq.heappop(heap)
            if g > dist[s]:
                continue
            for _, c, t in self.successors(s):
                ng = g + c
                if ng <= bound and ng < dist.get(t, INF):
                    dist[t] = ng
                    heapq.heappush(heap, (ng, t))
        return dist

    def goal_distances(self, states) -> dict[tuple, int]:
        """Exact cost-to-goal for every state in `states` (backward Dijkstra)."""
        preds: dict[tuple, list] = {s: [] for s in states}
        for s in states:
            for _, c, t in self.successors(s):
                if t in preds:
                    preds[t].append((c, s))
        dist = {}
        heap = [(0, s) for s in states if self.is_goal(s)]
        heapq.heapify(heap)
        while heap:
            d, s = heapq.heappop(heap)
            if s in dist:
                continue
            dist[s] = d
            for c, p in preds[s]:
                if p not in dist:
                    heapq.heappush(heap, (d + c, p))
        return dist


def oracle_optimal(task: Task, cap: int = STATE_CAP) -> Plan | None:
    """Cheapest plan within the task bound, or None."""
    sp = ExplicitSpace(task, cap)
    dist = {sp.init: 0}
    parent: dict[tuple, tuple] = {}
    heap = [(0, 0, sp.init)]
    tie = itertools.count(1)
    done = set()
    while heap:
        g, _, s = heapq.heappop(heap)
        if s in done:
            continue
        done.add(s)
        if sp.is_goal(s):
            ops = []
            while s in parent:
                s, name = parent[s]
                ops.append(name)
            return Plan(tuple(reversed(ops)), g)
        for name, c, t in sp.successors(s):
            ng = g + c
            if ng <= task.bound and ng < dist.get(t, INF):
                dist[t] = ng
                parent[t] = (s, name)
                heapq.heappush(heap, (ng, next(tie), t))
    return None


def has_zero_cost_cycle(task: Task, cap: int = STATE_CAP) -> bool:
    """Whether some reachable state lies on a cycle of zero-cost transitions."""
    sp = ExplicitSpace(task, cap)
    reach = sp.reachable()
    graph = {s: [t for _, c, t in sp.successors(s) if c == 0] for s in reach}
    color: dict[tuple, int] = {}
    for root in graph:
        if root in color:
            continue
        stack = [(root, iter(graph[root]))]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            for nxt in it:
                if color.get(nxt) == 1:
                    return True
                if nxt not in color:
                    color[nxt] = 1
                    stack.append((nxt, iter(graph[nxt])))
                    break
            else:
                color[node] = 2
                stack.pop()
    return False


def oracle_topk(task: Task, k: float, cap: int = STATE_CAP) -> list[Plan]:
    """The k cheapest plans within the bound, by best-first path enumeration.

    Paths are ordered by cost plus exact remaining cost, so only paths that
    can still reach the goal are ever extended.
    """
    sp = ExplicitSpace(task, cap)
    reach = sp.reachable(task.bound)
    h = sp.goal_distances(list(reach))
    if k == INF and has_zero_cost_cycle(task, cap):
        raise TaskError("infinitely many plans of equal cost")
    plans: list[Plan] = []
    if sp.init not in h:
        return plans
    tie = itertools.count()
    heap = [(h[sp.init], next(tie), 0, sp.init, ())]
    while heap and len(plans) < k:
        f, _, g, s, ops = heapq.heappop(heap)
        if f > task.bound:
            break
        if sp.is_goal(s) and g == f:
            plans.append(Plan(ops, g))
        for name, c, t in sp.successors(s):
            if t in h:
                heapq.heappush(heap, (g + c + h[t], next(tie), g + c, t, ops + (name,)))
    return plans


def oracle_osp(task: Task, cap: int = STATE_CAP) -> Plan | None:
    """A plan of maximal utility within the bound, cheapest among those."""
    sp = ExplicitSpace(task, cap)
    dist = {sp.init: 0}
    parent: dict[tuple, tuple] = {}
    heap = [(0, 0, sp.init)]
    tie = itertools.count(1)
    done = set()
    best = None
    while heap:
        g, _, s = heapq.heappop(heap)
        if s in done:
            continue
        done.add(s)
        if sp.is_goal(s):
            u = sp.utility(s)
            if best is None or u > best[0]:
                best = (u, g, s)
        for name, c, t in sp.successors(s):
            ng = g + c
            if ng <= task.bound and ng < dist.get(t, INF):
                dist[t] = ng
                parent[t] = (s, name)
                heapq.heappush(heap, (ng, next(tie), t))
    if best is None:
        return None
    u, g, s = best
    ops = []
    while s in parent:
        s, name = parent[s]
        ops.append(name)
    return Plan(tuple(reversed(ops)), g, u)


def oracle_topk_osp(task: Task, k: float, cap: int = STATE_CAP) -> list[Plan]:
    """All plans within a finite bound, ranked by utility then cost."""
    if task.bound == INF:
        raise TaskError("ranking plans by utility needs a finite bound")
    sp = ExplicitSpace(task, cap)
    plans = []
    stack = [(sp.init, 0, ())]
    while stack:
        s, g, ops = stack.pop()
        if sp.is_goal(s):
            plans.append(Plan(ops, g, sp.utility(s)))
        for name, c, t in sp.successors(s):
            if g + c <= task.bound:
                if c == 0 and len(ops) > 10_000:
                    raise TaskError("infinitely many plans of equal cost")
                stack.append((t, g + c, ops + (name,)))
    plans.sort(key=lambda p: (-p.utility, p.cost, p.ops))
    return plans if k == INF else plans[: int(k)]


# ----------------------------------------------------------------------
# random tasks

PROFILES = ("plain", "axioms", "sdac", "osp")


def _random_expr(rng: random.Random, names: list[str], depth: int) -> Expr:
    if depth == 0 or rng.random() < 0.3:
        if names and rng.random() < 0.6:
            return Var(rng.choice(names))
        return Const(rng.randint(0, 4))
    kind = rng.random()
    if kind < 0.15:
        return Abs(_random_expr(rng, names, depth - 1))
    op = rng.choice("++-*")
    return BinOp(op, _random_expr(rng, names, depth - 1), _random_expr(rng, names, depth - 1))


def _nonnegative(task: Task, expr: Expr) -> Expr:
    from .task import states
    lo = min(eval_expr(expr, evaluate_axioms(task, st)) for st in states(task))
    if lo < 0:
        return Abs(expr)
    return expr


def random_task_with_meta(seed: int, profile: str = "plain") -> tuple[Task, dict]:
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}")
    rng = random.Random(f"{profile}:{seed}")
    nvars = rng.randint(2, 6 if profile in ("sdac", "axioms") else 8)
    variables = [Variable(f"v{i}", rng.randint(2, 3)) for i in range(nvars)]
    init = {v.name: rng.randrange(v.domain) for v in variables}
    derived: list[Variable] = []
    axioms: list[Axiom] = []
    if profile == "axioms":
        nlayers = rng.randint(1, 2)
        for layer in range(nlayers):
            for j in range(rng.randint(1, 2)):
                derived.append(Variable(f"d{layer}_{j}", 2, layer))
        for layer in range(nlayers):
            heads = [d for d in derived if d.layer == layer]
            for _ in range(rng.randint(len(heads), 6)):
                head = rng.choice(heads)
                body = []
                for _ in range(rng.randint(1, 2)):
                    pool = [d for d in derived if d.layer <= layer and d is not head]
                    if pool and rng.random() < 0.4:
                        d = rng.choice(pool)
                        neg = d.layer < layer and rng.random() < 0.5
                        body.append(Literal(d.name, 1, neg))
                    else:
                        v = rng.choice(variables)
                        body.append(Literal(v.name, rng.randrange(v.domain)))
                axioms.append(Axiom(head.name, tuple(body)))
    allvars = variables + derived

    def facts(n, pool):
        chosen = rng.sample(pool, min(n, len(pool)))
        return tuple((v.name, rng.randrange(v.domain)) for v in chosen)

    cond_pool = variables + derived
    operators = []
    for i in range(rng.randint(1, 12)):
        pre = facts(rng.randint(0, 3), cond_pool)
        eff_vars = rng.sample(variables, rng.randint(1, min(2, len(variables))))
        eff = tuple((v.name, rng.randrange(v.domain)) for v in eff_vars)
        if profile == "sdac" and rng.random() < 0.7:
            cost: Expr = _random_expr(rng, [v.name for v in variables], rng.randint(1, 3))
        else:
            cost = Const(0 if rng.random() < 0.12 else rng.randint(1, 4))
        operators.append(Operator(f"op{i}", pre, eff, cost))
    task = Task(allvars, init, {}, operators, axioms)
    task.operators = [Operator(o.name, o.pre, o.eff, _nonnegative(task, o.cost))
                      for o in operators]
    ngoal = rng.randint(0 if profile == "osp" else 1, 3)
    if profile == "osp" and rng.random() < 0.5:
        ngoal = 0
    if rng.random() < 0.8:
        # facts of a state reached by a random walk, so most tasks are solvable
        end = _walk(task, rng)[1]
        ext = evaluate_axioms(task, end)
        chosen = rng.sample(cond_pool, min(ngoal, len(cond_pool)))
        task.goal = {v.name: ext[v.name] for v in chosen}
    else:
        task.goal = dict(facts(ngoal, cond_pool))
    meta: dict = {"profile": profile, "seed": seed}
    if profile == "osp":
        terms = []
        for v in rng.sample(variables, rng.randint(1, len(variables))):
            terms.append(BinOp("*", Const(rng.randint(1, 3)), Var(v.name)))
        util: Expr = terms[0]
        for t in terms[1:]:
            util = BinOp("+", util, t)
        if rng.random() < 0.5:
            a, b = rng.sample(variables, 2) if len(variables) > 1 else (variables[0],) * 2
            util = BinOp("+", util, BinOp("*", Var(a.name), Var(b.name)))
        task.utility = util
        walk = _walk(task, rng)[0]
        frac = rng.choice((0.25, 0.5, 0.75, 1.0))
        task.bound = math.ceil(frac * walk)
        meta.update(walk_cost=walk, fraction=frac)
    task.validate()
    return task, meta


def _walk(task: Task, rng: random.Random) -> tuple[int, dict]:
    """Random walk from the initial state: its cost and end state."""
    sp = ExplicitSpace(task)
    s = sp.init
    cost = 0
    for _ in range(rng.randint(2, 8)):
        succ = sp.successors(s)
        if not succ:
            break
        _, c, s = rng.choice(succ)
        cost += c
    return cost, dict(zip(sp.names, s))


def random_task(seed: int, profile: str = "plain") -> Task:
    """Small random task (at most 8 variables with domains up to 3, 12 operators)."""
    return random_task_with_meta(seed, profile)[0]
