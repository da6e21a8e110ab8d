"""Decision diagrams over a fixed variable order.

One `Store` holds three node tables that share a variable order:

* BDD / ADD nodes.  A BDD is an ADD whose terminals are 0 and 1, so the two
  flavors share one unique table and terminal 0 is also the BDD false sink.
  Terminal values are ints or ``INF``.
* EVBDD nodes.  Every edge carries an additive weight, each node's smaller
  outgoing weight is 0, and a dangling weight sits on the root.  An edge
  weight of ``INF`` always points at the single EV terminal.

Internally everything is plain integer node ids; `DD` is a thin handle
used by callers that want operator overloading and flavor checks.
There is no garbage collection and the operation caches are never cleared.
"""
from __future__ import annotations

import math
import os
from collections.abc import Iterable, Iterator, Mapping, Sequence
from typing import Union

INF = math.inf
Value = Union[int, float]

BDD = "bdd"
ADD = "add"
EV = "ev"

NODE_LIMIT_ENV = "SYMPLAN_NODE_LIMIT"
CACHE_LIMIT = 2_000_000  # total memo entries before all caches are dropped


class NodeLimitExceeded(RuntimeError):
    pass


class OrderError(ValueError):
    pass


def _check_value(v):
    if isinstance(v, float):
        if v != INF:
            if not v.is_integer():
                raise ValueError(f"non-integer terminal value {v!r}")
            return int(v)
        return INF
    return int(v)


def _add(a, b):
    return a + b


def _sub(a, b):
    if b == INF:
        raise ValueError("subtracting infinity is undefined")
    return a - b


def _mul(a, b):
    if a == INF or b == INF:
        other = b if a == INF else a
        if other == 0:
            return 0
        if other < 0:
            raise ValueError("negative times infinity is undefined")
        return INF
    return a * b


ARITH = {"add": _add, "sub": _sub, "mul": _mul, "min": min, "max": max}
UNARY = {"abs": abs, "neg": lambda v: _sub(0, v)}


class Store:
    """Node tables, unique tables and operation caches for one variable order."""

    def __init__(self, names: Sequence[str], node_limit: int | None = None):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate variable names")
        self.level_of = {n: i for i, n in enumerate(self.names)}
        self.nvars = len(self.names)
        if node_limit is None:
            env = os.environ.get(NODE_LIMIT_ENV)
            node_limit = int(env) if env else None
        self.node_limit = node_limit
        n = self.nvars
        # BDD / ADD table
        self._level: list[int] = []
        self._low: list[int] = []
        self._high: list[int] = []
        self._value: list[Value | None] = []
        self._unique: dict[tuple[int, int, int], int] = {}
        self._terminals: dict[Value, int] = {}
        # EV table; node 0 is the terminal
        self._ev_level = [n]
        self._ev_lw: list[Value] = [0]
        self._ev_lc = [0]
        self._ev_hw: list[Value] = [0]
        self._ev_hc = [0]
        self.false = self._terminal(0)
        self.true = self._terminal(1)
        self._ev_unique: dict[tuple, int] = {}
        self._caches: dict[object, dict] = {}
        self._cache_calls = 0
        self.cache_limit = CACHE_LIMIT

    # ------------------------------------------------------------------
    # construction

    def __len__(self) -> int:
        return len(self._level) + len(self._ev_level)

    def _grow(self):
        if self.node_limit is not None and len(self) >= self.node_limit:
            raise NodeLimitExceeded(f"more than {self.node_limit} live nodes")

    def _terminal(self, value: Value) -> int:
        value = _check_value(value)
        u = self._terminals.get(value)
        if u is None:
            self._grow()
            u = len(self._level)
            self._level.append(self.nvars)
            self._low.append(-1)
            self._high.append(-1)
            self._value.append(value)
            self._terminals[value] = u
        return u

    def _mk(self, level: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (level, low, high)
        u = self._unique.get(key)
        if u is None:
            self._grow()
            u = len(self._level)
            self._level.append(level)
            self._low.append(low)
            self._high.append(high)
            self._value.append(None)
            self._unique[key] = u
        return u

    def _cache(self, key) -> dict:
        self._cache_calls += 1
        if self._cache_calls % 64 == 0 and self.cache_entries() > self.cache_limit:
            # operations in progress keep their own dict; later ones start fresh
            self._caches.clear()
        c = self._caches.get(key)
        if c is None:
            c = self._caches[key] = {}
        return c

    def cache_entries(self) -> int:
        return sum(len(c) for c in self._caches.values())

    def level(self, var: str | int) -> int:
        if isinstance(var, int):
            if not 0 <= var < self.nvars:
                raise KeyError(var)
            return var
        return self.level_of[var]

    def literal(self, var: str | int, positive: bool = True) -> int:
        lv = self.level(var)
        if positive:
            return self._mk(lv, self.false, self.true)
        return self._mk(lv, self.true, self.false)

    def constant(self, value: Value) -> int:
        return self._terminal(value)

    def is_terminal(self, u: int) -> bool:
        return self._value[u] is not None

    def value(self, u: int) -> Value:
        v = self._value[u]
        if v is None:
            raise ValueError(f"node {u} is not a terminal")
        return v

    def node_level(self, u: int) -> int:
        return self._level[u]

    def cofactors(self, u: int) -> tuple[int, int]:
        return self._low[u], self._high[u]

    # ------------------------------------------------------------------
    # Boolean operations on BDD node ids

    def neg(self, u: int) -> int:
        cache = self._cache("not")
        low, high, level = self._low, self._high, self._level
        f, t = self.false, self.true
        mk = self._mk

        def rec(u):
            if u == f:
                return t
            if u == t:
                return f
            r = cache.get(u)
            if r is None:
                r = mk(level[u], rec(low[u]), rec(high[u]))
                cache[u] = r
            return r

        return rec(u)

    def conj(self, a: int, b: int) -> int:
        cache = self._cache("and")
        low, high, level = self._low, self._high, self._level
        f, t = self.false, self.true
        mk = self._mk

        def rec(a, b):
            if a == b or b == t:
                return a
            if a == f or b == f:
                return f
            if a == t:
                return b
            if a > b:
                a, b = b, a
            key = (a, b)
            r = cache.get(key)
            if r is not None:
                return r
            la, lb = level[a], level[b]
            if la == lb:
                r = mk(la, rec(low[a], low[b]), rec(high[a], high[b]))
            elif la < lb:
                r = mk(la, rec(low[a], b), rec(high[a], b))
            else:
                r = mk(lb, rec(a, low[b]), rec(a, high[b]))
            cache[key] = r
            return r

        return rec(a, b)

    def disj(self, a: int, b: int) -> int:
        cache = self._cache("or")
        low, high, level = self._low, self._high, self._level
        f, t = self.false, self.true
        mk = self._mk

        def rec(a, b):
            if a == b or b == f:
                return a
            if a == t or b == t:
                return t
            if a == f:
                return b
            if a > b:
                a, b = b, a
            key = (a, b)
            r = cache.get(key)
            if r is not None:
                return r
            la, lb = level[a], level[b]
            if la == lb:
                r = mk(la, rec(low[a], low[b]), rec(high[a], high[b]))
            elif la < lb:
                r = mk(la, rec(low[a], b), rec(high[a], b))
            else:
                r = mk(lb, rec(a, low[b]), rec(a, high[b]))
            cache[key] = r
            return r

        return rec(a, b)

    def xor(self, a: int, b: int) -> int:
        cache = self._cache("xor")
        low, high, level = self._low, self._high, self._level
        f, t = self.false, self.true
        mk = self._mk
        neg = self.neg

        def rec(a, b):
            if a == b:
                return f
            if a == f:
                return b
            if b == f:
                return a
            if a == t:
                return neg(b)
            if b == t:
                return neg(a)
            if a > b:
                a, b = b, a
            key = (a, b)
            r = cache.get(key)
            if r is not None:
                return r
            la, lb = level[a], level[b]
            if la == lb:
                r = mk(la, rec(low[a], low[b]), rec(high[a], high[b]))
            elif la < lb:
                r = mk(la, rec(low[a], b), rec(high[a], b))
            else:
                r = mk(lb, rec(a, low[b]), rec(a, high[b]))
            cache[key] = r
            return r

        return rec(a, b)

    def diff(self, a: int, b: int) -> int:
        return self.conj(a, self.neg(b))

    def conj_all(self, nodes: Iterable[int]) -> int:
        r = self.true
        for u in nodes:
            r = self.conj(r, u)
        return r

    def disj_all(self, nodes: Iterable[int]) -> int:
        r = self.false
        for u in nodes:
            r = self.disj(r, u)
        return r

    def iff(self, a: int, b: int) -> int:
        return self.neg(self.xor(a, b))

    def ite(self, c: int, a: int, b: int) -> int:
        return self.disj(self.conj(c, a), self.conj(self.neg(c), b))

    def _levelset(self, levels: Iterable[int]) -> frozenset[int]:
        return frozenset(self.level(v) for v in levels)

    def exists(self, u: int, levels: Iterable[int | str]) -> int:
        qs = self._levelset(levels)
        if not qs:
            return u
        top = max(qs)
        cache = self._cache(("exists", qs))
        low, high, level = self._low, self._high, self._level
        mk, disj = self._mk, self.disj

        def rec(u):
            lv = level[u]
            if lv > top:
                return u
            r = cache.get(u)
            if r is not None:
                return r
            lo, hi = rec(low[u]), rec(high[u])
            if lv in qs:
                r = disj(lo, hi)
            else:
                r = mk(lv, lo, hi)
            cache[u] = r
            return r

        return rec(u)

    def forall(self, u: int, levels: Iterable[int | str]) -> int:
        return self.neg(self.exists(self.neg(u), levels))

    def and_exists(self, a: int, b: int, levels: Iterable[int | str]) -> int:
        """exists(a & b, levels) without building the full conjunction."""
        qs = self._levelset(levels)
        if not qs:
            return self.conj(a, b)
        top = max(qs)
        cache = self._cache(("andex", qs))
        low, high, level = self._low, self._high, self._level
        f, t = self.false, self.true
        mk, disj, conj = self._mk, self.disj, self.conj
        ex = self.exists

        def rec(a, b):
            if a == f or b == f:
                return f
            if a == t and b == t:
                return t
            if a == t or a == b:
                return ex(b, qs)
            if b == t:
                return ex(a, qs)
            la, lb = level[a], level[b]
            lv = la if la < lb else lb
            if lv > top:
                return conj(a, b)
            if a > b:
                a, b = b, a
                la, lb = lb, la
            key = (a, b)
            r = cache.get(key)
            if r is not None:
                return r
            if la == lb:
                a0, a1, b0, b1 = low[a], high[a], low[b], high[b]
            elif la < lb:
                a0, a1, b0, b1 = low[a], high[a], b, b
            else:
                a0, a1, b0, b1 = a, a, low[b], high[b]
            if lv in qs:
                r0 = rec(a0, b0)
                r = t if r0 == t else disj(r0, rec(a1, b1))
            else:
                r = mk(lv, rec(a0, b0), rec(a1, b1))
            cache[key] = r
            return r

        return rec(a, b)

    def restrict(self, u: int, assignment: Mapping[int | str, int]) -> int:
        """Cofactor with respect to a partial assignment (works for ADDs too)."""
        vals = {self.level(k): int(bool(v)) for k, v in assignment.items()}
        if not vals:
            return u
        key = ("restrict", tuple(sorted(vals.items())))
        cache = self._cache(key)
        low, high, level, value = self._low, self._high, self._level, self._value
        mk = self._mk

        def rec(u):
            if value[u] is not None:
                return u
            r = cache.get(u)
            if r is None:
                lv = level[u]
                if lv in vals:
                    r = rec(high[u] if vals[lv] else low[u])
                else:
                    r = mk(lv, rec(low[u]), rec(high[u]))
                cache[u] = r
            return r

        return rec(u)

    def support(self, u: int) -> frozenset[int]:
        seen: set[int] = set()
        levels: set[int] = set()
        stack = [u]
        value = self._value
        while stack:
            v = stack.pop()
            if v in seen or value[v] is not None:
                continue
            seen.add(v)
            levels.add(self._level[v])
            stack.append(self._low[v])
            stack.append(self._high[v])
        return frozenset(levels)

    def _rename_map(self, mapping: Mapping[int | str, int | str]) -> dict[int, int]:
        m = {self.level(k): self.level(v) for k, v in mapping.items()}
        return {k: v for k, v in m.items() if k != v}

    def check_rename(self, support: Iterable[int], m: Mapping[int, int]):
        order = sorted(support)
        image = [m.get(lv, lv) for lv in order]
        if len(set(image)) != len(image):
            raise OrderError("renaming merges two variables of the support")
        if any(x >= y for x, y in zip(image, image[1:])):
            raise OrderError("renaming does not preserve the variable order")

    def rename(self, u: int, mapping: Mapping[int | str, int | str], check: bool = True) -> int:
        """Substitute variables; the substitution must keep the relative order."""
        m = self._rename_map(mapping)
        if not m:
            return u
        if check:
            self.check_rename(self.support(u), m)
        cache = self._cache(("rename", tuple(sorted(m.items()))))
        low, high, level, value = self._low, self._high, self._level, self._value
        mk = self._mk

        def rec(u):
            if value[u] is not None:
                return u
            r = cache.get(u)
            if r is None:
                lv = level[u]
                r = mk(m.get(lv, lv), rec(low[u]), rec(high[u]))
                cache[u] = r
            return r

        return rec(u)

    # ------------------------------------------------------------------
    # inspection

    def node_count(self, u: int) -> int:
        """Number of distinct nodes reachable from u, terminals included."""
        seen = {u}
        stack = [u]
        low, high, value = self._low, self._high, self._value
        while stack:
            v = stack.pop()
            if value[v] is None:
                for w in (low[v], high[v]):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
        return len(seen)

    def nodes(self, u: int) -> list[int]:
        seen = {u}
        order = [u]
        i = 0
        while i < len(order):
            v = order[i]
            i += 1
            if self._value[v] is None:
                for w in (self._low[v], self._high[v]):
                    if w not in seen:
                        seen.add(w)
                        order.append(w)
        return order

    def eval(self, u: int, assignment: Mapping[int | str, int] | Sequence[int]) -> Value:
        if isinstance(assignment, Mapping):
            vals = {self.level(k): v for k, v in assignment.items()}
            get = lambda lv: vals.get(lv, 0)
        else:
            get = lambda lv: assignment[lv]
        while self._value[u] is None:
            u = self._high[u] if get(self._level[u]) else self._low[u]
        return self._value[u]

    def pick(self, u: int) -> tuple[int, ...] | None:
        """One satisfying assignment, preferring the low branch; free bits are 0."""
        if u == self.false:
            return None
        bits = [0] * self.nvars
        f = self.false
        while self._value[u] is None:
            lo = self._low[u]
            if lo != f:
                u = lo
            else:
                bits[self._level[u]] = 1
                u = self._high[u]
        if u == f:
            return None
        return tuple(bits)

    def iter_sat(self, u: int, levels: Sequence[int]) -> Iterator[tuple[int, ...]]:
        """All satisfying assignments over the given levels, low branch first.

        Variables outside `levels` must not occur in u.
        """
        levels = sorted(levels)
        pos = {lv: i for i, lv in enumerate(levels)}
        f = self.false
        low, high, level, value = self._low, self._high, self._level, self._value
        bits = [0] * len(levels)

        def rec(u, i):
            if u == f:
                return
            if i == len(levels):
                if value[u] is None:
                    raise ValueError("node depends on variables outside the level set")
                yield tuple(bits)
                return
            lv = levels[i]
            if value[u] is None and level[u] == lv:
                children = (low[u], high[u])
            elif value[u] is None and level[u] not in pos:
                raise ValueError("node depends on variables outside the level set")
            else:
                children = (u, u)
            for b in (0, 1):
                bits[i] = b
                yield from rec(children[b], i + 1)
            bits[i] = 0

        yield from rec(u, 0)

    def sat_count(self, u: int, levels: Sequence[int]) -> int:
        levels = sorted(levels)
        pos = {lv: i for i, lv in enumerate(levels)}
        n = len(levels)
        cache: dict[int, int] = {}
        low, high, level = self._low, self._high, self._level

        def idx(v):
            return n if self._value[v] is not None else pos[level[v]]

        def rec(v):
            if v == self.false:
                return 0
            if v == self.true:
                return 1
            r = cache.get(v)
            if r is None:
                i = pos[level[v]]
                lo, hi = low[v], high[v]
                r = (rec(lo) << (idx(lo) - i - 1)) + (rec(hi) << (idx(hi) - i - 1))
                cache[v] = r
            return r

        if u == self.false:
            return 0
        return rec(u) << idx(u)

    # ------------------------------------------------------------------
    # ADD operations

    def arith(self, op: str, a: int, b: int) -> int:
        fn = ARITH[op]
        cache = self._cache(("arith", op))
        low, high, level, value = self._low, self._high, self._level, self._value
        mk, term = self._mk, self._terminal
        commutative = op != "sub"

        def rec(a, b):
            va, vb = value[a], value[b]
            if va is not None and vb is not None:
                return term(fn(va, vb))
            if commutative and a > b:
                a, b = b, a
            key = (a, b)
            r = cache.get(key)
            if r is not None:
                return r
            la, lb = level[a], level[b]
            if la == lb:
                r = mk(la, rec(low[a], low[b]), rec(high[a], high[b]))
            elif la < lb:
                r = mk(la, rec(low[a], b), rec(high[a], b))
            else:
                r = mk(lb, rec(a, low[b]), rec(a, high[b]))
            cache[key] = r
            return r

        return rec(a, b)

    def arith_map(self, op: str, a: int) -> int:
        fn = UNARY[op]
        cache = self._cache(("amap", op))
        low, high, level, value = self._low, self._high, self._level, self._value
        mk, term = self._mk, self._terminal

        def rec(a):
            v = value[a]
            if v is not None:
                return term(fn(v))
            r = cache.get(a)
            if r is None:
                r = mk(level[a], rec(low[a]), rec(high[a]))
                cache[a] = r
            return r

        return rec(a)

    def add_ite(self, cond: int, a: int, b: int) -> int:
        """ADD that is a where the BDD cond holds and b elsewhere."""
        cache = self._cache("aite")
        low, high, level = self._low, self._high, self._level
        mk = self._mk
        f, t = self.false, self.true

        def rec(c, a, b):
            if c == t or a == b:
                return a
            if c == f:
                return b
            key = (c, a, b)
            r = cache.get(key)
            if r is not None:
                return r
            lv = min(level[c], level[a], level[b])
            cs = [(low[x], high[x]) if level[x] == lv else (x, x) for x in (c, a, b)]
            r = mk(lv, rec(cs[0][0], cs[1][0], cs[2][0]), rec(cs[0][1], cs[1][1], cs[2][1]))
            cache[key] = r
            return r

        return rec(cond, a, b)

    def terminal_values(self, u: int) -> list[Value]:
        return sorted({self._value[v] for v in self.nodes(u) if self._value[v] is not None})

    def equals_value(self, u: int, v: Value) -> int:
        """BDD of the assignments on which the ADD u evaluates to v."""
        target = self._terminals.get(_check_value(v))
        if target is None:
            return self.false
        cache = self._cache(("eqv", target))
        low, high, level, value = self._low, self._high, self._level, self._value
        mk = self._mk
        f, t = self.false, self.true

        def rec(u):
            if value[u] is not None:
                return t if u == target else f
            r = cache.get(u)
            if r is None:
                r = mk(level[u], rec(low[u]), rec(high[u]))
                cache[u] = r
            return r

        return rec(u)

    def partition(self, u: int, care: int | None = None) -> list[tuple[Value, int]]:
        """Split an ADD by terminal value: ascending (value, BDD) pairs, INF skipped.

        With `care`, only assignments inside that BDD are considered and empty
        parts are dropped.
        """
        if care is not None:
            u = self.add_ite(care, u, self._terminal(INF))
        out = []
        for v in self.terminal_values(u):
            if v == INF:
                continue
            b = self.equals_value(u, v)
            if b != self.false:
                out.append((v, b))
        return out

    def max_value(self, u: int, care: int) -> Value | None:
        """Largest value of the ADD u over the assignments in BDD care."""
        cache = self._cache("maxv")
        low, high, level, value = self._low, self._high, self._level, self._value
        f = self.false

        def rec(u, c):
            if c == f:
                return None
            if value[u] is not None:
                return value[u]
            key = (u, c)
            if key in cache:
                return cache[key]
            lv = min(level[u], level[c])
            u0, u1 = (low[u], high[u]) if level[u] == lv else (u, u)
            c0, c1 = (low[c], high[c]) if level[c] == lv else (c, c)
            r0, r1 = rec(u0, c0), rec(u1, c1)
            r = r0 if r1 is None else r1 if r0 is None else max(r0, r1)
            cache[key] = r
            return r

        return rec(u, care)

    def min_value(self, u: int, care: int) -> Value | None:
        neg = self.arith_map("neg", u)
        v = self.max_value(neg, care)
        return None if v is None else -v

    # ------------------------------------------------------------------
    # EVBDD operations; an EV function is a (weight, node) pair

    def _ev_mk(self, level: int, lw: Value, lc: int, hw: Value, hc: int) -> tuple[Value, int]:
        if lw == hw and lc == hc:
            return lw, lc
        m = lw if lw < hw else hw
        if m == INF:
            return INF, 0
        lw = lw - m if lw != INF else INF
        hw = hw - m if hw != INF else INF
        key = (level, lw, lc, hw, hc)
        u = self._ev_unique.get(key)
        if u is None:
            self._grow()
            u = len(self._ev_level)
            self._ev_level.append(level)
            self._ev_lw.append(lw)
            self._ev_lc.append(lc)
            self._ev_hw.append(hw)
            self._ev_hc.append(hc)
            self._ev_unique[key] = u
        return m, u

    def ev_const(self, value: Value) -> tuple[Value, int]:
        return _check_value(value), 0

    def ev_literal(self, var: str | int) -> tuple[Value, int]:
        return self._ev_mk(self.level(var), 0, 0, 1, 0)

    def _ev_children(self, w, u, lv):
        if self._ev_level[u] == lv:
            return ((w + self._ev_lw[u], self._ev_lc[u]),
                    (w + self._ev_hw[u], self._ev_hc[u]))
        return (w, u), (w, u)

    def ev_apply(self, op: str, a: tuple[Value, int], b: tuple[Value, int]) -> tuple[Value, int]:
        fn = ARITH[op]
        wa, na = a
        wb, nb = b
        if op == "add":
            if wa == INF or wb == INF:
                return INF, 0
            w, n = self._ev_add(na, nb)
            return wa + wb + w, n
        if op == "min":
            if wa == INF:
                return b
            if wb == INF:
                return a
            m = min(wa, wb)
            w, n = self._ev_minmax("min", wa - m, na, wb - m, nb)
            return m + w, n
        if op == "max":
            if wa == INF or wb == INF:
                return INF, 0
            m = min(wa, wb)
            w, n = self._ev_minmax("max", wa - m, na, wb - m, nb)
            return m + w, n
        return self._ev_general(op, fn, wa, na, wb, nb)

    def _ev_add(self, a: int, b: int) -> tuple[Value, int]:
        cache = self._cache(("ev", "add"))
        lvl = self._ev_level

        def rec(a, b):
            if a == 0 and b == 0:
                return 0, 0
            if a > b:
                a, b = b, a
            key = (a, b)
            r = cache.get(key)
            if r is not None:
                return r
            lv = min(lvl[a], lvl[b])
            (a0, a1), (b0, b1) = self._ev_children(0, a, lv), self._ev_children(0, b, lv)
            lo = self._ev_add_w(a0, b0, rec)
            hi = self._ev_add_w(a1, b1, rec)
            r = self._ev_mk(lv, lo[0], lo[1], hi[0], hi[1])
            cache[key] = r
            return r

        return rec(a, b)

    @staticmethod
    def _ev_add_w(x, y, rec):
        if x[0] == INF or y[0] == INF:
            return INF, 0
        w, n = rec(x[1], y[1])
        return x[0] + y[0] + w, n

    def _ev_minmax(self, op: str, da: Value, a: int, db: Value, b: int) -> tuple[Value, int]:
        cache = self._cache(("ev", op))
        lvl = self._ev_level
        pick = min if op == "min" else max

        def rec(da, a, db, b):
            # one of da, db is 0; INF handled by the callers below
            if a == 0 and b == 0:
                return pick(da, db), 0
            if (a, da) > (b, db):
                a, da, b, db = b, db, a, da
            key = (da, a, db, b)
            r = cache.get(key)
            if r is not None:
                return r
            lv = min(lvl[a], lvl[b])
            (a0, a1), (b0, b1) = self._ev_children(da, a, lv), self._ev_children(db, b, lv)
            lo = step(a0, b0)
            hi = step(a1, b1)
            r = self._ev_mk(lv, lo[0], lo[1], hi[0], hi[1])
            cache[key] = r
            return r

        def step(x, y):
            if x[0] == INF:
                return y if op == "min" else (INF, 0)
            if y[0] == INF:
                return x if op == "min" else (INF, 0)
            m = min(x[0], y[0])
            w, n = rec(x[0] - m, x[1], y[0] - m, y[1])
            return m + w, n

        return rec(da, a, db, b)

    def _ev_general(self, op, fn, wa, na, wb, nb) -> tuple[Value, int]:
        cache = self._cache(("ev", op))
        lvl = self._ev_level

        def rec(wa, a, wb, b):
            if a == 0 and b == 0:
                v = fn(wa, wb)
                return (INF, 0) if v == INF else (v, 0)
            key = (wa, a, wb, b)
            r = cache.get(key)
            if r is not None:
                return r
            lv = min(lvl[a], lvl[b])
            (a0, a1), (b0, b1) = self._ev_children(wa, a, lv), self._ev_children(wb, b, lv)
            lo = rec(a0[0], a0[1], b0[0], b0[1])
            hi = rec(a1[0], a1[1], b1[0], b1[1])
            r = self._ev_mk(lv, lo[0], lo[1], hi[0], hi[1])
            cache[key] = r
            return r

        return rec(wa, na, wb, nb)

    def ev_map(self, op: str, a: tuple[Value, int]) -> tuple[Value, int]:
        fn = UNARY[op]
        cache = self._cache(("evmap", op))
        lvl = self._ev_level

        def rec(w, u):
            if u == 0:
                v = fn(w)
                return v, 0
            key = (w, u)
            r = cache.get(key)
            if r is not None:
                return r
            (x0, x1) = self._ev_children(w, u, lvl[u])
            lo, hi = rec(*x0), rec(*x1)
            r = self._ev_mk(lvl[u], lo[0], lo[1], hi[0], hi[1])
            cache[key] = r
            return r

        w, u = a
        if w == INF:
            if op == "neg":
                raise ValueError("negating infinity is undefined")
            return a
        return rec(w, u)

    def ev_from_bdd(self, u: int, inside: Value = 0) -> tuple[Value, int]:
        """EV function that is `inside` on the BDD u and INF elsewhere."""
        cache = self._cache("ev_from_bdd")
        low, high, level = self._low, self._high, self._level
        f, t = self.false, self.true

        def rec(u):
            if u == t:
                return 0, 0
            if u == f:
                return INF, 0
            r = cache.get(u)
            if r is None:
                lo, hi = rec(low[u]), rec(high[u])
                r = self._ev_mk(level[u], lo[0], lo[1], hi[0], hi[1])
                cache[u] = r
            return r

        w, n = rec(u)
        return (INF, 0) if w == INF else (w + inside, n)

    def ev_from_add(self, u: int) -> tuple[Value, int]:
        cache = self._cache("ev_from_add")
        low, high, level, value = self._low, self._high, self._level, self._value

        def rec(u):
            v = value[u]
            if v is not None:
                return (INF, 0) if v == INF else (v, 0)
            r = cache.get(u)
            if r is None:
                lo, hi = rec(low[u]), rec(high[u])
                r = self._ev_mk(level[u], lo[0], lo[1], hi[0], hi[1])
                cache[u] = r
            return r

        return rec(u)

    def ev_to_add(self, a: tuple[Value, int]) -> int:
        cache = self._cache("ev_to_add")
        lvl = self._ev_level

        def rec(w, u):
            if u == 0:
                return self._terminal(w)
            key = (w, u)
            r = cache.get(key)
            if r is None:
                x0, x1 = self._ev_children(w, u, lvl[u])
                r = self._mk(lvl[u], rec(*x0), rec(*x1))
                cache[key] = r
            return r

        return rec(*a)

    def ev_argmin(self, a: tuple[Value, int]) -> int:
        """BDD of the assignments where the EV function takes its minimum."""
        if a[0] == INF:
            return self.false
        cache = self._cache("ev_argmin")
        lvl, lw, lc, hw, hc = self._ev_level, self._ev_lw, self._ev_lc, self._ev_hw, self._ev_hc

        def rec(u):
            if u == 0:
                return self.true
            r = cache.get(u)
            if r is None:
                lo = rec(lc[u]) if lw[u] == 0 else self.false
                hi = rec(hc[u]) if hw[u] == 0 else self.false
                r = self._mk(lvl[u], lo, hi)
                cache[u] = r
            return r

        return rec(a[1])

    def ev_exists_min(self, a: tuple[Value, int], levels: Iterable[int | str]) -> tuple[Value, int]:
        """Minimise the EV function over the given variables."""
        qs = self._levelset(levels)
        if not qs or a[0] == INF:
            return a
        cache = self._cache(("ev_exmin", qs))
        lvl = self._ev_level

        def rec(u):
            if u == 0:
                return 0, 0
            r = cache.get(u)
            if r is None:
                lv = lvl[u]
                lo = self._ev_shift(self._ev_lw[u], rec(self._ev_lc[u]))
                hi = self._ev_shift(self._ev_hw[u], rec(self._ev_hc[u]))
                if lv in qs:
                    r = self.ev_apply("min", lo, hi)
                else:
                    r = self._ev_mk(lv, lo[0], lo[1], hi[0], hi[1])
                cache[u] = r
            return r

        return self._ev_shift(a[0], rec(a[1]))

    @staticmethod
    def _ev_shift(w: Value, a: tuple[Value, int]) -> tuple[Value, int]:
        if w == INF or a[0] == INF:
            return INF, 0
        return w + a[0], a[1]

    def ev_rename(self, a: tuple[Value, int], mapping: Mapping[int | str, int | str], check: bool = True) -> tuple[Value, int]:
        m = self._rename_map(mapping)
        if not m or a[1] == 0:
            return a
        if check:
            self.check_rename(self.ev_support(a), m)
        cache = self._cache(("ev_rename", tuple(sorted(m.items()))))
        lvl = self._ev_level

        def rec(u):
            if u == 0:
                return 0, 0
            r = cache.get(u)
            if r is None:
                lo = self._ev_shift(self._ev_lw[u], rec(self._ev_lc[u]))
                hi = self._ev_shift(self._ev_hw[u], rec(self._ev_hc[u]))
                lv = lvl[u]
                r = self._ev_mk(m.get(lv, lv), lo[0], lo[1], hi[0], hi[1])
                cache[u] = r
            return r

        return self._ev_shift(a[0], rec(a[1]))

    def ev_nodes(self, a: tuple[Value, int]) -> list[int]:
        seen = {a[1]}
        order = [a[1]]
        i = 0
        while i < len(order):
            u = order[i]
            i += 1
            if u != 0:
                for w in (self._ev_lc[u], self._ev_hc[u]):
                    if w not in seen:
                        seen.add(w)
                        order.append(w)
        return order

    def ev_node_count(self, a: tuple[Value, int]) -> int:
        return len(self.ev_nodes(a))

    def ev_support(self, a: tuple[Value, int]) -> frozenset[int]:
        return frozenset(self._ev_level[u] for u in self.ev_nodes(a) if u != 0)

    def ev_eval(self, a: tuple[Value, int], assignment: Mapping[int | str, int] | Sequence[int]) -> Value:
        if isinstance(assignment, Mapping):
            vals = {self.level(k): v for k, v in assignment.items()}
            get = lambda lv: vals.get(lv, 0)
        else:
            get = lambda lv: assignment[lv]
        w, u = a
        while u != 0 and w != INF:
            if get(self._ev_level[u]):
                w, u = w + self._ev_hw[u], self._ev_hc[u]
            else:
                w, u = w + self._ev_lw[u], self._ev_lc[u]
        return w

    # ------------------------------------------------------------------
    # output

    def to_dot(self, roots: Mapping[str, object]) -> str:
        """Graphviz source for the given named roots (node ids or EV pairs)."""
        lines = ["digraph dd {", "  node [shape=circle];"]
        done: set[str] = set()
        for name, root in roots.items():
            if isinstance(root, tuple):
                w, u = root
                lines.append(f'  "{name}" [shape=plaintext];')
                lines.append(f'  "{name}" -> "e{u}" [label="{_fmt(w)}"];')
                for v in self.ev_nodes(root):
                    key = f"e{v}"
                    if key in done:
                        continue
                    done.add(key)
                    if v == 0:
                        lines.append(f'  "{key}" [shape=box,label="0"];')
                        continue
                    lines.append(f'  "{key}" [label="{self.names[self._ev_level[v]]}"];')
                    lines.append(f'  "{key}" -> "e{self._ev_lc[v]}" [style=dashed,label="{_fmt(self._ev_lw[v])}"];')
                    lines.append(f'  "{key}" -> "e{self._ev_hc[v]}" [label="{_fmt(self._ev_hw[v])}"];')
            else:
                u = int(root)
                lines.append(f'  "{name}" [shape=plaintext];')
                lines.append(f'  "{name}" -> "n{u}";')
                for v in self.nodes(u):
                    key = f"n{v}"
                    if key in done:
                        continue
                    done.add(key)
                    if self._value[v] is not None:
                        lines.append(f'  "{key}" [shape=box,label="{_fmt(self._value[v])}"];')
                        continue
                    lines.append(f'  "{key}" [label="{self.names[self._level[v]]}"];')
                    lines.append(f'  "{key}" -> "n{self._low[v]}" [style=dashed];')
                    lines.append(f'  "{key}" -> "n{self._high[v]}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _fmt(v: Value) -> str:
    return "inf" if v == INF else str(v)


class DD:
    """Handle to a diagram in a store, tagged with its flavor."""

    __slots__ = ("store", "flavor", "node", "weight")

    def __init__(self, store: Store, flavor: str, node: int, weight: Value = 0):
        self.store = store
        self.flavor = flavor
        self.node = node
        self.weight = weight

    def _key(self):
        return (id(self.store), self.flavor, self.node, self.weight)

    def __eq__(self, other):
        return isinstance(other, DD) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.flavor == EV:
            return f"DD(ev, weight={_fmt(self.weight)}, node={self.node})"
        return f"DD({self.flavor}, node={self.node})"

    def _same(self, other: DD, flavor: str | None = None):
        if not isinstance(other, DD) or other.store is not self.store:
            raise TypeError("operands must be diagrams of the same store")
        if flavor is not None and (self.flavor != flavor or other.flavor != flavor):
            raise TypeError(f"expected {flavor} operands")
        if self.flavor != other.flavor:
            raise TypeError("operands have different flavors")

    def __and__(self, other):
        return apply_bool("and", self, other)

    def __or__(self, other):
        return apply_bool("or", self, other)

    def __xor__(self, other):
        return apply_bool("xor", self, other)

    def __invert__(self):
        return negate(self)

    def __add__(self, other):
        return arith_apply("add", self, other)

    def __sub__(self, other):
        return arith_apply("sub", self, other)

    def __mul__(self, other):
        return arith_apply("mul", self, other)

    @property
    def is_false(self) -> bool:
        return self.flavor == BDD and self.node == self.store.false

    @property
    def is_true(self) -> bool:
        return self.flavor == BDD and self.node == self.store.true

    def __len__(self):
        return node_count(self)


def mk_literal(store: Store, var: str | int, positive: bool = True) -> DD:
    return DD(store, BDD, store.literal(var, positive))


def true(store: Store) -> DD:
    return DD(store, BDD, store.true)


def false(store: Store) -> DD:
    return DD(store, BDD, store.false)


def constant(store: Store, value: Value, flavor: str = ADD) -> DD:
    if flavor == EV:
        w, n = store.ev_const(value)
        return DD(store, EV, n, w)
    if flavor == BDD and value not in (0, 1):
        raise ValueError("BDD constants are 0 or 1")
    return DD(store, flavor, store.constant(value))


def variable(store: Store, var: str | int, flavor: str = ADD) -> DD:
    """The 0/1 valued function of one variable as an ADD or EV function."""
    if flavor == EV:
        w, n = store.ev_literal(var)
        return DD(store, EV, n, w)
    return DD(store, flavor, store.literal(var))


def apply_bool(op: str, a: DD, b: DD) -> DD:
    a._same(b, BDD)
    s = a.store
    fn = {"and": s.conj, "or": s.disj, "xor": s.xor}.get(op)
    if fn is None:
        raise ValueError(f"unknown Boolean operation {op!r}")
    return DD(s, BDD, fn(a.node, b.node))


def negate(a: DD) -> DD:
    if a.flavor != BDD:
        raise TypeError("negation needs a BDD")
    return DD(a.store, BDD, a.store.neg(a.node))


def exists(a: DD, variables: Iterable[str | int]) -> DD:
    if a.flavor == EV:
        w, n = a.store.ev_exists_min((a.weight, a.node), variables)
        return DD(a.store, EV, n, w)
    if a.flavor != BDD:
        raise TypeError("existential quantification needs a BDD or EV function")
    return DD(a.store, BDD, a.store.exists(a.node, variables))


def rename(a: DD, mapping: Mapping[str | int, str | int]) -> DD:
    s = a.store
    if a.flavor == EV:
        w, n = s.ev_rename((a.weight, a.node), mapping)
        return DD(s, EV, n, w)
    return DD(s, a.flavor, s.rename(a.node, mapping))


def arith_apply(op: str, a: DD, b: DD) -> DD:
    if op not in ARITH:
        raise ValueError(f"unknown arithmetic operation {op!r}")
    a._same(b)
    s = a.store
    if a.flavor == EV:
        w, n = s.ev_apply(op, (a.weight, a.node), (b.weight, b.node))
        return DD(s, EV, n, w)
    if a.flavor != ADD:
        raise TypeError("arithmetic needs ADD or EV operands")
    return DD(s, ADD, s.arith(op, a.node, b.node))


def arith_map(op: str, a: DD) -> DD:
    s = a.store
    if a.flavor == EV:
        w, n = s.ev_map(op, (a.weight, a.node))
        return DD(s, EV, n, w)
    if a.flavor != ADD:
        raise TypeError("arithmetic needs ADD or EV operands")
    return DD(s, ADD, s.arith_map(op, a.node))


def to_add(a: DD) -> DD:
    if a.flavor == EV:
        return DD(a.store, ADD, a.store.ev_to_add((a.weight, a.node)))
    return DD(a.store, ADD, a.node)


def to_ev(a: DD) -> DD:
    s = a.store
    if a.flavor == EV:
        return a
    w, n = s.ev_from_add(a.node)
    return DD(s, EV, n, w)


def partition_terminals(a: DD) -> list[tuple[Value, DD]]:
    """Ascending (value, BDD) pairs for the finite values of an ADD."""
    if a.flavor == EV:
        a = to_add(a)
    if a.flavor != ADD:
        raise TypeError("partitioning needs an ADD")
    return [(v, DD(a.store, BDD, u)) for v, u in a.store.partition(a.node)]


def node_count(a: DD) -> int:
    if a.flavor == EV:
        return a.store.ev_node_count((a.weight, a.node))
    return a.store.node_count(a.node)


def eval_dd(a: DD, assignment: Mapping[str | int, int] | Sequence[int]) -> Value:
    if a.flavor == EV:
        return a.store.ev_eval((a.weight, a.node), assignment)
    v = a.store.eval(a.node, assignment)
    return bool(v) if a.flavor == BDD else v


def pick_state(a: DD) -> dict[str, int] | None:
    if a.flavor != BDD:
        raise TypeError("pick_state needs a BDD")
    bits = a.store.pick(a.node)
    if bits is None:
        return None
    return dict(zip(a.store.names, bits))


def to_dot(*named: tuple[str, DD]) -> str:
    if not named:
        raise ValueError("nothing to draw")
    store = named[0][1].store
    roots = {}
    for name, d in named:
        roots[name] = (d.weight, d.node) if d.flavor == EV else d.node
    return store.to_dot(roots)
