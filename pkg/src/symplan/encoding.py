"""Binary encoding of finite-domain variables into decision-diagram levels."""
from __future__ import annotations

from collections.abc import Iterator, Mapping

from .dd import INF, Store
from .task import Abs, Const, Expr, Task, TaskError, Var

INTERLEAVED = "interleaved"
FILE_ORDER = "file"


def bits_for(domain: int) -> int:
    # single-valued variables still get one (constant) bit
    return max(1, (domain - 1).bit_length())


class Encoding:
    """Each variable owns `bits_for(domain)` bits, most significant first.

    Every bit has an unprimed (current state) and a primed (successor state)
    copy.  With the interleaved order each primed bit directly follows its
    unprimed bit; with the file order all unprimed bits come first.
    Derived variables are encoded only when `with_derived` is set.
    """

    def __init__(self, task: Task, order: str = INTERLEAVED, with_derived: bool = False,
                 node_limit: int | None = None):
        if order not in (INTERLEAVED, FILE_ORDER):
            raise ValueError(f"unknown variable order {order!r}")
        self.task = task
        self.order = order
        self.with_derived = with_derived
        self.vars = [v for v in task.variables if with_derived or not v.derived]
        self.bits: dict[str, list[str]] = {}
        for v in self.vars:
            n = bits_for(v.domain)
            self.bits[v.name] = [f"{v.name}#{k}" for k in range(n)]
        plain = [b for v in self.vars for b in self.bits[v.name]]
        if order == INTERLEAVED:
            names = [x for b in plain for x in (b, b + "'")]
        else:
            names = plain + [b + "'" for b in plain]
        self.store = Store(names, node_limit=node_limit)
        lv = self.store.level_of
        self.unprimed = frozenset(lv[b] for b in plain)
        self.primed = frozenset(lv[b + "'"] for b in plain)
        self.to_primed = {lv[b]: lv[b + "'"] for b in plain}
        self.to_unprimed = {v: k for k, v in self.to_primed.items()}
        prim = [v for v in self.vars if not v.derived]
        self.primary_levels = frozenset(lv[b] for v in prim for b in self.bits[v.name])
        self.derived_levels = frozenset(self.unprimed - self.primary_levels)
        self.primary_primed = frozenset(self.to_primed[x] for x in self.primary_levels)
        self.derived_primed = frozenset(self.primed - self.primary_primed)
        self.primary_to_primed = {k: self.to_primed[k] for k in self.primary_levels}
        self.primary_to_unprimed = {v: k for k, v in self.primary_to_primed.items()}
        # translation of derived literals into primary formulas, when used
        self.derived_repr: dict[str, int] | None = None
        self._fact_cache: dict[tuple[str, int, bool], int] = {}
        s = self.store
        self.valid = s.conj_all(self._domain(v, False) for v in self.vars)
        self.valid_primed = s.conj_all(self._domain(v, True) for v in self.vars)

    # ------------------------------------------------------------------

    def bit_levels(self, var: str, primed: bool = False) -> list[int]:
        suffix = "'" if primed else ""
        return [self.store.level_of[b + suffix] for b in self.bits[var]]

    def fact(self, var: str, value: int, primed: bool = False) -> int:
        key = (var, value, primed)
        r = self._fact_cache.get(key)
        if r is not None:
            return r
        s = self.store
        if var not in self.bits:
            if self.derived_repr is None or var not in self.derived_repr:
                raise TaskError(f"variable {var} is not encoded")
            if primed:
                raise TaskError("primed derived literals need derived bits")
            base = self.derived_repr[var]
            r = base if value == 1 else s.neg(base)
        else:
            levels = self.bit_levels(var, primed)
            n = len(levels)
            r = s.true
            for k, lv in enumerate(levels):
                bit = (value >> (n - 1 - k)) & 1
                r = s.conj(r, s.literal(lv, bool(bit)))
        self._fact_cache[key] = r
        return r

    def _domain(self, v, primed: bool) -> int:
        s = self.store
        if v.domain == 1 << len(self.bits[v.name]):
            return s.true
        return s.disj_all(self.fact(v.name, d, primed) for d in range(v.domain))

    def condition(self, facts) -> int:
        s = self.store
        items = facts.items() if isinstance(facts, Mapping) else facts
        return s.conj_all(self.fact(var, val) for var, val in items)

    def state(self, state: Mapping[str, int]) -> int:
        return self.condition((v.name, state[v.name]) for v in self.vars)

    def frame(self, var: str) -> int:
        s = self.store
        r = s.true
        for lv in self.bit_levels(var):
            r = s.conj(r, s.iff(s.literal(lv), s.literal(self.to_primed[lv])))
        return r

    def decode(self, bits: tuple[int, ...]) -> dict[str, int]:
        out = {}
        for v in self.vars:
            val = 0
            for lv in self.bit_levels(v.name):
                val = (val << 1) | bits[lv]
            out[v.name] = val
        return out

    def pick(self, node: int) -> dict[str, int] | None:
        bits = self.store.pick(node)
        return None if bits is None else self.decode(bits)

    def iter_states(self, node: int) -> Iterator[dict[str, int]]:
        """Decode every state of a set over unprimed bits, skipping invalid codes."""
        s = self.store
        levels = sorted(self.unprimed)
        full = [0] * s.nvars
        for bits in s.iter_sat(s.conj(node, self.valid), levels):
            for lv, b in zip(levels, bits):
                full[lv] = b
            yield self.decode(tuple(full))

    def count(self, node: int) -> int:
        return self.store.sat_count(self.store.conj(node, self.valid), sorted(self.unprimed))

    # ------------------------------------------------------------------

    def compile_expr(self, expr: Expr, flavor: str = "add"):
        """Compile an expression into an ADD node or an EV (weight, node) pair."""
        s = self.store
        ev = flavor == "ev"
        if flavor not in ("add", "ev"):
            raise ValueError(f"unknown flavor {flavor!r}")

        def const(c):
            return s.ev_const(c) if ev else s.constant(c)

        def op(name, a, b):
            return s.ev_apply(name, a, b) if ev else s.arith(name, a, b)

        def leaf(name):
            if name in self.bits:
                levels = self.bit_levels(name)
                acc = const(0)
                n = len(levels)
                for k, lv in enumerate(levels):
                    bit = s.ev_literal(lv) if ev else s.literal(lv)
                    w = 1 << (n - 1 - k)
                    acc = op("add", acc, op("mul", const(w), bit) if w != 1 else bit)
                return acc
            if self.derived_repr is not None and name in self.derived_repr:
                node = self.derived_repr[name]
                if ev:
                    # 0 outside, 1 inside: min(indicator-as-EV, 1 everywhere)
                    inside = s.ev_from_bdd(node, 1)
                    outside = s.ev_from_bdd(s.neg(node), 0)
                    return s.ev_apply("min", inside, outside)
                return node
            raise TaskError(f"variable {name} is not encoded")

        def rec(e):
            if isinstance(e, Const):
                return const(e.value)
            if isinstance(e, Var):
                return leaf(e.name)
            if isinstance(e, Abs):
                a = rec(e.arg)
                return s.ev_map("abs", a) if ev else s.arith_map("abs", a)
            name = {"+": "add", "-": "sub", "*": "mul"}[e.op]
            return op(name, rec(e.left), rec(e.right))

        return rec(expr)


__all__ = ["Encoding", "INTERLEAVED", "FILE_ORDER", "bits_for", "INF"]
