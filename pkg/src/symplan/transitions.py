"""Transition relations, cost partitioning and image computation."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass

from .dd import INF
from .encoding import Encoding
from .task import Operator, TaskError, expr_vars

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransitionRelation:
    cost: int
    node: int
    ops: tuple[str, ...]


def operator_relation(enc: Encoding, op: Operator) -> int:
    """pre over current bits, effect over successor bits, frame elsewhere."""
    s = enc.store
    node = s.conj(enc.condition(op.pre), enc.valid)
    touched = {var for var, _ in op.eff}
    for var, val in op.eff:
        node = s.conj(node, enc.fact(var, val, primed=True))
    for v in enc.task.primary:
        if v.name not in touched:
            node = s.conj(node, enc.frame(v.name))
    return node


def build_tr(enc: Encoding, op: Operator) -> list[TransitionRelation]:
    """Relations for one operator, one per distinct cost, ascending.

    Constant costs give a single relation.  State-dependent costs are
    compiled into an ADD, restricted to the states where the operator is
    applicable, and split by value.
    """
    s = enc.store
    base = operator_relation(enc, op)
    if not expr_vars(op.cost):
        c = enc.compile_expr(op.cost)
        value = s.value(c)
        if value < 0:
            raise TaskError(f"operator {op.name} has negative cost {value}")
        if base == s.false:
            log.warning("operator %s is never applicable; dropped", op.name)
            return []
        return [TransitionRelation(value, base, (op.name,))]
    cost = enc.compile_expr(op.cost)
    care = s.conj(enc.condition(op.pre), enc.valid)
    parts = s.partition(cost, care)
    if not parts:
        log.warning("operator %s is never applicable; dropped", op.name)
        return []
    out = []
    for value, cond in parts:
        if value < 0:
            raise TaskError(f"operator {op.name} has negative cost {value}")
        out.append(TransitionRelation(value, s.conj(base, cond), (op.name,)))
    return out


def build_ev_tr(enc: Encoding, op: Operator) -> tuple:
    """Edge-valued relation: the operator cost where applicable, INF elsewhere."""
    s = enc.store
    cost = enc.compile_expr(op.cost, "ev")
    return s.ev_apply("add", cost, s.ev_from_bdd(operator_relation(enc, op)))


def merge_by_cost(store, trs: list[TransitionRelation]) -> list[TransitionRelation]:
    """Disjoin relations of equal cost; the result is sorted by cost."""
    groups: dict[int, list[TransitionRelation]] = {}
    for tr in trs:
        groups.setdefault(tr.cost, []).append(tr)
    out = []
    for cost in sorted(groups):
        members = groups[cost]
        node = store.disj_all(m.node for m in members)
        out.append(TransitionRelation(cost, node, tuple(o for m in members for o in m.ops)))
    return out


class Images:
    """Image and preimage over one encoding, with timing."""

    def __init__(self, enc: Encoding):
        self.enc = enc
        self.s = enc.store
        self.time = 0.0
        self.calls = 0

    def merge(self, trs: list[TransitionRelation]) -> list[TransitionRelation]:
        return merge_by_cost(self.s, trs)

    def image(self, states: int, rel: int) -> int:
        t0 = time.perf_counter()
        s, enc = self.s, self.enc
        r = s.and_exists(states, rel, enc.unprimed)
        r = s.rename(r, enc.to_unprimed, check=False)
        self.time += time.perf_counter() - t0
        self.calls += 1
        return r

    def preimage(self, states: int, rel: int) -> int:
        t0 = time.perf_counter()
        s, enc = self.s, self.enc
        if enc.derived_levels:
            states = s.exists(states, enc.derived_levels)
        r = s.rename(states, enc.primary_to_primed, check=False)
        r = s.and_exists(r, rel, enc.primed)
        self.time += time.perf_counter() - t0
        self.calls += 1
        return r


def image(enc: Encoding, states: int, tr: TransitionRelation) -> int:
    return Images(enc).image(states, tr.node)


def preimage(enc: Encoding, states: int, tr: TransitionRelation) -> int:
    return Images(enc).preimage(states, tr.node)


__all__ = ["TransitionRelation", "build_tr", "build_ev_tr", "merge_by_cost",
           "operator_relation", "Images", "image", "preimage", "INF"]
