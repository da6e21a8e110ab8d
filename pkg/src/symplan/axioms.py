"""Derived variables in symbolic search.

Three ways to deal with axioms:

``o-based``
    derived bits are part of the search state; after every image they are
    reset and recomputed layer by layer with one relation per rule, iterated
    until nothing changes.
``v-based``
    derived bits are part of the search state; after every image they are
    fixed by conjoining ``d <-> S_d`` where ``S_d`` is the primary
    representation of ``d``.
``translate``
    no derived bits at all; every derived literal in a precondition, the
    goal or an expression is replaced by ``S_d`` (or its negation).

Only ``translate`` supports regression, since the other two expand states
forward from primary successors.
"""
from __future__ import annotations

from .encoding import Encoding
from .task import Axiom, Literal, Task, evaluate_axioms

O_BASED = "o-based"
V_BASED = "v-based"
TRANSLATE = "translate"
MODES = (O_BASED, V_BASED, TRANSLATE)

__all__ = ["evaluate_axioms", "primary_representation", "build_axiom_trs",
           "OBasedExpander", "VBasedExpander", "MODES", "O_BASED", "V_BASED", "TRANSLATE"]


def _rules_by_layer(task: Task) -> dict[int, list[Axiom]]:
    out: dict[int, list[Axiom]] = {}
    for ax in task.axioms:
        out.setdefault(task.var(ax.head).layer, []).append(ax)
    return dict(sorted(out.items()))


def primary_representation(enc: Encoding, task: Task) -> dict[str, int]:
    """For each derived variable, the set of primary states making it true."""
    s = enc.store
    rep: dict[str, int] = {v.name: s.false for v in task.derived}

    def lit(l: Literal) -> int:
        if task.var(l.var).derived:
            node = rep[l.var] if l.value == 1 else s.neg(rep[l.var])
        else:
            node = enc.fact(l.var, l.value)
        return s.neg(node) if l.negated else node

    for layer, rules in _rules_by_layer(task).items():
        changed = True
        while changed:
            changed = False
            for ax in rules:
                body = s.conj_all(lit(l) for l in ax.body)
                new = s.disj(rep[ax.head], body)
                if new != rep[ax.head]:
                    rep[ax.head] = new
                    changed = True
    return rep


def build_axiom_trs(enc: Encoding, task: Task) -> dict[int, list[int]]:
    """Per layer, one relation per rule: head' = head | body, all else framed."""
    if not enc.with_derived:
        raise ValueError("axiom relations need an encoding with derived bits")
    s = enc.store
    out: dict[int, list[int]] = {}
    frames = {v.name: enc.frame(v.name) for v in enc.vars}
    for layer, rules in _rules_by_layer(task).items():
        rels = []
        for ax in rules:
            body = s.true
            for l in ax.body:
                node = enc.fact(l.var, l.value)
                body = s.conj(body, s.neg(node) if l.negated else node)
            head, head_p = enc.fact(ax.head, 1), enc.fact(ax.head, 1, primed=True)
            rel = s.iff(head_p, s.disj(head, body))
            for name, fr in frames.items():
                if name != ax.head:
                    rel = s.conj(rel, fr)
            rels.append(rel)
        out[layer] = rels
    return out


class OBasedExpander:
    """Recompute derived bits of a set of states by firing rules to a fixpoint.

    Firing rule `head <- body` on S is the image of S under its relation from
    build_axiom_trs.  With `use_relations` off (the default) the same image is
    computed directly: states where the body holds and the head is false get
    the head set, the rest stay as they are.
    """

    def __init__(self, enc: Encoding, task: Task, images, use_relations: bool = False):
        self.enc = enc
        self.images = images
        self.use_relations = use_relations
        s = enc.store
        self.all_false = s.conj_all(enc.fact(v.name, 0) for v in task.derived)
        if use_relations:
            self.layers = build_axiom_trs(enc, task)
        else:
            self.layers = {}
            for layer, rules in _rules_by_layer(task).items():
                fired = []
                for ax in rules:
                    body = s.true
                    for l in ax.body:
                        node = enc.fact(l.var, l.value)
                        body = s.conj(body, s.neg(node) if l.negated else node)
                    head = enc.fact(ax.head, 1)
                    fired.append((head, s.conj(s.neg(head), body), enc.bit_levels(ax.head)))
                self.layers[layer] = fired

    def _fire(self, states: int, rule) -> int:
        s = self.enc.store
        if self.use_relations:
            return self.images.image(states, rule)
        head, trigger, levels = rule
        hit = s.conj(states, trigger)
        if hit == s.false:
            return states
        return s.disj(s.diff(states, trigger), s.conj(s.exists(hit, levels), head))

    def __call__(self, states: int) -> int:
        s, enc = self.enc.store, self.enc
        cur = s.conj(s.exists(states, enc.derived_levels), self.all_false)
        for rules in self.layers.values():
            while True:
                prev = cur
                for rule in rules:
                    cur = self._fire(cur, rule)
                if cur == prev:
                    break
        return cur


class VBasedExpander:
    """Fix derived bits by conjoining d <-> S_d."""

    def __init__(self, enc: Encoding, task: Task):
        s = enc.store
        self.enc = enc
        rep = primary_representation(enc, task)
        self.constraint = s.conj_all(s.iff(enc.fact(d, 1), node) for d, node in rep.items())

    def __call__(self, states: int) -> int:
        s, enc = self.enc.store, self.enc
        return s.conj(s.exists(states, enc.derived_levels), self.constraint)
