import random
from collections import deque

import pytest

from symplan.axioms import (O_BASED, TRANSLATE, V_BASED, OBasedExpander,
                            build_axiom_trs, primary_representation)
from symplan.fixtures import (DESTINATION, free_cells, mars_rover_axioms, two_cell_reachability,
                              _neighbours)
from symplan.oracle import oracle_optimal, random_task
from symplan.search import search
from symplan.symbolic import SymbolicTask
from symplan.task import Plan, TaskError, evaluate_axioms, states, validate_plan


def reference_extension(task, state):
    """Naive stratified evaluation: recompute every rule of a layer from
    scratch until the derived values stop changing."""
    ext = dict(state)
    for v in task.derived:
        ext[v.name] = 0
    for layer in sorted({v.layer for v in task.derived}):
        rules = [a for a in task.axioms if task.var(a.head).layer == layer]
        while True:
            fired = {a.head for a in rules
                     if all((ext[l.var] == l.value) != l.negated for l in a.body)}
            new = dict(ext)
            for h in fired:
                new[h] = 1
            if new == ext:
                break
            ext = new
    return ext


def test_evaluate_axioms_matches_reference_on_random_states():
    rng = random.Random(3)
    checked = 0
    seed = 0
    while checked < 500:
        t = random_task(seed, "axioms")
        seed += 1
        all_states = list(states(t))
        for st in rng.sample(all_states, min(10, len(all_states))):
            assert evaluate_axioms(t, st) == reference_extension(t, st)
            checked += 1


def test_two_cell_example():
    t = two_cell_reachability()
    assert evaluate_axioms(t, {"rover": 0}) == {"rover": 0, "reachable0": 1, "reachable1": 1}


def test_single_rule_relation_shape():
    from symplan.encoding import Encoding
    from symplan.task import Axiom, Literal, Task, Variable
    t = Task([Variable("x", 2), Variable("d", 2, 1)], {"x": 0}, {}, [],
             [Axiom("d", (Literal("x"),))])
    enc = Encoding(t, with_derived=True)
    s = enc.store
    (rels,) = build_axiom_trs(enc, t).values()
    x, d, dp = enc.fact("x", 1), enc.fact("d", 1), enc.fact("d", 1, primed=True)
    assert rels == [s.conj(s.iff(dp, s.disj(d, x)), enc.frame("x"))]


def test_relations_and_direct_firing_agree():
    for seed in range(60):
        t = random_task(seed, "axioms")
        st = SymbolicTask(t, axioms=O_BASED)
        rel = OBasedExpander(st.enc, t, st.images, use_relations=True)
        assert rel(st.valid) == st.expand(st.valid)


def test_two_rule_layer_fixpoint_from_start():
    t = two_cell_reachability()
    st = SymbolicTask(t, axioms=O_BASED)
    rel = OBasedExpander(st.enc, t, st.images, use_relations=True)
    got = st.enc.pick(rel(st.init))
    assert got == {"rover": 0, "reachable0": 1, "reachable1": 1}


@pytest.mark.parametrize("mode", [O_BASED, V_BASED])
def test_symbolic_expansion_matches_explicit(mode):
    for seed in range(40):
        t = random_task(seed, "axioms")
        st = SymbolicTask(t, axioms=mode)
        enc = st.enc
        got = {tuple(sorted(d.items())) for d in enc.iter_states(st.expand(st.valid))}
        want = {tuple(sorted(evaluate_axioms(t, s).items())) for s in states(t)}
        assert got == want
        # a single state keeps its own extension
        s0 = next(iter(states(t)))
        single = enc.condition(s0.items())
        assert enc.pick(st.expand(single)) == evaluate_axioms(t, s0)


def test_primary_representation_matches_explicit():
    for seed in range(40):
        t = random_task(seed, "axioms")
        st = SymbolicTask(t)
        rep = st.enc.derived_repr
        for s in states(t):
            ext = evaluate_axioms(t, s)
            cube = st.enc.condition(s.items())
            for d, node in rep.items():
                assert (st.store.conj(cube, node) != st.store.false) == bool(ext[d])


def _component(start):
    seen = {start}
    todo = deque([start])
    while todo:
        c = todo.popleft()
        for n in _neighbours(c):
            if n not in seen:
                seen.add(n)
                todo.append(n)
    return seen


def test_rover_reachability_representation():
    t = mars_rover_axioms()
    st = SymbolicTask(t)
    enc, s = st.enc, st.store
    rep = primary_representation(enc, t)[f"reachable-{DESTINATION[0]}-{DESTINATION[1]}"]
    for cell in free_cells():
        at = s.conj(enc.fact("rx", cell[0]), enc.fact("ry", cell[1]))
        assert (s.conj(at, rep) != s.false) == (DESTINATION in _component(cell))


def test_rover_positions_carry_their_own_closure():
    t = mars_rover_axioms()
    st = SymbolicTask(t, axioms=V_BASED)
    enc, s = st.enc, st.store
    rest = enc.condition({"flying": 0, "dx": 0, "dy": 0, "image0": 0, "image1": 0}.items())
    positions = s.disj_all(s.conj(enc.fact("rx", x), enc.fact("ry", y)) for x, y in free_cells())
    expanded = st.expand(s.conj(positions, rest))
    count = 0
    for d in enc.iter_states(expanded):
        prim = {v.name: d[v.name] for v in t.primary}
        assert d == evaluate_axioms(t, prim)
        count += 1
    assert count == len(free_cells())


@pytest.mark.parametrize("seed", range(0, 200, 5))
def test_encodings_agree_with_oracle(seed):
    t = random_task(seed, "axioms")
    o = oracle_optimal(t)
    want = None if o is None else o.cost
    for mode in (O_BASED, V_BASED, TRANSLATE):
        r = search(SymbolicTask(t, axioms=mode), "fwd")
        assert r.cost == want, mode
        if r.plan is not None:
            assert validate_plan(t, r.plan)
    assert search(SymbolicTask(t), "bid").cost == want


def test_backward_needs_translation():
    t = two_cell_reachability()
    with pytest.raises(TaskError):
        search(SymbolicTask(t, axioms=O_BASED), "bwd")
    assert search(SymbolicTask(t), "bwd").cost == 0


def test_rover_with_axioms_shortens_plans():
    t = mars_rover_axioms()
    listed = Plan(("navigate-7-1", "launch-7-1", "fly-to-6-1", "take-image-6-1", "fly-to-10-1",
                   "take-image-10-1", "fly-to-7-1", "land-7-1", "navigate-0-5"), 22)
    assert validate_plan(t, listed)
    for mode in (TRANSLATE, V_BASED):
        r = search(SymbolicTask(t, axioms=mode), "fwd")
        assert r.cost == 22
        assert validate_plan(t, r.plan)
        assert len(r.plan.ops) <= 10
