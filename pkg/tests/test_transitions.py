import itertools
import logging
import random

import pytest

from symplan.encoding import FILE_ORDER, INTERLEAVED, Encoding, bits_for
from symplan.fixtures import load_fixture
from symplan.oracle import ExplicitSpace, _random_expr, random_task
from symplan.symbolic import SymbolicTask
from symplan.task import (INF, Operator, Task, TaskError, Variable, eval_expr, parse_expr,
                          states)
from symplan.transitions import build_ev_tr, build_tr, merge_by_cost


def test_bits_per_variable():
    assert [bits_for(d) for d in (1, 2, 3, 4, 5, 8, 9)] == [1, 1, 2, 2, 3, 3, 4]


@pytest.mark.parametrize("order", [INTERLEAVED, FILE_ORDER])
def test_bit_layout(order):
    t = Task([Variable("a", 3), Variable("b", 2)], {"a": 0, "b": 0}, {}, [])
    enc = Encoding(t, order)
    names = list(enc.store.names)
    if order == INTERLEAVED:
        assert names == ["a#0", "a#0'", "a#1", "a#1'", "b#0", "b#0'"]
    else:
        assert names == ["a#0", "a#1", "b#0", "a#0'", "a#1'", "b#0'"]
    # value 3 of a is not a valid code
    assert enc.count(enc.store.true) == 3 * 2


def _space_task(seed):
    rng = random.Random(seed)
    variables = [Variable(f"v{i}", rng.randint(1, 3)) for i in range(rng.randint(1, 4))]
    init = {v.name: 0 for v in variables}
    return Task(variables, init, {}, []), rng


@pytest.mark.parametrize("flavor", ["add", "ev"])
def test_compile_matches_eval_exhaustively(flavor):
    for seed in range(60):
        t, rng = _space_task(seed)
        enc = Encoding(t)
        s = enc.store
        for _ in range(3):
            e = _random_expr(rng, [v.name for v in t.variables], 3)
            c = enc.compile_expr(e, flavor)
            for st in states(t):
                want = eval_expr(e, st)
                bits = {}
                for v in t.variables:
                    for k, lv in enumerate(enc.bit_levels(v.name)):
                        n = len(enc.bit_levels(v.name))
                        bits[lv] = st[v.name] >> (n - 1 - k) & 1
                got = s.ev_eval(c, bits) if flavor == "ev" else s.eval(c, bits)
                assert got == want, (e, st)


def test_compile_constant():
    t = Task([Variable("x", 2)], {"x": 0}, {}, [])
    enc = Encoding(t)
    c = enc.compile_expr(parse_expr("7"))
    assert enc.store.node_count(c) == 1
    assert enc.compile_expr(parse_expr("7"), "ev") == (7, 0)


def test_worked_example_compiles_to_known_sizes():
    t = load_fixture("osp_example")
    enc = Encoding(t)
    s = enc.store
    assert s.node_count(enc.compile_expr(t.utility)) == 5
    assert s.ev_node_count(enc.compile_expr(t.utility, "ev")) == 3


def test_sdac_operator_splits_into_two_relations():
    t = load_fixture("sdac_operator")
    enc = Encoding(t)
    s = enc.store
    trs = build_tr(enc, t.operators[0])
    assert [tr.cost for tr in trs] == [1, 6]
    x0, x1p = enc.fact("x", 0), enc.fact("x", 1, primed=True)
    y0, y1 = enc.fact("y", 0), enc.fact("y", 1)
    frame_y = enc.frame("y")
    assert trs[0].node == s.conj_all([x0, x1p, y0, frame_y])
    assert trs[1].node == s.conj_all([x0, x1p, y1, frame_y])


@pytest.mark.parametrize("cost", ["1", "y + 1"])
def test_never_applicable_operator_dropped(caplog, cost):
    t = Task([Variable("x", 2), Variable("y", 2)], {"x": 0, "y": 0}, {}, [])
    never = Operator("never", (("x", 1), ("x", 0)), (), parse_expr(cost))
    with caplog.at_level(logging.WARNING):
        assert build_tr(Encoding(t), never) == []
    assert "never applicable" in caplog.text


def test_negative_state_dependent_cost_raises():
    t = Task([Variable("x", 2)], {"x": 0}, {},
             [Operator("o", (), (("x", 1),), parse_expr("x - 1"))])
    with pytest.raises(TaskError, match="negative cost"):
        build_tr(Encoding(t), t.operators[0])


def test_merge_by_cost():
    t = load_fixture("gripper")
    enc = Encoding(t)
    trs = [tr for op in t.operators for tr in build_tr(enc, op)]
    merged = merge_by_cost(enc.store, trs)
    assert len(merged) == 1 and merged[0].cost == 1
    assert set(merged[0].ops) == {"pick-up", "drop", "move"}
    assert merged[0].node == enc.store.disj_all(tr.node for tr in trs)


def test_ev_relation_agrees_with_partitioned_relations():
    t = load_fixture("sdac_operator")
    enc = Encoding(t)
    s = enc.store
    op = t.operators[0]
    ev = build_ev_tr(enc, op)
    trs = build_tr(enc, op)
    for bits in itertools.product((0, 1), repeat=s.nvars):
        want = INF
        for tr in trs:
            if s.eval(tr.node, bits):
                want = tr.cost
        assert s.ev_eval(ev, bits) == want


@pytest.mark.parametrize("order", [INTERLEAVED, FILE_ORDER])
@pytest.mark.parametrize("profile", ["plain", "sdac"])
def test_image_and_preimage_match_explicit_successors(order, profile):
    for seed in range(40):
        t = random_task(seed, profile)
        st = SymbolicTask(t, order=order)
        enc, s = st.enc, st.store
        sp = ExplicitSpace(t)
        for state in list(states(t))[:30]:
            cube = enc.state(state)
            key = tuple(state[v.name] for v in t.primary)
            want = {}
            for name, cost, succ in sp.successors(key):
                want.setdefault(cost, set()).add(succ)
            got = {}
            for tr in st.trs:
                img = st.image(cube, tr.node)
                found = {tuple(d[v.name] for v in t.primary) for d in enc.iter_states(img)}
                if found:
                    got.setdefault(tr.cost, set()).update(found)
            assert got == want, (seed, state)
            # preimage: each successor leads back to this state
            for cost, succs in want.items():
                rel = s.disj_all(tr.node for tr in st.trs if tr.cost == cost)
                for succ in succs:
                    back = st.preimage(enc.state(dict(zip([v.name for v in t.primary], succ))), rel)
                    assert s.conj(back, cube) != s.false
