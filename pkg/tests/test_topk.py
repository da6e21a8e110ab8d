import pytest

from symplan.dd import INF
from symplan.fixtures import load_fixture
from symplan.oracle import has_zero_cost_cycle, oracle_topk, oracle_topk_osp, random_task
from symplan.search import BID, BWD, FWD
from symplan.symbolic import SymbolicTask
from symplan.task import Const, Operator, Task, TaskError, Variable, validate_plan
from symplan.topk import topk_osp, topk_search


def assert_same_ranking(task, got, want):
    """Equal cost lists, distinct valid plans, and identical plan sets for
    every cost below the last one (ties at the last cost may be cut anywhere)."""
    assert [p.cost for p in got] == [p.cost for p in want]
    assert len({p.ops for p in got}) == len(got)
    for p in got:
        assert validate_plan(task, p), p
    if want:
        last = want[-1].cost
        assert {p.ops for p in got if p.cost < last} == {p.ops for p in want if p.cost < last}


@pytest.mark.parametrize("direction", [FWD, BWD, BID])
def test_gripper_four_cheapest(direction):
    t = load_fixture("gripper")
    r = topk_search(SymbolicTask(t), 4, direction)
    assert [p.cost for p in r.plans] == [3, 5, 5, 7]
    assert_same_ranking(t, r.plans, oracle_topk(t, 4))
    assert r.plans[0].ops == ("pick-up", "move", "drop")
    assert r.stats["plans_found"] == 4


def test_closing_expanded_states_loses_plans():
    t = load_fixture("gripper")
    closed = topk_search(SymbolicTask(t), 4, FWD, close=True)
    assert len(closed.plans) < 4
    assert len(topk_search(SymbolicTask(t), 4, FWD).plans) == 4


@pytest.mark.parametrize("profile", ["plain", "sdac", "axioms"])
@pytest.mark.parametrize("direction", [FWD, BWD, BID])
def test_random_tasks_agree_with_oracle(profile, direction):
    for seed in range(40):
        t = random_task(seed, profile)
        k = 1 + seed % 12
        want = oracle_topk(t, k)
        got = topk_search(SymbolicTask(t), k, direction).plans
        assert_same_ranking(t, got, want)


def test_large_k():
    for seed in range(0, 60, 3):
        t = random_task(seed, "sdac")
        assert_same_ranking(t, topk_search(SymbolicTask(t), 50, BID).plans, oracle_topk(t, 50))


def test_prefix_property():
    for seed in range(30):
        t = random_task(seed, "plain")
        small = [p.cost for p in topk_search(SymbolicTask(t), 3).plans]
        large = [p.cost for p in topk_search(SymbolicTask(t), 9).plans]
        assert large[:len(small)] == small


def test_all_plans_when_finite():
    checked = 0
    for seed in range(200):
        t = random_task(seed, "plain")
        t.bound = 6
        if has_zero_cost_cycle(t):
            continue
        assert_same_ranking(t, topk_search(SymbolicTask(t), INF).plans, oracle_topk(t, INF))
        checked += 1
        if checked == 15:
            break
    assert checked == 15


def test_zero_cost_cycle_needs_finite_k():
    t = Task([Variable("x", 2)], {"x": 0}, {"x": 1},
             [Operator("flip-on", (("x", 0),), (("x", 1),), Const(0)),
              Operator("flip-off", (("x", 1),), (("x", 0),), Const(0))])
    with pytest.raises(TaskError):
        topk_search(SymbolicTask(t), INF)
    got = topk_search(SymbolicTask(t), 3).plans
    assert [len(p.ops) for p in got] == [1, 3, 5]
    assert all(p.cost == 0 for p in got)


def test_ranking_by_utility_worked_example():
    t = load_fixture("osp_example")
    r = topk_osp(SymbolicTask(t), 2)
    assert [(p.ops, p.cost, p.utility) for p in r.plans] == [(("o2",), 1, 2), ((), 0, 0)]


@pytest.mark.parametrize("repr_", ["bdd", "add"])
def test_ranking_by_utility_agrees_with_oracle(repr_):
    checked = 0
    for seed in range(80):
        t = random_task(seed, "osp")
        if has_zero_cost_cycle(t):
            continue  # the explicit enumeration would not terminate
        checked += 1
        k = 1 + seed % 6
        want = oracle_topk_osp(t, k)
        got = topk_osp(SymbolicTask(t), k, repr_).plans
        assert [(p.utility, p.cost) for p in got] == [(p.utility, p.cost) for p in want], seed
        for p in got:
            assert validate_plan(t, p)
    assert checked >= 50


def test_ranking_by_utility_needs_bound():
    with pytest.raises(TaskError):
        topk_osp(SymbolicTask(load_fixture("gripper")), 2)
