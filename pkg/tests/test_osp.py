import pytest

from symplan.fixtures import load_fixture
from symplan.oracle import ExplicitSpace, oracle_osp, random_task
from symplan.osp import ADD_REPR, BDD_REPR, UtilityFunction, bounded_utility_check, osp_search
from symplan.symbolic import SymbolicTask
from symplan.task import TaskError, Task, Variable, parse_expr, states, utility_of, validate_plan


@pytest.mark.parametrize("repr_", [BDD_REPR, ADD_REPR])
def test_worked_example(repr_):
    t = load_fixture("osp_example")
    r = osp_search(SymbolicTask(t), repr_)
    assert (r.plan.utility, r.plan.cost) == (2, 1)
    assert validate_plan(t, r.plan)
    assert r.stats["max_utility"] == 3


@pytest.mark.parametrize("repr_", [BDD_REPR, ADD_REPR])
def test_random_tasks_agree_with_oracle(repr_):
    for seed in range(120):
        t = random_task(seed, "osp")
        o = oracle_osp(t)
        r = osp_search(SymbolicTask(t), repr_)
        want = None if o is None else (o.utility, o.cost)
        got = None if r.plan is None else (r.plan.utility, r.plan.cost)
        assert got == want, seed
        if r.plan is not None:
            assert validate_plan(t, r.plan)
            assert r.plan.cost <= t.bound


def test_utility_representations_agree():
    for seed in range(40):
        t = random_task(seed, "osp")
        st = SymbolicTask(t)
        by_bdd, by_add = UtilityFunction(st, BDD_REPR), UtilityFunction(st, ADD_REPR)
        assert by_bdd.max == by_add.max == max(utility_of(t, s) for s in states(t))
        for s in list(states(t))[:20]:
            cube = st.enc.state(s)
            assert by_bdd.best(cube)[0] == by_add.best(cube)[0] == utility_of(t, s)


def test_bounded_utility_check():
    t = load_fixture("osp_example")
    st = SymbolicTask(t)
    assert bounded_utility_check(st, 2)
    assert not bounded_utility_check(st, 3)


def test_negative_utility_rejected():
    t = Task([Variable("x", 2)], {"x": 0}, {}, [], utility=parse_expr("x - 1"))
    with pytest.raises(TaskError):
        UtilityFunction(SymbolicTask(t))


def test_unknown_representation():
    with pytest.raises(ValueError):
        UtilityFunction(SymbolicTask(load_fixture("osp_example")), "table")


def test_oracle_reaches_reported_state():
    # the explicit state at the end of the plan carries the reported utility
    for seed in range(30):
        t = random_task(seed, "osp")
        r = osp_search(SymbolicTask(t))
        if r.plan is None:
            continue
        sp = ExplicitSpace(t)
        s = sp.init
        for name in r.plan.ops:
            s = next(nx for n, _, nx in sp.successors(s) if n == name)
        assert sp.utility(s) == r.plan.utility
