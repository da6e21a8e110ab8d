import random

import pytest
from hypothesis import given, settings, strategies as st

from symplan.fixtures import fixture_names, fixture_text, load_fixture, mars_rover
from symplan.task import (INF, Abs, Axiom, BinOp, Const, Literal, Operator, Plan, Task, TaskError,
                          Var, Variable, apply_op, eval_expr, evaluate_axioms, expr_depth,
                          format_expr, format_plan, parse_expr, parse_plan, parse_task,
                          replay, serialize_task, utility_of, op_cost, validate_plan)

GRIPPER = fixture_text("gripper")


def test_gripper_fixture():
    t = parse_task(GRIPPER)
    assert {o.name for o in t.operators} == {"pick-up", "drop", "move"}
    assert all(o.cost == Const(1) for o in t.operators)
    assert t.init == {"robot": 0, "holding": 0}
    assert t.bound == INF


def test_osp_fixture():
    t = load_fixture("osp_example")
    assert t.goal == {}
    assert t.bound == 1
    assert t.utility == parse_expr("2 * x + x * y")


def test_derived_variable_in_effect_rejected():
    text = """version 1
metric general
vars 2
x 2 primary
d 2 derived 1
init 0 0
goal 0
bound inf
ops 1
op bad
pre 0
eff 1
d 1
cost 1
axioms 1
d <- x
"""
    with pytest.raises(TaskError, match="derived variable in effect"):
        parse_task(text)


def test_syntax_error_has_line_number():
    broken = GRIPPER.replace("holding 2 primary", "holding two primary")
    want = broken.splitlines().index("holding two primary") + 1
    with pytest.raises(TaskError) as exc:
        parse_task(broken)
    assert exc.value.line == want
    assert str(exc.value).startswith(f"line {want}:")


def test_unit_metric_rejects_other_costs():
    with pytest.raises(TaskError, match="unit metric"):
        parse_task(GRIPPER.replace("cost 1\nop move", "cost 2\nop move"))


def test_eval_examples():
    e = parse_expr("2 * x + x * y")
    assert eval_expr(e, {"x": 1, "y": 1}) == 3
    assert eval_expr(parse_expr("abs(0 - 5)"), {}) == 5
    fly = parse_expr("abs(dx - 7) + abs(dy - 1)")
    assert eval_expr(fly, {"dx": 10, "dy": 1}) == 3


def test_precedence_and_associativity():
    assert eval_expr(parse_expr("2 + 3 * 4"), {}) == 14
    assert eval_expr(parse_expr("10 - 3 - 2"), {}) == 5
    assert eval_expr(parse_expr("(10 - 3) * -2"), {}) == -14
    with pytest.raises(TaskError):
        parse_expr("2 +")
    with pytest.raises(TaskError):
        parse_expr("2 3")
    with pytest.raises(TaskError):
        parse_expr("2 / 3")


def test_negative_cost_is_an_error():
    op = Operator("o", (), (), parse_expr("x - 2"))
    assert op_cost(op, {"x": 3}) == 1
    with pytest.raises(TaskError):
        op_cost(op, {"x": 0})


names = st.sampled_from(["x", "y", "z", "dx"])
exprs = st.recursive(
    st.one_of(st.integers(-9, 40).map(Const), names.map(Var)),
    lambda inner: st.one_of(
        st.tuples(st.sampled_from("+-*"), inner, inner).map(lambda t: BinOp(*t)),
        inner.map(Abs)),
    max_leaves=10)


@settings(max_examples=300, deadline=None)
@given(exprs, st.fixed_dictionaries({n: st.integers(0, 4) for n in ["x", "y", "z", "dx"]}))
def test_expression_round_trip(e, env):
    back = parse_expr(format_expr(e))
    assert back == e
    assert eval_expr(back, env) == eval_expr(e, env)


def test_expr_depth():
    assert expr_depth(parse_expr("x")) == 0
    assert expr_depth(parse_expr("abs(x - 1) * 2")) == 3


@pytest.mark.parametrize("name", fixture_names())
def test_parse_serialize_parse_identity(name):
    t = load_fixture(name)
    once = parse_task(serialize_task(t))
    assert once == t
    assert parse_task(serialize_task(once)) == once


def test_generated_fixture_round_trip():
    t = mars_rover()
    assert parse_task(serialize_task(t)) == t


def test_apply_operator():
    t = parse_task(GRIPPER)
    s0 = dict(t.init)
    s1 = apply_op(t, t.op("pick-up"), s0)
    assert s1 == {"robot": 0, "holding": 1}
    noop = Operator("noop", (), ())
    assert apply_op(t, noop, s1) == s1


def test_plan_replay_and_validation():
    t = parse_task(GRIPPER)
    plan = Plan(("pick-up", "move", "drop"), 3)
    assert validate_plan(t, plan)
    assert not validate_plan(t, Plan(("pick-up", "move", "drop"), 4))
    assert not validate_plan(t, Plan(("move",), 1))
    assert not validate_plan(t, Plan(("pick-up", "move"), 2))
    assert replay(t, ["pick-up"]) == ({"robot": 0, "holding": 1}, 1)


def test_plan_file_round_trip():
    p = Plan(("a", "b-c"), 7, 3)
    assert parse_plan(format_plan(p)) == p
    assert parse_plan(format_plan(Plan((), 0))) == Plan((), 0)


def test_two_cell_reachability_semantics():
    from symplan.fixtures import two_cell_reachability
    t = two_cell_reachability()
    ext = evaluate_axioms(t, {"rover": 0})
    assert ext["reachable0"] == 1 and ext["reachable1"] == 1


def test_no_axioms_extension_is_identity():
    t = parse_task(GRIPPER)
    assert evaluate_axioms(t, {"robot": 1, "holding": 0}) == {"robot": 1, "holding": 0}


def test_utility_negative_rejected():
    t = Task([Variable("x", 2)], {"x": 0}, {}, [], utility=parse_expr("x - 1"))
    with pytest.raises(TaskError):
        utility_of(t, {"x": 0})


# stratification against a literal reading of the two layering conditions


def _stratified_by_definition(task: Task) -> bool:
    for ax in task.axioms:
        head_layer = task.var(ax.head).layer
        for lit in ax.body:
            v = task.var(lit.var)
            if not v.derived:
                continue
            positive = (not lit.negated) and lit.value == 1
            if positive and v.layer > head_layer:
                return False
            if not positive and v.layer >= head_layer:
                return False
    return True


def test_stratification_matches_definition():
    rng = random.Random(7)
    for _ in range(400):
        prim = [Variable("p", 2)]
        derived = [Variable(f"d{i}", 2, rng.randint(0, 2)) for i in range(3)]
        axioms = []
        for _ in range(rng.randint(1, 4)):
            head = rng.choice(derived).name
            body = []
            for _ in range(rng.randint(0, 2)):
                v = rng.choice(prim + derived)
                if rng.random() < 0.5:
                    body.append(Literal(v.name, 1, True))
                elif rng.random() < 0.5:
                    body.append(Literal(v.name, 0))
                else:
                    body.append(Literal(v.name))
            axioms.append(Axiom(head, tuple(body)))
        task = Task(prim + derived, {"p": 0}, {}, [], axioms)
        try:
            task.validate()
            ok = True
        except TaskError:
            ok = False
        assert ok == _stratified_by_definition(task), axioms


def test_axiom_literal_syntax_round_trip():
    text = """version 1
metric general
vars 3
pos 3 primary
near 2 derived 1
far 2 derived 2
init 0 0 0
goal 1
far 1
bound 5
ops 1
op step
pre 1
pos 0
eff 1
pos 1
cost abs(pos - 2)
axioms 2
near <- pos=1
far <- !near
"""
    t = parse_task(text)
    assert t.axioms[0].body == (Literal("pos", 1),)
    assert t.axioms[1].body == (Literal("near", 1, True),)
    assert parse_task(serialize_task(t)) == t
    assert evaluate_axioms(t, {"pos": 0}) == {"pos": 0, "near": 0, "far": 1}
    assert evaluate_axioms(t, {"pos": 1}) == {"pos": 1, "near": 1, "far": 0}
