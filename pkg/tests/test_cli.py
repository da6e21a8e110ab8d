import json

import pytest

from symplan import cli
from symplan.dd import NODE_LIMIT_ENV
from symplan.fixtures import load_fixture
from symplan.task import Plan, parse_plan, serialize_task, validate_plan


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(NODE_LIMIT_ENV, raising=False)
    return tmp_path


def test_solve_writes_plan_and_stats(in_tmp):
    assert cli.main(["solve", "fixture:gripper", "--oracle", "--stats", "stats.json"]) == cli.OK
    plan = parse_plan((in_tmp / "sas_plan").read_text())
    assert plan.cost == 3 and validate_plan(load_fixture("gripper"), plan)
    stats = json.loads((in_tmp / "stats.json").read_text())
    assert stats["plan_cost"] == 3 and stats["mode"] == "ucs-bid"


@pytest.mark.parametrize("direction", ["fwd", "bwd", "bid"])
def test_solve_task_file(in_tmp, direction):
    path = in_tmp / "g.task"
    path.write_text(serialize_task(load_fixture("gripper")))
    assert cli.main(["solve", str(path), "--direction", direction, "--order", "file"]) == cli.OK


def test_no_plan(in_tmp):
    t = load_fixture("gripper")
    t.bound = 2
    (in_tmp / "tight.task").write_text(serialize_task(t))
    assert cli.main(["solve", "tight.task", "--oracle"]) == cli.NO_PLAN
    assert not (in_tmp / "sas_plan").exists()


def test_edge_valued_solve(in_tmp):
    assert cli.main(["solve", "fixture:sdac_operator", "--cost-repr", "ev", "--direction", "fwd",
                     "--oracle"]) == cli.OK
    assert cli.main(["solve", "fixture:sdac_operator", "--cost-repr", "ev"]) == cli.USAGE


def test_usage_errors(in_tmp, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve"])
    assert exc.value.code == cli.USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "fixture:two_cell_reachability", "--axioms", "v-based"])
    assert exc.value.code == cli.USAGE
    with pytest.raises(SystemExit) as exc:
        cli.main(["topk", "fixture:gripper", "--k", "0"])
    assert exc.value.code == cli.USAGE
    assert cli.main(["solve", "fixture:nope"]) == cli.USAGE
    assert cli.main(["solve", "missing.task"]) == cli.USAGE
    assert cli.main(["astar", "fixture:gripper", "--heuristic", "fraction:3/2"]) == cli.USAGE


def test_syntax_error_reports_line(in_tmp, capsys):
    (in_tmp / "bad.task").write_text("version 1\nmetric sometimes\n")
    assert cli.main(["solve", "bad.task"]) == cli.USAGE
    assert "line 2" in capsys.readouterr().err


def test_oracle_mismatch_exit_code(in_tmp, monkeypatch):
    monkeypatch.setattr(cli, "oracle_optimal", lambda task: Plan((), 99))
    assert cli.main(["solve", "fixture:gripper", "--oracle"]) == cli.MISMATCH


def test_node_limit_exit_code(in_tmp, monkeypatch):
    monkeypatch.setenv(NODE_LIMIT_ENV, "20")
    assert cli.main(["solve", "fixture:gripper"]) == cli.NODE_LIMIT


def test_topk_writes_numbered_plans(in_tmp):
    assert cli.main(["topk", "fixture:gripper", "--k", "3", "--oracle"]) == cli.OK
    costs = [parse_plan((in_tmp / f"sas_plan.{i}").read_text()).cost for i in (1, 2, 3)]
    assert costs == [3, 5, 5]
    assert not (in_tmp / "sas_plan.4").exists()


def test_topk_by_utility(in_tmp):
    argv = ["topk", "fixture:osp_example", "--k", "2", "--rank-by-utility", "--direction", "fwd",
            "--oracle"]
    assert cli.main(argv) == cli.OK
    first = parse_plan((in_tmp / "sas_plan.1").read_text())
    assert (first.ops, first.utility) == (("o2",), 2)


@pytest.mark.parametrize("repr_", ["bdd", "add"])
def test_osp(in_tmp, repr_):
    assert cli.main(["osp", "fixture:osp_example", "--utility-repr", repr_, "--oracle"]) == cli.OK
    plan = parse_plan((in_tmp / "sas_plan").read_text())
    assert (plan.cost, plan.utility) == (1, 2)


@pytest.mark.parametrize("h", ["blind", "perfect", "fraction:1/2"])
def test_astar(in_tmp, h):
    assert cli.main(["astar", "fixture:lattice", "--heuristic", h, "--oracle",
                     "--stats", "s.json"]) == cli.OK
    assert json.loads((in_tmp / "s.json").read_text())["plan_cost"] == 4


def test_gen_then_solve(in_tmp):
    for profile in ("plain", "sdac", "axioms"):
        assert cli.main(["gen", "--seed", "4", "--profile", profile, "-o", "r.task"]) == cli.OK
        assert cli.main(["solve", "r.task", "--oracle"]) in (cli.OK, cli.NO_PLAN)


def test_dump_dd(in_tmp, capsys):
    assert cli.main(["dump-dd", "fixture:osp_example", "--what", "utility"]) == cli.OK
    assert capsys.readouterr().out.startswith("digraph")
    assert cli.main(["dump-dd", "fixture:sdac_operator", "--what", "ev-tr", "-o", "x.dot"]) == cli.OK
    assert (in_tmp / "x.dot").read_text().startswith("digraph")
