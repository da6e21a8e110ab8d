from fractions import Fraction

import pytest

from symplan.astar import (bdda_star, blind_heuristic, blowup_family, fraction_heuristic,
                           parse_heuristic, perfect_heuristic, run_astar, witness)
from symplan.dd import INF, Store
from symplan.fixtures import LATTICE_SCHEDULE, lattice_heuristic, lattice_task, load_fixture
from symplan.oracle import ExplicitSpace, oracle_optimal, random_task
from symplan.search import FWD, uniform_cost_search
from symplan.symbolic import SymbolicTask
from symplan.task import TaskError, states, validate_plan


def test_lattice_expansion_schedule():
    st = SymbolicTask(lattice_task())
    r = bdda_star(st, lattice_heuristic(st))
    assert r.stats["schedule"] == LATTICE_SCHEDULE
    assert r.cost == 4
    assert validate_plan(lattice_task(), r.plan)


def test_blind_matches_uniform_cost_search():
    for seed in range(40):
        t = random_task(seed, "sdac")
        a = bdda_star(SymbolicTask(t))
        u = uniform_cost_search(SymbolicTask(t), FWD)
        assert a.cost == u.cost
        assert a.stats["expansion_size"] == u.stats["expansion_size"]
        assert all(h == 0 for _, h in a.stats["schedule"])


def test_perfect_heuristic_is_goal_distance():
    for seed in range(30):
        t = random_task(seed, "plain")
        st = SymbolicTask(t)
        hb = perfect_heuristic(st)
        sp = ExplicitSpace(t)
        all_states = [tuple(s[n] for n in sp.names) for s in states(t)]
        dist = sp.goal_distances(all_states)
        for key in all_states:
            cube = st.enc.state(dict(zip(sp.names, key)))
            assert hb.value_of(st.store, cube) == dist.get(key, INF)


@pytest.mark.parametrize("spec", ["blind", "perfect", "fraction:1/4", "fraction:1/2",
                                  "fraction:3/4", "fraction:1"])
def test_heuristics_keep_optimality(spec):
    for seed in range(40):
        t = random_task(seed, "sdac")
        o = oracle_optimal(t)
        r = run_astar(SymbolicTask(t), spec)
        assert r.cost == (None if o is None else o.cost), (seed, spec)
        if r.plan is not None:
            assert validate_plan(t, r.plan)


def test_fraction_scaling():
    st = SymbolicTask(load_fixture("gripper"))
    hstar = perfect_heuristic(st)
    q, hb = fraction_heuristic(st, hstar, Fraction(2, 3))
    assert q == 3
    assert [h for h, _ in hb.buckets] == [h if h == INF else 2 * h for h, _ in hstar.buckets]
    assert fraction_heuristic(st, hstar, 0)[1].buckets == blind_heuristic(st).buckets


def test_parse_heuristic():
    assert parse_heuristic("fraction:3/4") == ("fraction", Fraction(3, 4))
    for bad in ("fraction:5/4", "fraction:x", "greedy"):
        with pytest.raises(ValueError):
            parse_heuristic(bad)


def test_perfect_heuristic_needs_translation():
    from symplan.axioms import V_BASED
    from symplan.fixtures import two_cell_reachability
    with pytest.raises(TaskError):
        perfect_heuristic(SymbolicTask(two_cell_reachability(), axioms=V_BASED))


@pytest.mark.parametrize("n", range(3, 13))
def test_witness_node_counts(n):
    first = [f"v{i}" for i in range(1, n + 1)]
    second = [f"v{n + i}" for i in range(1, n + 1)]
    grouped = Store(first + second)
    paired = Store([x for pair in zip(first, second) for x in pair])
    assert grouped.node_count(witness(grouped, first, second)) - 2 >= 2 ** n
    assert paired.node_count(witness(paired, first, second)) - 2 <= 3 * n + 2


def test_blowup_family_cost():
    # every plan walks all 2n phases and 2n ticks at unit cost
    assert oracle_optimal(blowup_family(4)).cost == 16


def test_blowup_family_perfect_heuristic_costs_more():
    t = blowup_family(8)
    blind = bdda_star(SymbolicTask(t))
    perfect = run_astar(SymbolicTask(t), "perfect")
    assert blind.cost == perfect.cost == 32
    assert validate_plan(t, perfect.plan)
    assert perfect.stats["expansion_size"] > 10 * blind.stats["expansion_size"]
