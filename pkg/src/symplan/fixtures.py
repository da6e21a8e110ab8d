"""Bundled example tasks: small text fixtures plus a few generated ones."""
from __future__ import annotations

from importlib import resources

from .task import Axiom, BinOp, Abs, Const, Literal, Operator, Task, Var, Variable, parse_task

WIDTH, HEIGHT = 11, 8

# cells the rover cannot enter (the drone flies over them)
BLOCKED = frozenset([
    (3, 0), (4, 0), (8, 0), (9, 0),
    (3, 1), (4, 1), (6, 1), (8, 1), (9, 1),
    (0, 2), (2, 2), (3, 2), (4, 2), (5, 2), (6, 2), (8, 2), (9, 2), (10, 2),
    (0, 3), (2, 3), (3, 3), (4, 3), (5, 3), (6, 3), (8, 3), (9, 3), (10, 3),
    (2, 4), (3, 4), (4, 4), (5, 4), (6, 4),
    (5, 5), (6, 5), (7, 5), (8, 5), (9, 5),
    (0, 6), (1, 6), (2, 6), (6, 6), (7, 6), (8, 6),
    (0, 7), (1, 7), (2, 7), (3, 7),
])
ROVER_START = (7, 3)
PHOTO_SITES = ((6, 1), (10, 1))
DESTINATION = (0, 5)
ROVER_OPTIMAL_COST = 24


def fixture_names() -> list[str]:
    files = resources.files("symplan") / "tasks"
    return sorted(p.name[: -len(".task")] for p in files.iterdir() if p.name.endswith(".task"))


def fixture_text(name: str) -> str:
    return (resources.files("symplan") / "tasks" / f"{name}.task").read_text()


def load_fixture(name: str) -> Task:
    return parse_task(fixture_text(name))


def free_cells() -> list[tuple[int, int]]:
    return [(x, y) for y in range(HEIGHT) for x in range(WIDTH) if (x, y) not in BLOCKED]


def _neighbours(cell):
    x, y = cell
    for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
        if 0 <= nx < WIDTH and 0 <= ny < HEIGHT and (nx, ny) not in BLOCKED:
            yield nx, ny


def _manhattan(x: int, y: int):
    """|dx - x| + |dy - y| over the drone position variables."""
    return BinOp("+", Abs(BinOp("-", Var("dx"), Const(x))), Abs(BinOp("-", Var("dy"), Const(y))))


def _drone_ops() -> list[Operator]:
    ops = []
    for x, y in free_cells():
        at = (("rx", x), ("ry", y))
        ops.append(Operator(f"launch-{x}-{y}", at + (("flying", 0),),
                            (("flying", 1), ("dx", x), ("dy", y)), Const(5)))
        ops.append(Operator(f"land-{x}-{y}", at + (("flying", 1), ("dx", x), ("dy", y)),
                            (("flying", 0),), Const(5)))
    for x in range(WIDTH):
        for y in range(HEIGHT):
            ops.append(Operator(f"fly-to-{x}-{y}", (("flying", 1),), (("dx", x), ("dy", y)),
                                _manhattan(x, y)))
    for i, (x, y) in enumerate(PHOTO_SITES):
        ops.append(Operator(f"take-image-{x}-{y}", (("flying", 1), ("dx", x), ("dy", y)),
                            ((f"image{i}", 1),), Const(2)))
    return ops


def _rover_variables() -> list[Variable]:
    return [
        Variable("rx", WIDTH), Variable("ry", HEIGHT), Variable("flying", 2),
        Variable("dx", WIDTH), Variable("dy", HEIGHT),
    ] + [Variable(f"image{i}", 2) for i in range(len(PHOTO_SITES))]


def _rover_init_goal():
    init = {"rx": ROVER_START[0], "ry": ROVER_START[1], "flying": 0,
            "dx": ROVER_START[0], "dy": ROVER_START[1]}
    init.update({f"image{i}": 0 for i in range(len(PHOTO_SITES))})
    goal = {"rx": DESTINATION[0], "ry": DESTINATION[1], "flying": 0}
    goal.update({f"image{i}": 1 for i in range(len(PHOTO_SITES))})
    return init, goal


def mars_rover() -> Task:
    """Grid rover with a drone; rover moves are free, drone actions cost."""
    ops = []
    for x, y in free_cells():
        for nx, ny in _neighbours((x, y)):
            ops.append(Operator(f"navigate-{x}-{y}-{nx}-{ny}", (("rx", x), ("ry", y)),
                                (("rx", nx), ("ry", ny)), Const(0)))
    ops += _drone_ops()
    init, goal = _rover_init_goal()
    return Task(_rover_variables(), init, goal, ops)


def mars_rover_axioms() -> Task:
    """The same rover task with reachability as derived variables; one
    navigate operator per target cell replaces the step-by-step moves."""
    cells = free_cells()
    variables = _rover_variables() + [Variable(f"reachable-{x}-{y}", 2, 1) for x, y in cells]
    axioms = []
    for x, y in cells:
        axioms.append(Axiom(f"reachable-{x}-{y}", (Literal("rx", x), Literal("ry", y))))
        for nx, ny in _neighbours((x, y)):
            axioms.append(Axiom(f"reachable-{nx}-{ny}", (Literal(f"reachable-{x}-{y}"),)))
    ops = [Operator(f"navigate-{x}-{y}", ((f"reachable-{x}-{y}", 1),),
                    (("rx", x), ("ry", y)), Const(0)) for x, y in cells]
    ops += _drone_ops()
    init, goal = _rover_init_goal()
    return Task(variables, init, goal, ops, axioms)


def two_cell_reachability() -> Task:
    """Two free cells; reachable(c) holds for the rover cell and its neighbour."""
    variables = [Variable("rover", 2), Variable("reachable0", 2, 1), Variable("reachable1", 2, 1)]
    axioms = [
        Axiom("reachable0", (Literal("rover", 0),)),
        Axiom("reachable1", (Literal("rover", 1),)),
        Axiom("reachable1", (Literal("reachable0"),)),
        Axiom("reachable0", (Literal("reachable1"),)),
    ]
    ops = [Operator(f"navigate-{c}", ((f"reachable{c}", 1),), (("rover", c),), Const(0))
           for c in (0, 1)]
    return Task(variables, {"rover": 0}, {"rover": 1}, ops, axioms)


# (g, h) lattice: state "gh" sits at cost g with heuristic h
LATTICE_EDGES = {
    "02": ("11", "12", "13", "14"),
    "11": ("21", "22"),
    "12": ("21", "22", "23"),
    "13": ("22", "23", "24"),
    "21": ("31",),
    "22": ("31", "32", "33", "34"),
    "31": ("40", "41"),
}
LATTICE_SCHEDULE = [(0, 2), (1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1), (4, 0)]


def lattice_states() -> list[str]:
    names = set(LATTICE_EDGES)
    for succ in LATTICE_EDGES.values():
        names.update(succ)
    return sorted(names)


def lattice_task() -> Task:
    """One variable whose values are the lattice states; unit-cost edges."""
    names = lattice_states()
    idx = {n: i for i, n in enumerate(names)}
    ops = [Operator(f"go-{a}-{b}", (("cell", idx[a]),), (("cell", idx[b]),))
           for a, succ in LATTICE_EDGES.items() for b in succ]
    return Task([Variable("cell", len(names))], {"cell": idx["02"]}, {"cell": idx["40"]},
                ops, metric="unit")


def lattice_heuristic(st):
    """Heuristic buckets giving each lattice state its second digit."""
    from .astar import HeuristicBuckets

    s = st.store
    by_h: dict[int, int] = {}
    for i, name in enumerate(lattice_states()):
        h = int(name[1])
        by_h[h] = s.disj(by_h.get(h, s.false), st.enc.fact("cell", i))
    return HeuristicBuckets(sorted(by_h.items()))


BUILDERS = {
    "mars_rover": mars_rover,
    "mars_rover_axioms": mars_rover_axioms,
    "two_cell_reachability": two_cell_reachability,
    "lattice": lattice_task,
}
