"""Planning tasks: data model, cost/utility expressions, text format, plans."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

INF = math.inf


class TaskError(ValueError):
    """Malformed or semantically invalid task."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# ----------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Abs:
    arg: "Expr"


Expr = Union[Const, Var, BinOp, Abs]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_.\[\]]*)|(.))")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        tok = m.group(1) or m.group(2) or m.group(3)
        if tok is None:
            break
        if m.group(3) is not None and tok not in "+-*()":
            raise TaskError(f"unexpected character {tok!r} in expression")
        tokens.append(tok)
        pos = m.end()
    return tokens


def parse_expr(text: str) -> Expr:
    """Infix integer expression with + - * abs() and parentheses."""
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        tok = peek()
        if tok is None or (expected is not None and tok != expected):
            raise TaskError(f"expected {expected or 'a term'} in expression {text!r}")
        pos += 1
        return tok

    def expr():
        node = term()
        while peek() in ("+", "-"):
            node = BinOp(take(), node, term())
        return node

    def term():
        node = factor()
        while peek() == "*":
            take()
            node = BinOp("*", node, factor())
        return node

    def factor():
        tok = take()
        if tok == "-":
            inner = factor()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return BinOp("-", Const(0), inner)
        if tok == "(":
            node = expr()
            take(")")
            return node
        if tok.isdigit():
            return Const(int(tok))
        if tok == "abs" and peek() == "(":
            take("(")
            node = expr()
            take(")")
            return Abs(node)
        if tok in "+*)":
            raise TaskError(f"unexpected {tok!r} in expression {text!r}")
        return Var(tok)

    if not tokens:
        raise TaskError("empty expression")
    node = expr()
    if pos != len(tokens):
        raise TaskError(f"trailing input in expression {text!r}")
    return node


def format_expr(e: Expr) -> str:
    def fmt(e, prec):
        if isinstance(e, Const):
            s = str(e.value)
            return f"({s})" if e.value < 0 and prec > 0 else s
        if isinstance(e, Var):
            return e.name
        if isinstance(e, Abs):
            return f"abs({fmt(e.arg, 0)})"
        if e.op == "*":
            s = f"{fmt(e.left, 2)} * {fmt(e.right, 3)}"
            return f"({s})" if prec > 2 else s
        s = f"{fmt(e.left, 1)} {e.op} {fmt(e.right, 2)}"
        return f"({s})" if prec > 1 else s

    return fmt(e, 0)


def eval_expr(e: Expr, state: Mapping[str, int]) -> int:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return int(state[e.name])
    if isinstance(e, Abs):
        return abs(eval_expr(e.arg, state))
    a, b = eval_expr(e.left, state), eval_expr(e.right, state)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    return a * b


def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Const):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Abs):
        return expr_vars(e.arg)
    return expr_vars(e.left) | expr_vars(e.right)


def expr_depth(e: Expr) -> int:
    if isinstance(e, (Const, Var)):
        return 0
    if isinstance(e, Abs):
        return 1 + expr_depth(e.arg)
    return 1 + max(expr_depth(e.left), expr_depth(e.right))


# ----------------------------------------------------------------------
# task model


@dataclass(frozen=True)
class Variable:
    name: str
    domain: int
    layer: int | None = None  # None for primary variables

    @property
    def derived(self) -> bool:
        return self.layer is not None


@dataclass(frozen=True)
class Operator:
    name: str
    pre: tuple[tuple[str, int], ...]
    eff: tuple[tuple[str, int], ...]
    cost: Expr = Const(1)


@dataclass(frozen=True)
class Literal:
    """Axiom body literal: `var = value`; binary shorthands are `v` and `!v`."""

    var: str
    value: int = 1
    negated: bool = False

    def holds(self, state: Mapping[str, int]) -> bool:
        return (state[self.var] == self.value) != self.negated


@dataclass(frozen=True)
class Axiom:
    head: str
    body: tuple[Literal, ...]


@dataclass
class Task:
    variables: list[Variable]
    init: dict[str, int]
    goal: dict[str, int]
    operators: list[Operator]
    axioms: list[Axiom] = field(default_factory=list)
    bound: float = INF
    utility: Expr | None = None
    metric: str = "general"

    def __post_init__(self):
        self.var_index = {v.name: i for i, v in enumerate(self.variables)}

    @property
    def primary(self) -> list[Variable]:
        return [v for v in self.variables if not v.derived]

    @property
    def derived(self) -> list[Variable]:
        return [v for v in self.variables if v.derived]

    def var(self, name: str) -> Variable:
        return self.variables[self.var_index[name]]

    @property
    def has_sdac(self) -> bool:
        return any(expr_vars(o.cost) for o in self.operators)

    def op(self, name: str) -> Operator:
        for o in self.operators:
            if o.name == name:
                return o
        raise KeyError(name)

    def validate(self) -> None:
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise TaskError("duplicate variable name")
        for v in self.variables:
            if v.domain < 1:
                raise TaskError(f"variable {v.name} has an empty domain")
            if v.derived and v.domain != 2:
                raise TaskError(f"derived variable {v.name} must be binary")
            if v.derived and v.layer < 0:
                raise TaskError(f"derived variable {v.name} has a negative layer")

        def check_fact(var, val, what):
            if var not in self.var_index:
                raise TaskError(f"unknown variable {var!r} in {what}")
            if not 0 <= val < self.var(var).domain:
                raise TaskError(f"value {val} out of range for {var} in {what}")

        for v in self.primary:
            if v.name not in self.init:
                raise TaskError(f"initial state misses {v.name}")
            check_fact(v.name, self.init[v.name], "init")
        for var, val in self.goal.items():
            check_fact(var, val, "goal")
        opnames = set()
        for o in self.operators:
            if o.name in opnames:
                raise TaskError(f"duplicate operator {o.name}")
            opnames.add(o.name)
            for var, val in o.pre:
                check_fact(var, val, f"operator {o.name}")
            seen = set()
            for var, val in o.eff:
                check_fact(var, val, f"operator {o.name}")
                if self.var(var).derived:
                    raise TaskError(f"derived variable in effect of {o.name}: {var}")
                if var in seen:
                    raise TaskError(f"conflicting effects on {var} in {o.name}")
                seen.add(var)
            for name in expr_vars(o.cost):
                if name not in self.var_index:
                    raise TaskError(f"unknown variable {name!r} in cost of {o.name}")
        if self.utility is not None:
            for name in expr_vars(self.utility):
                if name not in self.var_index:
                    raise TaskError(f"unknown variable {name!r} in utility")
        for ax in self.axioms:
            if ax.head not in self.var_index or not self.var(ax.head).derived:
                raise TaskError(f"axiom head {ax.head!r} is not a derived variable")
            hl = self.var(ax.head).layer
            for lit in ax.body:
                check_fact(lit.var, lit.value, f"axiom for {ax.head}")
                bv = self.var(lit.var)
                if not bv.derived:
                    continue
                if bv.layer > hl or (lit.negated and bv.layer == hl):
                    raise TaskError(
                        f"axiom for {ax.head} breaks stratification through {lit.var}")
                if bv.layer == hl and lit.value != 1:
                    raise TaskError(
                        f"axiom for {ax.head} breaks stratification through {lit.var}")

    def layers(self) -> list[int]:
        return sorted({v.layer for v in self.derived})


# ----------------------------------------------------------------------
# explicit semantics


def evaluate_axioms(task: Task, state: Mapping[str, int]) -> dict[str, int]:
    """Extend a primary state with the values of all derived variables.

    Derived variables start false; each layer is then closed under its rules.
    """
    ext = {v.name: state[v.name] for v in task.primary}
    for v in task.derived:
        ext[v.name] = 0
    by_layer: dict[int, list[Axiom]] = {}
    for ax in task.axioms:
        by_layer.setdefault(task.var(ax.head).layer, []).append(ax)
    for layer in sorted(by_layer):
        rules = by_layer[layer]
        changed = True
        while changed:
            changed = False
            for ax in rules:
                if not ext[ax.head] and all(l.holds(ext) for l in ax.body):
                    ext[ax.head] = 1
                    changed = True
    return ext


def applicable(op: Operator, ext: Mapping[str, int]) -> bool:
    return all(ext[v] == d for v, d in op.pre)


def apply_op(task: Task, op: Operator, state: Mapping[str, int]) -> dict[str, int]:
    succ = {v.name: state[v.name] for v in task.primary}
    for v, d in op.eff:
        succ[v] = d
    return succ


def op_cost(op: Operator, ext: Mapping[str, int]) -> int:
    c = eval_expr(op.cost, ext)
    if c < 0:
        raise TaskError(f"operator {op.name} has negative cost {c}")
    return c


def utility_of(task: Task, ext: Mapping[str, int]) -> int:
    if task.utility is None:
        return 0
    u = eval_expr(task.utility, ext)
    if u < 0:
        raise TaskError(f"negative utility {u}")
    return u


def is_goal(task: Task, ext: Mapping[str, int]) -> bool:
    return all(ext[v] == d for v, d in task.goal.items())


@dataclass(frozen=True)
class Plan:
    ops: tuple[str, ...]
    cost: int
    utility: int | None = None


def replay(task: Task, ops: Sequence[str]) -> tuple[dict[str, int], int]:
    """Execute a plan from the initial state; return the end state and cost."""
    by_name = {o.name: o for o in task.operators}
    state = {v.name: task.init[v.name] for v in task.primary}
    cost = 0
    for name in ops:
        op = by_name[name]
        ext = evaluate_axioms(task, state)
        if not applicable(op, ext):
            raise TaskError(f"operator {name} is not applicable")
        cost += op_cost(op, ext)
        state = apply_op(task, op, state)
    return state, cost


def validate_plan(task: Task, plan: Plan) -> bool:
    """True when the plan is executable, reaches the goal and matches its cost."""
    try:
        state, cost = replay(task, plan.ops)
    except (TaskError, KeyError):
        return False
    ext = evaluate_axioms(task, state)
    if not is_goal(task, ext) or cost != plan.cost or cost > task.bound:
        return False
    if plan.utility is not None and plan.utility != utility_of(task, ext):
        return False
    return True


def format_plan(plan: Plan) -> str:
    lines = [f"({name})" for name in plan.ops]
    lines.append(f"; cost = {plan.cost}")
    if plan.utility is not None:
        lines.append(f"; utility = {plan.utility}")
    return "\n".join(lines) + "\n"


def parse_plan(text: str) -> Plan:
    ops = []
    cost = None
    utility = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith(";"):
            m = re.match(r";\s*(cost|utility)\s*=\s*(-?\d+)", line)
            if m and m.group(1) == "cost":
                cost = int(m.group(2))
            elif m:
                utility = int(m.group(2))
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise TaskError(f"bad plan line {line!r}")
        ops.append(line[1:-1].strip())
    if cost is None:
        raise TaskError("plan file misses the cost line")
    return Plan(tuple(ops), cost, utility)


# ----------------------------------------------------------------------
# text format


class _Lines:
    def __init__(self, text: str):
        self.items = []
        for no, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                self.items.append((no, line))
        self.pos = 0

    @property
    def lineno(self):
        if self.pos < len(self.items):
            return self.items[self.pos][0]
        return self.items[-1][0] if self.items else 1

    def peek(self):
        return self.items[self.pos][1] if self.pos < len(self.items) else None

    def next(self, what: str) -> tuple[int, str]:
        if self.pos >= len(self.items):
            raise TaskError(f"unexpected end of file, expected {what}", self.lineno)
        item = self.items[self.pos]
        self.pos += 1
        return item

    def keyword(self, key: str) -> tuple[int, list[str]]:
        no, line = self.next(key)
        parts = line.split()
        if parts[0] != key:
            raise TaskError(f"expected {key!r}, found {parts[0]!r}", no)
        return no, parts[1:]


def _int(tok: str, no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise TaskError(f"expected an integer for {what}, found {tok!r}", no) from None


def _count(src: _Lines, key: str) -> int:
    no, rest = src.keyword(key)
    if len(rest) != 1:
        raise TaskError(f"{key} takes one count", no)
    n = _int(rest[0], no, key)
    if n < 0:
        raise TaskError(f"negative {key} count", no)
    return n


def _facts(src: _Lines, n: int, what: str) -> tuple[tuple[str, int], ...]:
    out = []
    for _ in range(n):
        no, line = src.next(what)
        parts = line.split()
        if len(parts) != 2:
            raise TaskError(f"expected 'var value' in {what}", no)
        out.append((parts[0], _int(parts[1], no, what)))
    return tuple(out)


def _literal(tok: str, no: int) -> Literal:
    if "=" in tok:
        var, val = tok.split("=", 1)
        return Literal(var, _int(val, no, "axiom literal"))
    if tok.startswith("!"):
        return Literal(tok[1:], 1, True)
    return Literal(tok)


def parse_task(text: str) -> Task:
    src = _Lines(text)
    no, rest = src.keyword("version")
    if rest != ["1"]:
        raise TaskError("unsupported version", no)
    no, rest = src.keyword("metric")
    if len(rest) != 1 or rest[0] not in ("unit", "general"):
        raise TaskError("metric must be unit or general", no)
    metric = rest[0]
    nvars = _count(src, "vars")
    variables = []
    for _ in range(nvars):
        no, line = src.next("variable")
        parts = line.split()
        if len(parts) < 3:
            raise TaskError("expected 'name domsize primary|derived layer'", no)
        name, dom, kind = parts[0], _int(parts[1], no, "domain size"), parts[2]
        if kind == "primary" and len(parts) == 3:
            variables.append(Variable(name, dom))
        elif kind == "derived" and len(parts) == 4:
            variables.append(Variable(name, dom, _int(parts[3], no, "layer")))
        else:
            raise TaskError(f"bad variable kind {kind!r}", no)
    no, rest = src.keyword("init")
    if len(rest) != nvars:
        raise TaskError(f"init needs {nvars} values, found {len(rest)}", no)
    init = {}
    for v, tok in zip(variables, rest):
        val = _int(tok, no, "init")
        if not v.derived:
            init[v.name] = val
    goal = dict(_facts(src, _count(src, "goal"), "goal"))
    no, rest = src.keyword("bound")
    if len(rest) != 1:
        raise TaskError("bound takes one value", no)
    bound = INF if rest[0] == "inf" else _int(rest[0], no, "bound")
    nops = _count(src, "ops")
    operators = []
    for _ in range(nops):
        no, rest = src.keyword("op")
        if len(rest) != 1:
            raise TaskError("operator names must be a single token", no)
        name = rest[0]
        pre = _facts(src, _count(src, "pre"), f"precondition of {name}")
        eff = _facts(src, _count(src, "eff"), f"effect of {name}")
        no, line = src.next("cost")
        if not line.startswith("cost"):
            raise TaskError("expected 'cost'", no)
        try:
            cost = parse_expr(line[4:])
        except TaskError as exc:
            raise TaskError(str(exc), no) from None
        if metric == "unit" and cost != Const(1):
            raise TaskError("unit metric requires cost 1", no)
        operators.append(Operator(name, pre, eff, cost))
    axioms = []
    utility = None
    while src.peek() is not None:
        head = src.peek().split()[0]
        if head == "axioms":
            for _ in range(_count(src, "axioms")):
                no, line = src.next("axiom")
                parts = line.split()
                if len(parts) < 2 or parts[1] != "<-":
                    raise TaskError("expected 'head <- literals'", no)
                axioms.append(Axiom(parts[0], tuple(_literal(t, no) for t in parts[2:])))
        elif head == "utility":
            no, line = src.next("utility")
            try:
                utility = parse_expr(line[len("utility"):])
            except TaskError as exc:
                raise TaskError(str(exc), no) from None
        else:
            raise TaskError(f"unexpected section {head!r}", src.lineno)
    task = Task(variables, init, goal, operators, axioms, bound, utility, metric)
    try:
        task.validate()
    except TaskError as exc:
        if exc.line is None:
            raise TaskError(str(exc), src.lineno) from None
        raise
    return task


def _format_literal(lit: Literal, task: Task) -> str:
    if task.var(lit.var).domain == 2 and lit.value == 1:
        return f"!{lit.var}" if lit.negated else lit.var
    if lit.negated:
        if lit.value == 1:
            return f"!{lit.var}"
        raise TaskError("negated multi-valued literals cannot be written")
    return f"{lit.var}={lit.value}"


def serialize_task(task: Task) -> str:
    out = ["version 1", f"metric {task.metric}", f"vars {len(task.variables)}"]
    for v in task.variables:
        kind = f"derived {v.layer}" if v.derived else "primary"
        out.append(f"{v.name} {v.domain} {kind}")
    out.append("init " + " ".join(str(task.init.get(v.name, 0)) for v in task.variables))
    out.append(f"goal {len(task.goal)}")
    out += [f"{var} {val}" for var, val in task.goal.items()]
    out.append("bound " + ("inf" if task.bound == INF else str(int(task.bound))))
    out.append(f"ops {len(task.operators)}")
    for o in task.operators:
        out.append(f"op {o.name}")
        out.append(f"pre {len(o.pre)}")
        out += [f"{var} {val}" for var, val in o.pre]
        out.append(f"eff {len(o.eff)}")
        out += [f"{var} {val}" for var, val in o.eff]
        out.append(f"cost {format_expr(o.cost)}")
    if task.axioms:
        out.append(f"axioms {len(task.axioms)}")
        for ax in task.axioms:
            body = " ".join(_format_literal(l, task) for l in ax.body)
            out.append(f"{ax.head} <- {body}".rstrip())
    if task.utility is not None:
        out.append(f"utility {format_expr(task.utility)}")
    return "\n".join(out) + "\n"


def load_task(path) -> Task:
    with open(path) as fh:
        return parse_task(fh.read())


def states(task: Task) -> Iterable[dict[str, int]]:
    """All primary states (for small tasks)."""
    prim = task.primary

    def rec(i, acc):
        if i == len(prim):
            yield dict(acc)
            return
        for d in range(prim[i].domain):
            acc[prim[i].name] = d
            yield from rec(i + 1, acc)
        del acc[prim[i].name]

    yield from rec(0, {})
