"""A planning task compiled into decision diagrams."""
from __future__ import annotations

from .axioms import MODES, TRANSLATE, V_BASED, OBasedExpander, VBasedExpander, primary_representation
from .encoding import INTERLEAVED, Encoding
from .task import Task, TaskError
from .transitions import Images, TransitionRelation, build_ev_tr, build_tr, merge_by_cost


class SymbolicTask:
    """Initial states, goal, relations and state expansion for one task.

    `op_trs` keeps one relation per operator and cost value (used to
    reconstruct plans); `trs` merges them by cost (used for search).
    """

    def __init__(self, task: Task, axioms: str = TRANSLATE, order: str = INTERLEAVED,
                 node_limit: int | None = None):
        if axioms not in MODES:
            raise ValueError(f"unknown axiom mode {axioms!r}")
        if not task.axioms and not task.derived:
            axioms = TRANSLATE
        self.task = task
        self.axiom_mode = axioms
        with_derived = axioms != TRANSLATE
        self.enc = enc = Encoding(task, order, with_derived, node_limit)
        self.store = s = enc.store
        self.images = Images(enc)
        if axioms == TRANSLATE:
            enc.derived_repr = primary_representation(enc, task)
            self.expand = None
        elif axioms == V_BASED:
            self.expand = VBasedExpander(enc, task)
        else:
            self.expand = OBasedExpander(enc, task, self.images)
        self.valid = enc.valid
        init = s.conj(enc.condition((v.name, task.init[v.name]) for v in task.primary), enc.valid)
        self.init = self.expand(init) if self.expand else init
        self.goal = s.conj(enc.condition(task.goal), enc.valid)
        self.op_trs: list[TransitionRelation] = []
        for op in task.operators:
            self.op_trs.extend(build_tr(enc, op))
        self.trs = merge_by_cost(s, self.op_trs)
        self.bound = task.bound
        self._ev_trs = None

    @property
    def supports_backward(self) -> bool:
        return self.expand is None

    def check_direction(self, direction: str):
        if direction not in ("fwd", "bwd", "bid"):
            raise ValueError(f"unknown direction {direction!r}")
        if direction != "fwd" and not self.supports_backward:
            raise TaskError(f"{self.axiom_mode} axioms only support forward search")

    def image(self, states: int, rel: int) -> int:
        r = self.images.image(states, rel)
        if self.expand is not None and r != self.store.false:
            r = self.expand(r)
        return r

    def preimage(self, states: int, rel: int) -> int:
        return self.images.preimage(states, rel)

    def tr_sizes(self) -> list[int]:
        return [self.store.node_count(tr.node) for tr in self.trs]

    def ev_trs(self):
        """EV relation per operator (lazy)."""
        if self._ev_trs is None:
            self._ev_trs = [(op.name, build_ev_tr(self.enc, op)) for op in self.task.operators]
        return self._ev_trs

    def utility_add(self) -> int:
        if self.task.utility is None:
            return self.store.constant(0)
        return self.enc.compile_expr(self.task.utility)
