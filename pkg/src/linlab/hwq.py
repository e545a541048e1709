"""Fine-grained model of the Herlihy & Wing array queue.

Each statement of the algorithm is one atomic step::

    enq(x):  i = back++;  items[i] = x;
    deq():   loop { range = back - 1;
                    for (i = 0; i <= range; i++) {
                        x = swap(items[i], null);
                        if (x != null) return x; } }

A swap that returns a value emits ``lin(deq, x, k)``; every other step is
internal.  The items array has one cell per declared enqueue, so ``back``
never runs past it.
"""
from __future__ import annotations

from dataclasses import dataclass

from .frozen import FMap
from .lts import TransitionSystem, call, internal, lin, ret
from .workload import Workload

E1, E2, E3, EDONE = "E1", "E2", "E3", "Edone"
D_RANGE, D_I0, D_SWAP, D_CHECK, D_INC, D_DONE = "D_range", "D_i0", "D_swap", "D_check", "D_inc", "Ddone"
D_CLEAR = "D_clear"  # only used by the split-swap mutant

VARIANTS = ("atomic", "splitswap", "no-null")


class NotADequeue(ValueError):
    pass


@dataclass(frozen=True)
class HWQState:
    items: tuple
    back: int = 0
    cp: FMap = FMap()
    i: FMap = FMap()
    x: FMap = FMap()
    range: FMap = FMap()

    def replace(self, **changes) -> "HWQState":
        fields = dict(items=self.items, back=self.back, cp=self.cp, i=self.i, x=self.x, range=self.range)
        fields.update(changes)
        return HWQState(**fields)

    def is_enqueue(self, k) -> bool:
        return self.cp.get(k, "").startswith("E")

    def is_dequeue(self, k) -> bool:
        return self.cp.get(k, "").startswith("D")


def if_inc(state: HWQState, op) -> bool:
    """True while ``op`` sits between a swap that returned null and its ``i++``."""
    if not state.is_dequeue(op):
        raise NotADequeue(f"op {op} is not a started dequeue")
    point = state.cp[op]
    return (point == D_CHECK and state.x.get(op) is None) or point == D_INC


class HWQ(TransitionSystem):
    kind = "queue"

    def __init__(self, workload: Workload, variant: str = "atomic"):
        if variant not in VARIANTS:
            raise ValueError(f"unknown HWQ variant {variant!r}")
        self.workload = workload.as_queue()
        self.variant = variant
        self.name = "hwq" if variant == "atomic" else f"hwq-mutant-{variant}"
        self.initial = HWQState(items=(None,) * len(self.workload.adds))

    def successors(self, s: HWQState):
        out = []
        for o in self.workload.ops:
            if o.op in s.cp:
                continue
            if o.method == "enq":
                out.append((call("enq", o.op, o.value), s.replace(cp=s.cp.set(o.op, E1), x=s.x.set(o.op, o.value))))
            else:
                out.append((call("deq", o.op), s.replace(cp=s.cp.set(o.op, D_RANGE))))
        for k, point in s.cp.items():
            step = self._step(s, k, point)
            if step is not None:
                out.append(step)
        return out

    def _restart(self, s: HWQState, k) -> HWQState:
        return s.replace(cp=s.cp.set(k, D_RANGE), i=s.i.without(k), range=s.range.without(k))

    def _step(self, s: HWQState, k, point):
        if point == E1:
            return internal("enq", k, "back++"), s.replace(
                back=s.back + 1, i=s.i.set(k, s.back), cp=s.cp.set(k, E2))
        if point == E2:
            items = list(s.items)
            items[s.i[k]] = s.x[k]
            return internal("enq", k, "write"), s.replace(items=tuple(items), cp=s.cp.set(k, E3))
        if point == E3:
            return ret("enq", k), s.replace(cp=s.cp.set(k, EDONE))
        if point == D_RANGE:
            return internal("deq", k, "range"), s.replace(
                range=s.range.set(k, s.back - 1), x=s.x.without(k), cp=s.cp.set(k, D_I0))
        if point == D_I0:
            if s.range[k] < 0:
                return internal("deq", k, "i=0;exit"), self._restart(s, k)
            return internal("deq", k, "i=0"), s.replace(i=s.i.set(k, 0), cp=s.cp.set(k, D_SWAP))
        if point == D_SWAP:
            return self._swap(s, k)
        if point == D_CLEAR:
            items = list(s.items)
            items[s.i[k]] = None
            return internal("deq", k, "clear"), s.replace(items=tuple(items), cp=s.cp.set(k, D_CHECK))
        if point == D_CHECK:
            if s.x.get(k) is not None:
                return ret("deq", k, s.x[k]), s.replace(cp=s.cp.set(k, D_DONE))
            return internal("deq", k, "check_null"), s.replace(cp=s.cp.set(k, D_INC))
        if point == D_INC:
            nxt = s.i[k] + 1
            if nxt > s.range[k]:
                return internal("deq", k, "i++;exit"), self._restart(s, k)
            return internal("deq", k, "i++"), s.replace(i=s.i.set(k, nxt), cp=s.cp.set(k, D_SWAP))
        return None

    def _swap(self, s: HWQState, k):
        idx = s.i[k]
        value = s.items[idx]
        if self.variant == "splitswap":
            nxt = s.replace(x=s.x.set(k, value) if value is not None else s.x.without(k), cp=s.cp.set(k, D_CLEAR))
            label = lin("deq", k, value) if value is not None else internal("deq", k, "read_null")
            return label, nxt
        if value is None:
            return internal("deq", k, "swap_null"), s.replace(x=s.x.without(k), cp=s.cp.set(k, D_CHECK))
        items = list(s.items)
        if self.variant == "atomic":
            items[idx] = None
        return lin("deq", k, value), s.replace(items=tuple(items), x=s.x.set(k, value), cp=s.cp.set(k, D_CHECK))

    def describe(self, s: HWQState):
        return {
            "items": list(s.items),
            "back": s.back,
            "cp": {str(k): v for k, v in sorted(s.cp.items())},
            "i": {str(k): v for k, v in sorted(s.i.items())},
            "x": {str(k): v for k, v in sorted(s.x.items())},
            "range": {str(k): v for k, v in sorted(s.range.items())},
        }


def make_hwq(workload: Workload, variant: str = "atomic") -> HWQ:
    return HWQ(workload, variant)
