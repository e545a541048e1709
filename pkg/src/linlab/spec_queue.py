"""Reference queues: the sequence-based AbsQ0 and the poset-based AbsQ.

AbsQ keeps the happens-before order between enqueues whose value is still in
the queue.  Only dequeues expose linearization points; a non-EMPTY dequeue
may remove any enqueue that is minimal in that order, and an EMPTY dequeue is
allowed only while every stored enqueue is still pending.
"""
from __future__ import annotations

from dataclasses import dataclass

from .frozen import FMap, minimal, strip, transitive_closure
from .lts import EMPTY, TransitionSystem, call, lin, ret
from .workload import Workload

PEND = "PEND"
COMP = "COMP"


@dataclass(frozen=True)
class AbsQ0State:
    """``sigma[0]`` is the most recently added value; removal takes ``sigma[-1]``."""

    sigma: tuple = ()
    in0: FMap = FMap()
    rv0: FMap = FMap()
    cp0: FMap = FMap()


@dataclass(frozen=True)
class AbsQState:
    O: frozenset = frozenset()
    ord: frozenset = frozenset()
    lab: FMap = FMap()
    rv: FMap = FMap()
    cp: FMap = FMap()

    @classmethod
    def make(cls, O=(), ord=(), lab=None, rv=None, cp=None) -> "AbsQState":
        """Build a state by hand; ``ord`` is transitively closed here."""
        return cls(frozenset(O), transitive_closure(ord), FMap(lab or {}),
                   FMap(rv or {}), FMap(cp or {}))

    def completed(self) -> frozenset:
        return frozenset(k for k in self.O if self.lab[k][1] == COMP)

    def pending(self) -> frozenset:
        return frozenset(k for k in self.O if self.lab[k][1] == PEND)


def minimal_ops(state: AbsQState) -> frozenset:
    return minimal(state.O, state.ord)


class _AddRemoveSpec(TransitionSystem):
    add = "enq"
    remove = "deq"

    def __init__(self, workload: Workload):
        if workload.kind != self.kind:
            workload = workload.as_queue() if self.kind == "queue" else workload.as_stack()
        self.workload = workload
        self.decl = {o.op: o for o in workload.ops}

    def _calls(self, cp):
        for o in self.workload.ops:
            if o.op not in cp:
                yield o


class AbsQ0(_AddRemoveSpec):
    """The atomic queue: enqueue/dequeue linearization points update a sequence."""

    kind = "queue"
    name = "absq0"

    def __init__(self, workload: Workload):
        super().__init__(workload)
        self.initial = AbsQ0State()

    def _take(self, sigma):
        """Value removed by a non-empty removal, and the rest of the sequence."""
        return sigma[-1], sigma[:-1]

    def successors(self, s: AbsQ0State):
        add, remove = self.add, self.remove
        out = []
        for o in self._calls(s.cp0):
            k = o.op
            if o.method == add:
                out.append((call(add, k, o.value),
                            AbsQ0State(s.sigma, s.in0.set(k, o.value), s.rv0, s.cp0.set(k, "A1"))))
            else:
                out.append((call(remove, k), AbsQ0State(s.sigma, s.in0, s.rv0, s.cp0.set(k, "R1"))))
        for k, point in s.cp0.items():
            if point == "A1":
                d = s.in0[k]
                out.append((lin(add, k, d), AbsQ0State((d,) + s.sigma, s.in0, s.rv0, s.cp0.set(k, "A"))))
            elif point == "A":
                out.append((ret(add, k), AbsQ0State(s.sigma, s.in0, s.rv0, s.cp0.set(k, "A2"))))
            elif point == "R1":
                if s.sigma:
                    d, rest = self._take(s.sigma)
                    out.append((lin(remove, k, d),
                                AbsQ0State(rest, s.in0, s.rv0.set(k, d), s.cp0.set(k, "R2"))))
                else:
                    out.append((lin(remove, k, EMPTY),
                                AbsQ0State(s.sigma, s.in0, s.rv0.set(k, EMPTY), s.cp0.set(k, "R2"))))
            elif point == "R2":
                out.append((ret(remove, k, s.rv0[k]),
                            AbsQ0State(s.sigma, s.in0, s.rv0, s.cp0.set(k, "R3"))))
        return out


class AbsQ(_AddRemoveSpec):
    """The poset-based abstract queue over calls, returns and ``lin(deq, d, k)``."""

    kind = "queue"
    name = "absq"

    def __init__(self, workload: Workload):
        super().__init__(workload)
        self.initial = AbsQState()

    def successors(self, s: AbsQState):
        out = []
        for o in self._calls(s.cp):
            k = o.op
            if o.method == "enq":
                below = frozenset((c, k) for c in s.completed())
                out.append((call("enq", k, o.value),
                            AbsQState(s.O | {k}, s.ord | below, s.lab.set(k, (o.value, PEND)),
                                      s.rv, s.cp.set(k, "A1"))))
            else:
                out.append((call("deq", k), AbsQState(s.O, s.ord, s.lab, s.rv, s.cp.set(k, "R1"))))
        for k, point in s.cp.items():
            if point == "A1":
                if k in s.O:
                    d = s.lab[k][0]
                    out.append((ret("enq", k),
                                AbsQState(s.O, s.ord, s.lab.set(k, (d, COMP)), s.rv, s.cp.set(k, "A2"))))
                else:
                    out.append((ret("enq", k), AbsQState(s.O, s.ord, s.lab, s.rv, s.cp.set(k, "A2"))))
            elif point == "R1":
                for victim in sorted(minimal_ops(s)):
                    d = s.lab[victim][0]
                    out.append((lin("deq", k, d),
                                AbsQState(s.O - {victim}, strip(s.ord, victim), s.lab.without(victim),
                                          s.rv.set(k, d), s.cp.set(k, "R2"))))
                if all(s.lab[o][1] == PEND for o in s.O):
                    out.append((lin("deq", k, EMPTY),
                                AbsQState(s.O, s.ord, s.lab, s.rv.set(k, EMPTY), s.cp.set(k, "R2"))))
            elif point == "R2":
                out.append((ret("deq", k, s.rv[k]), AbsQState(s.O, s.ord, s.lab, s.rv, s.cp.set(k, "R3"))))
        return out

    def describe(self, s: AbsQState):
        return {
            "O": sorted(s.O),
            "ord": sorted(s.ord),
            "lab": {str(k): [v if v is not EMPTY else "EMPTY", f] for k, (v, f) in sorted(s.lab.items())},
            "rv": {str(k): (v if v is not EMPTY else "EMPTY") for k, v in sorted(s.rv.items())},
            "cp": {str(k): v for k, v in sorted(s.cp.items())},
        }


def check_state_invariants(s: AbsQState) -> list[str]:
    """Violated AbsQ state invariants (empty when all hold)."""
    problems = []
    if any(a == b for a, b in s.ord) or transitive_closure(s.ord) != s.ord:
        problems.append("ord is not a strict partial order")
    if any(a not in s.O or b not in s.O for a, b in s.ord):
        problems.append("ord mentions ops outside O")
    if any(s.lab[a][1] == PEND for a, _ in s.ord):
        problems.append("a pending op has a successor")
    values = [s.lab[k][0] for k in s.O]
    if len(set(values)) != len(values):
        problems.append("duplicate values in O")
    return problems
