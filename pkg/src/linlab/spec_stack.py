"""Reference stacks: the sequence-based AbsS0 and the frontier-tracking AbsS.

AbsS keeps the same happens-before poset of live pushes as AbsQ, but pops
commit instead of linearizing.  At its call a pop snapshots ``be`` (the
greatest completed pushes) and ``ov`` (pushes pending or started later);
a pop may commit the value of any push in ``be`` or ``ov``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .frozen import FMap, immediate_predecessors, strip, transitive_closure
from .lts import EMPTY, com, ret, call
from .spec_queue import COMP, PEND, AbsQ0, _AddRemoveSpec


class AbsS0(AbsQ0):
    """The atomic stack: removal takes the most recently added value."""

    kind = "stack"
    name = "abss0"
    add = "push"
    remove = "pop"

    def _take(self, sigma):
        return sigma[0], sigma[1:]


@dataclass(frozen=True)
class AbsSState:
    O: frozenset = frozenset()
    ord: frozenset = frozenset()
    lab: FMap = FMap()
    rv: FMap = FMap()
    cp: FMap = FMap()
    be: FMap = FMap()
    ov: FMap = FMap()

    @classmethod
    def make(cls, O=(), ord=(), lab=None, rv=None, cp=None, be=None, ov=None) -> "AbsSState":
        return cls(frozenset(O), transitive_closure(ord), FMap(lab or {}), FMap(rv or {}),
                   FMap(cp or {}),
                   FMap({k: frozenset(v) for k, v in (be or {}).items()}),
                   FMap({k: frozenset(v) for k, v in (ov or {}).items()}))

    def completed(self) -> frozenset:
        return frozenset(k for k in self.O if self.lab[k][1] == COMP)

    def pending(self) -> frozenset:
        return frozenset(k for k in self.O if self.lab[k][1] == PEND)

    def replace(self, **changes) -> "AbsSState":
        fields = dict(O=self.O, ord=self.ord, lab=self.lab, rv=self.rv, cp=self.cp, be=self.be, ov=self.ov)
        fields.update(changes)
        return AbsSState(**fields)


def max_completed(state: AbsSState) -> frozenset:
    """Completed pushes with no completed successor (every later push is still pending)."""
    comp = state.completed()
    return frozenset(k for k in comp if not any((k, k2) in state.ord for k2 in comp))


def pred(state: AbsSState, k) -> frozenset:
    """Immediate predecessors of ``k`` in the order."""
    return immediate_predecessors(k, state.O, state.ord)


def recompute_be(state: AbsSState, removed) -> FMap:
    """The ``be`` map after ``removed`` is taken out of the poset.

    Each pop whose ``be`` held ``removed`` inherits those immediate
    predecessors of ``removed`` whose other immediate successors all overlap
    that pop.
    """
    preds = pred(state, removed)
    others = {k2: [k3 for k3 in state.O if k3 != removed and (k2, k3) in state.ord
                   and k2 in pred(state, k3)]
              for k2 in preds}
    updated = {}
    for k1, frontier in state.be.items():
        if removed not in frontier:
            continue
        ov = state.ov.get(k1, frozenset())
        gained = {k2 for k2 in preds if all(k3 in ov for k3 in others[k2])}
        updated[k1] = (frontier - {removed}) | gained
    return state.be.update(updated) if updated else state.be


class AbsS(_AddRemoveSpec):
    """The abstract stack over calls, returns and ``com(pop, d, k)``."""

    kind = "stack"
    name = "abss"
    add = "push"
    remove = "pop"

    def __init__(self, workload):
        super().__init__(workload)
        self.initial = AbsSState()

    def successors(self, s: AbsSState):
        out = []
        for o in self._calls(s.cp):
            k = o.op
            if o.method == "push":
                below = frozenset((c, k) for c in s.completed())
                # Only pops that have not committed yet can still observe the push.
                ov = s.ov.update({p: v | {k} for p, v in s.ov.items() if s.cp[p] == "R1"})
                out.append((call("push", k, o.value),
                            s.replace(O=s.O | {k}, ord=s.ord | below, lab=s.lab.set(k, (o.value, PEND)),
                                      cp=s.cp.set(k, "A1"), ov=ov)))
            else:
                out.append((call("pop", k),
                            s.replace(cp=s.cp.set(k, "R1"), be=s.be.set(k, max_completed(s)),
                                      ov=s.ov.set(k, s.pending()))))
        for k, point in s.cp.items():
            if point == "A1":
                if k in s.O:
                    d = s.lab[k][0]
                    out.append((ret("push", k),
                                s.replace(lab=s.lab.set(k, (d, COMP)), cp=s.cp.set(k, "A2"))))
                else:
                    out.append((ret("push", k), s.replace(cp=s.cp.set(k, "A2"))))
            elif point == "R1":
                candidates = (s.be[k] | s.ov[k]) & s.O
                for victim in sorted(candidates):
                    d = s.lab[victim][0]
                    be = recompute_be(s, victim)
                    ov = FMap({p: v - {victim} for p, v in s.ov.items()})
                    out.append((com("pop", k, d),
                                s.replace(O=s.O - {victim}, ord=strip(s.ord, victim),
                                          lab=s.lab.without(victim), rv=s.rv.set(k, d),
                                          cp=s.cp.set(k, "R2"), be=be, ov=ov)))
                if not s.be[k]:
                    out.append((com("pop", k, EMPTY),
                                s.replace(rv=s.rv.set(k, EMPTY), cp=s.cp.set(k, "R2"))))
            elif point == "R2":
                out.append((ret("pop", k, s.rv[k]), s.replace(cp=s.cp.set(k, "R3"))))
        return out

    def describe(self, s: AbsSState):
        def show(v):
            return "EMPTY" if v is EMPTY else v
        return {
            "O": sorted(s.O),
            "ord": sorted(s.ord),
            "lab": {str(k): [show(v), f] for k, (v, f) in sorted(s.lab.items())},
            "rv": {str(k): show(v) for k, v in sorted(s.rv.items())},
            "cp": {str(k): v for k, v in sorted(s.cp.items())},
            "be": {str(k): sorted(v) for k, v in sorted(s.be.items())},
            "ov": {str(k): sorted(v) for k, v in sorted(s.ov.items())},
        }


def check_state_invariants(s: AbsSState) -> list[str]:
    """Violated AbsS state invariants (empty when all hold)."""
    problems = []
    if any(a == b for a, b in s.ord) or transitive_closure(s.ord) != s.ord:
        problems.append("ord is not a strict partial order")
    if any(s.lab[a][1] == PEND for a, _ in s.ord):
        problems.append("a pending push has a successor")
    values = [s.lab[k][0] for k in s.O]
    if len(set(values)) != len(values):
        problems.append("duplicate values in O")
    pops = {k for k, p in s.cp.items() if p.startswith("R")}
    if set(s.be) != pops or set(s.ov) != pops:
        problems.append("be/ov not defined exactly for started pops")
    for p in pops:
        if s.be[p] & s.ov[p]:
            problems.append(f"be({p}) and ov({p}) overlap")
        if s.cp[p] != "R1":
            continue
        for k1, k2 in s.ord:
            if k2 in s.be[p] and (k1 in s.be[p] or k1 in s.ov[p]):
                problems.append(f"push {k1} below be({p}) member {k2} is still a candidate")
    return problems
