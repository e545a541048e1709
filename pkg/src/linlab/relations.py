"""The concrete simulation relations: HWQ to AbsQ and TSS to AbsS.

Both are total predicates over (implementation state, specification state).
Each clause is a separate function so a failing pair can name what broke.
"""
from __future__ import annotations

from .frozen import immediate_predecessors
from .hwq import D_CHECK, D_INC, D_SWAP, E1, E2, E3, EDONE, HWQ, HWQState, if_inc
from .simulation import RelationPredicate
from .spec_queue import COMP, PEND, AbsQ, AbsQState
from .spec_stack import AbsS, AbsSState
from .tss import MAX_INT, TSS, TSSState, node_before

# -- HWQ to AbsQ -------------------------------------------------------------


def _enqueues(s: HWQState):
    return [k for k, p in s.cp.items() if p in (E1, E2, E3, EDONE)]


def fs1_expected_ops(s: HWQState) -> frozenset:
    """Enqueues that have not written yet, plus those whose value is still stored."""
    out = set()
    for k in _enqueues(s):
        point = s.cp[k]
        if point in (E1, E2) or s.items[s.i[k]] == s.x[k]:
            out.add(k)
    return frozenset(out)


def _fs1_membership(s, t):
    return t.O == fs1_expected_ops(s)


def _fs1_labels(s, t):
    return all(t.lab.get(k) == (s.x[k], COMP if s.cp[k] == EDONE else PEND) for k in t.O)


def _fs1_pending_maximal(s, t):
    return not any(s.cp[a] != EDONE for a, _ in t.ord)


def _fs1_reservation_order(s, t):
    return not any(a in s.i and b in s.i and s.i[b] < s.i[a] for a, b in t.ord)


def _fs1_observed(s, t):
    """No ``k < k'`` when a scanning dequeue has seen ``i(k)`` empty and may still reach ``i(k')``."""
    scanners = [kd for kd, p in s.cp.items()
                if p in (D_SWAP, D_CHECK, D_INC) and s.x.get(kd) is None and kd in s.range]
    for kd in scanners:
        i_d, rng = s.i[kd], s.range[kd]
        for a, b in t.ord:
            if a not in s.i or b not in s.i:
                continue
            ia, ib = s.i[a], s.i[b]
            if ib <= rng and ia <= i_d <= ib and (ia != i_d or if_inc(s, kd)):
                return False
    return True


def _fs1_return_values(s, t):
    return all(t.rv.get(k) == s.x[k] for k, p in s.cp.items()
               if p.startswith("D") and s.x.get(k) is not None)


FS1_CLAUSES = {
    "membership": _fs1_membership,
    "labels": _fs1_labels,
    "(a) pending maximal": _fs1_pending_maximal,
    "(b) reservation order": _fs1_reservation_order,
    "(c) observed positions": _fs1_observed,
    "return values": _fs1_return_values,
}


def fs1_violations(s: HWQState, t: AbsQState) -> list[str]:
    return [name for name, clause in FS1_CLAUSES.items() if not clause(s, t)]


def fs1_holds(s: HWQState, t: AbsQState) -> bool:
    return all(clause(s, t) for clause in FS1_CLAUSES.values())


def fs1_relation(impl: HWQ, spec: AbsQ) -> RelationPredicate:
    return RelationPredicate(fs1_holds, (impl.initial, spec.initial), "fs1", fs1_violations)


# -- TSS to AbsS --------------------------------------------------------------

_CREATED = ("A2", "A3", "A4", "A5", "A6")


class _Fs2View:
    """Derived facts about a (TSS state, AbsS state) pair, computed once."""

    def __init__(self, tss: TSS, s: TSSState, t: AbsSState):
        self.tss, self.s, self.t = tss, s, t
        self.pushes = [k for k in s.cp if tss.decl[k].is_add]
        self.node = {k: tss.node_index(k) for k in self.pushes if s.cp[k] in _CREATED}
        self.open_pops = [p for p, point in t.cp.items() if point == "R1"]

    def ts(self, k) -> int:
        return self.s.nodes[self.node[k]].ts

    def taken(self, k) -> bool:
        return self.s.nodes[self.node[k]].taken

    def candidates(self, p) -> frozenset:
        return self.t.be[p] | self.t.ov[p]

    def before(self, a: int, b: int) -> bool:
        return node_before(self.tss, self.s, a, b)

    def scanning(self):
        """Pops that are mid-traversal, with their current node."""
        for p in self.open_pops:
            if self.s.cp.get(p) in ("R2", "R3", "R4", "R5") and self.s.n.get(p) is not None:
                yield p, self.s.n[p]


def _fs2_nodes(v: _Fs2View):
    expected = {k for k in v.pushes if v.s.cp[k] == "A1" or k not in v.node or not v.taken(k)}
    return v.t.O == expected


def _fs2_pend_comp(v: _Fs2View):
    for k in v.t.O:
        flag = COMP if v.s.cp[k] == "A6" else PEND
        if v.t.lab.get(k) != (v.tss.decl[k].value, flag):
            return False
    return not any(v.t.lab[a][1] == PEND for a, _ in v.t.ord)


def _fs2_ts_order(v: _Fs2View):
    return not any(a in v.node and b in v.node and v.ts(b) <= v.ts(a) for a, b in v.t.ord)


def _fs2_tid_order(v: _Fs2View):
    live = [k for k in v.t.O if k in v.node]
    for a in live:
        for b in live:
            if a != b and v.tss.tid(a) == v.tss.tid(b) and v.ts(a) < v.ts(b) and (a, b) not in v.t.ord:
                return False
    return True


def _fs2_frontiers(v: _Fs2View):
    t = v.t
    for k in t.O:
        pending = t.lab[k][1] == PEND
        closed = not pending and all(t.lab[b][1] == PEND for a, b in t.ord if a == k)
        for p in v.open_pops:
            if pending and k not in t.ov[p]:
                return False
            if closed and k not in v.candidates(p):
                return False
    return True


def _fs2_maximal_ov(v: _Fs2View):
    for p in v.open_pops:
        cand = v.candidates(p)
        if any(a in cand and b not in v.t.ov[p] for a, b in v.t.ord):
            return False
    return True


def _fs2_minimal_be(v: _Fs2View):
    for p in v.open_pops:
        cand = v.candidates(p)
        if any(b in v.t.be[p] and a in cand for a, b in v.t.ord):
            return False
    return True


def _fs2_reverse_frontiers(v: _Fs2View):
    t = v.t
    followers = {k: [b for b in t.O if k in immediate_predecessors(b, t.O, t.ord)] for k in t.O}
    for p in v.open_pops:
        for k in t.O:
            if all(b in t.ov[p] for b in followers[k]) and k not in v.candidates(p):
                return False
    return True


def _fs2_fix_return(v: _Fs2View):
    s = v.s
    for p, point in s.cp.items():
        if point == "R6" and s.success.get(p):
            if v.t.rv.get(p) != s.nodes[s.youngest[p]].data:
                return False
    return True


def _fs2_traverse_before(v: _Fs2View):
    for p, cur in v.scanning():
        y = v.s.youngest.get(p)
        if y is None:
            continue
        y_ts = v.s.nodes[y].ts
        for k in v.t.O:
            if k not in v.node or v.node[k] == y or v.taken(k):
                continue
            if v.before(v.node[k], cur) and v.ts(k) >= y_ts and k not in v.t.ov[p]:
                return False
    return True


def _fs2_traverse_before_null(v: _Fs2View):
    for p, cur in v.scanning():
        if v.s.youngest.get(p) is not None:
            continue
        for k in v.t.O:
            if k in v.node and not v.taken(k) and v.before(v.node[k], cur) and k not in v.t.ov[p]:
                return False
    return True


def _fs2_traverse_after(v: _Fs2View):
    s, t = v.s, v.t
    for p, cur in v.scanning():
        y = s.youngest.get(p)
        if y is None or s.nodes[y].taken:
            continue
        k = v.tss.push_of(y)
        visited = v.tss.push_of(cur)
        if k is None or k not in t.O or visited is None or visited not in t.O:
            continue
        if k in v.candidates(p):
            continue
        ok = False
        for k2 in t.O:
            if k2 not in v.node or v.ts(k2) <= v.ts(k) or k2 not in v.candidates(p):
                continue
            if v.before(cur, v.node[k2]) or (cur == v.node[k2] and s.cp[p] in ("R2", "R3", "R4")):
                ok = True
                break
        if not ok:
            return False
    return True


FS2_CLAUSES = {
    "Nodes": _fs2_nodes,
    "Pend/Comp": _fs2_pend_comp,
    "TSOrder": _fs2_ts_order,
    "TidOrder": _fs2_tid_order,
    "Frontiers": _fs2_frontiers,
    "MaximalOV": _fs2_maximal_ov,
    "MinimalBE": _fs2_minimal_be,
    "ReverseFrontiers": _fs2_reverse_frontiers,
    "FixReturn": _fs2_fix_return,
    "TraverseBefore": _fs2_traverse_before,
    "TraverseBeforeNull": _fs2_traverse_before_null,
    "TraverseAfter": _fs2_traverse_after,
}


def fs2_violations(tss: TSS, s: TSSState, t: AbsSState) -> list[str]:
    view = _Fs2View(tss, s, t)
    return [name for name, clause in FS2_CLAUSES.items() if not clause(view)]


def fs2_holds(tss: TSS, s: TSSState, t: AbsSState) -> bool:
    view = _Fs2View(tss, s, t)
    return all(clause(view) for clause in FS2_CLAUSES.values())


def fs2_relation(impl: TSS, spec: AbsS) -> RelationPredicate:
    return RelationPredicate(lambda s, t: fs2_holds(impl, s, t), (impl.initial, spec.initial), "fs2",
                             lambda s, t: fs2_violations(impl, s, t))


__all__ = ["fs1_holds", "fs1_violations", "fs1_relation", "fs1_expected_ops", "FS1_CLAUSES",
           "fs2_holds", "fs2_violations", "fs2_relation", "FS2_CLAUSES", "MAX_INT"]
