"""Bounded simulation and refinement checkers.

``check_forward_simulation`` walks the product of an implementation and a
Γ-deterministic specification: an observable implementation step must be
matched by the unique specification step with the same label, an internal
step by staying put, and the relation must hold after every step.  Passing
means the relation is a forward simulation on every reachable pair.

Refinement and history equality are decided on determinised automata, which
is exact for finite systems.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

from .lts import (BoundExceeded, Determinizer, ExplorationBounds, Kind, LabelPredicate,
                  TransitionSystem, _sorted_labels, find_trace, gamma_cr, ordered_successors,
                  reachable_graph, replay)
from .verdict import Verdict


class SpecNotDeterministic(Exception):
    def __init__(self, message: str, label=None, states=()):
        super().__init__(message)
        self.label = label
        self.states = list(states)


@dataclass
class RelationPredicate:
    """A relation between implementation and specification states.

    ``explain`` (optional) names the violated clauses of a failing pair.
    """

    holds: Callable
    initial_pair: tuple
    name: str = "relation"
    explain: Callable | None = None

    def __post_init__(self):
        s0, u0 = self.initial_pair
        if not self.holds(s0, u0):
            raise ValueError(f"{self.name} does not relate the initial states")

    def clauses(self, s, u) -> list[str]:
        return list(self.explain(s, u)) if self.explain is not None else []


def equality_relation(impl: TransitionSystem, spec: TransitionSystem) -> RelationPredicate:
    return RelationPredicate(lambda s, u: s == u, (impl.initial, spec.initial), "equality")


def _path(parent: dict, node) -> list:
    trace = []
    while parent[node] is not None:
        node, label = parent[node]
        trace.append(label)
    return trace[::-1]


def _pair_json(impl, spec, s, u) -> dict:
    return {"impl": impl.describe(s), "spec": spec.describe(u)}


def _tau_closure(spec: TransitionSystem, u, gamma) -> list:
    seen = {u: None}
    queue = deque([u])
    while queue:
        v = queue.popleft()
        for label, w in ordered_successors(spec, v):
            if not gamma(label) and w not in seen:
                seen[w] = None
                queue.append(w)
    return list(seen)


def _spec_matches(spec, u, label, gamma, general: bool) -> list:
    """Specification states reachable from ``u`` by a step matching ``label``."""
    if not general:
        if not gamma(label):
            return [u]
        targets = list(dict.fromkeys(w for lab, w in spec.successors(u) if lab == label))
        if len(targets) > 1:
            raise SpecNotDeterministic(f"{spec.name}: two successors for {label}", label, targets)
        return targets
    before = _tau_closure(spec, u, gamma)
    if not gamma(label):
        return before
    out = []
    for v in before:
        for lab, w in spec.successors(v):
            if lab == label:
                out.extend(_tau_closure(spec, w, gamma))
    return list(dict.fromkeys(out))


def check_forward_simulation(impl: TransitionSystem, spec: TransitionSystem, gamma: LabelPredicate,
                             rel: RelationPredicate, bounds: ExplorationBounds | None = None,
                             general: bool = False) -> Verdict:
    """Check that ``rel`` is a Γ-forward simulation from ``impl`` to ``spec``.

    By default an observable step is matched by exactly one spec step and an
    internal step by none, which is complete when the spec alphabet is Γ and
    the spec is Γ-deterministic.  ``general=True`` also allows unobservable
    spec steps around the match and keeps every related candidate.
    """
    bounds = bounds or ExplorationBounds()
    start = rel.initial_pair
    parent = {start: None}
    queue = deque([start])
    obligations = 0
    while queue:
        node = queue.popleft()
        s, u = node
        for label, s2 in ordered_successors(impl, s):
            obligations += 1
            candidates = _spec_matches(spec, u, label, gamma, general)
            related = [u2 for u2 in candidates if rel.holds(s2, u2)]
            if not related:
                trace = _path(parent, node) + [label]
                if not candidates:
                    return Verdict.fail(f"match {label}", trace=trace, pair=_pair_json(impl, spec, s, u),
                                        message=f"{spec.name} has no step matching {label}",
                                        step=label.to_json())
                u2 = candidates[0]
                return Verdict.fail(f"{rel.name} after {label}", trace=trace,
                                    pair=_pair_json(impl, spec, s2, u2),
                                    message=f"{rel.name} fails after {label}",
                                    step=label.to_json(), clauses=rel.clauses(s2, u2))
            for u2 in related:
                nxt = (s2, u2)
                if nxt not in parent:
                    if len(parent) >= bounds.max_states:
                        return Verdict.bound_exceeded(
                            f"more than {bounds.max_states} related pairs")
                    parent[nxt] = (node, label)
                    queue.append(nxt)
    return Verdict.ok(pairs=len(parent), obligations=obligations)


def check_normal_forward_simulation(impl, spec, gamma, rel, bounds=None) -> Verdict:
    """Normal Γ-forward simulation: calls start and returns end their matching
    sequence, other observable steps are matched exactly, internal steps by
    unobservable sequences."""
    bounds = bounds or ExplorationBounds()
    start = rel.initial_pair
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        s, u = node
        for label, s2 in ordered_successors(impl, s):
            if label.kind is Kind.CALL:
                mids = [w for lab, w in spec.successors(u) if lab == label]
                candidates = [x for w in mids for x in _tau_closure(spec, w, gamma)]
            elif label.kind is Kind.RET:
                candidates = [w for v in _tau_closure(spec, u, gamma)
                              for lab, w in spec.successors(v) if lab == label]
            elif gamma(label):
                candidates = [w for lab, w in spec.successors(u) if lab == label]
            else:
                candidates = _tau_closure(spec, u, gamma)
            related = list(dict.fromkeys(w for w in candidates if rel.holds(s2, w)))
            if not related:
                return Verdict.fail(f"normal forward step {label}", trace=_path(parent, node) + [label],
                                    pair=_pair_json(impl, spec, s, u),
                                    message=f"no related spec state matches {label}")
            for w in related:
                if (s2, w) not in parent:
                    if len(parent) >= bounds.max_states:
                        return Verdict.bound_exceeded(f"more than {bounds.max_states} related pairs")
                    parent[(s2, w)] = (node, label)
                    queue.append((s2, w))
    return Verdict.ok(pairs=len(parent))


def _reverse_tau(graph, gamma):
    rev = [[] for _ in graph.states]
    for a, label, b in graph.edges():
        if not gamma(label):
            rev[b].append(a)
    cache: dict = {}

    def back(j):
        got = cache.get(j)
        if got is None:
            seen = {j}
            stack = [j]
            while stack:
                x = stack.pop()
                for y in rev[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            got = cache[j] = frozenset(seen)
        return got
    return back


def check_normal_backward_simulation(lhs: TransitionSystem, rhs: TransitionSystem, gamma: LabelPredicate,
                                     rel: Callable, bounds: ExplorationBounds | None = None) -> Verdict:
    """Normal Γ-backward simulation over the reachable graphs of both sides.

    For every lhs step ``s -l-> s'`` and rhs state ``u'`` related to ``s'``
    some ``u`` related to ``s`` must reach ``u'`` by a sequence shaped by
    ``l``: call first, return last, other observable actions alone, internal
    steps by unobservable sequences.  Unobservable predecessors are computed
    exactly by reverse closure.  ``rel`` may be a RelationPredicate or a
    plain two-argument function.
    """
    bounds = bounds or ExplorationBounds()
    holds = rel.holds if isinstance(rel, RelationPredicate) else rel
    try:
        g1 = reachable_graph(lhs, bounds)
        g2 = reachable_graph(rhs, bounds)
    except BoundExceeded as exc:
        return Verdict.bound_exceeded(str(exc))
    related = [frozenset(j for j, u in enumerate(g2.states) if holds(s, u)) for s in g1.states]
    if related[0] != {0}:
        return Verdict.fail("(i) initial states", pair={"impl": lhs.describe(g1.states[0]),
                                                        "spec": [rhs.describe(g2.states[j]) for j in related[0]]},
                            message="the initial lhs state must be related to exactly the initial rhs state")
    back = _reverse_tau(g2, gamma)
    into: dict = {}
    for a, label, b in g2.edges():
        into.setdefault((b, label), []).append(a)
    out_by_label: dict = {}
    for a, label, b in g2.edges():
        out_by_label.setdefault((a, label), []).append(b)
    parent = {0: None}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for label, j in g1.out[i]:
            if j not in parent:
                parent[j] = (i, label)
                queue.append(j)
    checked = 0
    for i in range(len(g1.states)):
        for label, j in g1.out[i]:
            for v2 in sorted(related[j]):
                checked += 1
                if label.kind is Kind.CALL:
                    clause = "(ii-a)"
                    preds = {a for m in back(v2) for a in into.get((m, label), ())}
                elif label.kind is Kind.RET:
                    clause = "(ii-b)"
                    preds = {x for m in into.get((v2, label), ()) for x in back(m)}
                elif gamma(label):
                    clause = "(ii-c)"
                    preds = set(into.get((v2, label), ()))
                else:
                    clause = "(ii-d)"
                    preds = set(back(v2))
                if not preds & related[i]:
                    return Verdict.fail(clause, trace=_path(parent, i) + [label],
                                        pair={"impl": lhs.describe(g1.states[j]),
                                              "spec": rhs.describe(g2.states[v2])},
                                        message=f"no related predecessor for {label}")
    return Verdict.ok(lhs_states=len(g1.states), rhs_states=len(g2.states), obligations=checked)


def check_gamma_refinement(impl_a: TransitionSystem, impl_b: TransitionSystem, gamma: LabelPredicate,
                           bounds: ExplorationBounds | None = None) -> Verdict:
    """Every Γ-projected trace of ``impl_a`` is a Γ-projected trace of ``impl_b``.

    Decided on the product of the two determinised automata, which covers
    traces of every length the finite systems admit.
    """
    bounds = bounds or ExplorationBounds()
    try:
        ga = reachable_graph(impl_a, bounds)
        gb = reachable_graph(impl_b, bounds)
    except BoundExceeded as exc:
        return Verdict.bound_exceeded(str(exc))
    da, db = Determinizer(ga, gamma), Determinizer(gb, gamma)
    start = (da.initial(), db.initial())
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        ma, mb = node
        step_a, step_b = da.step(ma), db.step(mb)
        for label in _sorted_labels(step_a):
            if label not in step_b:
                projected = _path(parent, node) + [label]
                return Verdict.fail("gamma-refinement", trace=find_trace(ga, projected, gamma) or projected,
                                    message=f"{impl_b.name} cannot produce this projected trace",
                                    projected=[e.to_json() for e in projected])
            nxt = (step_a[label], step_b[label])
            if nxt not in parent:
                parent[nxt] = (node, label)
                queue.append(nxt)
    return Verdict.ok(pairs=len(parent), states_a=len(ga.states), states_b=len(gb.states))


def histories_equal(sys_a: TransitionSystem, sys_b: TransitionSystem,
                    bounds: ExplorationBounds | None = None) -> Verdict:
    """Whether both systems have the same call/return histories."""
    forward = check_gamma_refinement(sys_a, sys_b, gamma_cr, bounds)
    if not forward.passed:
        if forward.obligation:
            forward.obligation = "histories: only in a"
            forward.witness["history"] = forward.witness.pop("projected")
        return forward
    backward = check_gamma_refinement(sys_b, sys_a, gamma_cr, bounds)
    if not backward.passed:
        if backward.obligation:
            backward.obligation = "histories: only in b"
            backward.witness["history"] = backward.witness.pop("projected")
        return backward
    return Verdict.ok(a=forward.stats, b=backward.stats)


def replay_counterexample(impl: TransitionSystem, spec: TransitionSystem, gamma: LabelPredicate,
                          rel: RelationPredicate, trace) -> Verdict:
    """Re-run a forward-simulation counterexample trace and report the first failure.

    The implementation is replayed label by label and the spec follows the
    observable labels; the result is a Fail at the same step, or Pass if the
    trace no longer exhibits a violation.
    """
    s, u = rel.initial_pair
    done = []
    for label in trace:
        s_next = replay(impl, [label], start=s)[-1]
        done.append(label)
        if gamma(label):
            targets = [w for lab, w in spec.successors(u) if lab == label]
            if not targets:
                return Verdict.fail(f"match {label}", trace=done, pair=_pair_json(impl, spec, s, u),
                                    message=f"{spec.name} has no step matching {label}")
            u = targets[0]
        s = s_next
        if not rel.holds(s, u):
            return Verdict.fail(f"{rel.name} after {label}", trace=done, pair=_pair_json(impl, spec, s, u),
                                clauses=rel.clauses(s, u))
    return Verdict.ok(steps=len(done))
