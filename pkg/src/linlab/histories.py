"""Histories: well-formedness, the weakening order, a brute-force
linearizability oracle and the library closure checks."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .lts import (EMPTY, ActionLabel, BoundExceeded, ExplorationBounds, Kind, StateGraph,
                  TransitionSystem, call, reachable_graph, ret)
from .verdict import Verdict

History = tuple  # of call/return ActionLabels


def is_well_formed(events: Sequence[ActionLabel]) -> bool:
    """Every return follows a matching call; each op has at most one call and one return."""
    called: dict = {}
    returned = set()
    for e in events:
        if e.kind is Kind.CALL:
            if e.op in called:
                return False
            called[e.op] = e.method
        elif e.kind is Kind.RET:
            if e.op not in called or e.op in returned or called[e.op] != e.method:
                return False
            returned.add(e.op)
        else:
            return False
    return True


@dataclass(frozen=True)
class _Op:
    op: int
    method: str
    arg: object  # input value, or None
    result: object  # return value; None for no-result methods or pending ops
    call_pos: int
    ret_pos: int | None

    @property
    def pending(self) -> bool:
        return self.ret_pos is None


def _operations(events: Sequence[ActionLabel]) -> dict[int, _Op]:
    calls, rets = {}, {}
    for pos, e in enumerate(events):
        (calls if e.kind is Kind.CALL else rets)[e.op] = (pos, e)
    ops = {}
    for k, (pos, e) in calls.items():
        rpos, r = rets.get(k, (None, None))
        ops[k] = _Op(k, e.method, e.value, None if r is None else r.value, pos, rpos)
    return ops


def _precedes(a: _Op, b: _Op) -> bool:
    return a.ret_pos is not None and a.ret_pos < b.call_pos


def weaker_than(h1: Sequence[ActionLabel], h2: Sequence[ActionLabel]) -> bool:
    """``h1 ⊑ h2``: complete/trim the pending ops of ``h1`` and reorder into ``h2``
    without breaking any return-before-call ordering of ``h1``.

    The completion is forced by ``h2``: an op pending in ``h1`` is dropped if
    ``h2`` lacks it, given the return ``h2`` shows if it completes there, and
    kept pending otherwise.  Appended returns go after every call, so the
    return-before-call pairs to preserve are exactly those of ``h1``.
    """
    if not (is_well_formed(h1) and is_well_formed(h2)):
        return False
    ops1, ops2 = _operations(h1), _operations(h2)
    for k, o2 in ops2.items():
        o1 = ops1.get(k)
        if o1 is None or (o1.method, o1.arg) != (o2.method, o2.arg):
            return False
        if not o1.pending and (o2.pending or o1.result != o2.result):
            return False
    if any(not o.pending and k not in ops2 for k, o in ops1.items()):
        return False
    kept = [ops1[k] for k in ops2]
    return all(_precedes(ops2[a.op], ops2[b.op]) for a in kept for b in kept if _precedes(a, b))


@dataclass(frozen=True)
class SequentialSpec:
    """A sequential collection: ``step(content, method, arg) -> (result, content)``."""

    kind: str
    step: Callable

    def replay(self, history: Sequence[ActionLabel]) -> bool:
        """Whether a sequential, complete history is admitted."""
        content = ()
        ops = _operations(history)
        order = sorted(ops.values(), key=lambda o: o.call_pos)
        for a, b in zip(order, order[1:]):
            if a.ret_pos is None or a.ret_pos > b.call_pos:
                return False
        for o in order:
            if o.pending:
                return False
            result, content = self.step(content, o.method, o.arg)
            if result != o.result:
                return False
        return True


_ADDS = ("enq", "push")


def _queue_step(content: tuple, method: str, arg):
    if method in _ADDS:
        return None, content + (arg,)
    if content:
        return content[0], content[1:]
    return EMPTY, content


def _stack_step(content: tuple, method: str, arg):
    if method in _ADDS:
        return None, content + (arg,)
    if content:
        return content[-1], content[:-1]
    return EMPTY, content


QUEUE = SequentialSpec("Queue", _queue_step)
STACK = SequentialSpec("Stack", _stack_step)


def spec_for(kind: str) -> SequentialSpec:
    return QUEUE if kind.lower() == "queue" else STACK


def _sequential(steps: Sequence[tuple[_Op, object]]) -> list[ActionLabel]:
    out = []
    for o, result in steps:
        out.append(call(o.method, o.op, o.arg))
        out.append(ret(o.method, o.op, result))
    return out


def _search(events: Sequence[ActionLabel], spec: SequentialSpec, find_all: bool) -> Iterator[list]:
    ops = _operations(events)
    order = sorted(ops)
    must = frozenset(k for k in order if not ops[k].pending)
    preds = {k: frozenset(j for j in order if _precedes(ops[j], ops[k])) for k in order}
    dead: set = set()

    def dfs(done: frozenset, content: tuple, path: list) -> Iterator[list]:
        if must <= done:
            yield list(path)
            if not find_all:
                return
        key = (done, content)
        if not find_all and key in dead:
            return
        found = False
        for k in order:
            if k in done or not preds[k] <= done:
                continue
            o = ops[k]
            result, nxt = spec.step(content, o.method, o.arg)
            if not o.pending and result != o.result:
                continue
            path.append((o, result))
            for w in dfs(done | {k}, nxt, path):
                found = True
                yield w
                if not find_all:
                    path.pop()
                    return
            path.pop()
        if not found:
            dead.add(key)

    yield from dfs(frozenset(), (), [])


def is_linearizable(h: Sequence[ActionLabel], spec: SequentialSpec) -> Verdict:
    """Brute force: try every real-time-respecting order of the completed ops
    plus any subset of the pending ones, replaying against ``spec``.

    The witness is the first linearization in op-id order of exploration.
    """
    if not is_well_formed(h):
        raise ValueError("history is not well formed")
    for steps in _search(h, spec, find_all=False):
        return Verdict.ok(linearization=[e.to_json() for e in _sequential(steps)],
                          order=[o.op for o, _ in steps])
    return Verdict.fail("linearizability", trace=h, message="no linearization is admitted by the "
                        f"{spec.kind} specification")


def linearizations(h: Sequence[ActionLabel], spec: SequentialSpec) -> list[list[ActionLabel]]:
    """Every linearization of ``h`` admitted by ``spec`` (exponential; tiny histories only).

    Pending operations are either dropped or completed; when every completed
    op is placed, the remaining pending ops are dropped.
    """
    if not is_well_formed(h):
        raise ValueError("history is not well formed")
    return [_sequential(steps) for steps in _search(h, spec, find_all=True)]


def history_to_json(h: Sequence[ActionLabel]) -> list:
    return [e.to_json() for e in h]


def history_from_json(raw) -> tuple:
    if isinstance(raw, str):
        raw = json.loads(raw)
    return tuple(ActionLabel.from_json(e) for e in raw)


# -- library closure ----------------------------------------------------------

class NotLabelDeterministic(ValueError):
    pass


def _thread_of(system: TransitionSystem) -> Callable:
    """Thread of an op, when the system ties ops to threads (None otherwise)."""
    decl = getattr(getattr(system, "workload", None), "ops", ())
    threads = {o.op: o.thread for o in decl}
    return lambda k: threads.get(k)


class _Closure:
    def __init__(self, system: TransitionSystem, graph: StateGraph):
        self.system = system
        self.graph = graph
        self.succ = []
        for i, edges in enumerate(graph.out):
            table = {}
            for label, j in edges:
                if table.get(label, j) != j:
                    raise NotLabelDeterministic(f"state {i} has two {label} successors")
                table[label] = j
            self.succ.append(table)
        self.thread = _thread_of(system)
        self.included: set = set()
        self.parent = self._bfs_tree()
        self.called = self._called_ops()

    def _bfs_tree(self):
        parent = {0: None}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for label, j in self.graph.out[i]:
                if j not in parent:
                    parent[j] = (i, label)
                    queue.append(j)
        return parent

    def path_to(self, i) -> list:
        path = []
        while self.parent[i] is not None:
            i, label = self.parent[i]
            path.append(label)
        return path[::-1]

    def _called_ops(self):
        """Per state: ops that were called on the way to it, and ops still pending."""
        called = [None] * len(self.graph.states)
        called[0] = (frozenset(), frozenset())
        queue = deque([0])
        while queue:
            i = queue.popleft()
            seen, pend = called[i]
            for label, j in self.graph.out[i]:
                if called[j] is not None:
                    continue
                if label.kind is Kind.CALL:
                    called[j] = (seen | {label.op}, pend | {label.op})
                elif label.kind is Kind.RET:
                    called[j] = (seen, pend - {label.op})
                else:
                    called[j] = (seen, pend)
                queue.append(j)
        return called

    def same_thread(self, a: int, b: int) -> bool:
        ta = self.thread(a)
        return a == b or (ta is not None and ta == self.thread(b))

    def included_in(self, p: int, q: int, skip=lambda label: False):
        """Is the language of ``p`` (minus labels ``skip`` rejects) within that of ``q``?

        Returns None on success or the first word of ``p`` that ``q`` cannot follow.
        """
        key = (p, q, skip)
        if key in self.included or p == q:
            return None
        seen = {(p, q): None}
        queue = deque([(p, q)])
        while queue:
            a, b = node = queue.popleft()
            for label, a2 in self.graph.out[a]:
                if skip(label):
                    continue
                b2 = self.succ[b].get(label)
                if b2 is None:
                    word = [label]
                    while seen[node] is not None:
                        node, lab = seen[node]
                        word.append(lab)
                    return word[::-1]
                nxt = (a2, b2)
                if nxt not in seen and a2 != b2 and (a2, b2, skip) not in self.included:
                    seen[nxt] = (node, label)
                    queue.append(nxt)
        for a, b in seen:
            self.included.add((a, b, skip))
        return None


def check_library_closure(system: TransitionSystem, bounds: ExplorationBounds | None = None) -> Verdict:
    """Check the three closure properties every library satisfies.

    1. a call that keeps the trace well formed can be inserted anywhere;
    2. a call can be moved before the action preceding it;
    3. a return can be moved after the action following it.

    Operations on the same thread are never swapped past each other.  The
    system must be label-deterministic, so trace inclusion from two states
    reduces to a product walk.
    """
    bounds = bounds or ExplorationBounds()
    try:
        graph = reachable_graph(system, bounds)
    except BoundExceeded as exc:
        return Verdict.bound_exceeded(str(exc))
    cl = _Closure(system, graph)
    decl = getattr(getattr(system, "workload", None), "ops", ())
    if decl:
        call_labels = [call(o.method, o.op, o.value) for o in decl]
    else:
        call_labels = sorted({lab for _, lab, _ in graph.edges() if lab.kind is Kind.CALL},
                             key=ActionLabel.sort_key)
    skips: dict = {}
    checked = 0

    def skip_for(c: ActionLabel):
        if c.op not in skips:
            skips[c.op] = lambda label, k=c.op: (
                label.op == k or (label.kind is Kind.CALL and cl.same_thread(label.op, k)))
        return skips[c.op]

    for i in range(len(graph.states)):
        seen_ops, pend = cl.called[i]
        # Bullet 1: inserting an unused call.
        for c in call_labels:
            if c.op in seen_ops or any(cl.same_thread(c.op, k) for k in pend):
                continue
            checked += 1
            j = cl.succ[i].get(c)
            if j is None:
                return Verdict.fail("closure: calls cannot be disabled", trace=cl.path_to(i) + [c],
                                    message=f"{c} is not enabled")
            word = cl.included_in(i, j, skip_for(c))
            if word is not None:
                return Verdict.fail("closure: calls cannot be disabled",
                                    trace=cl.path_to(i) + [c] + word,
                                    message=f"after inserting {c} the continuation {word[-1]} is refused",
                                    original=[e.to_json() for e in cl.path_to(i) + word])
        # Bullets 2 and 3: commuting a call left, a return right.
        for a, i1 in graph.out[i]:
            for b, i2 in graph.out[i1]:
                if cl.same_thread(a.op, b.op):
                    continue
                if b.kind is Kind.CALL:
                    obligation, first, second = "closure: calls cannot disable actions", b, a
                elif a.kind is Kind.RET:
                    obligation, first, second = "closure: returns cannot enable actions", b, a
                else:
                    continue
                checked += 1
                j1 = cl.succ[i].get(first)
                j2 = None if j1 is None else cl.succ[j1].get(second)
                prefix = cl.path_to(i)
                if j2 is None:
                    return Verdict.fail(obligation, trace=prefix + [first, second],
                                        message=f"{first}·{second} is not a trace",
                                        original=[e.to_json() for e in prefix + [a, b]])
                word = cl.included_in(i2, j2)
                if word is not None:
                    return Verdict.fail(obligation, trace=prefix + [first, second] + word,
                                        message=f"the swapped trace cannot continue with {word[-1]}",
                                        original=[e.to_json() for e in prefix + [a, b] + word])
    return Verdict.ok(states=len(graph.states), obligations=checked)
