"""Labeled transition systems and bounded exploration.

Every system in the package implements :class:`TransitionSystem`: an initial
state plus a successor function returning ``(label, state)`` pairs.  States
are immutable, hashable values, so exploration can use a plain visited set.

Analyses first build the reachable :class:`StateGraph` and then work on
integer state ids; determinisation (subset construction over an observable
alphabet) is shared by history collection, determinism checking and
refinement checking.
"""
from __future__ import annotations

import enum
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Iterator, Sequence

from .verdict import Verdict


class _Empty:
    """The distinguished EMPTY return value; disjoint from all naturals."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EMPTY"

    def __reduce__(self):
        return (_Empty, ())


EMPTY = _Empty()


class Kind(enum.IntEnum):
    CALL = 0
    RET = 1
    LIN = 2
    COM = 3
    INTERNAL = 4


_KIND_NAMES = {Kind.CALL: "call", Kind.RET: "ret", Kind.LIN: "lin",
               Kind.COM: "com", Kind.INTERNAL: "internal"}
_KIND_BY_NAME = {v: k for k, v in _KIND_NAMES.items()}


def value_key(value) -> tuple:
    if value is None:
        return (0, 0)
    if value is EMPTY:
        return (2, 0)
    return (1, value)


def value_to_json(value):
    return "EMPTY" if value is EMPTY else value


def value_from_json(raw):
    return EMPTY if raw == "EMPTY" else raw


@dataclass(frozen=True)
class ActionLabel:
    """A transition label: call, return, linearization/commit point or internal step."""

    kind: Kind
    method: str
    op: int
    value: Any = None
    detail: str | None = None

    def __post_init__(self):
        if self.kind is Kind.INTERNAL and not self.detail:
            raise ValueError("internal labels carry a detail name")
        if self.kind in (Kind.LIN, Kind.COM) and self.value is None:
            raise ValueError("lin/com labels carry a value")

    @property
    def is_call(self) -> bool:
        return self.kind is Kind.CALL

    @property
    def is_return(self) -> bool:
        return self.kind is Kind.RET

    def sort_key(self) -> tuple:
        return (int(self.kind), self.method, self.op, value_key(self.value), self.detail or "")

    def to_json(self) -> dict:
        out = {"kind": _KIND_NAMES[self.kind], "method": self.method, "op": self.op}
        if self.value is not None:
            out["value"] = value_to_json(self.value)
        if self.detail is not None:
            out["detail"] = self.detail
        return out

    @classmethod
    def from_json(cls, raw: dict) -> "ActionLabel":
        value = raw.get("value")
        return cls(_KIND_BY_NAME[raw["kind"]], raw["method"], int(raw["op"]),
                   None if value is None else value_from_json(value), raw.get("detail"))

    def __str__(self) -> str:
        name = _KIND_NAMES[self.kind] if self.kind is not Kind.CALL else "inv"
        if self.kind is Kind.INTERNAL:
            return f"{self.detail}({self.op})"
        if self.value is None:
            return f"{name}({self.method},{self.op})"
        return f"{name}({self.method},{self.value!r},{self.op})"


def call(method: str, op: int, value=None) -> ActionLabel:
    return ActionLabel(Kind.CALL, method, op, value)


def ret(method: str, op: int, value=None) -> ActionLabel:
    return ActionLabel(Kind.RET, method, op, value)


def lin(method: str, op: int, value) -> ActionLabel:
    return ActionLabel(Kind.LIN, method, op, value)


def com(method: str, op: int, value) -> ActionLabel:
    return ActionLabel(Kind.COM, method, op, value)


def internal(method: str, op: int, detail: str) -> ActionLabel:
    return ActionLabel(Kind.INTERNAL, method, op, None, detail)


# Observable alphabets, as label predicates.
LabelPredicate = Callable[[ActionLabel], bool]


def gamma_cr(label: ActionLabel) -> bool:
    return label.kind is Kind.CALL or label.kind is Kind.RET


def gamma_cr_lin_deq(label: ActionLabel) -> bool:
    return gamma_cr(label) or (label.kind is Kind.LIN and label.method == "deq")


def gamma_cr_com_pop(label: ActionLabel) -> bool:
    return gamma_cr(label) or (label.kind is Kind.COM and label.method == "pop")


def gamma_full(label: ActionLabel) -> bool:
    return True


GAMMAS: dict[str, LabelPredicate] = {
    "CR": gamma_cr,
    "CR+LinDeq": gamma_cr_lin_deq,
    "CR+ComPop": gamma_cr_com_pop,
    "full": gamma_full,
}


class TransitionSystem:
    """Base class for systems explored by the package.

    Subclasses set ``initial`` and implement :meth:`successors`.  ``name``
    is used in reports only.
    """

    name = "lts"
    initial: Hashable

    def successors(self, state) -> Iterable[tuple[ActionLabel, Hashable]]:
        raise NotImplementedError

    def describe(self, state) -> Any:
        """JSON-friendly rendering of a state (defaults to ``repr``)."""
        return repr(state)


class FunctionSystem(TransitionSystem):
    """A transition system assembled from an initial state and a callable."""

    def __init__(self, initial, successors: Callable, name: str = "lts"):
        self.initial = initial
        self._successors = successors
        self.name = name

    def successors(self, state):
        return self._successors(state)


class ExplicitSystem(TransitionSystem):
    """A finite system given by an edge list; handy for toys and tests."""

    def __init__(self, initial, edges: Iterable[tuple[Hashable, ActionLabel, Hashable]],
                 name: str = "explicit"):
        self.initial = initial
        self.name = name
        self._out: dict = {}
        for src, label, dst in edges:
            self._out.setdefault(src, []).append((label, dst))

    def successors(self, state):
        return list(self._out.get(state, ()))


class RenamedSystem(TransitionSystem):
    """Wraps a system and renames label methods (e.g. push->enq)."""

    def __init__(self, inner: TransitionSystem, mapping: dict[str, str]):
        self.inner = inner
        self.mapping = dict(mapping)
        self.initial = inner.initial
        self.name = f"{inner.name}[renamed]"

    def successors(self, state):
        for label, nxt in self.inner.successors(state):
            method = self.mapping.get(label.method, label.method)
            yield ActionLabel(label.kind, method, label.op, label.value, label.detail), nxt

    def describe(self, state):
        return self.inner.describe(state)


@dataclass(frozen=True)
class ExplorationBounds:
    max_states: int = 2_000_000
    max_trace_events: int = 64

    def __post_init__(self):
        if self.max_states <= 0 or self.max_trace_events <= 0:
            raise ValueError("exploration bounds must be strictly positive")


class BoundExceeded(Exception):
    """Raised when exploration would need more than ``max_states`` states."""

    def __init__(self, message: str, partial: "StateGraph | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass
class StateGraph:
    states: list
    index: dict
    out: list  # out[i] = list of (label, j), canonically ordered
    partial: bool = False

    @property
    def edge_count(self) -> int:
        return sum(len(edges) for edges in self.out)

    def edges(self) -> Iterator[tuple[int, ActionLabel, int]]:
        for src, edges in enumerate(self.out):
            for label, dst in edges:
                yield src, label, dst

    def to_json(self, system: TransitionSystem | None = None) -> dict:
        describe = system.describe if system is not None else repr
        return {
            "states": [{"id": i, "repr": describe(s)} for i, s in enumerate(self.states)],
            "edges": [{"from": a, "label": lab.to_json(), "to": b} for a, lab, b in self.edges()],
            "partial": self.partial,
        }


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("LINLAB_THREADS", "1")))
    except ValueError:
        return 1


def ordered_successors(system: TransitionSystem, state) -> list:
    """Successors in canonical order: label key, then the successor's repr.

    The repr is only computed when two successors share a label.
    """
    succ = list(system.successors(state))
    if len(succ) > 1:
        succ.sort(key=lambda pair: pair[0].sort_key())
        if any(a[0] == b[0] for a, b in zip(succ, succ[1:])):
            succ.sort(key=lambda pair: (pair[0].sort_key(), repr(pair[1])))
    return succ


def reachable_graph(system: TransitionSystem, bounds: ExplorationBounds | None = None) -> StateGraph:
    """Breadth-first exploration of every state reachable from ``system.initial``.

    Raises :class:`BoundExceeded` (carrying the partial graph) if more than
    ``bounds.max_states`` distinct states exist.  With ``LINLAB_THREADS`` > 1
    the successors of each BFS layer are computed by a thread pool; merging
    stays sequential, so ids and edges do not depend on the worker count.
    """
    bounds = bounds or ExplorationBounds()
    states = [system.initial]
    index = {system.initial: 0}
    out: list = [None]
    layer = [0]
    workers = _thread_count()
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while layer:
            if pool is not None and len(layer) > 1:
                succ_lists = list(pool.map(lambda i: ordered_successors(system, states[i]), layer))
            else:
                succ_lists = [ordered_successors(system, states[i]) for i in layer]
            nxt_layer = []
            for i, succ in zip(layer, succ_lists):
                edges = []
                for label, dst in succ:
                    j = index.get(dst)
                    if j is None:
                        if len(states) >= bounds.max_states:
                            out[i] = edges
                            graph = StateGraph(states, index, [e or [] for e in out], partial=True)
                            raise BoundExceeded(
                                f"{system.name}: more than {bounds.max_states} reachable states", graph)
                        j = len(states)
                        index[dst] = j
                        states.append(dst)
                        out.append(None)
                        nxt_layer.append(j)
                    edges.append((label, j))
                out[i] = edges
            layer = nxt_layer
    finally:
        if pool is not None:
            pool.shutdown()
    return StateGraph(states, index, out)


def project(trace: Sequence[ActionLabel], alphabet: LabelPredicate) -> list[ActionLabel]:
    """The maximal subsequence of ``trace`` whose labels satisfy ``alphabet``."""
    return [label for label in trace if alphabet(label)]


# -- determinisation ---------------------------------------------------------

class Determinizer:
    """Subset construction of a state graph w.r.t. an observable alphabet.

    A macro-state is the frozenset of graph states reachable by some trace
    with a given projection; ``closure`` saturates under unobservable edges.
    """

    def __init__(self, graph: StateGraph, gamma: LabelPredicate):
        self.graph = graph
        self.gamma = gamma
        self._obs: list[list] = []
        self._tau: list[list[int]] = []
        for edges in graph.out:
            obs, tau = [], []
            for label, j in edges:
                if gamma(label):
                    obs.append((label, j))
                else:
                    tau.append(j)
            self._obs.append(obs)
            self._tau.append(tau)
        self._cache: dict = {}

    def closure(self, seeds: Iterable[int]) -> frozenset:
        seen = set(seeds)
        stack = list(seen)
        tau = self._tau
        while stack:
            i = stack.pop()
            for j in tau[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return frozenset(seen)

    def initial(self) -> frozenset:
        return self.closure([0])

    def step(self, macro: frozenset) -> dict:
        """Map each observable label enabled in ``macro`` to the successor macro-state."""
        cached = self._cache.get(macro)
        if cached is not None:
            return cached
        targets: dict = {}
        for i in macro:
            for label, j in self._obs[i]:
                targets.setdefault(label, set()).add(j)
        result = {label: self.closure(js) for label, js in targets.items()}
        self._cache[macro] = result
        return result


def _sorted_labels(labels: Iterable[ActionLabel]) -> list[ActionLabel]:
    return sorted(labels, key=ActionLabel.sort_key)


def collect_histories(system: TransitionSystem, bounds: ExplorationBounds | None = None) -> set:
    """All call/return projections of finite traces, with at most
    ``max_trace_events`` events each (the empty history included)."""
    bounds = bounds or ExplorationBounds()
    graph = reachable_graph(system, bounds)
    det = Determinizer(graph, gamma_cr)
    histories = set()
    stack = [((), det.initial())]
    while stack:
        hist, macro = stack.pop()
        histories.add(hist)
        if len(hist) >= bounds.max_trace_events:
            continue
        for label, nxt in det.step(macro).items():
            stack.append((hist + (label,), nxt))
    return histories


def iter_histories_with_traces(system: TransitionSystem, bounds: ExplorationBounds | None = None,
                               graph: StateGraph | None = None):
    """Yield each history once (shortest first) together with its macro-state."""
    bounds = bounds or ExplorationBounds()
    graph = graph or reachable_graph(system, bounds)
    det = Determinizer(graph, gamma_cr)
    queue = deque([((), det.initial())])
    while queue:
        hist, macro = queue.popleft()
        yield hist, macro
        if len(hist) >= bounds.max_trace_events:
            continue
        for label in _sorted_labels(det.step(macro)):
            queue.append((hist + (label,), det.step(macro)[label]))


def find_trace(graph: StateGraph, projected: Sequence[ActionLabel], gamma: LabelPredicate,
               start: int = 0) -> list[ActionLabel] | None:
    """A shortest concrete trace from ``start`` whose projection is ``projected``."""
    goal = len(projected)
    parent: dict = {(start, 0): None}
    queue = deque([(start, 0)])
    while queue:
        node = queue.popleft()
        i, pos = node
        if pos == goal:
            trace = []
            while parent[node] is not None:
                node, label = parent[node]
                trace.append(label)
            return trace[::-1]
        for label, j in graph.out[i]:
            if gamma(label):
                if label != projected[pos]:
                    continue
                nxt = (j, pos + 1)
            else:
                nxt = (j, pos)
            if nxt not in parent:
                parent[nxt] = (node, label)
                queue.append(nxt)
    return None


def replay(system: TransitionSystem, trace: Sequence[ActionLabel], start=None):
    """Run a label sequence through a label-deterministic system.

    Returns the list of visited states, or raises ``ValueError`` at the first
    label that is not enabled.
    """
    state = system.initial if start is None else start
    visited = [state]
    for pos, label in enumerate(trace):
        matches = [s for lab, s in system.successors(state) if lab == label]
        if not matches:
            raise ValueError(f"label {label} (position {pos}) not enabled")
        if len(set(matches)) > 1:
            raise ValueError(f"label {label} has several successors; system is not label-deterministic")
        state = matches[0]
        visited.append(state)
    return visited


def check_gamma_deterministic(system: TransitionSystem, gamma: LabelPredicate,
                              bounds: ExplorationBounds | None = None) -> Verdict:
    """Pass iff every Γ-sequence (up to ``max_trace_events`` long) leads to at most one state.

    Checking from the initial state suffices: anything reachable from a
    reachable state ``s`` by projection τ is reachable from the initial state
    by the projection of the path to ``s`` followed by τ.
    """
    bounds = bounds or ExplorationBounds()
    try:
        graph = reachable_graph(system, bounds)
    except BoundExceeded as exc:
        return Verdict.bound_exceeded(str(exc))
    det = Determinizer(graph, gamma)
    start = det.initial()
    seen = {start}
    queue = deque([(start, ())])
    while queue:
        macro, seq = queue.popleft()
        if len(macro) > 1:
            a, b = sorted(macro)[:2]
            return Verdict.fail(
                "gamma-determinism", trace=seq,
                message=f"{len(macro)} states share the same observable sequence",
                states=[system.describe(graph.states[a]), system.describe(graph.states[b])])
        if len(seq) >= bounds.max_trace_events:
            continue
        step = det.step(macro)
        for label in _sorted_labels(step):
            nxt = step[label]
            if nxt not in seen:
                seen.add(nxt)
                queue.append((nxt, seq + (label,)))
    return Verdict.ok(states=len(graph.states), macro_states=len(seen))
