"""Fine-grained model of the simplified Time-Stamped Stack.

Shared memory is one singly-linked list per thread (``pools``), each ending
in a self-looping sentinel with timestamp -1, plus the timestamp counter
``TS``.  Push control points are A1..A6 and pop control points R1..R7; the
steps follow the push/pop derivation rules one to one::

    push1  n = new Node(x, MAX_INT, null, false)
    push2  n->next = pools[myTID]; pools[myTID] = n
    push3  i = TS++
    push4  n->ts = i
    pop1   success = false; maxTS = -1; youngest = null; i = 0
    pop2   n = pools[i]
    pop3   skip a taken node
    pop4   maxTS = n->ts           (then pop5: youngest = n)
    pop6   node not younger, keep scanning
    pop7   i++ and visit the next pool
    pop8   scan over, nothing to take: success = false
    com    CAS(youngest->taken, false, true) succeeds
    pop9   retry from pop1

Nodes live in a table: indices ``0..maxThreads-1`` are the sentinels and
the node of push ``k`` sits at ``maxThreads + k - 1``, so equal states have
equal tables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .frozen import FMap
from .lts import TransitionSystem, call, com, internal, ret
from .workload import Workload

MAX_INT = 2**31 - 1

PUSH_DONE = "A6"
POP_DONE = "R7"
VARIANTS = ("atomic", "no-cas")


class NodeNotInserted(ValueError):
    pass


class Node(NamedTuple):
    data: int | None
    ts: int
    next: int | None
    taken: bool


@dataclass(frozen=True)
class TSSState:
    nodes: tuple
    pools: tuple
    TS: int = 0
    cp: FMap = FMap()
    i: FMap = FMap()
    success: FMap = FMap()
    maxTS: FMap = FMap()
    youngest: FMap = FMap()
    n: FMap = FMap()

    def replace(self, **changes) -> "TSSState":
        fields = {name: getattr(self, name) for name in self.__dataclass_fields__}
        fields.update(changes)
        return TSSState(**fields)

    def set_node(self, idx: int, node: Node) -> tuple:
        nodes = list(self.nodes)
        nodes[idx] = node
        return tuple(nodes)


class TSS(TransitionSystem):
    """``literal_push4`` and ``literal_ret_pop`` keep two rule premises that the
    code does not have (see ``_push4`` and ``_ret_pop``); ``strict`` sets both."""

    kind = "stack"

    def __init__(self, workload: Workload, strict: bool = False, variant: str = "atomic",
                 literal_push4: bool | None = None, literal_ret_pop: bool | None = None):
        if variant not in VARIANTS:
            raise ValueError(f"unknown TSS variant {variant!r}")
        self.workload = workload.as_stack()
        self.strict = strict
        self.literal_push4 = strict if literal_push4 is None else literal_push4
        self.literal_ret_pop = strict if literal_ret_pop is None else literal_ret_pop
        self.variant = variant
        self.name = "tss" if variant == "atomic" else f"tss-mutant-{variant}"
        self.threads = max(self.workload.max_threads, 1)
        sentinels = tuple(Node(None, -1, t, False) for t in range(self.threads))
        self.initial = TSSState(nodes=sentinels + (None,) * len(self.workload.adds),
                                pools=tuple(range(self.threads)))
        self.decl = {o.op: o for o in self.workload.ops}
        self.pushes = [o.op for o in self.workload.adds]

    # -- helpers ----------------------------------------------------------

    def node_index(self, k) -> int:
        return self.threads + k - 1

    def tid(self, k):
        return self.decl[k].thread

    def node_thread(self, idx: int) -> int:
        return idx if idx < self.threads else self.decl[idx - self.threads + 1].thread

    def push_of(self, idx):
        """The push that created node ``idx`` (None for sentinels)."""
        if idx is None or idx < self.threads:
            return None
        return idx - self.threads + 1

    def _can_call(self, s: TSSState, k) -> bool:
        t = self.tid(k)
        if t is None:
            return True
        for other, point in s.cp.items():
            if other != k and self.tid(other) == t and point not in (PUSH_DONE, POP_DONE):
                return False
        return True

    # -- transitions ------------------------------------------------------

    def successors(self, s: TSSState):
        out = []
        for o in self.workload.ops:
            if o.op in s.cp or not self._can_call(s, o.op):
                continue
            if o.is_add:
                out.append((call("push", o.op, o.value), s.replace(cp=s.cp.set(o.op, "A1"))))
            else:
                out.append((call("pop", o.op), s.replace(cp=s.cp.set(o.op, "R1"))))
        for k, point in s.cp.items():
            out.extend(self._steps(s, k, point))
        return out

    def _steps(self, s: TSSState, k, point):
        idx = self.node_index(k) if self.decl[k].is_add else None
        if point == "A1":
            node = Node(self.decl[k].value, MAX_INT, None, False)
            yield internal("push", k, "push1"), s.replace(nodes=s.set_node(idx, node), cp=s.cp.set(k, "A2"))
        elif point == "A2":
            t = self.tid(k)
            node = s.nodes[idx]._replace(next=s.pools[t])
            pools = s.pools[:t] + (idx,) + s.pools[t + 1:]
            yield internal("push", k, "push2"), s.replace(nodes=s.set_node(idx, node), pools=pools,
                                                          cp=s.cp.set(k, "A3"))
        elif point == "A3":
            yield internal("push", k, "push3"), s.replace(i=s.i.set(k, s.TS), TS=s.TS + 1, cp=s.cp.set(k, "A4"))
        elif point == "A4":
            yield from self._push4(s, k, idx)
        elif point == "A5":
            yield ret("push", k), s.replace(cp=s.cp.set(k, "A6"))
        elif point == "R1":
            yield internal("pop", k, "pop1"), s.replace(
                success=s.success.set(k, False), youngest=s.youngest.set(k, None),
                maxTS=s.maxTS.set(k, -1), i=s.i.set(k, 0), n=s.n.set(k, None), cp=s.cp.set(k, "R2"))
        elif point == "R2":
            yield internal("pop", k, "pop2"), s.replace(n=s.n.set(k, s.pools[s.i[k]]), cp=s.cp.set(k, "R3"))
        elif point == "R3":
            cur = s.n[k]
            node = s.nodes[cur]
            if node.taken and node.next != cur:
                yield internal("pop", k, "pop3"), s.replace(n=s.n.set(k, node.next))
            elif not node.taken and node.ts > s.maxTS[k]:
                yield internal("pop", k, "pop4"), s.replace(maxTS=s.maxTS.set(k, node.ts), cp=s.cp.set(k, "R4"))
            elif not node.taken:
                yield internal("pop", k, "pop6"), s.replace(cp=s.cp.set(k, "R5"))
        elif point == "R4":
            yield internal("pop", k, "pop5"), s.replace(youngest=s.youngest.set(k, s.n[k]), cp=s.cp.set(k, "R5"))
        elif point == "R5":
            yield from self._end_of_pool(s, k)
        elif point == "R5c":
            y = s.youngest[k]
            yield com("pop", k, s.nodes[y].data), s.replace(
                nodes=s.set_node(y, s.nodes[y]._replace(taken=True)),
                success=s.success.set(k, True), cp=s.cp.set(k, "R6"))
        elif point == "R6":
            if not s.success[k]:
                yield internal("pop", k, "pop9"), s.replace(cp=s.cp.set(k, "R1"))
            yield from self._ret_pop(s, k)

    def _push4(self, s: TSSState, k, idx):
        # The literal rule also asks every completed push to hold a smaller
        # stamp; without it push4 is exactly ``n->ts = i``.
        if self.literal_push4 and any(p == PUSH_DONE and s.i[k2] >= s.i[k]
                               for k2, p in s.cp.items() if self.decl[k2].is_add):
            return
        node = s.nodes[idx]._replace(ts=s.i[k])
        yield internal("push", k, "push4"), s.replace(nodes=s.set_node(idx, node), cp=s.cp.set(k, "A5"))

    def _end_of_pool(self, s: TSSState, k):
        if s.i[k] < self.threads - 1:
            yield internal("pop", k, "pop7"), s.replace(i=s.i.set(k, s.i[k] + 1), cp=s.cp.set(k, "R2"))
            return
        # Only after the last pool has been scanned may the pop try its CAS.
        y = s.youngest[k]
        if y is None or s.nodes[y].taken:
            yield internal("pop", k, "pop8"), s.replace(success=s.success.set(k, False), cp=s.cp.set(k, "R6"))
        elif self.variant == "no-cas":
            yield internal("pop", k, "read_taken"), s.replace(cp=s.cp.set(k, "R5c"))
        else:
            yield com("pop", k, s.nodes[y].data), s.replace(
                nodes=s.set_node(y, s.nodes[y]._replace(taken=True)),
                success=s.success.set(k, True), cp=s.cp.set(k, "R6"))

    def _ret_pop(self, s: TSSState, k):
        y = s.youngest[k]
        # The literal rule returns on a failed CAS; the code returns on success.
        wanted = not self.literal_ret_pop
        if s.success[k] == wanted and y is not None:
            yield ret("pop", k, s.nodes[y].data), s.replace(cp=s.cp.set(k, "R7"))

    def describe(self, s: TSSState):
        def show(node):
            return None if node is None else list(node)
        return {
            "nodes": [show(n) for n in s.nodes],
            "pools": list(s.pools),
            "TS": s.TS,
            **{name: {str(k): v for k, v in sorted(getattr(s, name).items())}
               for name in ("cp", "i", "success", "maxTS", "youngest", "n")},
        }


def make_tss(workload: Workload, strict: bool = False, variant: str = "atomic", **flags) -> TSS:
    return TSS(workload, strict=strict, variant=variant, **flags)


def node_reachable(s: TSSState, src: int, dst: int) -> bool:
    """Whether ``dst`` is reachable from ``src`` by one or more ``next`` hops."""
    seen = set()
    cur = src
    while cur is not None and cur not in seen:
        seen.add(cur)
        nxt = s.nodes[cur].next
        if nxt == dst:
            return True
        if nxt == cur:
            return False
        cur = nxt
    return False


def traverse_before(system: TSS, s: TSSState, k1, k2) -> bool:
    """Traversal order between the nodes of two pushes (lower thread first,
    then head-to-sentinel along one list)."""
    for k in (k1, k2):
        if s.cp.get(k) not in ("A3", "A4", "A5", "A6"):
            raise NodeNotInserted(f"push {k} has not linked its node")
    return node_before(system, s, system.node_index(k1), system.node_index(k2))


def node_before(system: TSS, s: TSSState, a: int, b: int) -> bool:
    if a == b:
        return False
    ta, tb = system.node_thread(a), system.node_thread(b)
    if ta != tb:
        return ta < tb
    return node_reachable(s, a, b)
