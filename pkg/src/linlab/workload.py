"""Declared operations a bounded system may execute.

Operation identifiers are 1..n in declaration order: adds (enq/push) first,
then removes (deq/pop).  Every system built from the same workload therefore
uses the same identifiers and the same call labels, which is what lets the
checkers compare them label for label.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class DuplicateValue(ValueError):
    pass


class BadThreadId(ValueError):
    pass


@dataclass(frozen=True)
class DeclaredOp:
    op: int
    method: str
    value: int | None = None
    thread: int | None = None

    @property
    def is_add(self) -> bool:
        return self.method in ("enq", "push")


@dataclass(frozen=True)
class Workload:
    ops: tuple[DeclaredOp, ...]
    kind: str  # "queue" or "stack"
    max_threads: int = 0

    def __post_init__(self):
        values = [o.value for o in self.ops if o.is_add]
        if len(set(values)) != len(values):
            raise DuplicateValue(f"values added twice: {values}")
        for o in self.ops:
            if o.is_add and (not isinstance(o.value, int) or isinstance(o.value, bool) or o.value < 0):
                raise ValueError(f"added values must be naturals, got {o.value!r}")
        if [o.op for o in self.ops] != list(range(1, len(self.ops) + 1)):
            raise ValueError("operation ids must be 1..n in declaration order")
        for o in self.ops:
            if o.thread is not None and not 0 <= o.thread < max(self.max_threads, 1):
                raise BadThreadId(f"op {o.op}: thread {o.thread} outside 0..{self.max_threads - 1}")

    @classmethod
    def queue(cls, enqs, deqs: int) -> "Workload":
        ops = [DeclaredOp(k, "enq", v) for k, v in enumerate(enqs, start=1)]
        ops += [DeclaredOp(len(ops) + j, "deq") for j in range(1, deqs + 1)]
        return cls(tuple(ops), "queue")

    @classmethod
    def stack(cls, pushes, pops, max_threads: int | None = None) -> "Workload":
        """``pushes``: values, or ``(value, thread)`` pairs; ``pops``: a count or a list of threads.

        Bare push values are placed on threads 0, 1, ... in order; pops
        without a thread are not tied to any thread.
        """
        push_specs = [p if isinstance(p, tuple) else (p, None) for p in pushes]
        if any(t is None for _, t in push_specs):
            push_specs = [(v, i if t is None else t) for i, (v, t) in enumerate(push_specs)]
        pop_threads = [None] * pops if isinstance(pops, int) else list(pops)
        if max_threads is None:
            used = [t for _, t in push_specs] + [t for t in pop_threads if t is not None]
            max_threads = max(used, default=0) + 1
        ops = [DeclaredOp(k, "push", v, t) for k, (v, t) in enumerate(push_specs, start=1)]
        ops += [DeclaredOp(len(ops) + j, "pop", None, t) for j, t in enumerate(pop_threads, start=1)]
        return cls(tuple(ops), "stack", max_threads)

    @property
    def adds(self) -> tuple[DeclaredOp, ...]:
        return tuple(o for o in self.ops if o.is_add)

    @property
    def removes(self) -> tuple[DeclaredOp, ...]:
        return tuple(o for o in self.ops if not o.is_add)

    def __len__(self) -> int:
        return len(self.ops)

    def as_stack(self) -> "Workload":
        """The same shape with enq/deq renamed push/pop (threads 0, 1, ...)."""
        if self.kind == "stack":
            return self
        return Workload.stack([o.value for o in self.adds], len(self.removes))

    def as_queue(self) -> "Workload":
        if self.kind == "queue":
            return self
        return Workload.queue([o.value for o in self.adds], len(self.removes))

    def to_json(self) -> dict:
        if self.kind == "queue":
            return {"enqs": [o.value for o in self.adds], "deqs": len(self.removes)}
        return {
            "pushes": [{"value": o.value, "thread": o.thread} for o in self.adds],
            "pops": [{"thread": o.thread} for o in self.removes],
            "maxThreads": self.max_threads,
        }

    @classmethod
    def from_json(cls, raw: dict) -> "Workload":
        if "enqs" in raw:
            return cls.queue(list(raw["enqs"]), int(raw.get("deqs", 0)))
        if "pushes" in raw:
            pushes = [(int(p["value"]), p.get("thread")) if isinstance(p, dict) else int(p) for p in raw["pushes"]]
            pops = raw.get("pops", [])
            pop_threads = [None] * pops if isinstance(pops, int) else [p.get("thread") for p in pops]
            max_threads = raw.get("maxThreads")
            return cls.stack(pushes, pop_threads, None if max_threads is None else int(max_threads))
        raise ValueError("workload JSON needs either 'enqs' or 'pushes'")

    @classmethod
    def load(cls, path: str | Path) -> "Workload":
        return cls.from_json(json.loads(Path(path).read_text()))
