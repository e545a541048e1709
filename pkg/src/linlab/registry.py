"""Named systems the command line (and the tests) can refer to."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .hwq import HWQ
from .lts import ExplicitSystem, TransitionSystem, call, internal, lin, ret
from .spec_queue import AbsQ, AbsQ0
from .spec_stack import AbsS, AbsS0
from .tss import TSS
from .workload import Workload


class UnknownSystem(KeyError):
    pass


@dataclass(frozen=True)
class SystemEntry:
    name: str
    kind: str  # "queue", "stack" or "toy"
    summary: str
    factory: Callable[..., TransitionSystem]
    needs_workload: bool = True


def _toy_single(workload=None, **_) -> TransitionSystem:
    edges = [(0, call("enq", 1, 1), 1), (1, lin("enq", 1, 1), 2), (2, ret("enq", 1), 3)]
    return ExplicitSystem(0, edges, name="toy-single")


def _toy_choice(workload=None, **_) -> TransitionSystem:
    # Two internal steps with the same label lead to different results.
    edges = [(0, call("deq", 1), 1),
             (1, internal("deq", 1, "pick"), 2), (1, internal("deq", 1, "pick"), 3),
             (2, ret("deq", 1, 1), 4), (3, ret("deq", 1, 2), 5)]
    return ExplicitSystem(0, edges, name="toy-choice")


def _tss(variant: str):
    def build(workload: Workload, strict_tss: bool = False, **_) -> TSS:
        return TSS(workload, strict=strict_tss, variant=variant)
    return build


def _plain(cls):
    def build(workload: Workload, **_):
        return cls(workload)
    return build


def _hwq(variant: str):
    def build(workload: Workload, **_):
        return HWQ(workload, variant)
    return build


_ENTRIES = [
    SystemEntry("absq0", "queue", "atomic queue: one linearization step per operation", _plain(AbsQ0)),
    SystemEntry("absq", "queue", "partial-order queue: enqueues ordered lazily, dequeues take a minimal one",
                _plain(AbsQ)),
    SystemEntry("abss0", "stack", "atomic stack: one linearization step per operation", _plain(AbsS0)),
    SystemEntry("abss", "stack", "partial-order stack: pops commit against before/overlap sets",
                _plain(AbsS)),
    SystemEntry("hwq", "queue", "array queue with fetch-and-increment enqueue and swap-scanning dequeue",
                _hwq("atomic")),
    SystemEntry("hwq-mutant-splitswap", "queue", "array queue whose swap is a separate read and clear",
                _hwq("splitswap")),
    SystemEntry("hwq-mutant-no-null", "queue", "array queue whose dequeue reads without clearing",
                _hwq("no-null")),
    SystemEntry("tss", "stack", "time-stamped stack with per-thread pools and CAS removal", _tss("atomic")),
    SystemEntry("tss-mutant-no-cas", "stack", "time-stamped stack whose taken flag is read then set",
                _tss("no-cas")),
    SystemEntry("toy-single", "toy", "one enqueue: call, lin, return", _toy_single, needs_workload=False),
    SystemEntry("toy-choice", "toy", "one dequeue that picks its result by an internal choice",
                _toy_choice, needs_workload=False),
]

REGISTRY: dict[str, SystemEntry] = {e.name: e for e in _ENTRIES}


def list_systems(pattern: str = "") -> list[SystemEntry]:
    """Entries whose name contains ``pattern``, in registration order."""
    return [e for e in _ENTRIES if pattern in e.name]


def entry(name: str) -> SystemEntry:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownSystem(name) from None


def build(name: str, workload: Workload | None = None, strict_tss: bool = False) -> TransitionSystem:
    e = entry(name)
    if e.needs_workload and workload is None:
        raise ValueError(f"system {name} needs a workload")
    return e.factory(workload, strict_tss=strict_tss)
