"""Check results shared by every checker in the package."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Status(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    BOUND_EXCEEDED = "BoundExceeded"


@dataclass
class Verdict:
    status: Status
    obligation: str | None = None
    trace: list = field(default_factory=list)
    pair: dict | None = None
    witness: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    message: str = ""

    def __bool__(self) -> bool:
        return self.status is Status.PASS

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    @classmethod
    def ok(cls, **stats) -> "Verdict":
        return cls(Status.PASS, stats=stats)

    @classmethod
    def fail(cls, obligation: str, trace=(), pair=None, message: str = "", **witness) -> "Verdict":
        return cls(Status.FAIL, obligation, list(trace), pair, witness, message=message)

    @classmethod
    def bound_exceeded(cls, message: str) -> "Verdict":
        return cls(Status.BOUND_EXCEEDED, message=message)

    def to_json(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "obligation": self.obligation,
            "trace": [label.to_json() for label in self.trace],
            "pair": self.pair,
            "witness": _jsonable(self.witness),
            "stats": self.stats,
            "message": self.message,
        }


def _jsonable(obj):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return repr(obj)
