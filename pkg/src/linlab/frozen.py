"""Small immutable containers used inside states, plus strict-partial-order helpers."""
from __future__ import annotations

from collections.abc import Mapping
from typing import Iterable


class FMap(Mapping):
    """An immutable, hashable mapping with value semantics."""

    __slots__ = ("_d", "_h")

    def __init__(self, items=()):
        self._d = dict(items)
        self._h = None

    def __getitem__(self, key):
        return self._d[key]

    def __iter__(self):
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self._d.items()))
        return self._h

    def __eq__(self, other):
        if isinstance(other, FMap):
            return self._d == other._d
        return NotImplemented

    def __repr__(self):
        body = ", ".join(f"{k!r}: {v!r}" for k, v in sorted(self._d.items(), key=lambda kv: repr(kv[0])))
        return "{" + body + "}"

    def set(self, key, value) -> "FMap":
        d = dict(self._d)
        d[key] = value
        return FMap(d)

    def update(self, pairs) -> "FMap":
        d = dict(self._d)
        d.update(pairs)
        return FMap(d)

    def without(self, key) -> "FMap":
        if key not in self._d:
            return self
        d = dict(self._d)
        del d[key]
        return FMap(d)


def transitive_closure(pairs: Iterable[tuple]) -> frozenset:
    closed = set(pairs)
    changed = True
    while changed:
        changed = False
        succ: dict = {}
        for a, b in closed:
            succ.setdefault(a, set()).add(b)
        for a, b in list(closed):
            for c in succ.get(b, ()):
                if (a, c) not in closed:
                    closed.add((a, c))
                    changed = True
    return frozenset(closed)


def is_strict_partial_order(pairs: frozenset) -> bool:
    if any(a == b for a, b in pairs):
        return False
    return transitive_closure(pairs) == pairs


def minimal(elements: Iterable, order: frozenset) -> frozenset:
    """Elements with no predecessor among ``elements``."""
    elements = frozenset(elements)
    has_pred = {b for a, b in order if a in elements}
    return frozenset(e for e in elements if e not in has_pred)


def immediate_predecessors(x, elements: Iterable, order: frozenset) -> frozenset:
    """Predecessors ``k < x`` with nothing strictly between them (covering relation)."""
    elements = frozenset(elements)
    preds = {a for a, b in order if b == x and a in elements}
    return frozenset(a for a in preds
                     if not any((a, m) in order and (m, x) in order for m in elements))


def strip(order: frozenset, x) -> frozenset:
    """The order with every pair mentioning ``x`` removed."""
    return frozenset(p for p in order if x not in p)
