import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linlab.histories import (QUEUE, STACK, check_library_closure, history_from_json, history_to_json,
                              is_linearizable, is_well_formed, linearizations, weaker_than)
from linlab.hwq import HWQ
from linlab.lts import EMPTY, ExplicitSystem, ExplorationBounds, call, ret
from linlab.spec_queue import AbsQ
from linlab.spec_stack import AbsS
from linlab.tss import TSS
from linlab.workload import Workload

X, Y = 1, 2

CONCURRENT_ENQS = (call("enq", 1, X), call("enq", 2, Y), ret("enq", 1), ret("enq", 2),
                   call("deq", 3), ret("deq", 3, Y), call("deq", 4), ret("deq", 4, X))


# -- well-formedness ----------------------------------------------------------

@pytest.mark.parametrize("events,expected", [
    ((), True),
    ((ret("enq", 1),), False),
    ((call("enq", 1, 1), call("deq", 2), ret("enq", 1), ret("deq", 2, 1)), True),
    ((call("enq", 1, 1), call("enq", 1, 1)), False),
    ((call("enq", 1, 1), ret("enq", 1), ret("enq", 1)), False),
    ((call("enq", 1, 1), ret("deq", 1, 1)), False),
])
def test_well_formed(events, expected):
    assert is_well_formed(events) is expected


# -- weakening --------------------------------------------------------------------

SEQ_12 = (call("enq", 1, 1), ret("enq", 1), call("enq", 2, 2), ret("enq", 2))
SEQ_21 = (call("enq", 2, 2), ret("enq", 2), call("enq", 1, 1), ret("enq", 1))


@pytest.mark.parametrize("h1,h2,expected", [
    (SEQ_12, SEQ_12, True),
    ((call("enq", 1, 1),), (call("enq", 1, 1), ret("enq", 1)), True),
    (SEQ_12, SEQ_21, False),
    ((call("enq", 1, 1), call("enq", 2, 2), ret("enq", 1), ret("enq", 2)), SEQ_21, True),
    ((call("enq", 1, 1), call("deq", 2)), (call("deq", 2), ret("deq", 2, EMPTY)), True),
    ((call("enq", 1, 1), ret("enq", 1)), (), False),
])
def test_weaker_than(h1, h2, expected):
    assert weaker_than(h1, h2) is expected


# -- oracle ---------------------------------------------------------------------

def test_empty_history_is_linearizable():
    assert is_linearizable((), QUEUE).passed


def test_reordered_enqueues_are_caught():
    h = (call("enq", 2, Y), ret("enq", 2), call("enq", 1, X), ret("enq", 1),
         call("deq", 3), ret("deq", 3, X))
    verdict = is_linearizable(h, QUEUE)
    assert not verdict.passed and verdict.obligation == "linearizability"


def test_concurrent_enqueues_linearize_in_dequeue_order():
    verdict = is_linearizable(CONCURRENT_ENQS, QUEUE)
    assert verdict.passed
    assert verdict.stats["order"] == [2, 1, 3, 4]
    assert linearizations(CONCURRENT_ENQS, QUEUE) == [[
        call("enq", 2, Y), ret("enq", 2), call("enq", 1, X), ret("enq", 1),
        call("deq", 3), ret("deq", 3, Y), call("deq", 4), ret("deq", 4, X)]]


@pytest.mark.parametrize("spec,result,expected", [
    (QUEUE, 1, True), (QUEUE, 2, False), (STACK, 2, True), (STACK, 1, False),
])
def test_fifo_versus_lifo(spec, result, expected):
    h = SEQ_12 + (call("deq", 3), ret("deq", 3, result))
    assert is_linearizable(h, spec).passed is expected


def test_pending_operations_may_be_dropped_or_completed():
    pending_enq = (call("enq", 1, 1), call("deq", 2), ret("deq", 2, 1))
    assert is_linearizable(pending_enq, QUEUE).passed
    pending_deq = (call("enq", 1, 1), ret("enq", 1), call("deq", 2))
    assert is_linearizable(pending_deq, QUEUE).passed


def test_empty_removal_needs_an_empty_collection():
    h = (call("enq", 1, 1), ret("enq", 1), call("deq", 2), ret("deq", 2, EMPTY))
    assert not is_linearizable(h, QUEUE).passed


def test_oracle_rejects_ill_formed_input():
    with pytest.raises(ValueError):
        is_linearizable((ret("enq", 1),), QUEUE)


def test_history_json_round_trip():
    assert history_from_json(history_to_json(CONCURRENT_ENQS)) == CONCURRENT_ENQS


# -- random histories -------------------------------------------------------------

@st.composite
def histories(draw, max_ops=4):
    """Well-formed queue/stack histories over distinct values."""
    n = draw(st.integers(0, max_ops))
    ops = []
    for k in range(1, n + 1):
        if draw(st.booleans()):
            ops.append((k, "enq", k, None))
        else:
            ops.append((k, "deq", None, draw(st.sampled_from([EMPTY] + list(range(1, n + 1))))))
    events = []
    for k, method, arg, result in ops:
        events.append([call(method, k, arg)])
        if draw(st.booleans()):
            events[-1].append(ret(method, k, result))
    out = []
    while any(events):
        live = [e for e in events if e]
        chosen = draw(st.sampled_from(live))
        out.append(chosen.pop(0))
    return tuple(out)


@st.composite
def sequential_histories(draw, max_ops=5):
    """Complete histories where each call is immediately followed by its return."""
    n = draw(st.integers(0, max_ops))
    out = []
    for k in range(1, n + 1):
        if draw(st.booleans()):
            out += [call("enq", k, k), ret("enq", k)]
        else:
            result = draw(st.sampled_from([EMPTY] + list(range(1, n + 1))))
            out += [call("deq", k), ret("deq", k, result)]
    return tuple(out)


def _replay(h, spec):
    content = ()
    for e in h:
        if e.is_call:
            result, content = spec.step(content, e.method, e.value)
            expected = result
        elif e.value != expected and not (e.value is None and expected is None):
            return False
    return True


@given(histories())
def test_generated_histories_are_well_formed(h):
    assert is_well_formed(h)


@settings(max_examples=60)
@given(histories(max_ops=3))
def test_weakening_is_reflexive(h):
    assert weaker_than(h, h)


@settings(max_examples=60)
@given(histories(max_ops=3), histories(max_ops=3), histories(max_ops=3))
def test_weakening_is_transitive(h1, h2, h3):
    if weaker_than(h1, h2) and weaker_than(h2, h3):
        assert weaker_than(h1, h3)


@given(histories(), st.sampled_from([QUEUE, STACK]))
def test_oracle_is_invariant_under_renaming(h, spec):
    ids = sorted({e.op for e in h})
    rename = dict(zip(ids, reversed(ids)))
    renamed = tuple(type(e)(e.kind, e.method, rename[e.op], e.value, e.detail) for e in h)
    assert is_linearizable(h, spec).passed == is_linearizable(renamed, spec).passed


@given(sequential_histories(), st.sampled_from([QUEUE, STACK]))
def test_sequential_complete_histories_match_direct_replay(h, spec):
    assert is_linearizable(h, spec).passed == _replay(h, spec)


@given(histories(), st.data(), st.sampled_from([QUEUE, STACK]))
def test_weakening_preserves_linearizability(h1, data, spec):
    # Dropping returns from h1 gives a history that h1 completes.
    keep = [e.is_call or data.draw(st.booleans()) for e in h1]
    h0 = tuple(e for e, k in zip(h1, keep) if k)
    assert weaker_than(h0, h1)
    if is_linearizable(h1, spec).passed:
        assert is_linearizable(h0, spec).passed


@given(histories(), st.sampled_from([QUEUE, STACK]))
def test_witness_linearization_is_weaker_and_admitted(h, spec):
    verdict = is_linearizable(h, spec)
    if verdict.passed:
        witness = history_from_json(verdict.stats["linearization"])
        assert weaker_than(h, witness)
        assert spec.replay(witness)


# -- library closure --------------------------------------------------------------

@pytest.mark.parametrize("system", [
    lambda: AbsQ(Workload.queue([1], 1)),
    lambda: AbsS(Workload.stack([1], 1)),
    lambda: HWQ(Workload.queue([1], 1)),
])
def test_closure_holds_for_small_libraries(system):
    assert check_library_closure(system()).passed


def test_refusing_a_call_after_a_return_breaks_closure():
    # Op 2 may only be called at the start, never after op 1 returns.
    edges = [(0, call("enq", 1, 1), 1), (1, ret("enq", 1), 2),
             (0, call("deq", 2), 3), (3, ret("deq", 2, EMPTY), 4),
             (1, call("deq", 2), 5), (5, ret("enq", 1), 6)]
    verdict = check_library_closure(ExplicitSystem(0, edges))
    assert not verdict.passed
    assert verdict.obligation == "closure: calls cannot be disabled"


def test_closure_swapping_returns_is_checked():
    # A return may only happen before the other operation's call.
    edges = [(0, call("enq", 1, 1), 1), (1, ret("enq", 1), 2), (2, call("deq", 2), 3),
             (1, call("deq", 2), 4), (3, ret("deq", 2, 1), 5), (4, ret("enq", 1), 6)]
    verdict = check_library_closure(ExplicitSystem(0, edges))
    assert not verdict.passed
    assert verdict.obligation.startswith("closure:")


def test_closure_reports_bound_exceeded():
    verdict = check_library_closure(TSS(Workload.stack([1, 2], 1)), ExplorationBounds(max_states=10))
    assert verdict.status.value == "BoundExceeded"
