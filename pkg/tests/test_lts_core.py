import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linlab.histories import is_well_formed
from linlab.hwq import HWQ
from linlab.lts import (EMPTY, GAMMAS, ActionLabel, BoundExceeded, Determinizer, ExplicitSystem,
                        ExplorationBounds, FunctionSystem, Kind, call, check_gamma_deterministic,
                        collect_histories, com, find_trace, gamma_cr, gamma_cr_lin_deq, gamma_full,
                        internal, lin, project, reachable_graph, replay, ret)
from linlab.spec_queue import AbsQ, AbsQ0, AbsQState, COMP, PEND
from linlab.spec_stack import AbsS
from linlab.tss import TSS
from linlab.workload import BadThreadId, DuplicateValue, Workload


# -- labels -------------------------------------------------------------------

@pytest.mark.parametrize("label", [
    call("enq", 1, 5), ret("enq", 1), call("deq", 2), ret("deq", 2, EMPTY),
    lin("deq", 3, 7), com("pop", 4, EMPTY), internal("push", 1, "push3"),
])
def test_label_json_round_trip(label):
    assert ActionLabel.from_json(json.loads(json.dumps(label.to_json()))) == label


@pytest.mark.parametrize("kind,value,detail", [
    (Kind.INTERNAL, None, None),
    (Kind.LIN, None, None),
    (Kind.COM, None, None),
])
def test_label_shape_is_checked(kind, value, detail):
    with pytest.raises(ValueError):
        ActionLabel(kind, "deq", 1, value, detail)


def test_empty_is_distinct_from_every_natural():
    assert EMPTY != 0 and EMPTY is not None
    assert ret("deq", 1, EMPTY) != ret("deq", 1, 0)


def test_label_rendering():
    assert str(call("enq", 1, 5)) == "inv(enq,5,1)"
    assert str(ret("deq", 2, EMPTY)) == "ret(deq,EMPTY,2)"
    assert str(internal("deq", 3, "swap_null")) == "swap_null(3)"


@pytest.mark.parametrize("bad", [(0, 1), (1, 0), (-1, 5)])
def test_bounds_must_be_positive(bad):
    with pytest.raises(ValueError):
        ExplorationBounds(*bad)


# -- workloads ----------------------------------------------------------------

def test_workload_rejects_repeated_values():
    with pytest.raises(DuplicateValue):
        Workload.queue([1, 1], 0)


def test_workload_rejects_bad_thread():
    with pytest.raises(BadThreadId):
        Workload.stack([(1, 3)], 0, max_threads=2)


@pytest.mark.parametrize("w", [Workload.queue([1, 2], 2), Workload.stack([1, 2], 2),
                               Workload.stack([(4, 0), (5, 0)], [1], max_threads=2)])
def test_workload_json_round_trip(w):
    assert Workload.from_json(json.loads(json.dumps(w.to_json()))) == w


def test_workload_json_short_stack_form():
    assert Workload.from_json({"pushes": [1, 2], "pops": 2}) == Workload.stack([1, 2], 2)


# -- reachable_graph ------------------------------------------------------------

def test_single_state_system():
    graph = reachable_graph(ExplicitSystem("s", []))
    assert len(graph.states) == 1 and graph.edge_count == 0


def test_absq_one_enqueue_graph(q11):
    w = Workload.queue([1], 0)
    graph = reachable_graph(AbsQ(w))
    assert graph.states == [
        AbsQState(),
        AbsQState.make({1}, (), {1: (1, PEND)}, cp={1: "A1"}),
        AbsQState.make({1}, (), {1: (1, COMP)}, cp={1: "A2"}),
    ]
    assert [str(lab) for _, lab, _ in graph.edges()] == ["inv(enq,1,1)", "ret(enq,1)"]


@pytest.mark.parametrize("system,states,edges", [
    (lambda: AbsQ(Workload.queue([1, 2], 2)), 432, 1136),
    (lambda: AbsQ0(Workload.queue([1, 2], 2)), 608, None),
    (lambda: AbsS(Workload.stack([1, 2], 2)), 1649, None),
    (lambda: HWQ(Workload.queue([1, 2], 2)), 6520, 20364),
])
def test_regression_state_counts(system, states, edges):
    graph = reachable_graph(system())
    assert len(graph.states) == states
    if edges is not None:
        assert graph.edge_count == edges


@pytest.mark.slow
def test_tss_regression_state_count(s22):
    assert len(reachable_graph(TSS(s22)).states) == 40869


def test_bound_exceeded_carries_partial_graph(q22):
    with pytest.raises(BoundExceeded) as info:
        reachable_graph(HWQ(q22), ExplorationBounds(max_states=50))
    assert info.value.partial.partial
    assert len(info.value.partial.states) == 50


def test_graph_json_shape(q11):
    doc = reachable_graph(AbsQ(q11)).to_json()
    assert set(doc) == {"states", "edges", "partial"}
    assert {"from", "label", "to"} == set(doc["edges"][0])


def test_worker_count_does_not_change_the_graph(q22, monkeypatch):
    single = reachable_graph(HWQ(q22))
    monkeypatch.setenv("LINLAB_THREADS", "4")
    multi = reachable_graph(HWQ(q22))
    assert single.states == multi.states and single.out == multi.out


# -- project ------------------------------------------------------------------

def test_project_examples():
    assert project([], gamma_cr) == []
    trace = [call("enq", 1, 1), internal("enq", 1, "back++"), ret("enq", 1)]
    assert project(trace, gamma_cr) == [call("enq", 1, 1), ret("enq", 1)]


def test_project_hwq_trace_keeps_one_lin_per_dequeue(q21):
    graph = reachable_graph(HWQ(q21))
    history = [call("enq", 1, 1), ret("enq", 1), call("deq", 3), ret("deq", 3, 1)]
    trace = find_trace(graph, history, gamma_cr)
    kept = project(trace, gamma_cr_lin_deq)
    assert kept == [call("enq", 1, 1), ret("enq", 1), call("deq", 3), lin("deq", 3, 1), ret("deq", 3, 1)]


label_strategy = st.sampled_from([
    call("enq", 1, 1), ret("enq", 1), call("deq", 2), lin("deq", 2, 1), ret("deq", 2, 1),
    internal("deq", 2, "range"), com("pop", 3, 2),
])
alphabets = st.sampled_from(list(GAMMAS.values()))


@given(st.lists(label_strategy, max_size=12), alphabets, alphabets)
def test_projection_composes(trace, g1, g2):
    assert project(project(trace, g1), g2) == project(trace, lambda a: g1(a) and g2(a))


# -- histories and determinism -------------------------------------------------

def test_empty_workload_has_only_the_empty_history():
    assert collect_histories(AbsQ0(Workload.queue([], 0))) == {()}


def test_absq0_histories_example():
    found = collect_histories(AbsQ0(Workload.queue([1], 1)))
    assert (call("enq", 1, 1), ret("enq", 1), call("deq", 2), ret("deq", 2, 1)) in found
    assert (call("deq", 2), ret("deq", 2, EMPTY)) in found
    assert (call("deq", 2), ret("deq", 2, EMPTY), call("enq", 1, 1), ret("enq", 1)) in found


def test_histories_are_bounded_by_event_count(q22):
    found = collect_histories(HWQ(q22), ExplorationBounds(max_trace_events=3))
    assert max(len(h) for h in found) == 3


def test_deterministic_examples(q22):
    assert check_gamma_deterministic(AbsQ(q22), gamma_cr_lin_deq).passed
    one = ExplicitSystem(0, [(0, call("enq", 1, 1), 1)])
    assert check_gamma_deterministic(one, gamma_full).passed


def test_hwq_is_not_call_return_deterministic():
    verdict = check_gamma_deterministic(HWQ(Workload.queue([1, 2], 1)), gamma_cr)
    assert not verdict.passed
    assert verdict.obligation == "gamma-determinism"


def test_replay_reports_disabled_label(q11):
    with pytest.raises(ValueError):
        replay(AbsQ(q11), [ret("enq", 1)])


# Random explicit systems: graphs over a few states with labels from a
# small pool, used for order-insensitivity and history well-formedness.

@st.composite
def explicit_systems(draw):
    n = draw(st.integers(1, 6))
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), label_strategy, st.integers(0, n - 1)),
                          max_size=14))
    return n, edges


@given(explicit_systems(), st.randoms())
def test_exploration_is_order_insensitive(system, rnd):
    n, edges = system
    shuffled = list(edges)
    rnd.shuffle(shuffled)
    g1 = reachable_graph(ExplicitSystem(0, edges))
    g2 = reachable_graph(ExplicitSystem(0, shuffled))
    as_set = lambda g: {(g.states[a], lab, g.states[b]) for a, lab, b in g.edges()}
    assert set(g1.states) == set(g2.states)
    assert as_set(g1) == as_set(g2)
    assert g1.states == g2.states


def _well_formed_toy():
    # A tiny call/return-only library: each op may be called then return.
    def succ(state):
        out = []
        for k, method, value, result in ((1, "enq", 1, None), (2, "deq", None, 1), (3, "deq", None, EMPTY)):
            phase = state[k - 1]
            if phase == 0 and not (k == 3 and state[1] == 1):
                out.append((call(method, k, value), state[:k - 1] + (1,) + state[k:]))
            elif phase == 1:
                out.append((ret(method, k, result), state[:k - 1] + (2,) + state[k:]))
        return out
    return FunctionSystem((0, 0, 0), succ)


def test_call_return_only_system_histories_are_its_trace_prefixes():
    system = _well_formed_toy()
    graph = reachable_graph(system)
    prefixes = {()}
    frontier = [((), 0)]
    while frontier:
        trace, i = frontier.pop()
        for label, j in graph.out[i]:
            prefixes.add(trace + (label,))
            frontier.append((trace + (label,), j))
    assert collect_histories(system) == prefixes


@pytest.mark.parametrize("system", [
    lambda: HWQ(Workload.queue([1, 2], 1)),
    lambda: AbsQ(Workload.queue([1, 2], 2)),
    lambda: TSS(Workload.stack([1], 2)),
])
def test_collected_histories_are_well_formed(system):
    assert all(is_well_formed(h) for h in collect_histories(system()))


def test_determinizer_macro_states_cover_tau_closure(q21):
    graph = reachable_graph(HWQ(q21))
    det = Determinizer(graph, gamma_cr)
    start = det.initial()
    assert 0 in start and len(start) == 1  # nothing internal before the first call
    after = det.step(start)[call("enq", 1, 1)]
    assert len(after) > 1  # back++ and the write are unobservable


@settings(max_examples=30)
@given(st.integers(1, 3), st.integers(0, 2))
def test_spec_and_hwq_call_labels_agree(enqs, deqs):
    w = Workload.queue(list(range(1, enqs + 1)), deqs)
    first = lambda system: {lab for lab, _ in system.successors(system.initial)}
    assert first(AbsQ(w)) == first(HWQ(w)) == first(AbsQ0(w))
