"""Command-line driver: ``linlab <command> [options]``.

Exit status is 0 on Pass, 1 on Fail and 2 on BoundExceeded or a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass

from . import registry
from .histories import check_library_closure, history_to_json, is_linearizable, spec_for
from .lts import (GAMMAS, ActionLabel, BoundExceeded, ExplorationBounds, check_gamma_deterministic,
                  collect_histories, find_trace, gamma_cr, iter_histories_with_traces,
                  reachable_graph, replay)
from .relations import fs1_relation, fs2_relation
from .simulation import (check_forward_simulation, check_gamma_refinement,
                         check_normal_backward_simulation, equality_relation, histories_equal,
                         replay_counterexample)
from .verdict import Status, Verdict
from .workload import Workload

COMMANDS = ("explore", "histories", "check-lin", "check-det", "check-closure", "check-refinement",
            "check-histories-equal", "check-fsim", "check-bsim")
RELATIONS = ("fs1", "fs2", "equality")
EXIT = {Status.PASS: 0, Status.FAIL: 1, Status.BOUND_EXCEEDED: 2}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    impl: str | None = None
    spec: str | None = None
    rel: str | None = None
    gamma: str = "CR"
    workload: Workload | None = None
    max_states: int = 2_000_000
    max_events: int = 64
    output: str = "human"
    strict_tss: bool = False
    general: bool = False
    replay_trace: list | None = None

    @property
    def bounds(self) -> ExplorationBounds:
        return ExplorationBounds(self.max_states, self.max_events)


@dataclass
class Report:
    verdict: Verdict
    extra: dict

    def to_json(self) -> dict:
        return {**self.verdict.to_json(), **self.extra}


def _system(config: RunConfig, name: str | None, role: str):
    if name is None:
        raise UsageError(f"missing --{role}")
    try:
        return registry.build(name, config.workload, config.strict_tss)
    except registry.UnknownSystem:
        raise UsageError(f"unknown system {name!r}; see 'linlab list'") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _relation(config: RunConfig, impl, spec):
    name = config.rel or "equality"
    if name == "fs1":
        if not impl.name.startswith("hwq") or spec.name != "absq":
            raise UsageError("fs1 relates an hwq system to absq")
        return fs1_relation(impl, spec)
    if name == "fs2":
        if not impl.name.startswith("tss") or spec.name != "abss":
            raise UsageError("fs2 relates a tss system to abss")
        return fs2_relation(impl, spec)
    try:
        return equality_relation(impl, spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _explore(config: RunConfig) -> Report:
    system = _system(config, config.impl, "impl")
    try:
        graph = reachable_graph(system, config.bounds)
    except BoundExceeded as exc:
        return Report(Verdict.bound_exceeded(str(exc)), {})
    extra = {"graph": graph.to_json(system)} if config.output == "json" else {}
    return Report(Verdict.ok(states=len(graph.states), edges=graph.edge_count), extra)


def _histories(config: RunConfig) -> Report:
    system = _system(config, config.impl, "impl")
    try:
        found = collect_histories(system, config.bounds)
    except BoundExceeded as exc:
        return Report(Verdict.bound_exceeded(str(exc)), {})
    ordered = sorted(found, key=lambda h: (len(h), [e.sort_key() for e in h]))
    extra = {"histories": [history_to_json(h) for h in ordered]} if config.output == "json" else {}
    return Report(Verdict.ok(histories=len(found)), extra)


def _check_lin(config: RunConfig) -> Report:
    system = _system(config, config.impl, "impl")
    seq = spec_for(getattr(system, "kind", "queue"))
    if config.replay_trace is not None:
        replay(system, config.replay_trace)
        history = tuple(e for e in config.replay_trace if gamma_cr(e))
        verdict = is_linearizable(history, seq)
        if not verdict.passed:
            verdict.trace = list(config.replay_trace)
            verdict.witness["history"] = history_to_json(history)
        return Report(verdict, {})
    try:
        graph = reachable_graph(system, config.bounds)
    except BoundExceeded as exc:
        return Report(Verdict.bound_exceeded(str(exc)), {})
    count = 0
    for history, _ in iter_histories_with_traces(system, config.bounds, graph):
        count += 1
        verdict = is_linearizable(history, seq)
        if not verdict.passed:
            verdict.trace = find_trace(graph, history, gamma_cr)
            verdict.witness["history"] = history_to_json(history)
            return Report(verdict, {})
    return Report(Verdict.ok(histories=count, states=len(graph.states)), {})


def _check_det(config: RunConfig) -> Report:
    system = _system(config, config.impl, "impl")
    return Report(check_gamma_deterministic(system, GAMMAS[config.gamma], config.bounds), {})


def _check_closure(config: RunConfig) -> Report:
    system = _system(config, config.impl, "impl")
    return Report(check_library_closure(system, config.bounds), {})


def _check_refinement(config: RunConfig) -> Report:
    impl = _system(config, config.impl, "impl")
    spec = _system(config, config.spec, "spec")
    return Report(check_gamma_refinement(impl, spec, GAMMAS[config.gamma], config.bounds), {})


def _check_histories_equal(config: RunConfig) -> Report:
    a = _system(config, config.impl, "a")
    b = _system(config, config.spec, "b")
    return Report(histories_equal(a, b, config.bounds), {})


def _check_fsim(config: RunConfig) -> Report:
    impl = _system(config, config.impl, "impl")
    spec = _system(config, config.spec, "spec")
    rel = _relation(config, impl, spec)
    gamma = GAMMAS[config.gamma]
    if config.replay_trace is not None:
        return Report(replay_counterexample(impl, spec, gamma, rel, config.replay_trace), {})
    return Report(check_forward_simulation(impl, spec, gamma, rel, config.bounds, general=config.general), {})


def _check_bsim(config: RunConfig) -> Report:
    lhs = _system(config, config.impl, "impl")
    rhs = _system(config, config.spec, "spec")
    rel = _relation(config, lhs, rhs)
    return Report(check_normal_backward_simulation(lhs, rhs, GAMMAS[config.gamma], rel, config.bounds), {})


_HANDLERS = {
    "explore": _explore,
    "histories": _histories,
    "check-lin": _check_lin,
    "check-det": _check_det,
    "check-closure": _check_closure,
    "check-refinement": _check_refinement,
    "check-histories-equal": _check_histories_equal,
    "check-fsim": _check_fsim,
    "check-bsim": _check_bsim,
}


def run(config: RunConfig) -> tuple[int, Report]:
    """Execute one check; returns the exit status and the report."""
    report = _HANDLERS[config.command](config)
    return EXIT[report.verdict.status], report


# -- argument parsing ----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linlab", description="Bounded linearizability and simulation checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    listing = sub.add_parser("list", help="list registered systems")
    listing.add_argument("filter", nargs="?", default="")

    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "check-histories-equal":
            p.add_argument("--a", dest="impl", required=True)
            p.add_argument("--b", dest="spec", required=True)
        else:
            p.add_argument("--impl", required=True)
        if name in ("check-refinement", "check-fsim", "check-bsim"):
            p.add_argument("--spec", required=True)
        if name in ("check-fsim", "check-bsim"):
            p.add_argument("--rel", choices=RELATIONS, default="equality")
        if name == "check-fsim":
            p.add_argument("--general", action="store_true", help="allow unobservable spec steps")
        if name in ("check-det", "check-refinement", "check-fsim", "check-bsim"):
            p.add_argument("--gamma", choices=sorted(GAMMAS), default="CR")
        if name in ("check-lin", "check-fsim"):
            p.add_argument("--replay", metavar="REPORT", help="replay the trace of a JSON report")
        p.add_argument("--workload", help="workload JSON file")
        p.add_argument("--max-states", type=int, default=2_000_000)
        p.add_argument("--max-events", type=int, default=64)
        p.add_argument("--format", choices=("human", "json"), default="human")
        p.add_argument("--strict-tss", action="store_true", help="keep the literal TSS rule premises")
    return parser


def _load_trace(path: str) -> list:
    with open(path) as fh:
        raw = json.load(fh)
    return [ActionLabel.from_json(e) for e in raw["trace"]]


def _config(args) -> RunConfig:
    workload = None
    if args.workload:
        try:
            workload = Workload.load(args.workload)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read workload {args.workload}: {exc}") from None
    replay_trace = None
    if getattr(args, "replay", None):
        try:
            replay_trace = _load_trace(args.replay)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read report {args.replay}: {exc}") from None
    try:
        ExplorationBounds(args.max_states, args.max_events)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(command=args.command, impl=args.impl, spec=getattr(args, "spec", None),
                     rel=getattr(args, "rel", None), gamma=getattr(args, "gamma", "CR"),
                     workload=workload, max_states=args.max_states, max_events=args.max_events,
                     output=args.format, strict_tss=args.strict_tss,
                     general=getattr(args, "general", False), replay_trace=replay_trace)


def _print_human(config: RunConfig, report: Report, elapsed: float, out) -> None:
    v = report.verdict
    print(f"{config.command}: {v.status.value} ({elapsed:.2f} s)", file=out)
    if v.obligation:
        print(f"  obligation: {v.obligation}", file=out)
    if v.message:
        print(f"  {v.message}", file=out)
    if v.trace:
        print("  trace: " + " ".join(str(e) for e in v.trace), file=out)
    for key in ("history", "clauses"):
        if key in v.witness:
            print(f"  {key}: {v.witness[key]}", file=out)
    for key, value in v.stats.items():
        print(f"  {key}: {value}", file=out)


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "list":
        for e in registry.list_systems(args.filter):
            print(f"{e.name:22} {e.kind:6} {e.summary}", file=out)
        return 0
    try:
        config = _config(args)
        started = time.perf_counter()
        status, report = run(config)
    except UsageError as exc:
        print(f"linlab: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"linlab: error: {exc}", file=sys.stderr)
        return 2
    if config.output == "json":
        print(json.dumps(report.to_json(), sort_keys=True), file=out)
    else:
        _print_human(config, report, time.perf_counter() - started, out)
    return status


if __name__ == "__main__":
    sys.exit(main())
