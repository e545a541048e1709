import io
import json

import pytest

from linlab import registry
from linlab.cli import RunConfig, main, run
from linlab.workload import Workload


@pytest.fixture
def w22(tmp_path):
    path = tmp_path / "w22.json"
    path.write_text(json.dumps({"enqs": [1, 2], "deqs": 2}))
    return str(path)


@pytest.fixture
def s21(tmp_path):
    path = tmp_path / "s21.json"
    path.write_text(json.dumps(Workload.stack([1, 2], 1).to_json()))
    return str(path)


def invoke(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.mark.parametrize("argv,code", [
    (["check-fsim", "--impl", "hwq", "--spec", "absq", "--rel", "fs1", "--gamma", "CR+LinDeq"], 0),
    (["check-histories-equal", "--a", "absq", "--b", "absq0"], 0),
    (["check-lin", "--impl", "hwq-mutant-splitswap"], 1),
    (["check-det", "--impl", "absq", "--gamma", "CR+LinDeq"], 0),
    (["check-det", "--impl", "hwq", "--gamma", "CR"], 1),
    (["check-refinement", "--impl", "hwq", "--spec", "absq", "--gamma", "CR+LinDeq"], 0),
    (["check-bsim", "--impl", "absq", "--spec", "absq", "--gamma", "CR+LinDeq"], 0),
    (["explore", "--impl", "absq"], 0),
    (["histories", "--impl", "absq0"], 0),
])
def test_exit_codes(w22, argv, code):
    assert invoke(*argv, "--workload", w22)[0] == code


def test_closure_command(s21):
    assert invoke("check-closure", "--impl", "abss", "--workload", s21)[0] == 0


@pytest.mark.parametrize("argv,with_workload", [
    (["check-det", "--impl", "nope"], True),
    (["check-det", "--impl", "hwq", "--workload", "/nonexistent.json"], False),
    (["check-det", "--impl", "hwq"], False),
    (["check-fsim", "--impl", "hwq", "--spec", "abss", "--rel", "fs1"], True),
    (["explore", "--impl", "hwq", "--max-states", "0"], True),
])
def test_usage_errors_exit_2(w22, argv, with_workload):
    extra = ["--workload", w22] if with_workload else []
    assert invoke(*argv, *extra)[0] == 2


def test_bound_exceeded_exits_2(w22):
    assert invoke("explore", "--impl", "hwq", "--workload", w22, "--max-states", "5")[0] == 2


def test_json_report_is_reproducible(w22):
    argv = ["check-lin", "--impl", "hwq-mutant-splitswap", "--workload", w22, "--format", "json"]
    first, second = invoke(*argv)[1], invoke(*argv)[1]
    assert first == second
    report = json.loads(first)
    assert report["status"] == "Fail" and report["obligation"] == "linearizability"
    assert report["witness"]["history"]


@pytest.mark.parametrize("argv", [
    ["check-lin", "--impl", "hwq-mutant-splitswap"],
    ["check-fsim", "--impl", "hwq-mutant-splitswap", "--spec", "absq", "--rel", "fs1", "--gamma", "CR+LinDeq"],
])
def test_fail_reports_replay_to_the_same_fail(tmp_path, w22, argv):
    code, text = invoke(*argv, "--workload", w22, "--format", "json")
    assert code == 1
    report = tmp_path / "report.json"
    report.write_text(text)
    code2, text2 = invoke(*argv, "--workload", w22, "--format", "json", "--replay", str(report))
    again = json.loads(text2)
    first = json.loads(text)
    assert code2 == 1
    assert (again["obligation"], again["trace"]) == (first["obligation"], first["trace"])


def test_human_output_mentions_the_trace(w22):
    code, text = invoke("check-lin", "--impl", "hwq-mutant-splitswap", "--workload", w22)
    assert code == 1 and "trace:" in text and "obligation: linearizability" in text


def test_list_systems():
    code, text = invoke("list")
    names = [line.split()[0] for line in text.splitlines()]
    assert {"absq0", "absq", "abss0", "abss", "hwq", "tss", "hwq-mutant-splitswap"} <= set(names)
    assert invoke("list", "")[1] == text
    assert [e.name for e in registry.list_systems("mutant")] == [
        "hwq-mutant-splitswap", "hwq-mutant-no-null", "tss-mutant-no-cas"]


def test_toy_systems_need_no_workload():
    assert invoke("check-det", "--impl", "toy-single", "--gamma", "full")[0] == 0
    assert invoke("check-det", "--impl", "toy-choice", "--gamma", "full")[0] == 1


def test_run_returns_report():
    config = RunConfig("check-det", impl="absq", gamma="CR+LinDeq", workload=Workload.queue([1], 1))
    status, report = run(config)
    assert status == 0 and report.to_json()["status"] == "Pass"


def test_strict_tss_flag_reaches_the_model():
    system = registry.build("tss", Workload.stack([1], 1), strict_tss=True)
    assert system.literal_push4 and system.literal_ret_pop


def test_worker_count_does_not_change_reports(w22, monkeypatch):
    argv = ["check-fsim", "--impl", "hwq-mutant-splitswap", "--spec", "absq", "--rel", "fs1",
            "--gamma", "CR+LinDeq", "--workload", w22, "--format", "json"]
    single = invoke(*argv)[1]
    monkeypatch.setenv("LINLAB_THREADS", "3")
    assert invoke(*argv)[1] == single
