import http.server
import json
import sys
import threading

import pytest

from opsbench.canonical import canonical_dumps
from opsbench.cases import load_episode, save_episode
from opsbench.harness import (
    InProcessChannel,
    RunConfig,
    SubprocessChannel,
    HttpChannel,
    make_scripted_agent,
    run_episode,
    run_suite,
)
from opsbench.harness.cli import main as cli_main
from opsbench.metrics import agent_keys, score_episode


def oracle_channel(bundle):
    return InProcessChannel(make_scripted_agent("oracle", bundle))


def test_oracle_episode_matches_gold(taint_bundle, taint_snapshot):
    record = run_episode(
        taint_bundle,
        oracle_channel(taint_bundle),
        RunConfig(clock="virtual", agent_label="oracle"),
        snapshot=taint_snapshot,
    )
    assert record.completed
    assert agent_keys(record.trajectory) == taint_bundle.ground_truth.gold_keys()
    assert record.final[0] == taint_bundle.ground_truth.true_diagnosis
    assert all(s.observation.status == "ok" for s in record.trajectory.steps)


class _LoopingAgent:
    """Never concludes; used to hit the step budget."""

    def receive(self, message):
        pass

    def emit(self):
        return {"type": "tool_call", "id": 1, "tool": "GetAlerts", "args": {}}


def test_step_budget_enforced(taint_bundle, taint_snapshot):
    cfg = RunConfig(max_steps=5, clock="virtual", agent_label="loop")
    record = run_episode(
        taint_bundle, InProcessChannel(_LoopingAgent()), cfg, snapshot=taint_snapshot
    )
    assert not record.completed
    assert len(record.trajectory.steps) == 5
    assert "budget" in (record.error or "")


def test_trajectory_never_exceeds_budget(taint_bundle, taint_snapshot):
    for max_steps in (1, 2, 3):
        cfg = RunConfig(max_steps=max_steps, clock="virtual")
        record = run_episode(
            taint_bundle, InProcessChannel(_LoopingAgent()), cfg, snapshot=taint_snapshot
        )
        assert len(record.trajectory.steps) <= max_steps


def test_ground_truth_never_leaves_harness(taint_bundle, taint_snapshot):
    captured = []
    record = run_episode(
        taint_bundle,
        oracle_channel(taint_bundle),
        RunConfig(clock="virtual", agent_label="oracle"),
        snapshot=taint_snapshot,
        observer=lambda direction, msg: captured.append((direction, msg)),
    )
    assert record.completed
    outbound = [canonical_dumps(m) for d, m in captured if d == "harness"]
    assert outbound, "observer saw no outbound traffic"
    for rendered in outbound:
        assert "TaintTolerationMismatch" not in rendered
        assert "gold_trajectory" not in rendered
        assert "true_diagnosis" not in rendered


def test_replay_is_byte_identical(taint_bundle, taint_snapshot, tmp_path):
    cfg = RunConfig(clock="virtual", agent_label="oracle")
    for name in ("one", "two"):
        record = run_episode(
            taint_bundle, oracle_channel(taint_bundle), cfg, snapshot=taint_snapshot
        )
        save_episode(record, tmp_path / f"{name}.json")
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()


def test_parallel_equals_sequential(bundles):
    cfg_seq = RunConfig(clock="virtual", agent_label="oracle", parallel=1)
    cfg_par = RunConfig(clock="virtual", agent_label="oracle", parallel=4)
    seq = run_suite(bundles, oracle_channel, cfg_seq)
    par = run_suite(bundles, oracle_channel, cfg_par)
    assert seq == par
    assert [r.case_id for r in seq] == sorted(r.case_id for r in seq)


def test_empty_suite():
    assert run_suite([], oracle_channel, RunConfig()) == []


AGENT_SCRIPT = """\
import json, sys
json.loads(sys.stdin.readline())
print(json.dumps({"type": "tool_call", "id": 1, "tool": "GetAlerts", "args": {}}), flush=True)
json.loads(sys.stdin.readline())
print(json.dumps({"type": "final", "diagnoses": [
    {"stage": "Runtime", "component": "x", "root_cause": "y"}]}), flush=True)
sys.stdin.readline()
"""

MALFORMED_SCRIPT = """\
import sys
sys.stdin.readline()
print("this is not json", flush=True)
sys.stdin.readline()
"""


def test_subprocess_agent_speaks_protocol(taint_bundle, taint_snapshot, tmp_path):
    script = tmp_path / "agent.py"
    script.write_text(AGENT_SCRIPT)
    channel = SubprocessChannel([sys.executable, str(script)])
    record = run_episode(
        taint_bundle,
        channel,
        RunConfig(clock="virtual", agent_label="pipe", call_timeout=20),
        snapshot=taint_snapshot,
    )
    assert record.completed
    assert len(record.trajectory.steps) == 1
    assert record.final[0].component == "x"


def test_malformed_agent_line_ends_episode(taint_bundle, taint_snapshot, tmp_path):
    script = tmp_path / "agent.py"
    script.write_text(MALFORMED_SCRIPT)
    channel = SubprocessChannel([sys.executable, str(script)])
    record = run_episode(
        taint_bundle,
        channel,
        RunConfig(clock="virtual", agent_label="bad", call_timeout=20),
        snapshot=taint_snapshot,
    )
    assert not record.completed
    assert "protocol violation" in record.error


class _HttpAgentHandler(http.server.BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers["Content-Length"])
        message = json.loads(self.rfile.read(length))
        if message["type"] == "init":
            reply = {"type": "tool_call", "id": 1, "tool": "GetAlerts", "args": {}}
            body = json.dumps(reply).encode()
        elif message["type"] == "tool_result":
            reply = {
                "type": "final",
                "diagnoses": [{"stage": "Runtime", "component": "x", "root_cause": "y"}],
            }
            body = json.dumps(reply).encode()
        else:  # end
            body = b""
        self.send_response(200)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


def test_http_transport(taint_bundle, taint_snapshot):
    server = http.server.HTTPServer(("127.0.0.1", 0), _HttpAgentHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        url = f"http://127.0.0.1:{server.server_port}/"
        record = run_episode(
            taint_bundle,
            HttpChannel(url, timeout=10),
            RunConfig(clock="virtual", agent_label="http"),
            snapshot=taint_snapshot,
        )
        assert record.completed and len(record.trajectory.steps) == 1
    finally:
        server.shutdown()


def test_unreachable_agent_yields_incomplete_records(bundles):
    cfg = RunConfig(clock="virtual", agent_label="gone", call_timeout=2)
    records = run_suite(
        bundles[:2], lambda b: HttpChannel("http://127.0.0.1:9/", timeout=0.5), cfg
    )
    assert len(records) == 2
    assert all(not r.completed for r in records)
    assert all("transport failure" in (r.error or "") for r in records)


# --- CLI ----------------------------------------------------------------------


def test_cli_full_flow(suite_dir, tmp_path, capsys):
    episodes = tmp_path / "episodes"
    assert cli_main([
        "demo", "--agent", "oracle", "--cases", str(suite_dir),
        "--out", str(episodes), "--clock", "virtual",
    ]) == 0
    report = tmp_path / "report.json"
    assert cli_main([
        "score", "--episodes", str(episodes), "--cases", str(suite_dir),
        "--out", str(report),
    ]) == 0
    assert report.exists() and report.with_suffix(".md").exists()
    assert cli_main(["report", "--report", str(report)]) == 0
    out = capsys.readouterr().out
    assert "| Overall |" in out


def test_cli_verify_ok(suite_dir, capsys):
    assert cli_main(["verify", "--cases", str(suite_dir), "--probes", "25"]) == 0
    assert "all checks passed" in capsys.readouterr().out


def test_cli_score_orphan_episode(suite_dir, tmp_path, taint_bundle, taint_snapshot, capsys):
    record = run_episode(
        taint_bundle,
        oracle_channel(taint_bundle),
        RunConfig(clock="virtual", agent_label="oracle"),
        snapshot=taint_snapshot,
    )
    import dataclasses

    orphan = dataclasses.replace(record, case_id="no-such-case")
    episodes = tmp_path / "episodes"
    episodes.mkdir()
    save_episode(orphan, episodes / "no-such-case.episode.json")
    code = cli_main([
        "score", "--episodes", str(episodes), "--cases", str(suite_dir),
        "--out", str(tmp_path / "r.json"),
    ])
    assert code == 1
    assert "no-such-case" in capsys.readouterr().err


def test_cli_unknown_flag_exits_2(suite_dir):
    with pytest.raises(SystemExit) as excinfo:
        cli_main(["forge", "--frobnicate"])
    assert excinfo.value.code == 2


def test_cli_list_templates(capsys):
    assert cli_main(["list", "--templates"]) == 0
    out = capsys.readouterr().out
    assert "sched-taint-001" in out and "TaintTolerationMismatch" in out


def test_cli_env_var_default(suite_dir, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("OPSBENCH_CASES_DIR", str(suite_dir))
    assert cli_main(["list", "--cases"]) == 0
    assert "sched-taint-001-s7" in capsys.readouterr().out


def test_scripted_calibration_spot_checks(taint_bundle, taint_snapshot):
    truth = taint_bundle.ground_truth
    gold_size = len(truth.gold_trajectory)

    def run_kind(kind, **kwargs):
        record = run_episode(
            taint_bundle,
            InProcessChannel(make_scripted_agent(kind, taint_bundle, **kwargs)),
            RunConfig(clock="virtual", agent_label=kind),
            snapshot=taint_snapshot,
        )
        return score_episode(record, truth)

    shuffled = run_kind("shuffled")
    assert shuffled.any_order and not shuffled.in_order

    repeater = run_kind("repeater")
    assert repeater.rar == 0.5 and repeater.in_order and not repeater.exact

    malformed = run_kind("malformed", invalid_count=3)
    assert malformed.iac == 3 and malformed.exact

    noisy = run_kind("noisy", extra_count=2)
    assert noisy.in_order and not noisy.exact
    assert noisy.relevance == gold_size / (gold_size + 2)

    guesser = run_kind("guesser")
    assert guesser.zero_tool and guesser.coverage == 0.0 and guesser.completed
