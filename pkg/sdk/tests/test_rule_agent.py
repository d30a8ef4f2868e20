"""End-to-end checks of the reference agent through the benchmark CLI.

The SDK consumes the benchmark only through its external interfaces:
the `opsbench` CLI, the wire protocol, and the case/episode/report file
formats.
"""

import json
import shlex

from .conftest import run_cli


def _score(suite_dir, episodes_dir, tmp_path, name):
    report_path = tmp_path / f"{name}.report.json"
    run_cli(
        "score", "--episodes", episodes_dir, "--cases", suite_dir, "--out", report_path
    )
    return json.loads(report_path.read_text())


def test_rule_agent_completes_every_case(suite_dir, tmp_path, agent_cmd):
    episodes = tmp_path / "episodes"
    run_cli(
        "run",
        "--agent-cmd", " ".join(shlex.quote(part) for part in agent_cmd),
        "--cases", suite_dir,
        "--out", episodes,
        "--clock", "virtual",
        "--label", "sdk-rule-agent",
    )
    report = _score(suite_dir, episodes, tmp_path, "rule")
    assert report["aggregates"]["TCR"] == 1.0
    assert report["aggregates"]["IAC"] == 0.0


def test_rule_agent_diagnoses_taint_case(suite_dir, tmp_path, agent_cmd):
    episodes = tmp_path / "episodes"
    run_cli(
        "run",
        "--agent-cmd", " ".join(shlex.quote(part) for part in agent_cmd),
        "--cases", suite_dir,
        "--out", episodes,
        "--clock", "virtual",
    )
    episode = json.loads((episodes / "sched-taint-001-s7.episode.json").read_text())
    assert episode["completed"]
    top = episode["final"][0]
    assert top["stage"] == "Scheduling"
    assert top["component"] == "frontend"
    assert top["root_cause"] == "TaintTolerationMismatch"


def test_rule_agent_accuracy_across_suite(suite_dir, tmp_path, agent_cmd):
    """The triage policy genuinely solves the shipped fault families."""
    episodes = tmp_path / "episodes"
    run_cli(
        "run",
        "--agent-cmd", " ".join(shlex.quote(part) for part in agent_cmd),
        "--cases", suite_dir,
        "--out", episodes,
        "--clock", "virtual",
    )
    report = _score(suite_dir, episodes, tmp_path, "accuracy")
    assert report["aggregates"]["A@1"] >= 0.9
    assert report["aggregates"]["Cov."] >= 0.5


def test_replay_mode_matches_builtin_gold_agent(suite_dir, tmp_path, agent_cmd):
    builtin = tmp_path / "builtin"
    run_cli(
        "demo", "--agent", "oracle", "--cases", suite_dir, "--out", builtin,
        "--clock", "virtual", "--label", "oracle",
    )
    sdk = tmp_path / "sdk"
    command = " ".join(shlex.quote(part) for part in agent_cmd)
    run_cli(
        "run",
        "--agent-cmd", command + " --replay-case {case_dir}/case.json",
        "--cases", suite_dir,
        "--out", sdk,
        "--clock", "virtual",
        "--label", "oracle",
    )
    builtin_files = sorted(p.name for p in builtin.glob("*.episode.json"))
    sdk_files = sorted(p.name for p in sdk.glob("*.episode.json"))
    assert builtin_files == sdk_files and builtin_files
    for name in builtin_files:
        assert (builtin / name).read_bytes() == (sdk / name).read_bytes()
