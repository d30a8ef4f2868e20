import json

import pytest

from opsbench.canonical import canonical_bytes, read_json
from opsbench.cases import (
    Diagnosis,
    GroundTruth,
    load_case,
    load_episode,
    match_diagnosis,
    save_case,
)
from opsbench.errors import SchemaError, ValidationError
from opsbench.taxonomy import FaultCategory
from opsbench.tools import dispatch


def test_match_identity(taint_bundle):
    truth = taint_bundle.ground_truth
    assert match_diagnosis(truth.true_diagnosis, truth)


def test_match_accepts_alias_and_normalization(taint_bundle):
    truth = taint_bundle.ground_truth
    pred = Diagnosis(
        stage=FaultCategory.SCHEDULING,
        component="  Frontend ",
        root_cause="Taint Mismatch",
    )
    assert match_diagnosis(pred, truth)


def test_match_requires_all_three_fields(taint_bundle):
    truth = taint_bundle.ground_truth
    gold = truth.true_diagnosis
    wrong_stage = Diagnosis(FaultCategory.RUNTIME, gold.component, gold.root_cause)
    wrong_component = Diagnosis(gold.stage, "cartservice", gold.root_cause)
    wrong_cause = Diagnosis(gold.stage, gold.component, "bad image")
    assert not match_diagnosis(wrong_stage, truth)
    assert not match_diagnosis(wrong_component, truth)
    assert not match_diagnosis(wrong_cause, truth)


def test_case_round_trip(taint_dir, taint_bundle, tmp_path):
    out = tmp_path / "case.json"
    save_case(taint_bundle, out)
    assert out.read_bytes() == (taint_dir / "case.json").read_bytes()


def test_gold_phase_order_enforced_on_load(taint_dir, tmp_path):
    data = read_json(taint_dir / "case.json")
    steps = data["ground_truth"]["gold_trajectory"]
    steps[0], steps[-1] = steps[-1], steps[0]
    bad = tmp_path / "case.json"
    bad.write_bytes(canonical_bytes(data))
    with pytest.raises(ValidationError, match="symptom discovery"):
        load_case(bad, check_answerability=False)


def test_unanswerable_gold_key_rejected(taint_dir, tmp_path):
    data = read_json(taint_dir / "case.json")
    key = data["ground_truth"]["gold_trajectory"][0]["key"]
    data["ground_truth"]["gold_trajectory"][0]["key"] = key.replace(
        "resource_name=", "resource_name=ghost-"
    )
    case_dir = tmp_path / "tampered"
    case_dir.mkdir()
    (case_dir / "case.json").write_bytes(canonical_bytes(data))
    (case_dir / "snapshot.json").write_bytes((taint_dir / "snapshot.json").read_bytes())
    with pytest.raises(ValidationError, match="not answerable"):
        load_case(case_dir / "case.json")


def test_shipped_cases_pass_answerability(taint_dir):
    bundle = load_case(taint_dir / "case.json")  # answerability checked by default
    assert bundle.case_id == "sched-taint-001-s7"


def test_episode_replays_exactly(suite_dir, taint_bundle, taint_snapshot, tmp_path):
    from opsbench.harness import InProcessChannel, RunConfig, make_scripted_agent, run_episode

    record = run_episode(
        taint_bundle,
        InProcessChannel(make_scripted_agent("oracle", taint_bundle)),
        RunConfig(clock="virtual", agent_label="oracle"),
        snapshot=taint_snapshot,
    )
    for step in record.trajectory.steps:
        assert dispatch(taint_snapshot, step.action) == step.observation


def test_completed_requires_final(tmp_path, taint_bundle):
    record = {
        "case_id": "x",
        "alert": taint_bundle.alert.to_dict(),
        "trajectory": [],
        "final": [],
        "completed": True,
        "started_at": 0,
        "ended_at": 1,
        "agent_label": "t",
        "error": None,
    }
    path = tmp_path / "bad.episode.json"
    path.write_text(json.dumps(record))
    with pytest.raises(ValidationError, match="final"):
        load_episode(path)


def test_ground_truth_precedence_validator():
    diagnosis = {"stage": "Runtime", "component": "x", "root_cause": "y"}
    with pytest.raises(ValidationError):
        GroundTruth.from_dict(
            {
                "true_diagnosis": diagnosis,
                "aliases": {},
                "gold_trajectory": [
                    {"key": "GetAlerts?", "phase": "RootCauseVerification"},
                    {"key": "GetClusterConfiguration?", "phase": "SymptomDiscovery"},
                ],
            },
            "truth",
        )


def test_malformed_case_file(tmp_path):
    path = tmp_path / "case.json"
    path.write_text('{"case_id": "x"}')
    with pytest.raises(SchemaError, match="snapshot_path"):
        load_case(path)
