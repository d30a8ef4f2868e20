"""Shipped artifacts must validate against the shipped JSON schemas."""

import importlib.resources
import json

import jsonschema
import pytest

from opsbench.canonical import read_json
from opsbench.tools import catalog_to_jsonable


def _schema(name: str) -> dict:
    root = importlib.resources.files("opsbench.schemas")
    return json.loads((root / name).read_text(encoding="utf-8"))


def test_tools_json_matches_catalog():
    root = importlib.resources.files("opsbench.schemas")
    shipped = json.loads((root / "tools.json").read_text(encoding="utf-8"))
    assert shipped["tools"] == catalog_to_jsonable()
    assert len(shipped["tools"]) == 10


def test_snapshot_fixture_validates(taint_dir):
    jsonschema.validate(read_json(taint_dir / "snapshot.json"), _schema("snapshot.schema.json"))


def test_case_fixture_validates(taint_dir):
    jsonschema.validate(read_json(taint_dir / "case.json"), _schema("case.schema.json"))


def test_episode_fixture_validates(taint_bundle, taint_snapshot, tmp_path):
    from opsbench.cases import save_episode
    from opsbench.harness import InProcessChannel, RunConfig, make_scripted_agent, run_episode

    record = run_episode(
        taint_bundle,
        InProcessChannel(make_scripted_agent("noisy", taint_bundle)),
        RunConfig(clock="virtual", agent_label="noisy"),
        snapshot=taint_snapshot,
    )
    path = tmp_path / "episode.json"
    save_episode(record, path)
    jsonschema.validate(read_json(path), _schema("episode.schema.json"))


@pytest.mark.parametrize("direction", ["harness_to_agent", "agent_to_harness"])
def test_wire_messages_validate(direction, taint_bundle, taint_snapshot):
    from opsbench.harness import InProcessChannel, RunConfig, make_scripted_agent, run_episode

    schema = _schema("messages.schema.json")
    resolved = {"$ref": f"#/definitions/{direction}", "definitions": schema["definitions"]}
    captured = []
    run_episode(
        taint_bundle,
        InProcessChannel(make_scripted_agent("oracle", taint_bundle)),
        RunConfig(clock="virtual", agent_label="oracle"),
        snapshot=taint_snapshot,
        observer=lambda d, m: captured.append((d, m)),
    )
    side = "harness" if direction == "harness_to_agent" else "agent"
    messages = [m for d, m in captured if d == side]
    assert messages
    for message in messages:
        jsonschema.validate(message, resolved)
