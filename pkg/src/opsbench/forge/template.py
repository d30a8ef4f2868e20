"""Fault template schema and loading.

A template is the reproduction recipe for one fault: prerequisite state
edits, the defect artifact itself (a state edit or an injection rule), the
ordered activation sequence over them, the inversion rules that resolve
into the gold trajectory, and the alias lists used when grading diagnoses.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from ..canonical import read_json
from ..errors import SchemaError, ValidationError
from ..taxonomy import Difficulty, FaultCategory, RootCauseType, is_valid_pair

MUTATION_OPS = ("add", "replace", "remove", "create", "delete")
INJECTION_KINDS = ("component_kill", "cpu_stress", "metric_ramp")
GOLD_PHASES = ("SymptomDiscovery", "RootCauseVerification")


@dataclass(frozen=True)
class StateMutation:
    op: str
    target: Optional[str] = None  # e.g. "pod:frontend", "node:node-2"
    path: Optional[str] = None
    value: Any = None

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "StateMutation":
        if not isinstance(data, dict) or "op" not in data:
            raise SchemaError(f"{path}: expected mutation object with op")
        op = data["op"]
        if op not in MUTATION_OPS:
            raise SchemaError(f"{path}.op: unknown mutation op {op!r}")
        mutation = cls(
            op=op, target=data.get("target"), path=data.get("path"), value=data.get("value")
        )
        if op in ("add", "replace", "remove") and (not mutation.target or not mutation.path):
            raise SchemaError(f"{path}: {op} mutation needs target and path")
        if op == "delete" and not mutation.target:
            raise SchemaError(f"{path}: delete mutation needs target")
        if op == "create" and not isinstance(mutation.value, dict):
            raise SchemaError(f"{path}: create mutation needs a resource value")
        return mutation


@dataclass(frozen=True)
class InjectionRule:
    kind: str
    params: Mapping[str, Any]

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "InjectionRule":
        if not isinstance(data, dict) or "kind" not in data:
            raise SchemaError(f"{path}: expected injection rule with kind")
        kind = data["kind"]
        if kind not in INJECTION_KINDS:
            raise SchemaError(f"{path}.kind: unknown injection kind {kind!r}")
        return cls(kind=kind, params={k: v for k, v in data.items() if k != "kind"})


Artifact = Union[StateMutation, InjectionRule]


@dataclass(frozen=True)
class GoldStepRule:
    tool: str
    args: Mapping[str, Any]
    phase: str

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "GoldStepRule":
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected object")
        for key in ("tool", "args", "phase"):
            if key not in data:
                raise SchemaError(f"{path}.{key}: missing required field")
        if data["phase"] not in GOLD_PHASES:
            raise SchemaError(f"{path}.phase: unknown phase {data['phase']!r}")
        if not isinstance(data["args"], dict):
            raise SchemaError(f"{path}.args: expected object")
        return cls(tool=data["tool"], args=dict(data["args"]), phase=data["phase"])


@dataclass(frozen=True)
class FaultTemplate:
    template_id: str
    category: FaultCategory
    root_cause_type: RootCauseType
    difficulty: Difficulty
    params: Mapping[str, Any]
    alert_title: str
    symptom_text: str
    root_cause_logic: str
    prerequisites: tuple[StateMutation, ...]
    artifact: Artifact
    activation: tuple[str, ...]
    alert_spec: Optional[Mapping[str, Any]]
    inversion_rule: tuple[GoldStepRule, ...]
    component: str
    aliases: Mapping[str, tuple[str, ...]]

    @classmethod
    def from_dict(cls, data: Any, path: str = "template") -> "FaultTemplate":
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected object")
        required = (
            "template_id", "category", "root_cause_type", "params", "alert_title",
            "symptom_text", "root_cause_logic", "prerequisites", "artifact",
            "activation", "inversion_rule", "component", "aliases",
        )
        for key in required:
            if key not in data:
                raise SchemaError(f"{path}.{key}: missing required field")
        try:
            category = FaultCategory(data["category"])
            root_cause = RootCauseType(data["root_cause_type"])
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}") from None
        difficulty = Difficulty(data["difficulty"]) if "difficulty" in data else None
        if difficulty is None:
            from ..taxonomy import CATEGORY_DIFFICULTY

            difficulty = CATEGORY_DIFFICULTY[category]

        prerequisites = tuple(
            StateMutation.from_dict(m, f"{path}.prerequisites[{i}]")
            for i, m in enumerate(data["prerequisites"])
        )
        artifact_raw = data["artifact"]
        if isinstance(artifact_raw, dict) and artifact_raw.get("op") == "inject":
            artifact: Artifact = InjectionRule.from_dict(
                artifact_raw.get("rule"), f"{path}.artifact.rule"
            )
        else:
            artifact = StateMutation.from_dict(artifact_raw, f"{path}.artifact")

        aliases_raw = data["aliases"]
        if not isinstance(aliases_raw, dict):
            raise SchemaError(f"{path}.aliases: expected object")
        aliases = {}
        for key, values in aliases_raw.items():
            if not isinstance(values, list) or any(not isinstance(v, str) for v in values):
                raise SchemaError(f"{path}.aliases.{key}: expected list of strings")
            aliases[key] = tuple(values)

        template = cls(
            template_id=data["template_id"],
            category=category,
            root_cause_type=root_cause,
            difficulty=difficulty,
            params=dict(data["params"]),
            alert_title=data["alert_title"],
            symptom_text=data["symptom_text"],
            root_cause_logic=data["root_cause_logic"],
            prerequisites=prerequisites,
            artifact=artifact,
            activation=tuple(data["activation"]),
            alert_spec=data.get("alert_spec"),
            inversion_rule=tuple(
                GoldStepRule.from_dict(r, f"{path}.inversion_rule[{i}]")
                for i, r in enumerate(data["inversion_rule"])
            ),
            component=data["component"],
            aliases=aliases,
        )
        template.validate(path)
        return template

    def validate(self, path: str = "template") -> None:
        if not is_valid_pair(self.category, self.root_cause_type):
            raise ValidationError(
                f"{path}: ({self.category.value}, {self.root_cause_type.value}) "
                "is not a recognized taxonomy pairing"
            )
        expected = {f"P{i}" for i in range(len(self.prerequisites))} | {"A"}
        if sorted(self.activation) != sorted(expected) or len(self.activation) != len(expected):
            raise ValidationError(
                f"{path}.activation: must reference every prerequisite and the "
                f"artifact exactly once (expected {sorted(expected)})"
            )
        phases = [rule.phase for rule in self.inversion_rule]
        if "SymptomDiscovery" not in phases or "RootCauseVerification" not in phases:
            raise ValidationError(
                f"{path}.inversion_rule: needs at least one symptom-discovery and "
                "one root-cause-verification step"
            )
        first_verify = phases.index("RootCauseVerification")
        if any(p == "SymptomDiscovery" for p in phases[first_verify:]):
            raise ValidationError(
                f"{path}.inversion_rule: symptom discovery must precede verification"
            )
        if not self.symptom_text:
            raise ValidationError(f"{path}.symptom_text: must be non-empty")

    def steps_in_order(self) -> list[tuple[str, Artifact]]:
        """(label, operation) pairs in activation order."""
        out: list[tuple[str, Artifact]] = []
        for label in self.activation:
            if label == "A":
                out.append((label, self.artifact))
            else:
                index = int(label[1:])
                out.append((label, self.prerequisites[index]))
        return out


def load_template(path: str | Path) -> FaultTemplate:
    return FaultTemplate.from_dict(read_json(path), path=str(path))


def load_shipped_templates() -> list[FaultTemplate]:
    root = importlib.resources.files("opsbench.forge") / "templates"
    templates = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            templates.append(FaultTemplate.from_dict(read_json(Path(str(entry))), path=entry.name))
    return templates
