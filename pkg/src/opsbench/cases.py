"""Episode and case records: steps, diagnoses, gold annotations.

A case directory pairs ``snapshot.json`` (agent-visible state) with
``case.json`` (the alert plus ground truth, never shown to agents) and a
pre-swept ``cache.json``.  Episode records capture one agent run and
replay exactly: re-dispatching every recorded action reproduces the stored
observations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from .canonical import read_json, write_canonical
from .errors import SchemaError, ValidationError
from .model import Snapshot, load_snapshot
from .taxonomy import FaultCategory
from .tools import CATALOG, Observation, ToolInvocation, decode_key, dispatch

GOLD_PHASES = ("SymptomDiscovery", "RootCauseVerification")


def normalize_term(value: str) -> str:
    return value.strip().lower()


@dataclass(frozen=True)
class AlertNotice:
    title: str
    description: str
    timestamp: int

    def to_dict(self) -> dict:
        return {"title": self.title, "description": self.description, "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "AlertNotice":
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected object")
        try:
            notice = cls(
                title=data["title"], description=data["description"], timestamp=data["timestamp"]
            )
        except KeyError as exc:
            raise SchemaError(f"{path}.{exc.args[0]}: missing required field") from None
        if not isinstance(notice.title, str) or not isinstance(notice.description, str):
            raise SchemaError(f"{path}: title and description must be strings")
        if not isinstance(notice.timestamp, int) or isinstance(notice.timestamp, bool):
            raise SchemaError(f"{path}.timestamp: expected integer")
        if not notice.description:
            raise ValidationError(f"{path}.description: must be non-empty")
        return notice


@dataclass(frozen=True)
class Diagnosis:
    stage: FaultCategory
    component: str
    root_cause: str

    def to_dict(self) -> dict:
        return {
            "stage": self.stage.value,
            "component": self.component,
            "root_cause": self.root_cause,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Diagnosis":
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected object")
        for key in ("stage", "component", "root_cause"):
            if key not in data or not isinstance(data[key], str):
                raise SchemaError(f"{path}.{key}: missing or non-string")
        try:
            stage = FaultCategory(data["stage"])
        except ValueError:
            raise SchemaError(f"{path}.stage: unknown stage {data['stage']!r}") from None
        return cls(stage=stage, component=data["component"], root_cause=data["root_cause"])


@dataclass(frozen=True)
class Step:
    index: int
    action: ToolInvocation
    observation: Observation
    issued_at: int
    thought: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "thought": self.thought,
            "action": self.action.to_dict(),
            "observation": self.observation.to_dict(),
            "issued_at": self.issued_at,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Step":
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected object")
        try:
            action = ToolInvocation.from_dict(data["action"])
            observation = Observation.from_dict(data["observation"])
            return cls(
                index=data["index"],
                action=action,
                observation=observation,
                issued_at=data["issued_at"],
                thought=data.get("thought"),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{path}: malformed step ({exc})") from None


@dataclass(frozen=True)
class Trajectory:
    steps: tuple[Step, ...] = ()

    def to_dict(self) -> list:
        return [s.to_dict() for s in self.steps]

    @classmethod
    def from_list(cls, data: Any, path: str) -> "Trajectory":
        if not isinstance(data, list):
            raise SchemaError(f"{path}: expected list of steps")
        steps = tuple(Step.from_dict(s, f"{path}[{i}]") for i, s in enumerate(data))
        for i, step in enumerate(steps):
            if step.index != i + 1:
                raise ValidationError(f"{path}[{i}]: indices must be contiguous from 1")
        for earlier, later in zip(steps, steps[1:]):
            if later.issued_at < earlier.issued_at:
                raise ValidationError(f"{path}: issued_at must be monotone non-decreasing")
        return cls(steps=steps)


@dataclass(frozen=True)
class GoldStep:
    key: str
    phase: str  # SymptomDiscovery | RootCauseVerification

    def to_dict(self) -> dict:
        return {"key": self.key, "phase": self.phase}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "GoldStep":
        if not isinstance(data, dict) or "key" not in data or "phase" not in data:
            raise SchemaError(f"{path}: expected object with key and phase")
        step = cls(key=data["key"], phase=data["phase"])
        if step.phase not in GOLD_PHASES:
            raise ValidationError(f"{path}.phase: unknown phase {step.phase!r}")
        return step


@dataclass(frozen=True)
class GroundTruth:
    true_diagnosis: Diagnosis
    aliases: Mapping[str, tuple[str, ...]]
    gold_trajectory: tuple[GoldStep, ...]

    def gold_keys(self) -> list[str]:
        return [step.key for step in self.gold_trajectory]

    def to_dict(self) -> dict:
        return {
            "true_diagnosis": self.true_diagnosis.to_dict(),
            "aliases": {k: list(v) for k, v in sorted(self.aliases.items())},
            "gold_trajectory": [s.to_dict() for s in self.gold_trajectory],
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "GroundTruth":
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected object")
        for key in ("true_diagnosis", "aliases", "gold_trajectory"):
            if key not in data:
                raise SchemaError(f"{path}.{key}: missing required field")
        aliases_raw = data["aliases"]
        if not isinstance(aliases_raw, dict):
            raise SchemaError(f"{path}.aliases: expected object")
        aliases: dict[str, tuple[str, ...]] = {}
        for field_name, values in aliases_raw.items():
            if not isinstance(values, list) or any(not isinstance(v, str) for v in values):
                raise SchemaError(f"{path}.aliases.{field_name}: expected list of strings")
            aliases[field_name] = tuple(values)
        steps = tuple(
            GoldStep.from_dict(s, f"{path}.gold_trajectory[{i}]")
            for i, s in enumerate(data["gold_trajectory"])
        )
        truth = cls(
            true_diagnosis=Diagnosis.from_dict(data["true_diagnosis"], f"{path}.true_diagnosis"),
            aliases=aliases,
            gold_trajectory=steps,
        )
        truth.check_precedence(path)
        return truth

    def check_precedence(self, path: str = "ground_truth") -> None:
        """Every symptom-discovery step must precede every verification step."""
        phases = [s.phase for s in self.gold_trajectory]
        if "RootCauseVerification" in phases:
            first_verify = phases.index("RootCauseVerification")
            if any(p == "SymptomDiscovery" for p in phases[first_verify:]):
                raise ValidationError(
                    f"{path}.gold_trajectory: symptom discovery after root cause verification"
                )


@dataclass(frozen=True)
class EpisodeRecord:
    case_id: str
    alert: AlertNotice
    trajectory: Trajectory
    final: tuple[Diagnosis, ...]
    completed: bool
    started_at: int
    ended_at: int
    agent_label: str
    final_thought: Optional[str] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "alert": self.alert.to_dict(),
            "trajectory": self.trajectory.to_dict(),
            "final": [d.to_dict() for d in self.final],
            "final_thought": self.final_thought,
            "completed": self.completed,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "agent_label": self.agent_label,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "episode") -> "EpisodeRecord":
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected object")
        for key in (
            "case_id", "alert", "trajectory", "final", "completed",
            "started_at", "ended_at", "agent_label",
        ):
            if key not in data:
                raise SchemaError(f"{path}.{key}: missing required field")
        final_raw = data["final"]
        if not isinstance(final_raw, list) or len(final_raw) > 3:
            raise SchemaError(f"{path}.final: expected list of at most 3 diagnoses")
        record = cls(
            case_id=data["case_id"],
            alert=AlertNotice.from_dict(data["alert"], f"{path}.alert"),
            trajectory=Trajectory.from_list(data["trajectory"], f"{path}.trajectory"),
            final=tuple(
                Diagnosis.from_dict(d, f"{path}.final[{i}]") for i, d in enumerate(final_raw)
            ),
            completed=bool(data["completed"]),
            started_at=data["started_at"],
            ended_at=data["ended_at"],
            agent_label=data["agent_label"],
            final_thought=data.get("final_thought"),
            error=data.get("error"),
        )
        if record.completed and not record.final:
            raise ValidationError(f"{path}: completed episodes must carry a final diagnosis")
        return record


@dataclass(frozen=True)
class CaseBundle:
    case_id: str
    snapshot_path: str
    alert: AlertNotice
    ground_truth: GroundTruth
    base_dir: Optional[Path] = field(default=None, compare=False)

    def resolve_snapshot_path(self) -> Path:
        path = Path(self.snapshot_path)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return path

    def load_snapshot(self) -> Snapshot:
        return load_snapshot(self.resolve_snapshot_path())

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "snapshot_path": self.snapshot_path,
            "alert": self.alert.to_dict(),
            "ground_truth": self.ground_truth.to_dict(),
        }


def match_diagnosis(pred: Diagnosis, truth: GroundTruth) -> bool:
    """Strict three-way match: stage, component, and root cause must all agree.

    Component and root cause compare after lowercase-trim normalization and
    accept any listed alias.
    """
    gold = truth.true_diagnosis
    if pred.stage is not gold.stage:
        return False
    component_ok = normalize_term(pred.component) in {
        normalize_term(gold.component),
        *(normalize_term(a) for a in truth.aliases.get("component", ())),
    }
    if not component_ok:
        return False
    return normalize_term(pred.root_cause) in {
        normalize_term(gold.root_cause),
        *(normalize_term(a) for a in truth.aliases.get("root_cause", ())),
    }


def check_gold_answerable(truth: GroundTruth, snapshot: Snapshot, path: str = "case") -> None:
    """Every gold key must dispatch with status ok on the case snapshot."""
    for i, step in enumerate(truth.gold_trajectory):
        inv = decode_key(CATALOG, step.key)
        observation = dispatch(snapshot, inv)
        if observation.status != "ok":
            raise ValidationError(
                f"{path}.gold_trajectory[{i}]: key {step.key!r} is not answerable "
                f"(dispatch returned {observation.status})"
            )


def save_case(bundle: CaseBundle, path) -> None:
    write_canonical(path, bundle.to_dict())


def load_case(path, check_answerability: bool = True) -> CaseBundle:
    path = Path(path)
    data = read_json(path)
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected object")
    for key in ("case_id", "snapshot_path", "alert", "ground_truth"):
        if key not in data:
            raise SchemaError(f"case.{key}: missing required field")
    bundle = CaseBundle(
        case_id=data["case_id"],
        snapshot_path=data["snapshot_path"],
        alert=AlertNotice.from_dict(data["alert"], "case.alert"),
        ground_truth=GroundTruth.from_dict(data["ground_truth"], "case.ground_truth"),
        base_dir=path.parent,
    )
    if check_answerability:
        snapshot = bundle.load_snapshot()
        if snapshot.case_meta is not None and snapshot.case_meta.case_id != bundle.case_id:
            raise ValidationError(
                f"case.case_id: {bundle.case_id!r} does not match snapshot case "
                f"{snapshot.case_meta.case_id!r}"
            )
        check_gold_answerable(bundle.ground_truth, snapshot)
    return bundle


def save_episode(record: EpisodeRecord, path) -> None:
    write_canonical(path, record.to_dict())


def load_episode(path) -> EpisodeRecord:
    return EpisodeRecord.from_dict(read_json(path))
