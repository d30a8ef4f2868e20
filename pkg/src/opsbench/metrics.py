"""Outcome and process metrics over diagnostic episodes.

Alignment metrics operate on the canonical keys of schema-valid actions
only; invalid actions produced no evidence and cannot match a gold step.
Sequence semantics:

* exact match: the two key sequences are identical,
* in-order match: the gold sequence is a subsequence of the agent's,
* any-order match: every gold key appears somewhere in the agent's set.

Relevance and coverage are the set-overlap ratios; relevance is undefined
(reported as null and excluded from means) when the agent issued no valid
action.  A valid action is redundant when its key repeats an earlier valid
key: against a frozen snapshot a repeat returns the identical observation,
so it cannot add context.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .canonical import write_canonical
from .cases import EpisodeRecord, GroundTruth, Trajectory, match_diagnosis
from .errors import ValidationError
from .tools import CATALOG, canonical_key, validate

AGGREGATE_COLUMNS = (
    "A@1", "A@3", "TCR", "Exact", "InO.", "AnyO.", "Rel.", "Cov.",
    "Steps", "IAC", "MTTI", "RAR", "ZTDR",
)


@dataclass(frozen=True)
class EpisodeScore:
    case_id: str
    category: str
    hit_at_1: bool
    hit_at_3: bool
    completed: bool
    exact: bool
    in_order: bool
    any_order: bool
    relevance: Optional[float]
    coverage: float
    steps: int
    iac: int
    mtti_seconds: float
    rar: float
    zero_tool: bool

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "category": self.category,
            "hit_at_1": self.hit_at_1,
            "hit_at_3": self.hit_at_3,
            "completed": self.completed,
            "exact": self.exact,
            "in_order": self.in_order,
            "any_order": self.any_order,
            "relevance": self.relevance,
            "coverage": self.coverage,
            "steps": self.steps,
            "iac": self.iac,
            "mtti_seconds": self.mtti_seconds,
            "rar": self.rar,
            "zero_tool": self.zero_tool,
        }


def accuracy_at_k(episode: EpisodeRecord, truth: GroundTruth, k: int) -> bool:
    if k not in (1, 3):
        raise ValueError("k must be 1 or 3")
    return any(match_diagnosis(d, truth) for d in episode.final[:k])


def agent_keys(trajectory: Trajectory) -> list[str]:
    """Canonical keys of valid actions, in order; invalid steps are dropped."""
    keys = []
    for step in trajectory.steps:
        if step.observation.status == "invalid":
            continue
        if validate(CATALOG, step.action) is not None:
            continue
        keys.append(canonical_key(CATALOG, step.action))
    return keys


def exact_match(agent: Sequence[str], gold: Sequence[str]) -> bool:
    return list(agent) == list(gold)


def in_order_match(agent: Sequence[str], gold: Sequence[str]) -> bool:
    it = iter(agent)
    return all(g in it for g in gold)


def any_order_match(agent: Sequence[str], gold: Sequence[str]) -> bool:
    return set(gold) <= set(agent)


def relevance_and_coverage(
    agent: Sequence[str], gold: Sequence[str]
) -> tuple[Optional[float], float]:
    agent_set, gold_set = set(agent), set(gold)
    overlap = len(agent_set & gold_set)
    relevance = overlap / len(agent_set) if agent_set else None
    coverage = overlap / len(gold_set) if gold_set else 1.0
    return relevance, coverage


def operational_counters(episode: EpisodeRecord) -> tuple[int, int, float, bool, float]:
    """(steps, iac, rar, zero_tool, mtti_seconds) for one episode."""
    steps = len(episode.trajectory.steps)
    iac = sum(1 for s in episode.trajectory.steps if s.observation.status == "invalid")
    keys = agent_keys(episode.trajectory)
    seen: set[str] = set()
    redundant = 0
    for key in keys:
        if key in seen:
            redundant += 1
        seen.add(key)
    rar = redundant / steps if steps else 0.0
    zero_tool = not keys
    mtti = float(episode.ended_at - episode.started_at)
    return steps, iac, rar, zero_tool, mtti


def score_episode(episode: EpisodeRecord, truth: GroundTruth) -> EpisodeScore:
    keys = agent_keys(episode.trajectory)
    gold = truth.gold_keys()
    relevance, coverage = relevance_and_coverage(keys, gold)
    steps, iac, rar, zero_tool, mtti = operational_counters(episode)
    return EpisodeScore(
        case_id=episode.case_id,
        category=truth.true_diagnosis.stage.value,
        hit_at_1=accuracy_at_k(episode, truth, 1),
        hit_at_3=accuracy_at_k(episode, truth, 3),
        completed=episode.completed,
        exact=exact_match(keys, gold),
        in_order=in_order_match(keys, gold),
        any_order=any_order_match(keys, gold),
        relevance=relevance,
        coverage=coverage,
        steps=steps,
        iac=iac,
        mtti_seconds=mtti,
        rar=rar,
        zero_tool=zero_tool,
    )


@dataclass(frozen=True)
class SuiteReport:
    agent_label: str
    scores: tuple[EpisodeScore, ...]
    aggregates: Mapping[str, Optional[float]]
    by_category: Mapping[str, Mapping[str, Optional[float]]]

    def to_dict(self) -> dict:
        return {
            "agent_label": self.agent_label,
            "cases": [s.to_dict() for s in self.scores],
            "aggregates": dict(self.aggregates),
            "by_category": {k: dict(v) for k, v in sorted(self.by_category.items())},
        }


def _mean(values: Sequence[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def _aggregate(scores: Sequence[EpisodeScore]) -> dict[str, Optional[float]]:
    defined_relevance = [s.relevance for s in scores if s.relevance is not None]
    return {
        "A@1": _mean([float(s.hit_at_1) for s in scores]),
        "A@3": _mean([float(s.hit_at_3) for s in scores]),
        "TCR": _mean([float(s.completed) for s in scores]),
        "Exact": _mean([float(s.exact) for s in scores]),
        "InO.": _mean([float(s.in_order) for s in scores]),
        "AnyO.": _mean([float(s.any_order) for s in scores]),
        "Rel.": _mean(defined_relevance),
        "Cov.": _mean([s.coverage for s in scores]),
        "Steps": _mean([float(s.steps) for s in scores]),
        "IAC": _mean([float(s.iac) for s in scores]),
        "MTTI": _mean([s.mtti_seconds for s in scores]),
        "RAR": _mean([s.rar for s in scores]),
        "ZTDR": _mean([float(s.zero_tool) for s in scores]),
    }


def score_suite(
    episodes: Sequence[EpisodeRecord],
    truths: Mapping[str, GroundTruth],
    agent_label: str = "",
) -> SuiteReport:
    for episode in episodes:
        if episode.case_id not in truths:
            raise ValidationError(f"episode {episode.case_id!r} has no matching case")
    ordered = sorted(episodes, key=lambda e: e.case_id)
    scores = tuple(score_episode(e, truths[e.case_id]) for e in ordered)
    by_category: dict[str, dict[str, Optional[float]]] = {}
    for category in sorted({s.category for s in scores}):
        by_category[category] = _aggregate([s for s in scores if s.category == category])
    label = agent_label or (ordered[0].agent_label if ordered else "")
    return SuiteReport(
        agent_label=label,
        scores=scores,
        aggregates=_aggregate(scores),
        by_category=by_category,
    )


def _format_cell(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def render_report_md(report: SuiteReport) -> str:
    lines = [
        "# Diagnostic suite report",
        "",
        f"Agent: `{report.agent_label or 'unknown'}`  |  Cases: {len(report.scores)}",
        "",
        "| Scope | " + " | ".join(AGGREGATE_COLUMNS) + " |",
        "|" + "---|" * (len(AGGREGATE_COLUMNS) + 1),
    ]

    def row(scope: str, values: Mapping[str, Optional[float]]) -> str:
        cells = " | ".join(_format_cell(values.get(col)) for col in AGGREGATE_COLUMNS)
        return f"| {scope} | {cells} |"

    lines.append(row("Overall", report.aggregates))
    for category, values in sorted(report.by_category.items()):
        lines.append(row(category, values))
    lines.append("")
    return "\n".join(lines)


def save_report(report: SuiteReport, json_path, md_path=None) -> None:
    write_canonical(json_path, report.to_dict())
    if md_path is not None:
        from pathlib import Path

        Path(md_path).write_text(render_report_md(report), encoding="utf-8")
