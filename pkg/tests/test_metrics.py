"""Metric checks against independent brute-force oracles.

The oracles below recompute every alignment metric from first principles
(exhaustive mapping search, direct set arithmetic) and never share code
with the implementations they audit.
"""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opsbench.cases import (
    AlertNotice,
    Diagnosis,
    EpisodeRecord,
    GroundTruth,
    GoldStep,
    Step,
    Trajectory,
)
from opsbench.errors import ValidationError
from opsbench.metrics import (
    accuracy_at_k,
    agent_keys,
    any_order_match,
    exact_match,
    in_order_match,
    operational_counters,
    relevance_and_coverage,
    score_episode,
    score_suite,
)
from opsbench.taxonomy import FaultCategory
from opsbench.tools import Observation, ToolInvocation

# --- independent oracles -----------------------------------------------------


def oracle_in_order(agent, gold):
    """Exhaustive search over injective order-preserving index mappings."""
    if not gold:
        return True
    positions = [[i for i, a in enumerate(agent) if a == g] for g in gold]
    for combo in itertools.product(*positions):
        if all(b > a for a, b in zip(combo, combo[1:])):
            return True
    return False


def oracle_exact(agent, gold):
    return len(agent) == len(gold) and all(a == g for a, g in zip(agent, gold))


def oracle_any_order(agent, gold):
    return all(g in agent for g in gold)


def oracle_relevance_coverage(agent, gold):
    agent_set, gold_set = set(agent), set(gold)
    overlap = len(agent_set & gold_set)
    relevance = overlap / len(agent_set) if agent_set else None
    coverage = overlap / len(gold_set) if gold_set else 1.0
    return relevance, coverage


def oracle_redundant_count(keys):
    """Brute-force pairwise duplicate scan."""
    return sum(1 for i, k in enumerate(keys) if any(keys[j] == k for j in range(i)))


# --- examples (expected values computed by the oracles above) ------------------


def test_in_order_examples():
    assert oracle_in_order(["x", "g1", "y", "g2"], ["g1", "g2"]) is True
    assert in_order_match(["x", "g1", "y", "g2"], ["g1", "g2"]) is True
    assert oracle_in_order(["g2", "g1"], ["g1", "g2"]) is False
    assert in_order_match(["g2", "g1"], ["g1", "g2"]) is False
    assert in_order_match(["anything", "at", "all"], []) is True


def test_exact_examples():
    assert exact_match(["a", "b"], ["a", "b"])
    assert not exact_match(["a", "b", "c"], ["a", "b"])  # extra trailing step
    assert not exact_match(["b", "a"], ["a", "b"])  # same multiset, swapped


def test_any_order_examples():
    assert any_order_match(["c", "b", "a", "a"], ["a", "b"])
    assert not any_order_match(["a"], ["a", "b"])
    assert any_order_match(["a", "a", "b"], ["a", "b"])  # duplicates irrelevant


def test_relevance_coverage_examples():
    assert relevance_and_coverage(["a", "b", "c"], ["a", "d"]) == (1 / 3, 1 / 2)
    assert relevance_and_coverage(["a", "d"], ["a", "d"]) == (1.0, 1.0)
    assert relevance_and_coverage([], ["a", "d"]) == (None, 0.0)


KEYS = st.lists(st.sampled_from("abcde"), max_size=6)
GOLD = st.lists(st.sampled_from("abcde"), max_size=4)


@given(KEYS, GOLD)
@settings(max_examples=300, deadline=None)
def test_alignment_matches_oracles(agent, gold):
    assert exact_match(agent, gold) == oracle_exact(agent, gold)
    assert in_order_match(agent, gold) == oracle_in_order(agent, gold)
    assert any_order_match(agent, gold) == oracle_any_order(agent, gold)
    assert relevance_and_coverage(agent, gold) == oracle_relevance_coverage(agent, gold)


@given(KEYS, GOLD)
@settings(max_examples=300, deadline=None)
def test_implication_chain(agent, gold):
    exact = exact_match(agent, gold)
    in_order = in_order_match(agent, gold)
    any_order = any_order_match(agent, gold)
    assert not exact or in_order
    assert not in_order or any_order
    relevance, coverage = relevance_and_coverage(agent, gold)
    if relevance is not None:
        assert 0.0 <= relevance <= 1.0
    assert 0.0 <= coverage <= 1.0
    assert (coverage == 1.0) == any_order


# --- episode-level helpers ------------------------------------------------------

ALERT = AlertNotice(title="t", description="d", timestamp=100)
TRUTH = GroundTruth(
    true_diagnosis=Diagnosis(FaultCategory.SCHEDULING, "frontend", "TaintTolerationMismatch"),
    aliases={},
    gold_trajectory=(
        GoldStep("GetAlerts?", "SymptomDiscovery"),
        GoldStep("GetClusterConfiguration?", "RootCauseVerification"),
    ),
)


def _step(index, inv, status="ok"):
    observation = Observation(status=status, body={} if status == "ok" else None,
                              error_message=None if status == "ok" else "bad")
    return Step(index=index, action=inv, observation=observation, issued_at=100 + index)


def _episode(steps, final=(), completed=None, ended=None):
    return EpisodeRecord(
        case_id="case-x",
        alert=ALERT,
        trajectory=Trajectory(steps=tuple(steps)),
        final=tuple(final),
        completed=bool(final) if completed is None else completed,
        started_at=100,
        ended_at=ended if ended is not None else 100 + len(steps) + 1,
        agent_label="test",
    )


def test_agent_keys_drops_invalid_and_keeps_duplicates():
    steps = [
        _step(1, ToolInvocation("GetAlerts", {})),
        _step(2, ToolInvocation("GetAlerts", {"filter": "x"}), status="invalid"),
        _step(3, ToolInvocation("GetAlerts", {})),
        _step(4, ToolInvocation("GetClusterConfiguration", {})),
    ]
    keys = agent_keys(Trajectory(steps=tuple(steps)))
    assert keys == ["GetAlerts?", "GetAlerts?", "GetClusterConfiguration?"]
    assert agent_keys(Trajectory()) == []


def test_accuracy_rank_semantics(taint_bundle):
    truth = taint_bundle.ground_truth
    right = truth.true_diagnosis
    wrong = Diagnosis(FaultCategory.RUNTIME, "x", "y")
    hit_first = _episode([], final=[right])
    hit_second = _episode([], final=[wrong, right])
    empty = _episode([], final=[])
    assert accuracy_at_k(hit_first, truth, 1) and accuracy_at_k(hit_first, truth, 3)
    assert not accuracy_at_k(hit_second, truth, 1)
    assert accuracy_at_k(hit_second, truth, 3)
    assert not accuracy_at_k(empty, truth, 1) and not accuracy_at_k(empty, truth, 3)
    with pytest.raises(ValueError):
        accuracy_at_k(hit_first, truth, 2)


def test_operational_counters_redundancy():
    k1 = ToolInvocation("GetAlerts", {})
    k2 = ToolInvocation("GetClusterConfiguration", {})
    episode = _episode([_step(1, k1), _step(2, k1), _step(3, k2)])
    steps, iac, rar, zero_tool, mtti = operational_counters(episode)
    keys = agent_keys(episode.trajectory)
    assert (steps, iac, zero_tool) == (3, 0, False)
    assert rar == oracle_redundant_count(keys) / steps == 1 / 3
    assert mtti == 4.0


def test_operational_counters_invalid_only():
    bad = ToolInvocation("GetMetrics", {})  # unknown tool -> invalid observation
    episode = _episode(
        [_step(1, bad, status="invalid"), _step(2, bad, status="invalid")],
        final=[Diagnosis(FaultCategory.RUNTIME, "x", "y")],
    )
    steps, iac, rar, zero_tool, _ = operational_counters(episode)
    assert (steps, iac, zero_tool, rar) == (2, 2, True, 0.0)


def test_operational_counters_empty():
    episode = _episode([], final=[Diagnosis(FaultCategory.RUNTIME, "x", "y")])
    steps, iac, rar, zero_tool, mtti = operational_counters(episode)
    assert (steps, iac, rar, zero_tool) == (0, 0, 0.0, True)
    assert mtti >= 0.0


def test_gold_self_score(taint_bundle, taint_snapshot):
    """Scoring the gold trajectory against itself is a perfect episode."""
    truth = taint_bundle.ground_truth
    from opsbench.tools import CATALOG, decode_key, dispatch

    steps = [
        Step(
            index=i + 1,
            action=decode_key(CATALOG, gold.key),
            observation=dispatch(taint_snapshot, decode_key(CATALOG, gold.key)),
            issued_at=100 + i,
        )
        for i, gold in enumerate(truth.gold_trajectory)
    ]
    episode = _episode(steps, final=[truth.true_diagnosis])
    score = score_episode(episode, truth)
    assert score.exact and score.in_order and score.any_order
    assert score.relevance == 1.0 and score.coverage == 1.0
    assert score.rar == 0.0 and score.iac == 0 and not score.zero_tool


def test_suite_aggregation_means():
    right = TRUTH.true_diagnosis
    wrong = Diagnosis(FaultCategory.RUNTIME, "x", "y")
    episodes = [
        EpisodeRecord("case-a", ALERT, Trajectory(), (right,), True, 0, 5, "t"),
        EpisodeRecord("case-b", ALERT, Trajectory(), (wrong,), True, 0, 5, "t"),
    ]
    truths = {"case-a": TRUTH, "case-b": TRUTH}
    report = score_suite(episodes, truths)
    assert report.aggregates["A@1"] == 0.5
    assert [s.case_id for s in report.scores] == ["case-a", "case-b"]


def test_suite_tcr_with_incomplete_episode():
    episodes = [
        EpisodeRecord(f"case-{i}", ALERT, Trajectory(), (TRUTH.true_diagnosis,), True, 0, 1, "t")
        for i in range(3)
    ]
    episodes.append(EpisodeRecord("case-3", ALERT, Trajectory(), (), False, 0, 1, "t"))
    truths = {e.case_id: TRUTH for e in episodes}
    report = score_suite(episodes, truths)
    assert report.aggregates["TCR"] == 0.75


def test_suite_rejects_orphan_episode():
    episode = EpisodeRecord("orphan", ALERT, Trajectory(), (), False, 0, 1, "t")
    with pytest.raises(ValidationError, match="orphan"):
        score_suite([episode], {})


def test_scoring_is_reproducible(taint_bundle, taint_snapshot):
    from opsbench.harness import InProcessChannel, RunConfig, make_scripted_agent, run_episode

    record = run_episode(
        taint_bundle,
        InProcessChannel(make_scripted_agent("noisy", taint_bundle)),
        RunConfig(clock="virtual", agent_label="noisy"),
        snapshot=taint_snapshot,
    )
    truth = taint_bundle.ground_truth
    assert score_episode(record, truth) == score_episode(record, truth)
