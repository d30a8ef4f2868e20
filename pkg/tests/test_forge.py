import dataclasses

import pytest

from opsbench.errors import ForgeError, ValidationError
from opsbench.forge import (
    BaseClusterConfig,
    apply_fault,
    build_case,
    detect_alerts,
    invert_ground_truth,
    load_shipped_templates,
    synthesize_base,
)
from opsbench.forge.lint import find_leaks
from opsbench.forge.template import FaultTemplate, StateMutation
from opsbench.model import save_snapshot
from opsbench.taxonomy import CATEGORY_ROOT_CAUSES, FaultCategory
from opsbench.tools import CATALOG, ToolInvocation, decode_key, dispatch, sweep


def test_default_base_is_healthy(base_snapshot):
    cluster = base_snapshot.cluster
    assert len(cluster.nodes) == 4
    services = [k for k in cluster.resources if k[0] == "Service"]
    pods = [cluster.resources[k] for k in cluster.resources if k[0] == "Pod"]
    assert len(services) == 11 and len(pods) == 11
    assert all(p.status.phase == "Running" for p in pods)
    warnings = [
        e
        for key in cluster.resources
        for e in cluster.resources[key].events
        if e.type == "Warning"
    ]
    assert warnings == []
    assert base_snapshot.telemetry.alerts == ()
    checked = detect_alerts(base_snapshot, BaseClusterConfig().thresholds)
    assert checked.telemetry.alerts == ()


def test_base_is_deterministic(tmp_path):
    a = synthesize_base(BaseClusterConfig(seed=11))
    b = synthesize_base(BaseClusterConfig(seed=11))
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    save_snapshot(a, pa)
    save_snapshot(b, pb)
    assert pa.read_bytes() == pb.read_bytes()
    c = synthesize_base(BaseClusterConfig(seed=12))
    assert c != a


def test_zero_nodes_rejected():
    with pytest.raises(ValidationError, match="node_count"):
        synthesize_base(BaseClusterConfig(node_count=0))


def test_taint_fault_surfaces(base_snapshot, templates):
    faulted = apply_fault(base_snapshot, templates["sched-taint-001"], 7)
    pod = next(
        faulted.cluster.resources[k]
        for k in faulted.cluster.resources
        if k[0] == "Pod" and faulted.cluster.resources[k].labels.get("app") == "frontend"
    )
    assert pod.status.phase == "Pending"
    assert any(e.reason == "FailedScheduling" for e in pod.events)
    node_view = dispatch(faulted, ToolInvocation("GetClusterConfiguration", {}))
    assert any(
        t["key"] == "maintenance" for n in node_view.body["nodes"] for t in n["taints"]
    )


def test_image_fault_surfaces_in_listing_and_describe(base_snapshot, templates):
    faulted = apply_fault(base_snapshot, templates["startup-image-001"], 7)
    listing = dispatch(
        faulted,
        ToolInvocation("GetResources", {"resource_type": "pods", "namespace": "boutique"}),
    )
    rows = {item["name"]: item["status"] for item in listing.body["items"]}
    assert "ImagePullBackOff" in rows.values()
    pod_name = next(n for n, s in rows.items() if s == "ImagePullBackOff")
    describe = dispatch(
        faulted,
        ToolInvocation(
            "DescribeResource",
            {"resource_type": "pods", "resource_name": pod_name, "namespace": "boutique"},
        ),
    )
    assert any("Failed to pull image" in e["message"] for e in describe.body["events"])


def test_inapplicable_prerequisite_names_mutation(base_snapshot, templates):
    template = templates["sched-taint-001"]
    broken = dataclasses.replace(
        template,
        prerequisites=(
            StateMutation(op="add", target="pod:ghost-service", path="/spec/x", value=1),
            *template.prerequisites[1:],
        ),
    )
    with pytest.raises(ForgeError, match="P0"):
        apply_fault(base_snapshot, broken, 7)


def test_perf_template_raises_cpu_alert(base_snapshot, templates):
    faulted = apply_fault(base_snapshot, templates["perf-cpu-001"], 7)
    checked = detect_alerts(faulted, BaseClusterConfig().thresholds)
    cpu_alerts = [
        a
        for a in checked.telemetry.alerts
        if a.metric_name == "cpu_usage_millicores" and a.entity == "cartservice"
    ]
    assert cpu_alerts and all(a.deviation > 0 for a in cpu_alerts)


def test_alert_threshold_crossing_is_strict(base_snapshot):
    (entity, metric), series = sorted(base_snapshot.telemetry.metrics.items())[0]
    peak = max(v for _, v in series.samples)
    checked = detect_alerts(base_snapshot, {metric: peak})
    assert not any(
        a.entity == entity and a.metric_name == metric for a in checked.telemetry.alerts
    )
    checked = detect_alerts(base_snapshot, {metric: peak - 0.01})
    assert any(
        a.entity == entity and a.metric_name == metric for a in checked.telemetry.alerts
    )


def test_inversion_gold_shape(base_snapshot, templates):
    template = templates["sched-taint-001"]
    faulted = apply_fault(base_snapshot, template, 7)
    truth = invert_ground_truth(template, faulted, base=base_snapshot, seed=7)
    phases = [s.phase for s in truth.gold_trajectory]
    assert phases == ["SymptomDiscovery", "RootCauseVerification"]
    verify_key = truth.gold_trajectory[1].key
    observed = dispatch(faulted, decode_key(CATALOG, verify_key))
    assert any(
        t["key"] == "maintenance" for n in observed.body["nodes"] for t in n["taints"]
    )


def test_inverting_healthy_snapshot_fails(base_snapshot, templates):
    with pytest.raises(ForgeError, match="no symptom"):
        invert_ground_truth(
            templates["perf-cpu-001"], base_snapshot, base=base_snapshot, seed=7
        )


def test_precedence_holds_in_every_shipped_case(bundles):
    for bundle in bundles:
        phases = [s.phase for s in bundle.ground_truth.gold_trajectory]
        first_verify = phases.index("RootCauseVerification")
        assert all(p == "RootCauseVerification" for p in phases[first_verify:])


def test_build_case_is_byte_deterministic(templates, tmp_path):
    template = templates["route-selector-001"]
    d1, d2 = tmp_path / "one", tmp_path / "two"
    b1 = build_case(template, None, 3, d1)
    b2 = build_case(template, None, 3, d2)
    for name in ("snapshot.json", "case.json", "cache.json"):
        assert (d1 / b1.case_id / name).read_bytes() == (d2 / b2.case_id / name).read_bytes()


def test_shipped_set_spans_categories(templates):
    assert len(templates) >= 10
    categories = {t.category for t in templates.values()}
    assert len(categories) >= 5
    for template in templates.values():
        assert template.root_cause_type in CATEGORY_ROOT_CAUSES[template.category]


def test_gold_keys_distinct_and_answerable(bundles, suite_dir):
    from opsbench.model import load_snapshot

    for bundle in bundles:
        keys = bundle.ground_truth.gold_keys()
        assert len(set(keys)) == len(keys)
        snapshot = load_snapshot(suite_dir / bundle.case_id / "snapshot.json")
        for key in keys:
            assert dispatch(snapshot, decode_key(CATALOG, key)).status == "ok"


def test_symptom_observation_differs_from_base(bundles, suite_dir, base_snapshot):
    from opsbench.model import load_snapshot

    for bundle in bundles:
        snapshot = load_snapshot(suite_dir / bundle.case_id / "snapshot.json")
        symptoms = [
            s for s in bundle.ground_truth.gold_trajectory if s.phase == "SymptomDiscovery"
        ]
        assert any(
            dispatch(snapshot, decode_key(CATALOG, s.key))
            != dispatch(base_snapshot, decode_key(CATALOG, s.key))
            for s in symptoms
        )


def test_lint_catches_planted_identifier(base_snapshot, templates):
    template = templates["sched-taint-001"]
    faulted = apply_fault(base_snapshot, template, 7)
    faulted = detect_alerts(faulted, BaseClusterConfig().thresholds)
    cache = sweep(faulted)
    truth = invert_ground_truth(template, faulted, base=base_snapshot, seed=7)
    from opsbench.cases import AlertNotice

    clean_alert = AlertNotice("t", template.symptom_text, faulted.freeze_time)
    assert find_leaks(faulted, cache, clean_alert, truth) == []
    leaky_alert = AlertNotice(
        "t", template.symptom_text + " (TaintTolerationMismatch)", faulted.freeze_time
    )
    findings = find_leaks(faulted, cache, leaky_alert, truth)
    assert findings and any("alert" in f for f in findings)


def test_template_activation_must_cover_every_mutation(templates):
    template = templates["sched-taint-001"]
    data_ok = template.steps_in_order()
    assert [label for label, _ in data_ok] == list(template.activation)
    with pytest.raises(ValidationError, match="activation"):
        dataclasses.replace(template, activation=("A",)).validate()


def test_rejected_template_never_ships(base_snapshot, templates, tmp_path):
    """A gold rule that resolves to a missing entity fails the build."""
    template = templates["infra-kubelet-001"]
    bad_rule = dataclasses.replace(
        template.inversion_rule[1], args={"node_name": "node-9", "component_name": "kubelet"}
    )
    broken = dataclasses.replace(
        template, inversion_rule=(template.inversion_rule[0], bad_rule)
    )
    with pytest.raises(ForgeError, match="not answerable"):
        build_case(broken, None, 7, tmp_path)
    assert not (tmp_path / "infra-kubelet-001-s7" / "case.json").exists()
