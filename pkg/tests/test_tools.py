import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opsbench.errors import ContractError
from opsbench.tools import (
    CATALOG,
    ToolInvocation,
    canonical_key,
    decode_key,
    dispatch,
    sweep,
    validate,
)

# --- validation ---------------------------------------------------------------


def test_invented_parameter_is_rejected():
    failure = validate(CATALOG, ToolInvocation("GetAlerts", {"filter": "cpu"}))
    assert failure is not None and failure.reason == "unknown_param"


def test_missing_required_parameter():
    failure = validate(CATALOG, ToolInvocation("GetRecentLogs", {"service_name": "x"}))
    assert failure is not None and failure.reason == "missing_param"


def test_conforming_call_passes():
    inv = ToolInvocation("GetResources", {"resource_type": "pods", "namespace": "boutique"})
    assert validate(CATALOG, inv) is None


def test_unknown_tool_and_wrong_type():
    assert validate(CATALOG, ToolInvocation("GetMetrics", {})).reason == "unknown_tool"
    bad_port = ToolInvocation(
        "CheckServiceConnectivity",
        {"namespace": "b", "service_name": "s", "port": "7070"},
    )
    assert validate(CATALOG, bad_port).reason == "wrong_type"


def test_zero_param_tools_have_no_params():
    by_id = {spec.tool_id: spec for spec in CATALOG}
    assert by_id["T7"].params == ()
    assert by_id["T8"].params == ()


# --- canonical keys -------------------------------------------------------------


def test_key_is_order_invariant():
    a = ToolInvocation("GetResources", {"namespace": "boutique", "resource_type": "pods"})
    b = ToolInvocation("GetResources", {"resource_type": "pods", "namespace": "boutique"})
    assert canonical_key(CATALOG, a) == canonical_key(CATALOG, b)


def test_key_exact_form():
    inv = ToolInvocation(
        "GetRecentLogs", {"service_name": "cartservice", "namespace": "boutique"}
    )
    assert (
        canonical_key(CATALOG, inv)
        == "GetRecentLogs?namespace=boutique&service_name=cartservice"
    )


def test_key_trims_and_distinguishes_names():
    padded = ToolInvocation(
        "GetRecentLogs", {"service_name": " cartservice ", "namespace": "boutique"}
    )
    plain = ToolInvocation(
        "GetRecentLogs", {"service_name": "cartservice", "namespace": "boutique"}
    )
    assert canonical_key(CATALOG, padded) == canonical_key(CATALOG, plain)
    one = ToolInvocation(
        "GetResources",
        {"resource_type": "pods", "namespace": "b", "resource_name": "pod-a"},
    )
    two = ToolInvocation(
        "GetResources",
        {"resource_type": "pods", "namespace": "b", "resource_name": "pod-b"},
    )
    assert canonical_key(CATALOG, one) != canonical_key(CATALOG, two)


def test_key_requires_valid_invocation():
    with pytest.raises(ContractError):
        canonical_key(CATALOG, ToolInvocation("GetAlerts", {"filter": "x"}))


_tool_strategy = st.sampled_from([s for s in CATALOG])


@st.composite
def valid_invocations(draw):
    spec = draw(_tool_strategy)
    args = {}
    for param in spec.params:
        include = param.required or draw(st.booleans())
        if not include:
            continue
        if param.type == "integer":
            args[param.name] = draw(st.integers(min_value=0, max_value=70000))
        else:
            args[param.name] = draw(
                st.text(
                    alphabet="abcdefghijklmnopqrstuvwxyz0123456789-./=& ",
                    min_size=1,
                    max_size=12,
                )
            )
    return ToolInvocation(spec.name, args)


@given(valid_invocations())
@settings(max_examples=200, deadline=None)
def test_decode_inverts_encode(inv):
    key = canonical_key(CATALOG, inv)
    decoded = decode_key(CATALOG, key)
    assert canonical_key(CATALOG, decoded) == key


@given(valid_invocations(), valid_invocations())
@settings(max_examples=200, deadline=None)
def test_key_injective_over_effective_args(a, b):
    def effective(inv):
        spec = next(s for s in CATALOG if s.name == inv.tool_name)
        out = {}
        for k, v in inv.args.items():
            v = v.strip() if isinstance(v, str) else v
            param = spec.param(k)
            if param is not None and not param.required and v == param.default:
                continue
            out[k] = v
        return (inv.tool_name, tuple(sorted(out.items())))

    if effective(a) == effective(b):
        assert canonical_key(CATALOG, a) == canonical_key(CATALOG, b)
    else:
        assert canonical_key(CATALOG, a) != canonical_key(CATALOG, b)


# --- dispatch semantics -----------------------------------------------------------


def test_describe_pending_pod_shows_scheduling_failure(taint_bundle, taint_snapshot):
    symptom_key = taint_bundle.ground_truth.gold_trajectory[0].key
    observation = dispatch(taint_snapshot, decode_key(CATALOG, symptom_key))
    assert observation.status == "ok"
    assert observation.body["status"]["phase"] == "Pending"
    warnings = [e for e in observation.body["events"] if e["type"] == "Warning"]
    assert any(e["reason"] == "FailedScheduling" for e in warnings)


def test_cluster_configuration_shows_taint(taint_snapshot):
    observation = dispatch(taint_snapshot, ToolInvocation("GetClusterConfiguration", {}))
    taints = {
        t["key"]: node["name"]
        for node in observation.body["nodes"]
        for t in node["taints"]
    }
    assert taints.get("maintenance") == "node-2"


def test_missing_namespace_is_not_found(base_snapshot):
    observation = dispatch(
        base_snapshot,
        ToolInvocation("GetResources", {"resource_type": "pods", "namespace": "nope"}),
    )
    assert observation.status == "not_found"
    assert observation.error_message == 'Error from server (NotFound): namespaces "nope" not found'


def test_missing_pod_is_not_found_cli_style(base_snapshot):
    observation = dispatch(
        base_snapshot,
        ToolInvocation(
            "DescribeResource",
            {"resource_type": "pods", "resource_name": "x", "namespace": "boutique"},
        ),
    )
    assert observation.status == "not_found"
    assert observation.error_message == 'Error from server (NotFound): pods "x" not found'


def test_alerts_empty_on_healthy_base(base_snapshot):
    observation = dispatch(base_snapshot, ToolInvocation("GetAlerts", {}))
    assert observation.status == "ok"
    assert observation.body == {"alerts": []}


def test_dispatch_is_pure(taint_snapshot):
    inv = ToolInvocation("GetResources", {"resource_type": "pods", "namespace": "boutique"})
    assert dispatch(taint_snapshot, inv) == dispatch(taint_snapshot, inv)


def test_recent_logs_capped_at_fifty(base_snapshot):
    observation = dispatch(
        base_snapshot,
        ToolInvocation("GetRecentLogs", {"service_name": "frontend", "namespace": "boutique"}),
    )
    assert observation.status == "ok"
    assert len(observation.body["lines"]) <= 50


def test_error_log_summary_counts_patterns(suite_dir):
    from opsbench.model import load_snapshot

    snapshot = load_snapshot(suite_dir / "route-selector-001-s7" / "snapshot.json")
    observation = dispatch(
        snapshot,
        ToolInvocation("GetErrorLogs", {"service_name": "frontend", "namespace": "boutique"}),
    )
    assert observation.body["total_matches"] >= 2
    top = observation.body["patterns"][0]
    assert top["count"] >= 1 and "example" in top


def test_connectivity_healthy_and_broken(base_snapshot, suite_dir):
    from opsbench.model import load_snapshot

    inv = ToolInvocation(
        "CheckServiceConnectivity",
        {"namespace": "boutique", "service_name": "cartservice", "port": 7070},
    )
    assert dispatch(base_snapshot, inv).body["success"] is True
    broken = load_snapshot(suite_dir / "route-selector-001-s7" / "snapshot.json")
    result = dispatch(broken, inv)
    assert result.status == "ok" and result.body["success"] is False
    assert "no ready endpoints" in result.body["detail"]


def test_service_dependency_tree(base_snapshot):
    observation = dispatch(
        base_snapshot, ToolInvocation("GetServiceDependencies", {"service_name": "cartservice"})
    )
    assert observation.body == {
        "service": "cartservice",
        "dependencies": [{"service": "redis-cart", "dependencies": []}],
    }


def test_app_yaml_contains_image(base_snapshot):
    observation = dispatch(
        base_snapshot, ToolInvocation("GetAppYAML", {"service_name": "frontend"})
    )
    assert observation.status == "ok"
    assert "registry.local/boutique/frontend:v1.4.2" in observation.body


def test_node_component_probe(base_snapshot):
    ok = dispatch(
        base_snapshot,
        ToolInvocation(
            "CheckNodeServiceStatus", {"node_name": "node-1", "component_name": "kubelet"}
        ),
    )
    assert ok.body["process_state"] == "active"
    miss = dispatch(
        base_snapshot,
        ToolInvocation(
            "CheckNodeServiceStatus", {"node_name": "node-1", "component_name": "etcd"}
        ),
    )
    assert miss.status == "not_found"


# --- sweep ----------------------------------------------------------------------


def expected_sweep_count(snapshot) -> int:
    """Independent closed-form enumeration used to audit sweep()."""
    resources = snapshot.cluster.resources
    per_entity = 2 * len(resources)
    listings = len({(k, ns) for (k, ns, _) in resources})
    services = [resources[k] for k in resources if k[0] == "Service"]
    service_tools = 4 * len(services)
    ports = sum(len(s.spec.get("ports", [])) for s in services)
    globals_ = 2
    components = sum(len(n.components) for n in snapshot.cluster.nodes)
    return per_entity + listings + service_tools + ports + globals_ + components


def test_sweep_count_matches_enumeration(base_snapshot):
    cache = sweep(base_snapshot)
    assert len(cache) == expected_sweep_count(base_snapshot) == 151


def test_sweep_entries_match_dispatch(base_snapshot):
    cache = sweep(base_snapshot)
    for key, cached in cache.entries.items():
        assert dispatch(base_snapshot, decode_key(CATALOG, key)) == cached
