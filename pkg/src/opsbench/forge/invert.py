"""Rule-based inversion of a fault template into its gold annotation.

Each inversion rule resolves to exactly one concrete invocation key, so the
gold trajectory is minimal by construction: deleting any step leaves its
rule unsatisfied.  Inversion enforces answerability (every gold key must
dispatch ok against the faulted snapshot), symptom-before-verification
ordering, key distinctness, and, when the healthy baseline is supplied,
observability: at least one symptom observation must differ from the
baseline's answer to the same key.
"""

from __future__ import annotations

from typing import Optional

from ..cases import Diagnosis, GoldStep, GroundTruth
from ..errors import ForgeError, OpsBenchError
from ..model import Snapshot
from ..tools import CATALOG, ToolInvocation, canonical_key, dispatch, validate
from .resolve import Resolver
from .template import FaultTemplate


def invert_ground_truth(
    template: FaultTemplate,
    faulted: Snapshot,
    base: Optional[Snapshot] = None,
    seed: Optional[int] = None,
) -> GroundTruth:
    if seed is None:
        seed = faulted.case_meta.seed if faulted.case_meta is not None else 0
    resolver = Resolver(template.params, faulted.to_dict(), seed)

    gold: list[GoldStep] = []
    keys_seen: set[str] = set()
    symptom_differs = False
    for i, rule in enumerate(template.inversion_rule):
        label = f"invert[{template.template_id}:{i}]"
        try:
            args = resolver.deep(dict(rule.args))
        except OpsBenchError as exc:
            raise ForgeError(f"{label}: {exc}") from exc
        inv = ToolInvocation(rule.tool, args)
        failure = validate(CATALOG, inv)
        if failure is not None:
            raise ForgeError(f"{label}: rule resolves to invalid call: {failure.message}")
        key = canonical_key(CATALOG, inv)
        if key in keys_seen:
            raise ForgeError(f"{label}: duplicate gold key {key!r} breaks minimality")
        keys_seen.add(key)
        observation = dispatch(faulted, inv)
        if observation.status != "ok":
            raise ForgeError(
                f"{label}: gold key {key!r} not answerable (status {observation.status})"
            )
        if base is not None and rule.phase == "SymptomDiscovery":
            if dispatch(base, inv) != observation:
                symptom_differs = True
        gold.append(GoldStep(key=key, phase=rule.phase))

    if base is not None and not symptom_differs:
        raise ForgeError(
            f"invert[{template.template_id}]: no symptom to discover; every "
            "symptom-discovery observation equals the healthy baseline"
        )

    try:
        component = resolver.scalar(template.component)
    except OpsBenchError as exc:
        raise ForgeError(f"invert[{template.template_id}]: {exc}") from exc

    truth = GroundTruth(
        true_diagnosis=Diagnosis(
            stage=template.category,
            component=str(component).strip().lower(),
            root_cause=template.root_cause_type.value,
        ),
        aliases=template.aliases,
        gold_trajectory=tuple(gold),
    )
    truth.check_precedence(f"invert[{template.template_id}]")
    return truth
