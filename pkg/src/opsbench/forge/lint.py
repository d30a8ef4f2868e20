"""Leak lint: ground truth must not be readable from agent-visible bytes.

The agent-visible surface is the alert text plus everything the tools can
render, which the swept cache enumerates.  The snapshot file's cluster and
telemetry sections are scanned as well; the identity block is excluded
because no tool renders it (it exists so loaders can validate taxonomy
membership) and is additionally audited here to stay out of tool output.
"""

from __future__ import annotations

import dataclasses

from ..canonical import canonical_dumps
from ..cases import AlertNotice, GroundTruth
from ..model import Snapshot
from ..tools import ResponseCache


def find_leaks(
    snapshot: Snapshot,
    cache: ResponseCache,
    alert: AlertNotice,
    truth: GroundTruth,
) -> list[str]:
    findings: list[str] = []
    identifier = truth.true_diagnosis.root_cause.lower()

    masked = dataclasses.replace(snapshot, case_meta=None)
    if identifier in canonical_dumps(masked.to_dict()).lower():
        findings.append("snapshot state bytes contain the root cause identifier")

    alert_text = f"{alert.title}\n{alert.description}".lower()
    for term in (identifier, *truth.aliases.get("root_cause", ())):
        if term.lower() in alert_text:
            findings.append(f"alert text names the root cause ({term!r})")

    for key, observation in sorted(cache.entries.items()):
        rendered = canonical_dumps(observation.to_dict()).lower()
        if identifier in rendered:
            findings.append(f"tool output for {key!r} contains the root cause identifier")

    return findings
