"""End-to-end case builds: baseline, fault, alerts, sweep, gold, lint, files.

``build_case`` is deterministic in (template, config, seed) up to byte
identity of the three written artifacts.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from ..cases import AlertNotice, CaseBundle, save_case
from ..errors import ForgeError, OpsBenchError
from ..model import save_snapshot
from ..tools import save_cache, sweep
from .alerts import detect_alerts
from .base import synthesize_base
from .config import BaseClusterConfig
from .invert import invert_ground_truth
from .lint import find_leaks
from .propagation import apply_fault
from .template import FaultTemplate, load_shipped_templates


def _staged(stage: str, func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except ForgeError:
        raise
    except OpsBenchError as exc:
        raise ForgeError(f"{stage}: {exc}") from exc


def build_case(
    template: FaultTemplate,
    config: Optional[BaseClusterConfig],
    seed: int,
    out_dir,
) -> CaseBundle:
    config = (config or BaseClusterConfig()).with_seed(seed)
    base = _staged("synthesize_base", synthesize_base, config)
    faulted = _staged("apply_fault", apply_fault, base, template, seed)
    faulted = _staged("detect_alerts", detect_alerts, faulted, config.thresholds)
    cache = _staged("sweep", sweep, faulted)
    truth = _staged(
        "invert_ground_truth", invert_ground_truth, template, faulted, base=base, seed=seed
    )

    case_id = faulted.case_meta.case_id
    alert = AlertNotice(
        title=template.alert_title,
        description=template.symptom_text,
        timestamp=faulted.freeze_time,
    )
    findings = find_leaks(faulted, cache, alert, truth)
    if findings:
        raise ForgeError("anti_leak_lint: " + "; ".join(findings))

    case_dir = Path(out_dir) / case_id
    case_dir.mkdir(parents=True, exist_ok=True)
    bundle = CaseBundle(
        case_id=case_id,
        snapshot_path="snapshot.json",
        alert=alert,
        ground_truth=truth,
        base_dir=case_dir,
    )
    _staged("write", save_snapshot, faulted, case_dir / "snapshot.json")
    _staged("write", save_case, bundle, case_dir / "case.json")
    _staged("write", save_cache, cache, case_dir / "cache.json")
    return bundle


def build_all(
    out_dir,
    config: Optional[BaseClusterConfig] = None,
    seed: int = 7,
    templates: Optional[list[FaultTemplate]] = None,
) -> list[CaseBundle]:
    bundles = []
    for template in templates if templates is not None else load_shipped_templates():
        bundles.append(build_case(template, config, seed, out_dir))
    return bundles
