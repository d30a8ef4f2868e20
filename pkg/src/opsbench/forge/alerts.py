"""Threshold alert detection over a snapshot's metric series."""

from __future__ import annotations

from typing import Mapping

from ..model import Snapshot


def detect_alerts(snapshot: Snapshot, thresholds: Mapping[str, float]) -> Snapshot:
    """Re-emit the snapshot with its alert list computed from thresholds.

    A series alerts when any sample strictly exceeds its metric's threshold;
    the alert reports the peak crossing sample.  Equality is not a crossing.
    """
    alerts = []
    for (entity, metric), series in sorted(snapshot.telemetry.metrics.items()):
        threshold = thresholds.get(metric)
        if threshold is None:
            continue
        crossing = [(ts, value) for ts, value in series.samples if value > threshold]
        if not crossing:
            continue
        peak_value = max(value for _, value in crossing)
        peak_ts = next(ts for ts, value in crossing if value == peak_value)
        alerts.append(
            {
                "metric_name": metric,
                "entity": entity,
                "threshold": float(threshold),
                "observed": peak_value,
                "deviation": (peak_value - threshold) / abs(threshold),
                "timestamp": peak_ts,
            }
        )
    alerts.sort(key=lambda a: (a["timestamp"], a["entity"], a["metric_name"]))
    draft = snapshot.to_dict()
    draft["telemetry"]["alerts"] = alerts
    return Snapshot.from_dict(draft, path="detect_alerts")
