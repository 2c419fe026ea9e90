"""Episode metrics: detection recall/precision at IoU 0.5, uncertainty and latency."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..tracking import associate
from .episode import EpisodeResult
from .trace import Trace

# box width (pixels) above which an object counts as close, hence critical
DEFAULT_CRITICAL_WIDTH = {"vehicle": 120.0, "cyclist": 60.0, "pedestrian": 40.0}
FALLBACK_CRITICAL_WIDTH = 80.0

METRIC_COLUMNS = ("dr", "dp", "critical_dr", "critical_dp", "weighted_recall", "max_u",
                  "mean_u", "latency_p50", "latency_p95", "latency_p99")


@dataclass(frozen=True)
class Metrics:
    dr: float
    dp: float
    critical_dr: float
    critical_dp: float
    weighted_recall: float
    max_u: float
    mean_u: float
    latency_p50: float
    latency_p95: float
    latency_p99: float

    def as_dict(self) -> dict:
        return asdict(self)


def _ratio(num: float, den: float, empty: float) -> float:
    return num / den if den > 0 else empty


def evaluate(r: EpisodeResult, t: Trace, criticality: dict[str, float] | None = None,
             iou_floor: float = 0.5) -> Metrics:
    """Score ``r`` against the ground truth in ``t``.

    Only frames present in both are scored, so passing the undropped trace
    scores stale predictions on dropped frames too.  Recall over an empty
    ground truth is 0 and precision over no predictions is 1.
    """
    thresholds = dict(DEFAULT_CRITICAL_WIDTH if criticality is None else criticality)

    def critical(cls: str, width: float) -> bool:
        return width > thresholds.get(cls, FALLBACK_CRITICAL_WIDTH)

    n_gt = n_pred = n_match = 0
    c_gt = c_match = c_pred = 0
    w_gt = w_match = 0.0
    for frame in t.frames:
        preds = r.predictions.get(frame.index)
        if preds is None:
            continue
        gts = frame.objects
        match = associate([p[1] for p in preds], [g.box for g in gts], iou_floor)
        hit = set(match.values())
        n_gt += len(gts)
        n_pred += len(preds)
        n_match += len(match)
        for j, g in enumerate(gts):
            w_gt += g.importance
            if j in hit:
                w_match += g.importance
            if critical(g.cls, g.box.width):
                c_gt += 1
                if j in hit:
                    c_match += 1
        for i, p in enumerate(preds):
            if i in match:
                if critical(gts[match[i]].cls, gts[match[i]].box.width):
                    c_pred += 1
            elif critical(p[2], p[1].width):
                c_pred += 1

    us = np.array([row.value for row in r.uncertainty], dtype=float)
    lat = np.array([s for _, kind, s in r.latencies if kind != "keyframe"], dtype=float)
    q = np.quantile(lat, [0.5, 0.95, 0.99]) if lat.size else np.zeros(3)
    return Metrics(
        dr=_ratio(n_match, n_gt, 0.0),
        dp=_ratio(n_match, n_pred, 1.0),
        critical_dr=_ratio(c_match, c_gt, 0.0),
        critical_dp=_ratio(c_match, c_pred, 1.0),
        weighted_recall=_ratio(w_match, w_gt, 0.0),
        max_u=float(us.max()) if us.size else 0.0,
        mean_u=float(us.mean()) if us.size else 0.0,
        latency_p50=float(q[0]), latency_p95=float(q[1]), latency_p99=float(q[2]))
