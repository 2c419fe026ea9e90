"""Track maintenance between inspections.

Boxes are moved by the median of the displacement samples inside them, and a
conservative candidate region is grown by the sample extrema.  Detections are
attached to tracks with a Hungarian assignment on ``1 - IoU``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Rect, iou


class EmptyMotion(ValueError):
    pass


class DegenerateTrack(ValueError):
    pass


class ZeroAccuracy(ValueError):
    pass


@dataclass(frozen=True)
class MotionEstimate:
    """Per-pixel displacement samples drawn from a region between two frames."""

    dx_samples: tuple[float, ...]
    dy_samples: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "dx_samples", tuple(self.dx_samples))
        object.__setattr__(self, "dy_samples", tuple(self.dy_samples))
        if len(self.dx_samples) != len(self.dy_samples):
            raise ValueError("dx and dy sample counts differ")

    @classmethod
    def uniform(cls, dx: float, dy: float, n: int = 1) -> "MotionEstimate":
        return cls((dx,) * n, (dy,) * n)

    def __bool__(self) -> bool:
        return len(self.dx_samples) > 0

    def _require(self):
        if not self:
            raise EmptyMotion("motion estimate has no samples")


@dataclass
class TrackedObject:
    id: Hashable
    box: Rect
    expanded: Rect
    size: float
    importance: float = 1.0
    growth: float = 0.0
    last_inspect: float = 0.0
    last_accuracy: float = 1.0
    cls: str = ""
    # simulator bookkeeping: ground-truth id this track follows, keyframe box
    # area and the area of the first partial-frame candidate region
    gt_id: Hashable | None = None
    full_size: float = 0.0
    ecr_size: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def weight(self) -> float:
        return self.importance * self.growth


@dataclass(frozen=True)
class ExpansionRecord:
    ecr_area: float
    full_area: float
    full_latency: float


def predict_box(b: Rect, m: MotionEstimate) -> Rect:
    """Translate ``b`` by the median flow vector."""
    m._require()
    return b.translate(float(np.median(m.dx_samples)), float(np.median(m.dy_samples)))


def expand_region(region: Rect, m: MotionEstimate) -> Rect:
    m._require()
    return Rect(region.x_min + min(m.dx_samples), region.y_min + min(m.dy_samples),
                region.x_max + max(m.dx_samples), region.y_max + max(m.dy_samples))


def iou_matrix(a: Sequence[Rect], b: Sequence[Rect]) -> np.ndarray:
    out = np.zeros((len(a), len(b)))
    for i, ra in enumerate(a):
        for j, rb in enumerate(b):
            out[i, j] = iou(ra, rb)
    return out


def associate(tracks: Sequence[Rect], detections: Sequence[Rect],
              iou_floor: float = 0.5) -> dict[int, int]:
    """Match tracks to detections, returning ``{track_index: detection_index}``.

    Pairs below ``iou_floor`` are inadmissible.  Among admissible pairs the
    matching has maximum cardinality and, subject to that, minimum total
    ``1 - IoU``.  Inadmissible pairs get a cost larger than any admissible
    matching so the solver only uses them when nothing else is left, and
    they are stripped afterwards.
    """
    if not 0 <= iou_floor <= 1:
        raise ValueError("iou_floor must lie in [0, 1]")
    if not tracks or not detections:
        return {}
    ious = iou_matrix(tracks, detections)
    allowed = ious >= iou_floor
    if not allowed.any():
        return {}
    big = 2.0 * (min(len(tracks), len(detections)) + 1)
    cost = np.where(allowed, 1.0 - ious, big)
    rows, cols = linear_sum_assignment(cost)
    return {int(r): int(c) for r, c in zip(rows, cols) if allowed[r, c]}


def growth_rate(e: ExpansionRecord) -> float:
    """``sqrt(S_ECR / S_f) / t_f`` in 1/seconds."""
    if e.full_area <= 0 or e.full_latency <= 0:
        raise DegenerateTrack("full-inspection area and latency must be positive")
    return math.sqrt(e.ecr_area / e.full_area) / e.full_latency


def uncertainty(o: TrackedObject, t: float) -> float:
    if o.last_accuracy <= 0:
        raise ZeroAccuracy(f"track {o.id} has zero accuracy")
    if t < o.last_inspect:
        raise ValueError("time precedes last inspection")
    return o.weight * (t - o.last_inspect) / o.last_accuracy
