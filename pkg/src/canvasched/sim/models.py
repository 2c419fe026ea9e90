"""Latency, detector and motion models used by the episode runner."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..accuracy import AccuracyProfile, lookup
from ..core import HorizonConfig, Rect, ResourceModel
from ..tracking import MotionEstimate

FULL_FRAME_PIXELS = 1920 * 1280


@dataclass(frozen=True)
class LatencyModel:
    """Inference time in seconds.

    A canvas of ``a`` pixels² takes ``c0_time + time_rate * a``.  A batch of
    ``n`` crops pays ``c0_time`` once plus ``batch_slope`` seconds per crop
    on top of the pixel term.  Defaults put a 1920x1280 frame at 0.419 s.
    """

    c0_time: float = 0.02
    time_rate: float = (0.419 - 0.02) / FULL_FRAME_PIXELS
    batch_slope: float = 0.0
    frame_pixels: float = FULL_FRAME_PIXELS

    def __post_init__(self):
        if min(self.c0_time, self.time_rate, self.batch_slope) < 0:
            raise ValueError("latency coefficients must be >= 0")
        if self.time_rate == 0:
            raise ValueError("time_rate must be > 0")

    @property
    def full_frame(self) -> float:
        return self.c0_time + self.time_rate * self.frame_pixels

    def canvas(self, pixels: float) -> float:
        return self.c0_time + self.time_rate * pixels

    def batch(self, n: int, pixels: float) -> float:
        return self.c0_time + self.batch_slope * n + self.time_rate * pixels

    def units(self, seconds: float) -> float:
        """Compute units (pixels² of native work) that fit in ``seconds``."""
        return seconds / self.time_rate

    def seconds(self, units: float) -> float:
        return units * self.time_rate


def resource_model(lat: LatencyModel, cfg: HorizonConfig, budget_scale: float = 1.0
                   ) -> ResourceModel:
    """Budget that fills the partial frames of a horizon with inference time."""
    budget = budget_scale * lat.units(cfg.partial_frames * cfg.frame_period)
    return ResourceModel(budget=budget, fixed_overhead=lat.units(lat.c0_time),
                         frame_volume=lat.frame_pixels, batch_latency_slope=lat.batch_slope)


@dataclass
class DetectorModel:
    """Stochastic detector: an object is found with probability ``A[S, r]``.

    ``threshold`` switches to the deterministic rule ``A >= threshold``.
    """

    profile: AccuracyProfile
    rng: np.random.Generator
    threshold: float | None = None

    def accuracy(self, size: float, ratio: float) -> float:
        return lookup(self.profile, size, ratio)

    def detects(self, size: float, ratio: float) -> tuple[bool, float]:
        a = self.accuracy(size, ratio)
        if self.threshold is not None:
            return a >= self.threshold, a
        return bool(self.rng.random() < a), a


@dataclass
class MotionOracle:
    """Displacement samples over a region, standing in for optical flow.

    The region is sampled on a ``grid x grid`` lattice.  Cells inside the
    object's previous box carry its true displacement, the rest carry zero
    (static background).  Every sample gets uniform ``+-noise`` pixels per
    axis, and all samples of one region share a normal ``bias`` drift.
    """

    rng: np.random.Generator
    noise: float = 2.0
    bias: float = 0.0
    grid: int = 4

    def sample(self, region: Rect, prev_box: Rect | None, dx: float, dy: float
               ) -> MotionEstimate:
        g = self.grid
        xs = region.x_min + (np.arange(g) + 0.5) * region.width / g
        ys = region.y_min + (np.arange(g) + 0.5) * region.height / g
        cx, cy = np.meshgrid(xs, ys)
        if prev_box is None:
            inside = np.zeros(cx.shape, dtype=bool)
        else:
            inside = ((cx >= prev_box.x_min) & (cx <= prev_box.x_max)
                      & (cy >= prev_box.y_min) & (cy <= prev_box.y_max))
        mx = np.where(inside, dx, 0.0).ravel()
        my = np.where(inside, dy, 0.0).ravel()
        if self.noise > 0:
            mx = mx + self.rng.uniform(-self.noise, self.noise, mx.size)
            my = my + self.rng.uniform(-self.noise, self.noise, my.size)
        if self.bias > 0:
            bx, by = self.rng.normal(0.0, self.bias, 2)
            mx, my = mx + bx, my + by
        return MotionEstimate(tuple(mx.tolist()), tuple(my.tolist()))


def to_canvas(box: Rect, crop: Rect, slot: Rect, rotated: bool = False) -> Rect:
    """Map a frame-coordinate box through the crop-resize-place transform."""
    sx = (slot.height if rotated else slot.width) / crop.width
    sy = (slot.width if rotated else slot.height) / crop.height
    x0, y0 = (box.x_min - crop.x_min) * sx, (box.y_min - crop.y_min) * sy
    x1, y1 = (box.x_max - crop.x_min) * sx, (box.y_max - crop.y_min) * sy
    if rotated:
        # quarter turn: crop x runs down the slot, crop y runs right to left
        return Rect(slot.x_max - y1, slot.y_min + x0, slot.x_max - y0, slot.y_min + x1)
    return Rect(slot.x_min + x0, slot.y_min + y0, slot.x_min + x1, slot.y_min + y1)


def from_canvas(box: Rect, crop: Rect, slot: Rect, rotated: bool = False) -> Rect:
    """Inverse of ``to_canvas``."""
    sx = (slot.height if rotated else slot.width) / crop.width
    sy = (slot.width if rotated else slot.height) / crop.height
    if rotated:
        x0, x1 = box.y_min - slot.y_min, box.y_max - slot.y_min
        y0, y1 = slot.x_max - box.x_max, slot.x_max - box.x_min
    else:
        x0, x1 = box.x_min - slot.x_min, box.x_max - slot.x_min
        y0, y1 = box.y_min - slot.y_min, box.y_max - slot.y_min
    return Rect(crop.x_min + x0 / sx, crop.y_min + y0 / sy,
                crop.x_min + x1 / sx, crop.y_min + y1 / sy)
