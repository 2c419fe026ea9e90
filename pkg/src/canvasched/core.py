"""Geometry and configuration types shared across the scheduler and simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass


class ConfigError(ValueError):
    """Raised when a configuration value breaks its invariants."""


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box ``[x_min, y_min, x_max, y_max]`` in pixels."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"inverted rect {self!r}")

    @classmethod
    def from_size(cls, x: float, y: float, w: float, h: float) -> "Rect":
        return cls(x, y, x + w, y + h)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2

    def translate(self, dx: float, dy: float) -> "Rect":
        return Rect(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)

    def intersection(self, other: "Rect") -> float:
        w = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        h = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        if w <= 0 or h <= 0:
            return 0.0
        return w * h

    def contains(self, other: "Rect") -> bool:
        return (self.x_min <= other.x_min and self.y_min <= other.y_min
                and other.x_max <= self.x_max and other.y_max <= self.y_max)

    def clip(self, width: float, height: float) -> "Rect":
        """Clamp to the frame ``[0, width] x [0, height]``."""
        x0 = min(max(self.x_min, 0.0), width)
        y0 = min(max(self.y_min, 0.0), height)
        x1 = min(max(self.x_max, x0), width)
        y1 = min(max(self.y_max, y0), height)
        return Rect(x0, y0, x1, y1)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def iou(a: Rect, b: Rect) -> float:
    inter = a.intersection(b)
    if inter <= 0:
        return 0.0
    union = a.area + b.area - inter
    return inter / union


def ceil_to(value: float, q: int) -> int:
    """Round ``value`` up to the next multiple of ``q``; exact for integral input."""
    return int(math.ceil(value / q - 1e-12)) * q


def quantize(r: Rect, q: int = 8) -> Rect:
    """Round each side up to a multiple of ``q``, keeping the top-left corner."""
    if q < 1:
        raise ValueError("quantum must be >= 1")
    return Rect.from_size(r.x_min, r.y_min, ceil_to(r.width, q), ceil_to(r.height, q))


@dataclass(frozen=True)
class HorizonConfig:
    horizon_len: int = 10
    frame_period: float = 0.1
    min_frequency: int = 1
    quantum: int = 8

    def __post_init__(self):
        if self.horizon_len < 2:
            raise ConfigError("horizon_len must be >= 2")
        if self.frame_period <= 0:
            raise ConfigError("frame_period must be > 0")
        if not 1 <= self.min_frequency <= self.horizon_len - 1:
            raise ConfigError("min_frequency must lie in [1, horizon_len - 1]")
        if self.quantum < 1:
            raise ConfigError("quantum must be >= 1")

    @property
    def partial_frames(self) -> int:
        return self.horizon_len - 1


@dataclass(frozen=True)
class ResourceModel:
    """Compute budget per horizon and the cost of one canvas.

    One compute unit is the work of processing one pixel² at native
    resolution, so ``area_cost_rate`` is 1.0 unless a model wants otherwise.
    ``budget`` covers the ``H_l - 1`` partial frames of a horizon; the
    keyframe's full inspection is accounted separately.
    """

    budget: float
    fixed_overhead: float = 0.0
    area_cost_rate: float = 1.0
    frame_volume: float = 1920 * 1280
    accel_capacity: float = 0.0
    batch_latency_slope: float = 0.0

    def __post_init__(self):
        if self.budget <= 0:
            raise ConfigError("budget must be > 0")
        if self.fixed_overhead < 0 or self.area_cost_rate < 0:
            raise ConfigError("cost coefficients must be >= 0")
        if self.accel_capacity >= self.frame_volume:
            raise ConfigError("accel_capacity must be below frame_volume")

    def canvas_cost(self, canvas_area: float) -> float:
        return self.fixed_overhead + self.area_cost_rate * canvas_area

    def canvas_count(self, canvas_area: float) -> int:
        # floor with a tolerance so that exact ratios are not lost to rounding
        return int(math.floor(self.budget / self.canvas_cost(canvas_area) + 1e-9))

    def batch_item_cost(self, horizon: HorizonConfig) -> float:
        """Per-item batching cost in compute units.

        ``batch_latency_slope`` is seconds per batched item; it is converted
        at the rate the budget is spent, i.e. ``budget`` units over the
        ``(H_l - 1) * P`` seconds of partial frames.
        """
        units_per_second = self.budget / (horizon.partial_frames * horizon.frame_period)
        return self.batch_latency_slope * units_per_second


@dataclass(frozen=True)
class ResizePolicy:
    factors: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    acc_min: float = 0.0
    acc_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(float(f) for f in self.factors))
        if not self.factors:
            raise ConfigError("at least one resize factor is required")
        if any(not 0 < f <= 1 for f in self.factors):
            raise ConfigError("resize factors must lie in (0, 1]")
        if any(b <= a for a, b in zip(self.factors, self.factors[1:])):
            raise ConfigError("resize factors must be strictly increasing")
        if not 0 <= self.acc_min <= self.acc_max <= 1:
            raise ConfigError("need 0 <= acc_min <= acc_max <= 1")

