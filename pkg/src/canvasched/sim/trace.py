"""Ground-truth traces: synthetic generation, CSV IO and frame dropping."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..core import Rect

TRACE_COLUMNS = ("frame", "id", "class", "x_min", "y_min", "x_max", "y_max", "importance")

DEFAULT_CLASSES = {"vehicle": 1.0, "cyclist": 2.0, "pedestrian": 3.0}


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    id: int
    cls: str
    box: Rect
    importance: float = 1.0


@dataclass
class Frame:
    index: int
    objects: list[GroundTruth] = field(default_factory=list)

    def by_id(self) -> dict[int, GroundTruth]:
        return {g.id: g for g in self.objects}


@dataclass
class Trace:
    """Frames on a fixed grid ``t = index * frame_period``.

    ``n_frames`` is the length of the grid; dropped frames simply have no
    record in ``frames``.
    """

    frame_period: float
    frames: list[Frame]
    width: float = 1920.0
    height: float = 1280.0
    n_frames: int | None = None

    def __post_init__(self):
        idx = [f.index for f in self.frames]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise TraceError("frames must be strictly time-ordered")
        if self.n_frames is None:
            self.n_frames = (idx[-1] + 1) if idx else 0
        elif idx and idx[-1] >= self.n_frames:
            raise TraceError("frame index beyond n_frames")

    def indices(self) -> list[int]:
        return [f.index for f in self.frames]

    def frame_map(self) -> dict[int, Frame]:
        return {f.index: f for f in self.frames}


def generate_trace(n_objects: int = 20, n_frames: int = 100, frame_period: float = 0.1,
                   seed: int = 0, width: float = 1920.0, height: float = 1280.0,
                   speed: tuple[float, float] = (0.0, 150.0),
                   size: tuple[float, float] = (24.0, 240.0),
                   spawn_rate: float = 0.0, despawn_rate: float = 0.0,
                   jitter: float = 10.0,
                   classes: dict[str, float] | None = None) -> Trace:
    """Constant-velocity tracks with velocity jitter, reflected at the frame edges.

    ``speed`` and ``jitter`` are in pixels per second; ``spawn_rate`` is the
    expected number of new objects per frame and ``despawn_rate`` the
    per-frame probability that an object leaves.
    """
    if n_objects < 0 or n_frames < 0:
        raise ValueError("counts must be >= 0")
    classes = dict(classes or DEFAULT_CLASSES)
    names = sorted(classes)
    rng = np.random.default_rng(seed)
    P = frame_period
    next_id = 0
    live: list[dict] = []

    def spawn():
        nonlocal next_id
        side = rng.uniform(*size)
        aspect = rng.uniform(0.5, 2.0)
        w = min(side * math.sqrt(aspect), width)
        h = min(side / math.sqrt(aspect), height)
        cls = names[int(rng.integers(len(names)))]
        ang = rng.uniform(0, 2 * math.pi)
        spd = rng.uniform(*speed)
        live.append({"id": next_id, "cls": cls, "w": w, "h": h,
                     "x": rng.uniform(0, width - w), "y": rng.uniform(0, height - h),
                     "vx": spd * math.cos(ang), "vy": spd * math.sin(ang)})
        next_id += 1

    for _ in range(n_objects):
        spawn()
    frames = []
    for k in range(n_frames):
        if k > 0:
            for o in live:
                if jitter > 0:
                    o["vx"] += rng.normal(0, jitter)
                    o["vy"] += rng.normal(0, jitter)
                o["x"] += o["vx"] * P
                o["y"] += o["vy"] * P
                for pos, vel, extent, dim in (("x", "vx", width, "w"), ("y", "vy", height, "h")):
                    lo, hi = 0.0, extent - o[dim]
                    if o[pos] < lo:
                        o[pos], o[vel] = 2 * lo - o[pos], -o[vel]
                    if o[pos] > hi:
                        o[pos], o[vel] = 2 * hi - o[pos], -o[vel]
                    o[pos] = min(max(o[pos], lo), hi)
            if despawn_rate > 0:
                live[:] = [o for o in live if rng.random() >= despawn_rate]
            if spawn_rate > 0:
                for _ in range(int(rng.poisson(spawn_rate))):
                    spawn()
        frames.append(Frame(k, [
            GroundTruth(o["id"], o["cls"],
                        Rect(o["x"], o["y"], o["x"] + o["w"], o["y"] + o["h"]),
                        classes[o["cls"]])
            for o in live]))
    return Trace(P, frames, width, height, n_frames)


def drop_frames(t: Trace, ratio: float, seed: int, window: int = 10) -> Trace:
    """Remove ``floor(ratio * window)`` random frames from each window of the grid."""
    if not 0 <= ratio <= 1:
        raise ValueError("drop ratio must lie in [0, 1]")
    if window < 1:
        raise ValueError("window must be >= 1")
    if ratio == 0:
        return replace(t, frames=list(t.frames))
    rng = np.random.default_rng(seed)
    dropped = set()
    per = int(math.floor(ratio * window + 1e-9))
    for start in range(0, t.n_frames, window):
        cells = list(range(start, min(start + window, t.n_frames)))
        k = min(per, len(cells))
        dropped.update(int(i) for i in rng.choice(cells, size=k, replace=False))
    return replace(t, frames=[f for f in t.frames if f.index not in dropped])


def write_trace(t: Trace, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for f in t.frames:
            for g in f.objects:
                w.writerow([f.index, g.id, g.cls, *(f"{v:.6g}" for v in g.box.as_tuple()),
                            f"{g.importance:g}"])


def read_trace(path: str | Path, frame_period: float, width: float = 1920.0,
               height: float = 1280.0, n_frames: int | None = None) -> Trace:
    """Parse a trace CSV; frames with no rows are treated as empty, not dropped."""
    frames: dict[int, list[GroundTruth]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != TRACE_COLUMNS:
            raise TraceError(f"{path}: expected header {','.join(TRACE_COLUMNS)}")
        for line, row in enumerate(reader, start=2):
            try:
                k = int(row["frame"])
                box = Rect(float(row["x_min"]), float(row["y_min"]),
                           float(row["x_max"]), float(row["y_max"]))
                g = GroundTruth(int(row["id"]), row["class"], box, float(row["importance"]))
            except (TypeError, ValueError) as exc:
                raise TraceError(f"{path}:{line}: {exc}") from None
            frames.setdefault(k, []).append(g)
    last = max(frames, default=-1)
    n = n_frames if n_frames is not None else last + 1
    return Trace(frame_period, [Frame(k, frames.get(k, [])) for k in range(n)],
                 width, height, n)
