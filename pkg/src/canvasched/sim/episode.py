"""Discrete-time episode runner.

Each horizon starts at an anchor frame with a full inspection.  Tracks are
then carried forward by the motion oracle, the policy plans the horizon on
the first partial frame (once the growth rates are known) and its plans run
at their frame indices.  A dropped keyframe promotes the next available
frame to anchor; plans falling on dropped frames run on the most recent
available one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np

from ..accuracy import AccuracyProfile
from ..baselines import PolicyKind, baseline_schedule
from ..core import ConfigError, HorizonConfig, Rect, ResizePolicy, iou
from ..packing import GENERAL
from ..scheduler import CSRAP, CanvasPlan, NoFeasibleCanvas, Schedule, cgpois
from ..tracking import TrackedObject, associate, expand_region, predict_box
from .models import (DetectorModel, LatencyModel, MotionOracle, from_canvas, resource_model,
                     to_canvas)
from .trace import Frame, Trace

POLICIES = (CSRAP,) + tuple(k.value for k in PolicyKind)


class ScheduleInfeasible(RuntimeError):
    pass


@dataclass(frozen=True)
class SimSetup:
    """Everything an episode needs besides the trace, horizon and seed."""

    profile: AccuracyProfile
    resize: ResizePolicy = ResizePolicy()
    latency: LatencyModel = LatencyModel()
    candidate_sides: tuple[int, ...] = (256, 384, 512, 640, 768, 1024)
    mode: str = GENERAL
    budget_scale: float = 1.0
    count_search: bool = True
    motion_noise: float = 2.0
    motion_bias: float = 0.0
    snap_noise: float = 1.0
    detector_threshold: float | None = None
    coverage: float = 0.5
    iou_floor: float = 0.5
    bucket_side: float = 64.0
    track_patience: int = 1

    @property
    def candidates(self) -> list[float]:
        return [float(s * s) for s in self.candidate_sides]


@dataclass(frozen=True)
class UncertaintyRow:
    frame: int
    time: float
    track: Hashable
    gt_id: Hashable
    weight: float
    last_inspect: float
    last_accuracy: float
    value: float


@dataclass(frozen=True)
class Inspection:
    frame: int
    source_frame: int
    kind: str
    track: Hashable
    ratio: float
    accuracy: float
    detected: bool


@dataclass
class EpisodeResult:
    policy: str
    seed: int
    frame_period: float
    n_frames: int
    budget: float
    predictions: dict[int, list[tuple]] = field(default_factory=dict)
    uncertainty: list[UncertaintyRow] = field(default_factory=list)
    latencies: list[tuple[int, str, float]] = field(default_factory=list)
    inspections: list[Inspection] = field(default_factory=list)
    schedules: list[tuple[int, Schedule]] = field(default_factory=list)
    spent: list[tuple[int, float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def plan_horizon(policy: str, objects: list[TrackedObject], setup: SimSetup, rm,
                 cfg: HorizonConfig) -> Schedule:
    try:
        if policy == CSRAP:
            return cgpois(objects, setup.candidates, setup.profile, setup.resize, rm, cfg,
                          setup.mode, count_search=setup.count_search)
        return baseline_schedule(policy, objects, setup.profile, setup.resize, rm, cfg,
                                 setup.bucket_side)
    except NoFeasibleCanvas as exc:
        raise ScheduleInfeasible(str(exc)) from exc


class _Episode:
    def __init__(self, t: Trace, policy: str, setup: SimSetup, cfg: HorizonConfig, seed: int):
        self.t, self.policy, self.setup, self.cfg = t, policy, setup, cfg
        streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]
        self.oracle = MotionOracle(streams[0], setup.motion_noise, setup.motion_bias)
        self.detector = DetectorModel(setup.profile, streams[1], setup.detector_threshold)
        self.snap_rng = streams[2]
        self.rm = resource_model(setup.latency, cfg, setup.budget_scale)
        self.fmap = t.frame_map()
        self.tracks: dict[int, TrackedObject] = {}
        self.next_id = 0
        self.last_seen: int | None = None
        self.res = EpisodeResult(policy, seed, t.frame_period, t.n_frames, self.rm.budget)

    # -- helpers ---------------------------------------------------------
    def now(self, f: int) -> float:
        return f * self.t.frame_period

    def noisy(self, box: Rect) -> Rect:
        s = self.setup.snap_noise
        if s <= 0:
            return box
        dx, dy = self.snap_rng.uniform(-s, s, 2)
        return box.translate(float(dx), float(dy))

    def snap(self, tr: TrackedObject, box: Rect, gt, acc: float, f: int, full: bool):
        tr.box = box
        tr.expanded = box
        tr.size = box.area
        tr.last_inspect = self.now(f)
        tr.last_accuracy = acc
        tr.gt_id, tr.cls, tr.importance = gt.id, gt.cls, gt.importance
        tr.meta["missed"] = 0
        if full:
            tr.full_size = box.area
        # a fresh fix supersedes any stale track sitting on the same object
        for oid in [o for o, other in self.tracks.items()
                    if other is not tr and iou(other.box, box) >= self.setup.iou_floor]:
            del self.tracks[oid]

    # -- per-frame steps -------------------------------------------------
    def advance(self, f: int):
        """Carry every track from the last processed frame to ``f``."""
        prev = self.fmap[self.last_seen].by_id()
        cur = self.fmap[f].by_id()
        for tr in self.tracks.values():
            g0, g1 = prev.get(tr.gt_id), cur.get(tr.gt_id)
            if g0 is not None and g1 is not None:
                (x0, y0), (x1, y1) = g0.box.center, g1.box.center
                m = self.oracle.sample(tr.box, g0.box, x1 - x0, y1 - y0)
            else:
                m = self.oracle.sample(tr.box, None, 0.0, 0.0)
            tr.box = predict_box(tr.box, m)
            tr.expanded = expand_region(tr.expanded, m)
        self.last_seen = f

    def full_inspection(self, f: int, source: int, keyframe: bool):
        frame: Frame = self.fmap[source]
        dets = []
        for g in frame.objects:
            ok, acc = self.detector.detects(g.box.area, 1.0)
            if ok:
                dets.append((g, acc, self.noisy(g.box)))
        ids = list(self.tracks)
        match = associate([self.tracks[i].box for i in ids], [d[2] for d in dets],
                          self.setup.iou_floor)
        if keyframe:
            for ti, tid in enumerate(ids):
                if ti not in match:
                    tr = self.tracks[tid]
                    tr.meta["missed"] = tr.meta.get("missed", 0) + 1
                    if tr.meta["missed"] > self.setup.track_patience:
                        del self.tracks[tid]
        used = set()
        for ti, di in match.items():
            g, acc, box = dets[di]
            if ids[ti] in self.tracks:
                self.snap(self.tracks[ids[ti]], box, g, acc, f, True)
                used.add(di)
        for di, (g, acc, box) in enumerate(dets):
            if di in used:
                continue
            tr = TrackedObject(self.next_id, box, box, box.area)
            self.tracks[self.next_id] = tr
            self.snap(tr, box, g, acc, f, True)
            self.next_id += 1

    def run_plan(self, p: CanvasPlan, f: int, source: int):
        self.res.latencies.append((f, p.kind, self.setup.latency.seconds(p.cost)))
        if p.kind == "full":
            self.full_inspection(f, source, keyframe=False)
            return
        gts = self.fmap[source].by_id()
        slots = p.layout.by_id() if p.layout is not None else {}
        for oid, ratio in p.ratios.items():
            tr = self.tracks.get(oid)
            if tr is None:
                continue
            crop = tr.expanded.clip(self.t.width, self.t.height)
            g = gts.get(tr.gt_id)
            hit, acc = False, p.accuracy.get(oid, 0.0)
            if (g is not None and crop.area > 0 and g.box.area > 0
                    and g.box.intersection(crop) >= self.setup.coverage * g.box.area):
                hit, acc = self.detector.detects(g.box.area, ratio)
                if hit:
                    if oid in slots:
                        slot, rot = slots[oid].rect, slots[oid].rotated
                    else:
                        slot, rot = Rect(0, 0, ratio * crop.width, ratio * crop.height), False
                    seen = to_canvas(g.box.clip(self.t.width, self.t.height), crop, slot, rot)
                    back = from_canvas(seen, crop, slot, rot)
                    self.snap(tr, self.noisy(back), g, acc, f, False)
            self.res.inspections.append(Inspection(f, source, p.kind, oid, ratio, acc, hit))

    def log(self, f: int):
        t = self.now(f)
        for tid, tr in self.tracks.items():
            if tr.last_accuracy > 0:
                u = tr.weight * (t - tr.last_inspect) / tr.last_accuracy
            else:
                u = math.inf
            self.res.uncertainty.append(UncertaintyRow(f, t, tid, tr.gt_id, tr.weight,
                                                       tr.last_inspect, tr.last_accuracy, u))

    def record(self, f: int):
        self.res.predictions[f] = [(tid, tr.box, tr.cls, tr.importance)
                                   for tid, tr in self.tracks.items()]

    def plan(self, anchor: int) -> dict[int, list[CanvasPlan]]:
        t_f = self.setup.latency.full_frame
        for tr in self.tracks.values():
            s_f = tr.full_size if tr.full_size > 0 else tr.box.area
            tr.ecr_size = tr.expanded.area
            tr.growth = math.sqrt(tr.ecr_size / s_f) / t_f if s_f > 0 else 0.0
            tr.size = tr.box.area
        sched = plan_horizon(self.policy, list(self.tracks.values()), self.setup, self.rm,
                             self.cfg)
        self.res.schedules.append((anchor, sched))
        self.res.warnings.extend(sched.warnings)
        by_k: dict[int, list[CanvasPlan]] = {}
        for p in sched.plans:
            by_k.setdefault(p.frame_index, []).append(p)
        return by_k

    # -- main loop -------------------------------------------------------
    def run(self) -> EpisodeResult:
        avail = sorted(self.fmap)
        H = self.cfg.horizon_len
        n = self.t.n_frames
        i = 0
        anchor = avail[0]
        while anchor is not None:
            plans: dict[int, list[CanvasPlan]] = {}
            spent = 0.0
            source = anchor
            for f in range(anchor, min(anchor + H, n)):
                k = f - anchor + 1
                if f in self.fmap:
                    if self.last_seen is not None and self.last_seen != f:
                        self.advance(f)
                    self.last_seen = f
                    source = f
                if k == 1:
                    self.log(f)
                    self.res.latencies.append((f, "keyframe", self.setup.latency.full_frame))
                    self.full_inspection(f, f, keyframe=True)
                else:
                    if k == 2:
                        plans = self.plan(anchor)
                    self.log(f)
                    for p in plans.get(k, []):
                        self.run_plan(p, f, source)
                        spent += p.cost
                self.record(f)
            self.res.spent.append((anchor, spent))
            nxt = anchor + H
            while i < len(avail) and avail[i] < nxt:
                i += 1
            anchor = avail[i] if i < len(avail) else None
        return self.res


def run_episode(t: Trace, policy: str, setup: SimSetup, cfg: HorizonConfig,
                seed: int = 0) -> EpisodeResult:
    """Simulate ``policy`` over ``t``; ``(t, policy, setup, cfg, seed)`` fixes the result."""
    if not t.frames:
        raise ValueError("trace has no frames")
    if not math.isclose(t.frame_period, cfg.frame_period, rel_tol=1e-9):
        raise ConfigError("trace frame period differs from the horizon's frame period")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {', '.join(POLICIES)}")
    return _Episode(t, policy, setup, cfg, seed).run()
