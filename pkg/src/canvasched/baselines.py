"""Reference schedulers, emitting the same ``Schedule`` type as ``cgpois``.

These are compact re-implementations of the comparison policies; details
the policies leave open are fixed here:

FS
    Full frames at native resolution every ``ceil(cost(V) / B_f)`` frames,
    where ``B_f = R / (H_l - 1)`` is the per-frame share of the budget.
HUF
    Each partial frame greedily inspects the regions with the highest
    predicted uncertainty at ``r = 1``.  Every region pays ``c0 + area``.
    A region that does not fit the remaining frame budget is skipped and
    the next one is tried.
BHUF
    As HUF, but each region is resized to the profile ratio closest to
    ``bucket_side / long_side`` and regions sharing a ratio run as one
    batch costing ``c0 + sum(area) + n * item_cost``.
BPB
    A per-horizon task budget is split over objects in proportion to their
    weights (largest remainder; ties to the larger remainder, then the
    lower id), capped at ``H_l - 1`` each, spread evenly over the partial
    frames at ``r = 1`` and batched per frame.  Inspections of the lightest
    objects are trimmed if the total still exceeds ``R``.
GBPB
    BPB with each object's ratio chosen to maximise ``A / area`` among the
    admissible ratios (largest ratio on ties).
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Sequence

from .accuracy import AccuracyProfile, lookup
from .core import HorizonConfig, ResizePolicy, ResourceModel
from .scheduler import (CanvasPlan, Schedule, _id_key,
                        predicted_max_uncertainty, resized_dims)
from .tracking import TrackedObject


class PolicyKind(str, Enum):
    FS = "FS"
    HUF = "HUF"
    BHUF = "BHUF"
    BPB = "BPB"
    GBPB = "GBPB"


def frame_budget(rm: ResourceModel, cfg: HorizonConfig) -> float:
    return rm.budget / cfg.partial_frames


def region_area(o: TrackedObject, ratio: float, q: int) -> float:
    w, h = resized_dims(o.expanded.width, o.expanded.height, ratio, q)
    return float(w * h)


def _finish(kind: str, plans: list[CanvasPlan], objects, profile, cfg) -> Schedule:
    plans.sort(key=lambda p: p.start)
    u = predicted_max_uncertainty(plans, objects, cfg, profile)
    return Schedule(plans, None, 0, u, kind)


def _plan(k: int, cfg: HorizonConfig, kind: str, chosen: dict, cost: float) -> CanvasPlan:
    return CanvasPlan(layout=None, size=sum(a for _, a, _ in chosen.values()),
                      start=(k - 1) * cfg.frame_period, frame_index=k,
                      ratios={o: c[0] for o, c in chosen.items()},
                      areas={o: c[1] for o, c in chosen.items()},
                      accuracy={o: c[2] for o, c in chosen.items()},
                      cost=cost, kind=kind, source_frame=k)


def full_frame_schedule(objects, profile, rm, cfg) -> Schedule:
    cost_v = rm.canvas_cost(rm.frame_volume)
    spacing = max(1, math.ceil(cost_v / frame_budget(rm, cfg) - 1e-9))
    plans = []
    for k in range(1 + spacing, cfg.horizon_len + 1, spacing):
        chosen = {o.id: (1.0, o.size, lookup(profile, o.size, 1.0)) for o in objects}
        p = _plan(k, cfg, "full", chosen, cost_v)
        p.size = float(rm.frame_volume)
        plans.append(p)
    return _finish(PolicyKind.FS.value, plans, objects, profile, cfg)


def _bucket_ratio(o: TrackedObject, profile: AccuracyProfile, policy: ResizePolicy,
                  bucket_side: float) -> float | None:
    admissible = [r for r in policy.factors
                  if policy.acc_min <= lookup(profile, o.size, r) <= policy.acc_max]
    if not admissible:
        return None
    long_side = max(o.expanded.width, o.expanded.height, 1.0)
    target = min(1.0, bucket_side / long_side)
    return min(admissible, key=lambda r: (abs(r - target), -r))


def uncertainty_greedy(objects: Sequence[TrackedObject], profile: AccuracyProfile,
                       policy: ResizePolicy, rm: ResourceModel, cfg: HorizonConfig,
                       batched: bool = False, bucket_side: float = 64.0) -> Schedule:
    """HUF (``batched=False``) and BHUF (``batched=True``)."""
    B = frame_budget(rm, cfg)
    item = rm.batch_item_cost(cfg) if batched else 0.0
    state = {o.id: (1, lookup(profile, o.size, 1.0)) for o in objects}
    choice = {}
    for o in objects:
        if batched:
            r = _bucket_ratio(o, profile, policy, bucket_side)
        else:
            r = 1.0 if policy.acc_min <= lookup(profile, o.size, 1.0) <= policy.acc_max else None
        if r is not None:
            choice[o.id] = (r, region_area(o, r, cfg.quantum), lookup(profile, o.size, r))

    plans = []
    for k in range(2, cfg.horizon_len + 1):
        def pred_u(o):
            k_last, a_last = state[o.id]
            return o.weight * (k - k_last) * cfg.frame_period / a_last if a_last > 0 else math.inf
        ranked = sorted((o for o in objects if o.id in choice),
                        key=lambda o: (-pred_u(o), _id_key(o.id)))
        spent, open_ratios, chosen = 0.0, set(), {}
        for o in ranked:
            r, area, acc = choice[o.id]
            extra = area + item
            if not batched or r not in open_ratios:
                extra += rm.fixed_overhead
            if spent + extra > B + 1e-9:
                continue
            spent += extra
            open_ratios.add(r)
            chosen[o.id] = (r, area, acc)
            if acc > 0:
                state[o.id] = (k, acc)
        if chosen:
            plans.append(_plan(k, cfg, "batch" if batched else "region", chosen, spent))
    kind = PolicyKind.BHUF if batched else PolicyKind.HUF
    return _finish(kind.value, plans, objects, profile, cfg)


def proportional_counts(weights: dict, total: int, cap: int) -> dict:
    """Largest-remainder split of ``total`` tasks in proportion to ``weights``."""
    ids = sorted(weights, key=_id_key)
    counts = {i: 0 for i in ids}
    active = [i for i in ids if weights[i] > 0]
    left = min(total, cap * len(active))
    while left > 0 and active:
        wsum = sum(weights[i] for i in active)
        quota = {i: left * weights[i] / wsum for i in active}
        add = {i: int(math.floor(quota[i] + 1e-12)) for i in active}
        spare = left - sum(add.values())
        order = sorted(active, key=lambda i: (-(quota[i] - add[i]), _id_key(i)))
        for i in order[:spare]:
            add[i] += 1
        for i in active:
            counts[i] += add[i]
        left = 0
        for i in active:
            if counts[i] > cap:
                left += counts[i] - cap
                counts[i] = cap
        active = [i for i in active if counts[i] < cap]
    return counts


def _even_frames(n: int, cfg: HorizonConfig) -> list[int]:
    return [1 + -(-m * cfg.partial_frames // n) for m in range(1, n + 1)]


def proportional_batches(objects: Sequence[TrackedObject], profile: AccuracyProfile,
                         policy: ResizePolicy, rm: ResourceModel, cfg: HorizonConfig,
                         resize: bool = False) -> Schedule:
    """BPB (``resize=False``) and GBPB (``resize=True``)."""
    item = rm.batch_item_cost(cfg)
    choice = {}
    for o in objects:
        ratios = policy.factors if resize else (1.0,)
        scored = []
        for r in ratios:
            acc = lookup(profile, o.size, r)
            if policy.acc_min <= acc <= policy.acc_max:
                area = region_area(o, r, cfg.quantum)
                scored.append((acc / area, r, area, acc))
        if scored:
            _, r, area, acc = max(scored)
            choice[o.id] = (r, area, acc)
    if not choice:
        return _finish(PolicyKind.GBPB.value if resize else PolicyKind.BPB.value,
                       [], objects, profile, cfg)

    mean_task = sum(a + item for _, a, _ in choice.values()) / len(choice)
    spendable = rm.budget - cfg.partial_frames * rm.fixed_overhead
    tasks = max(0, int(math.floor(spendable / mean_task + 1e-9)))
    weights = {o.id: o.weight for o in objects if o.id in choice}
    counts = proportional_counts(weights, tasks, cfg.partial_frames)

    def build(counts):
        frames: dict[int, dict] = {}
        for oid in sorted(counts, key=_id_key):
            for k in (_even_frames(counts[oid], cfg) if counts[oid] else []):
                frames.setdefault(k, {})[oid] = choice[oid]
        plans = []
        for k in sorted(frames):
            cost = rm.fixed_overhead + sum(a + item for _, a, _ in frames[k].values())
            plans.append(_plan(k, cfg, "batch", frames[k], cost))
        return plans

    plans = build(counts)
    light = sorted(weights, key=lambda i: (weights[i], _id_key(i)))
    while sum(p.cost for p in plans) > rm.budget + 1e-9:
        victim = next(i for i in light if counts[i] > 0)
        counts[victim] -= 1
        plans = build(counts)
    kind = PolicyKind.GBPB if resize else PolicyKind.BPB
    return _finish(kind.value, plans, objects, profile, cfg)


def baseline_schedule(kind: PolicyKind | str, objects: Sequence[TrackedObject],
                      profile: AccuracyProfile, policy: ResizePolicy, rm: ResourceModel,
                      cfg: HorizonConfig, bucket_side: float = 64.0) -> Schedule:
    kind = PolicyKind(kind)
    objects = list(objects)
    if kind is PolicyKind.FS:
        return full_frame_schedule(objects, profile, rm, cfg)
    if kind is PolicyKind.HUF:
        return uncertainty_greedy(objects, profile, policy, rm, cfg)
    if kind is PolicyKind.BHUF:
        return uncertainty_greedy(objects, profile, policy, rm, cfg, True, bucket_side)
    if kind is PolicyKind.BPB:
        return proportional_batches(objects, profile, policy, rm, cfg)
    return proportional_batches(objects, profile, policy, rm, cfg, resize=True)
