"""Canvas-based partial-inspection scheduling.

Three nested steps build a horizon's schedule:

* ``cgpois`` picks the canvas size (and count) with the lowest predicted
  worst-case uncertainty,
* ``cpois_assign`` spreads each object's inspections over the canvases,
  balancing the native-area load,
* ``fsocm`` chooses a resize level for every object on every canvas with
  the efficiency-ordered greedy, then packs the canvas.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .accuracy import (AccuracyProfile, EfficiencyEntry, SizeLadder, efficiency_entries,
                       lookup)
from .core import HorizonConfig, Rect, ResizePolicy, ResourceModel, ceil_to
from .packing import (GENERAL, QUANTIZED, Infeasible, Layout, PackItem, Placement, can_pack,
                      canvas_side, is_pow2, pack)
from .tracking import TrackedObject

log = logging.getLogger(__name__)

CSRAP = "CSRAP"


class NoFeasibleCanvas(Exception):
    pass


class InfeasibleCanvas(Exception):
    pass


@dataclass
class CanvasPlan:
    """One inspection pass: a packed canvas, a full frame, or a batch."""

    layout: Layout | None
    size: float
    start: float
    frame_index: int
    ratios: dict = field(default_factory=dict)
    areas: dict = field(default_factory=dict)
    accuracy: dict = field(default_factory=dict)
    cost: float = 0.0
    kind: str = "canvas"  # canvas | full | region | batch
    source_frame: int | None = None

    @property
    def objects(self) -> list:
        return list(self.ratios)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind, "size": self.size, "start": self.start,
            "frame_index": self.frame_index, "cost": self.cost,
            "objects": [{"id": oid, "ratio": self.ratios[oid], "area": self.areas.get(oid),
                         "accuracy": self.accuracy.get(oid)} for oid in self.ratios],
        }
        if self.layout is not None:
            out["layout"] = {"side": self.layout.side, "placements": [
                {"id": p.id, "rect": list(p.rect.as_tuple()), "rotated": p.rotated}
                for p in self.layout.placements]}
        return out


@dataclass
class Schedule:
    plans: list[CanvasPlan]
    canvas_size: float | None = None
    canvas_count: int = 0
    u_max: float = 0.0
    policy: str = CSRAP
    mode: str = GENERAL
    frequencies: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"policy": self.policy, "canvas_size": self.canvas_size,
                "canvas_count": self.canvas_count, "u_max": self.u_max, "mode": self.mode,
                "frequencies": {str(k): v for k, v in self.frequencies.items()},
                "warnings": list(self.warnings),
                "plans": [p.to_json() for p in self.plans]}


def plan_from_json(d: dict) -> CanvasPlan:
    layout = None
    if "layout" in d:
        layout = Layout(d["layout"]["side"], [
            Placement(p["id"], Rect(*p["rect"]), p["rotated"])
            for p in d["layout"]["placements"]])
    objs = d["objects"]
    return CanvasPlan(layout, d["size"], d["start"], d["frame_index"],
                      {o["id"]: o["ratio"] for o in objs},
                      {o["id"]: o["area"] for o in objs},
                      {o["id"]: o["accuracy"] for o in objs},
                      d["cost"], d["kind"], d.get("frame_index"))


def schedule_from_json(d: dict) -> Schedule:
    """Inverse of ``Schedule.to_json`` (frequency keys come back as strings)."""
    return Schedule([plan_from_json(p) for p in d["plans"]], d["canvas_size"],
                    d["canvas_count"], d["u_max"], d["policy"], d["mode"],
                    dict(d["frequencies"]), list(d["warnings"]))


@dataclass
class CanvasMapping:
    c_count: int
    canvases: list[list]
    loads: list[float]

    def canvases_of(self, oid) -> list[int]:
        return [j for j, objs in enumerate(self.canvases) if oid in objs]


def _id_key(oid):
    return (type(oid).__name__, oid)


# --------------------------------------------------------------------------
# inspection frequencies and canvas-size candidates

def inspection_frequencies(weights: Sequence[float], cfg: HorizonConfig) -> list[int]:
    """Integer inspection counts for weights sorted ascending.

    ``I = floor(I_min + (w - w_1) / (w_n - w_1) * (H_l - I_min - 1))``; when
    all weights are equal the fraction is 1 for everyone.
    """
    if not weights:
        return []
    if any(b < a for a, b in zip(weights, weights[1:])):
        raise ValueError("weights must be sorted ascending")
    w1, wn = weights[0], weights[-1]
    span = cfg.horizon_len - cfg.min_frequency - 1
    out = []
    for w in weights:
        frac = 1.0 if wn == w1 else (w - w1) / (wn - w1)
        out.append(int(math.floor(cfg.min_frequency + frac * span + 1e-9)))
    return out


def frequencies_for(objects: Iterable[TrackedObject], cfg: HorizonConfig) -> dict:
    objs = sorted(objects, key=lambda o: (o.weight, _id_key(o.id)))
    freqs = inspection_frequencies([o.weight for o in objs], cfg)
    return {o.id: f for o, f in zip(objs, freqs)}


def feasible_canvas_sizes(candidates: Sequence[float], rm: ResourceModel,
                          cfg: HorizonConfig) -> dict[float, int]:
    """Canvas sizes whose affordable count lies in ``[1, H_l - 1]``."""
    if not candidates:
        raise NoFeasibleCanvas("no candidate canvas sizes")
    out = {}
    for s in candidates:
        n = rm.canvas_count(s)
        if 1 <= n <= cfg.partial_frames:
            out[s] = n
    if not out:
        raise NoFeasibleCanvas("no canvas size satisfies 1 <= floor(R / cost) <= H_l - 1")
    return out


def canvas_options(candidates: Sequence[float], rm: ResourceModel, cfg: HorizonConfig,
                   count_search: bool = True) -> list[tuple[float, int]]:
    """(size, count) pairs that ``cgpois`` evaluates.

    Without ``count_search`` each feasible size is used with exactly
    ``floor(R / cost)`` canvases.  With it, every count from 1 up to
    ``min(floor(R / cost), H_l - 1)`` is tried; the budget constraint is an
    upper bound, and searching under it keeps the result monotone in ``R``.
    """
    if not count_search:
        return sorted(feasible_canvas_sizes(candidates, rm, cfg).items())
    if not candidates:
        raise NoFeasibleCanvas("no candidate canvas sizes")
    out = []
    for s in sorted(set(candidates)):
        top = min(rm.canvas_count(s), cfg.partial_frames)
        out.extend((s, n) for n in range(1, top + 1))
    if not out:
        raise NoFeasibleCanvas("budget does not cover a single canvas of any candidate size")
    return out


# --------------------------------------------------------------------------
# object -> canvas assignment

def cpois_assign(freqs: Mapping[Hashable, int], c_count: int, sizes: Mapping[Hashable, float],
                 order: Sequence[Hashable] | None = None,
                 warnings: list[str] | None = None) -> CanvasMapping:
    """Map each object's inspections onto ``I_i`` distinct canvases.

    Objects are taken in descending frequency (``order`` overrides).  The
    first copy goes to the least-loaded canvas among the first
    ``floor(C / I_i)`` (lowest index on ties) and the rest follow at that
    stride, so the inspections are spread evenly over the horizon.
    """
    if c_count < 1:
        raise ValueError("need at least one canvas")
    if order is None:
        order = sorted(freqs, key=lambda o: (-freqs[o], _id_key(o)))
    canvases: list[list] = [[] for _ in range(c_count)]
    loads = [0.0] * c_count
    for oid in order:
        n = freqs[oid]
        if n <= 0:
            continue
        if n > c_count:
            msg = f"object {oid!r}: frequency {n} exceeds {c_count} canvases, clamped"
            log.debug(msg)
            if warnings is not None:
                warnings.append(msg)
            n = c_count
        stride = c_count // n
        first = min(range(stride), key=lambda j: (loads[j], j))
        for m in range(n):
            j = first + m * stride
            canvases[j].append(oid)
            loads[j] += sizes[oid]
    return CanvasMapping(c_count, canvases, loads)


def assign_timing(c_count: int, cfg: HorizonConfig) -> list[tuple[float, int]]:
    """Start time and frame index per canvas, spread evenly over frames 2..H_l."""
    if not 1 <= c_count <= cfg.partial_frames:
        raise ValueError("canvas count must lie in [1, H_l - 1]")
    out = []
    for j in range(1, c_count + 1):
        k = 1 + -(-j * cfg.partial_frames // c_count)
        out.append(((k - 1) * cfg.frame_period, k))
    return out


# --------------------------------------------------------------------------
# resize ladders and the per-canvas greedy

def resized_dims(width: float, height: float, ratio: float, q: int,
                 mode: str = GENERAL) -> tuple[int, int]:
    """Canvas footprint of a region downscaled by ``ratio``.

    General mode rounds each side up to a multiple of ``q``.  Quantized mode
    rounds up to the smallest ``q * 2^k`` square covering both sides so the
    full-canvas packing guarantee holds.
    """
    w = max(ratio * width, 1.0)
    h = max(ratio * height, 1.0)
    if mode == QUANTIZED:
        side = q
        while side < max(w, h) - 1e-9:
            side *= 2
        return side, side
    return ceil_to(w, q), ceil_to(h, q)


def build_ladder(width: float, height: float, size: float, profile: AccuracyProfile,
                 policy: ResizePolicy, q: int, mode: str = GENERAL,
                 side: int | None = None) -> SizeLadder:
    """Admissible resize levels for one region.

    A level is admissible when its accuracy lies in ``[acc_min, acc_max]``
    and its footprint fits the canvas side.  Ratios that quantize to the
    same area collapse onto the largest of them.
    """
    levels: dict[float, tuple[float, float, tuple[int, int]]] = {}
    for r in policy.factors:
        acc = lookup(profile, size, r)
        if not policy.acc_min <= acc <= policy.acc_max:
            continue
        w, h = resized_dims(width, height, r, q, mode)
        if side is not None and (max(w, h) > side or min(w, h) > side):
            continue
        levels[float(w * h)] = (acc, r, (w, h))
    areas = sorted(levels)
    return SizeLadder(tuple(areas), tuple(levels[a][0] for a in areas),
                      tuple(levels[a][1] for a in areas), tuple(levels[a][2] for a in areas))


@dataclass
class Allocation:
    levels: dict  # object id -> ladder index
    used_area: float
    srindex: int | None


def greedy_levels(ladders: Mapping[Hashable, SizeLadder], weights: Mapping[Hashable, float],
                  canvas_area: float, phase1_limit: float, fits=None,
                  weighted: bool = True, entries: list[EfficiencyEntry] | None = None,
                  secondary_pass: bool = False) -> Allocation:
    """Efficiency-ordered level selection for one canvas.

    Phase 1 accepts upgrades while the allocated area stays within
    ``phase1_limit`` and stops at the first overflow.  Phase 2 resumes from
    that entry and accepts upgrades while the area stays within
    ``canvas_area`` and ``fits(levels)`` (if given) agrees, again stopping
    at the first refusal.  ``secondary_pass`` then sweeps the remaining
    entries once more, taking any that still fit instead of stopping.
    """
    if entries is None:
        entries = []
        for oid, ladder in ladders.items():
            entries.extend(efficiency_entries(oid, ladder, weights[oid], weighted))
    else:
        entries = list(entries)
    entries.sort(key=lambda e: (-e.efficiency, _id_key(e.obj), e.level))

    levels: dict = {}
    used = 0.0

    def increment(e):
        cur = levels.get(e.obj, -1)
        if e.level <= cur:
            return None
        below = ladders[e.obj].areas[cur] if cur >= 0 else 0.0
        return e.area - below

    srindex = None
    for k, e in enumerate(entries):
        inc = increment(e)
        if inc is None:
            continue
        if used + inc <= phase1_limit + 1e-9:
            used += inc
            levels[e.obj] = e.level
        else:
            srindex = k
            break

    def take(e) -> bool:
        nonlocal used, levels
        inc = increment(e)
        if inc is None:
            return True
        if used + inc > canvas_area + 1e-9:
            return False
        trial = dict(levels)
        trial[e.obj] = e.level
        if fits is not None and not fits(trial):
            return False
        used += inc
        levels = trial
        return True

    if srindex is not None:
        stop = len(entries)
        for k in range(srindex, len(entries)):
            if not take(entries[k]):
                stop = k
                break
        if secondary_pass:
            for e in entries[stop + 1:]:
                take(e)
    return Allocation(levels, used, srindex)


def _items_for(levels: Mapping, ladders: Mapping[Hashable, SizeLadder]) -> list[PackItem]:
    return [PackItem(oid, *ladders[oid].dims[lvl]) for oid, lvl in levels.items()]


def effective_mode(mode: str, side: int, q: int) -> str:
    """Quantized packing needs a ``q * 2^k`` canvas; otherwise fall back."""
    if mode == QUANTIZED and side % q == 0 and is_pow2(side // q):
        return QUANTIZED
    return GENERAL


def capacity_fraction_for(mode: str) -> float:
    return 1.0 if mode == QUANTIZED else 0.5


def allocate_canvas(objects: Sequence[TrackedObject], canvas_area: float,
                    profile: AccuracyProfile, policy: ResizePolicy, q: int,
                    mode: str = GENERAL, capacity_fraction: float | None = None,
                    weighted: bool = True, warnings: list[str] | None = None,
                    cache: dict | None = None, secondary_pass: bool = False):
    """Resize-level choice and packing for the objects mapped to one canvas.

    Returns ``(layout, chosen)`` where ``chosen`` maps object id to
    ``(ratio, area, accuracy)``.  Objects with no admissible level, or left
    at level zero by the greedy, are dropped from the canvas.
    """
    side = canvas_side(canvas_area, q)
    area = float(side * side)
    mode = effective_mode(mode, side, q)
    if capacity_fraction is None:
        capacity_fraction = capacity_fraction_for(mode)
    ladders, weights, entries = {}, {}, []
    for o in objects:
        key = (o.id, side, mode, weighted)
        if cache is not None and key in cache:
            lad, ents = cache[key]
        else:
            lad = build_ladder(o.expanded.width, o.expanded.height, o.size, profile, policy, q,
                               mode, side)
            ents = efficiency_entries(o.id, lad, o.weight, weighted)
            if cache is not None:
                cache[key] = (lad, ents)
        if len(lad) == 0:
            if warnings is not None:
                warnings.append(f"object {o.id!r}: no admissible resize level on a "
                                f"{side}x{side} canvas, dropped")
            continue
        ladders[o.id] = lad
        weights[o.id] = o.weight
        entries.extend(ents)

    def fits(levels):
        return can_pack(_items_for(levels, ladders), area, mode, q)

    # square dyadic items always pack up to the full canvas area
    probe = None if mode == QUANTIZED else fits
    alloc = greedy_levels(ladders, weights, area, capacity_fraction * area, probe, weighted,
                          entries, secondary_pass)
    levels = dict(alloc.levels)
    for oid in ladders:
        if oid not in levels and warnings is not None:
            warnings.append(f"object {oid!r}: no room left on canvas, dropped")

    while True:
        try:
            layout = pack(_items_for(levels, ladders), area, mode, q)
            break
        except Infeasible:
            # never expected under the phase-1 bound; shed the least critical
            victim = min(levels, key=lambda o: (weights[o], _id_key(o)))
            if warnings is not None:
                warnings.append(f"object {victim!r}: canvas does not pack, dropped")
            del levels[victim]
    chosen = {oid: (ladders[oid].ratios[l], ladders[oid].areas[l], ladders[oid].accuracies[l])
              for oid, l in levels.items()}
    return layout, chosen


def fsocm(mapping: CanvasMapping, canvas_area: float, objects: Mapping[Hashable, TrackedObject],
          profile: AccuracyProfile, policy: ResizePolicy, cfg: HorizonConfig,
          rm: ResourceModel | None = None, mode: str = GENERAL,
          capacity_fraction: float | None = None, weighted: bool = True,
          warnings: list[str] | None = None, cache: dict | None = None,
          secondary_pass: bool = False) -> list[CanvasPlan]:
    plans = []
    cost = rm.canvas_cost(canvas_area) if rm is not None else 0.0
    for (t_c, k), objs in zip(assign_timing(mapping.c_count, cfg), mapping.canvases):
        # the allocation depends only on the object set, so replicated
        # canvases and neighbouring counts reuse it
        key = ("canvas", canvas_area, mode, capacity_fraction, weighted, secondary_pass,
               tuple(sorted(objs, key=_id_key)))
        if cache is not None and key in cache:
            layout, chosen, warns = cache[key]
        else:
            warns = []
            layout, chosen = allocate_canvas([objects[o] for o in objs], canvas_area, profile,
                                             policy, cfg.quantum, mode, capacity_fraction,
                                             weighted, warns, cache, secondary_pass)
            if cache is not None:
                cache[key] = (layout, chosen, warns)
        if warnings is not None:
            warnings.extend(warns)
        layout = Layout(layout.side, list(layout.placements))
        order = [p.id for p in layout.placements]
        plans.append(CanvasPlan(
            layout=layout, size=canvas_area, start=t_c, frame_index=k,
            ratios={o: chosen[o][0] for o in order},
            areas={o: chosen[o][1] for o in order},
            accuracy={o: chosen[o][2] for o in order},
            cost=cost, kind="canvas", source_frame=k))
    return plans


# --------------------------------------------------------------------------
# objective and the top-level search

def predicted_uncertainties(plans: Sequence[CanvasPlan], objects: Iterable[TrackedObject],
                            cfg: HorizonConfig, profile: AccuracyProfile,
                            full_accuracy: Mapping | None = None) -> dict:
    """Per-object worst weighted uncertainty over the horizon, assuming every
    scheduled inspection succeeds.

    Each object starts the horizon freshly inspected at full resolution.
    Uncertainty is read just before each partial frame ``k = 2..H_l``, so
    an object inspected on every frame peaks at ``w * P / A``.
    """
    by_frame: dict[int, dict] = {}
    for p in plans:
        for oid, acc in p.accuracy.items():
            slot = by_frame.setdefault(p.frame_index, {})
            slot[oid] = max(acc, slot.get(oid, 0.0))
    out = {}
    P = cfg.frame_period
    for o in objects:
        if full_accuracy is not None and o.id in full_accuracy:
            a_full = full_accuracy[o.id]
        else:
            a_full = lookup(profile, o.size, 1.0)
        worst = 0.0
        k_last, a_last = 1, a_full
        for k in range(2, cfg.horizon_len + 1):
            if a_last > 0:
                worst = max(worst, o.weight * (k - k_last) * P / a_last)
            elif o.weight > 0:
                worst = math.inf
            acc = by_frame.get(k, {}).get(o.id)
            if acc is not None and acc > 0:
                k_last, a_last = k, acc
        out[o.id] = worst
    return out


def predicted_max_uncertainty(plans: Sequence[CanvasPlan], objects: Iterable[TrackedObject],
                              cfg: HorizonConfig, profile: AccuracyProfile,
                              full_accuracy: Mapping | None = None) -> float:
    """Worst weighted uncertainty over all objects; 0 for no objects."""
    return max(predicted_uncertainties(plans, objects, cfg, profile, full_accuracy).values(),
               default=0.0)


def uncertainty_floor(mapping: CanvasMapping, objects: Iterable[TrackedObject],
                      top_accuracy: Mapping, cfg: HorizonConfig) -> float:
    """Lower bound on the predicted ``U_max`` of any allocation of ``mapping``.

    The allocator can only drop inspections, which merges gaps, and no
    inspection is more accurate than the best table entry for the object's
    size.  So the longest planned gap at that accuracy is a floor.
    """
    frames = [k for _, k in assign_timing(mapping.c_count, cfg)]
    seen: dict = {}
    for j, objs in enumerate(mapping.canvases):
        for oid in objs:
            seen.setdefault(oid, []).append(frames[j])
    H, P = cfg.horizon_len, cfg.frame_period
    out = 0.0
    for o in objects:
        ks = [1] + sorted(seen.get(o.id, ()))
        gap = max(b - a for a, b in zip(ks, ks[1:])) if len(ks) > 1 else 0
        gap = max(gap, H - ks[-1])
        a = top_accuracy[o.id]
        if a > 0:
            out = max(out, o.weight * gap * P / a)
        elif o.weight > 0:
            return math.inf
    return out


def cgpois(objects: Sequence[TrackedObject], candidates: Sequence[float],
           profile: AccuracyProfile, policy: ResizePolicy, rm: ResourceModel,
           cfg: HorizonConfig, mode: str = GENERAL, count_search: bool = True,
           weighted: bool = True, capacity_fraction: float | None = None,
           leximax: bool = True, secondary_pass: bool = False) -> Schedule:
    """Search canvas sizes (and counts) for the lowest predicted ``U_max``.

    With ``leximax`` an exact tie on ``U_max`` is broken by the next-largest
    per-object uncertainty, and so on down the sorted vector, so options
    that quietly drop light objects lose to ones that keep them.  Remaining
    ties prefer the smaller canvas, then the larger count.
    """
    options = canvas_options(candidates, rm, cfg, count_search)
    for r in policy.factors:
        profile.ratio_index(r)
    objects = list(objects)
    if not objects:
        size, n = options[0]
        return Schedule([], size, 0, 0.0, CSRAP, mode)
    by_id = {o.id: o for o in objects}
    if len(by_id) != len(objects):
        raise ValueError("duplicate object ids")
    freqs = frequencies_for(objects, cfg)
    order = sorted(freqs, key=lambda o: (-freqs[o], -by_id[o].weight, _id_key(o)))
    sizes = {o.id: o.size for o in objects}

    full = {o.id: lookup(profile, o.size, 1.0) for o in objects}
    top = {o.id: float(profile.table[profile.bin_index(o.size)].max()) for o in objects}
    staged = []
    for size, n in options:
        warns: list[str] = []
        mapping = cpois_assign(freqs, n, sizes, order, warns)
        staged.append((uncertainty_floor(mapping, objects, top, cfg), size, n, mapping, warns))
    staged.sort(key=lambda s: (s[0], s[1], -s[2]))

    best, best_key = None, None
    cache: dict = {}
    for floor, size, n, mapping, warns in staged:
        if best_key is not None and floor > best_key[0]:
            break  # every remaining option is strictly worse
        plans = fsocm(mapping, size, by_id, profile, policy, cfg, rm, mode,
                      capacity_fraction, weighted, warns, cache, secondary_pass)
        per = predicted_uncertainties(plans, objects, cfg, profile, full)
        ranked = sorted(per.values(), reverse=True)
        u = ranked[0]
        key = (u, tuple(ranked) if leximax else (), size, -n)
        if best_key is None or key < best_key:
            best_key = key
            best = Schedule(plans, size, n, u, CSRAP, mode, dict(freqs), warns)
    return best


# --------------------------------------------------------------------------
# constraint checking

def validate_schedule(schedule: Schedule, rm: ResourceModel, cfg: HorizonConfig) -> list[str]:
    """Every constraint violation found in ``schedule``; empty means valid.

    Canvas plans are checked for area within the canvas, geometric
    soundness of the layout, the per-size canvas budget and the selection
    bound.  Every plan is checked for frame index range and per-plan object
    uniqueness, and the total cost must stay within the budget.
    """
    out = []
    plans = schedule.plans
    starts = [p.start for p in plans]
    if starts != sorted(starts):
        out.append("plans are not sorted by start time")
    for i, p in enumerate(plans):
        if not 2 <= p.frame_index <= cfg.horizon_len:
            out.append(f"plan {i}: frame index {p.frame_index} outside 2..{cfg.horizon_len}")
        ids = p.objects
        if len(set(ids)) != len(ids):
            out.append(f"plan {i}: object appears more than once")
        if p.layout is not None:
            lids = [pl.id for pl in p.layout.placements]
            if len(set(lids)) != len(lids):
                out.append(f"plan {i}: object appears more than once in the layout")
            if p.kind == "canvas":
                cap = p.layout.canvas_area
                used = sum(p.areas.values())
                if used > cap + 1e-9:
                    out.append(f"plan {i}: allocated area {used} exceeds canvas capacity {cap}")
                out.extend(f"plan {i}: {msg}" for msg in p.layout.problems())
    canvases = [p for p in plans if p.kind == "canvas"]
    if canvases:
        sizes = {p.size for p in canvases}
        for s in sizes:
            n = sum(1 for p in canvases if p.size == s)
            limit = rm.canvas_count(s)
            if n > limit:
                out.append(f"budget: {n} canvases of size {s} exceed floor(R/cost) = {limit}")
        if not 1 <= len(canvases) <= cfg.partial_frames:
            out.append(f"selection: {len(canvases)} canvases outside 1..{cfg.partial_frames}")
    total = sum(p.cost for p in plans)
    if total > rm.budget + 1e-6:
        out.append(f"budget: total cost {total:.6g} exceeds R = {rm.budget:.6g}")
    return out
