import random
from dataclasses import replace

import numpy as np
import pytest

from canvasched.accuracy import AccuracyProfile, synthetic_profile
from canvasched.baselines import (PolicyKind, baseline_schedule, proportional_counts,
                                  region_area)
from canvasched.core import HorizonConfig, ResizePolicy, ResourceModel
from canvasched.scheduler import validate_schedule

from .helpers import flat_profile, obj, random_objects

POL = ResizePolicy()


def test_huf_inspects_most_uncertain():
    cfg = HorizonConfig(horizon_len=2, frame_period=0.5, quantum=8)
    objs = [obj("lo", 40, 40, 2.0), obj("hi", 40, 40, 6.0)]  # U at k=2: 1 and 3
    rm = ResourceModel(budget=40 * 40)
    s = baseline_schedule("HUF", objs, flat_profile(1.0), POL, rm, cfg)
    assert [p.objects for p in s.plans] == [["hi"]]
    assert s.plans[0].kind == "region" and s.plans[0].cost == 1600


def test_huf_skips_regions_that_do_not_fit():
    cfg = HorizonConfig(horizon_len=2, frame_period=0.5, quantum=8)
    objs = [obj("big", 80, 80, 9.0), obj("small", 16, 16, 1.0)]
    s = baseline_schedule("HUF", objs, flat_profile(1.0), POL, ResourceModel(budget=1000), cfg)
    assert s.plans[0].objects == ["small"]


def test_bpb_proportional_split():
    cfg = HorizonConfig(horizon_len=5, quantum=8)
    objs = [obj(0, 16, 16, 1.0), obj(1, 16, 16, 1.0)]
    s = baseline_schedule("BPB", objs, flat_profile(1.0), POL, ResourceModel(budget=4 * 256), cfg)
    counts = {0: 0, 1: 0}
    for p in s.plans:
        for o in p.objects:
            counts[o] += 1
    assert counts == {0: 2, 1: 2}
    assert all(p.ratios[o] == 1.0 for p in s.plans for o in p.objects)


def test_fs_unconstrained_every_frame():
    cfg = HorizonConfig(horizon_len=6)
    rm = ResourceModel(budget=5 * 1920 * 1280)
    s = baseline_schedule("FS", [obj(0, 10, 10, 1.0)], flat_profile(1.0), POL, rm, cfg)
    assert [p.frame_index for p in s.plans] == [2, 3, 4, 5, 6]
    assert all(p.kind == "full" for p in s.plans)


def test_fs_spacing_under_pressure():
    cfg = HorizonConfig(horizon_len=10)
    rm = ResourceModel(budget=3 * 1920 * 1280)  # one full frame per three partial frames
    s = baseline_schedule("FS", [], flat_profile(1.0), POL, rm, cfg)
    assert [p.frame_index for p in s.plans] == [4, 7, 10]


def test_proportional_counts():
    assert proportional_counts({"a": 1, "b": 1}, 4, 9) == {"a": 2, "b": 2}
    assert proportional_counts({"a": 1, "b": 2}, 4, 9) == {"a": 1, "b": 3}
    # the cap pushes the excess onto the lighter object
    assert proportional_counts({"a": 1, "b": 9}, 6, 4) == {"a": 2, "b": 4}
    assert proportional_counts({"a": 0, "b": 1}, 5, 3) == {"a": 0, "b": 3}


def test_gbpb_with_native_only_equals_bpb():
    cfg = HorizonConfig(horizon_len=8)
    rng = random.Random(3)
    objs = random_objects(rng, 6)
    rm = ResourceModel(budget=400000, fixed_overhead=5000)
    p = synthetic_profile(ratios=(1.0,))
    pol = ResizePolicy(factors=(1.0,))
    a = baseline_schedule("BPB", objs, p, pol, rm, cfg)
    b = baseline_schedule("GBPB", objs, p, pol, rm, cfg)
    assert [(x.frame_index, x.ratios) for x in a.plans] == [(x.frame_index, x.ratios)
                                                             for x in b.plans]


def test_gbpb_picks_best_accuracy_per_area():
    cfg = HorizonConfig(horizon_len=3, quantum=1)
    p = AccuracyProfile((0.0,), (0.5, 1.0), np.array([[0.6, 0.9]]))
    o = obj(0, 100, 100, 1.0)
    s = baseline_schedule("GBPB", [o], p, ResizePolicy(factors=(0.5, 1.0)),
                          ResourceModel(budget=1e6), cfg)
    assert {p.ratios[0] for p in s.plans} == {0.5}
    assert region_area(o, 0.5, 1) == 2500


@pytest.mark.parametrize("kind", [k.value for k in PolicyKind if k is not PolicyKind.FS])
def test_doubling_weights_does_not_change_selection(kind):
    cfg = HorizonConfig(horizon_len=10)
    rng = random.Random(11)
    objs = random_objects(rng, 8)
    heavy = [replace(o, growth=2 * o.growth) for o in objs]
    rm = ResourceModel(budget=300000, fixed_overhead=10000, batch_latency_slope=0.001)
    p = synthetic_profile()
    a = baseline_schedule(kind, objs, p, POL, rm, cfg)
    b = baseline_schedule(kind, heavy, p, POL, rm, cfg)
    assert [(x.frame_index, x.ratios) for x in a.plans] == [(x.frame_index, x.ratios)
                                                             for x in b.plans]
    assert b.u_max == pytest.approx(2 * a.u_max)


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("kind", [k.value for k in PolicyKind])
def test_baselines_stay_within_budget(kind, seed):
    rng = random.Random(seed)
    cfg = HorizonConfig(horizon_len=rng.randint(2, 12))
    objs = random_objects(rng, rng.randint(0, 15))
    rm = ResourceModel(budget=rng.uniform(0.2, 8) * 1920 * 1280 * 0.1,
                       fixed_overhead=rng.choice([0, 20000]),
                       batch_latency_slope=rng.choice([0.0, 0.002]))
    s = baseline_schedule(kind, objs, synthetic_profile(), POL, rm, cfg)
    assert validate_schedule(s, rm, cfg) == []
    assert sum(p.cost for p in s.plans) <= rm.budget + 1e-6
    assert s.policy == kind


def test_unknown_kind():
    with pytest.raises(ValueError):
        baseline_schedule("XYZ", [], flat_profile(1.0), POL, ResourceModel(budget=1),
                          HorizonConfig())
