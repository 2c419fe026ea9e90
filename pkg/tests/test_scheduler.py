import itertools
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canvasched.accuracy import SizeLadder, synthetic_profile
from canvasched.core import HorizonConfig, ResizePolicy, ResourceModel
from canvasched.packing import GENERAL, QUANTIZED, PackItem, can_pack
from canvasched.scheduler import (CanvasPlan, NoFeasibleCanvas, Schedule, allocate_canvas,
                                  assign_timing, build_ladder, canvas_options, cgpois,
                                  cpois_assign, feasible_canvas_sizes, frequencies_for, fsocm,
                                  greedy_levels, inspection_frequencies, predicted_max_uncertainty,
                                  predicted_uncertainties, resized_dims, schedule_from_json,
                                  uncertainty_floor, validate_schedule)

from .helpers import flat_profile, obj, random_objects
from .oracles import frequencies_by_hand, grid_packable

CFG10 = HorizonConfig(horizon_len=10, frame_period=0.1)
RM = ResourceModel(budget=362144, fixed_overhead=100000)
SIZES = [128.0 ** 2, 256.0 ** 2, 512.0 ** 2]


# -- inspection frequencies -------------------------------------------------

def test_frequencies_examples():
    cfg = HorizonConfig(horizon_len=5, min_frequency=1)
    assert inspection_frequencies([1, 2, 3], cfg) == [1, 2, 4]
    assert inspection_frequencies([2, 2, 2], cfg) == [4, 4, 4]
    assert inspection_frequencies([1, 9], cfg)[0] == 1
    assert inspection_frequencies([], cfg) == []
    with pytest.raises(ValueError):
        inspection_frequencies([2, 1], cfg)


@given(st.lists(st.integers(0, 1000), min_size=1, max_size=20), st.integers(2, 15), st.data())
def test_frequencies_match_exact_formula(ws, h_l, data):
    i_min = data.draw(st.integers(1, h_l - 1))
    ws = sorted(w / 10 for w in ws)
    cfg = HorizonConfig(horizon_len=h_l, min_frequency=i_min)
    got = inspection_frequencies(ws, cfg)
    assert got == frequencies_by_hand([int(w * 10) for w in ws], i_min, h_l)
    assert all(i_min <= f <= h_l - 1 for f in got)


def test_frequencies_for_orders_by_weight():
    objs = [obj("b", 10, 10, 3.0), obj("a", 10, 10, 1.0), obj("c", 10, 10, 2.0)]
    assert frequencies_for(objs, HorizonConfig(horizon_len=5)) == {"a": 1, "c": 2, "b": 4}


# -- canvas sizes -------------------------------------------------------------

def test_feasible_canvas_sizes_worked_example():
    assert feasible_canvas_sizes(SIZES, RM, CFG10) == {SIZES[0]: 3, SIZES[1]: 2, SIZES[2]: 1}


def test_feasible_canvas_sizes_upper_bound():
    got = feasible_canvas_sizes(SIZES, RM, HorizonConfig(horizon_len=3))
    assert SIZES[0] not in got and got == {SIZES[1]: 2, SIZES[2]: 1}


def test_no_feasible_canvas():
    with pytest.raises(NoFeasibleCanvas):
        feasible_canvas_sizes(SIZES, ResourceModel(budget=100, fixed_overhead=1000), CFG10)
    with pytest.raises(NoFeasibleCanvas):
        feasible_canvas_sizes([], RM, CFG10)
    with pytest.raises(NoFeasibleCanvas):
        canvas_options([], RM, CFG10)


def test_canvas_options_count_search():
    opts = canvas_options(SIZES, RM, CFG10)
    assert opts == [(SIZES[0], 1), (SIZES[0], 2), (SIZES[0], 3), (SIZES[1], 1), (SIZES[1], 2),
                    (SIZES[2], 1)]
    assert canvas_options(SIZES, RM, CFG10, count_search=False) == [
        (SIZES[0], 3), (SIZES[1], 2), (SIZES[2], 1)]


# -- object to canvas mapping ------------------------------------------------

def test_cpois_worked_example():
    m = cpois_assign({1: 4, 2: 2, 3: 2, 4: 1}, 4, {1: 4.0, 2: 3.0, 3: 2.0, 4: 1.0})
    assert {o: [j + 1 for j in m.canvases_of(o)] for o in (1, 2, 3, 4)} == {
        1: [1, 2, 3, 4], 2: [1, 3], 3: [2, 4], 4: [2]}


def test_cpois_equal_sizes_tie_goes_to_lowest_index():
    m = cpois_assign({1: 4, 2: 2, 3: 2, 4: 1}, 4, {1: 4.0, 2: 3.0, 3: 3.0, 4: 1.0})
    assert m.canvases_of(4) == [0]


def test_cpois_small_cases():
    assert cpois_assign({"x": 1}, 3, {"x": 5.0}).canvases == [["x"], [], []]
    assert cpois_assign({"x": 2}, 4, {"x": 5.0}).canvases_of("x") == [0, 2]


def test_cpois_clamps_with_warning():
    warns = []
    m = cpois_assign({"x": 5}, 3, {"x": 1.0}, warnings=warns)
    assert m.canvases_of("x") == [0, 1, 2]
    assert len(warns) == 1 and "clamped" in warns[0]


@settings(max_examples=200)
@given(st.integers(1, 9), st.lists(st.tuples(st.integers(1, 12), st.floats(1, 1e4)),
                                   min_size=1, max_size=12))
def test_cpois_invariants(c, plan):
    freqs = {i: f for i, (f, _) in enumerate(plan)}
    sizes = {i: s for i, (_, s) in enumerate(plan)}
    m = cpois_assign(freqs, c, sizes)
    for i, f in freqs.items():
        js = m.canvases_of(i)
        assert len(js) == min(f, c)
        # evenly strided
        assert len({b - a for a, b in zip(js, js[1:])}) <= 1
    assert m.loads == pytest.approx([sum(sizes[o] for o in objs) for objs in m.canvases])


# -- timing -----------------------------------------------------------------

def test_assign_timing_examples():
    assert [k for _, k in assign_timing(9, CFG10)] == list(range(2, 11))
    t = assign_timing(2, CFG10)
    assert [k for _, k in t] == [6, 10]
    assert [s for s, _ in t] == pytest.approx([0.5, 0.9])
    assert [k for _, k in assign_timing(3, CFG10)] == [4, 7, 10]
    with pytest.raises(ValueError):
        assign_timing(10, CFG10)


# -- ladders and the greedy ---------------------------------------------------

def test_resized_dims():
    assert resized_dims(100, 50, 0.5, 8) == (56, 32)
    assert resized_dims(100, 50, 0.5, 8, QUANTIZED) == (64, 64)
    assert resized_dims(1, 1, 0.25, 8, QUANTIZED) == (8, 8)


def test_build_ladder_filters_and_dedups():
    p = synthetic_profile()
    lad = build_ladder(8, 8, 64, p, ResizePolicy(), 8)
    # every ratio rounds up to one 8x8 cell; the largest ratio is kept
    assert lad.areas == (64.0,) and lad.ratios == (1.0,)
    assert len(build_ladder(200, 200, 40000, p, ResizePolicy(), 8, side=104)) == 2
    assert len(build_ladder(200, 200, 40000, p, ResizePolicy(acc_min=0.99), 8)) == 0


LAD = SizeLadder((16, 32, 64), (0.5, 0.8, 0.9), (0.25, 0.5, 1.0), ((4, 4), (4, 8), (8, 8)))


def test_greedy_single_object_takes_every_level():
    a = greedy_levels({"a": LAD}, {"a": 1.0}, 128, 64)
    assert a.levels == {"a": 2} and a.used_area == 64 and a.srindex is None


def _fits(ladders, side):
    def f(levels):
        return can_pack([PackItem(o, *ladders[o].dims[l]) for o, l in levels.items()],
                        side * side)
    return f


def test_greedy_two_objects_against_geometric_oracle():
    ladders = {"a": LAD, "b": LAD}
    side = 11  # floor(sqrt(128))
    a = greedy_levels(ladders, {"a": 1.0, "b": 1.0}, 128, 64, _fits(ladders, side))
    assert a.srindex == 4
    assert a.levels == {"a": 1, "b": 1} and a.used_area == 64
    best = 0.0
    for la, lb in itertools.product(range(3), repeat=2):
        dims = [LAD.dims[la], LAD.dims[lb]]
        if LAD.areas[la] + LAD.areas[lb] <= 128 and grid_packable(dims, side):
            best = max(best, LAD.accuracies[la] + LAD.accuracies[lb])
    assert sum(LAD.accuracies[l] for l in a.levels.values()) == pytest.approx(best)


def test_greedy_phase_two_continues_past_half():
    a = greedy_levels({"a": LAD}, {"a": 1.0}, 128, 40)
    assert a.srindex == 2 and a.levels == {"a": 2}


def test_secondary_pass_takes_skipped_entries():
    big = SizeLadder((100,), (0.9,), (1.0,))
    small = SizeLadder((10,), (0.05,), (1.0,))
    lads = {"big": big, "small": small}
    w = {"big": 1.0, "small": 1.0}
    # big wins on G (0.009 > 0.005) but overflows phase 1 and phase 2
    plain = greedy_levels(lads, w, 50, 25)
    assert plain.levels == {}
    assert greedy_levels(lads, w, 50, 25, secondary_pass=True).levels == {"small": 0}


def test_allocate_canvas_filters_everything_above_acc_max():
    warns = []
    layout, chosen = allocate_canvas([obj(1, 32, 32, 1.0)], 256 ** 2, synthetic_profile(),
                                     ResizePolicy(acc_min=0.99), 8, warnings=warns)
    assert chosen == {} and layout.placements == [] and warns


def test_allocate_canvas_quantized_fills_canvas():
    objs = [obj(i, 64, 64, 1.0 + i) for i in range(4)]
    layout, chosen = allocate_canvas(objs, 128 ** 2, flat_profile(1.0), ResizePolicy(), 8,
                                     mode=QUANTIZED)
    assert layout.problems() == []
    assert layout.used_area == 128 ** 2 and len(chosen) == 4


def test_allocate_canvas_falls_back_to_general_for_odd_sides():
    objs = [obj(i, 64, 64, 1.0) for i in range(4)]
    layout, _ = allocate_canvas(objs, 120 ** 2, flat_profile(1.0), ResizePolicy(), 8,
                                mode=QUANTIZED)
    assert layout.side == 120 and layout.problems() == []


# -- predicted uncertainty ----------------------------------------------------

def _every_frame(oid, cfg, acc=1.0):
    return [CanvasPlan(None, 0, (k - 1) * cfg.frame_period, k, {oid: 1.0}, {oid: 1.0},
                       {oid: acc}) for k in range(2, cfg.horizon_len + 1)]


def test_predicted_u_every_frame():
    o = obj("a", 10, 10, 3.0)
    u = predicted_max_uncertainty(_every_frame("a", CFG10), [o], CFG10, flat_profile(1.0))
    assert u == pytest.approx(3.0 * 0.1, abs=1e-12)


def test_predicted_u_never_inspected():
    o = obj("a", 10, 10, 3.0)
    u = predicted_max_uncertainty([], [o], CFG10, flat_profile(0.8))
    assert u == pytest.approx(3.0 * 9 * 0.1 / 0.8, abs=1e-12)
    assert predicted_max_uncertainty([], [], CFG10, flat_profile(0.8)) == 0.0


def test_predicted_u_hand_trace():
    # inspected at k=4 with A=0.5: gaps 3P at A_full=1, then 6P at A=0.5
    o = obj("a", 10, 10, 2.0)
    plan = CanvasPlan(None, 0, 0.3, 4, {"a": 0.5}, {"a": 1.0}, {"a": 0.5})
    per = predicted_uncertainties([plan], [o], CFG10, flat_profile(1.0))
    assert per["a"] == pytest.approx(max(2.0 * 0.3 / 1.0, 2.0 * 0.6 / 0.5))


# -- the full search -----------------------------------------------------------

def test_cgpois_single_option():
    s = cgpois([obj(0, 40, 40, 1.0)], [256.0 ** 2], synthetic_profile(), ResizePolicy(), RM,
               CFG10)
    assert s.canvas_size == 256.0 ** 2
    assert validate_schedule(s, RM, CFG10) == []


def test_cgpois_empty_inputs():
    with pytest.raises(NoFeasibleCanvas):
        cgpois([obj(0, 40, 40, 1.0)], [], synthetic_profile(), ResizePolicy(), RM, CFG10)
    s = cgpois([], SIZES, synthetic_profile(), ResizePolicy(), RM, CFG10)
    assert s.plans == [] and s.u_max == 0.0


def test_cgpois_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        cgpois([obj(0, 4, 4, 1.0), obj(0, 4, 4, 1.0)], SIZES, synthetic_profile(),
               ResizePolicy(), RM, CFG10)


def test_cgpois_two_sizes_match_exhaustive_choice():
    """A big canvas allows one full-resolution pass, a small one three downscaled passes."""
    rm = ResourceModel(budget=3 * (10000 + 96 ** 2), fixed_overhead=10000)
    cands = [96.0 ** 2, 200.0 ** 2]
    assert feasible_canvas_sizes(cands, rm, CFG10) == {96.0 ** 2: 3, 200.0 ** 2: 1}
    objs = [obj(0, 150, 150, 5.0), obj(1, 100, 100, 2.0), obj(2, 60, 60, 1.0)]
    p, pol = synthetic_profile(), ResizePolicy()
    s = cgpois(objs, cands, p, pol, rm, CFG10, count_search=False)
    brute = []
    for size, n in canvas_options(cands, rm, CFG10, count_search=False):
        freqs = frequencies_for(objs, CFG10)
        order = sorted(freqs, key=lambda o: (-freqs[o], -objs[o].weight, o))
        m = cpois_assign(freqs, n, {o.id: o.size for o in objs}, order)
        plans = fsocm(m, size, {o.id: o for o in objs}, p, pol, CFG10, rm)
        brute.append((predicted_max_uncertainty(plans, objs, CFG10, p), size))
    assert s.u_max == pytest.approx(min(brute)[0], abs=1e-12)
    assert s.canvas_size == min(brute)[1]


@pytest.mark.parametrize("seed", range(15))
@pytest.mark.parametrize("mode", [GENERAL, QUANTIZED])
def test_cgpois_matches_option_brute_force(seed, mode):
    rng = random.Random(seed)
    objs = random_objects(rng, rng.randint(1, 8))
    cands = [float(s * s) for s in rng.sample([128, 256, 384, 512, 640], rng.randint(1, 3))]
    rm = ResourceModel(budget=rng.uniform(1.5, 6) * max(cands), fixed_overhead=1000)
    p, pol = synthetic_profile(), ResizePolicy()
    s = cgpois(objs, cands, p, pol, rm, CFG10, mode)
    assert validate_schedule(s, rm, CFG10) == []
    freqs = frequencies_for(objs, CFG10)
    order = sorted(freqs, key=lambda o: (-freqs[o], -objs[o].weight, o))
    best = min(predicted_max_uncertainty(
        fsocm(cpois_assign(freqs, n, {o.id: o.size for o in objs}, order), size,
              {o.id: o for o in objs}, p, pol, CFG10, rm, mode), objs, CFG10, p)
        for size, n in canvas_options(cands, rm, CFG10))
    assert s.u_max == pytest.approx(best, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_uncertainty_floor_is_a_lower_bound(seed):
    rng = random.Random(100 + seed)
    objs = random_objects(rng, rng.randint(1, 12))
    cfg = HorizonConfig(horizon_len=rng.randint(2, 12))
    p, pol = synthetic_profile(), ResizePolicy()
    rm = ResourceModel(budget=rng.uniform(1, 8) * 256 ** 2, fixed_overhead=5000)
    top = {o.id: float(p.table[p.bin_index(o.size)].max()) for o in objs}
    freqs = frequencies_for(objs, cfg)
    for size, n in canvas_options([128.0 ** 2, 256.0 ** 2, 384.0 ** 2], rm, cfg):
        m = cpois_assign(freqs, n, {o.id: o.size for o in objs})
        plans = fsocm(m, size, {o.id: o for o in objs}, p, pol, cfg, rm)
        assert uncertainty_floor(m, objs, top, cfg) <= predicted_max_uncertainty(
            plans, objs, cfg, p)


@pytest.mark.parametrize("seed", range(10))
def test_pruning_does_not_change_the_choice(seed, monkeypatch):
    import canvasched.scheduler as sched
    rng = random.Random(200 + seed)
    objs = random_objects(rng, rng.randint(1, 20))
    cfg = HorizonConfig(horizon_len=rng.randint(2, 12))
    rm = ResourceModel(budget=rng.uniform(1, 10) * 256 ** 2, fixed_overhead=20000)
    args = (objs, [128.0 ** 2, 256.0 ** 2, 512.0 ** 2], synthetic_profile(), ResizePolicy(),
            rm, cfg)
    pruned = cgpois(*args).to_json()
    monkeypatch.setattr(sched, "uncertainty_floor", lambda *a: 0.0)
    assert cgpois(*args).to_json() == pruned


# -- schedule validation -----------------------------------------------------

def _valid_schedule():
    objs = [obj(0, 40, 40, 2.0), obj(1, 60, 30, 1.0)]
    return cgpois(objs, SIZES, synthetic_profile(), ResizePolicy(), RM, CFG10)


def test_validate_schedule_accepts_cgpois_output():
    assert validate_schedule(_valid_schedule(), RM, CFG10) == []


def test_validate_schedule_budget_violation():
    size = 256.0 ** 2
    n = RM.canvas_count(size) + 1
    plans = [CanvasPlan(None, size, (k - 1) * 0.1, k, cost=RM.canvas_cost(size))
             for k in range(2, 2 + n)]
    msgs = validate_schedule(Schedule(plans, size, n), RM, CFG10)
    assert any(m.startswith("budget") for m in msgs)


def test_validate_schedule_uniqueness_and_frame_index():
    s = _valid_schedule()
    p = s.plans[0]
    dup = p.layout.placements[0]
    p.layout.placements.append(dup)
    p.frame_index = 1
    msgs = validate_schedule(s, RM, CFG10)
    assert any("more than once" in m for m in msgs)
    assert any("frame index" in m for m in msgs)


def test_validate_schedule_overfull_canvas():
    s = _valid_schedule()
    p = s.plans[0]
    p.areas = {k: v * 1000 for k, v in p.areas.items()}
    assert any("exceeds canvas capacity" in m for m in validate_schedule(s, RM, CFG10))


def test_schedule_json_round_trip():
    s = _valid_schedule()
    back = schedule_from_json(json.loads(json.dumps(s.to_json())))
    assert back.to_json() == json.loads(json.dumps(s.to_json()))
    assert validate_schedule(back, RM, CFG10) == []
