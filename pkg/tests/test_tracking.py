import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canvasched.core import Rect, iou
from canvasched.tracking import (DegenerateTrack, EmptyMotion, ExpansionRecord, MotionEstimate,
                                 TrackedObject, ZeroAccuracy, associate, expand_region,
                                 growth_rate, predict_box, uncertainty)


def test_predict_box_median():
    b = Rect(10, 0, 20, 5)
    assert predict_box(b, MotionEstimate((1, 3, 2), (0, 0, 0))) == Rect(12, 0, 22, 5)
    assert predict_box(b, MotionEstimate((1, 1, 100), (0, 0, 0))).x_min == 11
    assert predict_box(b, MotionEstimate.uniform(0, 0, 4)) == b


def test_expand_region_extrema():
    m = MotionEstimate((-1, 2, 0), (0, 1, 1))
    assert expand_region(Rect(10, 10, 20, 20), m) == Rect(9, 10, 22, 21)
    r = expand_region(Rect(0, 0, 4, 4), MotionEstimate.uniform(5, 0, 3))
    assert r == Rect(5, 0, 9, 4)


def test_empty_motion_raises():
    with pytest.raises(EmptyMotion):
        predict_box(Rect(0, 0, 1, 1), MotionEstimate((), ()))
    with pytest.raises(EmptyMotion):
        expand_region(Rect(0, 0, 1, 1), MotionEstimate((), ()))


samples = st.lists(st.tuples(st.floats(-20, 20), st.floats(-20, 20)), min_size=1, max_size=30)


@given(samples)
def test_prediction_inside_expansion(s):
    m = MotionEstimate([a for a, _ in s], [b for _, b in s])
    b = Rect(0, 0, 10, 10)
    assert expand_region(b, m).contains(predict_box(b, m))


def test_associate_examples():
    boxes = [Rect(0, 0, 10, 10), Rect(50, 50, 60, 60)]
    assert associate(boxes, boxes) == {0: 0, 1: 1}
    crossed = [Rect(49, 50, 59, 60), Rect(1, 0, 11, 10)]
    assert associate(boxes, crossed) == {0: 1, 1: 0}
    assert associate(boxes, [Rect(200, 200, 210, 210)]) == {}
    assert associate([], boxes) == {}


def _brute(tracks, dets, floor):
    """Max-cardinality, then min-cost matching by enumeration."""
    best = (0, 0.0, {})
    n, m = len(tracks), len(dets)
    for k in range(min(n, m), 0, -1):
        for ts in itertools.combinations(range(n), k):
            for ds in itertools.permutations(range(m), k):
                ious = [iou(tracks[t], dets[d]) for t, d in zip(ts, ds)]
                if min(ious) < floor:
                    continue
                cost = sum(1 - v for v in ious)
                if k > best[0] or (k == best[0] and cost < best[1] - 1e-12):
                    best = (k, cost, dict(zip(ts, ds)))
        if best[0] == k:
            break
    return best


box = st.builds(lambda x, y, w, h: Rect(x, y, x + w, y + h),
                st.integers(0, 30), st.integers(0, 30), st.integers(1, 20), st.integers(1, 20))


@settings(max_examples=150, deadline=None)
@given(st.lists(box, max_size=5), st.lists(box, max_size=5), st.sampled_from([0.1, 0.3, 0.5]))
def test_associate_matches_brute_force(tracks, dets, floor):
    got = associate(tracks, dets, floor)
    assert len(set(got.values())) == len(got)
    assert all(iou(tracks[t], dets[d]) >= floor for t, d in got.items())
    k, cost, _ = _brute(tracks, dets, floor)
    assert len(got) == k
    assert sum(1 - iou(tracks[t], dets[d]) for t, d in got.items()) == pytest.approx(cost)


def test_growth_rate_examples():
    assert growth_rate(ExpansionRecord(100, 100, 0.419)) == pytest.approx(1 / 0.419, abs=1e-12)
    assert growth_rate(ExpansionRecord(400, 100, 0.4)) == pytest.approx(5.0, abs=1e-12)
    assert growth_rate(ExpansionRecord(100, 400, 1.0)) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(DegenerateTrack):
        growth_rate(ExpansionRecord(100, 0, 1.0))
    with pytest.raises(DegenerateTrack):
        growth_rate(ExpansionRecord(100, 10, 0.0))


@given(st.floats(1, 1e6), st.floats(1, 1e6), st.floats(0.01, 10))
def test_growth_rate_scale_invariant(ecr, full, k):
    a = growth_rate(ExpansionRecord(ecr, full, 0.4))
    assert growth_rate(ExpansionRecord(ecr * k, full * k, 0.4)) == pytest.approx(a, rel=1e-9)


def _obj(v, u, t_i, acc):
    return TrackedObject(1, Rect(0, 0, 1, 1), Rect(0, 0, 1, 1), 1.0, importance=v, growth=u,
                         last_inspect=t_i, last_accuracy=acc)


def test_uncertainty_examples():
    assert uncertainty(_obj(1, 2, 3.0, 0.8), 3.0) == 0.0
    assert uncertainty(_obj(1, 2, 1.0, 0.8), 1.5) == pytest.approx(1.25, abs=1e-12)
    assert uncertainty(_obj(2, 2, 1.0, 0.8), 1.5) == pytest.approx(2.5, abs=1e-12)
    with pytest.raises(ZeroAccuracy):
        uncertainty(_obj(1, 1, 0, 0.0), 1.0)
    with pytest.raises(ValueError):
        uncertainty(_obj(1, 1, 2.0, 1.0), 1.0)


@given(st.floats(0, 10), st.floats(0, 5), st.floats(0.01, 1))
def test_uncertainty_monotone_in_time(w, dt, acc):
    o = _obj(1, w, 0.0, acc)
    assert uncertainty(o, dt) <= uncertainty(o, dt + 0.5)
    assert math.isclose(uncertainty(o, 0.0), 0.0)
