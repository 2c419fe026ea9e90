"""Small builders shared by several test modules."""

import numpy as np

from canvasched.accuracy import AccuracyProfile
from canvasched.core import Rect
from canvasched.tracking import TrackedObject


def obj(oid, w, h, weight, x=0.0, y=0.0):
    r = Rect.from_size(x, y, w, h)
    return TrackedObject(oid, r, r, float(w * h), importance=1.0, growth=weight)


def flat_profile(value, ratios=(0.25, 0.5, 0.75, 1.0)):
    return AccuracyProfile((0.0,), ratios, np.full((1, len(ratios)), value))


def random_objects(rng, n, frame=1920):
    out = []
    for i in range(n):
        w, h = rng.randint(8, 300), rng.randint(8, 300)
        out.append(obj(i, w, h, rng.uniform(0.1, 20.0), rng.uniform(0, frame), 0.0))
    return out
