"""Accuracy-degradation profiles and the incremental efficiency terms.

A profile is a table ``A[size_bin, ratio]`` of expected detection accuracy
when an object whose native area falls in ``size_bin`` is downscaled by
``ratio`` before inference.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

TOL = 1e-12


class UnknownRatio(KeyError):
    pass


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class AccuracyProfile:
    size_bins: tuple[float, ...]
    ratios: tuple[float, ...]
    table: np.ndarray  # shape (len(size_bins), len(ratios))

    def __post_init__(self):
        object.__setattr__(self, "size_bins", tuple(float(s) for s in self.size_bins))
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        table = np.array(self.table, dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        if table.shape != (len(self.size_bins), len(self.ratios)):
            raise ProfileError(f"table shape {table.shape} does not match "
                               f"{len(self.size_bins)} bins x {len(self.ratios)} ratios")
        if not self.size_bins or not self.ratios:
            raise ProfileError("profile needs at least one size bin and one ratio")
        if any(b <= a for a, b in zip(self.size_bins, self.size_bins[1:])):
            raise ProfileError("size bins must be strictly increasing")
        if any(b <= a for a, b in zip(self.ratios, self.ratios[1:])):
            raise ProfileError("ratios must be strictly increasing")
        if any(not 0 < r <= 1 for r in self.ratios):
            raise ProfileError("ratios must lie in (0, 1]")
        if np.any(table < 0) or np.any(table > 1) or not np.all(np.isfinite(table)):
            raise ProfileError("accuracies must lie in [0, 1]")

    def ratio_index(self, ratio: float) -> int:
        for j, r in enumerate(self.ratios):
            if math.isclose(r, ratio, rel_tol=0, abs_tol=1e-9):
                return j
        raise UnknownRatio(ratio)

    def bin_index(self, size: float) -> int:
        # round down to the enclosing bin, clamp at both ends
        return max(bisect.bisect_right(self.size_bins, size) - 1, 0)

    def to_json(self) -> dict:
        return {"size_bins": list(self.size_bins), "ratios": list(self.ratios),
                "table": [float(v) for v in self.table.ravel()]}

    @classmethod
    def from_json(cls, data: dict) -> "AccuracyProfile":
        try:
            bins, ratios, flat = data["size_bins"], data["ratios"], data["table"]
        except KeyError as exc:
            raise ProfileError(f"profile missing field {exc}") from None
        flat = np.asarray(flat, dtype=float)
        if flat.ndim == 1:
            if flat.size != len(bins) * len(ratios):
                raise ProfileError("row-major table has the wrong number of entries")
            flat = flat.reshape(len(bins), len(ratios))
        return cls(tuple(bins), tuple(ratios), flat)


def load_profile(path: str | Path) -> AccuracyProfile:
    """Read a JSON profile; structural and range errors raise ProfileError."""
    with open(path) as fh:
        return AccuracyProfile.from_json(json.load(fh))


def save_profile(p: AccuracyProfile, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(p.to_json(), fh, indent=2)


def lookup(p: AccuracyProfile, size: float, ratio: float) -> float:
    if not 0 < ratio <= 1:
        raise UnknownRatio(ratio)
    return float(p.table[p.bin_index(size), p.ratio_index(ratio)])


@dataclass(frozen=True)
class Violation:
    kind: str  # "monotonicity" | "concavity" | "size-order"
    bin_index: int
    ratio_index: int
    detail: str = ""


def validate_profile(p: AccuracyProfile, anchor_origin: bool = False) -> list[Violation]:
    """Return every cell where the profile breaks its shape assumptions.

    Concavity is checked on slopes w.r.t. the ratio values so unevenly
    spaced ratio grids are handled; on an even grid this is the plain
    second difference.  With ``anchor_origin`` the curve is also pinned at
    ``A(0) = 0`` (no pixels, no detection), so the first segment from the
    origin must be the steepest.  An empty list means the profile is valid.
    """
    out: list[Violation] = []
    A = p.table
    if anchor_origin:
        r = np.concatenate([[0.0], p.ratios])
    else:
        r = np.asarray(p.ratios)
    for b in range(A.shape[0]):
        row = A[b]
        for j in range(1, len(row)):
            if row[j] < row[j - 1] - TOL:
                out.append(Violation("monotonicity", b, j, f"{row[j - 1]} -> {row[j]}"))
        pts = np.concatenate([[0.0], row]) if anchor_origin else row
        slopes = np.diff(pts) / np.diff(r)
        # slopes[i] is the segment ending at point i + 1; report the ratio index
        shift = 0 if anchor_origin else 1
        for i in range(1, len(slopes)):
            if slopes[i] > slopes[i - 1] + 1e-9:
                out.append(Violation("concavity", b, i + shift,
                                     f"slope {slopes[i - 1]:.6g} -> {slopes[i]:.6g}"))
        if b > 0:
            for j in range(len(row)):
                if row[j] < A[b - 1, j] - TOL:
                    out.append(Violation("size-order", b, j, f"{A[b - 1, j]} -> {row[j]}"))
    return out


def synthetic_profile(size_bins: Sequence[float] | None = None,
                      ratios: Sequence[float] = (0.25, 0.5, 0.75, 1.0),
                      acc_max: float = 0.95, k: float = 3.0,
                      s_ref: float = 48.0) -> AccuracyProfile:
    """Stand-in profile ``A(s, r) = acc_max * (1 - exp(-k * r * sqrt(s) / s_ref))``.

    Increasing and concave in ``r``; larger objects saturate sooner.
    """
    if size_bins is None:
        size_bins = [float(s * s) for s in (8, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384)]
    table = np.empty((len(size_bins), len(ratios)))
    for b, s in enumerate(size_bins):
        for j, rr in enumerate(ratios):
            table[b, j] = acc_max * (1.0 - math.exp(-k * rr * math.sqrt(s) / s_ref))
    return AccuracyProfile(tuple(size_bins), tuple(ratios), np.clip(table, 0.0, 1.0))


@dataclass(frozen=True)
class SizeLadder:
    """Admissible allocated sizes for one object, smallest first."""

    areas: tuple[float, ...]
    accuracies: tuple[float, ...]
    ratios: tuple[float, ...]
    dims: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not (len(self.areas) == len(self.accuracies) == len(self.ratios)):
            raise ValueError("ladder fields must have equal length")
        if any(b <= a for a, b in zip(self.areas, self.areas[1:])):
            raise ValueError("ladder areas must be strictly increasing")

    def __len__(self) -> int:
        return len(self.areas)

    @property
    def a_min(self) -> float:
        return self.areas[0]

    def level_of(self, area: float) -> int:
        return self.areas.index(area)


@dataclass(frozen=True)
class EfficiencyEntry:
    obj: Hashable
    level: int  # index into the object's ladder
    area: float  # a'
    gain: float  # A*
    inc_area: float  # E*
    efficiency: float  # G


def efficiency_terms(ladder: SizeLadder, w: float, level: int,
                     weighted: bool = True, obj: Hashable = None) -> EfficiencyEntry:
    """Incremental gain ``A*``, incremental area ``E*`` and efficiency ``G``.

    At the base level the increments are measured from zero; above it they
    are measured from the level immediately below.  ``weighted=False`` drops
    the object weight from ``G``.
    """
    if not 0 <= level < len(ladder):
        raise IndexError(level)
    if level == 0:
        gain, inc = ladder.accuracies[0], ladder.areas[0]
    else:
        gain = ladder.accuracies[level] - ladder.accuracies[level - 1]
        inc = ladder.areas[level] - ladder.areas[level - 1]
    g = gain / inc
    return EfficiencyEntry(obj, level, ladder.areas[level], gain, inc, w * g if weighted else g)


def efficiency_entries(obj: Hashable, ladder: SizeLadder, w: float,
                       weighted: bool = True) -> list[EfficiencyEntry]:
    return [efficiency_terms(ladder, w, lvl, weighted, obj) for lvl in range(len(ladder))]
