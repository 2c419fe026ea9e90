"""Canvas packing.

Two modes share one entry point:

``general``
    First-fit decreasing-height shelves.  Each item is turned so its longer
    side is horizontal, items are sorted by decreasing height (ties by id)
    and each goes into the lowest shelf with enough width left, opening a
    new shelf on top otherwise.  Sets whose total area is at most half the
    canvas pack in every trial we have thrown at it; next-fit does not
    (see the tests for a three-item counterexample).

``quantized``
    Items and canvas sides are power-of-two multiples of the quantum.  Free
    space is kept as aligned power-of-two rectangles; items are placed
    largest first into the smallest free rectangle that holds them, which is
    halved until it matches the item and the halves go back to the free
    list.  For square items every free rectangle is at least as large as
    the next request, so any set whose total area fits the canvas packs.
    Elongated items carry no such guarantee, and no packer can give one:
    a 4x1 bar and three 2x2 squares have exactly the area of a 4x4 grid
    and still do not fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .core import Rect

GENERAL = "general"
QUANTIZED = "quantized"


class Infeasible(Exception):
    def __init__(self, msg: str, total_area: float = 0.0, canvas_area: float = 0.0):
        super().__init__(msg)
        self.total_area = total_area
        self.canvas_area = canvas_area


@dataclass(frozen=True)
class PackItem:
    id: Hashable
    width: int
    height: int
    rotatable: bool = True

    @property
    def area(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class Placement:
    id: Hashable
    rect: Rect
    rotated: bool = False


@dataclass
class Layout:
    side: int
    placements: list[Placement] = field(default_factory=list)

    @property
    def canvas_area(self) -> int:
        return self.side * self.side

    @property
    def used_area(self) -> float:
        return sum(p.rect.area for p in self.placements)

    def by_id(self) -> dict:
        return {p.id: p for p in self.placements}

    def problems(self) -> list[str]:
        """Geometric soundness check: containment, overlap and uniqueness."""
        out = []
        frame = Rect(0, 0, self.side, self.side)
        seen = set()
        for p in self.placements:
            if p.id in seen:
                out.append(f"object {p.id!r} placed twice")
            seen.add(p.id)
            if not frame.contains(p.rect):
                out.append(f"object {p.id!r} outside canvas: {p.rect.as_tuple()}")
        ps = sorted(self.placements, key=lambda p: p.rect.x_min)
        for i, a in enumerate(ps):
            for b in ps[i + 1:]:
                if b.rect.x_min >= a.rect.x_max:
                    break
                if a.rect.intersection(b.rect) > 0:
                    out.append(f"objects {a.id!r} and {b.id!r} overlap")
        return out


def canvas_side(canvas_area: float, q: int = 1) -> int:
    """Side of the square canvas with the given area, floored to the quantum."""
    side = math.isqrt(int(round(canvas_area)))
    return max((side // q) * q, 0)


def is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _sort_key(item_id):
    # ids may be ints or strings; keep ordering total and deterministic
    return (type(item_id).__name__, item_id)


def _shelf_spots(items: Sequence[PackItem], side: int) -> list[tuple]:
    """Shelf positions as ``(x, y, w, h, id, rotated)`` tuples."""
    oriented = []
    for it in items:
        w, h, rot = it.width, it.height, False
        if it.rotatable and h > w:
            w, h, rot = h, w, True
        if w > side or h > side:
            raise Infeasible(f"item {it.id!r} ({it.width}x{it.height}) exceeds canvas side {side}")
        oriented.append((h, w, _sort_key(it.id), it.id, rot))
    oriented.sort(key=lambda t: (-t[0], t[2]))

    spots = []
    shelves: list[list[int]] = []  # [y, height, used width]
    top = 0
    for h, w, _, oid, rot in oriented:
        for shelf in shelves:
            if shelf[2] + w <= side:
                break
        else:
            if top + h > side:
                raise Infeasible(f"shelves overflow the canvas at item {oid!r}")
            shelf = [top, h, 0]
            shelves.append(shelf)
            top += h
        spots.append((shelf[2], shelf[0], w, h, oid, rot))
        shelf[2] += w
    return spots


def _pack_shelves(items: Sequence[PackItem], side: int) -> Layout:
    return Layout(side, [Placement(oid, Rect.from_size(x, y, w, h), rot)
                         for x, y, w, h, oid, rot in _shelf_spots(items, side)])


def _pack_dyadic(items: Sequence[PackItem], side: int, q: int) -> Layout:
    if side % q or not is_pow2(side // q):
        raise ValueError(f"quantized packing needs a canvas side of q*2^k, got {side}")
    order = []
    for it in items:
        for d in (it.width, it.height):
            if d % q or not is_pow2(d // q):
                raise ValueError(f"item {it.id!r} side {d} is not a power-of-two multiple of {q}")
        if max(it.width, it.height) > side:
            raise Infeasible(f"item {it.id!r} ({it.width}x{it.height}) exceeds canvas side {side}")
        order.append(it)
    order.sort(key=lambda it: (-max(it.width, it.height), -min(it.width, it.height),
                               _sort_key(it.id)))

    free = [(0, 0, side, side)]  # aligned (x, y, w, h), sides powers of two
    layout = Layout(side)
    for it in order:
        shapes = [(it.width, it.height, False)]
        if it.rotatable and it.width != it.height:
            shapes.append((it.height, it.width, True))
        best = None
        for fx, fy, fw, fh in free:
            for w, h, rot in shapes:
                if fw >= w and fh >= h:
                    key = (fw * fh, fy, fx, rot)
                    if best is None or key < best[0]:
                        best = (key, (fx, fy, fw, fh), (w, h, rot))
        if best is None:
            raise Infeasible(f"no free region left for item {it.id!r}")
        _, (fx, fy, fw, fh), (w, h, rot) = best
        free.remove((fx, fy, fw, fh))
        # halve the region until it matches the item, releasing the far halves
        while fw > w:
            fw //= 2
            free.append((fx + fw, fy, fw, fh))
        while fh > h:
            fh //= 2
            free.append((fx, fy + fh, fw, fh))
        layout.placements.append(Placement(it.id, Rect.from_size(fx, fy, w, h), rot))
    return layout


def _check(items: list[PackItem], canvas_area: float, q: int) -> int:
    side = canvas_side(canvas_area, q)
    ids = [it.id for it in items]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate object ids in one canvas")
    total = sum(it.area for it in items)
    if total > side * side:
        raise Infeasible(f"total item area {total} exceeds canvas area {side * side}",
                         total, side * side)
    return side


def pack(items: Iterable[PackItem], canvas_area: float, mode: str = GENERAL,
         q: int = 1) -> Layout:
    items = list(items)
    side = _check(items, canvas_area, q)
    if mode == GENERAL:
        layout = _pack_shelves(items, side)
    elif mode == QUANTIZED:
        layout = _pack_dyadic(items, side, q)
    else:
        raise ValueError(f"unknown packing mode {mode!r}")
    return layout


def can_pack(items: Iterable[PackItem], canvas_area: float, mode: str = GENERAL,
             q: int = 1) -> bool:
    items = list(items)
    try:
        if mode == GENERAL:
            _shelf_spots(items, _check(items, canvas_area, q))
        else:
            pack(items, canvas_area, mode, q)
    except Infeasible:
        return False
    return True
