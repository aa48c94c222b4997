"""Circle arithmetic on T^1 = R/Z.

Points are plain floats in [0, 1), measured in revolutions.  Intervals are
taken counterclockwise from ``lo`` to ``hi``, so ``[b, a]`` is the complement
of ``(a, b)`` and wraparound intervals are first-class citizens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import math

TOL = 1e-12


def mod1(x: float) -> float:
    """Reduce to [0, 1).  Results that round to exactly 1.0 are clamped to 0."""
    y = x - math.floor(x)
    if y >= 1.0:
        y = 0.0
    return y


def ccw_length(a: float, b: float) -> float:
    """Counterclockwise distance from a to b, in [0, 1)."""
    return mod1(b - a)


def circle_dist(a: float, b: float) -> float:
    """Euclidean distance on the circle, in [0, 1/2]."""
    d = mod1(b - a)
    return min(d, 1.0 - d)


def centered(x: float) -> float:
    """Reduce to the centered fundamental domain (-1/2, 1/2]."""
    y = mod1(x)
    if y > 0.5:
        y -= 1.0
    return y


@dataclass(frozen=True)
class CircleInterval:
    """Closed counterclockwise interval [lo, hi] on the circle."""

    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", mod1(self.lo))
        object.__setattr__(self, "hi", mod1(self.hi))

    @property
    def length(self) -> float:
        return ccw_length(self.lo, self.hi)

    @property
    def midpoint(self) -> float:
        return mod1(self.lo + 0.5 * self.length)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return ccw_length(self.lo, x) <= self.length + tol

    def shifted(self, delta: float) -> "CircleInterval":
        return CircleInterval(self.lo + delta, self.hi + delta)

    def dilated(self, margin: float) -> "CircleInterval":
        if self.length + 2.0 * margin >= 1.0:
            return CircleInterval(0.0, 0.0 - TOL)  # effectively full circle
        return CircleInterval(self.lo - margin, self.hi + margin)

    def distance_to(self, other: "CircleInterval") -> float:
        if self.intersects(other):
            return 0.0
        # gap going ccw from self.hi to other.lo, or from other.hi to self.lo
        return min(ccw_length(self.hi, other.lo), ccw_length(other.hi, self.lo))

    def intersects(self, other: "CircleInterval", tol: float = 0.0) -> bool:
        return (
            self.contains(other.lo, tol)
            or self.contains(other.hi, tol)
            or other.contains(self.lo, tol)
        )

    def __repr__(self):
        return f"[{self.lo:.12g}, {self.hi:.12g}]"


def interval_around(center: float, radius: float) -> CircleInterval:
    return CircleInterval(center - radius, center + radius)


class RegionUnion:
    """Finite union of pairwise-disjoint circle intervals, kept canonical.

    Components are stored sorted by ``lo``; adjacent or overlapping inputs are
    merged on construction and degenerate (zero-length) components dropped
    unless they are the only content.
    """

    __slots__ = ("components",)

    def __init__(self, intervals: Iterable[CircleInterval] = (), merge_tol: float = TOL):
        self.components: tuple[CircleInterval, ...] = _canonicalize(
            list(intervals), merge_tol
        )

    @property
    def is_empty(self) -> bool:
        return not self.components

    @property
    def measure(self) -> float:
        return sum(c.length for c in self.components)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return any(c.contains(x, tol) for c in self.components)

    def translate(self, k: int, omega: float) -> "RegionUnion":
        delta = mod1(k * omega) if k >= 0 else -mod1(-k * omega)
        return RegionUnion(c.shifted(delta) for c in self.components)

    def shifted(self, delta: float) -> "RegionUnion":
        return RegionUnion(c.shifted(delta) for c in self.components)

    def dilated(self, margin: float) -> "RegionUnion":
        return RegionUnion(c.dilated(margin) for c in self.components)

    def union(self, other: "RegionUnion") -> "RegionUnion":
        return RegionUnion(list(self.components) + list(other.components))

    def distance_to(self, other: "RegionUnion") -> float:
        if self.is_empty or other.is_empty:
            raise ValueError("region distance requires nonempty regions")
        return min(
            a.distance_to(b) for a in self.components for b in other.components
        )

    def complement_within(self, window: CircleInterval) -> "RegionUnion":
        """The part of ``window`` not covered by this region."""
        gaps = [window]
        for comp in self.components:
            new_gaps = []
            for gap in gaps:
                new_gaps.extend(_interval_minus(gap, comp))
            gaps = new_gaps
        return RegionUnion(gaps, merge_tol=0.0)

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __repr__(self):
        return "RegionUnion(" + ", ".join(map(repr, self.components)) + ")"

    def approx_equal(self, other: "RegionUnion", tol: float = TOL) -> bool:
        if len(self.components) != len(other.components):
            return False
        return all(
            circle_dist(a.lo, b.lo) <= tol and circle_dist(a.hi, b.hi) <= tol
            for a, b in zip(self.components, other.components)
        )


def region_distance(a: RegionUnion, b: RegionUnion) -> float:
    return a.distance_to(b)


def _canonicalize(
    intervals: Sequence[CircleInterval], merge_tol: float
) -> tuple[CircleInterval, ...]:
    items = list(intervals)
    # drop degenerates only if something else remains
    nondeg = [iv for iv in items if iv.length > 0.0]
    if nondeg:
        items = nondeg
    if not items:
        return ()
    if any(iv.length >= 1.0 - merge_tol for iv in items):
        return (CircleInterval(0.0, 1.0 - TOL),)
    # work in lift coordinates relative to a reference endpoint so the sweep
    # is a plain interval merge; wrap coverage shows up as ends beyond 1
    ref = min(iv.lo for iv in items)
    segs = sorted((ccw_length(ref, iv.lo),
                   ccw_length(ref, iv.lo) + iv.length) for iv in items)
    merged: list[list[float]] = []
    for s, e in segs:
        if merged and s <= merged[-1][1] + merge_tol:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if len(merged) > 1 and merged[-1][1] >= 1.0 - merge_tol:
        # the last run wraps past the reference: fold the excess onto the
        # leading runs and splice them into one wrapping component
        s_last, e_last = merged.pop()
        e_ext = e_last - 1.0
        while merged and merged[0][0] <= e_ext + merge_tol:
            _, e0 = merged.pop(0)
            e_ext = max(e_ext, e0)
        if e_ext + merge_tol >= s_last:
            return (CircleInterval(0.0, 1.0 - TOL),)
        merged.append([s_last, 1.0 + e_ext])
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= 1.0 - merge_tol:
        return (CircleInterval(0.0, 1.0 - TOL),)
    out = [CircleInterval(mod1(ref + s), mod1(ref + e)) for s, e in merged]
    return tuple(sorted(out, key=lambda iv: iv.lo))


def _interval_minus(a: CircleInterval, b: CircleInterval) -> list[CircleInterval]:
    """Set difference a \\ b as a list of at most two intervals.

    Worked in coordinates relative to a.lo, where a is [0, L] and b covers
    [s, s + |b|] (wrapping past 1 back into [0, ...] if needed).
    """
    L = a.length
    s = ccw_length(a.lo, b.lo)
    t = s + b.length
    segs = []
    if s <= L:
        segs.append((s, min(t, L)))
    if t > 1.0:
        segs.append((0.0, min(t - 1.0, L)))
    segs = [(c0, c1) for c0, c1 in segs if c1 > c0]
    if not segs:
        return [a]
    segs.sort()
    gaps = []
    cursor = 0.0
    for c0, c1 in segs:
        if c0 - cursor > TOL:
            gaps.append((cursor, c0))
        cursor = max(cursor, c1)
    if L - cursor > TOL:
        gaps.append((cursor, L))
    return [CircleInterval(a.lo + g0, a.lo + g1) for g0, g1 in gaps]
