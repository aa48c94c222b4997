import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpfdyn.circle import (
    CircleInterval,
    RegionUnion,
    ccw_length,
    centered,
    circle_dist,
    interval_around,
    mod1,
    region_distance,
)

floats01 = st.floats(min_value=0.0, max_value=1.0, exclude_max=True)
lengths = st.floats(min_value=1e-6, max_value=0.45)


def brute_contains(intervals, x, n=0):
    return any(iv.contains(x, tol=1e-12) for iv in intervals)


def test_mod1_basows():
    assert mod1(1.25) == 0.25
    assert mod1(-0.25) == 0.75
    assert mod1(3.0) == 0.0
    assert centered(0.75) == -0.25
    assert centered(0.25) == 0.25


def test_circle_dist_symmetric_and_wrap():
    assert circle_dist(0.1, 0.9) == pytest.approx(0.2)
    assert circle_dist(0.9, 0.1) == pytest.approx(0.2)
    assert ccw_length(0.9, 0.1) == pytest.approx(0.2)
    assert ccw_length(0.1, 0.9) == pytest.approx(0.8)


def test_interval_wrap_contains():
    iv = CircleInterval(0.9, 0.1)
    assert iv.length == pytest.approx(0.2)
    assert iv.contains(0.95) and iv.contains(0.05)
    assert not iv.contains(0.5)
    assert iv.midpoint == pytest.approx(0.0)


def test_interval_distance():
    a = CircleInterval(0.0, 0.1)
    b = CircleInterval(0.2, 0.3)
    assert a.distance_to(b) == pytest.approx(0.1)
    assert b.distance_to(a) == pytest.approx(0.1)
    assert a.distance_to(CircleInterval(0.05, 0.2)) == 0.0
    # nearest approach across the wrap point
    c = CircleInterval(0.9, 0.95)
    assert a.distance_to(c) == pytest.approx(0.05)


@given(st.lists(st.tuples(floats01, lengths), min_size=1, max_size=8))
@settings(max_examples=200, deadline=None)
def test_union_canonical_matches_brute_force(raw):
    intervals = [CircleInterval(lo, mod1(lo + ln)) for lo, ln in raw]
    region = RegionUnion(intervals)
    xs = np.linspace(0.0, 1.0, 1009, endpoint=False)
    for x in xs:
        want = brute_contains(intervals, x)
        got = region.contains(float(x), tol=1e-12)
        if want != got:
            # tolerate disagreement only within merge tolerance of an endpoint
            d = min(
                min(circle_dist(x, iv.lo), circle_dist(x, iv.hi))
                for iv in intervals
            )
            assert d < 1e-9, (x, intervals, region)


@given(st.lists(st.tuples(floats01, lengths), min_size=1, max_size=6))
@settings(max_examples=150, deadline=None)
def test_union_measure_bounds(raw):
    intervals = [CircleInterval(lo, mod1(lo + ln)) for lo, ln in raw]
    region = RegionUnion(intervals)
    assert region.measure <= min(1.0, sum(ln for _, ln in raw)) + 1e-9
    assert region.measure >= max(ln for _, ln in raw) - 1e-9
    # canonical: components sorted and pairwise disjoint
    comps = list(region)
    for a, b in zip(comps, comps[1:]):
        assert a.lo < b.lo
    for i, a in enumerate(comps):
        for b in comps[i + 1:]:
            assert not a.intersects(b, tol=-1e-12)


def test_union_multiwrap_regression():
    # two wrapping components plus a long middle blob must fold into
    # the right cover; a previous canonicalization dropped coverage here
    parts = [
        CircleInterval(0.978, 0.022),
        CircleInterval(0.05, 0.93),
        CircleInterval(0.95, 0.01),
    ]
    region = RegionUnion(parts)
    xs = np.linspace(0.0, 1.0, 200001, endpoint=False)
    bad = 0
    for x in xs:
        if brute_contains(parts, x) != region.contains(float(x), tol=1e-12):
            bad += 1
    assert bad == 0
    assert region.measure == pytest.approx(0.072 + 0.88, abs=1e-12)


def test_union_full_circle():
    region = RegionUnion([CircleInterval(0.0, 0.6), CircleInterval(0.5, 0.1)])
    assert region.measure == pytest.approx(1.0)
    assert region.contains(0.3) and region.contains(0.99)


@given(floats01, lengths, st.integers(min_value=-50, max_value=50))
@settings(max_examples=200, deadline=None)
def test_translate_preserves_measure(lo, ln, k):
    region = RegionUnion([CircleInterval(lo, mod1(lo + ln))])
    omega = 0.38196601125010515
    moved = region.translate(k, omega)
    assert moved.measure == pytest.approx(region.measure, abs=1e-12)
    assert moved.contains(mod1(lo + ln / 2 + k * omega), tol=1e-9)


@given(st.lists(st.tuples(floats01, lengths), min_size=1, max_size=5))
@settings(max_examples=150, deadline=None)
def test_complement_partitions_window(raw):
    intervals = [CircleInterval(lo, mod1(lo + ln)) for lo, ln in raw]
    region = RegionUnion(intervals)
    window = CircleInterval(0.1, 0.9)
    comp = region.complement_within(window)
    # measures of region∩window and complement add up to |window|
    xs = np.linspace(0.101, 0.899, 2003)
    for x in xs:
        in_r = region.contains(float(x), tol=1e-12)
        in_c = comp.contains(float(x), tol=1e-12)
        if in_r == in_c:
            d = min(
                min(circle_dist(x, iv.lo), circle_dist(x, iv.hi))
                for iv in intervals
            )
            assert d < 1e-9


def test_region_distance_and_dilation():
    a = RegionUnion([CircleInterval(0.0, 0.1)])
    b = RegionUnion([CircleInterval(0.3, 0.4)])
    assert region_distance(a, b) == pytest.approx(0.2)
    assert a.dilated(0.05).contains(0.12)
    assert a.dilated(0.05).measure == pytest.approx(0.2)


def test_interval_around():
    iv = interval_around(0.0, 0.1)
    assert iv.contains(0.95) and iv.contains(0.05)
    assert iv.length == pytest.approx(0.2)
