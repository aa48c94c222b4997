"""Inductive construction of nested critical regions for forced circle maps.

The construction tracks, level by level, a union of base intervals together
with two families of boundary curves over each component: the images of the
contracting-interval endpoints under a long forward iteration ("phi" curves)
and the preimages of the expanding-interval endpoints under an equally long
backward iteration ("psi" curves).  Where the thin forward strip crosses the
thin backward strip, the next, smaller level component is cut out.  The
module also evaluates the arithmetic non-return conditions on the driving
frequency, audits orbit occupation times against their guaranteed lower
bounds, and compares measured curve heights and slopes with the closed-form
contraction/expansion bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circle import (TOL, CircleInterval, RegionUnion, ccw_length, centered,
                     circle_dist, mod1)
from .conditions import DerivedConstants, HypothesisReport, Verdict
from .dynamics import _Ops

HORIZON_CAP = 10**7


class NoCrossingError(RuntimeError):
    """The forward and backward strips never meet over a component."""


class MultiCrossingError(RuntimeError):
    """More than one transversal crossing over a single component."""


class TangencyError(RuntimeError):
    """The curve slopes do not separate: crossing is not transversal."""


class EmptyIntersectionError(RuntimeError):
    """The strip overlap has non-positive vertical extent."""


class HorizonExceededError(RuntimeError):
    """An occupation audit ran out of steps before hitting its target."""


# ---------------------------------------------------------------------------
# boundary curves


@dataclass(frozen=True)
class Curve:
    """A sampled fibre curve with derivative accumulators.

    ``x`` holds fibre values reduced mod 1; ``dtheta`` and ``domega`` are
    derivatives of the underlying iterated fibre map with respect to the
    sample angle and the driving frequency (landing angle held fixed);
    ``log_dx`` is the accumulated log fibre derivative along the orbit.
    """

    x: np.ndarray
    dtheta: np.ndarray
    domega: np.ndarray
    log_dx: np.ndarray


@dataclass(frozen=True)
class StripGraphs:
    """The four boundary curves of one component at one level.

    Samples live on ``theta``, a uniform grid over the component shifted by
    one step of the frequency.  ``phi_minus``/``phi_plus`` are the forward
    images of the contracting interval endpoints after ``M`` steps;
    ``psi_minus``/``psi_plus`` the backward images of the expanding interval
    endpoints after ``M`` steps.
    """

    theta: np.ndarray
    phi_minus: Curve
    phi_plus: Curve
    psi_minus: Curve
    psi_plus: Curve
    M: int


def _forward_curve(ops, thetas, x0, omega, m) -> Curve:
    xs, dth, dom, logs = ops.graph_forward(np.asarray(thetas, float), x0,
                                           omega, m)
    return Curve(np.mod(xs, 1.0), dth, dom, logs)


def _backward_curve(ops, thetas, x0, omega, m) -> Curve:
    xs, dth, dom, logs = ops.graph_backward(np.asarray(thetas, float), x0,
                                            omega, m)
    return Curve(np.mod(xs, 1.0), dth, dom, logs)


def sample_grid(interval: CircleInterval, n_samples: int) -> np.ndarray:
    """Uniform closed grid over an interval, as mod-1 angles."""
    offs = np.linspace(0.0, interval.length, n_samples)
    return np.mod(interval.lo + offs, 1.0)


def boundary_graphs(m, interval: CircleInterval, omega: float, M: int,
                    c_lo: float, c_hi: float, e_lo: float, e_hi: float,
                    n_samples: Optional[int] = None) -> StripGraphs:
    """Sample the four boundary curves over ``interval + omega``.

    ``c_lo``/``c_hi`` are the endpoints of the contracting interval (forward
    curves start there, ``M`` steps back along the base), ``e_lo``/``e_hi``
    the endpoints of the expanding interval (backward curves).  ``M = 0``
    gives the base-case convention: constant backward curves and, with the
    forward count clamped to one, a single-step forward image.
    """
    if n_samples is None:
        n_samples = max(1024, math.ceil(10 * interval.length / 1e-4))
    grid = sample_grid(interval.shifted(omega), n_samples)
    ops = _Ops(m)
    m_fwd = max(M, 1)
    c_top = c_lo + ccw_length(c_lo, c_hi)
    e_top = e_lo + ccw_length(e_lo, e_hi)
    return StripGraphs(
        theta=grid,
        phi_minus=_forward_curve(ops, grid, c_lo, omega, m_fwd),
        phi_plus=_forward_curve(ops, grid, c_top, omega, m_fwd),
        psi_minus=_backward_curve(ops, grid, e_lo, omega, M),
        psi_plus=_backward_curve(ops, grid, e_top, omega, M),
        M=M,
    )


def _point_curves(m, theta: float, omega: float, M: int, c_lo: float,
                  c_hi: float, e_lo: float, e_hi: float) -> StripGraphs:
    return boundary_graphs(m, CircleInterval(mod1(theta - omega),
                                             mod1(theta - omega)),
                           omega, M, c_lo, c_hi, e_lo, e_hi, n_samples=1)


# ---------------------------------------------------------------------------
# measured level bounds


@dataclass(frozen=True)
class LevelBounds:
    """Measured geometric quantities of the strips at one level."""

    M: int
    h_phi: float
    H_phi: float
    h_psi: float
    H_psi: float
    l_phi: float
    u_phi: float
    u_psi: float
    gamma_phi: float
    gamma_psi: float
    crossing_sign: int

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("M", "h_phi", "H_phi", "h_psi", "H_psi", "l_phi", "u_phi",
                 "u_psi", "gamma_phi", "gamma_psi", "crossing_sign")}


def _gap(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    """Vertical distance from lower to upper curve, as a small mod-1 gap."""
    return np.mod(upper - lower, 1.0)


def measure_bounds(graphs: StripGraphs) -> LevelBounds:
    """Extract heights, slopes and frequency-sensitivities from samples."""
    hp = _gap(graphs.phi_plus.x, graphs.phi_minus.x)
    hs = _gap(graphs.psi_plus.x, graphs.psi_minus.x)
    sign = 1 if float(np.median(graphs.phi_minus.dtheta)) >= 0.0 else -1
    phi_slopes = np.concatenate([graphs.phi_minus.dtheta,
                                 graphs.phi_plus.dtheta]) * sign
    psi_slopes = np.concatenate([graphs.psi_minus.dtheta,
                                 graphs.psi_plus.dtheta])
    g_phi = max(
        float(np.max(np.abs(graphs.phi_minus.dtheta + graphs.phi_minus.domega))),
        float(np.max(np.abs(graphs.phi_plus.dtheta + graphs.phi_plus.domega))))
    g_psi = max(
        float(np.max(np.abs(graphs.psi_minus.dtheta + graphs.psi_minus.domega))),
        float(np.max(np.abs(graphs.psi_plus.dtheta + graphs.psi_plus.domega))))
    return LevelBounds(
        M=graphs.M,
        h_phi=float(np.min(hp)), H_phi=float(np.max(hp)),
        h_psi=float(np.min(hs)), H_psi=float(np.max(hs)),
        l_phi=float(np.min(phi_slopes)), u_phi=float(np.max(np.abs(phi_slopes))),
        u_psi=float(np.max(np.abs(psi_slopes))),
        gamma_phi=g_phi, gamma_psi=g_psi,
        crossing_sign=sign,
    )


# ---------------------------------------------------------------------------
# strip intersection


@dataclass(frozen=True)
class StripCrossing:
    """One transversal strip crossing: child interval plus sensitivities.

    ``domega_lo``/``domega_hi`` are the frequency derivatives of the child
    endpoints, obtained from the implicit function theorem at the two
    defining curve equalities.
    """

    child: CircleInterval
    domega_lo: float
    domega_hi: float
    separation: float

    @property
    def domega(self) -> float:
        return max(abs(self.domega_lo), abs(self.domega_hi))


def _sign_change_brackets(grid: np.ndarray, diff: np.ndarray):
    """Indices bracketing zeros of the centered difference curve.

    The difference is a continuous circle-valued curve reduced to
    (-1/2, 1/2]; where it passes through the antipode the reduced values
    jump by ~1 between adjacent samples.  Those wrap jumps flip the sign
    without the curves meeting, so brackets with a jump above 1/2 are
    discarded.
    """
    s = np.sign(diff)
    s[s == 0.0] = 1.0
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    return [(i, i + 1) for i in idx
            if abs(float(diff[i + 1] - diff[i])) < 0.5]


def _refine_root(eval_diff, t_lo, t_hi, f_lo, f_hi):
    """Bisection to machine precision on the angle (stops once the bracket
    can no longer shrink); the diff callable is monotone through the unique
    crossing, so plain bisection is safe."""
    for _ in range(200):
        t_mid = 0.5 * (t_lo + t_hi)
        if t_mid <= t_lo or t_mid >= t_hi:
            break
        f_mid = eval_diff(t_mid)
        if f_lo * f_mid <= 0.0:
            t_hi, f_hi = t_mid, f_mid
        else:
            t_lo, f_lo = t_mid, f_mid
    return 0.5 * (t_lo + t_hi)


def intersect_strips(m, interval: CircleInterval, omega: float,
                     graphs: StripGraphs, c_lo: float, c_hi: float,
                     e_lo: float, e_hi: float,
                     min_slope_gap: float = 0.0) -> StripCrossing:
    """Locate the unique crossing of the forward and backward strips.

    Solves, over ``interval + omega``, the two curve equalities that pin the
    child endpoints: top-forward against bottom-backward and bottom-forward
    against top-backward (the matching being fixed by the crossing
    direction).  Returns the child interval, shifted back by one frequency
    step, with implicit-function-theorem frequency derivatives of both
    endpoints.
    """
    grid_t = np.linspace(0.0, interval.length, len(graphs.theta))
    bounds = measure_bounds(graphs)
    sign = bounds.crossing_sign
    M = graphs.M

    def centered_arr(v):
        return np.mod(np.asarray(v) + 0.5, 1.0) - 0.5

    pair_a = (graphs.phi_plus.x, graphs.psi_minus.x)
    pair_b = (graphs.phi_minus.x, graphs.psi_plus.x)
    diff_a = centered_arr(pair_a[0] - pair_a[1])
    diff_b = centered_arr(pair_b[0] - pair_b[1])

    slope_gap = float(np.min(np.abs(
        np.concatenate([graphs.phi_minus.dtheta - graphs.psi_plus.dtheta,
                        graphs.phi_plus.dtheta - graphs.psi_minus.dtheta]))))
    if slope_gap <= max(min_slope_gap, 0.0):
        raise TangencyError(
            f"curve slopes do not separate (min gap {slope_gap:.3e})")

    def point(t):
        return _point_curves(m, mod1(interval.lo + t + omega), omega, M,
                             c_lo, c_hi, e_lo, e_hi)

    roots = []
    for which, dvals in (("a", diff_a), ("b", diff_b)):
        brackets = _sign_change_brackets(grid_t, dvals)
        if len(brackets) == 0:
            raise NoCrossingError(
                f"no sign change for the {which!r} endpoint equation")
        if len(brackets) > 1:
            raise MultiCrossingError(
                f"{len(brackets)} sign changes for the {which!r} endpoint "
                "equation; crossing is not unique")
        i, j = brackets[0]

        def eval_diff(t, which=which):
            g = point(t)
            if which == "a":
                return float(centered_arr(g.phi_plus.x - g.psi_minus.x)[0])
            return float(centered_arr(g.phi_minus.x - g.psi_plus.x)[0])

        t_root = _refine_root(eval_diff, grid_t[i], grid_t[j],
                              float(dvals[i]), float(dvals[j]))
        g = point(t_root)
        if which == "a":
            cu, cv = g.phi_plus, g.psi_minus
        else:
            cu, cv = g.phi_minus, g.psi_plus
        dth = float(cu.dtheta[0] - cv.dtheta[0])
        dom = float(cu.domega[0] - cv.domega[0])
        if abs(dth) < 1e-15:
            raise TangencyError("vanishing slope difference at crossing")
        # d(endpoint)/d(omega) for the endpoint defined through the shifted
        # angle: the shift contributes the extra slope term in the numerator.
        roots.append((t_root, -(dth + dom) / dth))

    (ta, da), (tb, db) = roots
    if tb < ta:
        (ta, da), (tb, db) = (tb, db), (ta, da)
    child = CircleInterval(mod1(interval.lo + ta), mod1(interval.lo + tb))
    return StripCrossing(child=child, domega_lo=da, domega_hi=db,
                         separation=slope_gap)


# ---------------------------------------------------------------------------
# frequency windows and non-return conditions


def _translate_range(region: RegionUnion, omega: float, k_lo: int,
                     k_hi: int) -> RegionUnion:
    """Union of integer frequency translates ``region + k*omega``."""
    if k_hi < k_lo or region.is_empty:
        return RegionUnion(())
    parts = []
    for k in range(k_lo, k_hi + 1):
        shift = mod1(k * omega)
        parts.extend(CircleInterval(mod1(iv.lo + shift), mod1(iv.hi + shift))
                     for iv in region.components)
    return RegionUnion(tuple(parts))


@dataclass(frozen=True)
class FrequencyWindows:
    """Translate unions controlling returns of the base orbit.

    For level ``n`` with regions ``R_0..R_n`` and window lengths
    ``M_0..M_n``:

    - ``X[n]``: translates of ``R_n`` by ``1..2*K_n*M_n`` steps (the
      forward return window of the level-n region),
    - ``Y[n]``: translates of every ``R_j`` by ``-M_j+1..M_j+1`` steps,
    - ``Z[n]``: translates of every ``R_j`` by ``-M_j+2..M_j`` steps,
    - ``V[n]``: translates of every ``R_j`` by ``1..M_j+1`` steps,
    - ``W[n]``: translates of every ``R_j`` by ``-M_j+1..0`` steps.

    Index ``-1`` (empty) is represented by querying level ``n-1`` with
    ``n == 0`` guards in the helpers below.
    """

    omega: float
    K: tuple
    eps: tuple
    X: tuple
    Y: tuple
    Z: tuple
    V: tuple
    W: tuple

    @staticmethod
    def build(regions: Sequence[RegionUnion], M: Sequence[int], omega: float,
              K: Sequence[int], eps: Sequence[float]) -> "FrequencyWindows":
        n_levels = len(regions)
        if not (len(M) >= n_levels and len(K) >= n_levels
                and len(eps) >= n_levels):
            raise ValueError("need M, K, eps for every region level")
        X, Y, Z, V, W = [], [], [], [], []
        for n in range(n_levels):
            X.append(_translate_range(regions[n], omega, 1, 2 * K[n] * M[n]))
            y = z = v = w = RegionUnion(())
            for j in range(n + 1):
                y = y.union(_translate_range(regions[j], omega,
                                             -M[j] + 1, M[j] + 1))
                z = z.union(_translate_range(regions[j], omega,
                                             -M[j] + 2, M[j]))
                v = v.union(_translate_range(regions[j], omega, 1, M[j] + 1))
                w = w.union(_translate_range(regions[j], omega, -M[j] + 1, 0))
            Y.append(y)
            Z.append(z)
            V.append(v)
            W.append(w)
        return FrequencyWindows(omega=omega, K=tuple(K[:n_levels]),
                                eps=tuple(eps[:n_levels]),
                                X=tuple(X), Y=tuple(Y), Z=tuple(Z),
                                V=tuple(V), W=tuple(W))


def check_F_conditions(regions: Sequence[RegionUnion], M: Sequence[int],
                       windows: FrequencyWindows, n: int):
    """Evaluate the two families of non-return margins up to level ``n``.

    Family one requires each level region to stay further than three times
    its tolerance from its own forward-return window; family two requires
    the two extreme translates of each level region (one step before the
    window opens backward, one step after it closes forward) to avoid the
    previous level's full window.  Returns two verdicts carrying the minimal
    margins.
    """
    omega = windows.omega
    m1 = math.inf
    for j in range(n + 1):
        d = regions[j].distance_to(windows.X[j])
        m1 = min(m1, d - 3.0 * windows.eps[j])
    m2 = math.inf
    for j in range(1, n + 1):
        ends = regions[j].translate(-(M[j] - 1), omega).union(
            regions[j].translate(M[j] + 1, omega))
        m2 = min(m2, ends.distance_to(windows.Y[j - 1]))
    v1 = Verdict(name="no_fast_return", passed=bool(m1 > 0.0), margin=m1,
                 witness=None,
                 note=f"min over levels 0..{n} of dist(region, returns) - 3*eps")
    v2 = Verdict(name="window_ends_clear", passed=bool(m2 > 0.0),
                 margin=m2 if m2 < math.inf else math.inf, witness=None,
                 note=("vacuous at level 0" if n == 0 else
                       f"min over levels 1..{n}"))
    return v1, v2


# ---------------------------------------------------------------------------
# occupation audits


@dataclass(frozen=True)
class OccupationAudit:
    """Result of one forward or backward occupation audit.

    ``entry`` is the first hitting time of the target region; ``counts[m]``
    is the number of steps in ``[m, entry)`` spent inside the reference
    interval; ``beta`` the guaranteed occupation fraction.  ``violations``
    lists step indices where an excursion left the allowed window set, and
    ``fraction_ok`` is False where some ``counts[m] < beta*(entry-m)``.
    """

    direction: str
    entry: int
    counts: np.ndarray
    beta: float
    inside_at_entry: bool
    violations: tuple
    fraction_ok: bool

    @property
    def passed(self) -> bool:
        return self.fraction_ok and not self.violations


def _interval_mask(interval: CircleInterval, xs: np.ndarray) -> np.ndarray:
    return np.mod(xs - interval.lo, 1.0) <= interval.length + TOL


def _region_mask(region: RegionUnion, th: np.ndarray) -> np.ndarray:
    out = np.zeros(len(th), dtype=bool)
    for iv in region.components:
        out |= _interval_mask(iv, th)
    return out


def occupation_beta(K: Sequence[int], n: int) -> float:
    """Guaranteed occupation fraction at level ``n``: the product of
    ``1 - 1/K_j`` over previous levels (empty product for level zero)."""
    out = 1.0
    for j in range(n):
        out *= 1.0 - 1.0 / K[j]
    return out


def occupation_audit(m, omega: float, theta0: float, x0: float,
                     regions: Sequence[RegionUnion], windows: FrequencyWindows,
                     n: int, interval: CircleInterval,
                     direction: str = "forward",
                     horizon: int = HORIZON_CAP) -> OccupationAudit:
    """Audit orbit occupation of ``interval`` until the level-n region is hit.

    Forward direction: requires the start angle outside the level ``n-1``
    danger window and the start point inside ``interval`` (the contracting
    interval); iterates until the angle enters the level-n region, checking
    that any step outside ``interval`` happens while the angle sits in the
    level ``n-1`` forward window set, and that the occupation counts meet
    the guaranteed fraction.  Backward direction mirrors this with the
    expanding interval, the backward window set, and entry into the level-n
    region shifted by one frequency step.
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    fwd = direction == "forward"
    danger = windows.Z[n - 1] if n >= 1 else RegionUnion(())
    if danger.contains(theta0):
        raise ValueError("start angle lies in the level n-1 danger window")
    if not interval.contains(mod1(x0)):
        raise ValueError("start point must lie in the reference interval")
    target = regions[n] if fwd else regions[n].translate(1, omega)
    allowed = (windows.V[n - 1] if fwd else windows.W[n - 1]) if n >= 1 \
        else RegionUnion(())
    ops = _Ops(m)
    theta, x = theta0, mod1(x0)
    inside = [np.array([True])]
    thetas = [np.array([theta0])]
    entry = -1
    done = 1
    chunk = 1 << 14
    while done <= horizon:
        count = min(chunk, horizon - done + 1)
        if fwd:
            th, xs = ops.orbit_samples(theta, x, omega, 1, count)
        else:
            th, xs = ops.orbit_samples_backward(theta, x, omega, 1, count)
        hit = _region_mask(target, th)
        stop = int(np.argmax(hit)) if hit.any() else count - 1
        thetas.append(th[:stop + 1])
        inside.append(_interval_mask(interval, xs[:stop + 1]))
        if hit.any():
            entry = done + stop
            break
        done += count
        theta, x = float(th[-1]), float(xs[-1])
    if entry < 0:
        raise HorizonExceededError(
            f"level-{n} region not reached within {horizon} steps")
    inside = np.concatenate(inside)[:entry + 1]
    thetas = np.concatenate(thetas)[:entry + 1]
    out_idx = np.nonzero(~inside[1:])[0] + 1
    violations = tuple(int(k) for k in out_idx
                       if not allowed.contains(float(thetas[k])))
    suffix = np.cumsum(inside[:entry][::-1])[::-1]
    beta = occupation_beta(windows.K, n)
    ms = np.arange(entry)
    fraction_ok = bool(np.all(suffix >= beta * (entry - ms) - 1e-12))
    return OccupationAudit(direction=direction, entry=entry,
                           counts=suffix, beta=beta,
                           inside_at_entry=bool(inside[entry]),
                           violations=violations, fraction_ok=fraction_ok)


# ---------------------------------------------------------------------------
# level-by-level state


@dataclass
class CriticalState:
    """Nested regions built so far, with per-level measurements.

    ``regions[j]`` is the level-j region (all components); ``M[j]`` the
    iteration window used to build level ``j+1`` strips over level ``j``.
    ``graphs[j]`` keeps the level-j strip samples per component, ``bounds``
    the measured geometry, and ``domega`` the per-component endpoint
    frequency-sensitivities of each built child region.
    """

    omega: float
    c_lo: float
    c_hi: float
    e_lo: float
    e_hi: float
    regions: list = field(default_factory=list)
    M: list = field(default_factory=list)
    graphs: list = field(default_factory=list)
    bounds: list = field(default_factory=list)
    domega: list = field(default_factory=list)

    @property
    def level(self) -> int:
        return len(self.regions) - 1

    @property
    def n_components(self) -> int:
        return len(self.regions[0].components)

    def to_json(self) -> str:
        payload = {
            "omega": self.omega,
            "level": self.level,
            "M": list(self.M),
            "regions": [[[iv.lo, iv.hi] for iv in r.components]
                        for r in self.regions],
            "bounds": [[b.as_dict() for b in level] for level in self.bounds],
            "domega": [[c for c in level] for level in self.domega],
        }
        return json.dumps(payload, indent=2)


def build_critical_state(m, report: HypothesisReport, omega: float,
                         M_schedule: Sequence[int],
                         n_samples: Optional[int] = None) -> CriticalState:
    """Run the nested construction for the given window schedule.

    Level zero is the crossing region of the hypothesis report.  For each
    window length in the schedule, the boundary strips are sampled over
    every current component, their unique crossings are located, and the
    children become the next level.  Nesting (exactly one child strictly
    inside each parent) is enforced; any crossing failure propagates.
    """
    C, E = report.C, report.E
    st = CriticalState(omega=omega,
                       c_lo=C.lo, c_hi=C.hi, e_lo=E.lo, e_hi=E.hi,
                       regions=[report.I0])
    for M in M_schedule:
        parents = st.regions[-1].components
        level_graphs, level_bounds, children, level_dom = [], [], [], []
        for iv in parents:
            g = boundary_graphs(m, iv, omega, M, C.lo, C.hi, E.lo, E.hi,
                                n_samples=n_samples)
            cross = intersect_strips(m, iv, omega, g, C.lo, C.hi, E.lo, E.hi)
            child = cross.child
            if not (iv.contains(child.lo) and iv.contains(child.hi)
                    and child.length < iv.length):
                raise RuntimeError("child component escapes its parent")
            level_graphs.append(g)
            level_bounds.append(measure_bounds(g))
            level_dom.append(cross.domega)
            children.append(child)
        st.graphs.append(level_graphs)
        st.bounds.append(level_bounds)
        st.domega.append(level_dom)
        st.M.append(M)
        new_region = RegionUnion(tuple(children))
        if len(new_region.components) != len(parents):
            raise RuntimeError("child components merged; nesting broken")
        st.regions.append(new_region)
    return st


def deep_intersection(m, st: CriticalState, depth: Optional[int] = None):
    """Candidate points in the deepest strip overlap, one per component.

    For each deepest-level component the angle is the midpoint shifted by
    one frequency step; the fibre point is the midpoint of the vertical
    overlap of the forward and backward strips there.
    """
    if depth is None:
        depth = len(st.M) - 1
    if depth < 0 or depth >= len(st.M):
        raise ValueError("depth outside built levels")
    out = []
    M = st.M[depth]
    for iv in st.regions[depth + 1].components:
        theta = mod1(iv.midpoint + st.omega)
        g = _point_curves(m, theta, st.omega, M, st.c_lo, st.c_hi,
                          st.e_lo, st.e_hi)
        ref = float(g.phi_minus.x[0])
        vals = {k: math.fmod(float(getattr(g, k).x[0]) - ref + 1.5, 1.0) - 0.5
                for k in ("phi_minus", "phi_plus", "psi_minus", "psi_plus")}
        lower = max(vals["phi_minus"], vals["psi_minus"])
        upper = min(vals["phi_plus"], vals["psi_plus"])
        if upper <= lower:
            raise EmptyIntersectionError(
                f"strip overlap empty at angle {theta!r}")
        out.append((theta, mod1(ref + 0.5 * (lower + upper))))
    return out


# ---------------------------------------------------------------------------
# bound audits


def _slope_bound_numerator(report: HypothesisReport, derived:
                           DerivedConstants, refined: bool, M0: int,
                           backward: bool) -> float:
    if not refined:
        return report.S
    decay = derived.alpha_plus ** (-M0) if backward else \
        derived.alpha_minus ** M0
    return report.s_prime + decay * report.S


def audit_graph_slopes(st: CriticalState, report: HypothesisReport,
                       derived: DerivedConstants, refined: bool = False,
                       M0: Optional[int] = None, slack: float = 1e-9):
    """Compare measured strip geometry with the closed-form bounds.

    Heights must sit between the pure contraction/expansion rates raised to
    the window length; slopes between the lower crossing slope minus the
    geometric forcing tail and the upper slope plus that tail; the backward
    slope and both frequency-sensitivities below their geometric tails.
    ``refined`` swaps the forcing numerator for its flat-region improvement
    (requires ``M0``).  Returns one verdict per inequality with the worst
    margin over levels and components.
    """
    if refined and M0 is None:
        raise ValueError("refined audits need the flat-window length M0")
    am, ap = derived.alpha_minus, derived.alpha_plus
    lenC = ccw_length(report.C.lo, report.C.hi)
    lenE = ccw_length(report.E.lo, report.E.hi)
    s, S = report.s, report.S
    num_f = _slope_bound_numerator(report, derived, refined, M0 or 0, False)
    num_b = _slope_bound_numerator(report, derived, refined, M0 or 0, True)
    tail_f = num_f / (1.0 / am - 1.0)
    tail_b = num_b / (ap - 1.0)
    g_phi_bound = derived.gamma_refined if refined else None
    r = am

    def agp(r0, start=1):
        # sum of k * r0^k for k >= start
        return (r0 ** start) * (start - (start - 1) * r0) / (1.0 - r0) ** 2

    def geo(r0, start=1):
        return (r0 ** start) / (1.0 - r0)

    if refined:
        gp_bound = (report.s_prime * agp(am) + S * agp(am, M0 + 1))
        gs_bound = (report.s_prime * (agp(1 / ap) + geo(1 / ap))
                    + S * (agp(1 / ap, M0 + 1) + geo(1 / ap, M0 + 1)))
    else:
        gp_bound = S * agp(am)
        gs_bound = S * (agp(1 / ap) + geo(1 / ap))

    worst = {}

    def note_margin(name, margin):
        if name not in worst or margin < worst[name]:
            worst[name] = margin

    for level, level_bounds in enumerate(st.bounds):
        for b in level_bounds:
            M = b.M
            note_margin("height_fwd_upper", lenC * am ** M - b.H_phi)
            note_margin("height_fwd_lower", b.h_phi - lenC * report.alpha_l ** M)
            note_margin("height_bwd_upper", lenE * ap ** (-M) - b.H_psi)
            note_margin("height_bwd_lower", b.h_psi - lenE * report.alpha_u ** (-M))
            note_margin("slope_fwd_lower", b.l_phi - (s - tail_f))
            note_margin("slope_fwd_upper", (S + tail_f) - b.u_phi)
            note_margin("slope_bwd_upper", tail_b - b.u_psi)
            note_margin("freq_sens_fwd", gp_bound - b.gamma_phi)
            note_margin("freq_sens_bwd", gs_bound - b.gamma_psi)
    for level, doms in enumerate(st.domega):
        for d in doms:
            note_margin("endpoint_freq_sens", 0.25 - d)
    for level in range(1, len(st.regions)):
        growth = max(am, 1.0 / ap)
        cap = (2.0 / s) * growth ** (st.M[level - 1])
        for iv in st.regions[level].components:
            note_margin("child_width", cap - iv.length)

    return [Verdict(name=k, passed=bool(v > -slack), margin=float(v))
            for k, v in sorted(worst.items())]


def audit_strip_widths(st: CriticalState, level: int):
    """Two-sided check of each child width against the strip geometry.

    The child of a transversal crossing is at least as wide as the combined
    strip heights divided by the combined slopes, and at most the combined
    heights divided by the worst slope separation.  Returns per-component
    (lower, width, upper) triples.
    """
    out = []
    for b, iv in zip(st.bounds[level], st.regions[level + 1].components):
        lo = (b.h_phi + b.h_psi) / (b.u_phi + b.u_psi)
        hi = (b.H_phi + b.H_psi) / (b.l_phi - b.u_psi)
        out.append((lo, iv.length, hi))
    return out
