"""Frequency exclusion: carving out the good-frequency set level by level.

A schedule fixes, per level, the window-length range, the return-count
budget and the distance tolerance.  The exclusion machinery then removes,
from an interval of candidate frequencies, the subset whose base rotation
returns the critical region to itself too fast (the first non-return
family), assigning each surviving subinterval the window length found for
it.  Bad sets are computed in closed form per translate index, with region
endpoints frozen at each subinterval midpoint and the result dilated by the
worst-case endpoint drift.

Measure bookkeeping follows the per-level budgets: u bounds the measure
removed at a level, v the factor by which the component count can grow, and
sigma the guaranteed surviving measure.  The theorem-scale schedule is only
float-representable for two or three levels; it is materialized exactly as
far as window lengths fit in floating point, with all comparisons done in
logarithms where needed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .circle import CircleInterval, RegionUnion, ccw_length, mod1
from .conditions import HypothesisReport

DOMEGA_BOUND = 0.25


class ScheduleInfeasibleError(RuntimeError):
    """A structural schedule constraint fails at some materialized level."""


class NoWindowError(RuntimeError):
    """No admissible window length exists in the prescribed range."""


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class Schedule:
    """Per-level window ranges, return budgets, tolerances, and measure
    budgets.

    ``N[n]`` is the lower end of the level-n window-length range (windows
    are sought in ``[N[n], 2 N[n])``), ``K[n]`` the return-count budget,
    ``eps[n]`` the distance tolerance.  ``u[n]`` bounds the measure excluded
    when refining level n-1 to level n, ``v[n]`` the component
    multiplication factor, ``Vprod[n]`` the cumulative component budget, and
    ``sigma`` the guaranteed surviving measure.
    """

    p: float
    alpha: float
    t: int
    n_comp: int
    N: tuple
    K: tuple
    eps: tuple
    u: tuple
    v: tuple
    Vprod: tuple
    sigma: float

    @property
    def depth(self) -> int:
        return len(self.N)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("p", "alpha", "t", "n_comp", "N", "K", "eps", "u", "v",
                 "Vprod", "sigma")}


def _budget_sequences(n_comp: int, N: Sequence[float], K: Sequence[int],
                      eps: Sequence[float]):
    """The measure/count budgets determined by (N, K, eps).

    Level zero: u = 32 n² K N eps and v = 4 n² K² N²; afterwards
    u = 64 n² K N² eps_next/eps_prev and v = (8/eps_prev) n² K² N³,
    with n the component count of the base region.
    """
    n2 = n_comp * n_comp
    u = [32.0 * n2 * K[0] * N[0] * eps[0]]
    v = [4.0 * n2 * K[0] ** 2 * N[0] ** 2]
    for n in range(1, len(N)):
        u.append(64.0 * n2 * K[n] * N[n] ** 2 * eps[n] / eps[n - 1])
        v.append((8.0 / eps[n - 1]) * n2 * K[n] ** 2 * N[n] ** 3)
    Vprod = []
    acc = 1.0
    for vn in v:
        acc *= vn
        Vprod.append(acc)
    sigma = 1.0 - u[0]
    for n in range(1, len(N)):
        sigma -= Vprod[n - 1] * u[n]
    return tuple(u), tuple(v), tuple(Vprod), sigma


def _check_structure(N, K, eps, n_comp, t):
    if N[0] < 3:
        raise ScheduleInfeasibleError("first window length below 3")
    for n in range(len(N) - 1):
        if not N[n + 1] > 2 * K[n] * N[n]:
            raise ScheduleInfeasibleError(
                f"window growth fails at level {n}: "
                f"{N[n + 1]} <= 2*{K[n]}*{N[n]}")
        if not eps[n] >= 3.0 * eps[n + 1]:
            raise ScheduleInfeasibleError(
                f"tolerance decay fails at level {n}: "
                f"{eps[n]} < 3*{eps[n + 1]}")
    # total return budget: sum of 1/K[j] over all levels (closed form
    # 2^(1-t)/n² for the geometric choice) must stay below 1/(6 n²)
    if sum(1.0 / k for k in K) >= 1.0 / (6.0 * n_comp * n_comp):
        raise ScheduleInfeasibleError("return budgets sum too large")


def desk_schedule(n_comp: int, N: Sequence[float], K: Sequence[int],
                  eps: Sequence[float], p: float = 2.0,
                  alpha: float = float("nan"), t: int = 4,
                  strict: bool = False) -> Schedule:
    """Schedule from user-chosen small sequences.

    ``strict`` additionally enforces the structural growth/decay
    constraints; without it only the budgets are computed (toy runs may use
    gentler sequences than the theorem demands).
    """
    if strict:
        _check_structure(N, K, eps, n_comp, t)
    u, v, Vp, sigma = _budget_sequences(n_comp, N, K, eps)
    return Schedule(p=p, alpha=alpha, t=t, n_comp=n_comp, N=tuple(N),
                    K=tuple(K), eps=tuple(eps), u=u, v=v, Vprod=Vp,
                    sigma=sigma)


def min_alpha_for_growth(p: float, N0: float, K0: int) -> float:
    """Smallest contraction rate for which the second window-length range
    clears the level-zero growth requirement (alpha^(N0/16p) > 2 K0 N0)."""
    return (2.0 * K0 * N0) ** (16.0 * p / N0)


def build_schedule(report: HypothesisReport, p: float, alpha: float,
                   t: int = 4, variant: str = "basic",
                   d: Optional[int] = None,
                   cap: float = 1e7) -> Schedule:
    """Materialize the theorem schedule for the given rates.

    Window lengths start at 3 (or just above the fourth root of the forcing
    degree for the refined variant) and grow by N -> alpha^(N/16p); return
    budgets double per level starting at 2^t n²; tolerances are
    eps_0 = the largest crossing-region component and afterwards
    (2/s) alpha^(-N_prev/p).  Materialization stops once a window length
    exceeds ``cap``.  Structural constraint violations raise, with the
    minimal feasible rate reported for the growth constraint.
    """
    if t < 4:
        raise ValueError("return-budget exponent must be at least 4")
    n_comp = len(report.I0.components)
    if variant == "refined":
        if d is None:
            raise ValueError("refined schedule needs the forcing degree")
        N0 = float(math.floor(d ** 0.25) + 1)
    elif variant == "basic":
        N0 = 3.0
    else:
        raise ValueError("variant must be 'basic' or 'refined'")
    eps0 = max(iv.length for iv in report.I0.components)
    N = [N0]
    K = [2 ** t * n_comp * n_comp]
    eps = [eps0]
    while True:
        # compare in logs: the next length overflows float64 long before
        # any reasonable cap rejects it
        log_nxt = (N[-1] / (16.0 * p)) * math.log(alpha)
        if log_nxt > math.log(cap):
            break
        nxt = math.exp(log_nxt)
        if nxt <= 2 * K[-1] * N[-1]:
            # the window lengths stop growing: the rate is too small for
            # the growth constraint, so materializing further is pointless
            break
        n = len(N)
        N.append(nxt)
        K.append(2 ** (n + t) * n_comp * n_comp)
        eps.append((2.0 / report.s) * alpha ** (-N[n - 1] / p))
    if len(N) == 1:
        # the growth constraint can never be met if even the second level
        # overflows nothing: still validate it against the cap-free value
        nxt = alpha ** (N0 / (16.0 * p))
        if not nxt > 2 * K[0] * N0:
            raise ScheduleInfeasibleError(
                "window growth fails at level 0; smallest feasible rate is "
                f"{min_alpha_for_growth(p, N0, K[0]):.6g}")
    try:
        _check_structure(N, K, eps, n_comp, t)
    except ScheduleInfeasibleError as exc:
        raise ScheduleInfeasibleError(
            f"{exc}; smallest rate clearing the level-0 growth constraint "
            f"is {min_alpha_for_growth(p, N0, K[0]):.6g}") from exc
    u, v, Vp, sigma = _budget_sequences(n_comp, N, K, eps)
    return Schedule(p=p, alpha=alpha, t=t, n_comp=n_comp, N=tuple(N),
                    K=tuple(K), eps=tuple(eps), u=u, v=v, Vprod=Vp,
                    sigma=sigma)


def sigma_chain(p: float, alpha: float, t: int, n_comp: int, s: float,
                eps0: float, N0: float = 3.0, max_levels: int = 64) -> dict:
    """Term-by-term verification of the surviving-measure chain in logs.

    Materializes window lengths as long as they fit in floating point and
    checks, per level transition, the four closed-form comparisons

    - u_{n+1} <= alpha^(-3 N_n / 4p),
    - v_{n+1} <= alpha^(N_n / 4p),
    - V_n = prod v_i <= alpha^(N_n / 4p),
    - V_n u_{n+1} <= alpha^(-N_n / 4p),

    plus the final lower bound sigma >= 1 - u_0 - sum alpha^(-N_n/4p).
    All quantities are compared as natural logarithms, so the chain is
    verifiable even when the magnitudes themselves overflow.
    """
    la = math.log(alpha)
    n2 = n_comp * n_comp
    N = [N0]
    while len(N) < max_levels:
        log_next = (N[-1] / (16.0 * p)) * la
        if log_next > 700.0:
            break
        N.append(math.exp(log_next))
    levels = len(N)
    logK = [math.log(2 ** 0) + (n + t) * math.log(2.0) + math.log(n2)
            for n in range(levels)]
    log_eps = [math.log(eps0)]
    for n in range(1, levels):
        log_eps.append(math.log(2.0 / s) - (N[n - 1] / p) * la)
    u0 = 32.0 * n2 * (2 ** t * n2) * N0 * eps0
    log_u = [math.log(u0)]
    log_v = [math.log(4.0 * n2) + 2 * logK[0] + 2 * math.log(N0)]
    for n in range(1, levels):
        log_u.append(math.log(64.0 * n2) + logK[n] + 2 * math.log(N[n])
                     + log_eps[n] - log_eps[n - 1])
        log_v.append(math.log(8.0 * n2) - log_eps[n - 1] + 2 * logK[n]
                     + 3 * math.log(N[n]))
    log_V = np.cumsum(log_v)
    checks = []
    tail = 0.0
    for n in range(levels - 1):
        bound = (N[n] / (4.0 * p)) * la
        checks.append({
            "level": n,
            "u_next": log_u[n + 1] <= -3.0 * bound,
            "v_next": log_v[n + 1] <= bound,
            "V": float(log_V[n]) <= bound,
            "Vu_next": float(log_V[n]) + log_u[n + 1] <= -bound,
        })
        tail += math.exp(-bound) if bound < 700.0 else 0.0
    sigma_lower = 1.0 - u0 - tail
    passed = all(all(c[k] for k in ("u_next", "v_next", "V", "Vu_next"))
                 for c in checks)
    # total return budget in closed form: sum 1/K_j = 2^(1-t)/n_comp^2
    k_sum = 2.0 ** (1 - t) / n2
    return {
        "levels": levels,
        "checks": checks,
        "sigma_lower": sigma_lower,
        "u0": u0,
        "k_sum": k_sum,
        "k_sum_ok": k_sum < 1.0 / (6.0 * n2),
        "passed": passed and sigma_lower > 0.0,
    }


# ---------------------------------------------------------------------------
# bad sets


def bad_set_for_pair(I: CircleInterval, J: CircleInterval, k: int,
                     eps: float, Gamma: CircleInterval) -> RegionUnion:
    """Frequencies in ``Gamma`` for which ``I + k*omega`` comes within
    ``eps`` of ``J``; exact, one interval of length at most
    (|I|+|J|+2 eps)/|k| per wrap of ``k*omega`` across ``Gamma``."""
    if k == 0:
        raise ValueError("translate index must be nonzero")
    width = I.length + J.length + 2.0 * eps
    if width >= 1.0:
        return RegionUnion((Gamma,))
    # closeness of I + k w to J means k w lies in a fixed arc:
    # k w in (J.lo - I.hi - eps, J.hi - I.lo + eps) mod 1
    a0 = mod1(J.lo - (I.lo + I.length) - eps)
    kk = abs(k)
    if k < 0:
        # (-k) w in the mirrored arc
        a0 = mod1(-a0 - width)
    g0 = Gamma.lo
    g1 = g0 + Gamma.length
    lo_m = math.floor(kk * g0 - a0 - width)
    hi_m = math.ceil(kk * g1 - a0)
    parts = []
    for mshift in range(lo_m, hi_m + 1):
        w_lo = (a0 + mshift) / kk
        w_hi = (a0 + width + mshift) / kk
        lo = max(w_lo, g0)
        hi = min(w_hi, g1)
        if hi > lo:
            parts.append(CircleInterval(mod1(lo), mod1(hi)))
    return RegionUnion(tuple(parts))


def first_family_bad_set(region: RegionUnion, K: int, M: int, eps: float,
                         Gamma: CircleInterval,
                         dilation: float = 0.0) -> RegionUnion:
    """Frequencies in ``Gamma`` violating the level non-return condition.

    The condition requires every translate ``region + k*omega`` for
    k = 1 .. 2*K*M to stay further than 3*eps from ``region``; the bad set
    is the union over component pairs and translate indices, optionally
    dilated to absorb endpoint drift of a frequency-dependent region."""
    parts = []
    comps = region.components
    for k in range(1, 2 * K * M + 1):
        for I in comps:
            for J in comps:
                b = bad_set_for_pair(I, J, k, 3.0 * eps, Gamma)
                if dilation > 0.0 and not b.is_empty:
                    b = b.dilated(dilation)
                parts.extend(b.components)
    return RegionUnion(tuple(parts))


# ---------------------------------------------------------------------------
# window search


def window_condition(region: RegionUnion, Y_prev: Optional[RegionUnion],
                     omega: float, M: int, eps: float) -> float:
    """Margin of the window-placement condition for a candidate length.

    The two extreme translates of ``region`` (one step before the backward
    window opens, one step past the forward window) must clear the previous
    level's full window set by more than ``eps``.  Positive margin means
    admissible; an empty previous window set is vacuously admissible."""
    if Y_prev is None or Y_prev.is_empty:
        return math.inf
    ends = region.translate(-(M - 1), omega).union(
        region.translate(M + 1, omega))
    return ends.distance_to(Y_prev) - eps


def find_window(region: RegionUnion, Y_prev: Optional[RegionUnion],
                omega: float, N_lo: float, eps: float) -> int:
    """Smallest admissible window length in ``[N_lo, 2 N_lo)``."""
    start = math.ceil(N_lo)
    for M in range(start, math.ceil(2 * N_lo)):
        if M < 2:
            continue
        if window_condition(region, Y_prev, omega, M, eps) > 0.0:
            return M
    raise NoWindowError(
        f"no admissible window length in [{N_lo}, {2 * N_lo})")


# ---------------------------------------------------------------------------
# omega-set bookkeeping


@dataclass(frozen=True)
class OmegaPiece:
    interval: CircleInterval
    history: tuple  # window length per level, 0 .. level


@dataclass(frozen=True)
class OmegaSet:
    """Surviving frequencies at one level, with window-length histories."""

    level: int
    pieces: tuple

    @property
    def measure(self) -> float:
        return sum(p.interval.length for p in self.pieces)

    @property
    def count(self) -> int:
        return len(self.pieces)

    def contains(self, omega: float) -> bool:
        return any(p.interval.contains(omega) for p in self.pieces)

    def history_for(self, omega: float):
        for p in self.pieces:
            if p.interval.contains(omega):
                return p.history
        return None

    def to_json(self) -> str:
        return json.dumps({
            "level": self.level,
            "measure": self.measure,
            "count": self.count,
            "pieces": [{"lo": p.interval.lo, "hi": p.interval.hi,
                        "M": list(p.history)} for p in self.pieces],
        }, indent=2)


def _subtract(Gamma: CircleInterval, bad: RegionUnion):
    """Connected components of ``Gamma`` minus a region."""
    if bad.is_empty:
        return [Gamma]
    return list(bad.complement_within(Gamma).components)


def bootstrap_omega(region_fn: Callable[[float, int], RegionUnion],
                    schedule: Schedule,
                    Gamma: Optional[CircleInterval] = None,
                    domega_bound: float = 0.0,
                    pieces_cap: float = 2e-5) -> OmegaSet:
    """Level-0 good set: frequencies whose base region clears its own first
    translates.  The window length is the bottom of the level-0 range
    (nothing constrains it yet).  For frequency-dependent regions, pass a
    positive ``domega_bound``: ``Gamma`` is then subdivided to
    ``pieces_cap``, the region frozen at each midpoint, and bad sets
    dilated by the bound times the subinterval length."""
    if Gamma is None:
        Gamma = CircleInterval(0.0, 1.0 - 1e-15)
    M0 = max(2, math.ceil(schedule.N[0]))
    K0, eps0 = schedule.K[0], schedule.eps[0]
    if domega_bound > 0.0:
        cells = _split_interval(Gamma, max(pieces_cap, 1e-6))
    else:
        cells = [Gamma]
    pieces = []
    for piece in cells:
        mid = piece.midpoint
        region = region_fn(mid, 0)
        drift = domega_bound * piece.length
        bad = first_family_bad_set(region, K0, M0, eps0, piece,
                                   dilation=drift)
        for beta in _subtract(piece, bad):
            pieces.append(OmegaPiece(beta, (M0,)))
    return OmegaSet(level=0, pieces=tuple(_merge_pieces(pieces)))


def _split_interval(Gamma: CircleInterval, max_len: float):
    n = max(1, math.ceil(Gamma.length / max_len))
    step = Gamma.length / n
    return [CircleInterval(mod1(Gamma.lo + i * step),
                           mod1(Gamma.lo + (i + 1) * step))
            for i in range(n)]


def _merge_pieces(pieces):
    """Coalesce abutting surviving pieces with identical histories."""
    out = []
    for p in sorted(pieces, key=lambda q: q.interval.lo):
        if out and out[-1].history == p.history and \
                abs(mod1(out[-1].interval.lo + out[-1].interval.length)
                    - p.interval.lo) < 1e-12:
            prev = out.pop()
            out.append(OmegaPiece(
                CircleInterval(prev.interval.lo,
                               mod1(prev.interval.lo + prev.interval.length
                                    + p.interval.length)),
                prev.history))
        else:
            out.append(p)
    return out


def _windows_Y(region_levels, M_hist, omega: float) -> RegionUnion:
    """Full window set of all levels built so far: every level's region
    translated through its whole (backward-extended) window range."""
    parts = []
    for region, M in zip(region_levels, M_hist):
        for k in range(-M + 1, M + 2):
            parts.extend(region.translate(k, omega).components)
    return RegionUnion(tuple(parts))


def exclusion_step(region_fn: Callable[[float, int], RegionUnion],
                   schedule: Schedule, piece: OmegaPiece, n: int,
                   domega_bound: float = 0.0,
                   split_len: Optional[float] = None):
    """Refine one surviving frequency interval from level n to level n+1.

    Subdivides the interval into pieces no longer than two thirds of the
    level-n tolerance per next-level window length, freezes the regions at
    each midpoint, searches the window length, removes the closed-form bad
    set of the next-level non-return condition (dilated by the endpoint
    drift bound), and returns the surviving sub-pieces with extended
    histories plus the excluded measure."""
    eps_n, eps_next = schedule.eps[n], schedule.eps[n + 1]
    N_next = schedule.N[n + 1]
    K_next = schedule.K[n + 1]
    # default subdivision length makes midpoint freezing valid for drifting
    # regions; frequency-independent regions may pass a coarser override
    max_len = split_len if split_len is not None \
        else 2.0 * eps_n / (3.0 * N_next)
    survivors = []
    excluded = 0.0
    for Gamma in _split_interval(piece.interval, max_len):
        mid = Gamma.midpoint
        regions = [region_fn(mid, j) for j in range(n + 2)]
        Y_prev = _windows_Y(regions[:n + 1], piece.history, mid)
        try:
            M = find_window(regions[n + 1], Y_prev, mid, N_next, eps_n)
        except NoWindowError:
            excluded += Gamma.length
            continue
        drift = domega_bound * Gamma.length
        bad = first_family_bad_set(regions[n + 1], K_next, M, eps_next,
                                   Gamma, dilation=drift)
        kept = _subtract(Gamma, bad)
        excluded += Gamma.length - sum(iv.length for iv in kept)
        survivors.extend(OmegaPiece(iv, piece.history + (M,))
                         for iv in kept)
    return survivors, excluded


def build_omega(region_fn: Callable[[float, int], RegionUnion],
                schedule: Schedule, depth: int,
                Gamma: Optional[CircleInterval] = None,
                domega_bound: float = 0.0,
                bootstrap_cap: float = 2e-5,
                split_len: Optional[float] = None) -> list:
    """Iterate the exclusion to ``depth`` levels; returns all OmegaSets.

    ``region_fn(omega, level)`` supplies the level regions (frequency
    dependence allowed; pass ``domega_bound`` to account for it via
    freezing and dilation).  Level 0 is the bootstrap; each further level
    refines every surviving piece."""
    if depth >= schedule.depth:
        raise ValueError("depth exceeds materialized schedule")
    out = [bootstrap_omega(region_fn, schedule, Gamma, domega_bound,
                           bootstrap_cap)]
    for n in range(depth):
        survivors = []
        for piece in out[-1].pieces:
            kept, _ = exclusion_step(region_fn, schedule, piece, n,
                                     domega_bound, split_len)
            survivors.extend(kept)
        out.append(OmegaSet(level=n + 1,
                            pieces=tuple(_merge_pieces(survivors))))
    return out
