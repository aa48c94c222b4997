"""Expansion/contraction hypothesis checking and derived constants.

The machinery downstream (critical-set refinement, frequency exclusion)
rests on a short list of quantitative hypotheses about a fibre family:
an expanding interval E and a contracting interval C with derivative
constants 0 < alpha_l < alpha_c < 1 < alpha_e < alpha_u, a critical angle
region I0 (the N components where the forcing is steep enough to push
orbits across), forcing-slope constants s, S, s' and the region size eps0.
This module measures those constants on grids with a Lipschitz safety
margin, constructs the regions in closed form for the two families that
support it, and evaluates the derived series constants used by the
refinement estimates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from ._generic import grid_eval as _generic_grid_eval
from . import kernels
from .circle import TOL, CircleInterval, RegionUnion, ccw_length, mod1

TWO_PI = 2.0 * math.pi


def _grid_eval(m, thetas, xs):
    ka = m.kernel_args()
    if ka is None:
        return _generic_grid_eval(m, thetas, xs)
    return kernels.grid_eval(*ka, thetas, xs)


@dataclass
class Verdict:
    name: str
    passed: bool
    margin: float
    witness: tuple | None = None
    note: str = ""


@dataclass
class HypothesisReport:
    """Measured constants and per-assumption verdicts for one family."""

    E: CircleInterval
    C: CircleInterval
    I0: RegionUnion
    I0_prime: RegionUnion | None
    alpha_l: float
    alpha_c: float
    alpha_e: float
    alpha_u: float
    S: float
    s: float
    s_prime: float
    eps0: float
    N: int
    verdicts: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def to_json(self) -> str:
        def enc(o):
            if isinstance(o, CircleInterval):
                return {"lo": o.lo, "hi": o.hi}
            if isinstance(o, RegionUnion):
                return [{"lo": c.lo, "hi": c.hi} for c in o]
            if isinstance(o, Verdict):
                return asdict(o)
            raise TypeError(type(o).__name__)

        d = {k: getattr(self, k) for k in (
            "E", "C", "I0", "I0_prime", "alpha_l", "alpha_c", "alpha_e",
            "alpha_u", "S", "s", "s_prime", "eps0", "N", "verdicts", "margins")}
        return json.dumps(d, default=enc, indent=2)


def _set_grid(region, n: int) -> np.ndarray:
    """Sample points covering a CircleInterval or RegionUnion."""
    if isinstance(region, CircleInterval):
        region = RegionUnion([region])
    pts = []
    total = region.measure
    for comp in region:
        k = max(2, int(round(n * comp.length / max(total, 1e-300))))
        pts.append(np.mod(comp.lo + np.linspace(0.0, comp.length, k), 1.0))
    return np.concatenate(pts) if pts else np.empty(0)


def _complement_grid(region: RegionUnion, n: int) -> np.ndarray:
    full = CircleInterval(0.0, 1.0 - TOL)
    return _set_grid(region.complement_within(full), n)


def estimate_bounds(m, E: CircleInterval, C: CircleInterval, I0: RegionUnion,
                    I0_prime: RegionUnion | None = None,
                    n_theta: int = 1024, n_x: int = 1024) -> HypothesisReport:
    """Measure the derivative constants on grids and verdict each hypothesis.

    Grid extrema come with a Lipschitz safety margin (grid step times a
    sampled bound on the next derivative), recorded per constant.  The
    additive-forcing structure of the supported families makes the fibre
    derivative independent of theta and the angle derivative independent
    of x; the grids still cover both axes so the code stays honest for
    future families.
    """
    if E.intersects(C):
        raise ValueError("expanding and contracting intervals must be disjoint")

    theta_grid = np.linspace(0.0, 1.0, n_theta, endpoint=False)
    x_grid = np.linspace(0.0, 1.0, n_x, endpoint=False)
    _, dx_full, dth_full = _grid_eval(m, np.zeros_like(x_grid), x_grid)
    _, _, dth_theta = _grid_eval(m, theta_grid, np.zeros_like(theta_grid))

    # Lipschitz margins from sampled difference quotients
    h_x = 1.0 / n_x
    h_th = 1.0 / n_theta
    lip_dx = float(np.max(np.abs(np.diff(dx_full))) / h_x) if n_x > 1 else 0.0
    lip_dth = float(np.max(np.abs(np.diff(dth_theta))) / h_th) if n_theta > 1 else 0.0
    margin_dx = 0.5 * h_x * lip_dx * h_x  # step * curvature estimate
    margin_dth = 0.5 * h_th * lip_dth * h_th
    margins = {"dx": margin_dx, "dtheta": margin_dth,
               "lipschitz_dx": lip_dx, "lipschitz_dtheta": lip_dth}

    alpha_l = float(np.min(dx_full))
    alpha_u = float(np.max(dx_full))
    xE = _set_grid(E, n_x)
    xC = _set_grid(C, n_x)
    _, dxE, _ = _grid_eval(m, np.zeros_like(xE), xE)
    _, dxC, _ = _grid_eval(m, np.zeros_like(xC), xC)
    alpha_e = float(np.min(dxE))
    alpha_c = float(np.max(dxC))

    S = float(np.max(np.abs(dth_theta)))
    thI0 = _set_grid(I0, n_theta)
    _, _, dthI0 = _grid_eval(m, thI0, np.zeros_like(thI0))
    s = float(np.min(np.abs(dthI0)))
    if I0_prime is not None and len(I0_prime):
        th_out = _complement_grid(I0_prime, n_theta)
        if th_out.size:
            _, _, dth_out = _grid_eval(m, th_out, np.zeros_like(th_out))
            s_prime = float(np.max(np.abs(dth_out)))
        else:
            s_prime = 0.0  # flat region covers the whole circle: vacuous
    else:
        s_prime = S

    eps0 = max(c.length for c in I0)
    verdicts: dict[str, Verdict] = {}

    order_ok = 0.0 < alpha_l < alpha_c < 1.0 < alpha_e < alpha_u
    verdicts["ordering"] = Verdict(
        "ordering", order_ok,
        min(alpha_c - alpha_l, 1.0 - alpha_c, alpha_e - 1.0, alpha_u - alpha_e),
        None if order_ok else (alpha_l, alpha_c, alpha_e, alpha_u))

    # off-critical absorption: f_theta(closure of complement of E) inside C
    th_off = _complement_grid(I0, n_theta)
    x_offE = _complement_grid(RegionUnion([E]), n_x)
    worst = math.inf
    witness = None
    for th in th_off:
        vals, _, _ = _grid_eval(m, np.full_like(x_offE, th), x_offE)
        inside = np.mod(vals - C.lo, 1.0)  # position within C measured ccw
        dist_in = np.minimum(inside, C.length - inside)
        bad = inside > C.length
        if np.any(bad):
            i = int(np.argmax(bad))
            worst = -1.0
            witness = (float(th), float(x_offE[i]))
            break
        local = float(np.min(dist_in))
        if local < worst:
            worst = local
            witness = None
    verdicts["absorption"] = Verdict("absorption", worst > 0.0, worst, witness)

    # unique crossings: f_theta(c+) passes e- exactly once per component
    # (and f_theta(c-) passes e+), counted by sign changes over each arc
    crossings_ok = True
    worst_note = []
    for comp in I0:
        th_c = np.mod(comp.lo + np.linspace(0.0, comp.length, 512), 1.0)
        for x_from, x_to in ((C.hi, E.lo), (C.lo, E.hi)):
            # grid_eval returns lifts, continuous in theta along the arc;
            # count how many representatives x_to + k the image path crosses
            vals, _, _ = _grid_eval(m, th_c, np.full_like(th_c, x_from))
            diff = vals - x_to
            changes = int(math.floor(np.max(diff)) - math.ceil(np.min(diff))) + 1
            changes = max(changes, 0)
            if changes != 1:
                crossings_ok = False
                worst_note.append(
                    f"component [{comp.lo:.6g},{comp.hi:.6g}] from {x_from:.6g}: "
                    f"{changes} crossings")
    verdicts["crossings"] = Verdict(
        "crossings", crossings_ok, 0.0, None, "; ".join(worst_note))

    return HypothesisReport(E, C, I0, I0_prime, alpha_l, alpha_c, alpha_e,
                            alpha_u, S, s, s_prime, eps0, len(I0),
                            verdicts, margins)


def _cos_band_region(lo_val: float, hi_val: float) -> list[CircleInterval]:
    """Angles theta with cos(2 pi theta) in [lo_val, hi_val] (values
    clipped to [-1, 1]); at most two arcs, symmetric about 0 or 1/2."""
    lo_val = max(lo_val, -1.0)
    hi_val = min(hi_val, 1.0)
    if lo_val > hi_val:
        return []
    t_in = math.acos(hi_val) / TWO_PI   # smallest positive angle in the band
    t_out = math.acos(lo_val) / TWO_PI  # largest
    if t_in <= 0.0:
        return [CircleInterval(-t_out, t_out)]
    if t_out >= 0.5:
        return [CircleInterval(t_in, 1.0 - t_in)]
    return [CircleInterval(t_in, t_out), CircleInterval(1.0 - t_out, 1.0 - t_in)]


def choose_regions_pinched(alpha: float, p: float, beta: float, eps: float):
    """Closed-form E, C, I0 for the pinched family with cosine forcing.

    E is a ball around the steep point x = 0 of radius alpha^{-(2p-1)/(2p)};
    C is everything at least eps/2 away from 0 (the fibre maps are strongly
    contracting away from the spike once alpha is large).  I0 collects the
    angles where the forcing value lands within eps of 1/2 mod 1, which for
    beta > 1/2 + eps splits into four arcs.  Returns (E, C, I0, s, S).
    """
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must be in (0, 1/2)")
    if beta <= 0.5:
        raise ValueError("cosine forcing amplitude must exceed 1/2")
    r = alpha ** (-(2.0 * p - 1.0) / (2.0 * p))
    E = CircleInterval(-r, r)
    C = CircleInterval(eps / 2.0, 1.0 - eps / 2.0)
    arcs = []
    # forcing value within eps of +1/2 and of -1/2 (same point mod 1)
    for target in (0.5, -0.5):
        arcs.extend(_cos_band_region((target - eps) / beta, (target + eps) / beta))
    I0 = RegionUnion(arcs)
    c_worst = min((0.5 + eps) / beta, 1.0)
    s = TWO_PI * beta * math.sqrt(max(0.0, 1.0 - c_worst * c_worst))
    S = TWO_PI * beta
    return E, C, I0, s, S


def _arnold_base_inverse(tau: float, a: float, z: float) -> float:
    x, lo, hi = z - tau, z - tau - a, z - tau + a
    for _ in range(100):
        fx = x + tau + a * math.sin(TWO_PI * x) - z
        if fx > 0:
            hi = x
        else:
            lo = x
        if abs(fx) < 1e-15:
            break
        x -= fx / (1.0 + TWO_PI * a * math.cos(TWO_PI * x))
        if x <= lo or x >= hi:
            x = 0.5 * (lo + hi)
    return x


def cospow_slope_three_case(d: int, eps: float, b: float = 1.0):
    """The three closed-form candidates for min |g'| over the steep region,
    where g(theta) = b*cos(2 pi theta)^d and the region is where |g/b| is in
    [eps, 1-eps]: the two region boundaries and the interior slope extremum
    at sin^2(2 pi theta) = 1/d.  Returns (s, candidates dict)."""
    cases = {}
    for name, gval in (("at_eps", eps), ("at_one_minus_eps", 1.0 - eps)):
        c = gval ** (1.0 / d)
        cases[name] = TWO_PI * d * b * gval ** ((d - 1.0) / d) * math.sqrt(
            max(0.0, 1.0 - c * c))
    cases["inflection"] = (TWO_PI * b * math.sqrt(d)
                           * (1.0 - 1.0 / d) ** ((d - 1.0) / 2.0))
    return min(cases.values()), cases


def choose_regions_arnold(tau: float, a: float, d: int, b: float = 1.0,
                          margin: float | None = None):
    """Interval construction for h(x) = x + tau + a sin(2 pi x) with
    cosine-power forcing of odd degree d.

    h expands on an arc around x = 0 and contracts on an arc around
    x = 1/2.  With a safety margin m the expanding interval is chosen so
    the image of its complement lands m inside [1/4, 3/4], and C leaves
    half that margin on each side; the separation parameter eps is then a
    quarter of m.  The steep angle region I0 inverts cos(2 pi theta)^d in
    closed form; I0' consists of balls of radius d^{-1/3} around theta = 0
    and 1/2, outside of which the forcing is uniformly flat.

    Returns (E, C, I0, I0_prime, eps, s, S, s_prime).
    """
    if not 0.0 <= tau < a:
        raise ValueError("need 0 <= tau < a so both fixed-point arcs exist")
    if a > 1.0 / TWO_PI + 1e-15:
        raise ValueError("need a <= 1/(2 pi) for an invertible fibre map")
    if d < 1 or d % 2 == 0:
        raise ValueError("forcing degree d must be odd and positive")
    if margin is None:
        margin = 0.5 * (a - tau)
    if not 0.0 < margin < a - tau + 1e-15:
        raise ValueError("margin must lie in (0, a - tau)")

    e_minus = _arnold_base_inverse(tau, a, 0.75 - margin)
    e_plus = _arnold_base_inverse(tau, a, 0.25 + margin)
    E = CircleInterval(e_minus, e_plus)  # ccw through 0
    C = CircleInterval(0.25 + margin / 2.0, 0.75 - margin / 2.0)
    eps = margin / 4.0

    # angles where |cos(2 pi theta)|^d falls in [eps, 1 - eps], signed: the
    # positive band sits around theta = 0, the negative one around 1/2
    c_lo, c_hi = eps ** (1.0 / d), (1.0 - eps) ** (1.0 / d)
    arcs = _cos_band_region(c_lo, c_hi) + _cos_band_region(-c_hi, -c_lo)
    I0 = RegionUnion(arcs)
    r = d ** (-1.0 / 3.0)
    I0_prime = RegionUnion([CircleInterval(-r, r),
                            CircleInterval(0.5 - r, 0.5 + r)])

    s, _ = cospow_slope_three_case(d, eps, b)
    S = TWO_PI * b * math.sqrt(d) * (1.0 - 1.0 / d) ** ((d - 1.0) / 2.0)
    # off I0' the slope magnitude peaks at the ball boundary (the interior
    # extremum sin^2 = 1/d lies inside the ball for all d >= 2)
    cb = math.cos(TWO_PI * r)
    s_prime = TWO_PI * d * b * abs(cb) ** (d - 1) * abs(math.sin(TWO_PI * r))
    return E, C, I0, I0_prime, eps, s, S, s_prime


@dataclass
class DerivedConstants:
    """Series constants controlling the critical-strip geometry."""

    p: float
    alpha: float
    t: int
    beta_n: list
    beta: float
    alpha_minus: float
    alpha_plus: float
    Scal: float
    gamma: float
    K: list
    Scal_refined: float | None = None
    gamma_refined: float | None = None
    checks: dict = field(default_factory=dict)


def _agp_sum(r: float, start: int = 1) -> float:
    """sum_{k>=start} k r^k in closed form (|r| < 1)."""
    if start == 1:
        return r / (1.0 - r) ** 2
    return r ** start * (start - (start - 1) * r) / (1.0 - r) ** 2


def _geo_sum(r: float, start: int = 1) -> float:
    return r ** start / (1.0 - r)


def derived_constants(report: HypothesisReport, p: float, alpha: float,
                      t: int = 4, M0: int | None = None,
                      levels: int = 8) -> DerivedConstants:
    """Build the series constants from measured bounds.

    K_n = 2^(n+t) N^2; beta is the infinite product of (1 - 1/K_n);
    alpha_minus / alpha_plus interpolate the contraction and expansion
    constants with exponents beta and 1 - beta.  Scal and gamma are the
    slope-budget and accumulated-drift constants; the refined pair uses
    the flat-region slope s' for the first M0 terms of the series.
    """
    if t < 4:
        raise ValueError("need t >= 4")
    N2 = report.N * report.N
    K = [2 ** (n + t) * N2 for n in range(levels)]
    # the infinite product converges fast; extend until the factor is 1-eps
    beta = 1.0
    beta_n = [1.0]
    n = 0
    while True:
        kn = 2 ** (n + t) * N2
        beta *= 1.0 - 1.0 / kn
        if n < levels:
            beta_n.append(beta)
        if 1.0 / kn < 1e-18:
            break
        n += 1
    alpha_minus = report.alpha_c ** beta * report.alpha_u ** (1.0 - beta)
    alpha_plus = report.alpha_e ** beta * report.alpha_l ** (1.0 - beta)
    if alpha_minus >= 1.0 or alpha_plus <= 1.0:
        raise ArithmeticError(
            f"series diverge: alpha_minus={alpha_minus}, alpha_plus={alpha_plus}")

    s, S, sp = report.s, report.S, report.s_prime
    am, ap_inv = alpha_minus, 1.0 / alpha_plus
    Scal = s - S * (1.0 / (1.0 / am - 1.0) + 1.0 / (alpha_plus - 1.0))
    gamma = S * (_agp_sum(am) + _agp_sum(ap_inv) + _geo_sum(ap_inv))

    Scal_r = gamma_r = None
    if M0 is not None:
        Scal_r = s - ((sp + am ** M0 * S) / (1.0 / am - 1.0)
                      + (sp + ap_inv ** M0 * S) / (alpha_plus - 1.0))
        full = _agp_sum(am) + _agp_sum(ap_inv) + _geo_sum(ap_inv)
        tail = (_agp_sum(am, M0 + 1) + _agp_sum(ap_inv, M0 + 1)
                + _geo_sum(ap_inv, M0 + 1))
        gamma_r = sp * full + S * tail

    checks = {
        "Scal_ge_half_s": Scal >= s / 2.0,
        "gamma_le_quarter_Scal": gamma <= Scal / 4.0,
        "K_sum_condition": 2.0 ** (1 - t) / N2 < 1.0 / (6.0 * N2),
    }
    if M0 is not None:
        checks["Scal_refined_ge_half_s"] = Scal_r >= s / 2.0
        checks["gamma_refined_le_quarter"] = gamma_r <= Scal_r / 4.0
    return DerivedConstants(p, alpha, t, beta_n, beta, alpha_minus,
                            alpha_plus, Scal, gamma, K, Scal_r, gamma_r, checks)


def certify_theorem_hypotheses(report: HypothesisReport,
                               derived: DerivedConstants,
                               which: str = "basic",
                               A: float | None = None,
                               d: int | None = None,
                               slack: float = 1.05) -> dict:
    """Verdict on the full hypothesis package.

    The basic check treats the scaling relations alpha_c^{-1} = alpha_e =
    alpha^{2/p} and alpha_l^{-1} = alpha_u = alpha^p as one-sided bounds
    with a slack factor: the measured expansion/contraction must be at
    least alpha^{2/p}/slack strong and the global bounds at most
    slack*alpha^p wild.  The refined check adds the degree scalings
    S < A*d, s > sqrt(d)/A and eps0 < A*d^{-1/3}.
    """
    a_pow_2p = derived.alpha ** (2.0 / derived.p)
    a_pow_p = derived.alpha ** derived.p
    checks = {
        "ordering": report.verdicts.get(
            "ordering", Verdict("ordering", False, 0.0)).passed,
        "expansion_rate": report.alpha_e >= a_pow_2p / slack,
        "contraction_rate": 1.0 / report.alpha_c >= a_pow_2p / slack,
        "global_upper": report.alpha_u <= a_pow_p * slack,
        "global_lower": 1.0 / report.alpha_l <= a_pow_p * slack,
        "Scal": derived.checks.get("Scal_ge_half_s", False),
        "gamma": derived.checks.get("gamma_le_quarter_Scal", False),
        "K_sum": derived.checks.get("K_sum_condition", False),
        "regions": report.all_passed,
    }
    if which == "refined":
        if A is None or d is None:
            raise ValueError("refined certification needs A and d")
        checks["S_bound"] = report.S < A * d
        checks["s_bound"] = report.s > math.sqrt(d) / A
        checks["eps0_bound"] = report.eps0 < A * d ** (-1.0 / 3.0)
        checks["Scal_refined"] = derived.checks.get("Scal_refined_ge_half_s", False)
        checks["gamma_refined"] = derived.checks.get("gamma_refined_le_quarter", False)
    elif which != "basic":
        raise ValueError("which must be 'basic' or 'refined'")
    checks["passed"] = all(v for k, v in checks.items() if k != "passed")
    return checks
