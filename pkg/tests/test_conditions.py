import math

import numpy as np
import pytest

from qpfdyn.circle import CircleInterval, RegionUnion
from qpfdyn.maps import GOLDEN_MEAN, build_map
from qpfdyn import conditions as cond

TWO_PI = 2 * math.pi


def test_cospow_three_case_min_vs_fine_grid():
    for d in (11, 41, 161):
        for eps in (0.05, 0.12):
            b = 0.9
            s, cases = cond.cospow_slope_three_case(d, eps, b)

            def masked_min(th):
                g = np.cos(TWO_PI * th) ** d
                mask = (np.abs(g) >= eps) & (np.abs(g) <= 1.0 - eps)
                slope = np.abs(b * d * np.cos(TWO_PI * th) ** (d - 1)
                               * np.sin(TWO_PI * th) * TWO_PI)
                i = int(np.argmin(np.where(mask, slope, np.inf)))
                return float(slope[i]), float(th[i])

            th = np.linspace(0.0, 1.0, 2_000_001)
            grid_min, th_star = masked_min(th)
            # refine locally so grid quantization does not limit the oracle
            h = 1.0 / 2_000_000
            fine = np.linspace(th_star - h, th_star + h, 20_001)
            grid_min = min(grid_min, masked_min(fine)[0])
            assert s == pytest.approx(grid_min, rel=1e-6)
            assert s <= grid_min + 1e-9


def test_choose_regions_arnold_scaling():
    prev_ratio = None
    for d in (41, 161):
        E, C, I0, I0p, eps, s, S, sp = cond.choose_regions_arnold(
            0.05, 0.12, d)
        A = S / math.sqrt(d)  # S = 2 pi b sqrt(d) (1-1/d)^((d-1)/2) ~ A sqrt d
        assert s >= math.sqrt(d) / 10.0  # loose absolute sanity floor
        ratio = sp / s
        if prev_ratio is not None:
            assert ratio < prev_ratio
        prev_ratio = ratio


def test_choose_regions_pinched_constants():
    alpha, p, beta, eps = 1e4, 2.0, 1.0, 0.1
    E, C, I0, s, S = cond.choose_regions_pinched(alpha, p, beta, eps)
    assert S == pytest.approx(TWO_PI * beta)
    # s: min slope where the forcing value is within eps of 1/2:
    # derivative 2 pi b |sin|, cos = (1/2+eps)/b at the worst arc edge
    c = 0.5 + eps
    assert s == pytest.approx(TWO_PI * math.sqrt(1 - c * c), rel=1e-12)
    assert E.length == pytest.approx(2 * alpha ** (-(2 * p - 1) / (2 * p)))
    assert len(I0) == 4


def test_estimate_bounds_pinched_certified():
    alpha = 4000.0
    E, C, I0, s, S = cond.choose_regions_pinched(alpha, 2.0, 1.0, 0.1)
    m = build_map("pinched", dict(alpha=alpha, p=2, b=1.0))
    rep = cond.estimate_bounds(m, E, C, I0)
    assert rep.all_passed, {k: v for k, v in rep.verdicts.items()
                            if not v.passed}
    assert rep.alpha_c < 1.0 < rep.alpha_e
    assert rep.alpha_l <= rep.alpha_c
    assert rep.alpha_u >= rep.alpha_e


def test_estimate_bounds_rejects_overlapping_regions():
    m = build_map("pinched", dict(alpha=100.0, p=2, b=1.0))
    with pytest.raises(ValueError):
        cond.estimate_bounds(m, CircleInterval(0.0, 0.3),
                             CircleInterval(0.2, 0.6),
                             RegionUnion([CircleInterval(0.0, 0.1)]))


def test_agp_and_geo_sums_match_series():
    for r in (0.3, 0.9):
        for start in (1, 4):
            ks = np.arange(start, 4000)
            assert cond._agp_sum(r, start) == pytest.approx(
                float(np.sum(ks * r ** ks)), rel=1e-12)
            assert cond._geo_sum(r, start) == pytest.approx(
                float(np.sum(r ** ks.astype(float))), rel=1e-12)


def _pinched_derived(alpha=4000.0, p_dec=3.0):
    E, C, I0, s, S = cond.choose_regions_pinched(alpha, 2.0, 1.0, 0.1)
    m = build_map("pinched", dict(alpha=alpha, p=2, b=1.0))
    rep = cond.estimate_bounds(m, E, C, I0)
    # decomposition rate: largest alpha with alpha^(2/p) at most the
    # measured expansion and reciprocal contraction
    alpha_star = min(rep.alpha_e, 1.0 / rep.alpha_c) ** (p_dec / 2.0)
    der = cond.derived_constants(rep, p_dec, alpha_star)
    return rep, der


def test_derived_constants_structure():
    rep, der = _pinched_derived()
    assert 0.0 < der.beta < 1.0
    assert der.alpha_minus < 1.0 < der.alpha_plus
    # beta_n is the running product of (1 - 1/K_j), decreasing
    assert all(b1 >= b2 for b1, b2 in zip(der.beta_n, der.beta_n[1:]))
    assert der.K[0] == 2 ** 4 * rep.N ** 2
    # gamma is a sum of positive series terms
    assert der.gamma > 0
    assert der.Scal > 0


def test_certify_pinched_at_4000_passes():
    rep, der = _pinched_derived()
    cert = cond.certify_theorem_hypotheses(rep, der)
    assert cert["passed"], cert


def test_certify_pinched_below_threshold_fails():
    rep, der = _pinched_derived(alpha=2500.0)
    cert = cond.certify_theorem_hypotheses(rep, der)
    assert not cert["passed"]
    assert not cert["gamma"]


def test_refined_slope_budget_tighter_at_large_d():
    # flat-slope refinement must beat the basic budget for steep forcing
    E, C, I0, I0p, eps, s, S, sp = cond.choose_regions_arnold(0.05, 0.12, 161)
    m = build_map("arnold", dict(tau=0.05, a=0.12, b=1.0, d=161))
    rep = cond.estimate_bounds(m, E, C, I0, I0p)
    der = cond.derived_constants(rep, 2.0, 10.0, M0=3)
    assert der.gamma_refined < der.gamma
    assert der.Scal_refined > der.Scal
