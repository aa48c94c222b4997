"""Frequency-exclusion machinery: schedules, bad sets, window search,
and the iterated survivor construction, checked against closed forms and
brute-force grid oracles."""

import json
import math

import numpy as np
import pytest

from qpfdyn.circle import CircleInterval, RegionUnion, mod1
from qpfdyn.conditions import HypothesisReport
from qpfdyn.exclusion import (
    NoWindowError,
    OmegaPiece,
    ScheduleInfeasibleError,
    bad_set_for_pair,
    bootstrap_omega,
    build_omega,
    build_schedule,
    desk_schedule,
    exclusion_step,
    find_window,
    first_family_bad_set,
    min_alpha_for_growth,
    sigma_chain,
    window_condition,
)

GAMMA = CircleInterval(0.0, 1.0 - 1e-15)


def _report(I0: RegionUnion, s: float) -> HypothesisReport:
    """Minimal report carrying only the fields the scheduler reads."""
    iv = CircleInterval(0.0, 0.1)
    return HypothesisReport(E=iv, C=iv, I0=I0, I0_prime=None,
                            alpha_l=1.0, alpha_c=0.5, alpha_e=2.0,
                            alpha_u=2.0, S=1.0, s=s, s_prime=s,
                            eps0=1e-3, N=100)


# ---------------------------------------------------------------------------
# schedules


def test_desk_schedule_budgets_closed_form():
    sched = desk_schedule(1, N=[2, 8], K=[16, 8], eps=[1e-4, 3e-5])
    u0 = 32.0 * 16 * 2 * 1e-4
    v0 = 4.0 * 16 ** 2 * 2 ** 2
    u1 = 64.0 * 8 * 8 ** 2 * (3e-5 / 1e-4)
    v1 = (8.0 / 1e-4) * 8 ** 2 * 8 ** 3
    assert sched.u == pytest.approx((u0, u1))
    assert sched.v == pytest.approx((v0, v1))
    assert sched.Vprod == pytest.approx((v0, v0 * v1))
    assert sched.sigma == pytest.approx(1.0 - u0 - v0 * u1)
    assert sched.depth == 2
    assert sched.as_dict()["K"] == (16, 8)


def test_min_alpha_for_growth_value():
    # alpha^(N0/16p) > 2 K0 N0 with p=2, N0=3, K0=16 needs
    # alpha > 96^(32/3)
    val = min_alpha_for_growth(2.0, 3.0, 16)
    assert val == pytest.approx(96.0 ** (32.0 / 3.0), rel=1e-12)
    assert val > 1e21


def test_build_schedule_infeasible_rate_reports_minimum():
    rep = _report(RegionUnion((CircleInterval(0.0, 1e-3),)), s=1.0)
    with pytest.raises(ScheduleInfeasibleError) as exc:
        build_schedule(rep, p=2.0, alpha=1e4, t=4)
    assert "smallest" in str(exc.value)


def test_build_schedule_feasible_at_large_rate():
    rep = _report(RegionUnion((CircleInterval(0.0, 1e-6),)), s=0.5)
    sched = build_schedule(rep, p=2.0, alpha=1e30, t=4, cap=1e7)
    assert sched.N[0] == 3.0
    assert sched.N[1] == pytest.approx(1e30 ** (3.0 / 32.0), rel=1e-12)
    assert sched.K[0] == 16 and sched.K[1] == 32
    assert sched.eps[1] == pytest.approx((2.0 / 0.5) * 1e30 ** (-1.5))
    assert 0.0 < sched.sigma < 1.0


def test_build_schedule_refined_start_and_bad_variant():
    rep = _report(RegionUnion((CircleInterval(0.0, 1e-6),)), s=0.5)
    sched = build_schedule(rep, p=2.0, alpha=1e30, variant="refined", d=81)
    assert sched.N[0] == float(math.floor(81 ** 0.25) + 1)
    with pytest.raises(ValueError):
        build_schedule(rep, p=2.0, alpha=1e30, variant="refined")
    with pytest.raises(ValueError):
        build_schedule(rep, p=2.0, alpha=1e30, variant="other")
    with pytest.raises(ValueError):
        build_schedule(rep, p=2.0, alpha=1e30, t=3)


def test_sigma_chain_passes_and_return_budget_closed_form():
    # the level-0 component budget v_1 = 8 K_1^2 N_1^3 / eps_0 must stay
    # below N_1^4, i.e. N_1 = alpha^(N_0/16p) >= 8 K_1^2 / eps_0: with
    # eps_0 = 1e-6 that needs a rate beyond ~1e106
    out = sigma_chain(p=2.0, alpha=1e120, t=4, n_comp=1, s=0.5, eps0=1e-6)
    assert out["passed"]
    assert out["levels"] >= 2
    assert 0.0 < out["sigma_lower"] < 1.0
    assert out["k_sum"] == 2.0 ** (1 - 4)
    assert out["k_sum_ok"]
    for c in out["checks"]:
        assert c["u_next"] and c["v_next"] and c["V"] and c["Vu_next"]


def test_sigma_chain_term_by_term_first_level():
    p, alpha, t, n_comp, s, eps0 = 2.0, 1e30, 4, 2, 0.5, 1e-6
    out = sigma_chain(p=p, alpha=alpha, t=t, n_comp=n_comp, s=s, eps0=eps0)
    # reproduce the level-0 -> 1 comparison from scratch
    n2 = n_comp ** 2
    N0, la = 3.0, math.log(alpha)
    N1 = math.exp((N0 / (16 * p)) * la)
    K1 = 2 ** (1 + t) * n2
    log_eps1 = math.log(2.0 / s) - (N0 / p) * la
    log_u1 = math.log(64.0 * n2) + math.log(K1) + 2 * math.log(N1) \
        + log_eps1 - math.log(eps0)
    bound = (N0 / (4 * p)) * la
    assert out["checks"][0]["u_next"] == (log_u1 <= -3.0 * bound)
    assert out["k_sum"] == 2.0 ** (1 - t) / n2


# ---------------------------------------------------------------------------
# bad sets


def _grid_oracle_bad(I, J, k, eps, n=2003):
    """Grid membership of the closeness condition, by direct translation."""
    om = np.linspace(0.0, 1.0, n, endpoint=False)
    out = np.zeros(n, dtype=bool)
    Jr = RegionUnion((J,))
    for i, w in enumerate(om):
        It = RegionUnion((I,)).translate(k, float(w))
        out[i] = It.distance_to(Jr) < eps
    return om, out


@pytest.mark.parametrize("k", [1, 3, -2, 7])
def test_bad_set_for_pair_matches_grid_oracle(k):
    I = CircleInterval(0.98, 0.01)  # wrapping on purpose
    J = CircleInterval(0.4, 0.45)
    eps = 0.004
    bad = bad_set_for_pair(I, J, k, eps, GAMMA)
    om, oracle = _grid_oracle_bad(I, J, k, eps)
    dis = 0
    for w, expect in zip(om, oracle):
        got = bad.contains(float(w))
        if got != expect:
            # tolerate grid points within one grid step of a boundary
            edges = [iv.lo for iv in bad.components] + \
                [mod1(iv.lo + iv.length) for iv in bad.components]
            margin = min((abs(mod1(w - e)) for e in edges), default=1.0)
            margin = min(margin, 1.0 - margin)
            if margin > 2e-3:
                dis += 1
    assert dis == 0
    # component widths never exceed the closed-form cap
    cap = (I.length + J.length + 2 * eps) / abs(k) + 1e-12
    assert all(iv.length <= cap for iv in bad.components)


def test_bad_set_for_pair_degenerate_cases():
    I = CircleInterval(0.0, 0.4)
    with pytest.raises(ValueError):
        bad_set_for_pair(I, I, 0, 0.1, GAMMA)
    # combined width at least one: everything is bad
    wide = bad_set_for_pair(I, I, 2, 0.2, GAMMA)
    assert wide.measure == pytest.approx(GAMMA.length)


def test_bad_set_for_pair_point_intervals_exact():
    # point sets at distance delta: k*omega must land within eps of delta
    I = CircleInterval(0.1, 0.1)
    J = CircleInterval(0.35, 0.35)
    eps = 1e-3
    bad = bad_set_for_pair(I, J, 5, eps, GAMMA)
    assert len(bad.components) == 5
    assert bad.measure == pytest.approx(5 * (2 * eps / 5), rel=1e-9)
    for iv in bad.components:
        mid = iv.midpoint
        assert mod1(5 * mid - 0.25 + 0.5) == pytest.approx(0.5, abs=1e-9)


def test_first_family_bad_set_matches_brute_force():
    region = RegionUnion((CircleInterval(0.0, 0.02),
                          CircleInterval(0.5, 0.53)))
    K, M, eps = 2, 2, 1e-3
    bad = first_family_bad_set(region, K, M, eps, GAMMA)
    rng = np.random.default_rng(7)
    for w in rng.uniform(0.0, 1.0, 400):
        w = float(w)
        hit = any(region.translate(k, w).distance_to(region) < 3 * eps
                  for k in range(1, 2 * K * M + 1))
        if hit != bad.contains(w):
            # boundary tolerance
            margin = min(min(abs(mod1(w - iv.lo)), abs(mod1(iv.lo +
                         iv.length - w))) for iv in bad.components)
            assert margin < 1e-9
    # dilation grows the measure
    dil = first_family_bad_set(region, K, M, eps, GAMMA, dilation=1e-4)
    assert dil.measure > bad.measure


# ---------------------------------------------------------------------------
# window search


def test_window_condition_vacuous_and_margin_sign():
    region = RegionUnion((CircleInterval(0.0, 0.01),))
    assert window_condition(region, None, 0.3, 5, 1e-3) == math.inf
    assert window_condition(region, RegionUnion(), 0.3, 5, 1e-3) == math.inf
    # previous windows covering everything: margin is -eps
    full = RegionUnion((GAMMA,))
    assert window_condition(region, full, 0.3, 5, 1e-3) < 0.0


def test_find_window_smallest_admissible():
    # previous window set = a point at 0; region = point at 0; translates
    # by M+1 or -(M-1) times omega must clear it by more than eps.
    pt = RegionUnion((CircleInterval(0.0, 0.0),))
    omega = 0.1
    eps = 1e-6
    # M=10 puts the forward end (M+1)*omega = 1.1 = 0.1 away, the backward
    # end -(M-1)*omega = -0.9 = 0.1 away: admissible; M=9 puts the forward
    # end exactly at 0: inadmissible.
    M = find_window(pt, pt, omega, N_lo=9.0, eps=eps)
    assert M == 10
    with pytest.raises(NoWindowError):
        find_window(pt, pt, 0.0, N_lo=3.0, eps=eps)


# ---------------------------------------------------------------------------
# survivor construction (toy, frequency-independent regions)

I0 = RegionUnion((CircleInterval(-0.005, 0.005),))
I1 = RegionUnion((CircleInterval(-0.0008, 0.0008),))
TOY = desk_schedule(1, N=[2, 8], K=[16, 8], eps=[1e-4, 3e-5])


def _toy_regions(_omega, level):
    return (I0, I1)[level]


@pytest.fixture(scope="module")
def toy_omega():
    return build_omega(_toy_regions, TOY, depth=1, split_len=5e-4)


def test_bootstrap_level_zero_golden_and_brute_force(toy_omega):
    om0 = toy_omega[0]
    assert om0.level == 0
    assert om0.count == 966
    assert om0.measure == pytest.approx(0.204388, abs=2e-6)
    # direct re-derivation: omega survives iff the base region clears its
    # first 2*K0*M0 translates by more than 3*eps0
    rng = np.random.default_rng(11)
    bad_checks = 0
    for w in rng.uniform(0.0, 1.0, 500):
        w = float(w)
        good = all(I0.translate(k, w).distance_to(I0) >= 3 * TOY.eps[0]
                   for k in range(1, 2 * TOY.K[0] * 2 + 1))
        if good != om0.contains(w):
            bad_checks += 1
    assert bad_checks == 0


def test_level_one_golden_and_nesting(toy_omega):
    om0, om1 = toy_omega
    assert om1.level == 1
    assert om1.count == 2144
    assert om1.measure == pytest.approx(0.139954, abs=2e-6)
    assert om1.measure < om0.measure
    # every survivor lies inside a level-0 piece and carries history (2, M)
    for piece in om1.pieces:
        assert om0.contains(piece.interval.midpoint)
        assert len(piece.history) == 2
        assert piece.history[0] == 2
        assert 8 <= piece.history[1] < 16


def test_omega_set_json_and_history(toy_omega):
    om1 = toy_omega[1]
    blob = json.loads(om1.to_json())
    assert blob["level"] == 1 and blob["count"] == om1.count
    assert blob["measure"] == pytest.approx(om1.measure)
    w = om1.pieces[0].interval.midpoint
    assert om1.history_for(w) == om1.pieces[0].history
    assert om1.history_for(mod1(w + 0.5)) is None or \
        om1.contains(mod1(w + 0.5))


def test_exclusion_step_measure_accounting(toy_omega):
    piece = toy_omega[0].pieces[0]
    kept, excluded = exclusion_step(_toy_regions, TOY, piece, 0,
                                    split_len=5e-4)
    total = sum(p.interval.length for p in kept) + excluded
    assert total == pytest.approx(piece.interval.length, abs=1e-12)


def test_build_omega_depth_guard():
    with pytest.raises(ValueError):
        build_omega(_toy_regions, TOY, depth=2)
