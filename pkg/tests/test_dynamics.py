import math

import numpy as np
import pytest

from qpfdyn.maps import GOLDEN_MEAN, ArnoldMap, Forcing, build_map, no_forcing
from qpfdyn import dynamics as dyn

OM = GOLDEN_MEAN
RNG = np.random.default_rng(20260826)


def rigid(tau):
    return ArnoldMap(tau=tau, a=0.0, forcing=no_forcing())


def test_rotation_number_rigid_exact():
    for tau in (0.1, GOLDEN_MEAN, 0.77):
        rho = dyn.rotation_number(rigid(tau), OM, n=10**5)
        assert rho == pytest.approx(tau % 1.0, abs=1e-12)


def test_rotation_number_error_estimate():
    rho, err = dyn.rotation_number(rigid(0.3), OM, n=10**4, with_error=True)
    assert err < 1e-12


def test_rotation_number_start_independent():
    m = build_map("arnold", dict(tau=0.07, a=0.1, b=0.5, d=3))
    n = 10**5
    r1 = dyn.rotation_number(m, OM, n=n, theta0=0.1, x0=0.2)
    r2 = dyn.rotation_number(m, OM, n=n, theta0=0.8, x0=0.9)
    assert abs(r1 - r2) < 10.0 / n


def test_rotation_monotone_in_tau():
    taus = np.linspace(-0.2, 0.2, 64)
    rhos = []
    for tau in taus:
        m = build_map("arnold", dict(tau=float(tau), a=0.1, b=0.5, d=3))
        rhos.append(dyn.rotation_number(m, OM, n=2 * 10**4, signed=True))
    assert np.all(np.diff(rhos) > -1e-6)


def test_unforced_tongue_width():
    def make(tau):
        return ArnoldMap(tau=tau, a=0.1, forcing=no_forcing())

    tb = dyn.tongue_boundary(make, OM, tol_tau=1e-5, tol_rho=1e-5,
                             n_max=10**5)
    assert tb.resolved
    # plateau of rho = 0 is exactly [-a, a]: solvability of tau + a sin = 0
    assert tb.width == pytest.approx(0.2, abs=1e-4)


def test_lyapunov_fixed_point_multipliers():
    # unforced map has fibre fixed points with analytic multipliers
    m = ArnoldMap(tau=0.0, a=0.1, forcing=no_forcing())
    est = dyn.lyapunov_windows(m, OM, 0.3, 0.0, [1000], "forward")[0]
    assert est == pytest.approx(math.log(1 + 2 * math.pi * 0.1), abs=1e-9)
    est = dyn.lyapunov_windows(m, OM, 0.3, 0.5, [1000], "forward")[0]
    assert est == pytest.approx(math.log(1 - 2 * math.pi * 0.1), abs=1e-9)


def test_lyapunov_backward_sign_convention():
    # backward estimate along the backward orbit from a fibre fixed point:
    # log of the inverse derivative, so the attracting point gives the
    # positive value
    m = ArnoldMap(tau=0.0, a=0.1, forcing=no_forcing())
    est = dyn.lyapunov_windows(m, OM, 0.3, 0.5, [1000], "backward")[0]
    assert est == pytest.approx(-math.log(1 - 2 * math.pi * 0.1), abs=1e-9)


def test_cocycle_additivity():
    m = build_map("arnold", dict(tau=0.05, a=0.1, b=0.7, d=3))
    th0, x0 = 0.21, 0.43
    st = dyn.iterate_forward(m, OM, th0, x0, 1000)
    st_a = dyn.iterate_forward(m, OM, th0, x0, 400)
    st_b = dyn.iterate_forward(m, OM, st_a.theta, st_a.x, 600)
    assert st.log_dx == pytest.approx(st_a.log_dx + st_b.log_dx, abs=1e-9)


def test_backward_chain_rule_identity():
    # near-rotation coupling keeps the backward error amplification (at most
    # the product of inverse derivatives) below the tolerance over 100 steps
    m = build_map("arnold", dict(tau=0.05, a=0.02, b=0.1, d=3))
    th0, x0 = 0.21, 0.43
    fwd = dyn.iterate_forward(m, OM, th0, x0, 100)
    bwd = dyn.iterate_backward(m, OM, fwd.theta, fwd.x, 100)
    assert bwd.log_dx == pytest.approx(-fwd.log_dx, abs=1e-8)
    assert bwd.theta == pytest.approx(th0, abs=1e-10)
    assert bwd.x == pytest.approx(x0, abs=1e-7)


def test_derivative_accumulators_vs_fd():
    h = 1e-7
    for family, params in (
        ("arnold", dict(tau=0.05, a=0.1, b=0.7, d=3)),
        ("pinched", dict(alpha=30.0, p=2, b=0.9, d=3)),
        ("cocycle", dict(alpha=20.0, b=0.4, d=5, forcing="sinpow")),
    ):
        m = build_map(family, dict(params))
        for _ in range(5):
            th0 = float(RNG.uniform(0, 1))
            x0 = float(RNG.uniform(0, 1))
            n = int(RNG.integers(5, 60))
            _, _, _, dth, dom = dyn.derivative_accumulators(m, OM, th0, x0, n)
            lp = dyn.iterate_forward(m, OM, th0 + h, x0, n).x
            lm = dyn.iterate_forward(m, OM, th0 - h, x0, n).x
            assert (lp - lm) / (2 * h) == pytest.approx(
                dth, rel=1e-4, abs=1e-4)
            lp = dyn.iterate_forward(m, OM + h, th0, x0, n).x
            lm = dyn.iterate_forward(m, OM - h, th0, x0, n).x
            assert (lp - lm) / (2 * h) == pytest.approx(
                dom, rel=1e-4, abs=1e-4)


def test_deviation_profile_bounded_for_rigid():
    dev, sup = dyn.deviation_profile(rigid(0.3), OM, n=2000)
    assert sup[-1] < 1e-9
    assert len(dev) == 2001


def test_attractor_repeller_and_graph_lyapunov():
    m = build_map("arnold", dict(tau=0.0, a=0.12, b=0.8, d=11))
    att = dyn.attractor_sample(m, OM, n_transient=2000, n_keep=2000)
    rep = dyn.repeller_sample(m, OM, n_transient=2000, n_keep=2000)
    la, res_a = dyn.graph_lyapunov(m, att, OM)
    lr, res_r = dyn.graph_lyapunov(m, rep, OM)
    assert la < 0 < lr
    assert res_a < 1e-9


def test_orbit_density_rigid_is_one_cell_per_column():
    samples = dyn.attractor_sample(rigid(0.0), OM, n_transient=0,
                                   n_keep=20000)
    assert dyn.orbit_density(samples, n_bins=16) == pytest.approx(1.0 / 16)


def test_sink_source_search_identity_rejects():
    m = ArnoldMap(tau=0.0, a=0.0, forcing=no_forcing())
    hits, results = dyn.sink_source_search(
        m, OM, [(0.1, 0.3), (0.5, 0.7)], windows=(10, 100))
    assert hits == []
    assert all(not r["hit"] for r in results)


def test_lyapunov_pointwise_converged_flags():
    m = ArnoldMap(tau=0.0, a=0.1, forcing=no_forcing())
    est = dyn.lyapunov_pointwise(m, OM, 0.3, 0.5, n_max=4096)
    assert est.converged
    assert est.forward == pytest.approx(math.log(1 - 2 * math.pi * 0.1),
                                        abs=1e-6)


def test_rotation_inside_plateau_bails_early():
    inside, est, used = dyn.rotation_inside_plateau(
        rigid(0.2), OM, target=0.0, tol_rho=1e-6, n_max=10**6)
    assert not inside
    assert used < 10**5
