"""Orbit statistics for quasiperiodically forced circle maps.

Everything here works on (angle, lift) pairs: the angle advances by a fixed
irrational omega mod 1 while the fibre coordinate is tracked on the real
line so winding is visible.  The fibred rotation number of an orbit is the
average lift displacement per step; pointwise Lyapunov exponents are time
averages of the log fibre derivative, signed (the fibre maps here are
orientation preserving, so the derivative is positive; the signed value
distinguishes sinks from sources, which an absolute value would hide).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np

from . import _generic, kernels
from .circle import centered, mod1


class _Ops:
    """Uniform front-end over the compiled kernels / generic fallback."""

    def __init__(self, m):
        ka = m.kernel_args()
        if ka is None:
            self._call = lambda name, *a: getattr(_generic, name)(m, *a)
        else:
            self._call = lambda name, *a: getattr(kernels, name)(*ka, *a)

    def __getattr__(self, name):
        return partial(self._call, name)


@dataclass
class OrbitState:
    """Orbit position plus derivative-cocycle accumulators.

    ``dtheta`` is the derivative of the k-step fibre map with respect to the
    starting angle; ``domega`` its derivative with respect to the base
    frequency.  For forward orbits the omega derivative holds the starting
    angle fixed (the angle at step j responds with weight j); for backward
    orbits it holds the landing angle fixed.
    """

    theta: float
    x_lift: float
    k: int = 0
    log_dx: float = 0.0
    dtheta: float = 0.0
    domega: float = 0.0

    @property
    def x(self) -> float:
        return mod1(self.x_lift)


def iterate_forward(m, omega: float, theta0: float, x0: float, n: int) -> OrbitState:
    th, x, s, dth, dom = _Ops(m).deriv_orbit(theta0, x0, omega, n)
    return OrbitState(th, x, n, s, dth, dom)


def iterate_backward(m, omega: float, theta0: float, x0: float, n: int) -> OrbitState:
    """n backward steps from (theta0, x0); lands on the fibre over
    theta0 - n*omega.  log_dx accumulates the log derivative of the inverse
    fibre maps, so it equals minus the forward sum along the same orbit.
    """
    target = np.array([mod1(theta0 - n * omega)])
    xs, dth, dom, s = _Ops(m).graph_backward(target, x0, omega, n)
    return OrbitState(float(target[0]), float(xs[0]), n, float(s[0]),
                      float(dth[0]), float(dom[0]))


def rotation_number(m, omega: float, n: int = 10**6, theta0: float = 0.0,
                    x0: float = 0.0, signed: bool = False,
                    with_error: bool = False):
    """Fibred rotation number estimate (lift_n - lift_0) / n.

    Returned mod 1 by default; ``signed`` reduces to (-1/2, 1/2] instead,
    which is the convenient form near a rotation number of zero.  With
    ``with_error`` the halfway estimate is compared and the difference
    returned alongside.
    """
    ops = _Ops(m)
    reduce = centered if signed else mod1
    if with_error:
        th, xh = ops.advance(theta0, x0, omega, n // 2)
        _, xn = ops.advance(th, xh, omega, n - n // 2)
        est = (xn - x0) / n
        half = (xh - x0) / (n // 2)
        return reduce(est), abs(centered(est - half))
    _, xn = ops.advance(theta0, x0, omega, n)
    return reduce((xn - x0) / n)


def rotation_inside_plateau(m, omega: float, target: float = 0.0,
                            tol_rho: float = 1e-6, n_max: int = 10**6,
                            theta0: float = 0.0, x0: float = 0.0,
                            slack: float = 8.0):
    """Decide whether the fibred rotation number equals ``target``.

    Doubles the orbit length, bailing out early once the running estimate
    sits further from the target than the finite-time error allowance
    ``slack / n`` can explain.  Returns (inside, estimate, steps_used).
    """
    ops = _Ops(m)
    theta, x = theta0, x0
    total = 0
    n = 1 << 10
    while True:
        theta, x = ops.advance(theta, x, omega, n)
        total += n
        est = centered((x - x0) / total - target)
        if abs(est) > max(slack / total, 2.0 * tol_rho):
            return False, est, total
        if total >= n_max:
            return abs(est) <= tol_rho, est, total
        n = min(n * 2, n_max - total)


@dataclass
class TongueBoundary:
    """Mode-locking interval in the parameter steering the rotation number."""

    tau_minus: float
    tau_plus: float
    rho_target: float
    resolved: bool

    @property
    def width(self) -> float:
        return self.tau_plus - self.tau_minus


def _bisect_edge(inside: Callable[[float], bool], p_in: float, p_out: float,
                 tol: float) -> float:
    while abs(p_out - p_in) > tol:
        mid = 0.5 * (p_in + p_out)
        if inside(mid):
            p_in = mid
        else:
            p_out = mid
    return 0.5 * (p_in + p_out)


def tongue_boundary(make_map: Callable[[float], object], omega: float,
                    center: float = 0.0, halfwidth: float = 0.5,
                    rho_target: float = 0.0, tol_tau: float = 1e-5,
                    tol_rho: float = 1e-5, n_max: int = 10**6,
                    theta0: float = 0.0, x0: float = 0.0) -> TongueBoundary:
    """Locate the plateau where the rotation number locks to ``rho_target``.

    ``make_map(tau)`` builds the fibre family at parameter tau; the rotation
    number is assumed nondecreasing in tau.  Points with estimate within
    tol_rho of the target count as on the plateau, so bisection never stalls
    on the flat part.  Edges are bracketed from ``center`` (assumed locked)
    out to ``center +- halfwidth``; ``resolved`` is False when the measured
    width is below 2*tol_tau (collapse finer than the resolution) or the
    center itself fails the plateau test (edges then sit at the center).
    """

    def inside(tau):
        ok, _, _ = rotation_inside_plateau(
            make_map(tau), omega, rho_target, tol_rho, n_max, theta0, x0)
        return ok

    if not inside(center):
        return TongueBoundary(center, center, rho_target, False)
    lo, hi = center - halfwidth, center + halfwidth
    tau_minus = lo if inside(lo) else _bisect_edge(inside, center, lo, tol_tau)
    tau_plus = hi if inside(hi) else _bisect_edge(inside, center, hi, tol_tau)
    resolved = (tau_plus - tau_minus) >= 2.0 * tol_tau
    return TongueBoundary(tau_minus, tau_plus, rho_target, resolved)


@dataclass
class LyapunovEstimate:
    """Finite-window forward/backward derivative exponents of one orbit."""

    forward: float
    backward: float
    window: int
    converged: bool
    history: dict = field(default_factory=dict)


def lyapunov_windows(m, omega: float, theta0: float, x0: float,
                     windows: Sequence[int], direction: str = "forward"):
    """Finite-time exponents over nested orbit lengths, one resumable pass.

    Forward exponents average log Dx f along the forward orbit; backward
    exponents average log Dx f^{-1} along the backward orbit.  Positive
    values in both directions flag orbits repelled both ways in time.
    """
    ops = _Ops(m)
    theta, x = theta0, x0
    total, acc = 0, 0.0
    out = []
    for w in sorted(windows):
        step = w - total
        if direction == "forward":
            theta, x, s = ops.advance_lyap(theta, x, omega, step)
        elif direction == "backward":
            theta, x, s = ops.advance_backward(theta, x, omega, step)
        else:
            raise ValueError("direction must be 'forward' or 'backward'")
        acc += s
        total = w
        out.append(acc / total)
    return out


def lyapunov_pointwise(m, omega: float, theta0: float = 0.0, x0: float = 0.0,
                       n_max: int = 10**5, tol: float = 1e-3) -> LyapunovEstimate:
    """Pointwise exponents at (theta0, x0), with a window-doubling
    convergence flag: converged when the last doubling moved neither
    direction's estimate by more than tol."""
    windows = [n_max // 2, n_max]
    fwd = lyapunov_windows(m, omega, theta0, x0, windows, "forward")
    bwd = lyapunov_windows(m, omega, theta0, x0, windows, "backward")
    converged = abs(fwd[1] - fwd[0]) < tol and abs(bwd[1] - bwd[0]) < tol
    return LyapunovEstimate(fwd[1], bwd[1], n_max, converged,
                            {"forward": fwd, "backward": bwd, "windows": windows})


def graph_lyapunov(m, samples, omega: float | None = None,
                   invariance_tol: float = 1e-6):
    """Average of log Dx f over sampled points of an invariant graph.

    ``samples`` is a pair (thetas, xs).  When ``omega`` is given the
    invariance residual |f_theta(x) - x(theta+omega)| is estimated on
    consecutive samples (which an orbit sample satisfies by construction)
    and a warning flag is returned alongside; otherwise just the average.
    Returns (value, max_residual).
    """
    thetas = np.asarray(samples[0], float)
    xs = np.asarray(samples[1], float)
    vals, dxs, _ = _Ops(m).grid_eval(thetas, xs)
    residual = 0.0
    if omega is not None and len(thetas) > 1:
        consecutive = np.abs(mod1_array(thetas[1:] - thetas[:-1] - omega)) < 1e-9
        diff = np.abs(mod1_array(vals[:-1] - xs[1:]))
        diff = np.minimum(diff, 1.0 - diff)
        if np.any(consecutive):
            residual = float(np.max(diff[consecutive]))
    return float(np.mean(np.log(dxs))), residual


def mod1_array(x):
    y = x - np.floor(x)
    return np.where(y >= 1.0, 0.0, y)


def invariant_graph_exponent(m, omega: float, direction: str = "forward",
                             n: int = 10**6, burn: int = 10**4,
                             theta0: float = 0.0, x0: float = 0.5) -> float:
    """Forward-derivative exponent of the invariant graph reached by long
    iteration in the given time direction: the attractor (forward run,
    negative value) or the repeller (backward run, positive value)."""
    ops = _Ops(m)
    theta, x = theta0, x0
    if direction == "forward":
        if burn:
            theta, x = ops.advance(theta, x, omega, burn)
        _, _, s = ops.advance_lyap(theta, x, omega, n)
        return s / n
    if direction == "backward":
        if burn:
            theta, x, _ = ops.advance_backward(theta, x, omega, burn)
        _, _, s = ops.advance_backward(theta, x, omega, n)
        return -s / n
    raise ValueError("direction must be 'forward' or 'backward'")


def deviation_profile(m, omega: float, theta0: float = 0.0, x0: float = 0.0,
                      n: int = 10**4, rho: float | None = None):
    """Deviations lift_k - x0 - k*rho of the orbit from linear winding.

    When ``rho`` is omitted the end-to-end average of this very orbit is
    used.  Returns (deviations, running_sup_abs), both length n + 1.
    """
    lifts = _Ops(m).lift_series(theta0, x0, omega, n)
    if rho is None:
        rho = (lifts[-1] - lifts[0]) / n
    dev = lifts - x0 - rho * np.arange(n + 1)
    return dev, np.maximum.accumulate(np.abs(dev))


def attractor_sample(m, omega: float, theta0: float = 0.0, x0: float = 0.5,
                     n_transient: int = 10**4, n_keep: int = 10**4):
    """(theta, x mod 1) samples along the forward orbit after a transient."""
    return _Ops(m).orbit_samples(theta0, x0, omega, n_transient, n_keep)


def repeller_sample(m, omega: float, theta0: float = 0.0, x0: float = 0.5,
                    n_transient: int = 10**4, n_keep: int = 10**4):
    """(theta, x mod 1) samples on the backward-time attractor (the
    repeller of the forward map), recorded along a backward orbit."""
    ops = _Ops(m)
    theta, x, _ = ops.advance_backward(theta0, x0, omega, n_transient)
    th = np.empty(n_keep)
    xs = np.empty(n_keep)
    for k in range(n_keep):
        th[k] = theta
        xs[k] = mod1(x)
        theta, x, _ = ops.advance_backward(theta, x, omega, 1)
    return th, xs


def orbit_density(samples, n_bins: int = 32) -> float:
    """Fraction of occupied cells in an n_bins x n_bins grid over the torus."""
    thetas = np.asarray(samples[0], float)
    xs = np.asarray(samples[1], float)
    ti = np.clip((thetas * n_bins).astype(int), 0, n_bins - 1)
    xi = np.clip((xs * n_bins).astype(int), 0, n_bins - 1)
    occupied = np.unique(ti * n_bins + xi).size
    return occupied / float(n_bins * n_bins)


def derivative_accumulators(m, omega: float, theta0: float, x0: float, n: int):
    """n-step fibre derivative data from one pass over the forward orbit.

    Returns (theta_n, lift_n, sum_log_dx, d/dtheta0, d/domega), where the
    omega derivative holds theta0 fixed, so the angle at step k responds
    with weight k.
    """
    return _Ops(m).deriv_orbit(theta0, x0, omega, n)


def sink_source_search(m, omega: float, candidates: Sequence[tuple[float, float]],
                       windows: Sequence[int] = (10**3, 10**4, 10**5),
                       lambda_min: float = 0.0):
    """Keep candidate starts whose orbits expand in both time directions.

    For each (theta0, x0) the finite-time forward and backward exponents
    over every window are computed; a candidate is kept when all of them
    exceed ``lambda_min``.  Returns (hits, all_results) where each result
    dict carries the exponents and the flag.
    """
    results = []
    for theta0, x0 in candidates:
        fwd = lyapunov_windows(m, omega, theta0, x0, windows, "forward")
        bwd = lyapunov_windows(m, omega, theta0, x0, windows, "backward")
        hit = all(v > lambda_min for v in fwd) and all(v > lambda_min for v in bwd)
        results.append({
            "theta0": theta0, "x0": x0,
            "forward": fwd, "backward": bwd, "hit": hit,
        })
    hits = [r for r in results if r["hit"]]
    return hits, results
