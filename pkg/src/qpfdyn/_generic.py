"""Orbit operations driven by map-object callbacks.

Same signatures as the fast kernels but with the map object in place of the
unpacked parameter tuple.  Used for families the compiled kernels do not
cover (pinched profiles with sharpness p != 2).  Single-orbit loops are
plain Python; the per-angle graph evaluations vectorise across the angle
grid with numpy, which keeps them usable at realistic grid sizes.
"""

from __future__ import annotations

import math

import numpy as np


def _mod1(x):
    y = x - math.floor(x)
    if y >= 1.0:
        y = 0.0
    return y


def advance(m, theta, xlift, omega, n):
    for _ in range(n):
        xlift = float(m.lift(theta, xlift))
        theta = _mod1(theta + omega)
    return theta, xlift


def advance_lyap(m, theta, xlift, omega, n):
    s = 0.0
    for _ in range(n):
        s += math.log(float(m.base_dx(xlift)))
        xlift = float(m.lift(theta, xlift))
        theta = _mod1(theta + omega)
    return theta, xlift, s


def advance_backward(m, theta, xlift, omega, n):
    s = 0.0
    for _ in range(n):
        theta = _mod1(theta - omega)
        xlift = float(m.inverse(theta, xlift))
        s -= math.log(float(m.base_dx(xlift)))
    return theta, xlift, s


def lift_series(m, theta, xlift, omega, n):
    out = np.empty(n + 1)
    out[0] = xlift
    for k in range(n):
        xlift = float(m.lift(theta, xlift))
        theta = _mod1(theta + omega)
        out[k + 1] = xlift
    return out


def orbit_samples(m, theta, xlift, omega, burn, count):
    th = np.empty(count)
    xs = np.empty(count)
    for _ in range(burn):
        xlift = float(m.lift(theta, xlift))
        theta = _mod1(theta + omega)
    for k in range(count):
        th[k] = theta
        xs[k] = xlift % 1.0
        xlift = float(m.lift(theta, xlift))
        theta = _mod1(theta + omega)
    return th, xs


def orbit_samples_backward(m, theta, xlift, omega, burn, count):
    th = np.empty(count)
    xs = np.empty(count)
    for _ in range(burn):
        theta = _mod1(theta - omega)
        xlift = float(m.inverse(theta, xlift))
    for k in range(count):
        th[k] = theta
        xs[k] = xlift % 1.0
        theta = _mod1(theta - omega)
        xlift = float(m.inverse(theta, xlift))
    return th, xs


def deriv_orbit(m, theta, xlift, omega, n):
    s = dth = dom = 0.0
    for k in range(n):
        dx = float(m.base_dx(xlift))
        dt = float(m.forcing.dtheta(theta))
        s += math.log(dx)
        dth = dt + dx * dth
        dom = k * dt + dx * dom
        xlift = float(m.lift(theta, xlift))
        theta = _mod1(theta + omega)
    return theta, xlift, s, dth, dom


def graph_forward(m, thetas, x0, omega, mm):
    th = np.mod(np.asarray(thetas, float) - mm * omega, 1.0)
    x = np.full_like(th, float(x0))
    s = np.zeros_like(th)
    dth = np.zeros_like(th)
    dom = np.zeros_like(th)
    for j in range(mm):
        dx = m.base_dx(x)
        dt = m.forcing.dtheta(th)
        s += np.log(dx)
        dth = dt + dx * dth
        dom = -(mm - j) * dt + dx * dom
        x = m.base_lift(x) + m.forcing.value(th)
        th = np.mod(th + omega, 1.0)
    return x, dth, dom, s


def graph_backward(m, thetas, y0, omega, mm):
    th = np.mod(np.asarray(thetas, float) + mm * omega, 1.0)
    x = np.full_like(th, float(y0))
    s = np.zeros_like(th)
    dth = np.zeros_like(th)
    dom = np.zeros_like(th)
    for j in range(1, mm + 1):
        th = np.mod(th - omega, 1.0)
        x = m.base_inverse(x - m.forcing.value(th))
        dx = m.base_dx(x)
        dt = m.forcing.dtheta(th)
        dxi = 1.0 / dx
        dti = -dt * dxi
        s -= np.log(dx)
        dom = (mm - j) * dti + dxi * dom
        dth = dti + dxi * dth
    return x, dth, dom, s


def grid_eval(m, thetas, xs):
    thetas = np.asarray(thetas, float)
    xs = np.asarray(xs, float)
    vals = m.base_lift(xs) + m.forcing.value(thetas)
    dxs = np.broadcast_arrays(m.base_dx(xs), thetas)[0]
    dts = np.broadcast_arrays(m.forcing.dtheta(thetas), xs)[0]
    return np.asarray(vals, float), np.asarray(dxs, float), np.asarray(dts, float)
