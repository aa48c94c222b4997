"""Pure-Python fallback for the compiled orbit kernels.

Mirrors the public API of ``_kernels_c`` exactly (same family / forcing
codes, same return values) so ``qpfdyn.kernels`` can pick either at import
time.  Orders of magnitude slower on long orbits; intended for platforms
where the extension fails to build, and as a reference implementation for
the benchmark suite.
"""

from __future__ import annotations

import math

import numpy as np

PI = math.pi
TWO_PI = 2.0 * math.pi


def _mod1(x):
    y = x - math.floor(x)
    if y >= 1.0:
        y = 0.0
    return y


def _ipow(b, d):
    r = 1.0
    while d > 0:
        if d & 1:
            r *= b
        b *= b
        d >>= 1
    return r


def _signed_pow(b, d):
    if b < 0.0:
        return -_ipow(-b, d)
    return _ipow(b, d)


def _forcing(kind, d, amp, theta):
    if kind == 0:
        return amp * _signed_pow(math.cos(TWO_PI * theta), d)
    if kind == 1:
        return amp * math.cos(TWO_PI * theta)
    return amp * _ipow(0.5 * (1.0 + math.sin(TWO_PI * theta)), d)


def _forcing_dtheta(kind, d, amp, theta):
    if kind == 0:
        c = math.cos(TWO_PI * theta)
        s = math.sin(TWO_PI * theta)
        # d is odd, so the exponent d - 1 is even: drop the sign of c
        return -amp * d * _ipow(abs(c), d - 1) * s * TWO_PI
    if kind == 1:
        return -amp * TWO_PI * math.sin(TWO_PI * theta)
    c = 0.5 * (1.0 + math.sin(TWO_PI * theta))
    return amp * d * _ipow(c, d - 1) * PI * math.cos(TWO_PI * theta)


def _base_lift(fam, q0, q1, x):
    if fam == 0:
        return x + q0 + q1 * math.sin(TWO_PI * x)
    k = math.floor(x + 0.5)
    u = x - k
    if fam == 1:
        return k + math.atan(q0 * u) * q1
    if u <= -0.5:
        return k - 0.5
    return k + math.atan(q0 * math.tan(PI * u)) / PI


def _base_dx(fam, q0, q1, x):
    if fam == 0:
        return 1.0 + TWO_PI * q1 * math.cos(TWO_PI * x)
    u = x - math.floor(x + 0.5)
    if fam == 1:
        return q1 * q0 / (1.0 + q0 * q0 * u * u)
    cu = math.cos(PI * u)
    su = math.sin(PI * u)
    return q0 / (cu * cu + q0 * q0 * su * su)


def _base_inv(fam, q0, q1, z):
    if fam == 1:
        k = math.floor(z + 0.5)
        return k + math.tan((z - k) / q1) / q0
    if fam == 2:
        k = math.floor(z + 0.5)
        w = z - k
        if w <= -0.5:
            return k - 0.5
        return k + math.atan(math.tan(PI * w) / q0) / PI
    lo = z - q0 - q1
    hi = z - q0 + q1
    x = z - q0
    for _ in range(100):
        fx = x + q0 + q1 * math.sin(TWO_PI * x) - z
        if fx > 0.0:
            hi = x
        else:
            lo = x
        if abs(fx) < 1e-15:
            break
        x = x - fx / (1.0 + TWO_PI * q1 * math.cos(TWO_PI * x))
        if x <= lo or x >= hi:
            x = 0.5 * (lo + hi)
    return x


def advance(fam, fkind, fd, famp, q0, q1, theta, xlift, omega, n):
    for _ in range(n):
        xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
        theta = _mod1(theta + omega)
    return theta, xlift


def advance_lyap(fam, fkind, fd, famp, q0, q1, theta, xlift, omega, n):
    s = 0.0
    for _ in range(n):
        s += math.log(_base_dx(fam, q0, q1, xlift))
        xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
        theta = _mod1(theta + omega)
    return theta, xlift, s


def advance_backward(fam, fkind, fd, famp, q0, q1, theta, xlift, omega, n):
    s = 0.0
    for _ in range(n):
        theta = _mod1(theta - omega)
        xlift = _base_inv(fam, q0, q1, xlift - _forcing(fkind, fd, famp, theta))
        s -= math.log(_base_dx(fam, q0, q1, xlift))
    return theta, xlift, s


def lift_series(fam, fkind, fd, famp, q0, q1, theta, xlift, omega, n):
    out = np.empty(n + 1, dtype=np.float64)
    out[0] = xlift
    for k in range(n):
        xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
        theta = _mod1(theta + omega)
        out[k + 1] = xlift
    return out


def orbit_samples(fam, fkind, fd, famp, q0, q1, theta, xlift, omega, burn, count):
    th = np.empty(count, dtype=np.float64)
    xs = np.empty(count, dtype=np.float64)
    for _ in range(burn):
        xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
        theta = _mod1(theta + omega)
    for k in range(count):
        th[k] = theta
        xs[k] = _mod1(xlift)
        xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
        theta = _mod1(theta + omega)
    return th, xs


def orbit_samples_backward(fam, fkind, fd, famp, q0, q1, theta, xlift, omega,
                           burn, count):
    th = np.empty(count, dtype=np.float64)
    xs = np.empty(count, dtype=np.float64)
    for _ in range(burn):
        theta = _mod1(theta - omega)
        xlift = _base_inv(fam, q0, q1, xlift - _forcing(fkind, fd, famp, theta))
    for k in range(count):
        th[k] = theta
        xs[k] = _mod1(xlift)
        theta = _mod1(theta - omega)
        xlift = _base_inv(fam, q0, q1, xlift - _forcing(fkind, fd, famp, theta))
    return th, xs


def deriv_orbit(fam, fkind, fd, famp, q0, q1, theta, xlift, omega, n):
    s = 0.0
    dth = 0.0
    dom = 0.0
    for k in range(n):
        dx = _base_dx(fam, q0, q1, xlift)
        dt = _forcing_dtheta(fkind, fd, famp, theta)
        s += math.log(dx)
        dth = dt + dx * dth
        dom = k * dt + dx * dom
        xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
        theta = _mod1(theta + omega)
    return theta, xlift, s, dth, dom


def graph_forward(fam, fkind, fd, famp, q0, q1, thetas, x0, omega, m):
    nt = len(thetas)
    xs = np.empty(nt)
    dths = np.empty(nt)
    doms = np.empty(nt)
    logs = np.empty(nt)
    for i in range(nt):
        th = _mod1(thetas[i] - m * omega)
        x = x0
        s = dth = dom = 0.0
        for j in range(m):
            dx = _base_dx(fam, q0, q1, x)
            dt = _forcing_dtheta(fkind, fd, famp, th)
            s += math.log(dx)
            dth = dt + dx * dth
            dom = -(m - j) * dt + dx * dom
            x = _base_lift(fam, q0, q1, x) + _forcing(fkind, fd, famp, th)
            th = _mod1(th + omega)
        xs[i] = x
        dths[i] = dth
        doms[i] = dom
        logs[i] = s
    return xs, dths, doms, logs


def graph_backward(fam, fkind, fd, famp, q0, q1, thetas, y0, omega, m):
    nt = len(thetas)
    xs = np.empty(nt)
    dths = np.empty(nt)
    doms = np.empty(nt)
    logs = np.empty(nt)
    for i in range(nt):
        th = _mod1(thetas[i] + m * omega)
        x = y0
        s = dth = dom = 0.0
        for j in range(1, m + 1):
            th = _mod1(th - omega)
            x = _base_inv(fam, q0, q1, x - _forcing(fkind, fd, famp, th))
            dx = _base_dx(fam, q0, q1, x)
            dt = _forcing_dtheta(fkind, fd, famp, th)
            dxi = 1.0 / dx
            dti = -dt * dxi
            s -= math.log(dx)
            dom = (m - j) * dti + dxi * dom
            dth = dti + dxi * dth
        xs[i] = x
        dths[i] = dth
        doms[i] = dom
        logs[i] = s
    return xs, dths, doms, logs


def grid_eval(fam, fkind, fd, famp, q0, q1, thetas, xs):
    n = len(thetas)
    vals = np.empty(n)
    dxs = np.empty(n)
    dts = np.empty(n)
    for i in range(n):
        vals[i] = _base_lift(fam, q0, q1, xs[i]) + _forcing(fkind, fd, famp, thetas[i])
        dxs[i] = _base_dx(fam, q0, q1, xs[i])
        dts[i] = _forcing_dtheta(fkind, fd, famp, thetas[i])
    return vals, dxs, dts
