# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled orbit kernels for quasiperiodically forced circle maps.

Map families (identified by integer codes shared with the pure-Python
fallback in ``_kernels_py``):

  0  "arnold"   lift(x) = x + q0 + q1*sin(2 pi x)            (q0=tau, q1=a)
  1  "pinched"  lift(x) = k + atan(q0*u)*q1, u = x-k centered (q0=alpha,
                q1 = 1/(2*atan(alpha/2)))
  2  "cocycle"  lift(x) = k + atan(q0*tan(pi*u))/pi           (q0=alpha**2)

Additive forcing in the angle, added to the lift each step:

  0  amp * cos(2 pi theta)**d   (d odd)
  1  amp * cos(2 pi theta)
  2  amp * ((1 + sin(2 pi theta)) / 2)**d

All kernels work on lifts: x is a real number, the fibre maps commute with
x -> x + 1.  Angles are reduced mod 1 as they advance.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan, cos, fabs, floor, log, sin, tan

cnp.import_array()

cdef double PI = 3.1415926535897932384626433832795
cdef double TWO_PI = 6.283185307179586476925286766559


cdef inline double _mod1(double x) nogil:
    cdef double y = x - floor(x)
    if y >= 1.0:
        y = 0.0
    return y


cdef inline double _ipow(double b, int d) nogil:
    # b**d for d >= 0 by binary exponentiation
    cdef double r = 1.0
    while d > 0:
        if d & 1:
            r *= b
        b *= b
        d >>= 1
    return r


cdef inline double _signed_pow(double b, int d) nogil:
    # b**d for odd d, safe for negative b
    if b < 0.0:
        return -_ipow(-b, d)
    return _ipow(b, d)


cdef inline double _forcing(int kind, int d, double amp, double theta) nogil:
    cdef double c
    if kind == 0:
        c = cos(TWO_PI * theta)
        return amp * _signed_pow(c, d)
    elif kind == 1:
        return amp * cos(TWO_PI * theta)
    else:
        c = 0.5 * (1.0 + sin(TWO_PI * theta))
        return amp * _ipow(c, d)


cdef inline double _forcing_dtheta(int kind, int d, double amp, double theta) nogil:
    cdef double c, s
    if kind == 0:
        c = cos(TWO_PI * theta)
        s = sin(TWO_PI * theta)
        # d is odd, so the exponent d - 1 is even: drop the sign of c
        return -amp * d * _ipow(fabs(c), d - 1) * s * TWO_PI
    elif kind == 1:
        return -amp * TWO_PI * sin(TWO_PI * theta)
    else:
        c = 0.5 * (1.0 + sin(TWO_PI * theta))
        return amp * d * _ipow(c, d - 1) * PI * cos(TWO_PI * theta)


cdef inline double _base_lift(int fam, double q0, double q1, double x) nogil:
    cdef double k, u
    if fam == 0:
        return x + q0 + q1 * sin(TWO_PI * x)
    k = floor(x + 0.5)
    u = x - k
    if fam == 1:
        return k + atan(q0 * u) * q1
    if u <= -0.5:
        return k - 0.5
    return k + atan(q0 * tan(PI * u)) / PI


cdef inline double _base_dx(int fam, double q0, double q1, double x) nogil:
    cdef double u, cu, su
    if fam == 0:
        return 1.0 + TWO_PI * q1 * cos(TWO_PI * x)
    u = x - floor(x + 0.5)
    if fam == 1:
        return q1 * q0 / (1.0 + q0 * q0 * u * u)
    cu = cos(PI * u)
    su = sin(PI * u)
    return q0 / (cu * cu + q0 * q0 * su * su)


cdef inline double _base_inv(int fam, double q0, double q1, double z) nogil:
    # invert the base lift (forcing already subtracted by the caller)
    cdef double k, w, x, lo, hi, fx
    cdef int it
    if fam == 1:
        k = floor(z + 0.5)
        w = z - k
        return k + tan(w / q1) / q0
    if fam == 2:
        k = floor(z + 0.5)
        w = z - k
        if w <= -0.5:
            return k - 0.5
        return k + atan(tan(PI * w) / q0) / PI
    # arnold: safeguarded Newton on x + q0 + q1 sin(2 pi x) = z
    lo = z - q0 - q1
    hi = z - q0 + q1
    x = z - q0
    for it in range(100):
        fx = x + q0 + q1 * sin(TWO_PI * x) - z
        if fx > 0.0:
            hi = x
        else:
            lo = x
        if fabs(fx) < 1e-15:
            break
        x = x - fx / (1.0 + TWO_PI * q1 * cos(TWO_PI * x))
        if x <= lo or x >= hi:
            x = 0.5 * (lo + hi)
    return x


def advance(int fam, int fkind, int fd, double famp, double q0, double q1,
            double theta, double xlift, double omega, long n):
    """Iterate n forward steps; return (theta, xlift)."""
    cdef long k
    with nogil:
        for k in range(n):
            xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
            theta = _mod1(theta + omega)
    return theta, xlift


def advance_lyap(int fam, int fkind, int fd, double famp, double q0, double q1,
                 double theta, double xlift, double omega, long n):
    """Iterate n forward steps accumulating log of the fibre derivative.

    Returns (theta, xlift, sum_log_dx).
    """
    cdef long k
    cdef double s = 0.0
    with nogil:
        for k in range(n):
            s += log(_base_dx(fam, q0, q1, xlift))
            xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
            theta = _mod1(theta + omega)
    return theta, xlift, s


def advance_backward(int fam, int fkind, int fd, double famp, double q0, double q1,
                     double theta, double xlift, double omega, long n):
    """Iterate n backward steps (theta decreases by omega each step).

    Accumulates the log derivative of the inverse fibre maps along the way;
    returns (theta, xlift, sum_log_dx_inverse).
    """
    cdef long k
    cdef double s = 0.0
    with nogil:
        for k in range(n):
            theta = _mod1(theta - omega)
            xlift = _base_inv(fam, q0, q1,
                              xlift - _forcing(fkind, fd, famp, theta))
            s -= log(_base_dx(fam, q0, q1, xlift))
    return theta, xlift, s


def lift_series(int fam, int fkind, int fd, double famp, double q0, double q1,
                double theta, double xlift, double omega, long n):
    """Lifts x_0, ..., x_n along the forward orbit, as a float array."""
    out = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] o = out
    cdef long k
    with nogil:
        o[0] = xlift
        for k in range(n):
            xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
            theta = _mod1(theta + omega)
            o[k + 1] = xlift
    return out


def orbit_samples(int fam, int fkind, int fd, double famp, double q0, double q1,
                  double theta, double xlift, double omega, long burn, long count):
    """Drop ``burn`` steps, then record ``count`` consecutive (theta, x mod 1)."""
    th = np.empty(count, dtype=np.float64)
    xs = np.empty(count, dtype=np.float64)
    cdef double[::1] tv = th
    cdef double[::1] xv = xs
    cdef long k
    with nogil:
        for k in range(burn):
            xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
            theta = _mod1(theta + omega)
        for k in range(count):
            tv[k] = theta
            xv[k] = _mod1(xlift)
            xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
            theta = _mod1(theta + omega)
    return th, xs


def orbit_samples_backward(int fam, int fkind, int fd, double famp, double q0,
                           double q1, double theta, double xlift, double omega,
                           long burn, long count):
    """Drop ``burn`` backward steps, then record ``count`` consecutive
    (theta, x mod 1) along the inverse orbit (sample k sits at theta - k*omega
    relative to the post-burn point)."""
    th = np.empty(count, dtype=np.float64)
    xs = np.empty(count, dtype=np.float64)
    cdef double[::1] tv = th
    cdef double[::1] xv = xs
    cdef long k
    with nogil:
        for k in range(burn):
            theta = _mod1(theta - omega)
            xlift = _base_inv(fam, q0, q1, xlift - _forcing(fkind, fd, famp, theta))
        for k in range(count):
            tv[k] = theta
            xv[k] = _mod1(xlift)
            theta = _mod1(theta - omega)
            xlift = _base_inv(fam, q0, q1, xlift - _forcing(fkind, fd, famp, theta))
    return th, xs


def deriv_orbit(int fam, int fkind, int fd, double famp, double q0, double q1,
                double theta, double xlift, double omega, long n):
    """Forward orbit with derivative accumulators.

    dtheta is the derivative of the n-step fibre map with respect to the
    starting angle; domega the derivative with respect to omega holding the
    starting angle fixed (the angle at step k carries a factor k).
    Returns (theta_n, xlift_n, sum_log_dx, dtheta_n, domega_n).
    """
    cdef long k
    cdef double s = 0.0, dth = 0.0, dom = 0.0, dx, dt
    with nogil:
        for k in range(n):
            dx = _base_dx(fam, q0, q1, xlift)
            dt = _forcing_dtheta(fkind, fd, famp, theta)
            s += log(dx)
            dth = dt + dx * dth
            dom = k * dt + dx * dom
            xlift = _base_lift(fam, q0, q1, xlift) + _forcing(fkind, fd, famp, theta)
            theta = _mod1(theta + omega)
    return theta, xlift, s, dth, dom


def graph_forward(int fam, int fkind, int fd, double famp, double q0, double q1,
                  cnp.ndarray[double, ndim=1] thetas, double x0, double omega,
                  long m):
    """Evaluate theta -> m-step forward image of x0 started m steps upstream.

    For each theta the orbit starts on the fibre over theta - m*omega at
    lift x0 and is iterated m times, landing on the fibre over theta.
    Returns (xs, dtheta, domega, sum_log_dx) as arrays over thetas; the
    omega-derivative holds the target angle theta fixed (the angle at step
    j carries a factor -(m - j)).
    """
    cdef Py_ssize_t nt = thetas.shape[0]
    xs = np.empty(nt, dtype=np.float64)
    dths = np.empty(nt, dtype=np.float64)
    doms = np.empty(nt, dtype=np.float64)
    logs = np.empty(nt, dtype=np.float64)
    cdef double[::1] xv = xs
    cdef double[::1] dv = dths
    cdef double[::1] ov = doms
    cdef double[::1] lv = logs
    cdef double[:] tv = thetas
    cdef Py_ssize_t i
    cdef long j
    cdef double th, x, s, dth, dom, dx, dt
    with nogil:
        for i in range(nt):
            th = _mod1(tv[i] - m * omega)
            x = x0
            s = 0.0
            dth = 0.0
            dom = 0.0
            for j in range(m):
                dx = _base_dx(fam, q0, q1, x)
                dt = _forcing_dtheta(fkind, fd, famp, th)
                s += log(dx)
                dth = dt + dx * dth
                dom = -(m - j) * dt + dx * dom
                x = _base_lift(fam, q0, q1, x) + _forcing(fkind, fd, famp, th)
                th = _mod1(th + omega)
            xv[i] = x
            dv[i] = dth
            ov[i] = dom
            lv[i] = s
    return xs, dths, doms, logs


def graph_backward(int fam, int fkind, int fd, double famp, double q0, double q1,
                   cnp.ndarray[double, ndim=1] thetas, double y0, double omega,
                   long m):
    """Evaluate theta -> m-step backward image of y0 started m steps downstream.

    For each theta the orbit starts on the fibre over theta + m*omega at
    lift y0 and inverse fibre maps are applied m times, landing over theta.
    Returns (xs, dtheta, domega, sum_log_dx_inverse); the omega-derivative
    holds theta fixed (the angle at backward step j carries a factor m - j).
    """
    cdef Py_ssize_t nt = thetas.shape[0]
    xs = np.empty(nt, dtype=np.float64)
    dths = np.empty(nt, dtype=np.float64)
    doms = np.empty(nt, dtype=np.float64)
    logs = np.empty(nt, dtype=np.float64)
    cdef double[::1] xv = xs
    cdef double[::1] dv = dths
    cdef double[::1] ov = doms
    cdef double[::1] lv = logs
    cdef double[:] tv = thetas
    cdef Py_ssize_t i
    cdef long j
    cdef double th, x, s, dth, dom, dx, dt, dxi, dti
    with nogil:
        for i in range(nt):
            th = _mod1(tv[i] + m * omega)
            x = y0
            s = 0.0
            dth = 0.0
            dom = 0.0
            for j in range(1, m + 1):
                th = _mod1(th - omega)
                x = _base_inv(fam, q0, q1, x - _forcing(fkind, fd, famp, th))
                dx = _base_dx(fam, q0, q1, x)
                dt = _forcing_dtheta(fkind, fd, famp, th)
                dxi = 1.0 / dx
                dti = -dt * dxi
                s -= log(dx)
                dom = (m - j) * dti + dxi * dom
                dth = dti + dxi * dth
            xv[i] = x
            dv[i] = dth
            ov[i] = dom
            lv[i] = s
    return xs, dths, doms, logs


def grid_eval(int fam, int fkind, int fd, double famp, double q0, double q1,
              cnp.ndarray[double, ndim=1] thetas,
              cnp.ndarray[double, ndim=1] xs):
    """Pointwise lift value, fibre derivative and angle derivative on a grid."""
    cdef Py_ssize_t n = thetas.shape[0]
    vals = np.empty(n, dtype=np.float64)
    dxs = np.empty(n, dtype=np.float64)
    dts = np.empty(n, dtype=np.float64)
    cdef double[::1] vv = vals
    cdef double[::1] xv = dxs
    cdef double[::1] tv2 = dts
    cdef double[:] tv = thetas
    cdef double[:] xin = xs
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            vv[i] = _base_lift(fam, q0, q1, xin[i]) + _forcing(fkind, fd, famp, tv[i])
            xv[i] = _base_dx(fam, q0, q1, xin[i])
            tv2[i] = _forcing_dtheta(fkind, fd, famp, tv[i])
    return vals, dxs, dts
