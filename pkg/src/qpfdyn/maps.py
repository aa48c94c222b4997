"""Map families for quasiperiodically forced circle dynamics.

A system is a skew product (theta, x) -> (theta + omega, f_theta(x)) over an
irrational rotation of the circle.  Every fibre map here is an orientation
preserving circle homeomorphism of the form

    f_theta(x) = h(x) + g(theta)   (mod 1)

where h is a fixed circle map with a lift commuting with x -> x + 1, and g
is a trigonometric forcing term.  All evaluation is done on lifts.

Three families are provided:

* ``ArnoldMap``: h(x) = x + tau + a*sin(2 pi x), invertible for
  a <= 1/(2 pi).
* ``PinchedMap``: h concentrates expansion near x = 0 and contraction near
  x = 1/2, with a sharpness exponent p >= 2 and a strength parameter alpha.
* ``CocycleMap``: the p = 2 sharpness profile realised as the projective
  action of a diagonal matrix in SL(2, R), which makes an independent
  matrix-product cross-check available (``cocycle_eval``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

TWO_PI = 2.0 * math.pi

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0

_FORCING_CODES = {"cospow": 0, "cos": 1, "sinpow": 2}


@dataclass(frozen=True)
class Forcing:
    """Additive angle forcing g(theta).

    kind "cospow": amp * cos(2 pi theta)**d with odd d;
    kind "cos":    amp * cos(2 pi theta);
    kind "sinpow": amp * ((1 + sin(2 pi theta)) / 2)**d.
    """

    kind: str
    amp: float
    d: int = 1

    def __post_init__(self):
        if self.kind not in _FORCING_CODES:
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind in ("cospow", "sinpow") and self.d < 1:
            raise ValueError("power forcing needs d >= 1")
        if self.kind == "cospow" and self.d % 2 == 0:
            raise ValueError("cosine-power forcing needs odd d")

    @property
    def code(self) -> int:
        return _FORCING_CODES[self.kind]

    def value(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "cospow":
            return self.amp * np.cos(TWO_PI * theta) ** self.d
        if self.kind == "cos":
            return self.amp * np.cos(TWO_PI * theta)
        return self.amp * (0.5 * (1.0 + np.sin(TWO_PI * theta))) ** self.d

    def dtheta(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "cospow":
            c = np.cos(TWO_PI * theta)
            return -self.amp * self.d * c ** (self.d - 1) * np.sin(TWO_PI * theta) * TWO_PI
        if self.kind == "cos":
            return -self.amp * TWO_PI * np.sin(TWO_PI * theta)
        b = 0.5 * (1.0 + np.sin(TWO_PI * theta))
        return self.amp * self.d * b ** (self.d - 1) * math.pi * np.cos(TWO_PI * theta)


def no_forcing() -> Forcing:
    return Forcing("cos", 0.0)


class _BaseMap:
    """Common interface: lift evaluation, derivatives, inversion."""

    forcing: Forcing

    # subclasses set these for the fast kernels, or kernel_args -> None
    _family_code: int | None = None

    def base_lift(self, x):
        raise NotImplementedError

    def base_dx(self, x):
        raise NotImplementedError

    def base_inverse(self, z):
        raise NotImplementedError

    def lift(self, theta, x):
        """Lift of the fibre map: F_theta(x), commuting with x -> x + 1."""
        return self.base_lift(x) + self.forcing.value(theta)

    def dx(self, theta, x):
        return self.base_dx(x)

    def dtheta(self, theta, x):
        return np.broadcast_arrays(self.forcing.dtheta(theta), np.asarray(x, float))[0]

    def inverse(self, theta, y):
        """x with F_theta(x) = y, on lifts."""
        return self.base_inverse(np.asarray(y, float) - self.forcing.value(theta))

    def kernel_args(self):
        """(family, fkind, fd, famp, q0, q1) for the orbit kernels, or None."""
        if self._family_code is None:
            return None
        q0, q1 = self._kernel_q()
        return (self._family_code, self.forcing.code, self.forcing.d,
                self.forcing.amp, q0, q1)

    def _kernel_q(self):
        raise NotImplementedError


@dataclass(frozen=True)
class ArnoldMap(_BaseMap):
    """h(x) = x + tau + a sin(2 pi x); invertible iff a <= 1/(2 pi)."""

    tau: float
    a: float
    forcing: Forcing = field(default_factory=no_forcing)

    _family_code = 0

    def __post_init__(self):
        if self.a < 0.0 or self.a > 1.0 / TWO_PI + 1e-15:
            raise ValueError("need 0 <= a <= 1/(2 pi) for invertibility")

    def base_lift(self, x):
        x = np.asarray(x, dtype=float)
        return x + self.tau + self.a * np.sin(TWO_PI * x)

    def base_dx(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 + TWO_PI * self.a * np.cos(TWO_PI * x)

    def base_inverse(self, z):
        z = np.asarray(z, dtype=float)
        lo = z - self.tau - self.a
        hi = z - self.tau + self.a
        x = z - self.tau
        for _ in range(100):
            fx = x + self.tau + self.a * np.sin(TWO_PI * x) - z
            hi = np.where(fx > 0.0, x, hi)
            lo = np.where(fx > 0.0, lo, x)
            if np.max(np.abs(fx)) < 1e-15:
                break
            step = fx / (1.0 + TWO_PI * self.a * np.cos(TWO_PI * x))
            x = x - step
            bad = (x <= lo) | (x >= hi)
            x = np.where(bad, 0.5 * (lo + hi), x)
        return x

    def _kernel_q(self):
        return self.tau, self.a


def sharpness_profile_table(alpha: float, p: float, nodes: int = 2049):
    """Monotone interpolant of u -> integral_0^u alpha dt / (1 + (alpha t)^p).

    This is the centered half of the pinched profile before normalisation.
    The integrand has a spike of width ~1/alpha at 0, so nodes cluster there
    (sinh spacing).  Returns (interpolant on [0, 1/2], value at 1/2).
    """
    c = max(4.0, math.log(max(alpha, 2.0)))
    s = np.linspace(0.0, 1.0, nodes)
    u = 0.5 * np.sinh(c * s) / math.sinh(c)
    integrand = alpha / (1.0 + np.abs(alpha * u) ** p)
    # cumulative Simpson on the nonuniform grid via local quadratic fits
    from scipy.integrate import cumulative_simpson

    vals = cumulative_simpson(integrand, x=u, initial=0.0)
    interp = PchipInterpolator(u, vals, extrapolate=True)
    return interp, float(vals[-1])


def profile_integral(x: float, p: float) -> float:
    """integral_0^x dt / (1 + |t|^p), odd in x (adaptive quadrature)."""
    from scipy.integrate import quad

    sign = 1.0 if x >= 0 else -1.0
    val, _ = quad(lambda t: 1.0 / (1.0 + abs(t) ** p), 0.0, abs(x), limit=200)
    return sign * val


class PinchedMap(_BaseMap):
    """Fibre profile with a flat spot near x = 1/2 and steep rise near 0.

    On the centered domain u in (-1/2, 1/2] the lift is

        h(u) = A(u) / (2 A(1/2)),   A(u) = integral_0^u alpha dt/(1+(alpha t)^p)

    extended by h(x + 1) = h(x) + 1.  The derivative is exact:
    h'(u) = alpha / ((1 + |alpha u|^p) * 2 A(1/2)).  For p = 2 this reduces
    to arctan(alpha u) / (2 arctan(alpha / 2)) and the fast kernels apply;
    other p run through numpy with a quadrature table for values.
    """

    _TABLE_NODES = 4097

    def __init__(self, alpha: float, p: float = 2.0, forcing: Forcing | None = None):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        if p < 2:
            raise ValueError("sharpness exponent p must be >= 2")
        self.alpha = float(alpha)
        self.p = float(p)
        self.forcing = forcing if forcing is not None else no_forcing()
        if self.p == 2.0:
            self._half = math.atan(0.5 * self.alpha)
            self._interp = None
        else:
            self._interp, self._half = sharpness_profile_table(
                self.alpha, self.p, self._TABLE_NODES
            )
        self._norm = 1.0 / (2.0 * self._half)

    @property
    def _family_code(self):
        return 1 if self.p == 2.0 else None

    def _kernel_q(self):
        return self.alpha, self._norm

    def _profile(self, u):
        # A(u) on |u| <= 1/2, odd
        if self.p == 2.0:
            return np.arctan(self.alpha * u)
        return np.sign(u) * self._interp(np.abs(u))

    def base_lift(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x + 0.5)
        u = x - k
        return k + self._profile(u) * self._norm

    def base_dx(self, x):
        x = np.asarray(x, dtype=float)
        u = x - np.floor(x + 0.5)
        return self.alpha * self._norm / (1.0 + np.abs(self.alpha * u) ** self.p)

    def base_inverse(self, z):
        z = np.asarray(z, dtype=float)
        k = np.floor(z + 0.5)
        w = (z - k) / self._norm  # target for A(u), in [-A(1/2), A(1/2)]
        if self.p == 2.0:
            return k + np.tan(w) / self.alpha
        # Newton on A(u) = w with exact derivative, bisection safeguarded
        lo = np.full_like(w, -0.5)
        hi = np.full_like(w, 0.5)
        u = np.clip(w / self.alpha, -0.5, 0.5)
        for _ in range(100):
            fu = self._profile(u) - w
            hi = np.where(fu > 0.0, u, hi)
            lo = np.where(fu > 0.0, lo, u)
            if np.max(np.abs(fu)) < 1e-14:
                break
            du = self.alpha / (1.0 + np.abs(self.alpha * u) ** self.p)
            u = u - fu / du
            bad = (u <= lo) | (u >= hi)
            u = np.where(bad, 0.5 * (lo + hi), u)
        return k + u

    def __repr__(self):
        return f"PinchedMap(alpha={self.alpha}, p={self.p}, forcing={self.forcing})"


@dataclass(frozen=True)
class CocycleMap(_BaseMap):
    """Projective action of diag(1/alpha, alpha) in SL(2, R), plus forcing.

    The base lift is h(x) = arctan(alpha^2 tan(pi x)) / pi on the centered
    domain, which is the angle map induced on lines through the origin:
    with v(x) = (cos pi x, sin pi x), the matrix sends v(x) to a multiple
    of v(h(x)).  Equivalent to the p = 2 pinched profile up to coordinates.
    """

    alpha: float
    forcing: Forcing = field(default_factory=no_forcing)

    _family_code = 2

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @property
    def _a2(self):
        return self.alpha * self.alpha

    def _kernel_q(self):
        return self._a2, 0.0

    def base_lift(self, x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x + 0.5)
        u = x - k
        out = k + np.arctan(self._a2 * np.tan(math.pi * u)) / math.pi
        return np.where(u <= -0.5, k - 0.5, out)

    def base_dx(self, x):
        x = np.asarray(x, dtype=float)
        u = x - np.floor(x + 0.5)
        cu = np.cos(math.pi * u)
        su = np.sin(math.pi * u)
        return self._a2 / (cu * cu + self._a2 * self._a2 * su * su)

    def base_inverse(self, z):
        z = np.asarray(z, dtype=float)
        k = np.floor(z + 0.5)
        w = z - k
        out = k + np.arctan(np.tan(math.pi * w) / self._a2) / math.pi
        return np.where(w <= -0.5, k - 0.5, out)

    def matrix(self, theta) -> np.ndarray:
        """Single-step SL(2, R) matrix: rotation by pi*g(theta) after the
        diagonal stretch, acting on v(x) = (cos pi x, sin pi x)."""
        g = float(self.forcing.value(theta))
        c, s = math.cos(math.pi * g), math.sin(math.pi * g)
        rot = np.array([[c, -s], [s, c]])
        diag = np.array([[1.0 / self.alpha, 0.0], [0.0, self.alpha]])
        return rot @ diag


def cocycle_eval(cmap: CocycleMap, theta0: float, x0: float, omega: float, n: int):
    """Iterate the projective matrix orbit for n steps.

    Returns (xs, log_norm) where xs[k] is the angle coordinate of the line
    after k steps (xs[0] = x0 mod 1, angles in [0, 1) with x and x + 1/2
    identifying the same line only up to the chosen lift of v), and
    log_norm is the accumulated log of the norms used to renormalise the
    running matrix product.  Serves as an independent cross-check of the
    closed-form fibre iteration.
    """
    theta = theta0 % 1.0
    v = np.array([math.cos(math.pi * x0), math.sin(math.pi * x0)])
    prod = np.eye(2)
    log_norm = 0.0
    xs = np.empty(n + 1)
    xs[0] = x0 % 1.0
    for k in range(n):
        m = cmap.matrix(theta)
        v = m @ v
        nv = math.hypot(v[0], v[1])
        v /= nv
        prod = m @ prod
        pn = np.linalg.norm(prod)
        prod /= pn
        log_norm += math.log(pn)
        ang = math.atan2(v[1], v[0]) / math.pi  # in (-1, 1]
        xs[k + 1] = ang % 1.0
        theta = (theta + omega) % 1.0
    return xs, log_norm


@dataclass(frozen=True)
class QpfSystem:
    """A map family driven by the rigid rotation theta -> theta + omega."""

    map: _BaseMap
    omega: float = GOLDEN_MEAN

    def step(self, theta: float, x: float):
        """One forward step on (angle mod 1, lift)."""
        xn = float(self.map.lift(theta, x))
        return (theta + self.omega) % 1.0, xn

    def kernel_args(self):
        return self.map.kernel_args()


def build_map(family: str, params: dict) -> _BaseMap:
    """Construct a map from a flat parameter dictionary.

    Shared forcing keys: ``b`` (amplitude, default 1), ``d`` (power,
    default 1), ``forcing`` (kind; defaults to "cos" for d = 1 and
    "cospow" otherwise, with amplitude 0 meaning no forcing).
    Families: "arnold" (tau, a), "pinched" (alpha, p), "cocycle" (alpha).
    """
    p = dict(params)
    amp = float(p.pop("b", 1.0))
    d = int(p.pop("d", 1))
    kind = p.pop("forcing", None)
    if kind is None:
        kind = "cos" if d == 1 else "cospow"
    forcing = no_forcing() if amp == 0.0 else Forcing(kind, amp, d)
    if family == "arnold":
        return ArnoldMap(float(p.pop("tau", 0.0)), float(p.pop("a", 0.0)),
                         forcing)
    if family == "pinched":
        return PinchedMap(float(p.pop("alpha")), float(p.pop("p", 2.0)),
                          forcing)
    if family == "cocycle":
        return CocycleMap(float(p.pop("alpha")), forcing)
    raise ValueError(f"unknown family {family!r}")
