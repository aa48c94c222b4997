"""Compare the compiled kernel backend against the pure-Python fallback.

Runs each hot kernel on identical inputs in-process (compiled) and via the
fallback module (pure), and prints per-kernel throughput plus the speedup.
Usage: python3 benchmarks/benchmark_backends.py [n_steps]
"""

from __future__ import annotations

import sys
import time

import numpy as np

from qpfdyn import kernels
from qpfdyn import _kernels_py as pure
from qpfdyn.maps import ArnoldMap, Forcing, GOLDEN_MEAN


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> int:
    n = int(float(sys.argv[1])) if len(sys.argv) > 1 else 10**6
    m = ArnoldMap(0.1, 0.05, Forcing("cospow", 1.0, 3))
    fam, fk, fd, famp, q0, q1 = m.kernel_args()
    omega = GOLDEN_MEAN
    thetas = np.linspace(0.0, 1.0, 4096, endpoint=False)

    cases = [
        ("advance", (fam, fk, fd, famp, q0, q1, 0.1, 0.2, omega, n)),
        ("advance_lyap", (fam, fk, fd, famp, q0, q1, 0.1, 0.2, omega, n)),
        ("advance_backward", (fam, fk, fd, famp, q0, q1, 0.1, 0.2, omega, n)),
        ("deriv_orbit", (fam, fk, fd, famp, q0, q1, 0.1, 0.2, omega, n)),
        ("orbit_samples", (fam, fk, fd, famp, q0, q1, 0.1, 0.2, omega,
                           n // 2, n // 2)),
        ("graph_forward", (fam, fk, fd, famp, q0, q1, thetas, 0.2, omega,
                           max(1, n // 4096))),
        ("graph_backward", (fam, fk, fd, famp, q0, q1, thetas, 0.2, omega,
                            max(1, n // 4096))),
    ]

    print(f"active backend: {kernels.BACKEND}; n = {n}")
    print(f"{'kernel':18s} {'compiled':>12s} {'pure':>12s} {'speedup':>9s}")
    for name, args in cases:
        tc, out_c = timed(getattr(kernels, name), *args)
        # pure fallback at reduced size to keep runtime sane
        scale = 50
        if name in ("graph_forward", "graph_backward"):
            p_args = args[:6] + (thetas[:: scale],) + args[7:]
        elif name == "orbit_samples":
            p_args = args[:-2] + (args[-2] // scale, args[-1] // scale)
        else:
            p_args = args[:-1] + (args[-1] // scale,)
        tp, out_p = timed(getattr(pure, name), *p_args, repeat=1)
        tp *= scale
        print(f"{name:18s} {tc:12.4f} {tp:12.4f} {tp / tc:8.1f}x")
        del out_c, out_p
    return 0


if __name__ == "__main__":
    sys.exit(main())
