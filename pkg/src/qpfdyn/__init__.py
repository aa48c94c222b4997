"""Numerical toolkit for quasiperiodically forced circle maps.

Orbit statistics (rotation numbers, Lyapunov exponents, mode-locking
tongues), expansion/contraction region certification, critical-set
refinement and frequency-exclusion bookkeeping for skew products over
irrational rotations.
"""

from .circle import CircleInterval, RegionUnion, ccw_length, centered, circle_dist, mod1
from .kernels import BACKEND
from .maps import (
    GOLDEN_MEAN,
    ArnoldMap,
    CocycleMap,
    Forcing,
    PinchedMap,
    QpfSystem,
    build_map,
    cocycle_eval,
)

__version__ = "0.1.0"
