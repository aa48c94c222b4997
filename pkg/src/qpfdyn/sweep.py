"""Batch parameter sweeps with deterministic ordering and checkpointing.

A sweep evaluates observables (rotation number, forward/backward fibre
exponents, tongue width, attractor density) on a cartesian grid of one to
three named parameter axes.  Cells are independent and may be computed by a
thread pool (the compiled kernels release the GIL), but results are always
emitted in row-major grid order, so output files are reproducible.  A JSON
checkpoint stores finished rows; resuming completes the remaining cells and
writes a byte-identical CSV to the run that owns the checkpoint.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dynamics
from .maps import GOLDEN_MEAN, build_map

OBSERVABLES = ("rho", "lambda_fwd", "lambda_bwd", "tongue_width", "density")
CSV_HEADER = ("axis1,axis2,axis3,rho,lambda_fwd,lambda_bwd,tongue_width,"
              "density,flags,wall_ms")


def fmt(x: float) -> str:
    """17-significant-digit float formatting (round-trip exact)."""
    return f"{x:.17g}"


def n_threads() -> int:
    env = os.environ.get("QPFDYN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.count < 1:
            raise ValueError("axis count must be positive")
        if self.scale == "linear":
            return np.linspace(self.lo, self.hi, self.count)
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        raise ValueError(f"unknown axis scale {self.scale!r}")


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition plus budgets for one batch run."""

    family: str
    fixed: dict
    axes: tuple
    observables: tuple
    n_rho: int = 10**6
    n_lyap: int = 10**5
    n_density: int = 10**4
    tol_rho: float = 1e-6
    tol_tau: float = 1e-5
    seed: int = 0
    output: str = "sweep.csv"

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 3:
            raise ValueError("need one to three axes")
        if not self.observables:
            raise ValueError("need at least one observable")
        for ob in self.observables:
            if ob not in OBSERVABLES:
                raise ValueError(f"unknown observable {ob!r}")
        if min(self.n_rho, self.n_lyap, self.n_density) <= 0:
            raise ValueError("budgets must be positive")

    def grid(self):
        vals = [ax.values() for ax in self.axes]
        idx = np.indices([len(v) for v in vals]).reshape(len(vals), -1).T
        return [tuple(float(vals[d][i]) for d, i in enumerate(row))
                for row in idx]

    def key(self) -> str:
        blob = json.dumps({
            "family": self.family, "fixed": self.fixed,
            "axes": [[a.name, a.lo, a.hi, a.count, a.scale]
                     for a in self.axes],
            "observables": list(self.observables),
            "n_rho": self.n_rho, "n_lyap": self.n_lyap,
            "n_density": self.n_density, "tol_rho": self.tol_rho,
            "tol_tau": self.tol_tau, "seed": self.seed,
        }, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class SweepResult:
    index: int
    coords: tuple
    values: dict
    flags: str
    wall_ms: int

    def csv_row(self) -> str:
        cs = [fmt(c) for c in self.coords] + [""] * (3 - len(self.coords))
        obs = [fmt(self.values[k]) if k in self.values else ""
               for k in OBSERVABLES]
        return ",".join(cs + obs + [self.flags, str(self.wall_ms)])


def _cell_params(spec: SweepSpec, coords) -> dict:
    params = dict(spec.fixed)
    for ax, c in zip(spec.axes, coords):
        params[ax.name] = c
    return params


def evaluate_cell(spec: SweepSpec, index: int, coords) -> SweepResult:
    t0 = time.perf_counter()
    params = _cell_params(spec, coords)
    omega = float(params.pop("omega", GOLDEN_MEAN))
    flags = []
    values = {}
    try:
        m = build_map(spec.family, params)
        if "rho" in spec.observables:
            values["rho"] = dynamics.rotation_number(m, omega, spec.n_rho)
        if ("lambda_fwd" in spec.observables
                or "lambda_bwd" in spec.observables):
            est = dynamics.lyapunov_pointwise(m, omega, n_max=spec.n_lyap)
            if "lambda_fwd" in spec.observables:
                values["lambda_fwd"] = est.forward
            if "lambda_bwd" in spec.observables:
                values["lambda_bwd"] = est.backward
            if not est.converged:
                flags.append("unconverged")
        if "tongue_width" in spec.observables:
            scan = dict(params)
            scan.pop("tau", None)

            def make(tau, scan=scan):
                return build_map(spec.family, dict(scan, tau=tau))

            tb = dynamics.tongue_boundary(make, omega, tol_tau=spec.tol_tau,
                                          tol_rho=spec.tol_rho,
                                          n_max=spec.n_rho)
            values["tongue_width"] = tb.width
            if not tb.resolved:
                flags.append("unresolved")
        if "density" in spec.observables:
            samples = dynamics.attractor_sample(m, omega,
                                                n_transient=spec.n_density,
                                                n_keep=spec.n_density)
            values["density"] = dynamics.orbit_density(samples)
    except Exception as exc:  # per-cell failures never abort the sweep
        flags.append(f"error:{type(exc).__name__}")
    wall = int(round(1000.0 * (time.perf_counter() - t0)))
    return SweepResult(index=index, coords=tuple(coords), values=values,
                       flags=";".join(flags), wall_ms=wall)


def _checkpoint_path(spec: SweepSpec) -> str:
    return spec.output + ".ckpt.json"


def _load_checkpoint(spec: SweepSpec) -> dict:
    path = _checkpoint_path(spec)
    if not os.path.exists(path):
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if data.get("key") != spec.key():
        return {}
    return {int(k): v for k, v in data.get("rows", {}).items()}


def _save_checkpoint(spec: SweepSpec, rows: dict):
    path = _checkpoint_path(spec)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump({"key": spec.key(),
                   "rows": {str(k): v for k, v in rows.items()}}, fh)
    os.replace(tmp, path)


def run_sweep(spec: SweepSpec, checkpoint: bool = True,
              checkpoint_every: int = 32, max_cells: Optional[int] = None):
    """Evaluate the grid; yields CSV rows (strings) in cell order.

    With ``checkpoint`` enabled, finished rows persist in a sidecar JSON
    file; a rerun with the same spec skips them and the final CSV equals
    the uninterrupted one.  ``max_cells`` stops early after that many cells
    (checkpoint intact) to support interruption tests.
    """
    cells = spec.grid()
    rows = _load_checkpoint(spec) if checkpoint else {}
    todo = [i for i in range(len(cells)) if i not in rows]
    if max_cells is not None:
        todo = todo[:max_cells]
    workers = n_threads()
    since_save = 0
    if todo:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for res in pool.map(
                        lambda i: evaluate_cell(spec, i, cells[i]), todo):
                    rows[res.index] = res.csv_row()
                    since_save += 1
                    if checkpoint and since_save >= checkpoint_every:
                        _save_checkpoint(spec, rows)
                        since_save = 0
        else:
            for i in todo:
                res = evaluate_cell(spec, i, cells[i])
                rows[res.index] = res.csv_row()
                since_save += 1
                if checkpoint and since_save >= checkpoint_every:
                    _save_checkpoint(spec, rows)
                    since_save = 0
        if checkpoint:
            _save_checkpoint(spec, rows)
    complete = len(rows) == len(cells)
    yield CSV_HEADER
    if complete:
        for i in range(len(cells)):
            yield rows[i]


def write_sweep_csv(spec: SweepSpec, **kwargs) -> bool:
    """Run the sweep and write the CSV; returns True when complete."""
    lines = list(run_sweep(spec, **kwargs))
    if len(lines) == 1:  # interrupted run: header only, checkpoint saved
        return False
    with open(spec.output, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return True
