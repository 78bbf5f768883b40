"""Deterministic sweep execution over operating-point grids.

Each point is evaluated independently by a pure function of its parameter
dict; a worker pool (optional) distributes points and results are gathered
in index order, so the emitted rows are identical for any worker count.
Infeasible points (unstable, beyond the divergence floor) are flagged in
their row rather than aborting the sweep.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import dataclass

import numpy as np

from .correlations import DriveConfig, QuadratureConfig, g2_zero
from .errors import BeyondCriticalPoint, CriticalDivergence, InvalidDetuning, KerrcritError
from .model import LinearizedModel
from .spectrum import diagonalize, kerr_strength

SWEEP_VARIABLES = ("G", "Delta_c", "kappa_minus", "kappa_plus", "Delta_a")


@dataclass(frozen=True)
class SweepAxis:
    variable: str
    start: float
    stop: float
    steps: int
    scale: str = "linear"

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"cannot sweep {self.variable!r}; "
                             f"choose from {SWEEP_VARIABLES}")
        if self.steps < 2:
            raise ValueError("sweep needs at least 2 steps")
        if not self.start < self.stop:
            raise ValueError("sweep requires start < stop")
        if self.scale not in ("linear", "log"):
            raise ValueError("scale must be 'linear' or 'log'")
        if self.scale == "log" and self.start <= 0.0:
            raise ValueError("log scale requires positive start")

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.steps)
        return np.linspace(self.start, self.stop, self.steps)


def _spectrum_row(point: dict) -> dict:
    lin = LinearizedModel(G=point["G"], Delta_c=point["Delta_c"],
                          omega_a_tilde=point.get("omega_a_tilde", 0.0),
                          alpha=0j, beta=0j)
    row = {"G": point["G"], "Delta_c": point["Delta_c"],
           "omega_minus": math.nan, "omega_plus": math.nan,
           "eta": math.nan, "stable": 0,
           "zeta_minus": math.nan, "zeta_plus": math.nan, "flag": ""}
    try:
        nm = diagonalize(lin, point.get("omega_b", 1.0), point["g_a"])
    except InvalidDetuning:
        row["flag"] = "invalid_detuning"
        return row
    row["omega_minus"] = nm.omega_minus
    row["omega_plus"] = nm.omega_plus
    row["stable"] = int(nm.stable)
    if not nm.stable:
        row["flag"] = "unstable"
        return row
    try:
        frame = kerr_strength(nm, point["g_a"], point["G"], point["Delta_c"],
                              point.get("omega_b", 1.0),
                              divergence_floor=point.get("eta_floor", 1e-8))
    except CriticalDivergence as exc:
        row["flag"] = "critical_divergence"
        row["eta"] = exc.diagnostic_eta if exc.diagnostic_eta is not None else math.nan
        return row
    row["eta"] = frame.eta
    row["zeta_minus"] = frame.zeta_minus
    row["zeta_plus"] = frame.zeta_plus
    return row


def _g2_row(point: dict) -> dict:
    row = {"G": point["G"], "Delta_c": point["Delta_c"],
           "kappa_minus": point["kappa_minus"], "g2": math.nan,
           "error_bound": math.nan, "wallclock": 0.0, "flag": ""}
    start = time.perf_counter()
    lin = LinearizedModel(G=point["G"], Delta_c=point["Delta_c"],
                          omega_a_tilde=0.0, alpha=0j, beta=0j)
    try:
        nm = diagonalize(lin, point.get("omega_b", 1.0), point["g_a"])
        frame = kerr_strength(nm, point["g_a"], point["G"], point["Delta_c"],
                              point.get("omega_b", 1.0),
                              kappa_minus=point["kappa_minus"],
                              kappa_plus=point["kappa_plus"],
                              divergence_floor=point.get("eta_floor", 1e-8))
        delta_a = point.get("Delta_a")
        drive = DriveConfig(Delta_a=frame.eta if delta_a is None else delta_a,
                            kappa_a=point["kappa_a"])
        quad = point.get("quad") or QuadratureConfig()
        result = g2_zero(frame, drive, quad)
    except (BeyondCriticalPoint, InvalidDetuning):
        row["flag"] = "unstable"
        return row
    except CriticalDivergence:
        row["flag"] = "critical_divergence"
        return row
    except KerrcritError as exc:
        row["flag"] = type(exc).__name__
        return row
    row["g2"] = result.value
    row["error_bound"] = result.error_bound
    row["wallclock"] = time.perf_counter() - start
    return row


_EVALUATORS = {"spectrum": _spectrum_row, "kerr": _spectrum_row, "g2": _g2_row}


def _eval_indexed(args):
    index, mode, point = args
    return index, _EVALUATORS[mode](point)


def run_sweep(mode: str, base: dict, axes: list[SweepAxis],
              workers: int = 1) -> list[dict]:
    """Evaluate ``mode`` rows over the tensor grid of the sweep axes.

    Rows come back in grid order (last axis fastest) regardless of the
    worker count; each row carries a ``flag`` column, empty on success.
    """
    if mode not in _EVALUATORS:
        raise ValueError(f"unknown sweep mode {mode!r}")
    if not 1 <= len(axes) <= 2:
        raise ValueError("sweeps take one or two axes")
    grids = [axis.grid() for axis in axes]
    points = []
    if len(axes) == 1:
        for value in grids[0]:
            pt = dict(base)
            pt[axes[0].variable] = float(value)
            points.append(pt)
    else:
        for v0 in grids[0]:
            for v1 in grids[1]:
                pt = dict(base)
                pt[axes[0].variable] = float(v0)
                pt[axes[1].variable] = float(v1)
                points.append(pt)

    tasks = [(i, mode, pt) for i, pt in enumerate(points)]
    if workers <= 1:
        indexed = [_eval_indexed(t) for t in tasks]
    else:
        with multiprocessing.Pool(processes=workers) as pool:
            indexed = pool.map(_eval_indexed, tasks, chunksize=1)
    indexed.sort(key=lambda pair: pair[0])
    return [row for _, row in indexed]


def format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv_lines(rows: list[dict], header_lines: list[str]) -> list[str]:
    if not rows:
        return list(header_lines)
    columns = list(rows[0].keys())
    lines = list(header_lines)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_cell(row[c]) for c in columns))
    return lines
