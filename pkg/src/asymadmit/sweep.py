"""Minimum-damper maps over the off-diagonal stiffness plane.

``analytic_map`` evaluates the sufficient damper bound per cell;
``simulated_map`` searches the damper ladder ``0, h, 2h, ...`` per cell
with step-force simulations until the kinetic-energy criterion passes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigen import min_damping_sufficient
from .simulator import Scenario, simulate_batch_tail_ke
from .stiffness import AdmittanceParams, StiffnessMatrix, spiral_class, symmetric_eigenvalues

__all__ = ["SweepGrid", "default_axis", "analytic_map", "simulated_map"]

ANALYTIC = "analytic"
SIMULATED = "simulated"
INFEASIBLE = "infeasible"


def default_axis(lo: float = -80.0, hi: float = 80.0, step: float = 10.0) -> np.ndarray:
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def _check_axis(axis, name):
    axis = np.asarray(axis, dtype=float).ravel()
    if axis.size == 0:
        raise ValueError(f"{name} axis is empty")
    if np.any(np.diff(axis) <= 0):
        raise ValueError(f"{name} axis must be strictly increasing")
    return axis


@dataclass
class SweepGrid:
    """Per-cell minimum dampers, indexed ``[i_ks, i_ka]``.

    Infeasible cells hold ``nan``.
    """

    ks_values: np.ndarray
    ka_values: np.ndarray
    d_min: np.ndarray
    status: np.ndarray
    base: AdmittanceParams
    d_min_analytic: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.d_min.shape

    def cell(self, ks: float, ka: float) -> tuple[float, str]:
        i = int(np.argmin(np.abs(self.ks_values - ks)))
        j = int(np.argmin(np.abs(self.ka_values - ka)))
        return float(self.d_min[i, j]), str(self.status[i, j])

    def feasible(self) -> np.ndarray:
        return self.status != INFEASIBLE

    def rows(self):
        """``(ks, ka, d_min, status, d_min_analytic)`` with ks outermost."""
        for i, ks in enumerate(self.ks_values):
            for j, ka in enumerate(self.ka_values):
                yield (
                    float(ks),
                    float(ka),
                    float(self.d_min[i, j]),
                    str(self.status[i, j]),
                    float(self.d_min_analytic[i, j]),
                )


def _cell_stiffness(base: AdmittanceParams, ks: float, ka: float) -> StiffnessMatrix:
    return StiffnessMatrix(base.k.kx, base.k.ky, ks, ka)


def _analytic_value(base: AdmittanceParams, ks: float, ka: float) -> float:
    k = _cell_stiffness(base, ks, ka)
    if symmetric_eigenvalues(k)[1] <= 0:
        return math.nan
    # the repeated-eigenvalue boundary is defective and still rings, so only
    # the strictly real-distinct region gets a zero damper
    if spiral_class(k) == "free":
        return 0.0
    return min_damping_sufficient(k, base.m)


def analytic_map(base: AdmittanceParams, ks_axis=None, ka_axis=None) -> SweepGrid:
    """Sufficient minimum damper per cell; zero inside the spiral-free region."""
    ks_axis = _check_axis(default_axis() if ks_axis is None else ks_axis, "ks")
    ka_axis = _check_axis(default_axis() if ka_axis is None else ka_axis, "ka")
    vals = np.array([[_analytic_value(base, ks, ka) for ka in ka_axis] for ks in ks_axis])
    status = np.where(np.isnan(vals), INFEASIBLE, ANALYTIC).astype(object)
    return SweepGrid(ks_axis, ka_axis, vals, status, base, vals.copy(), {"kind": ANALYTIC})


def _search_cells(args):
    """Ascend the damper ladder for a chunk of cells; returns first passing d."""
    cells, base, inc, sc, window, threshold, per_round = args
    n = len(cells)
    ks = np.array([c[0] for c in cells], dtype=float)
    ka = np.array([c[1] for c in cells], dtype=float)
    kmax = np.array([c[2] for c in cells], dtype=int)
    found = np.full(n, -1)
    nxt = np.zeros(n, dtype=int)
    while True:
        todo = np.flatnonzero((found < 0) & (nxt <= kmax))
        if todo.size == 0:
            break
        rows, ladder = [], []
        for c in todo:
            top = min(nxt[c] + per_round, kmax[c] + 1)
            for kk in range(nxt[c], top):
                rows.append(c)
                ladder.append(kk)
            nxt[c] = top
        rows = np.array(rows)
        ladder = np.array(ladder)
        d = ladder * inc
        B = rows.size
        ke, diverged = simulate_batch_tail_ke(
            np.full(B, base.m), d,
            np.full(B, base.k.kx), np.full(B, base.k.ky),
            ks[rows], ka[rows], sc, window,
        )
        passed = (ke < threshold) & ~diverged
        for c in todo:
            hits = ladder[(rows == c) & passed]
            if hits.size:
                found[c] = hits.min()
    return found


def simulated_map(
    base: AdmittanceParams,
    ks_axis=None,
    ka_axis=None,
    d_increment: float = 0.1,
    duration: float = 5.0,
    window: float = 0.1,
    threshold: float = 0.2,
    force=(0.0, 10.0),
    dt: float = 1e-3,
    integrator: str = "semi_implicit",
    workers: int = 1,
    per_round: int = 6,
) -> SweepGrid:
    """Smallest damper on the ``d_increment`` ladder that passes the criterion.

    Each cell is searched upward from ``d = 0``; a cell with no passing
    damper up to ``10 * analytic + 1`` is infeasible, as are cells whose
    symmetric stiffness is not positive definite.  Results do not depend on
    ``workers`` or ``per_round``.
    """
    if not d_increment > 0:
        raise ValueError("d_increment must be positive")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    ana = analytic_map(base, ks_axis, ka_axis)
    sc = Scenario.step_force(force[0], force[1], duration=duration, dt=dt, integrator=integrator)
    cells, where = [], []
    for i, ks in enumerate(ana.ks_values):
        for j, ka in enumerate(ana.ka_values):
            a = ana.d_min[i, j]
            if math.isnan(a):
                continue
            cap = 10.0 * a + 1.0
            kmax = int(math.floor(cap / d_increment + 1e-9))
            cells.append((float(ks), float(ka), kmax))
            where.append((i, j))

    n_chunks = max(1, min(len(cells), workers * 4 if workers > 1 else 1))
    chunks = [cells[c::n_chunks] for c in range(n_chunks)]
    index = [list(range(len(cells)))[c::n_chunks] for c in range(n_chunks)]
    jobs = [(ch, base, d_increment, sc, window, threshold, per_round) for ch in chunks if ch]
    if workers == 1:
        results = [_search_cells(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_search_cells, jobs))

    d_min = np.full(ana.shape, math.nan)
    status = np.full(ana.shape, INFEASIBLE, dtype=object)
    for idx, res in zip([ix for ix, ch in zip(index, chunks) if ch], results):
        for cell_no, k in zip(idx, res):
            i, j = where[cell_no]
            if k >= 0:
                d_min[i, j] = k * d_increment
                status[i, j] = SIMULATED
    meta = {
        "kind": SIMULATED,
        "d_increment": d_increment,
        "duration": duration,
        "window": window,
        "threshold": threshold,
        "force": list(force),
        "dt": dt,
        "integrator": integrator,
    }
    return SweepGrid(ana.ks_values, ana.ka_values, d_min, status, base, ana.d_min, meta)
