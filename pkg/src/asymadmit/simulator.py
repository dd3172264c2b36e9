"""Fixed-step simulation of the planar admittance model.

``m a = F_ext - d v - K x`` is integrated with a semi-implicit (symplectic)
Euler update by default; a classical RK4 update is available for
cross-checks.  Runs are integrated in coordinates relative to the
equilibrium of the last force segment so that late, tiny oscillations stay
resolvable in double precision; absolute positions are reconstructed on
output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .stiffness import AdmittanceParams, StiffnessMatrix, stiffness_discriminant

__all__ = [
    "DIVERGENCE_LIMIT",
    "INTEGRATORS",
    "DivergenceError",
    "SimState",
    "Wall",
    "Scenario",
    "Trajectory",
    "step",
    "simulate",
    "simulate_batch_tail_ke",
    "damping_from_zeta",
    "tail_count",
    "detect_convergence",
    "detect_spiral",
    "overshoot",
]

DIVERGENCE_LIMIT = 1e9
INTEGRATORS = ("semi_implicit", "rk4")


class DivergenceError(RuntimeError):
    """State magnitude exceeded :data:`DIVERGENCE_LIMIT`."""


@dataclass(frozen=True)
class SimState:
    x: float = 0.0
    y: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    t: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.vx, self.vy])


def step(s: SimState, f, p: AdmittanceParams, dt: float) -> SimState:
    """One semi-implicit Euler step under force ``f = (fx, fy)``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    k = p.k
    fx, fy = float(f[0]), float(f[1])
    ax = (fx - p.d * s.vx - (k.kx * s.x + (k.ks + k.ka) * s.y)) / p.m
    ay = (fy - p.d * s.vy - ((k.ks - k.ka) * s.x + k.ky * s.y)) / p.m
    vx = s.vx + ax * dt
    vy = s.vy + ay * dt
    new = SimState(s.x + vx * dt, s.y + vy * dt, vx, vy, s.t + dt)
    if max(abs(new.x), abs(new.y), abs(vx), abs(vy)) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"state exceeded {DIVERGENCE_LIMIT:g} at t={new.t:g}")
    return new


@dataclass(frozen=True)
class Wall:
    """Unilateral penalty wall ``sign * (x[axis] - position) <= 0``.

    Penetration ``p > 0`` produces a restoring force ``-sign * stiffness * p``
    along ``axis``.
    """

    axis: int = 1
    position: float = 0.1
    stiffness: float = 1e4
    sign: float = 1.0


@dataclass(frozen=True)
class Scenario:
    """Piecewise-constant force schedule plus integration settings.

    ``force_schedule`` is a sequence of ``(t_start, fx, fy)`` with
    increasing start times, the first at ``t <= 0``; each force holds until
    the next start.
    """

    force_schedule: tuple = ((0.0, 0.0, 10.0),)
    duration: float = 5.0
    dt: float = 1e-3
    initial: SimState = field(default_factory=SimState)
    integrator: str = "semi_implicit"
    wall: Optional[Wall] = None

    def __post_init__(self):
        sched = tuple((float(t), float(fx), float(fy)) for t, fx, fy in self.force_schedule)
        object.__setattr__(self, "force_schedule", sched)
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration >= self.dt:
            raise ValueError("duration must be at least one step")
        if not sched or sched[0][0] > 0:
            raise ValueError("force schedule must start at or before t=0")
        starts = [s[0] for s in sched]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("force schedule start times must increase")
        if not all(math.isfinite(v) for s in sched for v in s):
            raise ValueError("force schedule must be finite")
        if self.integrator not in INTEGRATORS:
            raise ValueError(f"unknown integrator {self.integrator!r}")

    @classmethod
    def step_force(cls, fx=0.0, fy=10.0, duration=5.0, dt=1e-3, **kw) -> "Scenario":
        return cls(force_schedule=((0.0, fx, fy),), duration=duration, dt=dt, **kw)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def segment_index(self, times) -> np.ndarray:
        starts = np.array([s[0] for s in self.force_schedule])
        # small slack so a start time that lands on a sample is honoured
        idx = np.searchsorted(starts, np.asarray(times) + 1e-9 * self.dt, side="right") - 1
        return np.clip(idx, 0, len(starts) - 1)

    def forces(self, times) -> np.ndarray:
        table = np.array([[fx, fy] for _, fx, fy in self.force_schedule])
        return table[self.segment_index(times)]


@dataclass
class Trajectory:
    """Sampled run.

    Positions are stored as ``offset`` from ``origin`` (the equilibrium of
    the last force segment, or zero when ``K`` is singular);
    ``force_rel`` is the force acting in that shifted frame.
    """

    t: np.ndarray
    origin: np.ndarray
    offset: np.ndarray
    velocity: np.ndarray
    force: np.ndarray
    force_rel: np.ndarray
    params: AdmittanceParams
    dt: float
    integrator: str = "semi_implicit"
    diverged: bool = False
    status: str = "oscillating"
    energy: Optional[object] = None

    @property
    def position(self) -> np.ndarray:
        return self.origin + self.offset

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0]) if self.t.size else 0.0

    def __len__(self):
        return self.t.size

    def final_state(self) -> SimState:
        x, y = self.position[-1]
        vx, vy = self.velocity[-1]
        return SimState(float(x), float(y), float(vx), float(vy), float(self.t[-1]))


def _equilibrium(K: np.ndarray, f: np.ndarray) -> Optional[np.ndarray]:
    det = K[0, 0] * K[1, 1] - K[0, 1] * K[1, 0]
    if det == 0:
        return None
    return np.linalg.solve(K, f)


class _Batch:
    """Vectorized integrator over ``B`` independent parameter rows."""

    def __init__(self, m, d, kx, ky, ks, ka, dt, integrator, wall=None):
        self.m = np.asarray(m, dtype=float)
        self.d = np.asarray(d, dtype=float)
        self.kxx = np.asarray(kx, dtype=float)
        self.kyy = np.asarray(ky, dtype=float)
        ks = np.asarray(ks, dtype=float)
        ka = np.asarray(ka, dtype=float)
        self.kxy = ks + ka
        self.kyx = ks - ka
        self.dt = dt
        self.integrator = integrator
        self.wall = wall

    def accel(self, ex, ey, vx, vy, fx, fy, ox, oy):
        if self.wall is not None:
            fx, fy = self._wall_force(ex + ox, ey + oy, fx, fy)
        ax = (fx - self.d * vx - (self.kxx * ex + self.kxy * ey)) / self.m
        ay = (fy - self.d * vy - (self.kyx * ex + self.kyy * ey)) / self.m
        return ax, ay

    def _wall_force(self, x, y, fx, fy):
        w = self.wall
        pos = x if w.axis == 0 else y
        pen = np.maximum(w.sign * (pos - w.position), 0.0)
        push = -w.sign * w.stiffness * pen
        if w.axis == 0:
            return fx + push, fy
        return fx, fy + push

    def advance(self, ex, ey, vx, vy, fx, fy, ox, oy):
        dt = self.dt
        if self.integrator == "semi_implicit":
            ax, ay = self.accel(ex, ey, vx, vy, fx, fy, ox, oy)
            vx = vx + ax * dt
            vy = vy + ay * dt
            return ex + vx * dt, ey + vy * dt, vx, vy
        h = 0.5 * dt
        a1x, a1y = self.accel(ex, ey, vx, vy, fx, fy, ox, oy)
        v2x, v2y = vx + h * a1x, vy + h * a1y
        a2x, a2y = self.accel(ex + h * vx, ey + h * vy, v2x, v2y, fx, fy, ox, oy)
        v3x, v3y = vx + h * a2x, vy + h * a2y
        a3x, a3y = self.accel(ex + h * v2x, ey + h * v2y, v3x, v3y, fx, fy, ox, oy)
        v4x, v4y = vx + dt * a3x, vy + dt * a3y
        a4x, a4y = self.accel(ex + dt * v3x, ey + dt * v3y, v4x, v4y, fx, fy, ox, oy)
        s = dt / 6.0
        ex = ex + s * (vx + 2 * v2x + 2 * v3x + v4x)
        ey = ey + s * (vy + 2 * v2y + 2 * v3y + v4y)
        vx = vx + s * (a1x + 2 * a2x + 2 * a3x + a4x)
        vy = vy + s * (a1y + 2 * a2y + 2 * a3y + a4y)
        return ex, ey, vx, vy


def _frame(batch: _Batch, sc: Scenario):
    """Per-row origin and per-segment shifted forces, shapes (B,2), (S,B,2)."""
    n = batch.m.size
    table = np.array([[fx, fy] for _, fx, fy in sc.force_schedule])
    origin = np.zeros((n, 2))
    rel = np.repeat(table[:, None, :], n, axis=1)
    last = table[-1]
    for b in range(n):
        K = np.array([[batch.kxx[b], batch.kxy[b]], [batch.kyx[b], batch.kyy[b]]])
        eq = _equilibrium(K, last) if sc.wall is None else None
        if eq is None:
            continue
        origin[b] = eq
        rel[:, b, :] = table - K @ eq
        rel[-1, b, :] = 0.0  # exact equilibrium of the final segment
    return origin, rel


def _run(batch: _Batch, sc: Scenario, tail: Optional[int] = None):
    """Integrate all rows.

    Returns ``(origin, e, v, diverged)`` where ``e``/``v`` have shape
    ``(n_samples, B, 2)`` or ``(tail, B, 2)`` when ``tail`` is given.
    """
    n_steps = sc.n_steps
    n_samples = n_steps + 1
    origin, rel = _frame(batch, sc)
    seg = sc.segment_index(sc.times())
    B = batch.m.size
    keep = n_samples if tail is None else min(tail, n_samples)
    first_kept = n_samples - keep
    E = np.empty((keep, B, 2))
    V = np.empty((keep, B, 2))

    ox, oy = origin[:, 0], origin[:, 1]
    ex = np.full(B, sc.initial.x) - ox
    ey = np.full(B, sc.initial.y) - oy
    vx = np.full(B, sc.initial.vx)
    vy = np.full(B, sc.initial.vy)
    diverged = np.zeros(B, dtype=bool)

    def record(i):
        if i >= first_kept:
            j = i - first_kept
            E[j, :, 0], E[j, :, 1] = ex, ey
            V[j, :, 0], V[j, :, 1] = vx, vy

    record(0)
    for i in range(n_steps):
        f = rel[seg[i]]
        nex, ney, nvx, nvy = batch.advance(ex, ey, vx, vy, f[:, 0], f[:, 1], ox, oy)
        bad = (
            (np.abs(nex + ox) > DIVERGENCE_LIMIT)
            | (np.abs(ney + oy) > DIVERGENCE_LIMIT)
            | (np.abs(nvx) > DIVERGENCE_LIMIT)
            | (np.abs(nvy) > DIVERGENCE_LIMIT)
            | ~np.isfinite(nex + ney + nvx + nvy)
        )
        diverged |= bad
        # diverged rows are frozen at their last valid state
        ex = np.where(diverged, ex, nex)
        ey = np.where(diverged, ey, ney)
        vx = np.where(diverged, vx, nvx)
        vy = np.where(diverged, vy, nvy)
        record(i + 1)
    return origin, E, V, diverged, rel, seg


def tail_count(window: float, dt: float) -> int:
    """Number of trailing samples that make up a ``window``-second average."""
    return max(1, int(round(window / dt)))


def _status(diverged: bool, converged: bool) -> str:
    if diverged:
        return "diverged"
    return "converged" if converged else "oscillating"


def simulate(
    p: AdmittanceParams,
    sc: Scenario,
    window: float = 0.1,
    threshold: float = 0.2,
) -> Trajectory:
    """Run one scenario and attach the energy breakdown and a status.

    A diverged run keeps its samples up to the guard trip; later samples
    repeat the last valid state and the status is ``"diverged"``.
    """
    from .energy import energy_breakdown

    k = p.k
    batch = _Batch([p.m], [p.d], [k.kx], [k.ky], [k.ks], [k.ka], sc.dt, sc.integrator, sc.wall)
    origin, E, V, diverged, rel, seg = _run(batch, sc)
    times = sc.times()
    tr = Trajectory(
        t=times,
        origin=origin[0].copy(),
        offset=E[:, 0, :].copy(),
        velocity=V[:, 0, :].copy(),
        force=sc.forces(times),
        force_rel=rel[seg, 0, :].copy(),
        params=p,
        dt=sc.dt,
        integrator=sc.integrator,
        diverged=bool(diverged[0]),
    )
    tr.energy = energy_breakdown(tr, p)
    converged = (not tr.diverged) and detect_convergence(tr, window, threshold)
    tr.status = _status(tr.diverged, converged)
    return tr


def simulate_batch_tail_ke(
    m, d, kx, ky, ks, ka, sc: Scenario, window: float = 0.1
) -> tuple[np.ndarray, np.ndarray]:
    """Mean kinetic energy over the final window for many parameter rows.

    Uses the same update as :func:`simulate`; returns ``(mean_ke, diverged)``.
    """
    batch = _Batch(m, d, kx, ky, ks, ka, sc.dt, sc.integrator, sc.wall)
    n_tail = tail_count(window, sc.dt)
    _, _, V, diverged, _, _ = _run(batch, sc, tail=n_tail)
    ke = 0.5 * batch.m[None, :] * (V[..., 0] ** 2 + V[..., 1] ** 2)
    return ke.mean(axis=0), diverged


def damping_from_zeta(k: StiffnessMatrix, m: float, zeta: float) -> float:
    """Damper ``zeta`` times the larger critical damper.

    For stiffness matrices with complex eigenvalues the real part of the
    (complex) critical value is used, so ``zeta`` stays a usable sweep
    parameter.
    """
    if zeta < 0:
        raise ValueError("zeta must be non-negative")
    if m <= 0:
        raise ValueError("mass must be positive")
    kxm, kym = k.kx / m, k.ky / m
    disc = stiffness_discriminant(kxm, kym, k.ks / m, k.ka / m)
    if disc >= 0:
        inner = 2.0 * (kxm + kym + math.sqrt(disc))
        base = math.sqrt(inner) if inner >= 0 else 0.0
    else:
        base = (2.0 * complex(kxm + kym, math.sqrt(-disc))) ** 0.5
        base = base.real
    return m * zeta * base


def detect_convergence(tr: Trajectory, window: float = 0.1, threshold: float = 0.2) -> bool:
    """Mean kinetic energy over the final ``window`` seconds below ``threshold`` J."""
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    if window > tr.duration + 1e-12:
        raise ValueError("window longer than the trajectory")
    n = tail_count(window, tr.dt)
    v = tr.velocity[-n:]
    ke = 0.5 * tr.params.m * (v[:, 0] ** 2 + v[:, 1] ** 2)
    return bool(ke.mean() < threshold)


def detect_spiral(tr: Trajectory) -> float:
    """Signed number of turns swept by the position about the final point.

    Positive is counter-clockwise.  ``abs(result) >= 1`` marks a spiral path.
    """
    if len(tr) < 3:
        raise ValueError("need at least three samples")
    rel = tr.offset - tr.offset[-1]
    nonzero = np.any(rel != 0, axis=1)
    rel = rel[nonzero]
    if len(rel) < 2:
        return 0.0
    a, b = rel[:-1], rel[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    return float(np.arctan2(cross, dot).sum() / (2 * np.pi))


def overshoot(tr: Trajectory, axis: int = 1) -> float:
    """Largest excursion past the reference equilibrium along ``axis`` (m).

    Measured in the direction of travel from the initial position; a value
    ``> 0`` means the response overshoots.
    """
    e = tr.offset[:, axis]
    direction = -np.sign(e[0])
    if direction == 0:
        return float(np.abs(e).max())
    return float((direction * e).max())
