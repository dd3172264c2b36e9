"""Power, energy bookkeeping and local passivity checks.

Substituting the admittance model into the supplied work ``int v.F dt``
splits it into kinetic energy, potential energy of the symmetric stiffness,
viscous loss and the work of the antisymmetric (curl) stiffness.  Only the
last term can feed energy into the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .stiffness import AdmittanceParams

__all__ = [
    "DEADBAND",
    "EnergyBreakdown",
    "ViolationInterval",
    "power",
    "energy_breakdown",
    "passivity_violations",
]

DEADBAND = 1e-12


def power(s, f) -> float:
    """Mechanical power ``v . f`` (W); ``s`` is a state or a velocity pair."""
    if hasattr(s, "vx"):
        vx, vy = s.vx, s.vy
    else:
        vx, vy = s
    return float(vx * f[0] + vy * f[1])


@dataclass(frozen=True)
class EnergyBreakdown:
    """Per-sample energy terms (J).

    ``potential`` and ``storage`` use absolute coordinates.  The
    ``*_shifted`` series are taken about the trajectory's reference
    equilibrium and are what :func:`passivity_violations` inspects.
    """

    t: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    dissipated: np.ndarray
    curl_work: np.ndarray
    supplied: np.ndarray
    total: np.ndarray
    storage: np.ndarray
    storage_shifted: np.ndarray
    supplied_shifted: np.ndarray
    speed: np.ndarray

    @property
    def balance_residual(self) -> np.ndarray:
        return self.total - self.supplied

    def __len__(self):
        return self.t.size


def _quad(x, y, K):
    return np.einsum("ni,ij,nj->n", x, K, y)


def energy_breakdown(tr, p: AdmittanceParams) -> EnergyBreakdown:
    """Evaluate the four energy terms on a trajectory's sample grid.

    Integrals use the cumulative trapezoidal rule and start at zero.
    """
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    Ks, Ka = p.k.symmetric, p.k.antisymmetric
    x = tr.position
    v = tr.velocity
    t = tr.t
    speed2 = v[:, 0] ** 2 + v[:, 1] ** 2

    def integral(y):
        if t.size < 2:
            return np.zeros_like(y)
        return cumulative_trapezoid(y, t, initial=0.0)

    kinetic = 0.5 * p.m * speed2
    potential = 0.5 * _quad(x, x, Ks)
    dissipated = integral(p.d * speed2)
    curl_work = integral(_quad(v, x, Ka))
    supplied = integral(np.einsum("ni,ni->n", v, tr.force))
    e = tr.offset
    storage_shifted = kinetic + 0.5 * _quad(e, e, Ks)
    supplied_shifted = integral(np.einsum("ni,ni->n", v, tr.force_rel))
    return EnergyBreakdown(
        t=t,
        kinetic=kinetic,
        potential=potential,
        dissipated=dissipated,
        curl_work=curl_work,
        supplied=supplied,
        total=kinetic + potential + dissipated + curl_work,
        storage=kinetic + potential,
        storage_shifted=storage_shifted,
        supplied_shifted=supplied_shifted,
        speed=np.sqrt(speed2),
    )


@dataclass(frozen=True)
class ViolationInterval:
    start: float
    end: float
    gain: float


def passivity_violations(eb: EnergyBreakdown, deadband: float = DEADBAND) -> list[ViolationInterval]:
    """Maximal intervals on which stored energy grows faster than it is supplied.

    A step counts when ``storage_shifted - supplied_shifted`` rises by more
    than ``deadband`` J between consecutive samples.
    """
    if len(eb) == 0:
        raise ValueError("empty energy series")
    g = eb.storage_shifted - eb.supplied_shifted
    rising = np.diff(g) > deadband
    out = []
    i = 0
    n = rising.size
    while i < n:
        if not rising[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and rising[j + 1]:
            j += 1
        out.append(ViolationInterval(float(eb.t[i]), float(eb.t[j + 1]), float(g[j + 1] - g[i])))
        i = j + 1
    return out
