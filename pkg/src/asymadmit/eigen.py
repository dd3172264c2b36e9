"""Eigen-analysis of the planar admittance model.

The state is ordered ``(vx, vy, x, y)`` and the system matrix is::

    A = [[-d_m I, -K/m],
         [   I  ,   0 ]]

Its characteristic polynomial factors through the stiffness eigenvalues
``mu`` as ``lambda^2 + d_m lambda + mu = 0``, which gives the closed form
used below.  When ``K`` has complex eigenvalues the inner square root is
imaginary and the outer one is taken through an explicit real/imaginary
split so its real part can be reasoned about directly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .stiffness import (
    AdmittanceParams,
    StiffnessMatrix,
    is_spiral_free,
    spiral_class,
    stiffness_discriminant,
    symmetric_eigenvalues,
)

__all__ = [
    "MARGINAL_BAND",
    "BISECTION_TOL",
    "ConvergenceError",
    "BracketError",
    "EigenSet",
    "ComplexBranch",
    "complex_branch",
    "branch_real_part",
    "branch_real_part_gradient",
    "system_matrix",
    "characteristic_coefficients",
    "eigenvalues_closed_form",
    "aberth_roots",
    "eigenvalues_oracle",
    "max_real_part",
    "multiset_deviation",
    "critical_damping",
    "min_damping_sufficient",
    "min_damping_exact",
    "RootLocusTrace",
    "root_locus",
    "default_damping_samples",
    "StabilityReport",
    "stability_report",
]

MARGINAL_BAND = 1e-9
BISECTION_TOL = 1e-6


class ConvergenceError(RuntimeError):
    """The polynomial root finder hit its iteration cap."""


class BracketError(ValueError):
    """No stabilizing damper exists inside the search bracket."""


def _order(values) -> tuple[complex, ...]:
    values = [complex(v) for v in values]
    scale = max((abs(v) for v in values), default=0.0)
    # snap real parts that differ only by rounding so conjugate pairs sort stably
    snap = 1e-12 * scale if scale > 0 else 0.0

    def key(z):
        re = round(z.real / snap) * snap if snap else z.real
        return (-re, -z.imag)

    return tuple(sorted(values, key=key))


@dataclass(frozen=True)
class EigenSet:
    """Four system eigenvalues (1/s), ordered by (Re desc, Im desc)."""

    values: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", _order(self.values))

    @property
    def max_real_part(self) -> float:
        return max(v.real for v in self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class ComplexBranch:
    """Principal square root ``a + b j`` of ``alpha + beta j``."""

    alpha: float
    beta: float
    a: float
    b: float


def complex_branch(alpha: float, beta: float) -> ComplexBranch:
    """Split ``sqrt(alpha + beta j)`` into real part ``a >= 0`` and ``b``.

    Uses ``a = sqrt((alpha + |z|) / 2)`` and ``b = beta / (2 a)``, switching
    the roles of ``a`` and ``b`` when ``alpha < 0`` to avoid cancellation.
    """
    mod = math.hypot(alpha, beta)
    if alpha >= 0:
        a = math.sqrt(0.5 * (alpha + mod))
        b = beta / (2.0 * a) if a > 0 else 0.0
    else:
        b = math.copysign(math.sqrt(0.5 * (mod - alpha)), beta)
        a = beta / (2.0 * b) if b != 0 else 0.0
    return ComplexBranch(alpha=alpha, beta=beta, a=a, b=b)


def _alpha_plus_mod(alpha, beta):
    # alpha + |alpha + beta j| without cancellation for alpha < 0
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    mod = np.hypot(alpha, beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = np.where(mod - alpha > 0, beta * beta / (mod - alpha), 0.0)
    return np.where(alpha >= 0, alpha + mod, neg), mod


def branch_real_part(alpha, beta):
    """``sqrt((alpha + sqrt(alpha^2 + beta^2)) / 2)``, element-wise."""
    s, _ = _alpha_plus_mod(alpha, beta)
    return np.sqrt(0.5 * s)


def branch_real_part_gradient(alpha, beta):
    """Partial derivatives of :func:`branch_real_part` w.r.t. alpha and beta.

    Undefined where the real part is zero (``beta = 0, alpha <= 0``).
    """
    s, mod = _alpha_plus_mod(alpha, beta)
    denom = 2.0 * math.sqrt(2.0) * mod * np.sqrt(s)
    return s / denom, np.asarray(beta, dtype=float) / denom


def system_matrix(p: AdmittanceParams) -> np.ndarray:
    """4x4 state matrix over ``(vx, vy, x, y)``."""
    A = np.zeros((4, 4))
    A[0, 0] = A[1, 1] = -p.d_m
    A[0, 2] = -p.k_xm
    A[0, 3] = -p.k_sm - p.k_am
    A[1, 2] = -p.k_sm + p.k_am
    A[1, 3] = -p.k_ym
    A[2, 0] = A[3, 1] = 1.0
    return A


def characteristic_coefficients(p: AdmittanceParams) -> np.ndarray:
    """Monic quartic ``(l^2 + d l + kx)(l^2 + d l + ky) - (ks^2 - ka^2)``.

    All quantities mass-normalized; highest degree first.
    """
    d, kx, ky = p.d_m, p.k_xm, p.k_ym
    ks, ka = p.k_sm, p.k_am
    return np.array(
        [
            1.0,
            2.0 * d,
            d * d + kx + ky,
            d * (kx + ky),
            kx * ky - ks * ks + ka * ka,
        ]
    )


def _pair(d_m: float, mu: complex, root: complex) -> tuple[complex, complex]:
    # roots of l^2 + d_m l + mu with root = sqrt(d_m^2 - 4 mu), Re(root) >= 0;
    # the far root has no cancellation and the near one follows from Vieta
    far = -0.5 * (d_m + root)
    if far == 0:
        return 0j, 0j
    return complex(far), complex(mu / far)


def eigenvalues_closed_form(p: AdmittanceParams) -> EigenSet:
    """All four eigenvalues from the nested-radical formula."""
    d_m = p.d_m
    s = p.k_xm + p.k_ym
    disc = stiffness_discriminant(p.k_xm, p.k_ym, p.k_sm, p.k_am)
    values: list[complex] = []
    if disc >= 0:
        r = math.sqrt(disc)
        for sign in (1.0, -1.0):
            mu = 0.5 * (s + sign * r)
            rad = d_m * d_m - 2.0 * (s + sign * r)
            root = math.sqrt(rad) if rad >= 0 else complex(0.0, math.sqrt(-rad))
            values.extend(_pair(d_m, mu, root))
    else:
        # d_m^2 - 4 mu = alpha +/- beta j with mu = (s -/+ j sqrt(-disc)) / 2
        br = complex_branch(d_m * d_m - 2.0 * s, 2.0 * math.sqrt(-disc))
        half_imag = 0.5 * math.sqrt(-disc)
        for sign in (1.0, -1.0):
            mu = complex(0.5 * s, -sign * half_imag)
            values.extend(_pair(d_m, mu, complex(br.a, sign * br.b)))
    return EigenSet(tuple(values))


def max_real_part(p: AdmittanceParams) -> float:
    return eigenvalues_closed_form(p).max_real_part


def _horner(coeffs, z):
    p = complex(coeffs[0])
    dp = 0j
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def aberth_roots(coeffs: Sequence[float], max_iter: int = 500) -> np.ndarray:
    """All complex roots of a real polynomial by Aberth-Ehrlich iteration.

    Parameters
    ----------
    coeffs : sequence of float
        Coefficients, highest degree first; the leading one must be nonzero.
    max_iter : int
        Iteration cap; exceeding it raises :class:`ConvergenceError`.

    Notes
    -----
    Roots are accepted once the residual falls below a running-error bound
    of Horner's scheme, so a root of multiplicity ``k`` is only resolved to
    about ``eps**(1/k)`` relative accuracy.
    """
    c = [float(v) for v in coeffs]
    if not c or c[0] == 0:
        raise ValueError("leading coefficient must be nonzero")
    c = [v / c[0] for v in c]
    n_zero = 0
    while len(c) > 1 and c[-1] == 0:
        c.pop()
        n_zero += 1
    n = len(c) - 1
    if n == 0:
        return np.zeros(n_zero, dtype=complex)

    # initial guesses on a circle of geometric-mean radius around the centroid
    center = -c[1] / n
    radius = abs(_horner(c, center)[0]) ** (1.0 / n)
    radius = max(radius, 1e-12 * (1.0 + abs(center)))
    z = [center + radius * cmath.exp(1j * (2 * math.pi * k / n + 0.4)) for k in range(n)]

    eps = np.finfo(float).eps
    absc = [abs(v) for v in c]
    for _ in range(max_iter):
        moved = False
        done = True
        for i in range(n):
            zi = z[i]
            p, dp = _horner(c, zi)
            bound = 8 * eps * _horner(absc, abs(zi))[0].real
            if abs(p) <= bound:
                continue
            done = False
            s = 0j
            for j in range(n):
                if j != i:
                    diff = zi - z[j]
                    s += 1.0 / diff if diff != 0 else 0j
            if dp == 0:
                w = complex(radius * 1e-3, radius * 1e-3)
            else:
                ratio = p / dp
                denom = 1.0 - ratio * s
                w = ratio / denom if denom != 0 else ratio
            z[i] = zi - w
            if abs(w) > 4 * eps * abs(z[i]):
                moved = True
        if done or not moved:
            return np.array(z + [0j] * n_zero, dtype=complex)
    raise ConvergenceError(f"no convergence after {max_iter} iterations")


def eigenvalues_oracle(p: AdmittanceParams) -> EigenSet:
    """Eigenvalues by numerically solving the characteristic quartic."""
    return EigenSet(tuple(aberth_roots(characteristic_coefficients(p))))


def multiset_deviation(a, b, relative: bool = True) -> float:
    """Largest distance between two root multisets under the best matching.

    With ``relative=True`` the distance is divided by the largest modulus in
    either set (absolute distance if both sets are all zeros).
    """
    a = np.asarray(list(a), dtype=complex)
    b = np.asarray(list(b), dtype=complex)
    if a.shape != b.shape:
        raise ValueError("multisets differ in size")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    dev = float(cost[rows, cols].max()) if a.size else 0.0
    if relative:
        scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0))
        if scale > 0:
            dev /= scale
    return dev


def critical_damping(
    k: StiffnessMatrix, m: float
) -> Optional[tuple[float, float]]:
    """Dampers (N s/m) at which a conjugate pair meets the real axis.

    Returns ``(larger, smaller)``, or ``None`` when the stiffness
    eigenvalues are complex (no real critical damping exists) or when a
    stiffness eigenvalue is negative (that mode is already real-valued).
    """
    if m <= 0:
        raise ValueError("mass must be positive")
    if not is_spiral_free(k):
        return None
    kxm, kym = k.kx / m, k.ky / m
    r = math.sqrt(stiffness_discriminant(kxm, kym, k.ks / m, k.ka / m))
    lo = 2.0 * (kxm + kym - r)
    if lo < 0:
        return None
    return m * math.sqrt(2.0 * (kxm + kym + r)), m * math.sqrt(lo)


def min_damping_sufficient(k: StiffnessMatrix, m: float) -> float:
    """Damper above which stability is guaranteed, ``sqrt(ka^2 m / k_min)``.

    ``k_min`` is the smaller diagonal stiffness after rotating ``ks`` into
    the diagonal, i.e. the smaller eigenvalue of the symmetric part.  This
    leaves trace and determinant of ``K`` unchanged, and hence all system
    eigenvalues.
    """
    if m <= 0:
        raise ValueError("mass must be positive")
    k_min = min(k.kx, k.ky) if k.ks == 0 else symmetric_eigenvalues(k)[1]
    if k_min <= 0:
        raise ValueError(
            "symmetric part of K is not positive definite "
            f"(smallest effective diagonal stiffness {k_min:g})"
        )
    return math.sqrt(k.ka * k.ka * m / k_min)


def min_damping_exact(
    k: StiffnessMatrix, m: float, tol: float = BISECTION_TOL
) -> float:
    """Smallest damper with no eigenvalue in the open right half-plane.

    Bisection on ``max_real_part``; eigenvalues within ``MARGINAL_BAND`` of
    the imaginary axis count as non-positive.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if symmetric_eigenvalues(k)[1] <= 0:
        raise BracketError("symmetric part of K is not positive definite")

    def ok(d):
        return max_real_part(AdmittanceParams(m, d, k)) <= MARGINAL_BAND

    if ok(0.0):
        return 0.0
    candidates = [min_damping_sufficient(k, m)]
    crit = critical_damping(k, m)
    if crit is not None:
        candidates.extend(crit)
    hi = 2.0 * max(candidates)
    if hi <= 0 or not ok(hi):
        raise BracketError(f"unstable at the bracket top d={hi:g}")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class RootLocusTrace:
    """Branch-continuous eigenvalue curves over a damper sweep.

    ``values[i, j]`` is branch ``j`` at ``d_m[i]``.
    """

    d_m: np.ndarray
    values: np.ndarray

    def __len__(self):
        return self.d_m.size

    def eigen_sets(self) -> list[EigenSet]:
        return [EigenSet(tuple(row)) for row in self.values]


def _match(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    cost = np.abs(prev[:, None] - new[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(new)
    out[rows] = new[cols]
    return out


def root_locus(k: StiffnessMatrix, m: float, d_samples) -> RootLocusTrace:
    """Eigenvalues at each damper in ``d_samples`` (N s/m), branch-matched."""
    d = np.asarray(d_samples, dtype=float).ravel()
    if d.size == 0:
        raise ValueError("empty damper sample list")
    if np.any(d < 0) or np.any(np.diff(d) <= 0):
        raise ValueError("damper samples must be non-negative and strictly increasing")
    rows = np.empty((d.size, 4), dtype=complex)
    for i, di in enumerate(d):
        current = eigenvalues_closed_form(AdmittanceParams(m, di, k)).as_array()
        rows[i] = current if i == 0 else _match(rows[i - 1], current)
    return RootLocusTrace(d_m=d / m, values=rows)


def default_damping_samples(k: StiffnessMatrix, m: float, n: int = 400) -> np.ndarray:
    """``n`` dampers from 0 to twice the larger critical damper.

    Without real critical damping, the real part of the complex critical
    value is used instead.
    """
    crit = critical_damping(k, m)
    if crit is not None:
        top = crit[0]
    else:
        s = (k.kx + k.ky) / m
        disc = stiffness_discriminant(k.kx / m, k.ky / m, k.ks / m, k.ka / m)
        top = m * cmath.sqrt(2.0 * (s + cmath.sqrt(disc))).real
    if not top > 0:
        top = 1.0
    return np.linspace(0.0, 2.0 * top, n)


@dataclass
class StabilityReport:
    """Stability summary for one parameter set.

    ``critical_damping`` holds dampers in N s/m (larger branch first).
    ``d_min_sufficient``/``d_min_exact`` are ``None`` when the symmetric
    part of ``K`` is not positive definite.
    """

    spiral_free: bool
    spiral_class: str
    critical_damping: Optional[tuple[float, float]]
    d_min_sufficient: Optional[float]
    d_min_exact: Optional[float]
    max_real_part_at_d: float
    verdict: str
    symmetric_eigenvalues: tuple[float, float]
    eigenvalues: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["critical_damping"] = (
            list(self.critical_damping) if self.critical_damping else None
        )
        out["symmetric_eigenvalues"] = list(self.symmetric_eigenvalues)
        out["eigenvalues"] = [[z.real, z.imag] for z in self.eigenvalues]
        return out


def _verdict(max_re: float) -> str:
    if abs(max_re) <= MARGINAL_BAND:
        return "marginal"
    return "stable" if max_re < 0 else "unstable"


def stability_report(p: AdmittanceParams, tol: float = BISECTION_TOL) -> StabilityReport:
    eig = eigenvalues_closed_form(p)
    sym = symmetric_eigenvalues(p.k)
    if sym[1] > 0:
        d_suff = min_damping_sufficient(p.k, p.m)
        d_exact = min_damping_exact(p.k, p.m, tol)
    else:
        d_suff = d_exact = None
    return StabilityReport(
        spiral_free=is_spiral_free(p.k),
        spiral_class=spiral_class(p.k),
        critical_damping=critical_damping(p.k, p.m),
        d_min_sufficient=d_suff,
        d_min_exact=d_exact,
        max_real_part_at_d=eig.max_real_part,
        verdict=_verdict(eig.max_real_part),
        symmetric_eigenvalues=sym,
        eigenvalues=list(eig.values),
    )
