"""Planar stiffness matrices with a symmetric/antisymmetric split.

The 2x2 stiffness is parameterized as::

    K = [[kx,      ks + ka],
         [ks - ka, ky     ]]

so that ``ks`` is the symmetric off-diagonal term and ``ka`` the
antisymmetric (curl) term.  A nonzero ``ka`` produces a rotational force
field around the equilibrium that is not derivable from a potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StiffnessMatrix",
    "AdmittanceParams",
    "decompose",
    "stiffness_discriminant",
    "stiffness_eigenvalues",
    "symmetric_eigenvalues",
    "is_symmetric_positive_definite",
    "spiral_free_bound",
    "is_spiral_free",
    "spiral_class",
    "ForceField",
    "force_field",
]


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class StiffnessMatrix:
    """Stiffness ``K = K_s + K_a`` in N/m.

    No definiteness is enforced here; indefinite matrices are valid so
    that sweeps can probe unstable regions.
    """

    kx: float
    ky: float
    ks: float = 0.0
    ka: float = 0.0

    def __post_init__(self):
        for name in ("kx", "ky", "ks", "ka"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_finite(kx=self.kx, ky=self.ky, ks=self.ks, ka=self.ka)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.kx, self.ks + self.ka], [self.ks - self.ka, self.ky]]
        )

    @property
    def symmetric(self) -> np.ndarray:
        return np.array([[self.kx, self.ks], [self.ks, self.ky]])

    @property
    def antisymmetric(self) -> np.ndarray:
        return np.array([[0.0, self.ka], [-self.ka, 0.0]])

    @property
    def trace(self) -> float:
        return self.kx + self.ky

    @property
    def det(self) -> float:
        return self.kx * self.ky - self.ks**2 + self.ka**2

    @classmethod
    def from_matrix(cls, K) -> "StiffnessMatrix":
        K = np.asarray(K, dtype=float)
        if K.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {K.shape}")
        return cls(
            kx=K[0, 0],
            ky=K[1, 1],
            ks=0.5 * (K[0, 1] + K[1, 0]),
            ka=0.5 * (K[0, 1] - K[1, 0]),
        )

    def scaled(self, factor: float) -> "StiffnessMatrix":
        return StiffnessMatrix(
            self.kx * factor, self.ky * factor, self.ks * factor, self.ka * factor
        )


@dataclass(frozen=True)
class AdmittanceParams:
    """Virtual mass ``m`` (kg), isotropic damper ``d`` (N s/m) and stiffness.

    The damping matrix is ``D = d I`` and the mass matrix ``M = m I``.
    """

    m: float
    d: float
    k: StiffnessMatrix

    def __post_init__(self):
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "d", float(self.d))
        _check_finite(m=self.m, d=self.d)
        if self.m <= 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.d < 0:
            raise ValueError(f"damper must be non-negative, got {self.d}")
        if not isinstance(self.k, StiffnessMatrix):
            raise TypeError("k must be a StiffnessMatrix")

    @classmethod
    def from_values(cls, m, d, kx, ky, ks=0.0, ka=0.0) -> "AdmittanceParams":
        return cls(m=m, d=d, k=StiffnessMatrix(kx, ky, ks, ka))

    def with_damping(self, d: float) -> "AdmittanceParams":
        return AdmittanceParams(self.m, d, self.k)

    # mass-normalized views
    @property
    def d_m(self) -> float:
        return self.d / self.m

    @property
    def k_xm(self) -> float:
        return self.k.kx / self.m

    @property
    def k_ym(self) -> float:
        return self.k.ky / self.m

    @property
    def k_sm(self) -> float:
        return self.k.ks / self.m

    @property
    def k_am(self) -> float:
        return self.k.ka / self.m

    @property
    def mass_matrix(self) -> np.ndarray:
        return self.m * np.eye(2)

    @property
    def damping_matrix(self) -> np.ndarray:
        return self.d * np.eye(2)


def decompose(k: StiffnessMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(K_s, K_a)`` with ``K_s`` symmetric, ``K_a`` antisymmetric."""
    return k.symmetric, k.antisymmetric


def stiffness_discriminant(kx, ky, ks, ka):
    """Radicand ``-4 ka^2 + 4 ks^2 + (kx - ky)^2`` shared by several formulas.

    Works element-wise on arrays as well as on scalars.  Scaling all four
    arguments by ``1/m`` scales the result by ``1/m^2``.
    """
    return -4.0 * ka * ka + 4.0 * ks * ks + (kx - ky) * (kx - ky)


def _sort_desc(values):
    return sorted(values, key=lambda z: (-z.real, -z.imag))


def stiffness_eigenvalues(k: StiffnessMatrix) -> tuple[complex, complex]:
    """Eigenvalues of the full (possibly asymmetric) stiffness matrix.

    Ordered by real part, then imaginary part, both descending.
    """
    disc = stiffness_discriminant(k.kx, k.ky, k.ks, k.ka)
    root = math.sqrt(disc) if disc >= 0 else complex(0.0, math.sqrt(-disc))
    half_tr = 0.5 * (k.kx + k.ky)
    pair = [complex(half_tr + 0.5 * root), complex(half_tr - 0.5 * root)]
    return tuple(_sort_desc(pair))


def symmetric_eigenvalues(k: StiffnessMatrix) -> tuple[float, float]:
    """Eigenvalues of ``K_s`` as ``(largest, smallest)``; always real."""
    half_tr = 0.5 * (k.kx + k.ky)
    r = math.hypot(k.ks, 0.5 * (k.kx - k.ky))
    return half_tr + r, half_tr - r


def is_symmetric_positive_definite(k: StiffnessMatrix) -> bool:
    return symmetric_eigenvalues(k)[1] > 0


def spiral_free_bound(k: StiffnessMatrix) -> float:
    """Largest ``|ka|`` (N/m) for which no spiral oscillation can be excited."""
    return math.hypot(k.ks, 0.5 * (k.kx - k.ky))


def is_spiral_free(k: StiffnessMatrix) -> bool:
    """True iff the stiffness eigenvalues are real (boundary included)."""
    return stiffness_discriminant(k.kx, k.ky, k.ks, k.ka) >= 0


def spiral_class(k: StiffnessMatrix) -> str:
    """``"free"``, ``"boundary"`` (repeated real eigenvalue) or ``"spiral"``."""
    disc = stiffness_discriminant(k.kx, k.ky, k.ks, k.ka)
    if disc > 0:
        return "free"
    if disc == 0:
        return "boundary"
    return "spiral"


@dataclass(frozen=True)
class ForceField:
    """Forces sampled on a regular grid; arrays have shape ``(ny, nx)``."""

    x: np.ndarray
    y: np.ndarray
    force: np.ndarray
    force_sym: np.ndarray
    force_asym: np.ndarray

    def rows(self):
        """Row-major ``(x, y, fx, fy, fx_sym, fy_sym, fx_asym, fy_asym)``."""
        cols = [
            self.x,
            self.y,
            self.force[..., 0],
            self.force[..., 1],
            self.force_sym[..., 0],
            self.force_sym[..., 1],
            self.force_asym[..., 0],
            self.force_asym[..., 1],
        ]
        return np.column_stack([c.ravel() for c in cols])


def force_field(k: StiffnessMatrix, xlim, ylim, nx: int, ny: int) -> ForceField:
    """Evaluate ``F = -K x`` and its symmetric/antisymmetric parts on a grid.

    Parameters
    ----------
    k : StiffnessMatrix
    xlim, ylim : (float, float)
        Inclusive coordinate ranges in metres.
    nx, ny : int
        Number of grid points per axis (>= 1).
    """
    if int(nx) < 1 or int(ny) < 1:
        raise ValueError(f"empty grid: nx={nx}, ny={ny}")
    bounds = [float(v) for v in (*xlim, *ylim)]
    if not all(math.isfinite(v) for v in bounds):
        raise ValueError("grid extent must be finite")
    xs = np.linspace(bounds[0], bounds[1], int(nx))
    ys = np.linspace(bounds[2], bounds[3], int(ny))
    X, Y = np.meshgrid(xs, ys)
    pos = np.stack([X, Y], axis=-1)
    Ks, Ka = decompose(k)

    def apply(mat):
        return -np.einsum("ij,...j->...i", mat, pos)

    return ForceField(
        x=X, y=Y, force=apply(k.matrix), force_sym=apply(Ks), force_asym=apply(Ka)
    )
