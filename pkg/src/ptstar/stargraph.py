"""Continuous q-armed star graph with complex Robin tips.

Each arm j carries the coordinate x in [0, L], with x = 0 at the outer
tip and x = L at the shared centre. The tip condition
``psi_j'(0) = i*alpha*exp(i*j*phi)*psi_j(0)`` is built into the arm
solution

    psi_j(x) = a_j * (cos(kx) + i*alpha*e_j*sin(kx)/k),    e_j = exp(i*j*phi),

so only the centre conditions remain: continuity ``psi_j(L) = psi_0(L)``
and the Kirchhoff sum ``sum_j psi_j'(L) = 0``. Writing
``f_j = psi_j(L)/a_j`` and ``g_j = psi_j'(L)/a_j`` gives the q x q
secular matrix and the reduced scalar

    F(k) = sum_j g_j(k) / f_j(k).

For L = 1 and q = 6 the root-of-unity sum collapses to

    F(k) = -6 k tan(k) (k^6 - alpha^6 tan^4 k) / (k^6 + alpha^6 tan^6 k),

i.e. ``F = -6 k * product`` where ``product`` is the two-factor form
evaluated by :func:`closed_form_q6`. In general
``det M(k) = (-1)^(q-1) * prod_j f_j(k) * F(k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotARootError
from .linalg import lu_determinant

#: |f_j| below ``POLE_GUARD * (1 + |k| L)`` flags a pole of the reduced scalar.
POLE_GUARD = 1e-8
#: Edge solutions require ``sigma_min <= EDGE_TOL * sigma_max``.
EDGE_TOL = 1e-8


@dataclass(frozen=True)
class StarGraphSpec:
    q: int = 6
    L: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 2:
            raise DomainError(f"arm count q must be an integer >= 2, got {self.q}")
        if not self.L > 0:
            raise DomainError(f"arm length must be positive, got {self.L}")
        if not self.alpha >= 0:
            raise DomainError(f"coupling alpha must be >= 0, got {self.alpha}")
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def phase_step(self) -> float:
        return 2.0 * math.pi / self.q

    def with_alpha(self, alpha: float) -> "StarGraphSpec":
        return StarGraphSpec(self.q, self.L, alpha)

    def tip_couplings(self) -> np.ndarray:
        """``i * alpha * exp(i j phi)`` for j = 0..q-1."""
        j = np.arange(self.q)
        return 1j * self.alpha * np.exp(1j * j * self.phase_step)


@dataclass(frozen=True)
class SecularEvaluation:
    k: complex
    det_value: complex
    scalar_value: complex | None
    factor_tan: complex | None
    factor_ratio: complex | None

    @property
    def product(self) -> complex | None:
        if self.factor_tan is None or self.factor_ratio is None:
            return None
        return self.factor_tan * self.factor_ratio


@dataclass(frozen=True)
class EdgeSolution:
    k: complex
    coefficients: np.ndarray
    residual: float

    def psi(self, spec: StarGraphSpec, j: int, x):
        """Wave function on arm ``j`` at coordinate(s) ``x`` measured from the tip."""
        c = spec.tip_couplings()[j]
        x = np.asarray(x)
        return self.coefficients[j] * (np.cos(self.k * x) + c * np.sin(self.k * x) / self.k)


def _check_k(k) -> complex:
    k = complex(k)
    if k == 0:
        raise DomainError(
            "k = 0 is excluded; the constant mode exists only at alpha = 0 "
            "and is reported separately"
        )
    return k


def arm_factors(spec: StarGraphSpec, k):
    """Return ``(f, g)``: value and derivative of each unit-amplitude arm at the centre.

    ``k`` may be a scalar or an array; the arm index is the last axis.
    """
    k = np.asarray(k, dtype=complex)[..., None]
    c = spec.tip_couplings()
    kl = k * spec.L
    cos, sin = np.cos(kl), np.sin(kl)
    f = cos + c * sin / k
    g = -k * sin + c * cos
    return f, g


def secular_matrix(spec: StarGraphSpec, k) -> np.ndarray:
    """q x q matrix acting on the arm amplitudes; bound states where its determinant vanishes."""
    k = _check_k(k)
    f, g = arm_factors(spec, k)
    q = spec.q
    m = np.zeros((q, q), dtype=complex)
    rows = np.arange(q - 1)
    m[rows, 0] = -f[0]
    m[rows, rows + 1] = f[1:]
    m[q - 1] = g
    return m


def secular_determinant(spec: StarGraphSpec, k) -> complex:
    return lu_determinant(secular_matrix(spec, k))


def secular_matrix_grid(spec: StarGraphSpec, ks) -> np.ndarray:
    """Stack of secular matrices, shape ``ks.shape + (q, q)``."""
    ks = np.asarray(ks, dtype=complex)
    if np.any(ks == 0):
        raise DomainError("k = 0 is excluded from secular evaluations")
    f, g = arm_factors(spec, ks)
    q = spec.q
    m = np.zeros(ks.shape + (q, q), dtype=complex)
    rows = np.arange(q - 1)
    m[..., rows, 0] = -f[..., :1]
    m[..., rows, rows + 1] = f[..., 1:]
    m[..., q - 1, :] = g
    return m


def secular_determinant_grid(spec: StarGraphSpec, ks) -> np.ndarray:
    return np.linalg.det(secular_matrix_grid(spec, ks))


def secular_scalar(spec: StarGraphSpec, k) -> complex | None:
    """Reduced secular function F(k), or ``None`` at a pole.

    ``None`` means some ``|f_j|`` fell under the pole guard; callers
    should use :func:`secular_determinant` there.
    """
    k = _check_k(k)
    f, g = arm_factors(spec, k)
    if np.min(np.abs(f)) < POLE_GUARD * (1.0 + abs(k) * spec.L):
        return None
    return complex(np.sum(g / f))


def secular_scalar_grid(spec: StarGraphSpec, ks, guard: bool = True) -> np.ndarray:
    """Vectorised F over an array of nonzero momenta; poles become NaN unless ``guard`` is off."""
    ks = np.asarray(ks, dtype=complex)
    if np.any(ks == 0):
        raise DomainError("k = 0 is excluded from secular evaluations")
    f, g = arm_factors(spec, ks)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sum(g / f, axis=-1)
    if guard:
        cut = POLE_GUARD * (1.0 + np.abs(ks) * spec.L)
        out = np.where(np.min(np.abs(f), axis=-1) < cut, np.nan, out)
    return out


def closed_form_q6(alpha: float, k, L: float = 1.0) -> SecularEvaluation:
    """Two-factor q = 6 secular function, ``tan(kL) * ratio``.

    At a pole of ``tan(kL)`` the factors are returned as ``None``.
    """
    k = _check_k(k)
    spec = StarGraphSpec(6, L, alpha)
    det = secular_determinant(spec, k)
    scalar = secular_scalar(spec, k)
    kl = k * L
    if abs(np.cos(kl)) < POLE_GUARD:
        return SecularEvaluation(k, det, scalar, None, None)
    t = complex(np.tan(kl))
    # k here is the dimensionful momentum; the formula is written for kL
    kk6 = kl**6
    a6 = (alpha * L) ** 6
    ratio = (kk6 - a6 * t**4) / (kk6 + a6 * t**6)
    return SecularEvaluation(k, det, scalar, t, ratio)


def edge_solution(spec: StarGraphSpec, k, tol: float = EDGE_TOL) -> EdgeSolution:
    """Amplitudes ``a_j`` of the bound state at a root ``k`` of the secular determinant."""
    m = secular_matrix(spec, k)
    _, s, vh = np.linalg.svd(m)
    smin, smax = s[-1], s[0]
    if smin > tol * smax:
        gap = float(s[-2] / smin) if smin > 0 else math.inf
        raise NotARootError(
            f"k = {complex(k)} is not a root: smallest singular value {smin:.3e} "
            f"vs norm {smax:.3e} (singular-value gap {gap:.3e})",
            gap,
        )
    a = vh[-1].conj()
    i = int(np.argmax(np.abs(a)))
    a = a / a[i]
    return EdgeSolution(complex(k), a, float(np.linalg.norm(m @ a)))
