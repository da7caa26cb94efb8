"""Small dense linear-algebra kernel.

Matrices are plain ``numpy.ndarray`` objects; nothing here mutates its
arguments. The heavy lifting is delegated to LAPACK through numpy; this
module pins down the conventions the rest of the package relies on
(eigenvalue ordering, positivity diagnostics, relative rank tolerance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalFailure

#: Largest matrix :func:`eigenvalues` accepts by default.
EIG_CAP = 2000
#: Relative singular-value cutoff used by :func:`real_null_space`.
RANK_TOL = 1e-9


def _square(m) -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def lu_determinant(m) -> complex:
    """Determinant by partially pivoted LU (LAPACK ``getrf``)."""
    a = _square(m)
    if a.shape[0] == 0:
        return 1.0 + 0.0j
    return complex(np.linalg.det(a.astype(complex, copy=False)))


def sort_spectrum(values) -> np.ndarray:
    """Order by ascending real part, ties broken by imaginary part."""
    v = np.asarray(values, dtype=complex)
    return v[np.lexsort((v.imag, v.real))]


def eigenvalues(m, cap: int = EIG_CAP) -> np.ndarray:
    """All eigenvalues of ``m`` with multiplicity, sorted by (Re, Im)."""
    a = _square(m)
    n = a.shape[0]
    if n > cap:
        raise DimensionError(f"matrix of size {n} exceeds eigenvalue cap {cap}")
    try:
        w = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"QR iteration did not converge for {n}x{n} matrix "
            f"(norm {np.linalg.norm(a):.3e}): {exc}"
        ) from exc
    if not np.all(np.isfinite(w)):
        raise NumericalFailure(f"non-finite eigenvalues for {n}x{n} matrix")
    return sort_spectrum(w)


@dataclass(frozen=True)
class Positivity:
    """Verdict of :func:`is_positive_definite` with its diagnostics."""

    positive: bool
    min_eigenvalue: float
    hermiticity_defect: float

    def __bool__(self) -> bool:
        return self.positive


def is_positive_definite(m, herm_tol: float = 1e-12, eig_tol: float = 0.0) -> Positivity:
    a = _square(m)
    defect = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    sym = 0.5 * (a + a.conj().T)
    lam = np.linalg.eigvalsh(sym)
    lmin = float(lam[0]) if lam.size else 0.0
    ok = defect <= herm_tol and bool(np.all(lam > eig_tol))
    return Positivity(ok, lmin, defect)


def real_null_space(a, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of a real matrix.

    A right singular vector is kept when its singular value is at most
    ``rank_tol`` times the largest one.
    """
    a = np.asarray(a)
    if np.iscomplexobj(a):
        if np.any(a.imag != 0):
            raise DimensionError("real_null_space expects real entries")
        a = a.real
    a = np.atleast_2d(a.astype(float))
    rows, cols = a.shape
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(cols)
    rank = int(np.sum(s > rank_tol * smax))
    return vh[rank:].T.copy()
