"""Metric operators for the discrete companion models.

A Hamiltonian ``H`` is crypto-Hermitian when some positive Hermitian
``Theta`` satisfies ``H^dagger Theta = Theta H``; the physical inner
product is then ``<phi|Theta|psi>``. This module carries the four-site
toy chain, its explicit four-parameter metric family, a generic solver
for the linear metric equation, the spectral-expansion construction and
a finite-difference discretisation of the continuous star graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionError, DomainError, SpectralPreconditionError
from .linalg import RANK_TOL, eigenvalues, is_positive_definite, real_null_space, sort_spectrum
from .stargraph import StarGraphSpec

#: Largest N accepted by :func:`solve_metric_space`.
METRIC_CAP = 12
METRIC_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteHamiltonian:
    matrix: np.ndarray
    lam: float = 0.0
    label: str = "custom"

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _matrix(h) -> np.ndarray:
    return h.matrix if isinstance(h, DiscreteHamiltonian) else np.asarray(h)


def build_h4(lam: float) -> DiscreteHamiltonian:
    lam = float(lam)
    m = np.array(
        [
            [2.0, -1.0, 0.0, 0.0],
            [-1.0, 2.0, -1.0 - lam, 0.0],
            [0.0, -1.0 + lam, 2.0, -1.0],
            [0.0, 0.0, -1.0, 2.0],
        ]
    )
    return DiscreteHamiltonian(m, lam, "H4")


def metric_component(index: int, lam: float) -> np.ndarray:
    """The ``index``-th member (1..4) of the explicit metric family for ``build_h4(lam)``."""
    l = float(lam)
    if index == 1:
        return np.diag([1 - l, 1 - l, 1 + l, 1 + l])
    if index == 2:
        return np.array(
            [
                [0, 1 - l, 0, 0],
                [1 - l, 0, 1 - l * l, 0],
                [0, 1 - l * l, 0, 1 + l],
                [0, 0, 1 + l, 0],
            ],
            dtype=float,
        )
    if index == 3:
        return np.array(
            [
                [0, 0, 1, 0],
                [0, 1 - l, 0, 1],
                [1, 0, 1 + l, 0],
                [0, 1, 0, 0],
            ],
            dtype=float,
        )
    if index == 4:
        return np.fliplr(np.eye(4))
    raise DomainError(f"metric component index must be 1..4, got {index}")


def crypto_residual(h, theta) -> float:
    """``max |H^dagger Theta - Theta H|``."""
    hm, t = _matrix(h), np.asarray(theta)
    if hm.shape != t.shape or hm.ndim != 2:
        raise DimensionError(f"shape mismatch: H {hm.shape} vs Theta {t.shape}")
    return float(np.max(np.abs(hm.conj().T @ t - t @ hm)))


@dataclass(frozen=True)
class MetricCandidate:
    theta: np.ndarray
    residual: float
    min_eigenvalue: float
    hermiticity_defect: float
    is_metric: bool
    eigenvalues: np.ndarray
    coefficients: tuple[float, ...] | None = None

    def as_dict(self) -> dict:
        out = {
            "residual": self.residual,
            "min_eigenvalue": self.min_eigenvalue,
            "hermiticity_defect": self.hermiticity_defect,
            "is_metric": self.is_metric,
            "eigenvalues": [float(e) for e in self.eigenvalues],
        }
        if self.coefficients is not None:
            out["coefficients"] = list(self.coefficients)
            out["coefficient_signs"] = [int(np.sign(c)) for c in self.coefficients]
        return out


def evaluate_metric(h, theta, coefficients=None, tol: float = METRIC_TOL) -> MetricCandidate:
    hm, t = _matrix(h), np.asarray(theta)
    res = crypto_residual(hm, t)
    pos = is_positive_definite(t, herm_tol=tol * max(np.max(np.abs(t)), 1e-300))
    scale = np.max(np.abs(hm)) * np.max(np.abs(t))
    ok = res <= tol * scale and pos.positive
    lam = np.linalg.eigvalsh(0.5 * (t + t.conj().T))
    return MetricCandidate(
        t, res, pos.min_eigenvalue, pos.hermiticity_defect, bool(ok), lam,
        None if coefficients is None else tuple(float(c) for c in coefficients),
    )


def assemble_metric(lam: float, alphas) -> MetricCandidate:
    alphas = [float(a) for a in alphas]
    if len(alphas) != 4:
        raise DimensionError(f"expected 4 coefficients, got {len(alphas)}")
    theta = sum(a * metric_component(j + 1, lam) for j, a in enumerate(alphas))
    return evaluate_metric(build_h4(lam), theta, alphas)


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Frobenius-orthonormal real basis of the n x n Hermitian matrices."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1
        basis.append(e)
    r = 1 / np.sqrt(2)
    for i in range(n):
        for j in range(i + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[i, j] = s[j, i] = r
            a = np.zeros((n, n), dtype=complex)
            a[i, j], a[j, i] = 1j * r, -1j * r
            basis.extend([s, a])
    return basis


@dataclass(frozen=True)
class MetricSpace:
    basis: tuple[np.ndarray, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def projection_residual(self, theta) -> float:
        """Relative Frobenius distance from ``theta`` to the span."""
        t = np.asarray(theta, dtype=complex)
        if not self.basis:
            return 1.0
        coeffs = [np.vdot(b, t).real for b in self.basis]
        proj = sum(c * b for c, b in zip(coeffs, self.basis))
        return float(np.linalg.norm(t - proj) / max(np.linalg.norm(t), 1e-300))


def solve_metric_space(h, rank_tol: float = RANK_TOL, cap: int = METRIC_CAP) -> MetricSpace:
    """All Hermitian ``Theta`` with ``H^dagger Theta = Theta H`` (positivity not imposed)."""
    hm = _matrix(h).astype(complex)
    n = hm.shape[0]
    if n > cap:
        raise DimensionError(f"metric solver is capped at N={cap}, got {n}")
    basis = hermitian_basis(n)
    cols = []
    for b in basis:
        img = hm.conj().T @ b - b @ hm
        cols.append(np.concatenate([img.real.ravel(), img.imag.ravel()]))
    op = np.array(cols).T
    kernel = real_null_space(op, rank_tol)
    mats = []
    for v in kernel.T:
        t = sum(c * b for c, b in zip(v, basis))
        mats.append(0.5 * (t + t.conj().T))
    return MetricSpace(tuple(mats))


@dataclass(frozen=True)
class SpectrumReport:
    real: bool
    eigenvalues: np.ndarray

    @property
    def classification(self) -> str:
        return "real" if self.real else "complex-pairs"


def spectrum_reality(h, tol: float = 1e-12) -> SpectrumReport:
    hm = _matrix(h)
    ev = eigenvalues(hm)
    norm = max(np.linalg.norm(hm, 2), 1e-300)
    return SpectrumReport(bool(np.all(np.abs(ev.imag) <= tol * norm)), ev)


def biorthogonal_eigensystem(h, tol: float = 1e-9):
    """Eigenvalues, right vectors (columns, unit norm) and left vectors (rows) with ``L R = I``."""
    hm = _matrix(h)
    w, r = np.linalg.eig(hm)
    norm = max(np.linalg.norm(hm, 2), 1e-300)
    if np.any(np.abs(w.imag) > tol * norm):
        raise SpectralPreconditionError(f"spectrum is not real: {sort_spectrum(w)}")
    order = np.argsort(w.real)
    w, r = w[order].real, r[:, order]
    if len(w) > 1 and np.min(np.diff(w)) <= tol * norm:
        raise SpectralPreconditionError(f"spectrum is degenerate: {w}")
    r = r / np.linalg.norm(r, axis=0)
    left = np.linalg.inv(r)
    return w, r, left


def spectral_metric(h, kappas) -> MetricCandidate:
    """``Theta = sum_n kappa_n |L_n><L_n|`` from biorthonormal left eigenvectors."""
    hm = _matrix(h)
    kappas = np.asarray(kappas, dtype=float)
    if kappas.shape != (hm.shape[0],):
        raise DimensionError(f"need {hm.shape[0]} weights, got {kappas.shape}")
    if np.any(kappas <= 0):
        raise SpectralPreconditionError(f"spectral weights must be positive, got {kappas.tolist()}")
    _, _, left = biorthogonal_eigensystem(hm)
    theta = left.conj().T @ np.diag(kappas) @ left
    theta = 0.5 * (theta + theta.conj().T)
    if np.allclose(theta.imag, 0, atol=1e-14 * np.max(np.abs(theta))):
        theta = theta.real
    return evaluate_metric(hm, theta, tol=1e-10)


def metric_inner_product(theta, phi, psi) -> complex:
    """``phi^dagger Theta psi``."""
    t = np.asarray(theta)
    phi, psi = np.asarray(phi), np.asarray(psi)
    if t.shape != (phi.size, psi.size):
        raise DimensionError(f"Theta {t.shape} incompatible with vectors {phi.size}, {psi.size}")
    return complex(np.vdot(phi, t @ psi))


# -- finite-difference star graph -----------------------------------------


@dataclass(frozen=True)
class FdStarOperator:
    """Pencil ``A psi = E B psi`` on ``q*n + 1`` nodes.

    Node ``j*n + i`` sits on arm j at ``x = i*h`` (tip at i = 0); the last
    node is the shared centre. Tip rows and the centre row are algebraic
    (zero rows in the diagonal ``mass``).
    """

    spec: StarGraphSpec
    n: int
    step: float
    matrix: sp.csr_matrix
    mass: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def centre(self) -> int:
        return self.spec.q * self.n


def fd_star_operator(spec: StarGraphSpec, n: int) -> FdStarOperator:
    if n < 8:
        raise DomainError(f"need at least 8 points per arm, got {n}")
    q, h = spec.q, spec.L / n
    c = spec.tip_couplings()
    size = q * n + 1
    centre = q * n
    rows, cols, vals = [], [], []

    def put(r, col, v):
        rows.append(r)
        cols.append(col)
        vals.append(v)

    h2 = 1.0 / h**2
    for j in range(q):
        base = j * n
        node = lambda i: centre if i == n else base + i  # noqa: E731
        # psi'(0) = c_j psi(0), second-order one-sided
        put(base, base, -3 / (2 * h) - c[j])
        put(base, base + 1, 4 / (2 * h))
        put(base, base + 2, -1 / (2 * h))
        for i in range(1, n):
            put(base + i, node(i - 1), -h2)
            put(base + i, node(i), 2 * h2)
            put(base + i, node(i + 1), -h2)
        # Kirchhoff: sum of one-sided derivatives at the centre
        put(centre, centre, 3 / (2 * h))
        put(centre, node(n - 1), -4 / (2 * h))
        put(centre, node(n - 2), 1 / (2 * h))
    a = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(size, size))
    mass = np.ones(size)
    mass[np.arange(q) * n] = 0.0
    mass[centre] = 0.0
    return FdStarOperator(spec, n, h, a, mass)


def fd_eigenpairs(op: FdStarOperator, count: int = 12, sigma: complex = -0.5):
    """The ``count`` finite eigenvalues nearest ``sigma`` (shift-invert), with eigenvectors.

    Eigenvalues are sorted by (Re, Im); vectors are the matching columns.
    """
    shifted = (op.matrix - sigma * sp.diags(op.mass)).tocsc()
    lu = spla.splu(shifted)
    mass = op.mass

    def matvec(x):
        return lu.solve(np.asarray(mass * x.ravel(), dtype=complex))

    lin = spla.LinearOperator(shifted.shape, matvec=matvec, dtype=complex)
    v0 = np.ones(op.size, dtype=complex) * mass
    nu, vec = spla.eigs(lin, k=count, which="LM", v0=v0, tol=1e-13, maxiter=10000)
    e = sigma + 1.0 / nu
    order = np.lexsort((e.imag, e.real))
    return e[order], vec[:, order]


def fd_momenta(op: FdStarOperator, count: int = 12, sigma: complex = -0.5,
               real_tol: float = 1e-6, centre_tol: float = 1e-6) -> dict:
    """Classify FD eigenvalues as momenta ``k = sqrt(E)``.

    ``real`` holds near-real momenta of modes that are nonzero at the
    centre (the ones the reduced secular equation sees); ``decoupled``
    holds modes vanishing at the centre; ``complex`` the rest (Im k > 0
    representatives). The zero mode is dropped.
    """
    e, vec = fd_eigenpairs(op, count, sigma)
    real, decoupled, cplx = [], [], []
    for ev, v in zip(e, vec.T):
        if abs(ev) < 1e-8:
            continue
        k = np.sqrt(ev)
        if k.imag < 0:
            k = k.conjugate()
        if abs(ev.imag) <= real_tol * abs(ev):
            if abs(v[op.centre]) < centre_tol * np.max(np.abs(v)):
                decoupled.append(abs(k.real))
            else:
                real.append(abs(k.real))
        else:
            cplx.append(complex(k))
    return {"real": sorted(real), "decoupled": sorted(decoupled), "complex": cplx}
