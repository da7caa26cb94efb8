import math

import numpy as np
import pytest
import scipy.linalg
import sympy

from ptstar.cryptoherm import (
    assemble_metric,
    build_h4,
    crypto_residual,
    fd_eigenpairs,
    fd_momenta,
    fd_star_operator,
    metric_component,
    metric_inner_product,
    solve_metric_space,
    spectral_metric,
    spectrum_reality,
)
from ptstar.errors import DimensionError, DomainError, SpectralPreconditionError
from ptstar.linalg import is_positive_definite
from ptstar.roots import locate_complex_roots
from ptstar.stargraph import StarGraphSpec
from ptstar.validation import fd_convergence, fd_lowest_momentum

from .conftest import charpoly_roots

LAMBDAS = [-0.9, -0.5, 0.0, 0.3, 0.7, 0.99]


def exact_family(lam):
    l = sympy.nsimplify(lam)
    h = sympy.Matrix([[2, -1, 0, 0], [-1, 2, -1 - l, 0], [0, -1 + l, 2, -1], [0, 0, -1, 2]])
    ms = [
        sympy.diag(1 - l, 1 - l, 1 + l, 1 + l),
        sympy.Matrix([[0, 1 - l, 0, 0], [1 - l, 0, 1 - l**2, 0], [0, 1 - l**2, 0, 1 + l], [0, 0, 1 + l, 0]]),
        sympy.Matrix([[0, 0, 1, 0], [0, 1 - l, 0, 1], [1, 0, 1 + l, 0], [0, 1, 0, 0]]),
        sympy.Matrix(4, 4, lambda i, j: 1 if i + j == 3 else 0),
    ]
    return h, ms


def test_h4_entries():
    h = build_h4(0.5).matrix
    assert h[1, 2] == -1.5 and h[2, 1] == -0.5
    h0 = build_h4(0.0).matrix
    np.testing.assert_array_equal(h0, h0.T)
    np.testing.assert_array_equal(np.diag(h0), 2.0)


def test_h4_spectrum_at_zero():
    np.testing.assert_allclose(
        spectrum_reality(build_h4(0.0)).eigenvalues.real, [0.381966, 1.381966, 2.618034, 3.618034], atol=1e-6
    )


def test_metric_components():
    np.testing.assert_array_equal(metric_component(1, 0.5), np.diag([0.5, 0.5, 1.5, 1.5]))
    np.testing.assert_array_equal(metric_component(4, 0.3), np.fliplr(np.eye(4)))
    m2 = metric_component(2, 0.0)
    np.testing.assert_array_equal(np.diag(m2, 1), [1, 1, 1])
    np.testing.assert_array_equal(m2, m2.T)
    with pytest.raises(DomainError):
        metric_component(5, 0.1)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_family_matches_exact_solution(lam):
    h, ms = exact_family(lam)
    for j, m in enumerate(ms, start=1):
        assert h.T * m == m * h
        np.testing.assert_allclose(metric_component(j, lam), np.array(m, dtype=float), atol=1e-15)
        assert crypto_residual(build_h4(lam), metric_component(j, lam)) <= 1e-13 * 4


def test_assemble_examples():
    c = assemble_metric(0.5, (1, 1, 1, 1))
    assert c.residual <= 1e-13 * np.max(np.abs(c.theta)) * 2
    assert assemble_metric(0.5, (1, 0, 0, 0)).is_metric
    ex = assemble_metric(0.5, (0, 0, 0, 1))
    assert not ex.is_metric and ex.min_eigenvalue == pytest.approx(-1.0)


def test_all_ones_combination_is_indefinite():
    # Sylvester's criterion in exact arithmetic
    _, ms = exact_family(0.5)
    theta = sum(ms, sympy.zeros(4))
    minors = [theta[:k, :k].det() for k in range(1, 5)]
    assert minors[2] < 0
    cand = assemble_metric(0.5, (1, 1, 1, 1))
    assert not cand.is_metric and cand.min_eigenvalue < 0
    assert cand.coefficients == (1.0, 1.0, 1.0, 1.0)


def test_crypto_residual_examples():
    assert crypto_residual(build_h4(0.5), metric_component(3, 0.5)) <= 1e-13
    assert crypto_residual(build_h4(0.5), np.eye(4)) == pytest.approx(1.0)
    h = build_h4(0.0).matrix
    assert crypto_residual(h, h @ h + 2 * h) <= 1e-13
    with pytest.raises(DimensionError):
        crypto_residual(build_h4(0.5), np.eye(3))


@pytest.mark.parametrize("lam", LAMBDAS)
def test_metric_space_dimension_and_family(lam):
    space = solve_metric_space(build_h4(lam))
    assert space.dimension == 4
    for j in range(1, 5):
        assert space.projection_residual(metric_component(j, lam)) <= 1e-10
    for b in space.basis:
        assert crypto_residual(build_h4(lam), b) <= 1e-12


def test_metric_space_hermitian_case_contains_identity():
    space = solve_metric_space(build_h4(0.0))
    assert space.dimension == 4
    assert space.projection_residual(np.eye(4)) <= 1e-10


def test_no_metric_beyond_exceptional_coupling(rng):
    h = build_h4(1.5)
    assert not spectrum_reality(h).real
    space = solve_metric_space(h)
    assert space.dimension >= 1
    basis = np.array(space.basis)
    for b in basis:
        assert not is_positive_definite(b) and not is_positive_definite(-b)
    for c in rng.uniform(0, 1, (1000, len(basis))):
        assert not is_positive_definite(np.tensordot(c, basis, axes=1))


def test_metric_space_cap():
    with pytest.raises(DimensionError):
        solve_metric_space(np.eye(13))


def test_spectral_metric_hermitian_limit():
    c = spectral_metric(build_h4(0.0), [1, 1, 1, 1])
    np.testing.assert_allclose(c.theta, np.eye(4), atol=1e-12)


def test_spectral_metric_is_metric_and_in_span():
    c = spectral_metric(build_h4(0.5), [1, 1, 1, 1])
    assert c.is_metric
    assert c.residual <= 1e-10 * np.max(np.abs(c.theta)) * 2
    assert solve_metric_space(build_h4(0.5)).projection_residual(c.theta) <= 1e-9


def test_spectral_metric_rejects_bad_inputs():
    with pytest.raises(SpectralPreconditionError, match="positive"):
        spectral_metric(build_h4(0.5), [1, 1, 1, -1])
    with pytest.raises(SpectralPreconditionError, match="not real"):
        spectral_metric(build_h4(1.5), [1, 1, 1, 1])
    with pytest.raises(SpectralPreconditionError, match="degenerate"):
        spectral_metric(np.eye(3), [1, 1, 1])


def test_inner_product():
    rng = np.random.default_rng(3)
    phi, psi = rng.normal(size=4) + 1j * rng.normal(size=4), rng.normal(size=4)
    assert metric_inner_product(np.eye(4), phi, psi) == pytest.approx(np.vdot(phi, psi))
    theta = spectral_metric(build_h4(0.5), [1, 1, 1, 1]).theta
    val = metric_inner_product(theta, phi, phi)
    assert val.real > 0 and abs(val.imag) < 1e-12
    with pytest.raises(DimensionError):
        metric_inner_product(np.eye(4), phi[:3], psi)


def test_eigenvectors_orthonormal_under_spectral_metric():
    h = build_h4(0.5).matrix
    theta = spectral_metric(h, [1, 1, 1, 1]).theta
    _, vecs = np.linalg.eig(h)
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    gram = np.array([[metric_inner_product(theta, a, b) for b in vecs.T] for a in vecs.T])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-9)


def test_spectrum_reality_examples():
    assert spectrum_reality(build_h4(0.5)).real
    assert spectrum_reality(build_h4(0.0)).real
    rep = spectrum_reality(build_h4(1.5))
    assert rep.classification == "complex-pairs"
    oracle = charpoly_roots(build_h4(1.5).matrix)
    np.testing.assert_allclose(rep.eigenvalues, oracle, atol=1e-12)
    cplx = oracle[np.abs(oracle.imag) > 1e-6]
    assert len(cplx) >= 2
    for z in cplx:
        assert np.min(np.abs(cplx - z.conjugate())) < 1e-12


def test_h4_characteristic_polynomial():
    mu, l = sympy.symbols("mu l")
    h, _ = exact_family(l)
    poly = sympy.expand(h.charpoly(mu).as_expr())
    assert poly.subs(l, 0) == sympy.expand(mu**4 - 8 * mu**3 + 21 * mu**2 - 20 * mu + 5)


# -- finite differences -----------------------------------------------------


def test_fd_operator_structure():
    op = fd_star_operator(StarGraphSpec(6, 1, 0.7), 10)
    assert op.size == 61 and op.step == pytest.approx(0.1)
    a = op.matrix.toarray()
    np.testing.assert_allclose(a[5, 4:7], np.array([-1, 2, -1]) * 100)
    assert op.mass[0] == 0 and op.mass[op.centre] == 0 and op.mass[1] == 1
    with pytest.raises(DomainError):
        fd_star_operator(StarGraphSpec(), 4)


def test_fd_sparse_matches_dense_pencil():
    op = fd_star_operator(StarGraphSpec(6, 1, 0.7), 20)
    w = scipy.linalg.eig(op.matrix.toarray(), np.diag(op.mass), right=False)
    w = w[np.isfinite(w)]
    w = w[np.argsort(np.abs(w + 0.5))][:8]
    sparse, _ = fd_eigenpairs(op, 8)
    for e in sparse:
        assert np.min(np.abs(w - e)) < 1e-9
    for e in w:
        assert np.min(np.abs(sparse - e)) < 1e-9


def test_fd_neumann_converges_to_pi():
    spec = StarGraphSpec(6, 1, 0.0)
    errs = [abs(fd_lowest_momentum(spec, n) - math.pi) for n in (50, 100, 200)]
    assert errs[0] > errs[1] > errs[2]
    assert abs(fd_lowest_momentum(spec, 800) - math.pi) < 1e-3
    m = fd_momenta(fd_star_operator(spec, 100))
    # the (q-1)-fold modes at pi/2 vanish at the centre
    assert len([k for k in m["decoupled"] if abs(k - math.pi / 2) < 1e-2]) == 5


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_fd_second_order(alpha):
    conv = fd_convergence(StarGraphSpec(6, 1, alpha))
    assert conv.min_order >= 1.8


def test_fd_complex_pair_matches_contour():
    spec = StarGraphSpec(6, 1, 1.0)
    cplx = fd_momenta(fd_star_operator(spec, 400), count=16)["complex"]
    for root in locate_complex_roots(spec, (0.0, 2.0, 0.01, 1.0)):
        e_fd = min((k * k for k in cplx), key=lambda e: abs(e - root.k**2))
        assert abs(e_fd - root.k**2) <= 1e-2 * abs(root.k**2)
