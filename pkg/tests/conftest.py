import mpmath
import numpy as np
import pytest
import sympy


def charpoly_roots(matrix) -> np.ndarray:
    """Eigenvalues from the exact characteristic polynomial (independent of LAPACK)."""
    m = sympy.Matrix(matrix.tolist()).applyfunc(sympy.nsimplify)
    mu = sympy.Symbol("mu")
    coeffs = [complex(c) for c in sympy.Poly(m.charpoly(mu).as_expr(), mu).all_coeffs()]
    with mpmath.workdps(40):
        r = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200)
    r = np.array([complex(x) for x in r])
    return r[np.lexsort((r.imag, r.real))]


@pytest.fixture
def rng():
    return np.random.default_rng(20260501)


_acceptance: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        detail = ""
        if report.failed and report.longrepr is not None:
            detail = str(getattr(report.longrepr, "reprcrash", None) and report.longrepr.reprcrash.message)
        _acceptance[name] = (report.outcome.upper(), detail.splitlines()[0] if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda n: int(n.split("_")[1])):
        outcome, detail = _acceptance[name]
        line = f"{outcome:6s} {name}"
        if detail:
            line += f"  -- {detail}"
        terminalreporter.write_line(line)
