"""Cross-checks between independent routes to the same spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .cryptoherm import fd_momenta, fd_star_operator
from .roots import scan_real_roots
from .stargraph import StarGraphSpec, closed_form_q6, secular_determinant

POLE_EXCLUSION = 1e-3


def _sign_roots(func, a: float, b: float, samples: int) -> list[float]:
    ks = np.linspace(a, b, samples)
    vals = np.array([func(k) for k in ks])
    out = []
    for i in range(samples - 1):
        u, v = vals[i], vals[i + 1]
        if not (np.isfinite(u) and np.isfinite(v)):
            continue
        if u == 0:
            out.append(float(ks[i]))
        elif u * v < 0:
            try:
                out.append(brentq(func, ks[i], ks[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps))
            except ValueError:
                # landed exactly on a flagged pole
                continue
    return out


def _near_tan_pole(k: float, L: float, radius: float) -> bool:
    x = k * L / math.pi - 0.5
    return abs(x - round(x)) * math.pi / L < radius


@dataclass(frozen=True)
class ClosedFormCheck:
    alpha: float
    det_roots: tuple[float, ...]
    closed_roots: tuple[float, ...]
    max_deviation: float

    @property
    def counts_match(self) -> bool:
        return len(self.det_roots) == len(self.closed_roots)


def determinant_vs_closed_form(alpha: float, window=(0.05, 6.0), L: float = 1.0,
                               samples: int = 6000) -> ClosedFormCheck:
    """Real zeros of the q = 6 determinant against zeros of the two-factor closed form.

    For q = 6 the determinant is real on the real axis, so both routes are
    bracketed by sign changes. Zeros within ``POLE_EXCLUSION`` of a pole of
    ``tan(kL)`` are left out of the comparison.
    """
    spec = StarGraphSpec(6, L, alpha)

    def det_fn(k):
        return secular_determinant(spec, k).real

    def closed_fn(k):
        p = closed_form_q6(alpha, k, L).product
        return math.nan if p is None else p.real

    a, b = window
    keep = lambda ks: tuple(k for k in ks if not _near_tan_pole(k, L, POLE_EXCLUSION))  # noqa: E731
    det_roots = keep(_sign_roots(det_fn, a, b, samples))
    closed = _sign_roots(closed_fn, a, b, samples)
    # sign flips of tan(kL)*ratio across a pole of tan are not zeros
    closed = [k for k in closed if abs(closed_fn(k)) < 1e-6]
    closed_roots = keep(closed)
    if len(det_roots) != len(closed_roots):
        dev = math.inf
    elif det_roots:
        dev = float(np.max(np.abs(np.subtract(det_roots, closed_roots))))
    else:
        dev = 0.0
    return ClosedFormCheck(alpha, det_roots, closed_roots, dev)


@dataclass(frozen=True)
class FdConvergence:
    alpha: float
    ns: tuple[int, ...]
    reference: tuple[float, ...]
    fd: tuple[tuple[float, ...], ...]
    errors: np.ndarray
    orders: tuple[float, ...]

    @property
    def min_order(self) -> float:
        return min(self.orders) if self.orders else math.nan


def fd_convergence(spec: StarGraphSpec, ns=(200, 400, 800), window=(0.05, 2.0),
                   samples: int = 2000) -> FdConvergence:
    """Observed order of FD momenta against the scanned secular roots.

    The order for each root is the least-squares slope of log(error)
    against log(h).
    """
    ref = [r.k for r in scan_real_roots(spec, window, samples).real_roots]
    fds, errs = [], []
    for n in ns:
        ks = fd_momenta(fd_star_operator(spec, n), count=max(12, 3 * len(ref) + 6))["real"]
        picked = [min(ks, key=lambda x: abs(x - r)) for r in ref]
        fds.append(tuple(picked))
        errs.append([abs(p - r) for p, r in zip(picked, ref)])
    errs = np.array(errs)
    h = np.log(spec.L / np.asarray(ns, dtype=float))
    orders = tuple(float(np.polyfit(h, np.log(errs[:, i]), 1)[0]) for i in range(len(ref)))
    return FdConvergence(spec.alpha, tuple(ns), tuple(ref), tuple(fds), errs, orders)


def fd_lowest_momentum(spec: StarGraphSpec, n: int = 800) -> float:
    """Smallest nonzero FD momentum of a mode that is nonzero at the centre."""
    real = fd_momenta(fd_star_operator(spec, n))["real"]
    return real[0] if real else math.nan
