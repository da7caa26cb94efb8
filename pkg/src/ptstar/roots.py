"""Real, complex and exceptional-point root finding for the star graph.

Real roots come from sign changes of the reduced secular function F on a
uniform grid (F is real on the real axis), refined with Brent's method.
Even-multiplicity touches that produce no sign change are picked up by
minimising |F| wherever it dips well below its grid median.

Complex roots are counted with the argument principle applied to the
entire function ``det M(k)`` on rectangle boundaries, then isolated by
recursive bisection and polished with Newton's method.

The exceptional point is where two real roots merge: the root count is
bisected in alpha, then ``F = dF/dk = 0`` is solved by two-dimensional
Newton iteration in ``(k, alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ContourResolutionError, DomainError, NoTransitionError
from .stargraph import (
    StarGraphSpec,
    secular_determinant,
    secular_determinant_grid,
    secular_scalar_grid,
)

DEFAULT_WINDOW = (0.05, 2.0)
DEFAULT_IM_WINDOW = (0.01, 1.0)
DEFAULT_SAMPLES = 2000
#: accepted |det M| at a refined real root
ROOT_TOL = 1e-8
#: |F| < DIP_RATIO * median|F| triggers a search for a touching root
DIP_RATIO = 1e-3
BISECT_XTOL = 1e-12


class ArgumentError(DomainError):
    pass


def fd_step(k) -> float:
    return 1e-6 * max(1.0, abs(k))


def _real_f(spec: StarGraphSpec, k: float) -> float:
    return float(secular_scalar_grid(spec, np.array([k]), guard=False)[0].real)


def _dfdk(spec: StarGraphSpec, k: float) -> float:
    h = fd_step(k)
    return (_real_f(spec, k + h) - _real_f(spec, k - h)) / (2 * h)


@dataclass(frozen=True)
class RealRoot:
    k: float
    residual: float
    multiplicity: int = 1

    @property
    def tangential(self) -> bool:
        return self.multiplicity > 1


@dataclass(frozen=True)
class ComplexRoot:
    k: complex
    residual: float
    multiplicity: int = 1


@dataclass(frozen=True)
class RootReport:
    q: int
    alpha: float
    window: tuple[float, float]
    real_roots: tuple[RealRoot, ...] = ()
    complex_roots: tuple[ComplexRoot, ...] = ()
    im_window: tuple[float, float] | None = None

    @property
    def real_count(self) -> int:
        return sum(r.multiplicity for r in self.real_roots)

    @property
    def complex_pairs(self) -> int:
        return sum(r.multiplicity for r in self.complex_roots)

    def as_dict(self) -> dict:
        out = {
            "q": self.q,
            "alpha": self.alpha,
            "window": list(self.window),
            "real_roots": [r.k for r in self.real_roots],
            "real_residuals": [r.residual for r in self.real_roots],
            "tangential": [r.k for r in self.real_roots if r.tangential],
            "complex_roots": [
                {"re": r.k.real, "im": r.k.imag, "residual": r.residual}
                for r in self.complex_roots
            ],
            "counts": {"real": self.real_count, "complex_pairs": self.complex_pairs},
        }
        if self.im_window is not None:
            out["im_window"] = list(self.im_window)
        return out


def _grid(spec: StarGraphSpec, window, samples: int) -> np.ndarray:
    lo, hi = (float(w) for w in window)
    lo = max(lo, 0.05 / spec.L) if lo <= 0 else lo
    if not hi > lo:
        raise ArgumentError(f"empty momentum window ({window[0]}, {window[1]})")
    if samples < 100:
        raise ArgumentError(f"at least 100 samples required, got {samples}")
    return np.linspace(lo, hi, int(samples))


def scan_real_roots(
    spec: StarGraphSpec,
    window=DEFAULT_WINDOW,
    samples: int = DEFAULT_SAMPLES,
    root_tol: float = ROOT_TOL,
    dip_ratio: float = DIP_RATIO,
) -> RootReport:
    """Real roots of the secular equation inside ``window``.

    A window starting at or below zero is clipped to ``0.05 / L`` because
    k = 0 is excluded. Sign changes across poles of F are discarded;
    tangential roots are reported with multiplicity 2.
    """
    ks = _grid(spec, window, samples)
    fv = secular_scalar_grid(spec, ks).real
    finite = np.isfinite(fv)
    scale = float(np.median(np.abs(fv[finite]))) if finite.any() else 1.0

    def func(k):
        return _real_f(spec, k)

    found: list[RealRoot] = []
    crossing = np.zeros(len(ks) - 1, dtype=bool)
    for i in range(len(ks) - 1):
        a, b = fv[i], fv[i + 1]
        if not (finite[i] and finite[i + 1]):
            continue
        if a == 0.0:
            cand = float(ks[i])
        elif a * b < 0:
            cand = brentq(func, ks[i], ks[i + 1], xtol=BISECT_XTOL, rtol=4 * np.finfo(float).eps)
            # a pole of F also flips sign; there |F| grows instead of vanishing
            if abs(func(cand)) >= min(abs(a), abs(b)):
                continue
        else:
            continue
        crossing[i] = True
        res = abs(secular_determinant(spec, cand))
        if res <= root_tol:
            found.append(RealRoot(cand, res))

    absf = np.abs(fv)
    for i in range(1, len(ks) - 1):
        if not finite[i - 1 : i + 2].all() or crossing[i - 1] or crossing[i]:
            continue
        if fv[i] == 0.0:
            continue
        if not (absf[i] <= absf[i - 1] and absf[i] <= absf[i + 1]):
            continue
        if absf[i] >= dip_ratio * scale:
            continue
        opt = minimize_scalar(
            lambda k: abs(func(k)), bounds=(ks[i - 1], ks[i + 1]), method="bounded",
            options={"xatol": BISECT_XTOL},
        )
        kmin = float(opt.x)
        if abs(func(kmin)) <= root_tol:
            res = abs(secular_determinant(spec, kmin))
            if res <= root_tol:
                found.append(RealRoot(kmin, res, multiplicity=2))

    found.sort(key=lambda r: r.k)
    merged: list[RealRoot] = []
    for r in found:
        if merged and r.k - merged[-1].k <= 10 * BISECT_XTOL:
            continue
        merged.append(r)
    return RootReport(spec.q, spec.alpha, (float(ks[0]), float(ks[-1])), tuple(merged))


def count_real_roots(spec: StarGraphSpec, window=DEFAULT_WINDOW, samples: int = DEFAULT_SAMPLES) -> int:
    return scan_real_roots(spec, window, samples).real_count


# -- complex roots ---------------------------------------------------------


class _BoundaryHit(Exception):
    pass


def _edge_phase(func, z0: complex, z1: complex, n0: int, max_points: int) -> tuple[float, float]:
    """Unwrapped phase change of ``func`` along the segment, and min |func| seen."""
    t = np.linspace(0.0, 1.0, n0 + 1)
    vals = func(z0 + (z1 - z0) * t)
    while True:
        if np.any(vals == 0) or not np.all(np.isfinite(vals)):
            raise _BoundaryHit
        d = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(d) >= math.pi / 2
        if not bad.any():
            return float(d.sum()), float(np.min(np.abs(vals)))
        if len(t) >= max_points:
            raise ContourResolutionError(
                f"phase still jumps by >= pi/2 after {len(t)} boundary samples "
                f"on segment {z0} -> {z1}"
            )
        mids = 0.5 * (t[:-1][bad] + t[1:][bad])
        mvals = func(z0 + (z1 - z0) * mids)
        t = np.concatenate([t, mids])
        vals = np.concatenate([vals, mvals])
        order = np.argsort(t, kind="stable")
        t, vals = t[order], vals[order]


def winding_number(func, box, n0: int = 64, max_points: int = 1 << 16, hit_ratio: float = 1e-9) -> float:
    """Winding number of ``func`` around the counter-clockwise boundary of ``box``.

    ``box`` is ``(re_lo, re_hi, im_lo, im_hi)``; the raw (unrounded) value
    is returned so callers can apply an integrality test.
    """
    x0, x1, y0, y1 = box
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    total = 0.0
    mins, scale = [], []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        dphi, vmin = _edge_phase(func, a, b, n0, max_points)
        total += dphi
        mins.append(vmin)
        scale.append(np.median(np.abs(func(np.linspace(a, b, 9)))))
    if min(mins) < hit_ratio * max(scale):
        raise _BoundaryHit
    return total / (2 * math.pi)


def _newton(func, z: complex, tol: float, maxit: int = 60) -> tuple[complex, float, bool]:
    fz = func(np.array([z]))[0]
    for _ in range(maxit):
        h = fd_step(z)
        d = (func(np.array([z + h]))[0] - func(np.array([z - h]))[0]) / (2 * h)
        if d == 0 or not np.isfinite(d):
            return z, abs(fz), False
        step = fz / d
        z = z - step
        fz = func(np.array([z]))[0]
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z, abs(fz), abs(fz) <= tol


def _dilate(box, frac: float):
    x0, x1, y0, y1 = box
    dx, dy = frac * (x1 - x0) / 2, frac * (y1 - y0) / 2
    return (x0 - dx, x1 + dx, max(y0 - dy, 0.5 * y0), y1 + dy)


def _count(func, box, retries: int = 5):
    """Winding number with boundary dilation on near-hits; returns (count, box used)."""
    for attempt in range(retries + 1):
        try:
            w = winding_number(func, box)
        except _BoundaryHit:
            if attempt == retries:
                raise ContourResolutionError(f"boundary of {box} passes through a root")
            box = _dilate(box, 0.01)
            continue
        n = round(w)
        if abs(w - n) > 0.05:
            raise ContourResolutionError(f"winding number {w:.4f} is not an integer on {box}")
        return int(n), box
    raise AssertionError("unreachable")


def _split(func, box, n: int, depth: int, tol: float, out: list, max_depth: int):
    x0, x1, y0, y1 = box
    if n == 0:
        return
    if n == 1 or depth >= max_depth:
        z, res, ok = _newton(func, complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), tol)
        inside = x0 <= z.real <= x1 and y0 <= z.imag <= y1
        if ok and inside:
            out.append((z, res, n))
            return
        if depth >= max_depth:
            raise ContourResolutionError(f"could not refine {n} root(s) in {box}")
    # split the longer side, nudging the cut if it runs through a root
    wide = (x1 - x0) >= (y1 - y0)
    for frac in (0.5, 0.5137, 0.4791, 0.5411, 0.4517):
        if wide:
            cut = x0 + frac * (x1 - x0)
            halves = [(x0, cut, y0, y1), (cut, x1, y0, y1)]
        else:
            cut = y0 + frac * (y1 - y0)
            halves = [(x0, x1, y0, cut), (x0, x1, cut, y1)]
        try:
            counts = [winding_number(func, h) for h in halves]
        except _BoundaryHit:
            continue
        break
    else:
        raise ContourResolutionError(f"could not find a root-free cut through {box}")
    for h, w in zip(halves, counts):
        m = round(w)
        if abs(w - m) > 0.05:
            raise ContourResolutionError(f"winding number {w:.4f} is not an integer on {h}")
        _split(func, h, int(m), depth + 1, tol, out, max_depth)


def locate_complex_roots(
    spec: StarGraphSpec,
    rectangle=(0.0, 2.0) + DEFAULT_IM_WINDOW,
    tol_ratio: float = 1e-10,
    max_depth: int = 40,
) -> list[ComplexRoot]:
    """Roots of ``det M`` inside ``(re_lo, re_hi, im_lo, im_hi)`` with ``im_lo > 0``.

    Only upper-half-plane representatives are returned, sorted by real
    part. Each is refined until ``|det M| <= tol_ratio * boundary scale``.
    """
    x0, x1, y0, y1 = (float(v) for v in rectangle)
    if not (x1 > x0 and y1 > y0):
        raise ArgumentError(f"degenerate rectangle {rectangle}")
    if y0 <= 0:
        raise ArgumentError("the rectangle must lie in the upper half plane (im_lo > 0)")

    def func(z):
        z = np.asarray(z, dtype=complex)
        z = np.where(z == 0, 1e-300, z)
        return secular_determinant_grid(spec, z)

    n, box = _count(func, (x0, x1, y0, y1))
    edge = np.concatenate([np.linspace(complex(box[0], box[2]), complex(box[1], box[2]), 33),
                           np.linspace(complex(box[0], box[3]), complex(box[1], box[3]), 33)])
    scale = max(float(np.median(np.abs(func(edge)))), 1.0)
    found: list = []
    _split(func, box, n, 0, tol_ratio * scale, found, max_depth)
    found.sort(key=lambda t: (t[0].real, t[0].imag))
    return [ComplexRoot(complex(z), float(res), m) for z, res, m in found]


def find_all_roots(spec: StarGraphSpec, window=DEFAULT_WINDOW, samples: int = DEFAULT_SAMPLES,
                   im_window=None) -> RootReport:
    rep = scan_real_roots(spec, window, samples)
    if im_window is None:
        return rep
    box = (float(window[0]), float(window[1]), float(im_window[0]), float(im_window[1]))
    cplx = locate_complex_roots(spec, box)
    return RootReport(rep.q, rep.alpha, rep.window, rep.real_roots, tuple(cplx), tuple(im_window))


# -- exceptional point -----------------------------------------------------


@dataclass(frozen=True)
class ExceptionalPoint:
    alpha_star: float
    k_star: float
    bracket: tuple[float, float]
    residual_f: float
    residual_df: float
    method: str
    counts: tuple[int, int] = field(default=(0, 0))

    @property
    def confident(self) -> bool:
        return self.method == "newton"

    def as_dict(self) -> dict:
        return {
            "alpha_star": self.alpha_star,
            "k_star": self.k_star,
            "bracket": list(self.bracket),
            "residuals": {"F": self.residual_f, "dF_dk": self.residual_df},
            "method": self.method,
            "confidence": "full" if self.confident else "reduced",
            "counts": list(self.counts),
        }


def _closest_pair(roots: tuple[RealRoot, ...]) -> tuple[float, float]:
    ks = [r.k for r in roots]
    if len(ks) < 2:
        raise NoTransitionError("no pair of real roots to coalesce", (len(ks), len(ks)))
    gaps = np.diff(ks)
    i = int(np.argmin(gaps))
    return ks[i], ks[i + 1]


def _ep_newton(spec: StarGraphSpec, k: float, alpha: float, maxit: int = 50):
    def G(kk, aa):
        s = spec.with_alpha(aa)
        return np.array([_real_f(s, kk), _dfdk(s, kk)])

    hj = 1e-5
    for _ in range(maxit):
        g = G(k, alpha)
        jac = np.empty((2, 2))
        jac[:, 0] = (G(k + hj, alpha) - G(k - hj, alpha)) / (2 * hj)
        jac[:, 1] = (G(k, alpha + hj) - G(k, alpha - hj)) / (2 * hj)
        try:
            step = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        k, alpha = k + step[0], alpha + step[1]
        if alpha < 0 or k <= 0:
            return None
        if np.max(np.abs(step)) <= 1e-14 * max(1.0, abs(k), abs(alpha)):
            break
    return k, alpha


def _pair_in(spec: StarGraphSpec, centre: float, half: float, samples: int = 400):
    """The two roots of a coalescing pair near ``centre``, or None."""
    rep = scan_real_roots(spec, (max(centre - half, 1e-3), centre + half), samples)
    if rep.real_count >= 2 and len(rep.real_roots) >= 2:
        return _closest_pair(rep.real_roots)
    if rep.real_roots and rep.real_roots[0].tangential:
        k = rep.real_roots[0].k
        return k, k
    return None


def find_exceptional_point(
    spec: StarGraphSpec,
    alpha_bracket,
    window=DEFAULT_WINDOW,
    samples: int = DEFAULT_SAMPLES,
    alpha_tol: float = 1e-4,
    f_tol: float = 1e-8,
    df_tol: float = 1e-6,
) -> ExceptionalPoint:
    """Critical coupling where two real roots in ``window`` merge and leave the axis.

    ``spec.alpha`` is ignored; ``alpha_bracket`` may be given in either order.
    """
    lo, hi = sorted(float(a) for a in alpha_bracket)
    c_lo = count_real_roots(spec.with_alpha(lo), window, samples)
    c_hi = count_real_roots(spec.with_alpha(hi), window, samples)
    if c_lo == c_hi:
        raise NoTransitionError(
            f"no root-count transition in alpha bracket ({lo}, {hi}): "
            f"{c_lo} real roots at alpha={lo}, {c_hi} at alpha={hi}",
            (c_lo, c_hi),
        )
    a, b = lo, hi
    while b - a > alpha_tol:
        mid = 0.5 * (a + b)
        if count_real_roots(spec.with_alpha(mid), window, samples) == c_lo:
            a = mid
        else:
            b = mid
    many = a if c_lo > c_hi else b
    k1, k2 = _closest_pair(scan_real_roots(spec.with_alpha(many), window, samples).real_roots)
    k0, a0 = 0.5 * (k1 + k2), 0.5 * (a + b)

    sol = _ep_newton(spec, k0, a0)
    if sol is not None:
        ks, als = sol
        s = spec.with_alpha(als)
        rf, rdf = abs(_real_f(s, ks)), abs(_dfdk(s, ks))
        fscale = 1.0 + float(np.nanmedian(np.abs(secular_scalar_grid(s, _grid(s, window, samples)))))
        near = a - 10 * alpha_tol <= als <= b + 10 * alpha_tol and abs(ks - k0) <= 2 * (k2 - k1) + 1e-3
        if near and rf <= f_tol * fscale and rdf <= df_tol * fscale:
            return ExceptionalPoint(float(als), float(ks), (a, b), rf, rdf, "newton", (c_lo, c_hi))
    return _ep_bisection(spec, a, b, k1, k2, (c_lo, c_hi), c_lo > c_hi)


def _ep_bisection(spec, a, b, k1, k2, counts, pair_below: bool, alpha_tol: float = 1e-9):
    """Fallback: bisect on the presence of the pair, tracking it with a local scan."""
    centre, half = 0.5 * (k1 + k2), max(2.0 * (k2 - k1), 1e-3)
    while b - a > alpha_tol:
        mid = 0.5 * (a + b)
        pair = _pair_in(spec.with_alpha(mid), centre, half)
        if (pair is not None) == pair_below:
            a = mid
        else:
            b = mid
        if pair is not None:
            centre, half = 0.5 * (pair[0] + pair[1]), max(2.0 * (pair[1] - pair[0]), 1e-6)
    als = 0.5 * (a + b)
    s = spec.with_alpha(als)
    return ExceptionalPoint(als, centre, (a, b), abs(_real_f(s, centre)), abs(_dfdk(s, centre)),
                            "bisection", counts)


def middle_gap(spec: StarGraphSpec, k_star: float, window=DEFAULT_WINDOW, samples: int = DEFAULT_SAMPLES) -> float:
    """Distance between the two real roots that straddle ``k_star``."""
    ks = [r.k for r in scan_real_roots(spec, window, samples).real_roots]
    below = [k for k in ks if k <= k_star]
    above = [k for k in ks if k > k_star]
    if not below or not above:
        raise NoTransitionError(f"no root pair straddles k*={k_star} at alpha={spec.alpha}", (len(ks), len(ks)))
    return above[0] - below[-1]


def coalescence_exponent(spec: StarGraphSpec, ep: ExceptionalPoint, offsets=None,
                         window=DEFAULT_WINDOW, samples: int = DEFAULT_SAMPLES) -> tuple[float, np.ndarray, np.ndarray]:
    """Least-squares slope of log(gap) against log(alpha* - alpha).

    Offsets are taken on the side of the bracket where the pair is real.
    Returns ``(exponent, offsets, gaps)``.
    """
    if offsets is None:
        offsets = np.logspace(-5, -2, 7)
    offsets = np.asarray(offsets, dtype=float)
    below = ep.counts[0] > ep.counts[1]
    sign = -1.0 if below else 1.0
    gaps = np.array([
        middle_gap(spec.with_alpha(ep.alpha_star + sign * d), ep.k_star, window, samples)
        for d in offsets
    ])
    slope = np.polyfit(np.log(offsets), np.log(gaps), 1)[0]
    return float(slope), offsets, gaps
