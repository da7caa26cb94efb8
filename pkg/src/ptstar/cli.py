"""Command-line front end.

Usage:
    ptstar secular --q 6 --alpha 0.7 --window 0.05,2      # CSV curve data
    ptstar roots --q 6 --alpha 1.0 --complex --im-window 0.01,1
    ptstar ep --q 6 --alpha-bracket 0.7,1.0
    ptstar metric --lambda 0.5 --alphas 1,1,1,1
    ptstar metric --lambda 0.5 --basis
    ptstar validate --fd --n 200,400,800 --alpha 0.7

Exit codes: 0 success, 1 numerical or domain failure, 2 usage error.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys

import click
import numpy as np

from . import cryptoherm, roots, validation
from .errors import NoTransitionError, PTStarError
from .stargraph import StarGraphSpec, closed_form_q6, secular_scalar_grid

FLOAT_FMT = "{:.17g}"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return ""
    return FLOAT_FMT.format(float(x))


class FloatList(click.ParamType):
    name = "list"

    def __init__(self, length: int | None = None):
        self.length = length

    def convert(self, value, param, ctx):
        if isinstance(value, (tuple, list)):
            return tuple(value)
        try:
            vals = tuple(float(v) for v in str(value).split(","))
        except ValueError:
            self.fail(f"{value!r} is not a comma-separated list of numbers", param, ctx)
        if self.length is not None and len(vals) != self.length:
            self.fail(f"expected {self.length} comma-separated values, got {len(vals)}", param, ctx)
        return vals


PAIR = FloatList(2)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(type(o).__name__)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _emit_json(obj, out) -> None:
    _emit(json.dumps(obj, indent=2, default=_json_default) + "\n", out)


def _warn(msg: str) -> None:
    if os.environ.get("NO_COLOR") is not None:
        click.echo(f"warning: {msg}", err=True)
    else:
        click.echo(click.style("warning: ", fg="yellow") + msg, err=True)


def _fail(msg: str, code: int = 1):
    if os.environ.get("NO_COLOR") is not None:
        click.echo(f"error: {msg}", err=True)
    else:
        click.echo(click.style("error: ", fg="red") + msg, err=True)
    sys.exit(code)


def model_options(f):
    f = click.option("--alpha", type=float, default=0.0, show_default=True, help="Tip coupling.")(f)
    f = click.option("--L", "length", type=float, default=1.0, show_default=True, help="Arm length.")(f)
    f = click.option("--q", type=click.IntRange(min=2), default=6, show_default=True, help="Number of arms.")(f)
    return f


def window_options(f):
    f = click.option("--samples", type=click.IntRange(min=100), default=roots.DEFAULT_SAMPLES,
                     show_default=True)(f)
    f = click.option("--window", type=PAIR, default="0.05,2", show_default=True,
                     help="Momentum window a,b.")(f)
    return f


out_option = click.option("--out", type=click.Path(dir_okay=False), default=None,
                          help="Write to PATH instead of standard output.")


def _spec(q, length, alpha) -> StarGraphSpec:
    try:
        return StarGraphSpec(q, length, alpha)
    except PTStarError as exc:
        raise click.BadParameter(str(exc))


@click.group()
def main():
    """Spectra, exceptional points and metrics of non-Hermitian star graphs."""


@main.command()
@model_options
@window_options
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@out_option
def secular(q, length, alpha, window, samples, fmt, out):
    """Secular function on a momentum grid (columns k,factor_tan,factor_ratio,product,scalar_F)."""
    spec = _spec(q, length, alpha)
    try:
        ks = roots._grid(spec, window, samples)
        fv = secular_scalar_grid(spec, ks)
        rows = []
        for k, f in zip(ks, fv):
            tan = ratio = prod = None
            if q == 6:
                ev = closed_form_q6(alpha, k, length)
                if ev.factor_tan is not None:
                    tan, ratio, prod = ev.factor_tan.real, ev.factor_ratio.real, ev.product.real
            rows.append((float(k), tan, ratio, prod, None if not np.isfinite(f) else f.real))
    except PTStarError as exc:
        _fail(str(exc))
    header = ["k", "factor_tan", "factor_ratio", "product", "scalar_F"]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        _emit(buf.getvalue(), out)
    else:
        cols = {h: [r[i] for r in rows] for i, h in enumerate(header)}
        _emit_json({"q": q, "L": length, "alpha": alpha, **cols}, out)


@main.command(name="roots")
@model_options
@window_options
@click.option("--complex", "with_complex", is_flag=True, help="Also locate complex roots by contour.")
@click.option("--im-window", type=PAIR, default="0.01,1", show_default=True)
@click.option("--root-tol", type=float, default=roots.ROOT_TOL, show_default=True)
@click.option("--dip-ratio", type=float, default=roots.DIP_RATIO, show_default=True)
@out_option
def roots_cmd(q, length, alpha, window, samples, with_complex, im_window, root_tol, dip_ratio, out):
    """Real roots in the window, optionally complex roots above it."""
    spec = _spec(q, length, alpha)
    try:
        rep = roots.scan_real_roots(spec, window, samples, root_tol=root_tol, dip_ratio=dip_ratio)
        if with_complex:
            box = (float(window[0]), float(window[1])) + tuple(im_window)
            cplx = roots.locate_complex_roots(spec, box)
            rep = roots.RootReport(rep.q, rep.alpha, rep.window, rep.real_roots, tuple(cplx), tuple(im_window))
    except PTStarError as exc:
        _fail(str(exc))
    d = rep.as_dict()
    if alpha == 0:
        # reported separately: k = 0 is outside every scan window
        d["constant_mode"] = {"k": 0.0}
    _emit_json(d, out)


@main.command()
@click.option("--q", type=click.IntRange(min=2), default=6, show_default=True)
@click.option("--L", "length", type=float, default=1.0, show_default=True)
@click.option("--alpha-bracket", type=PAIR, required=True, help="Coupling bracket a,b (any order).")
@window_options
@click.option("--alpha-tol", type=float, default=1e-4, show_default=True, help="Count-bisection resolution.")
@out_option
def ep(q, length, alpha_bracket, window, samples, alpha_tol, out):
    """Exceptional point: coupling where two real roots merge."""
    spec = _spec(q, length, 0.0)
    try:
        res = roots.find_exceptional_point(spec, alpha_bracket, window, samples, alpha_tol=alpha_tol)
    except NoTransitionError as exc:
        _fail(str(exc))
    except PTStarError as exc:
        _fail(str(exc))
    if not res.confident:
        _warn("Newton refinement failed; result from bisection only (reduced confidence)")
    _emit_json(res.as_dict(), out)


@main.command()
@click.option("--lambda", "lam", type=float, required=True, help="Coupling of the four-site chain.")
@click.option("--alphas", type=FloatList(4), default=None, help="Coefficients of the explicit family.")
@click.option("--kappas", type=FloatList(4), default=None, help="Spectral-expansion weights.")
@click.option("--basis", is_flag=True, help="Report the full solution space instead.")
@click.option("--rank-tol", type=float, default=1e-9, show_default=True)
@out_option
def metric(lam, alphas, kappas, basis, rank_tol, out):
    """Metric candidates for the four-site toy Hamiltonian."""
    chosen = sum(x is not None and x is not False for x in (alphas, kappas, basis or None))
    if chosen != 1:
        raise click.UsageError("give exactly one of --alphas, --kappas or --basis")
    h = cryptoherm.build_h4(lam)
    spectrum = cryptoherm.spectrum_reality(h)
    try:
        if basis:
            space = cryptoherm.solve_metric_space(h, rank_tol)
            resid = [space.projection_residual(cryptoherm.metric_component(j, lam)) for j in range(1, 5)]
            d = {
                "lambda": lam,
                "dimension": space.dimension,
                "contains_M_family": bool(all(r <= 1e-10 for r in resid)),
                "projection_residuals": resid,
                "spectrum": spectrum.classification,
            }
        elif alphas is not None:
            d = {"lambda": lam, **cryptoherm.assemble_metric(lam, alphas).as_dict()}
        else:
            d = {"lambda": lam, "kappas": list(kappas), **cryptoherm.spectral_metric(h, kappas).as_dict()}
    except PTStarError as exc:
        _fail(str(exc))
    if not spectrum.real:
        d["warning"] = "spectrum complex: no metric exists"
        _warn(d["warning"])
    _emit_json(d, out)


def _int_list(ctx, param, value):
    try:
        ns = tuple(int(v) for v in value.split(","))
    except ValueError:
        raise click.BadParameter(f"{value!r} is not a comma-separated list of integers")
    if any(n < 8 for n in ns):
        raise click.BadParameter("grid sizes must be >= 8")
    return ns


@main.command()
@click.option("--alpha", type=float, default=None, help="Single coupling to check (default: 0.3,0.7,1.0 / 0.7).")
@click.option("--fd", "fd_only", is_flag=True, help="Only the finite-difference oracle.")
@click.option("--closed-form", "cf_only", is_flag=True, help="Only the determinant/closed-form oracle.")
@click.option("--n", "ns", default="200,400,800", callback=_int_list, show_default=True)
@click.option("--root-tol", type=float, default=1e-9, show_default=True, help="Max det/closed-form deviation.")
@click.option("--min-order", type=float, default=1.8, show_default=True)
@click.option("--pi-tol", type=float, default=1e-3, show_default=True, help="alpha=0 FD tolerance around pi.")
@out_option
def validate(alpha, fd_only, cf_only, ns, root_tol, min_order, pi_tol, out):
    """Run the oracle cross-checks; exit 1 if any is out of tolerance."""
    if fd_only and cf_only:
        raise click.UsageError("--fd and --closed-form are mutually exclusive")
    report, failures = {}, []
    try:
        if not fd_only:
            alphas = (alpha,) if alpha is not None else (0.3, 0.7, 1.0)
            checks = []
            for a in alphas:
                c = validation.determinant_vs_closed_form(a)
                checks.append({"alpha": a, "roots": list(c.det_roots), "max_deviation": c.max_deviation})
                if not c.max_deviation <= root_tol:
                    failures.append(f"closed-form deviation {c.max_deviation:.3e} at alpha={a}")
            report["closed_form"] = {
                "max_deviation": max(c["max_deviation"] for c in checks),
                "tolerance": root_tol,
                "checks": checks,
            }
        if not cf_only:
            a = 0.7 if alpha is None else alpha
            spec = StarGraphSpec(6, 1.0, a)
            if a == 0:
                k = validation.fd_lowest_momentum(spec, max(ns))
                report["fd"] = {"alpha": a, "n": max(ns), "lowest_k": k, "deviation_from_pi": abs(k - math.pi),
                                "tolerance": pi_tol}
                if not abs(k - math.pi) <= pi_tol:
                    failures.append(f"FD lowest momentum {k} not within {pi_tol} of pi")
            else:
                conv = validation.fd_convergence(spec, ns)
                report["fd"] = {
                    "alpha": a,
                    "n": list(ns),
                    "reference_roots": list(conv.reference),
                    "errors": conv.errors.tolist(),
                    "orders": list(conv.orders),
                    "min_order": conv.min_order,
                    "required_order": min_order,
                }
                if not conv.min_order >= min_order:
                    failures.append(f"FD observed order {conv.min_order:.3f} < {min_order}")
    except PTStarError as exc:
        _fail(str(exc))
    report["passed"] = not failures
    report["failures"] = failures
    _emit_json(report, out)
    if failures:
        _fail("oracle breach: " + "; ".join(failures))


if __name__ == "__main__":
    main()
