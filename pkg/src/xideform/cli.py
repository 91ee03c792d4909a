"""Command-line interface: ``xideform {eval,zeros,correspond,witness,figure,verify}``.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 no witness found.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from mpmath import mp

from . import __version__
from .deform import T_CAP, f_t_eval, gamma_factor, gamma_t, j_map, j_map_np
from .errors import WitnessNotFoundError, XiDeformError
from .mellin import MellinKernel, phi_F, psi_closed, psi_quad
from .precision import PrecisionConfig
from .selberg import GUARD_DIGITS, LFunctionSpec, f_eval, resolve_spec, xi_F_eval
from .xieval import RatioEvaluator, b_tn, xi_t, xi_t_contour, xi_t_fourier
from .zerofind import (
    CertifiedZero, FtEvaluator, Rect, ZeroRecord, locate_zeros, newman_witness, pair_zeros,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_WITNESS = 0, 2, 3, 4
DEFAULT_DIGITS = 34
DEFAULT_TARGET = 1e-12
WHAT = ("F", "xiF", "ft", "xit", "jmap", "gamma", "gammat", "phi", "psi", "btn")


class UsageError(Exception):
    pass


# -- serialisation ------------------------------------------------------------------

def fmt(x: float) -> str:
    """Shortest round-trip decimal of a double."""
    return repr(float(x))


def _cplx(z) -> dict:
    z = complex(z)
    return {"re": fmt(z.real), "im": fmt(z.imag)}


def certificate_json(cert: CertifiedZero, spec: LFunctionSpec, t: float) -> dict:
    return {
        "disk_center": _cplx(cert.disk_center),
        "disk_radius": fmt(cert.disk_radius),
        "delta": fmt(cert.delta),
        "sup_residual": fmt(cert.sup_residual),
        "xi_center": _cplx(cert.xi_center),
        "xi_radius": fmt(cert.xi_radius),
        "samples": cert.samples,
        "claim": cert.claim,
        "off_line_margin": fmt(cert.off_line_margin),
        "off_line": bool(cert.strictly_off_line),
        "provenance": {"spec": spec.name, "spec_hash": spec.digest(), "t": fmt(t), "tool_version": __version__},
    }


def zeros_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "residual", "method"])
    for r in records:
        w.writerow([fmt(r.center.real), fmt(r.center.imag), fmt(r.residual), r.method])
    return buf.getvalue()


class Outputs:
    """Collects output files and publishes them atomically; nothing is left on failure."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.pending = []

    def add(self, name: str, text: str):
        self.pending.append((name, text))

    def commit(self) -> list:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        temps = []
        try:
            for name, text in self.pending:
                fd, tmp = tempfile.mkstemp(dir=self.out_dir, prefix=".tmp-")
                with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                temps.append((tmp, self.out_dir / name))
            for tmp, final in temps:
                os.replace(tmp, final)
                written.append(final)
        finally:
            for tmp, _ in temps:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        return written


# -- zero cache ---------------------------------------------------------------------

@dataclass
class ZeroCacheEntry:
    spec_hash: str
    t: float
    region: Rect
    kind: str
    precision: tuple
    zeros: list
    certificates: list
    tool_version: str

    def to_json(self) -> dict:
        return {
            "spec_hash": self.spec_hash,
            "t": fmt(self.t),
            "region": [fmt(v) for v in (self.region.x_lo, self.region.x_hi, self.region.y_lo, self.region.y_hi)],
            "kind": self.kind,
            "precision": list(self.precision),
            "zeros": [{"re": fmt(z.center.real), "im": fmt(z.center.imag), "residual": fmt(z.residual),
                       "method": z.method, "newton_steps": z.newton_steps, "multiplicity": z.multiplicity,
                       "converged": z.converged} for z in self.zeros],
            "certificates": self.certificates,
            "tool_version": self.tool_version,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ZeroCacheEntry":
        zeros = [ZeroRecord(complex(float(z["re"]), float(z["im"])), float(z["residual"]), int(z["newton_steps"]),
                            z["method"], (), int(z["multiplicity"]), bool(z["converged"])) for z in d["zeros"]]
        return cls(d["spec_hash"], float(d["t"]), Rect(*(float(v) for v in d["region"])), d["kind"],
                   tuple(d["precision"]), zeros, d["certificates"], d["tool_version"])


def cache_dir() -> Path:
    env = os.environ.get("XIDEFORM_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "xideform"


def _cache_key(spec: LFunctionSpec, t: float, region: Rect, kind: str, prec: PrecisionConfig) -> str:
    import hashlib
    blob = json.dumps([spec.digest(), fmt(t), [fmt(v) for v in (region.x_lo, region.x_hi, region.y_lo, region.y_hi)],
                       kind, prec.working_digits, fmt(prec.target_abs_err), __version__])
    return hashlib.sha256(blob.encode()).hexdigest()[:32]


def cached_zeros(spec: LFunctionSpec, t: float, region: Rect, kind: str, prec: PrecisionConfig, compute, use_cache=True):
    """Zero list for (spec, t, region, kind, precision), from the cache when possible."""
    path = cache_dir() / f"zeros-{_cache_key(spec, t, region, kind, prec)}.json"
    if use_cache and path.exists():
        try:
            entry = ZeroCacheEntry.from_json(json.loads(path.read_text(encoding="utf-8")))
            if (entry.tool_version == __version__ and entry.spec_hash == spec.digest() and entry.kind == kind
                    and entry.region == region and entry.t == t):
                return entry.zeros
        except (ValueError, KeyError, TypeError):
            pass
    zeros = compute()
    if use_cache:
        entry = ZeroCacheEntry(spec.digest(), t, region, kind, (prec.working_digits, fmt(prec.target_abs_err)),
                               zeros, [], __version__)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(entry.to_json(), fh, sort_keys=True, indent=1)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
    return zeros


# -- figure --------------------------------------------------------------------

def _svg_panel(x0, y0, w, h, xr, yr, points, title, polyline=None, vline=None, color="#1f4e9c"):
    def px(z):
        return (x0 + (z.real - xr[0]) / (xr[1] - xr[0]) * w, y0 + h - (z.imag - yr[0]) / (yr[1] - yr[0]) * h)

    out = [f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#444"/>',
           f'<text x="{x0 + w / 2:.1f}" y="{y0 - 8}" text-anchor="middle" font-size="13">{title}</text>',
           f'<text x="{x0}" y="{y0 + h + 16}" font-size="10">{xr[0]:.3g}</text>',
           f'<text x="{x0 + w}" y="{y0 + h + 16}" font-size="10" text-anchor="end">{xr[1]:.3g}</text>',
           f'<text x="{x0 - 4}" y="{y0 + h}" font-size="10" text-anchor="end">{yr[0]:.4g}</text>',
           f'<text x="{x0 - 4}" y="{y0 + 10}" font-size="10" text-anchor="end">{yr[1]:.4g}</text>']
    if vline is not None and xr[0] < vline < xr[1]:
        a, b = px(complex(vline, yr[0])), px(complex(vline, yr[1]))
        out.append(f'<line x1="{a[0]:.2f}" y1="{a[1]:.2f}" x2="{b[0]:.2f}" y2="{b[1]:.2f}" stroke="#999" stroke-dasharray="4,3"/>')
    if polyline is not None:
        pts = " ".join(f"{p[0]:.2f},{p[1]:.2f}" for p in map(px, polyline))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#c0392b" stroke-width="1"/>')
    for z in points:
        p = px(z)
        out.append(f'<circle cx="{p[0]:.2f}" cy="{p[1]:.2f}" r="2.2" fill="{color}"/>')
    return out


def figure_svg(spec: LFunctionSpec, t: float, strip: Rect, f_zeros, xi_zeros) -> str:
    """Two panels: F_t zeros in the strip, and xi_t zeros with J_t of the strip boundary."""
    ys = np.linspace(strip.y_lo, strip.y_hi, 400)
    boundary = np.concatenate([strip.x_lo + 1j * ys, strip.x_hi + 1j * ys[::-1], [complex(strip.x_lo, strip.y_lo)]])
    image = j_map_np(spec, t, boundary)
    xr_right = (min(0.0, float(image.real.min())) - 0.05, max(1.0, float(image.real.max())) + 0.05)
    yr_right = (float(image.imag.min()), float(image.imag.max()))
    pad = 0.02 * strip.width
    W, H = 760, 560
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif">',
             f"<!-- xideform {__version__} -->",
             '<rect width="100%" height="100%" fill="white"/>']
    parts += _svg_panel(60, 40, 280, 470, (strip.x_lo - pad, strip.x_hi + pad), (strip.y_lo, strip.y_hi),
                        [r.center for r in f_zeros], f"zeros of F_t, t = {t:g}")
    parts += _svg_panel(440, 40, 280, 470, xr_right, yr_right, list(xi_zeros),
                        f"zeros of xi_t and J_t(strip)", polyline=list(image), vline=0.5, color="#117a65")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def figure_data(spec: LFunctionSpec, t: float, strip: Rect, prec: PrecisionConfig, use_cache: bool = True):
    """F_t zeros, h zeros and their pairing for the figure and correspond commands."""
    f = FtEvaluator(spec, t)
    f_z = cached_zeros(spec, t, strip, "F_t", prec, lambda: locate_zeros(f, strip, prec), use_cache)
    report = pair_zeros(spec, t, strip, prec)
    return f_z, report


def pairing_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["f_re", "f_im", "xi_pre_re", "xi_pre_im", "xi_re", "xi_im", "distance", "matched"])
    for p in report.pairs:
        row = []
        for z in (p.f_zero, p.xi_zero, p.xi_image):
            row += ["", ""] if z is None else [fmt(z.real), fmt(z.imag)]
        row += [fmt(p.distance) if p.matched else "", "1" if p.matched else "0"]
        w.writerow(row)
    return buf.getvalue()


# -- argument handling -----------------------------------------------------------------

def _parse_strip(text: str):
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"strip must look like a:b, got {text!r}")
    if not a < b:
        raise UsageError("strip needs a < b")
    return a, b


def _prec(args) -> PrecisionConfig:
    return PrecisionConfig(working_digits=args.digits, target_abs_err=args.target)


def _spec(args) -> LFunctionSpec:
    try:
        return resolve_spec(args.spec)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load spec {args.spec!r}: {exc}")


def _point(text: str):
    if text is None:
        raise UsageError("this quantity needs --s")
    try:
        return mp.mpmathify(text.replace("i", "j").replace(" ", ""))
    except (ValueError, TypeError):
        raise UsageError(f"cannot parse complex number {text!r}")


def _need_t(args):
    if args.t is None:
        raise UsageError("this quantity needs --t")
    return args.t


def _show(label, vwe, digits, route=None, out=None):
    out = out or sys.stdout
    print(f"{label} = {mp.nstr(vwe.value, digits)}", file=out)
    print(f"err = {vwe.err:.3e}", file=out)
    if route:
        print(f"route = {route}", file=out)
    print(f"digits = {digits}", file=out)


def cmd_eval(args) -> int:
    spec = _spec(args)
    prec = _prec(args)
    d = args.digits
    with mp.workdps(d + GUARD_DIGITS):
        what = args.what
        if what == "F":
            _show("F(s)", f_eval(spec, _point(args.s), prec), d)
        elif what == "xiF":
            _show("xi^F(s)", xi_F_eval(spec, _point(args.s), prec), d)
        elif what == "ft":
            _show("F_t(s)", f_t_eval(spec, _need_t(args), _point(args.s), prec), d)
        elif what == "jmap":
            v = j_map(spec, _need_t(args), _point(args.s))
            print(f"J_t(s) = {mp.nstr(v, d)}")
            print(f"digits = {d}")
        elif what == "gamma":
            _show("gamma(s)", gamma_factor(spec, _point(args.s), prec), d)
        elif what == "gammat":
            _show("gamma_t(s)", gamma_t(spec, _need_t(args), _point(args.s), prec), d)
        elif what == "phi":
            if args.u is None:
                raise UsageError("phi needs --u")
            _show("Phi_F(u)", phi_F(spec, mp.mpf(args.u), prec), d)
        elif what == "psi":
            if args.v is None:
                raise UsageError("psi needs --v")
            k = MellinKernel.of(spec)
            if args.route in ("quad", "both"):
                _show("psi(v)", psi_quad(k, mp.mpf(args.v), prec), d, "quadrature")
            if args.route != "quad":
                print(f"psi(v) = {mp.nstr(psi_closed(k, mp.mpf(args.v)), d)}")
                print("route = closed form")
        elif what == "btn":
            if args.n is None:
                raise UsageError("btn needs --n")
            _show("B_{t,n}(s)", b_tn(spec, _need_t(args), args.n, _point(args.s), prec), d)
        elif what == "xit":
            t = _need_t(args)
            s = _point(args.s)
            if args.route == "both":
                a = xi_t_fourier(spec, t, s, prec)
                b = xi_t_contour(spec, t, s, prec, abscissa=args.abscissa)
                _show("xi_t(s)", a, d, "fourier")
                _show("xi_t(s)", b, d, "contour")
                diff = float(abs(a.value - b.value))
                ok = diff <= a.err + b.err
                print(f"agreement: |difference| = {diff:.3e}, combined err = {a.err + b.err:.3e}, {'agree' if ok else 'DISAGREE'}")
            elif args.route == "contour":
                _show("xi_t(s)", xi_t_contour(spec, t, s, prec, abscissa=args.abscissa), d, "contour")
            else:
                _show("xi_t(s)", xi_t(spec, t, s, prec, route=args.route), d, args.route)
    return EXIT_OK


def cmd_zeros(args) -> int:
    spec = _spec(args)
    prec = _prec(args)
    t = _need_t(args)
    xa, xb = _parse_strip(args.strip)
    region = Rect(xa, xb, args.ymin, args.ymax)
    out = Outputs(args.out)
    f = FtEvaluator(spec, t)
    f_z = cached_zeros(spec, t, region, "F_t", prec, lambda: locate_zeros(f, region, prec), not args.no_cache)
    out.add("zeros_ft.csv", zeros_csv(f_z))
    kinds = args.kind
    if kinds == "auto":
        kinds = "both" if -t <= T_CAP else "ft"
    if kinds in ("both", "xi"):
        lo = max(region.y_lo, 10.0)
        hreg = Rect(xa, xb, lo, args.ymax)
        h = RatioEvaluator(spec, t, (xa - 0.05, xb + 0.05), (lo - 0.05, args.ymax + 0.05))
        h_z = cached_zeros(spec, t, hreg, "h", prec, lambda: locate_zeros(h, hreg, prec, tol=1e-8), not args.no_cache)
        # xi_t zeros are J_t of the zeros of h
        img = j_map_np(spec, t, np.array([z.center for z in h_z])) if h_z else []
        xi_recs = [ZeroRecord(complex(w), z.residual, z.newton_steps, z.method) for w, z in zip(img, h_z)]
        out.add("zeros_xit.csv", zeros_csv(xi_recs))
    for p in out.commit():
        print(p)
    print(f"F_t zeros: {len(f_z)}")
    return EXIT_OK


def cmd_correspond(args) -> int:
    spec = _spec(args)
    prec = _prec(args)
    t = _need_t(args)
    xa, xb = _parse_strip(args.strip)
    strip = Rect(xa, xb, args.ymin, args.ymax)
    _, report = figure_data(spec, t, strip, prec, not args.no_cache)
    out = Outputs(args.out)
    out.add("correspondence.csv", pairing_csv(report))
    for p in out.commit():
        print(p)
    print(f"F_t zeros {report.f_count}, xi_t zeros {report.h_count}, unmatched xi_t {report.unmatched_xi}, "
          f"unmatched F_t {report.unmatched_f}, max distance {report.max_distance:.3e}")
    return EXIT_OK


def cmd_witness(args) -> int:
    spec = _spec(args)
    prec = PrecisionConfig(working_digits=15, target_abs_err=1e-10)
    t = _need_t(args)
    cert = newman_witness(spec, t, prec)
    data = certificate_json(cert, spec, t)
    out = Outputs(args.out)
    out.add("witness.json", json.dumps(data, sort_keys=True, indent=2) + "\n")
    for p in out.commit():
        print(p)
    print(f"F_t zero at {cert.disk_center:.12g}, radius {cert.disk_radius}")
    print(f"delta = {cert.delta:.4g}, sup|h - F_t| = {cert.sup_residual:.4g}")
    print(f"xi_t zero within {cert.xi_radius:.4g} of {cert.xi_center:.12g}")
    print(f"off the critical line: {'yes' if cert.strictly_off_line else 'no'} (margin {cert.off_line_margin:.4g})")
    return EXIT_OK


def cmd_figure(args) -> int:
    spec = _spec(args)
    prec = _prec(args)
    t = _need_t(args)
    xa, xb = _parse_strip(args.strip)
    strip = Rect(xa, xb, args.ymin, args.ymax)
    f_z, report = figure_data(spec, t, strip, prec, not args.no_cache)
    xi_z = [complex(w) for w in (j_map_np(spec, t, np.array([r.center for r in report.h_records])) if report.h_records else [])]
    xi_recs = [ZeroRecord(w, r.residual, r.newton_steps, r.method) for w, r in zip(xi_z, report.h_records)]
    out = Outputs(args.out)
    out.add("figure_ft_zeros.csv", zeros_csv(f_z))
    out.add("figure_xit_zeros.csv", zeros_csv(xi_recs))
    out.add("figure_pairs.csv", pairing_csv(report))
    out.add("figure.svg", figure_svg(spec, t, strip, f_z, xi_z))
    for p in out.commit():
        print(p)
    print(f"F_t zeros {report.f_count}, xi_t zeros {report.h_count}, max pairing distance {report.max_distance:.3e}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import CRITERIA, run_criterion
    wanted = sorted(CRITERIA) if not args.only else [int(v) for v in args.only.split(",")]
    failed = 0
    for k in wanted:
        if k not in CRITERIA:
            raise UsageError(f"no criterion {k}")
        res = run_criterion(k)
        print(res.line(), flush=True)
        failed += not res.passed
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xideform", description="Deformed xi functions and their zeros.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_spec=True):
        if need_spec:
            sp.add_argument("--spec", default="zeta", help="preset name (zeta, chi4) or JSON config path")
        sp.add_argument("--digits", type=int, default=DEFAULT_DIGITS, help="working digits (default 34)")
        sp.add_argument("--target", type=float, default=DEFAULT_TARGET, help="target absolute error (default 1e-12)")
        sp.add_argument("--t", type=float, default=None, help="deformation parameter, t < 0")

    def region(sp, ymin):
        sp.add_argument("--strip", default="-0.3:-0.2", help="x range a:b (default -0.3:-0.2)")
        sp.add_argument("--ymin", type=float, default=ymin)
        sp.add_argument("--ymax", type=float, default=200.0)
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--no-cache", action="store_true", help="ignore and do not write the zero cache")

    e = sub.add_parser("eval", help="evaluate one quantity at a point")
    common(e)
    e.add_argument("--what", choices=WHAT, required=True)
    e.add_argument("--s", default=None, help="complex point, e.g. -0.25+40i")
    e.add_argument("--u", type=str, default=None)
    e.add_argument("--v", type=str, default=None)
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--route", default="auto", choices=("auto", "fourier", "contour", "both", "quad", "closed"))
    e.add_argument("--abscissa", default="2", help="contour line Re w (default 2)")
    e.set_defaults(func=cmd_eval)

    z = sub.add_parser("zeros", help="CSV of F_t and xi_t zeros in a region")
    common(z)
    region(z, 0.0)
    z.add_argument("--kind", default="auto", choices=("auto", "ft", "xi", "both"))
    z.set_defaults(func=cmd_zeros)

    c = sub.add_parser("correspond", help="pair F_t zeros with xi_t zeros")
    common(c)
    region(c, 30.0)
    c.set_defaults(func=cmd_correspond)

    w = sub.add_parser("witness", help="certified zero of xi_t off the critical line")
    common(w)
    w.add_argument("--out", default=".")
    w.set_defaults(func=cmd_witness)

    f = sub.add_parser("figure", help="two-panel SVG and CSV of the zero correspondence")
    common(f)
    region(f, 30.0)
    f.set_defaults(func=cmd_figure)

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", default=None, help="comma-separated criterion numbers")
    v.set_defaults(func=cmd_verify)
    return p


def _glue_values(argv):
    # argparse takes "-0.3:-0.2" for an option; bind such values to their flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--strip", "--s"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WitnessNotFoundError as exc:
        print(f"error: WitnessNotFoundError: {exc}", file=sys.stderr)
        return EXIT_WITNESS
    except XiDeformError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
