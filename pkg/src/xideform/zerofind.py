"""Zeros of F_t and of h = xi_t(J_t(.))/gamma_t: counting, location, certification.

Every evaluator here is a vectorised callable ``f(s, with_err=False)`` on
complex numpy arrays.  Plain callables without the ``with_err`` keyword are
accepted too; they are assumed accurate to double rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .deform import T_CAP, check_t, ft_np, j_map_np
from .errors import (
    BoundaryZeroError, ConvergenceError, MarginError, PoleProximityError,
    WitnessNotFoundError, XiDeformError, ZeroCollisionError,
)
from .precision import FAST_PRECISION, PrecisionConfig
from .selberg import LFunctionSpec
from .xieval import Y_MIN, RatioEvaluator

JITTER = 1e-3
MAX_JITTER = 5
MAX_EDGE_POINTS = 1 << 18
EDGE_RESOLUTION = 1e-9
CIRCLE_MIN = 128
CIRCLE_MAX = 1 << 14
DEFAULT_RADIUS = 0.02
MARGIN = 0.9
# initial boundary samples per unit length; F_t and h turn by well under
# pi/2 over 1/32 at the heights used here, and the adaptive pass refines
SAMPLE_DENSITY = 32


@dataclass(frozen=True)
class Rect:
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def center(self) -> complex:
        return complex((self.x_lo + self.x_hi) / 2, (self.y_lo + self.y_hi) / 2)

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> float:
        return self.y_hi - self.y_lo

    def contains(self, s: complex, pad: float = 0.0) -> bool:
        return (self.x_lo - pad <= s.real <= self.x_hi + pad) and (self.y_lo - pad <= s.imag <= self.y_hi + pad)

    def grown(self, d: float) -> "Rect":
        return Rect(self.x_lo - d, self.x_hi + d, self.y_lo - d, self.y_hi + d)

    def corners(self):
        return (complex(self.x_lo, self.y_lo), complex(self.x_hi, self.y_lo),
                complex(self.x_hi, self.y_hi), complex(self.x_lo, self.y_hi))


@dataclass(frozen=True)
class ZeroRecord:
    center: complex
    residual: float
    newton_steps: int
    method: str
    step_sizes: tuple = ()
    multiplicity: int = 1
    converged: bool = True


@dataclass(frozen=True)
class CertifiedZero:
    """Rouche certificate: h has a zero within disk_radius of disk_center.

    The xi-plane fields give a disk that contains the corresponding zero of
    xi_t, namely J_t of the s-plane disk.
    """

    disk_center: complex
    disk_radius: float
    delta: float
    sup_residual: float
    xi_center: complex
    xi_radius: float
    samples: int
    claim: str = "xi_t has >= 1 zero in J_t-image neighborhood"

    @property
    def off_line_margin(self) -> float:
        """Re(xi_center) - 1/2 - xi_radius; positive means right of the line."""
        return self.xi_center.real - 0.5 - self.xi_radius

    @property
    def strictly_off_line(self) -> bool:
        return self.off_line_margin >= self.xi_radius


# -- evaluation helpers --------------------------------------------------------------

def _eval(f, s):
    """(values, errors) of an evaluator on an array of points."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    try:
        val, err = f(s, with_err=True)
    except TypeError:
        val = np.asarray(f(s), dtype=complex)
        err = 64 * np.finfo(float).eps * np.abs(val)
    return np.asarray(val, dtype=complex), np.asarray(err, dtype=float)


class FtEvaluator:
    """Vectorised F_t for the zero finders."""

    def __init__(self, spec: LFunctionSpec, t):
        check_t(t)  # the series needs no cap on |t|
        self.spec = spec
        self.t = float(t)

    def __call__(self, s, with_err: bool = False):
        return ft_np(self.spec, self.t, s, with_err=with_err)


# -- argument principle --------------------------------------------------------------

def _edge_winding(f, a: complex, b: complex, n0: int):
    """Total phase change of f along the segment a -> b, adaptively sampled.

    Raises BoundaryZeroError (caught by the caller) if |f| <= err anywhere
    or the sampling budget is exhausted.
    """
    u = np.linspace(0.0, 1.0, n0 + 1)
    vals, errs = _eval(f, a + (b - a) * u)
    while True:
        if np.any(np.abs(vals) <= errs):
            raise BoundaryZeroError("|f| <= err on the boundary")
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) >= math.pi / 2
        if not bad.any():
            return float(dphi.sum())
        if len(u) > MAX_EDGE_POINTS:
            raise BoundaryZeroError("phase sampling budget exhausted near the boundary")
        gaps = (u[1:] - u[:-1])[bad]
        if gaps.min() * abs(b - a) < EDGE_RESOLUTION:
            # the phase still jumps across a sub-resolution gap: a zero sits on the edge
            raise BoundaryZeroError("phase jump does not resolve; zero on the boundary")
        mids = (u[:-1][bad] + u[1:][bad]) / 2
        mv, me = _eval(f, a + (b - a) * mids)
        u = np.concatenate([u, mids])
        order = np.argsort(u, kind="stable")
        u = u[order]
        vals = np.concatenate([vals, mv])[order]
        errs = np.concatenate([errs, me])[order]


def _winding(f, rect: Rect, density: float) -> int:
    c = rect.corners()
    total = 0.0
    for k in range(4):
        a, b = c[k], c[(k + 1) % 4]
        n = max(16, math.ceil(density * abs(b - a)))
        total += _edge_winding(f, a, b, n)
    w = total / (2 * math.pi)
    k = round(w)
    if abs(w - k) > 0.1:
        raise BoundaryZeroError(f"winding {w:.3f} is not close to an integer")
    return int(k)


def _jittered(rect: Rect, attempt: int) -> Rect:
    sign = 1 if attempt % 2 else -1
    d = JITTER * ((attempt + 1) // 2) * sign
    return Rect(rect.x_lo - d, rect.x_hi + d, rect.y_lo - d, rect.y_hi + d)


def _count_with_rect(f, rect: Rect, density: float = SAMPLE_DENSITY):
    """Count and the (possibly jittered) rectangle actually used."""
    for attempt in range(MAX_JITTER + 1):
        r = rect if attempt == 0 else _jittered(rect, attempt)
        try:
            return _winding(f, r, density), r
        except BoundaryZeroError:
            continue
    raise BoundaryZeroError(f"zero on the boundary of {rect} persists after {MAX_JITTER} jitters")


def count_zeros(f, rect: Rect, prec: PrecisionConfig = FAST_PRECISION) -> int:
    """Number of zeros of f in rect, with multiplicity, by the argument principle.

    The boundary starts with ``SAMPLE_DENSITY`` samples per unit length and
    consecutive samples are refined until their phase difference is below
    pi/2; a boundary sample with |f| <= err triggers a jitter of the
    edges by 1e-3, at most five times.
    """
    return _count_with_rect(f, rect)[0]


def phase_scan_count(f, rect: Rect, n_per_unit: int = 4000) -> int:
    """Winding number from a fixed fine uniform boundary grid (no adaptivity)."""
    c = rect.corners()
    total = 0.0
    for k in range(4):
        a, b = c[k], c[(k + 1) % 4]
        n = max(64, int(n_per_unit * abs(b - a)))
        v, _ = _eval(f, a + (b - a) * np.linspace(0, 1, n + 1))
        total += float(np.angle(v[1:] / v[:-1]).sum())
    return round(total / (2 * math.pi))


# -- location ----------------------------------------------------------------------

def _derivative(f, s: complex, h: float = 1e-6) -> complex:
    v, _ = _eval(f, np.array([s + h, s - h, s + 1j * h, s - 1j * h]))
    return complex(((v[0] - v[1]) - 1j * (v[2] - v[3])) / (4 * h))


def newton(f, s0: complex, tol: float, max_steps: int = 40, multiplicity: int = 1, box: Rect | None = None):
    """Newton iteration with a finite-difference derivative; returns ZeroRecord.

    ``step_sizes`` keeps |s_{k+1} - s_k| so quadratic convergence can be
    inspected afterwards.
    """
    s = complex(s0)
    steps = []
    for _ in range(max_steps):
        v, _ = _eval(f, np.array([s]))
        if v[0] == 0:
            break
        d = _derivative(f, s)
        if d == 0:
            break
        step = multiplicity * complex(v[0]) / d
        s -= step
        steps.append(abs(step))
        if abs(step) <= 1e-13 * (1 + abs(s)):
            break
        if not np.isfinite(s) or (box is not None and not box.contains(s, pad=max(box.width, box.height))):
            raise ConvergenceError(f"Newton from {s0} left the search cell")
    v, _ = _eval(f, np.array([s]))
    res = float(abs(v[0]))
    # counted cells have no zero on their edges, so a root outside belongs to a neighbour
    inside = box is None or box.contains(s, pad=1e-9 * (1 + max(box.width, box.height)))
    if res <= tol and inside:
        return ZeroRecord(s, res, len(steps), "newton", tuple(steps), multiplicity)
    raise ConvergenceError(f"Newton from {s0} did not reach |f| <= {tol} (|f| = {res:.3g})")


def _split(rect: Rect):
    """Quadrisect, or bisect across the long side of a thin cell."""
    xm = (rect.x_lo + rect.x_hi) / 2
    ym = (rect.y_lo + rect.y_hi) / 2
    if rect.height > 2 * rect.width:
        return [Rect(rect.x_lo, rect.x_hi, rect.y_lo, ym), Rect(rect.x_lo, rect.x_hi, ym, rect.y_hi)]
    if rect.width > 2 * rect.height:
        return [Rect(rect.x_lo, xm, rect.y_lo, rect.y_hi), Rect(xm, rect.x_hi, rect.y_lo, rect.y_hi)]
    return [Rect(rect.x_lo, xm, rect.y_lo, ym), Rect(xm, rect.x_hi, rect.y_lo, ym),
            Rect(rect.x_lo, xm, ym, rect.y_hi), Rect(xm, rect.x_hi, ym, rect.y_hi)]


def locate_zeros(f, rect: Rect, prec: PrecisionConfig = FAST_PRECISION, tol: float = 1e-10, min_cell: float = 1e-7) -> list:
    """All zeros of f in rect as ZeroRecords sorted by imaginary part.

    Cells are subdivided until each holds at most one zero; Newton then
    starts from the cell center and must converge inside the cell.  If it
    does not, the cell is subdivided further; below ``min_cell`` it is
    returned unrefined, flagged ``converged=False``.  Thin cells are bisected
    across their long side rather than quadrisected.
    """
    n, rect = _count_with_rect(f, rect)
    out = []
    stack = [(rect, n)]
    while stack:
        cell, k = stack.pop()
        if k == 0:
            continue
        small = max(cell.width, cell.height) < min_cell
        if k == 1 or small:
            try:
                out.append(newton(f, cell.center, tol, prec.max_refine, multiplicity=k if small else 1, box=cell))
                continue
            except ConvergenceError:
                if small:
                    v, _ = _eval(f, np.array([cell.center]))
                    out.append(ZeroRecord(cell.center, float(abs(v[0])), prec.max_refine, "unrefined", (), k, False))
                    continue
            # Newton left the cell: narrow the cell down and retry
        parts = _split(cell)
        for attempt in range(MAX_JITTER + 1):
            try:
                counts = [_winding(f, p, SAMPLE_DENSITY) for p in parts]
            except BoundaryZeroError:
                counts = None
            if counts is not None and sum(counts) == k:
                break
            # move the interior split lines slightly
            shift = JITTER * (attempt + 1) * min(1.0, min(cell.width, cell.height))
            xm = (cell.x_lo + cell.x_hi) / 2 + shift * 0.37
            ym = (cell.y_lo + cell.y_hi) / 2 + shift * 0.61
            if len(parts) == 4:
                parts = [Rect(cell.x_lo, xm, cell.y_lo, ym), Rect(xm, cell.x_hi, cell.y_lo, ym),
                         Rect(cell.x_lo, xm, ym, cell.y_hi), Rect(xm, cell.x_hi, ym, cell.y_hi)]
            elif parts[0].x_hi == cell.x_hi:
                parts = [Rect(cell.x_lo, cell.x_hi, cell.y_lo, ym), Rect(cell.x_lo, cell.x_hi, ym, cell.y_hi)]
            else:
                parts = [Rect(cell.x_lo, xm, cell.y_lo, cell.y_hi), Rect(xm, cell.x_hi, cell.y_lo, cell.y_hi)]
        else:
            raise BoundaryZeroError(f"subdivision of {cell} does not preserve the count {k}")
        stack.extend((p, c) for p, c in zip(parts, counts))
    return sorted(out, key=lambda r: (r.center.imag, r.center.real))


# -- Rouche certification ------------------------------------------------------------

def _circle_data(f, h, center: complex, r: float, n: int):
    th = 2 * math.pi * np.arange(n) / n
    pts = center + r * np.exp(1j * th)
    fv, fe = _eval(f, pts)
    if h is None:
        hv, he = fv, np.zeros(n)
    else:
        hv, he = _eval(h, pts)
    spacing = 2 * math.pi * r / n
    df = np.abs(np.diff(np.append(fv, fv[0]))) / spacing
    diff = hv - fv
    dd = np.abs(np.diff(np.append(diff, diff[0]))) / spacing
    delta = float(np.min(np.abs(fv)) - np.max(fe) - spacing * np.max(df))
    sup = float(np.max(np.abs(diff)) + np.max(he + fe) + spacing * np.max(dd)) if h is not None else 0.0
    winding = round(float(np.angle(np.append(fv[1:], fv[0]) / fv).sum()) / (2 * math.pi))
    return delta, sup, winding


def _xi_disk(spec: LFunctionSpec, t: float, center: complex, r: float):
    """J_t(center) and a radius for J_t of the disk |s - center| <= r."""
    c = j_map_np(spec, t, np.array([center]))[0]
    ring = center + r * np.exp(2j * math.pi * np.arange(64) / 64)
    a_t = -t
    jp = 1 + (a_t / 2) * sum(float(w) for w in spec.gamma.omegas()) / (np.abs(ring) - r)
    return complex(c), float(r * np.max(np.abs(jp)))


def rouche_certify(spec: LFunctionSpec, t, rho, radius: float = DEFAULT_RADIUS, prec: PrecisionConfig = FAST_PRECISION,
                   h_eval=None, f_eval=None) -> CertifiedZero:
    """Certify a zero of h = xi_t(J_t(.))/gamma_t in the disk |s - rho| < radius.

    delta is the sampled minimum of |F_t| on the circle minus the
    derivative padding; sup is the sampled maximum of |h - F_t| plus errors
    and padding.  Sampling starts at 128 points and doubles until both are
    stable to 1%.  Certification requires sup < 0.9 delta and exactly one
    zero of F_t inside the circle.  ``h_eval`` replaces h (pass ``f_eval``
    itself for a self-test).
    """
    a_t = check_t(t, T_CAP)
    center = complex(rho.center if isinstance(rho, ZeroRecord) else rho)
    if center.imag < Y_MIN:
        raise PoleProximityError(f"Im rho = {center.imag} below {Y_MIN}")
    f = f_eval or FtEvaluator(spec, t)
    if h_eval is None:
        h_eval = RatioEvaluator(spec, t, (center.real - radius, center.real + radius),
                                (center.imag - radius, center.imag + radius))
    same = h_eval is f
    n = CIRCLE_MIN
    delta, sup, wind = _circle_data(f, None if same else h_eval, center, radius, n)
    while n < CIRCLE_MAX:
        n *= 2
        d2, s2, wind = _circle_data(f, None if same else h_eval, center, radius, n)
        stable = abs(d2 - delta) <= 0.01 * abs(d2) and abs(s2 - sup) <= 0.01 * max(abs(s2), 1e-300)
        delta, sup = d2, s2
        if stable:
            break
    if wind != 1:
        raise ZeroCollisionError(f"circle of radius {radius} around {center} encloses {wind} zeros of F_t")
    if delta <= 0 or not sup < MARGIN * delta:
        raise MarginError(f"Rouche margin fails at {center}: sup|h - F_t| = {sup:.3g}, delta = {delta:.3g}")
    xc, xr = _xi_disk(spec, -a_t, center, radius)
    return CertifiedZero(center, radius, delta, sup, xc, xr, n)


def certify_with_policy(spec: LFunctionSpec, t, rho, prec: PrecisionConfig = FAST_PRECISION, radius: float = DEFAULT_RADIUS,
                        h_eval=None, f_eval=None) -> CertifiedZero:
    """rouche_certify with the radius policy: halve on collision, double once on margin failure."""
    r = radius
    grown = False
    for _ in range(8):
        try:
            return rouche_certify(spec, t, rho, r, prec, h_eval, f_eval)
        except ZeroCollisionError:
            r *= 0.5
        except MarginError:
            if grown:
                raise
            grown = True
            r *= 2
    raise MarginError(f"no admissible radius around {rho}")


# -- pairing F_t zeros with xi_t zeros ----------------------------------------------------

@dataclass(frozen=True)
class ZeroPair:
    f_zero: complex | None
    xi_zero: complex | None
    distance: float
    xi_image: complex | None = None

    @property
    def matched(self) -> bool:
        return self.f_zero is not None and self.xi_zero is not None


@dataclass
class PairingReport:
    pairs: list
    f_count: int
    h_count: int
    strip: Rect
    h_records: list = field(default_factory=list)

    @property
    def unmatched_xi(self) -> int:
        return sum(1 for p in self.pairs if p.f_zero is None)

    @property
    def unmatched_f(self) -> int:
        return sum(1 for p in self.pairs if p.xi_zero is None)

    @property
    def max_distance(self) -> float:
        d = [p.distance for p in self.pairs if p.matched]
        return max(d) if d else 0.0


def _match(fz, hz, max_dist):
    """Greedy nearest-neighbour matching, ties broken by smaller |Im| gap."""
    cand = []
    for i, a in enumerate(fz):
        for j, b in enumerate(hz):
            d = abs(a - b)
            if d <= max_dist:
                cand.append((d, abs(a.imag - b.imag), i, j))
    cand.sort()
    used_f, used_h, pairs = set(), set(), []
    for d, _, i, j in cand:
        if i in used_f or j in used_h:
            continue
        used_f.add(i)
        used_h.add(j)
        pairs.append((i, j, d))
    return pairs, used_f, used_h


def pair_zeros(spec: LFunctionSpec, t, strip: Rect, prec: PrecisionConfig = FAST_PRECISION, max_dist: float = 0.05,
               h_eval=None) -> PairingReport:
    """Match zeros of F_t in the strip with zeros of h = xi_t(J_t(.))/gamma_t.

    Zeros of h are exactly the s-plane pre-images under J_t of zeros of
    xi_t, so distances are s-plane distances.  Both zero sets are located
    independently in the strip and matched by nearest neighbour; entries
    without a partner within ``max_dist`` are reported unmatched.
    """
    a_t = check_t(t, T_CAP)
    if strip.y_lo < Y_MIN:
        raise PoleProximityError(f"strip starts at Im s = {strip.y_lo}, below {Y_MIN}")
    f = FtEvaluator(spec, t)
    h = h_eval or RatioEvaluator(spec, t, (strip.x_lo - 0.05, strip.x_hi + 0.05), (strip.y_lo - 0.05, strip.y_hi + 0.05))
    fz_rec = locate_zeros(f, strip, prec)
    n_h, used_rect = _count_with_rect(h, strip)
    hz_rec = locate_zeros(h, used_rect, prec, tol=1e-8)
    fz = [r.center for r in fz_rec]
    hz = [r.center for r in hz_rec]
    matches, used_f, used_h = _match(fz, hz, max_dist)
    pairs = []
    for i, j, d in matches:
        img = complex(j_map_np(spec, -a_t, np.array([hz[j]]))[0])
        pairs.append(ZeroPair(fz[i], hz[j], float(d), img))
    pairs += [ZeroPair(z, None, math.inf) for i, z in enumerate(fz) if i not in used_f]
    pairs += [ZeroPair(None, z, math.inf, complex(j_map_np(spec, -a_t, np.array([z]))[0]))
              for j, z in enumerate(hz) if j not in used_h]
    pairs.sort(key=lambda p: ((p.f_zero or p.xi_zero).imag, (p.f_zero or p.xi_zero).real))
    return PairingReport(pairs, len(fz), n_h, strip, hz_rec)


# -- the Newman witness -------------------------------------------------------------

def off_line_height(spec: LFunctionSpec, t, x: float, radius: float = DEFAULT_RADIUS, y_max: float = 1e6) -> float:
    """Smallest y with J_t(x + iy) at least 3 radii right of Re = 1/2 (scan by doubling)."""
    y = Y_MIN
    while y <= y_max:
        c, r = _xi_disk(spec, float(t), complex(x, y), radius)
        if c.real - 0.5 >= 2 * r + radius:
            lo, hi = y / 2 if y > Y_MIN else Y_MIN, y
            for _ in range(40):
                mid = (lo + hi) / 2
                c, r = _xi_disk(spec, float(t), complex(x, mid), radius)
                if c.real - 0.5 >= 2 * r + radius:
                    hi = mid
                else:
                    lo = mid
            return hi
        y *= 2
    raise WitnessNotFoundError(f"J_t(x + iy) stays left of the line up to y = {y_max}")


def newman_witness(spec: LFunctionSpec, t, prec: PrecisionConfig = FAST_PRECISION, window: float = 20.0,
                   max_windows: int = 6, max_shifts: int = 3, widenings: int = 3) -> CertifiedZero:
    """A Rouche-certified zero of xi_t strictly right of the critical line.

    Scans the strip [-0.3, -0.2], widened leftward by 0.1 on failure, in
    height windows starting where J_t of the strip clears the line.  If no
    zero certifies, almost-periods of F_t move the zeros found so far
    higher, where h is closer to F_t, and certification is retried there.
    """
    if not t < 0:
        raise ValueError("newman_witness needs t < 0")
    from .almostperiod import find_shifts
    a_t = check_t(t, T_CAP)
    f = FtEvaluator(spec, t)
    errors = []
    seen = []
    strip = None
    for k in range(widenings):
        strip_x = (-0.3 - 0.1 * k, -0.2)
        y0 = max(off_line_height(spec, t, strip_x[0]), 2 * Y_MIN)
        strip = Rect(strip_x[0], strip_x[1], 0.0, 50.0)
        for w in range(max_windows):
            rect = Rect(strip_x[0], strip_x[1], y0 + w * window, y0 + (w + 1) * window)
            try:
                zeros = locate_zeros(f, rect, prec)
            except XiDeformError as exc:
                errors.append(str(exc))
                continue
            for z in zeros:
                if not z.converged:
                    continue
                seen.append(z)
                try:
                    cert = certify_with_policy(spec, t, z, prec, f_eval=f)
                except XiDeformError as exc:
                    errors.append(str(exc))
                    continue
                if cert.strictly_off_line:
                    return cert
    if seen and strip is not None:
        try:
            shifts = find_shifts(spec, -a_t, strip, 0.2, 1e5, count=max_shifts)
        except XiDeformError as exc:
            errors.append(str(exc))
            shifts = []
        for sh in shifts:
            for z in seen[:5]:
                try:
                    z2 = newton(f, z.center + 1j * sh.tau, 1e-10)
                    cert = certify_with_policy(spec, t, z2, prec, f_eval=f)
                except XiDeformError as exc:
                    errors.append(str(exc))
                    continue
                if cert.strictly_off_line:
                    return cert
    raise WitnessNotFoundError("no certified off-line zero; last failures: " + "; ".join(errors[-3:]))
