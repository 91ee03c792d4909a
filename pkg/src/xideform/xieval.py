"""xi_t by two independent integrals, the pieces B_{t,n}, and the J_t comparison.

Fourier side, with z = -i(2s - 1):

    xi_t(s) = int e^{t u^2} Phi_F(u) e^{i z u} du.

Contour side, on any vertical line Re w = a (xi^F is entire):

    xi_t(s) = (pi |t|)^{-1/2} int xi^F(a + iv) exp((s - a - iv)^2 / |t|) dv.

The contour integrand exceeds the result by exp((Re s - a)^2 / |t|), so a
line through Re s costs no digits; the Fourier integrand loses roughly the
decay of gamma at height Im s.  Both use Gauss-Legendre panels on a fixed
power-of-two lattice, so node values are cached across calls, and the
difference between two refinement levels is the quadrature error estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from mpmath import mp
import numpy as np

from .deform import (
    T_CAP, check_t, f_t_eval, ft_np, j_map, j_map_np, log_gamma_t, log_gamma_t_np,
)
from .errors import PoleCrossingError, PoleProximityError, PrecisionError
from .mellin import _phi_F_raw
from .precision import DEFAULT_PRECISION, PrecisionConfig, ValueWithError, checked
from .selberg import GUARD_DIGITS, LFunctionSpec, log_gamma_factor, xi_F_raw
from .special import gauss_legendre

Y_MIN = 10.0
MIN_SIGNIFICANT = 8
LOG10E = math.log10(math.e)


@dataclass(frozen=True)
class QuadraturePlan:
    """How one xi_t integral is discretised."""

    contour_abscissa: float
    half_height: float
    panel_count: int
    u_cutoff: float
    step_bound: float


def _snap(h: float) -> int:
    """Exponent k of the coarse level: the fine level 2^-(k+1) is the largest
    power of two not above h, and the coarse level doubles it."""
    return math.ceil(-math.log2(h)) - 1


def _rule_order(dps: int) -> int:
    """Gauss points per panel; panels stay within the phase budget, so a
    modest order already converges far below 10^-dps."""
    return max(8, (int(dps) + 3) // 4)


def _decay_rate(spec: LFunctionSpec) -> float:
    """Exponential decay rate of |gamma(a+iv)| in |v|."""
    return math.pi / 2 * float(spec.gamma.omega_sum())


def _phase_rate(spec: LFunctionSpec, height: float) -> float:
    """Bound on the phase derivative of gamma(a+iv) for |v| <= height."""
    g = spec.gamma
    r = abs(float(mp.log(_q(spec))))
    for w in g.omegas():
        r += float(w) * abs(math.log(float(w) * (abs(height) + 2)))
    return r + 0.25


@lru_cache(maxsize=None)
def _q_cached(spec: LFunctionSpec, prec: int):
    from .selberg import as_mp
    with mp.workprec(prec):
        return as_mp(spec.gamma.bigQ)


def _q(spec):
    return _q_cached(spec, mp.prec)


# -- cached node values ------------------------------------------------------------

@lru_cache(maxsize=400_000)
def _xi_panel(spec: LFunctionSpec, a: str, k_exp: int, idx: int, q: int, dps: int, engine: str = "library"):
    """xi^F at the q Gauss nodes of panel idx of width 2^-k_exp on Re w = a."""
    with mp.workdps(dps):
        nodes, _ = gauss_legendre(q, dps)
        h = mp.ldexp(mp.mpf(1), -k_exp)
        mid = (idx + mp.mpf(0.5)) * h
        am = mp.mpf(a)
        prec = PrecisionConfig(working_digits=max(15, dps - GUARD_DIGITS), target_abs_err=10.0 ** (2 - dps), max_terms=10**7)
        out = []
        for x in nodes:
            val, err = xi_F_raw(spec, mp.mpc(am, mid + h / 2 * x), prec, engine)
            out.append((val, err))
        return tuple(out)


@lru_cache(maxsize=400_000)
def _phi_panel(spec: LFunctionSpec, k_exp: int, idx: int, q: int, dps: int):
    """Phi_F at the q Gauss nodes of panel idx of width 2^-k_exp (u >= 0)."""
    with mp.workdps(dps):
        nodes, _ = gauss_legendre(q, dps)
        h = mp.ldexp(mp.mpf(1), -k_exp)
        mid = (idx + mp.mpf(0.5)) * h
        prec = PrecisionConfig(working_digits=max(15, dps - GUARD_DIGITS), target_abs_err=10.0 ** (-dps - 5), max_terms=10**7)
        return tuple(_phi_F_raw(spec, mid + h / 2 * x, prec) for x in nodes)


def _panels(lo: float, hi: float, k_exp: int):
    """Indices of lattice panels of width 2^-k_exp covering [lo, hi]."""
    h = 2.0 ** -k_exp
    return range(math.floor(lo / h), math.ceil(hi / h))


def _round_dps(d: float) -> int:
    return int(5 * math.ceil(d / 5))


# -- Fourier route --------------------------------------------------------------------

def _fourier_sum(spec, a_t, s, k_exp, U, q, dps):
    nodes, weights = gauss_legendre(q, dps)
    h = mp.ldexp(mp.mpf(1), -k_exp)
    zs = 2 * s - 1
    total = mp.mpc(0)
    size = mp.mpf(0)
    node_err = mp.mpf(0)
    for idx in _panels(0.0, U, k_exp):
        vals = _phi_panel(spec, k_exp, idx, q, dps)
        mid = (idx + mp.mpf(0.5)) * h
        for x, w, (phi, perr) in zip(nodes, weights, vals):
            u = mid + h / 2 * x
            damp = mp.exp(-a_t * u * u)
            e = mp.exp(zs * u)
            term = w * damp * (phi * e + mp.conj(phi) / e)
            total += term
            size += abs(w * damp * phi) * (abs(e) + 1 / abs(e))
            node_err += abs(w) * damp * perr * (abs(e) + 1 / abs(e))
    return total * h / 2, size * h / 2, node_err * h / 2


def xi_t_fourier(spec: LFunctionSpec, t, s, prec: PrecisionConfig = DEFAULT_PRECISION, plan: list | None = None) -> ValueWithError:
    """xi_t(s) from the Fourier integral over the real u-line.

    Uses Phi_F(-u) = conj Phi_F(u) to fold the integral onto u >= 0.  The
    arithmetic is escalated by the expected loss (the decay of gamma at
    height Im s); if that needs more than twice the working digits, or the
    measured cancellation leaves fewer than MIN_SIGNIFICANT digits, a
    PrecisionError is raised.
    """
    a_t = check_t(t, T_CAP)
    s_c = complex(s)
    x, y = s_c.real, s_c.imag
    loss = _decay_rate(spec) * abs(y) * LOG10E
    if loss > prec.working_digits:
        raise PrecisionError(f"Fourier route would lose ~{loss:.0f} digits at Im s = {y}")
    dps = _round_dps(prec.working_digits + loss + GUARD_DIGITS)
    q = _rule_order(dps)
    k_exp = _snap((math.pi / 4) / (2 * abs(y) + abs(2 * x - 1) + 16))
    with mp.workdps(dps):
        s = mp.mpc(s)
        # cut-off: integrand bound below 10^-dps of its peak and below target/3
        U = 0.0
        peak = 0.0
        lim = mp.mpf(10) ** (-dps)
        phi_prec = PrecisionConfig(working_digits=dps - GUARD_DIGITS, target_abs_err=10.0 ** (-dps - 5), max_terms=10**7)
        while True:
            U += 0.125
            ph, _ = _phi_F_raw(spec, mp.mpf(U), phi_prec)
            b = abs(ph) * mp.exp(-a_t * U * U + abs(2 * x - 1) * U)
            peak = max(peak, float(b)) if U < 0.2 else peak
            if U >= 0.5 and b < lim * max(peak, 1e-300) and b < prec.target_abs_err / 3:
                break
            if U > 8:
                raise PrecisionError("Fourier cut-off search failed")
        U_tail = float(b) * 0.125
        coarse, _, _ = _fourier_sum(spec, a_t, s, k_exp, U, q, dps)
        fine, size, node_err = _fourier_sum(spec, a_t, s, k_exp + 1, U, q, dps)
        floor = float(size) * 10.0 ** (-dps + 2)
        err = float(abs(fine - coarse)) + U_tail + floor + float(node_err)
        if float(abs(fine)) < floor * 10**MIN_SIGNIFICANT:
            raise PrecisionError("Fourier route: cancellation exhausted the working precision")
        if plan is not None:
            plan.append(QuadraturePlan(float("nan"), float("nan"), 2 * len(_panels(0, U, k_exp + 1)), U, 2.0 ** (-k_exp - 1)))
        with mp.workdps(prec.working_digits + GUARD_DIGITS):
            return checked(+fine, err, prec, "xi_t (Fourier)")


# -- contour route ---------------------------------------------------------------------

def _contour_window(spec, a_t, y_lo, y_hi, dps):
    """Vertical half-width V so Gaussian tails are below 10^-dps, gamma growth included."""
    K = _decay_rate(spec)
    need = (dps + 5) * math.log(10)
    b = K * a_t / 2
    return b + math.sqrt(b * b + a_t * need)


def _contour_k(spec, a_t, x_range, a, height):
    dx = max(abs(x_range[0] - a), abs(x_range[1] - a))
    rate = _phase_rate(spec, height) + 2 * dx / a_t
    h = min((math.pi / 4) / rate, math.sqrt(a_t) / 2)
    return _snap(h)


def _contour_sum(spec, a_t, s, a, k_exp, lo, hi, q, dps, engine):
    nodes, weights = gauss_legendre(q, dps)
    h = mp.ldexp(mp.mpf(1), -k_exp)
    am = mp.mpf(a)
    total = mp.mpc(0)
    size = mp.mpf(0)
    node_err = mp.mpf(0)
    for idx in _panels(lo, hi, k_exp):
        vals = _xi_panel(spec, a, k_exp, idx, q, dps, engine)
        mid = (idx + mp.mpf(0.5)) * h
        for x, w, (xi, xerr) in zip(nodes, weights, vals):
            v = mid + h / 2 * x
            d = s - mp.mpc(am, v)
            g = mp.exp(d * d / a_t)
            term = w * xi * g
            total += term
            size += abs(term)
            node_err += abs(w * g) * xerr
    scale = h / 2 / mp.sqrt(mp.pi * a_t)
    return total * scale, size * scale, node_err * scale


def xi_t_contour(spec: LFunctionSpec, t, s, prec: PrecisionConfig = DEFAULT_PRECISION, abscissa=2, plan: list | None = None, engine: str = "library") -> ValueWithError:
    """xi_t(s) from the Gaussian-weighted integral of xi^F along Re w = abscissa.

    The integrand is larger than the result by exp((Re s - a)^2 / |t|); that
    many extra digits are carried, and a PrecisionError is raised when they
    exceed the working digits.  ``engine`` selects how F is evaluated at the
    nodes (see ``selberg._dirichlet_core``).
    """
    a_t = check_t(t, T_CAP)
    s_c = complex(s)
    x, y = s_c.real, s_c.imag
    a = str(mp.mpf(abscissa)) if not isinstance(abscissa, str) else abscissa
    a_f = float(mp.mpf(a))
    headroom = (x - a_f) ** 2 / a_t * LOG10E
    if headroom > prec.working_digits:
        raise PrecisionError(f"contour route needs {headroom:.0f} extra digits at Re s = {x}")
    dps = _round_dps(prec.working_digits + headroom + GUARD_DIGITS)
    q = _rule_order(dps)
    V = _contour_window(spec, a_t, y, y, dps)
    lo, hi = y - V, y + V
    k_exp = _contour_k(spec, a_t, (x, x), a_f, max(abs(lo), abs(hi)))
    with mp.workdps(dps):
        s = mp.mpc(s)
        coarse, _, _ = _contour_sum(spec, a_t, s, a, k_exp, lo, hi, q, dps, engine)
        fine, size, node_err = _contour_sum(spec, a_t, s, a, k_exp + 1, lo, hi, q, dps, engine)
        floor = float(size) * 10.0 ** (-dps + 2)
        tail = float(size) * 10.0 ** (-dps)
        err = float(abs(fine - coarse)) + floor + tail + float(node_err)
        if float(abs(fine)) < floor * 10**MIN_SIGNIFICANT:
            raise PrecisionError("contour route: cancellation exhausted the working precision")
        if plan is not None:
            plan.append(QuadraturePlan(a_f, V, 2 * len(_panels(lo, hi, k_exp + 1)), float("nan"), 2.0 ** (-k_exp - 1)))
        with mp.workdps(prec.working_digits + GUARD_DIGITS):
            return checked(+fine, err, prec, "xi_t (contour)")


def saddle_abscissa(x: float) -> str:
    """Contour line through (a quarter-grid point next to) Re s."""
    return str(round(4 * float(x)) / 4)


def xi_t(spec: LFunctionSpec, t, s, prec: PrecisionConfig = DEFAULT_PRECISION, route: str = "auto") -> ValueWithError:
    """xi_t(s) by the requested route.

    ``auto`` uses the Fourier integral for |Re s - 1/2| <= 3 when its
    expected loss fits the working digits, and otherwise the contour
    integral on the line through Re s.
    """
    if route == "fourier":
        return xi_t_fourier(spec, t, s, prec)
    if route == "contour":
        return xi_t_contour(spec, t, s, prec)
    if route != "auto":
        raise ValueError(f"unknown route {route!r}")
    s_c = complex(s)
    loss = _decay_rate(spec) * abs(s_c.imag) * LOG10E
    if abs(s_c.real - 0.5) <= 3 and loss <= prec.working_digits / 2:
        return xi_t_fourier(spec, t, s, prec)
    return xi_t_contour(spec, t, s, prec, abscissa=saddle_abscissa(s_c.real))


# -- B_{t,n} -----------------------------------------------------------------------------

def b_tn(spec: LFunctionSpec, t, n: int, s, prec: PrecisionConfig = DEFAULT_PRECISION) -> ValueWithError:
    """B_{t,n}(s) = (pi|t|)^{-1/2} int gamma(z) exp((J_t(s) - z)^2/|t|) n^{-z} |dz|.

    The line is Re z = Re J_t(s) + (|t|/2) log n, where the Gaussian times
    n^{-z} has no oscillation, so only the phase of gamma varies.
    """
    a_t = check_t(t, T_CAP)
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    dps = prec.working_digits + GUARD_DIGITS
    q = _rule_order(dps)
    with mp.workdps(dps):
        s = mp.mpc(s)
        if mp.im(s) < Y_MIN:
            raise PoleProximityError(f"Im s = {mp.nstr(mp.im(s), 5)} below {Y_MIN}")
        J = j_map(spec, t, s)
        ln = mp.log(n)
        c = mp.re(J) + a_t / 2 * ln
        # poles of gamma between Re z = 2 and the shifted line
        lgt, _ = log_gamma_t(spec, t, s)
        ref = mp.re(lgt) - a_t / 4 * ln * ln - mp.re(s) * ln
        for p in spec.gamma.gamma_poles(re_min=float(c) - 1):
            if min(float(c), 2.0) < p.real < max(float(c), 2.0):
                d = J - p
                w = mp.re(d * d) / a_t - p.real * ln
                if w - ref > -(dps + 2) * math.log(10):
                    raise PoleCrossingError(f"shift to Re z = {mp.nstr(c, 5)} crosses a pole at {p}")
        yJ = float(mp.im(J))
        V = _contour_window(spec, a_t, yJ, yJ, dps)
        k_exp = _snap(min((math.pi / 4) / _phase_rate(spec, abs(yJ) + V), math.sqrt(a_t) / 2))
        nodes, weights = gauss_legendre(q, dps)

        def level(k):
            h = mp.ldexp(mp.mpf(1), -k)
            total = mp.mpc(0)
            size = mp.mpf(0)
            err = 0.0
            for idx in _panels(yJ - V, yJ + V, k):
                mid = (idx + mp.mpf(0.5)) * h
                for x, w in zip(nodes, weights):
                    z = mp.mpc(c, mid + h / 2 * x)
                    lg, lerr = log_gamma_factor(spec, z)
                    d = J - z
                    term = w * mp.exp(lg + d * d / a_t - z * ln)
                    total += term
                    size += abs(term)
                    err += float(abs(term)) * lerr
            scale = h / 2 / mp.sqrt(mp.pi * a_t)
            return total * scale, size * scale, err * float(scale)

        coarse, _, _ = level(k_exp)
        fine, size, nerr = level(k_exp + 1)
        err = float(abs(fine - coarse)) + float(size) * 10.0 ** (-dps + 2) + nerr
        return checked(fine, err, prec, "B_{t,n}")


# -- the J_t comparison ------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    """|xi_t(J_t(s))/gamma_t(s) - F_t(s)| with its ingredients."""

    residual: float
    err: float
    ratio: complex
    f_t: complex
    route: str


def theorem4_detail(spec: LFunctionSpec, t, s, prec: PrecisionConfig = DEFAULT_PRECISION, route: str = "auto") -> ResidualReport:
    a_t = check_t(t, T_CAP)
    s_c = complex(s)
    if s_c.imag < Y_MIN:
        raise PoleProximityError(f"Im s = {s_c.imag} below {Y_MIN}")
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        S = j_map(spec, t, mp.mpc(s))
        if route == "auto":
            route = "contour"
        if route == "contour":
            xi = xi_t_contour(spec, t, S, prec, abscissa=saddle_abscissa(float(mp.re(S))))
        else:
            xi = xi_t(spec, t, S, prec, route=route)
        lg, lerr = log_gamma_t(spec, t, mp.mpc(s))
        inv = mp.exp(-lg)
        ratio = xi.value * inv
        ft = f_t_eval(spec, t, s, prec)
        res = abs(ratio - ft.value)
        err = xi.err * float(abs(inv)) + float(abs(ratio)) * lerr + ft.err
        return ResidualReport(float(res), float(err), complex(ratio), complex(ft.value), route)


def theorem4_residual(spec: LFunctionSpec, t, s, prec: PrecisionConfig = DEFAULT_PRECISION, route: str = "auto") -> float:
    """|xi_t(J_t(s)) / gamma_t(s) - F_t(s)|.

    ``auto`` integrates on the vertical line through Re J_t(s), which loses
    no digits to cancellation at any height.
    """
    return theorem4_detail(spec, t, s, prec, route).residual


# -- batch evaluation of h = xi_t(J_t(s)) / gamma_t(s) ----------------------------------

class RatioEvaluator:
    """Vectorised h(s) = xi_t(J_t(s)) / gamma_t(s) over a rectangle of s.

    Node values xi^F(a + iv) are computed once at ``node_digits`` with
    mpmath and cached; sums for any number of points then run in double
    precision.  Two refinement levels are kept so each value carries an
    error estimate.
    """

    def __init__(self, spec: LFunctionSpec, t, x_range, y_range, node_digits: int = 20, abscissa: str | None = None):
        self.spec = spec
        self.t = float(t)
        self.a_t = check_t(t, T_CAP)
        x0, x1 = (float(v) for v in x_range)
        y0, y1 = (float(v) for v in y_range)
        if y0 < Y_MIN:
            raise PoleProximityError(f"Im s = {y0} below {Y_MIN}")
        corners = np.array([complex(x, y) for x in (x0, x1) for y in (y0, y1)])
        edge = np.concatenate([x0 + 1j * np.linspace(y0, y1, 64), x1 + 1j * np.linspace(y0, y1, 64), corners])
        S = j_map_np(spec, t, edge)
        re_lo, re_hi = float(S.real.min()), float(S.real.max())
        im_lo, im_hi = float(S.imag.min()), float(S.imag.max())
        self.abscissa = abscissa or saddle_abscissa((re_lo + re_hi) / 2)
        a = float(self.abscissa)
        head = max((re_lo - a) ** 2, (re_hi - a) ** 2) / self.a_t * LOG10E
        if head > 10:
            raise PrecisionError("rectangle too wide for one contour line")
        dps = int(node_digits)
        V = _contour_window(spec, self.a_t, im_lo, im_hi, 16 + head)
        self.window = V
        lo, hi = im_lo - V, im_hi + V
        self.k_exp = _contour_k(spec, self.a_t, (re_lo, re_hi), a, max(abs(lo), abs(hi)))
        q = _rule_order(dps)
        self.levels = []
        with mp.workdps(dps):
            for k in (self.k_exp, self.k_exp + 1):
                nodes, weights = gauss_legendre(q, dps)
                xs = np.array([float(x) for x in nodes])
                ws = np.array([float(w) for w in weights])
                h = 2.0 ** -k
                V_list, W_list, L_list, E_list = [], [], [], []
                for idx in _panels(lo, hi, k):
                    vals = _xi_panel(spec, self.abscissa, k, idx, q, dps)
                    mid = (idx + 0.5) * h
                    for xq, wq, (xi, xerr) in zip(xs, ws, vals):
                        V_list.append(mid + h / 2 * xq)
                        W_list.append(wq * h / 2)
                        L_list.append(complex(mp.log(xi)))
                        E_list.append(float(xerr / abs(xi)) if xi != 0 else 0.0)
                self.levels.append((np.array(V_list), np.array(W_list), np.array(L_list), np.array(E_list)))
        self.norm = 1 / math.sqrt(math.pi * self.a_t)
        self.bounds = (x0, x1, y0, y1)

    def _level_sum(self, S, lg, level):
        V, W, L, E = level
        out = np.zeros(S.shape, dtype=complex)
        size = np.zeros(S.shape)
        nerr = np.zeros(S.shape)
        w0 = complex(float(self.abscissa), 0)
        order = np.argsort(S.imag, kind="stable")
        chunk = 256
        for i in range(0, len(S), chunk):
            idx = order[i:i + chunk]
            Sc = S[idx]
            # nodes outside the Gaussian window contribute below double rounding
            lo = np.searchsorted(V, Sc.imag.min() - self.window)
            hi = np.searchsorted(V, Sc.imag.max() + self.window)
            v, w, lv, ev = V[lo:hi], W[lo:hi], L[lo:hi], E[lo:hi]
            d = Sc[:, None] - w0 - 1j * v[None, :]
            lgc = lg[idx, None]
            expo = lv[None, :] + d * d / self.a_t - lgc
            terms = w[None, :] * np.exp(expo)
            out[idx] = terms.sum(1)
            mag = np.abs(terms)
            size[idx] = mag.sum(1)
            # node error plus double rounding of the exponent argument
            rel = ev[None, :] + 4e-16 * (np.abs(lv)[None, :] + np.abs(d * d) / self.a_t + np.abs(lgc))
            nerr[idx] = (mag * rel).sum(1)
        return out * self.norm, size * self.norm, nerr * self.norm

    def __call__(self, s, with_err: bool = False):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        S = j_map_np(self.spec, self.t, s)
        lg = log_gamma_t_np(self.spec, self.t, s)
        coarse, _, _ = self._level_sum(S, lg, self.levels[0])
        fine, size, nerr = self._level_sum(S, lg, self.levels[1])
        if with_err:
            return fine, np.abs(fine - coarse) + size * 4e-16 + nerr
        return fine

    def residual(self, s):
        """|h(s) - F_t(s)| in double precision."""
        return np.abs(self(s) - ft_np(self.spec, self.t, s))
