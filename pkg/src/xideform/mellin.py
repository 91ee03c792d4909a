"""Inverse Mellin transforms of the gamma kernel and the Fourier-side function Phi_F.

With Psi(w) = w^m (w-1)^m prod_j Gamma(omega_j w + mu_j) the kernel
psi is its inverse Mellin transform, and

    Phi_F(u) = 2 alpha e^u sum_n a_n psi(n e^{2u} / Q).

For a single Gamma factor, psi has a closed form: multiplying Gamma(a w + b)
by w is the same as taking (1/a) Gamma(a w + b + 1) - (b/a) Gamma(a w + b),
and Gamma(a w + b) is the Mellin transform of (1/a) v^{b/a} exp(-v^{1/a}).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from mpmath import mp
import numpy as np
from scipy.special import loggamma as scipy_loggamma

from .errors import ModeError, PrecisionError
from .precision import DEFAULT_PRECISION, PrecisionConfig, ValueWithError, checked
from .selberg import GUARD_DIGITS, GammaData, LFunctionSpec, as_mp
from .special import gauss_legendre, gl_order

CLOSED_FORM = "ClosedForm"
QUADRATURE = "Quadrature"


@dataclass(frozen=True)
class MellinKernel:
    """Psi(w) = w^m (w-1)^m prod Gamma(omega_j w + mu_j) and how to invert it."""

    gamma: GammaData
    mode: str = ""

    def __post_init__(self):
        k = len(self.gamma.factors)
        mode = self.mode or (CLOSED_FORM if k == 1 else QUADRATURE)
        if mode == CLOSED_FORM and k != 1:
            raise ModeError("closed form needs exactly one Gamma factor")
        if mode not in (CLOSED_FORM, QUADRATURE):
            raise ValueError(f"unknown kernel mode {mode!r}")
        object.__setattr__(self, "mode", mode)

    @classmethod
    def of(cls, spec: LFunctionSpec, mode: str = "") -> "MellinKernel":
        return cls(spec.gamma, mode)

    @classmethod
    def simple(cls, factors, m: int = 0, mode: str = "") -> "MellinKernel":
        """Kernel from bare (omega, mu) pairs, e.g. ``[(1, 0)]`` for Gamma(w)."""
        return cls(GammaData(1, 1, m, tuple(factors)), mode)

    def abscissa(self):
        """Integration line right of every pole of Psi."""
        c = mp.mpf(2)
        for w, mu in zip(self.gamma.omegas(), self.gamma.mus()):
            c = max(c, 1 + (1 - mp.re(mu)) / w)
        return c

    def log_psi_transform(self, w):
        """log Psi(w), using the library log-gamma (quadrature hot path)."""
        m = self.gamma.pole_order_m
        total = mp.mpc(0)
        if m:
            total += m * (mp.log(w) + mp.log(w - 1))
        for om, mu in zip(self.gamma.omegas(), self.gamma.mus()):
            total += mp.loggamma(om * w + mu)
        return total


@lru_cache(maxsize=None)
def _closed_terms(kernel: MellinKernel, prec_bits: int):
    """Coefficients c_j with w^m (w-1)^m Gamma(a w + b) = sum_j c_j Gamma(a w + b + j)."""
    with mp.workprec(prec_bits):
        (a, b), = zip(kernel.gamma.omegas(), kernel.gamma.mus())
        coeffs = [mp.mpc(1)]

        def times_w(cs):
            out = [mp.mpc(0)] * (len(cs) + 1)
            for j, c in enumerate(cs):
                out[j + 1] += c / a
                out[j] -= c * (b + j) / a
            return out

        for _ in range(kernel.gamma.pole_order_m):
            coeffs = times_w(coeffs)
        for _ in range(kernel.gamma.pole_order_m):
            shifted = times_w(coeffs)
            coeffs = [shifted[j] - (coeffs[j] if j < len(coeffs) else 0) for j in range(len(shifted))]
        return a, b, tuple(coeffs)


def psi_closed(kernel: MellinKernel, v):
    """psi(v) from the exact single-factor formula."""
    if kernel.mode != CLOSED_FORM or len(kernel.gamma.factors) != 1:
        raise ModeError("closed form needs a single Gamma factor")
    v = mp.mpf(v)
    if not v > 0:
        raise ValueError("psi is defined for v > 0")
    a, b, coeffs = _closed_terms(kernel, mp.prec)
    lv = mp.log(v)
    expo = mp.exp(-mp.exp(lv / a))
    total = mp.mpc(0)
    for j, c in enumerate(coeffs):
        if c:
            total += c / a * mp.exp((b + j) / a * lv)
    val = total * expo
    return mp.re(val) if mp.im(val) == 0 else val


def psi_bound(kernel: MellinKernel, v):
    """Cheap upper bound for |psi(v)| on closed-form kernels."""
    a, b, coeffs = _closed_terms(kernel, mp.prec)
    v = mp.mpf(v)
    lv = mp.log(v)
    s = mp.fsum(abs(c) / a * mp.exp(mp.re(b + j) / a * lv) for j, c in enumerate(coeffs))
    return s * mp.exp(-mp.exp(lv / a))


def _panel_sum(f, lo, hi, n_panels, q):
    """Composite q-point Gauss-Legendre rule on [lo, hi] with equal panels."""
    nodes, weights = gauss_legendre(q, mp.dps)
    h = (hi - lo) / n_panels
    total = mp.mpc(0)
    size = mp.mpf(0)
    half = h / 2
    for k in range(n_panels):
        mid = lo + (k + mp.mpf(0.5)) * h
        for x, w in zip(nodes, weights):
            val = w * f(mid + half * x)
            total += val
            size += abs(val)
    return total * half, size * half


def gl_grid(lo: float, hi: float, n_panels: int, q: int):
    """Float nodes and weights of the composite rule, for vectorised sums."""
    x, w = np.polynomial.legendre.leggauss(q)
    h = (hi - lo) / n_panels
    mids = lo + (np.arange(n_panels) + 0.5) * h
    nodes = (mids[:, None] + 0.5 * h * x[None, :]).ravel()
    weights = np.tile(0.5 * h * w, n_panels)
    return nodes, weights


def _psi_plan(kernel: MellinKernel, v: float, target: float):
    """Abscissa, cut height, panel count and tail bound for psi_quad."""
    g = kernel.gamma
    c = float(kernel.abscissa())
    omegas = [float(w) for w in g.omegas()]
    mus = [complex(mu) for mu in g.mus()]
    kappa = math.pi / 2 * sum(omegas)
    power = 2 * g.pole_order_m + sum(om * c + mu.real - 0.5 for om, mu in zip(omegas, mus))
    scale = v ** (-c) / (2 * math.pi)

    def mag(y):
        w = complex(c, y)
        lp = g.pole_order_m * (np.log(w) + np.log(w - 1))
        lp += sum(scipy_loggamma(om * w + mu) for om, mu in zip(omegas, mus))
        return math.exp(lp.real)

    Y = 8.0
    while True:
        slope = kappa - max(power, 0.0) / Y
        if slope > 0.1 * kappa:
            tail = (mag(Y) + mag(-Y)) / slope * scale
            if tail < target / 3:
                break
        Y *= 1.25
        if Y > 1e5:
            raise PrecisionError("psi_quad: tail bound never drops below target")
    Y = float(math.ceil(Y))
    # phase of Psi(c+iy) v^{-iy} changes at most this fast on [-Y, Y]
    rate = abs(math.log(v)) + sum(om * abs(math.log(om * Y + abs(mu) + 1.0)) for om, mu in zip(omegas, mus))
    rate += 2 * g.pole_order_m / c + 0.5
    n_panels = max(4, math.ceil(Y * rate / (math.pi / 4)))
    return c, Y, n_panels, tail


def psi_quad(kernel: MellinKernel, v, prec: PrecisionConfig = DEFAULT_PRECISION) -> ValueWithError:
    """psi(v) by Gauss-Legendre panels along Re w = c.

    The vertical range is cut where the Gamma decay bound makes the tails
    smaller than a third of the target.  Panels are sized so that the phase
    moves by at most pi/4 across each; the panel error is the difference
    from a rule with half as many panels.  With 15 working digits the sum
    runs in double precision.
    """
    v_f = float(v)
    if not v_f > 0:
        raise ValueError("psi is defined for v > 0")
    c, Y, n_panels, tail = _psi_plan(kernel, v_f, prec.target_abs_err)
    g = kernel.gamma
    symmetric = all(mp.im(mu) == 0 for mu in g.mus())
    lo = 0.0 if symmetric else -Y
    if prec.fast:
        omegas = [float(w) for w in g.omegas()]
        mus = [complex(mu) for mu in g.mus()]
        lv = math.log(v_f)

        def rule(n):
            y, w = gl_grid(lo, Y, n, 10)
            z = c + 1j * y
            lp = g.pole_order_m * (np.log(z) + np.log(z - 1)) - z * lv
            for om, mu in zip(omegas, mus):
                lp = lp + scipy_loggamma(om * z + mu)
            vals = w * np.exp(lp)
            return vals.sum(), np.abs(vals).sum()

        fine, size = rule(n_panels)
        coarse, _ = rule(max(1, n_panels // 2))
        if symmetric:
            fine, coarse, size = 2 * fine.real, 2 * coarse.real, 2 * size
        val = fine / (2 * math.pi)
        err = abs(fine - coarse) / (2 * math.pi) + tail + size / (2 * math.pi) * 1e-15
        return checked(val, err, prec, "psi(v)")
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        v = mp.mpf(v)
        lv = mp.log(v)
        cm = mp.mpf(c)
        q = gl_order(prec.working_digits)

        def integrand(y):
            w = mp.mpc(cm, y)
            return mp.exp(kernel.log_psi_transform(w) - w * lv)

        fine, size = _panel_sum(integrand, mp.mpf(lo), mp.mpf(Y), n_panels, q)
        coarse, _ = _panel_sum(integrand, mp.mpf(lo), mp.mpf(Y), max(1, n_panels // 2), q)
        if symmetric:
            coarse, fine, size = 2 * mp.re(coarse), 2 * mp.re(fine), 2 * size
        val = fine / (2 * mp.pi)
        err = float(abs(fine - coarse)) / (2 * math.pi) + tail
        err += float(size) / (2 * math.pi) * 10.0 ** (-mp.dps + 2)
        return checked(val, err, prec, "psi(v)")


def phi_zeta(u, prec: PrecisionConfig = DEFAULT_PRECISION, use_evenness: bool = False) -> ValueWithError:
    """Phi(u) = 4 sum_n (2 pi^2 n^4 e^{9u} - 3 pi n^2 e^{5u}) exp(-pi n^2 e^{4u}).

    For u < -2 the number of terms grows like e^{-2u}; such arguments are
    refused unless ``use_evenness`` is set, in which case Phi(-u) is used.
    """
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        u = mp.mpf(u)
        if u < 0 and use_evenness:
            u = -u
        if u < -2:
            raise PrecisionError("phi_zeta refuses u < -2 without use_evenness")
        e4 = mp.exp(4 * u)
        e5 = mp.exp(5 * u)
        e9 = mp.exp(9 * u)
        pi = mp.pi
        total = mp.mpf(0)
        size = mp.mpf(0)
        budget = mp.mpf(prec.target_abs_err) * mp.mpf(10) ** -4
        n = 0
        prev_bound = None
        while True:
            n += 1
            if n > prec.max_terms:
                raise PrecisionError("phi_zeta: term count exceeds max_terms")
            g = mp.exp(-pi * n * n * e4)
            term = (2 * pi**2 * n**4 * e9 - 3 * pi * n**2 * e5) * g
            total += term
            size += abs(term)
            bound = (2 * pi**2 * (n + 1) ** 4 * e9 + 3 * pi * (n + 1) ** 2 * e5) * mp.exp(-pi * (n + 1) ** 2 * e4)
            if prev_bound is not None and bound < prev_bound and bound < budget:
                nxt = (2 * pi**2 * (n + 2) ** 4 * e9 + 3 * pi * (n + 2) ** 2 * e5) * mp.exp(-pi * (n + 2) ** 2 * e4)
                r = nxt / bound
                if r < 1:
                    tail = 4 * bound / (1 - r)
                    err = float(tail) + 4 * float(size) * 10.0 ** (-mp.dps + 1)
                    return checked(4 * total, err, prec, "Phi(u)")
            prev_bound = bound


def phi_F(spec: LFunctionSpec, u, prec: PrecisionConfig = DEFAULT_PRECISION) -> ValueWithError:
    """Phi_F(u) = 2 alpha e^u sum_n a_n psi(n e^{2u}/Q)."""
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        val, err = _phi_F_raw(spec, mp.mpf(u), prec)
        return checked(val, err, prec, "Phi_F(u)")


def _phi_F_raw(spec: LFunctionSpec, u, prec: PrecisionConfig):
    kernel = MellinKernel.of(spec)
    g = spec.gamma
    alpha = as_mp(g.alpha)
    Q = as_mp(g.bigQ)
    pref = 2 * alpha * mp.exp(u)
    base = mp.exp(2 * u) / Q
    c = spec.coeffs.bound_const
    budget = prec.target_abs_err / 3 / max(float(abs(pref)), 1e-300)
    closed = kernel.mode == CLOSED_FORM
    total = mp.mpc(0)
    size = mp.mpf(0)
    psi_err = 0.0
    decreasing = 0
    prev = None
    n = 0
    while True:
        n += 1
        if n > prec.max_terms:
            raise PrecisionError("Phi_F: term count exceeds max_terms")
        v = n * base
        if closed:
            psi = psi_closed(kernel, v)
            bound = psi_bound(kernel, v)
        else:
            pq = psi_quad(kernel, v, prec)
            psi, bound = pq.value, abs(pq.value) + pq.err
            psi_err += pq.err * float(abs(spec.coeffs.value(n)))
        a = spec.coeffs.value(n)
        if a:
            term = a * psi
            total += term
            size += abs(term)
        weighted = bound * c * n * n
        decreasing = decreasing + 1 if prev is not None and weighted < prev else 0
        prev = weighted
        if decreasing >= 3 and weighted < budget:
            break
    val = pref * total
    if mp.im(alpha) == 0 and all(mp.im(mu) == 0 for mu in g.mus()) and _real_coeffs(spec):
        val = mp.re(val)
    err = float(abs(pref)) * (float(weighted) * 2 + psi_err + float(size) * 10.0 ** (-mp.dps + 1))
    return val, err


def _real_coeffs(spec: LFunctionSpec) -> bool:
    rule = spec.coeffs
    if rule.variant == "AllOnes":
        return True
    return all(mp.im(as_mp(v)) == 0 for v in rule.values)


def fitted_decay_exponent(kernel: MellinKernel, v_values) -> float:
    """Least-squares delta in log(-log|psi(v)|) ~ delta log v.

    An empirical stand-in for the existence statement |psi(v)| << e^{-v^delta}.
    """
    xs, ys = [], []
    for v in v_values:
        p = abs(psi_closed(kernel, v))
        if p > 0 and p < 1:
            xs.append(math.log(float(v)))
            ys.append(math.log(-float(mp.log(p))))
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
