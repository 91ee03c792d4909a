"""Deformation objects: gamma, J_t, gamma_t, the damped series F_t and its majorant.

For t < 0,

    F_t(s)   = sum_n exp(-|t| log^2 n / 4) a_n n^{-s},
    J_t(s)   = s + (|t|/2) log Q + (|t|/2) sum_i omega_i Log(omega_i s),
    gamma_t  = gamma(s) exp((s - J_t(s))^2 / |t|).

F_t converges everywhere but slowly to the left: at Re s = -0.3 about 10^9
terms are needed for 30 digits.  The evaluators therefore sum a short head
and add the rest with Euler-Maclaurin, applied to each residue class of a
periodic coefficient rule; the integral term has a closed form in erfcx.
Everything exists twice: an mpmath version for the scalar API and a numpy
version for the zero searches, which need many thousands of values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import factorial

from mpmath import mp
import numpy as np
from scipy.special import bernoulli as _scipy_bernoulli
from scipy.special import erfcx as _np_erfcx
from scipy.special import loggamma as _np_loggamma

from .errors import DomainError, PoleError, PrecisionError
from .precision import DEFAULT_PRECISION, PrecisionConfig, ValueWithError, checked
from .selberg import EXPLICIT, GUARD_DIGITS, LFunctionSpec, as_mp, log_gamma_factor
from .special import bernoulli, log_int

T_CAP = 4.0
SECTOR_EPS = 1e-3
EM_TAIL_TERMS = 10
_B_FLOAT = [float(b) for b in _scipy_bernoulli(2 * EM_TAIL_TERMS + 4)]


@dataclass(frozen=True)
class DeformParams:
    """Deformation time t (negative) and the cap on |t|."""

    t: float
    cap: float = T_CAP

    def __post_init__(self):
        check_t(self.t, cap=self.cap)


def check_t(t, cap: float | None = None) -> float:
    """Validate t < 0 (and |t| <= cap when given); return |t| as float."""
    t = float(t)
    if t == 0:
        raise DomainError("t = 0: the 1/|t| formulas are undefined")
    if t > 0:
        raise DomainError("this machinery needs t < 0")
    if cap is not None and -t > cap:
        raise DomainError(f"|t| = {-t} exceeds the cap {cap}")
    return -t


# -- gamma, J_t, gamma_t -------------------------------------------------------

def gamma_factor(spec: LFunctionSpec, s, prec: PrecisionConfig = DEFAULT_PRECISION, route: str = "shifted") -> ValueWithError:
    """gamma(s), accumulated in log space and exponentiated once.

    ``route`` picks the log-gamma evaluation ("shifted" or "direct"), so
    the two can be compared.
    """
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        s = mp.mpc(s)
        m = spec.gamma.pole_order_m
        if m and s == 1:
            # (s-1)^m vanishes; Gamma factors are regular at s = 1 when Re mu >= 0
            return checked(mp.mpc(0), 0.0, prec, "gamma(s)")
        lg, lerr = log_gamma_factor(spec, s, route=route)
        val = mp.exp(lg)
        return checked(val, float(abs(val)) * lerr, prec, "gamma(s)")


def j_map(spec: LFunctionSpec, t, s):
    """J_t(s) with principal logarithms; t = 0 gives the identity."""
    t = float(t)
    if t > 0:
        raise DomainError("J_t is defined for t <= 0")
    s = mp.mpc(s)
    if t == 0:
        return s
    if s == 0:
        raise DomainError("J_t is undefined at s = 0")
    if mp.re(s) < 0 and abs(mp.arg(s)) > mp.pi - SECTOR_EPS:
        raise DomainError("s is within the sector margin of the negative real axis")
    half = mp.mpf(-t) / 2
    g = spec.gamma
    out = s + half * mp.log(as_mp(g.bigQ))
    for w in g.omegas():
        out += half * w * mp.log(w * s)
    return out


def log_gamma_t(spec: LFunctionSpec, t, s):
    """log gamma_t(s) at the current precision, with an error estimate."""
    a = check_t(t)
    s = mp.mpc(s)
    lg, err = log_gamma_factor(spec, s)
    d = s - j_map(spec, t, s)
    return lg + d * d / a, err


def gamma_t(spec: LFunctionSpec, t, s, prec: PrecisionConfig = DEFAULT_PRECISION) -> ValueWithError:
    """gamma_t(s) = gamma(s) exp((s - J_t(s))^2 / |t|)."""
    check_t(t)
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        lg, err = log_gamma_t(spec, t, s)
        val = mp.exp(lg)
        return checked(val, float(abs(val)) * err, prec, "gamma_t(s)")


# -- numpy versions -------------------------------------------------------------

def _gamma_floats(spec: LFunctionSpec):
    g = spec.gamma
    with mp.workdps(20):
        return (
            complex(mp.log(as_mp(g.alpha))),
            float(mp.log(as_mp(g.bigQ))),
            g.pole_order_m,
            [(float(w), complex(mu)) for w, mu in zip(g.omegas(), g.mus())],
        )


def j_map_np(spec: LFunctionSpec, t: float, s):
    """Vectorised J_t(s)."""
    s = np.asarray(s, dtype=complex)
    half = -float(t) / 2
    _, logq, _, factors = _gamma_floats(spec)
    out = s + half * logq
    for w, _ in factors:
        out = out + half * w * np.log(w * s)
    return out


def log_gamma_np(spec: LFunctionSpec, s):
    """Vectorised log gamma(s)."""
    s = np.asarray(s, dtype=complex)
    loga, logq, m, factors = _gamma_floats(spec)
    out = loga + s * logq
    if m:
        out = out + m * (np.log(s) + np.log(s - 1))
    for w, mu in factors:
        out = out + _np_loggamma(w * s + mu)
    return out


def log_gamma_t_np(spec: LFunctionSpec, t: float, s):
    s = np.asarray(s, dtype=complex)
    d = s - j_map_np(spec, t, s)
    return log_gamma_np(spec, s) + d * d / (-float(t))


# -- F_t ------------------------------------------------------------------------

def _classes(spec: LFunctionSpec, absolute: bool):
    """Period q and per-class coefficients (a_1..a_q), or None for finite lists."""
    rule = spec.coeffs
    if rule.variant == EXPLICIT:
        return None
    vals = rule.periodic_values()
    if absolute:
        vals = [abs(v) for v in vals]
    return len(vals), vals


def f_t_truncation(spec: LFunctionSpec, t, x: float, target: float) -> int:
    """Smallest N where exp(-|t| log^2 n / 4) c n^{2-x} is decreasing and below target/2."""
    a = check_t(t) / 4
    c = spec.coeffs.bound_const
    p = 2 - float(x)
    # log b(n) = -a L^2 + p L + log c: decreasing for L > p / (2a), small past the root
    rhs = math.log(c) - math.log(target / 2)
    root = (p + math.sqrt(p * p + 4 * a * rhs)) / (2 * a) if p * p + 4 * a * rhs > 0 else 0.0
    L = max(root, p / (2 * a), 0.0)
    n = max(1, math.ceil(math.exp(L)))
    while True:
        ln = math.log(n)
        ok_dec = ln >= p / (2 * a) or n == 1
        if ok_dec and -a * ln * ln + p * ln + math.log(c) < math.log(target / 2):
            return n
        n += 1


def _series_exp(c, K):
    """Taylor coefficients of exp(sum_{k>=1} c_k h^k) up to h^K."""
    out = [c[0] * 0 + 1]
    for k in range(1, K + 1):
        acc = c[0] * 0
        for j in range(1, k + 1):
            acc = acc + j * c[j] * out[k - j]
        out.append(acc / k)
    return out


def _tail_mp(s, a, x0, q):
    """Euler-Maclaurin tail sum_{k>=0} g(x0 + q k), g(x) = exp(-a log^2 x - s log x).

    Returns (value, error estimate) at the current mpmath precision.
    """
    p = EM_TAIL_TERMS
    K = 2 * p + 2
    L0 = log_int(x0)
    x0 = mp.mpf(x0)
    l = [mp.mpf(0)] + [(-1) ** (k + 1) / (k * x0**k) for k in range(1, K + 1)]
    l2 = [mp.fsum(l[i] * l[k - i] for i in range(k + 1)) for k in range(K + 1)]
    c = [-a * (2 * L0 * l[k] + l2[k]) - s * l[k] for k in range(K + 1)]
    e = _series_exp(c, K)
    g0 = mp.exp(-a * L0 * L0 - s * L0)
    b = 1 - s
    sa = mp.sqrt(a)
    z = sa * L0 - b / (2 * sa)
    integral = mp.sqrt(mp.pi) / (2 * sa) * mp.exp(-a * L0 * L0 + b * L0 + z * z) * mp.erfc(z) / q
    total = integral + g0 / 2
    last = mp.mpf(0)
    for j in range(1, p + 2):
        d = mp.mpf(q) ** (2 * j - 1) * mp.factorial(2 * j - 1) * e[2 * j - 1] * g0
        term = bernoulli(2 * j) / mp.factorial(2 * j) * d
        if j <= p:
            total -= term
        last = abs(term)
    return total, float(2 * last)


def _tail_np(s, a, x0, q):
    """numpy version of :func:`_tail_mp` for an array of s."""
    p = EM_TAIL_TERMS
    K = 2 * p + 2
    s = np.asarray(s, dtype=complex)
    L0 = math.log(x0)
    l = [0.0] + [(-1) ** (k + 1) / (k * x0**k) for k in range(1, K + 1)]
    l2 = [sum(l[i] * l[k - i] for i in range(k + 1)) for k in range(K + 1)]
    c = [-a * (2 * L0 * l[k] + l2[k]) - s * l[k] for k in range(K + 1)]
    e = _series_exp(c, K)
    g0 = np.exp(-a * L0 * L0 - s * L0)
    b = 1 - s
    sa = math.sqrt(a)
    z = sa * L0 - b / (2 * sa)
    integral = math.sqrt(math.pi) / (2 * sa) * np.exp(-a * L0 * L0 + b * L0) * _np_erfcx(z) / q
    total = integral + g0 / 2
    last = np.zeros(s.shape)
    for j in range(1, p + 2):
        d = q ** (2 * j - 1) * factorial(2 * j - 1) * e[2 * j - 1] * g0
        term = _B_FLOAT[2 * j] / factorial(2 * j) * d
        if j <= p:
            total = total - term
        last = np.abs(term)
    return total, 2 * last


def _head_cut(s_abs: float, q: int) -> int:
    """Number of full periods summed directly before the Euler-Maclaurin tail."""
    return max(4, math.ceil((2 * s_abs + 40) / q))


def _ft_mp(spec: LFunctionSpec, a, s, prec: PrecisionConfig, absolute: bool):
    classes = _classes(spec, absolute)
    x = float(mp.re(s))
    if classes is None:
        vals = [as_mp(v) for v in spec.coeffs.values]
        total = mp.mpc(0)
        size = mp.mpf(0)
        for n, c in enumerate(vals, start=1):
            if c:
                if absolute:
                    c = abs(c)
                ln = log_int(n)
                term = c * mp.exp(-a * ln * ln - s * ln)
                total += term
                size += abs(term)
        return total, float(size) * 10.0 ** (-mp.dps + 1)
    q, vals = classes
    n_direct = f_t_truncation(spec, -4 * a, x, prec.target_abs_err)
    K0 = _head_cut(float(abs(s)), q)
    if n_direct <= q * K0:
        K0 = math.ceil(n_direct / q)
        use_tail = False
    else:
        use_tail = True
    if q * K0 > prec.max_terms:
        raise PrecisionError("F_t head exceeds max_terms")
    total = mp.mpc(0)
    size = mp.mpf(0)
    for n in range(1, q * K0 + 1):
        c = vals[(n - 1) % q]
        if c:
            ln = log_int(n)
            term = c * mp.exp(-a * ln * ln - s * ln)
            total += term
            size += abs(term)
    err = 0.0
    if use_tail:
        for r in range(1, q + 1):
            c = vals[r - 1]
            if c:
                tail, terr = _tail_mp(s, a, q * K0 + r, q)
                total += c * tail
                err += float(abs(c)) * terr
    else:
        nb = q * K0 + 1
        lb = math.log(nb)
        err = spec.coeffs.bound_const * math.exp(-a * lb * lb + (2 - x) * lb)
    err += float(size) * 10.0 ** (-mp.dps + 1)
    return total, err


def ft_np(spec: LFunctionSpec, t: float, s, absolute: bool = False, with_err: bool = False):
    """Vectorised F_t(s) in double precision (head + Euler-Maclaurin tail)."""
    a = -float(t) / 4
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    classes = _classes(spec, absolute)
    if classes is None:
        vals = np.array([complex(as_mp(v)) for v in spec.coeffs.values])
        if absolute:
            vals = np.abs(vals)
        L = np.log(np.arange(1, len(vals) + 1))
        w = vals * np.exp(-a * L * L)
        out = np.exp(-np.outer(s, L)) @ w
        return (out, np.abs(out) * 1e-15) if with_err else out
    q, vals = classes
    vals = np.array([complex(v) for v in vals])
    K0 = _head_cut(float(np.max(np.abs(s))) if s.size else 0.0, q)
    n = np.arange(1, q * K0 + 1)
    coef = vals[(n - 1) % q]
    keep = coef != 0
    n, coef = n[keep], coef[keep]
    L = np.log(n)
    w = coef * np.exp(-a * L * L)
    out = np.empty(s.shape, dtype=complex)
    err = np.zeros(s.shape)
    chunk = max(1, 2_000_000 // max(1, len(L)))
    for i in range(0, len(s), chunk):
        ss = s[i:i + chunk]
        out[i:i + chunk] = np.exp(-np.outer(ss, L)) @ w
    for r in range(1, q + 1):
        c = vals[r - 1]
        if c:
            tail, terr = _tail_np(s, a, float(q * K0 + r), q)
            out += c * tail
            err += abs(c) * terr
    if with_err:
        # exp(-s log n) carries a relative error of about eps |s| log n
        size = np.abs(w).sum() * np.exp(-np.minimum(s.real, 0) * L[-1])
        return out, err + np.abs(out) * 1e-15 + 2.3e-16 * (1 + np.abs(s) * L[-1]) * size
    return out


def f_t_eval(spec: LFunctionSpec, t, s, prec: PrecisionConfig = DEFAULT_PRECISION) -> ValueWithError:
    """F_t(s) = sum_n exp(-|t| log^2 n / 4) a_n n^{-s}.

    Direct truncation at the N of :func:`f_t_truncation` when that is short,
    otherwise head plus Euler-Maclaurin tail.  With 15 working digits the
    double-precision path is used.
    """
    a = check_t(t) / 4
    if prec.fast:
        v, e = ft_np(spec, t, [complex(s)], with_err=True)
        return checked(complex(v[0]), float(e[0]), prec, "F_t(s)")
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        val, err = _ft_mp(spec, mp.mpf(a), mp.mpc(s), prec, absolute=False)
        return checked(val, err, prec, "F_t(s)")


def f_t_tilde(spec: LFunctionSpec, t, x, prec: PrecisionConfig = DEFAULT_PRECISION) -> ValueWithError:
    """The majorant sum_n exp(-|t| log^2 n / 4) |a_n| n^{-x}."""
    a = check_t(t) / 4
    if prec.fast:
        v, e = ft_np(spec, t, [complex(float(x))], absolute=True, with_err=True)
        return checked(float(v[0].real), float(e[0]), prec, "F_t tilde")
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        val, err = _ft_mp(spec, mp.mpf(a), mp.mpc(mp.mpf(x)), prec, absolute=True)
        return checked(mp.re(val), err, prec, "F_t tilde")


def f_t_tilde_tail(spec: LFunctionSpec, t, x: float, N: int) -> float:
    """sum_{n > N} exp(-|t| log^2 n / 4) |a_n| n^{-x}, in double precision."""
    a = -float(t) / 4
    classes = _classes(spec, absolute=True)
    if classes is None:
        vals = [abs(complex(as_mp(v))) for v in spec.coeffs.values]
        return float(sum(
            vals[n - 1] * math.exp(-a * math.log(n) ** 2 - x * math.log(n)) for n in range(N + 1, len(vals) + 1)
        ))
    total = float(ft_np(spec, t, [complex(x)], absolute=True)[0].real)
    q, vals = classes
    n = np.arange(1, N + 1)
    coef = np.array([float(v) for v in vals])[(n - 1) % q]
    L = np.log(n)
    return max(0.0, total - float((coef * np.exp(-a * L * L - x * L)).sum()))


# -- gamma decay ------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    """Fit of -log|gamma(x+iy)| against y.

    k_fit is the least-squares slope; k_lower and k_upper are the tightest
    constants with exp(-k_upper y) <= |gamma| <= exp(-k_lower y) at every
    sample; max_violation is how far that sandwich (with k_lower > 0) fails.
    """

    k_fit: float
    k_lower: float
    k_upper: float
    max_violation: float


def gamma_decay_fit(spec: LFunctionSpec, x: float, y_range, samples: int = 17, D: float = 2.0, theta: float = 0.5) -> DecayFit:
    """Sample log|gamma(x+iy)| and fit its linear decay rate in y."""
    y0, y1 = (float(v) for v in y_range)
    ys = np.linspace(y0, y1, int(samples))
    for y in ys:
        if abs(x) > D * abs(y) ** theta:
            raise DomainError(f"|x| exceeds D y^theta at y = {y}")
        for p in spec.gamma.gamma_poles(re_min=x - 2):
            if abs(complex(x, y) - p) < 1:
                raise DomainError(f"sample {x}+{y}i is within unit distance of a Gamma pole")
    with mp.workdps(30):
        neg = np.array([-float(mp.re(log_gamma_factor(spec, mp.mpc(x, y))[0])) for y in ys])
    slope = float(np.polyfit(ys, neg, 1)[0])
    ratios = neg / ys
    k_lower, k_upper = float(ratios.min()), float(ratios.max())
    viol = max(0.0, -k_lower)
    viol = max(viol, float(np.max(neg - k_upper * ys)), float(np.max(k_lower * ys - neg)))
    return DecayFit(slope, k_lower, k_upper, viol)
