"""Self-contained special-function kernels at mpmath working precision.

* Gauss-Legendre nodes refined by Newton iteration.
* Log-gamma from the Stirling series, either directly or after an upward
  recurrence shift.
* Euler-Maclaurin summation of periodic Dirichlet series, which covers the
  Riemann and Hurwitz zeta functions and Dirichlet L-functions, with the
  pole at s = 1 split off explicitly.
"""
from __future__ import annotations

import math
from functools import lru_cache

from mpmath import mp
import numpy as np

from .errors import PoleError, PrecisionError

EM_BERNOULLI_TERMS = 12
EM_MAX_TERMS = 60


@lru_cache(maxsize=None)
def _bernoulli(n: int, prec: int):
    with mp.workprec(prec):
        return mp.bernoulli(n)


def bernoulli(n: int):
    return _bernoulli(n, mp.prec)


@lru_cache(maxsize=None)
def _log_int(n: int, prec: int):
    with mp.workprec(prec):
        return mp.log(n)


def log_int(n: int):
    """Cached natural logarithm of a positive integer at the current precision."""
    return _log_int(int(n), mp.prec)


# -- Gauss-Legendre ---------------------------------------------------------

@lru_cache(maxsize=None)
def gauss_legendre(q: int, dps: int):
    """Nodes and weights of the q-point Gauss-Legendre rule on [-1, 1].

    Returned as tuples of mpf at ``dps`` digits, plus float copies for the
    vectorised paths.
    """
    x0, _ = np.polynomial.legendre.leggauss(q)
    nodes, weights = [], []
    with mp.workdps(dps + 10):
        for guess in x0:
            x = mp.mpf(float(guess))
            for _ in range(100):
                p0, p1 = mp.mpf(1), x
                for k in range(2, q + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = q * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < mp.mpf(10) ** (-(dps + 8)):
                    break
            p0, p1 = mp.mpf(1), x
            for k in range(2, q + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = q * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    with mp.workdps(dps):
        nodes = tuple(+x for x in nodes)
        weights = tuple(+w for w in weights)
    return nodes, weights


def gl_order(dps: int) -> int:
    """Panel rule order used for a given working precision."""
    return max(10, (int(dps) + 1) // 2)


# -- log-gamma ---------------------------------------------------------------

def _stirling(z, tol):
    """Stirling series for log Gamma(z); returns (value, err estimate).

    The series is asymptotic: summation stops once a term drops below
    ``tol`` or, failing that, at the smallest term, and twice the first
    omitted term is reported as the error.
    """
    val = (z - mp.mpf(0.5)) * mp.log(z) - z + mp.log(2 * mp.pi) / 2
    zinv = 1 / z
    z2 = zinv * zinv
    zpow = zinv
    prev = None
    for j in range(1, 400):
        term = bernoulli(2 * j) / (2 * j * (2 * j - 1)) * zpow
        mag = abs(term)
        if mag < tol / 2:
            return val, float(2 * mag)
        if prev is not None and mag > prev:
            return val, float(2 * prev)
        val += term
        prev = mag
        zpow *= z2
    raise PrecisionError("Stirling series did not converge")


def loggamma(z, route: str = "shifted"):
    """log Gamma(z) at the current precision with an error estimate.

    ``route="shifted"`` moves z to the right by integer steps until the
    Stirling series converges quickly and undoes the shift with logs of the
    rising factorial.  ``route="direct"`` applies Stirling at z unchanged
    and fails when |z| is too small.  The two agree up to a multiple of
    2*pi*i, which never matters after exponentiation.
    """
    z = mp.mpc(z)
    re = mp.re(z)
    if mp.im(z) == 0 and re <= 0 and re == mp.floor(re):
        raise PoleError(f"Gamma has a pole at {mp.nstr(z, 8)}")
    tol = mp.mpf(10) ** (-(mp.dps + 3))
    if route == "direct":
        if re <= 0:
            raise PrecisionError("direct Stirling route needs Re z > 0")
        return _stirling(z, tol)
    if route != "shifted":
        raise ValueError(f"unknown log-gamma route {route!r}")
    radius = 0.6 * mp.dps + 10
    k = 0
    w = z
    while abs(w) < radius or mp.re(w) < 1:
        w += 1
        k += 1
    val, err = _stirling(w, tol)
    if k:
        prod = mp.mpc(1)
        acc = mp.mpc(0)
        for j in range(k):
            prod *= z + j
            # Flush the product into the log every few steps to bound growth.
            if j % 8 == 7:
                acc += mp.log(prod)
                prod = mp.mpc(1)
        acc += mp.log(prod)
        val -= acc
    return val, err


# -- periodic Dirichlet series by Euler-Maclaurin ----------------------------

@lru_cache(maxsize=None)
def _bern_fact_cached(n: int, prec: int):
    with mp.workprec(prec):
        return mp.bernoulli(n) / mp.factorial(n)


def _bern_fact(n: int):
    """B_n / n! at the current precision."""
    return _bern_fact_cached(n, mp.prec)


def _rel_expm1(x):
    """expm1(x)/x, continuous at x = 0."""
    if x == 0:
        return mp.mpf(1)
    return mp.expm1(x) / x


def periodic_dirichlet(values, s, pole_order: int, target: float, max_terms: int):
    """Sum a_n n^{-s} with a_n = values[(n-1) % q], continued to all s.

    Returns ``((s-1)^pole_order * L(s), err)``.  Each residue class is
    summed by Euler-Maclaurin with at least ``EM_BERNOULLI_TERMS`` correction
    terms, more while they keep shrinking;
    the integral term carries the pole, which is split off so that the
    product with (s-1)^m stays finite at s = 1.
    """
    s = mp.mpc(s)
    q = len(values)
    coeffs = [mp.mpmathify(v) for v in values]
    p = EM_BERNOULLI_TERMS
    sigma = mp.re(s)
    if sigma + 2 * p + 1 <= 1:
        raise PrecisionError("Euler-Maclaurin remainder bound needs Re s > -2p")
    total_c = mp.fsum(coeffs)
    if pole_order == 0 and total_c != 0 and s == 1:
        raise PoleError("series has a pole at s = 1")
    K = int(math.ceil((float(abs(s)) + mp.dps) / 4)) + 4
    nz = sum(1 for c in coeffs if c)
    while True:
        if q * K > max_terms:
            raise PrecisionError(f"Euler-Maclaurin cutoff exceeds max_terms={max_terms}")
        head = mp.mpc(0)
        head_abs = mp.mpf(0)
        for n in range(1, q * K + 1):
            c = coeffs[(n - 1) % q]
            if c:
                ln = log_int(n)
                head += c * mp.exp(-s * ln)
                head_abs += abs(c) * mp.exp(-sigma * ln)
        budget = mp.mpf(target) / (20 * nz * max(1.0, float(abs(s - 1)) ** pole_order))
        regular = mp.mpc(0)
        pole_rest = mp.mpc(0)
        err = mp.mpf(0)
        part_abs = mp.mpf(0)
        for r in range(1, q + 1):
            c = coeffs[r - 1]
            if not c:
                continue
            X = q * K + r
            lx = log_int(X)
            xs = mp.exp(-s * lx)
            part = xs / 2
            part_abs += abs(xs)
            # rising factorial (s)_{2j-1} and powers of q/X; stop once the
            # Backlund bound on the remainder is below the class budget
            rising = s
            ratio = mp.mpf(q) / X
            fac = ratio
            prev = None
            bound = None
            for j in range(1, EM_MAX_TERMS + 1):
                term = _bern_fact(2 * j) * rising * fac * xs
                rising *= (s + 2 * j - 1) * (s + 2 * j)
                fac *= ratio * ratio
                nxt = abs(_bern_fact(2 * j + 2) * rising * fac * xs)
                mag = abs(term)
                if prev is not None and mag > prev and j > p:
                    break
                part += term
                part_abs += mag
                prev = mag
                if sigma + 2 * j + 1 > 0:
                    bound = nxt * abs(s + 2 * j + 1) / (sigma + 2 * j + 1)
                    if j >= p and bound < budget:
                        break
            if bound is None:
                raise PrecisionError("Euler-Maclaurin remainder bound needs larger Re s")
            err += abs(c) * bound
            regular += c * part
            # X^{1-s} / (q (s-1)) minus its constant part C/(q(s-1))
            pole_rest += c * (-lx) * _rel_expm1((1 - s) * lx) / q
        regular += head + pole_rest
        size = head_abs + part_abs + abs(pole_rest)
        if pole_order == 0:
            value = regular + (total_c / (q * (s - 1)) if total_c != 0 else 0)
        else:
            fac_m = (s - 1) ** pole_order
            value = fac_m * regular + (s - 1) ** (pole_order - 1) * total_c / q
            err *= abs(fac_m)
            size *= abs(fac_m)
        rounding = float(size + abs(value)) * 10.0 ** (-mp.dps + 1)
        err = float(err) + rounding
        if err <= target / 10 or err <= 2 * rounding:
            return value, err
        K = int(math.ceil(K * 1.5))
