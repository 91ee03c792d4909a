"""Vertical almost-periods of F_t.

F_t(s + i tau) - F_t(s) = sum_n w_n a_n n^{-s} (n^{-i tau} - 1) with
w_n = exp(-|t| log^2 n / 4), so on a strip alpha <= Re s <= beta the
difference is at most

    D(tau) = sum_{n <= N} w_n |a_n| n^{-alpha} |n^{-i tau} - 1| + 2 * tail(N).

The search scans D over a tau grid fine enough for its highest frequency
log N, keeps local minima below a screening level, and evaluates the actual
difference on a grid over the strip only for those.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .deform import T_CAP, check_t, f_t_tilde_tail
from .errors import NoShiftFoundError
from .precision import FAST_PRECISION, PrecisionConfig
from .selberg import LFunctionSpec, as_mp
from .zerofind import Rect

GRID_DX = 0.01
GRID_DY = 0.25
TAU_MIN = 1.0
SCREEN_FACTOR = 2.0
MAX_FULL_EVALS = 40
REFINE_FACTOR = 4


@dataclass(frozen=True)
class ShiftRecord:
    tau: float
    epsilon: float
    strip: Rect
    sup_sampled: float
    padding: float = 0.0


@dataclass(frozen=True)
class ShiftCheck:
    """Outcome of :func:`verify_shift`."""

    tau: float
    sup_sampled: float
    padding: float
    passed: bool
    density: float


def _coefficients(spec: LFunctionSpec, N: int):
    rule = spec.coeffs
    n = np.arange(1, N + 1)
    if rule.variant == "ExplicitList":
        vals = np.array([complex(as_mp(v)) for v in rule.values] + [0j] * max(0, N - len(rule.values)))[:N]
    else:
        per = np.array([complex(v) for v in rule.periodic_values()])
        vals = per[(n - 1) % len(per)]
    return n, vals


def _tail_cut(spec: LFunctionSpec, t: float, x: float, level: float) -> int:
    """Smallest N (up to doubling and bisection) with tail of F~_t at x below level."""
    hi = 1
    while f_t_tilde_tail(spec, t, x, hi) >= level:
        hi *= 2
        if hi > 1 << 26:
            raise NoShiftFoundError("tail of the majorant does not fall below the budget")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f_t_tilde_tail(spec, t, x, mid) < level:
            hi = mid
        else:
            lo = mid
    return hi


def dominant_terms(spec: LFunctionSpec, t, x: float, epsilon: float) -> int:
    """N_dom: smallest N with sum_{n > N} w_n |a_n| n^{-x} < epsilon / 4."""
    return _tail_cut(spec, float(t), float(x), epsilon / 4)


def screening_bound(spec: LFunctionSpec, t, x: float, N: int, taus) -> np.ndarray:
    """D(tau) = sum_{n <= N} w_n |a_n| n^{-x} |n^{-i tau} - 1| on an array of tau."""
    a = -float(t) / 4
    n, vals = _coefficients(spec, N)
    L = np.log(n)
    w = np.abs(vals) * np.exp(-a * L * L - x * L)
    keep = (w > 0) & (n > 1)
    w, L = w[keep], L[keep]
    taus = np.asarray(taus, dtype=float)
    out = np.empty(taus.shape)
    chunk = max(1, 4_000_000 // max(1, len(L)))
    for i in range(0, len(taus), chunk):
        ph = np.outer(taus[i:i + chunk], L) / 2
        out[i:i + chunk] = 2 * (np.abs(np.sin(ph)) @ w)
    return out


def _grid(strip: Rect, density: float):
    nx = max(2, int(round(strip.width / (GRID_DX / density))) + 1)
    ny = max(2, int(round(strip.height / (GRID_DY / density))) + 1)
    xs = np.linspace(strip.x_lo, strip.x_hi, nx)
    ys = np.linspace(strip.y_lo, strip.y_hi, ny)
    X, Y = np.meshgrid(xs, ys)
    return (X + 1j * Y).ravel(), (xs[1] - xs[0]), (ys[1] - ys[0]), nx, ny


class _ShiftedDifference:
    """G_tau(s) = F_t(s + i tau) - F_t(s) by a truncated sum with a tail bound."""

    def __init__(self, spec: LFunctionSpec, t: float, strip: Rect, tol: float):
        self.N = _tail_cut(spec, t, strip.x_lo, tol / 2)
        self.tail = 2 * f_t_tilde_tail(spec, t, strip.x_lo, self.N)
        n, vals = _coefficients(spec, self.N)
        a = -t / 4
        self.L = np.log(n)
        self.c = vals * np.exp(-a * self.L * self.L)
        keep = self.c != 0
        self.L, self.c = self.L[keep], self.c[keep]

    def __call__(self, s, tau: float):
        s = np.asarray(s, dtype=complex)
        coef = self.c * (np.exp(-1j * tau * self.L) - 1)
        out = np.empty(s.shape, dtype=complex)
        chunk = max(1, 4_000_000 // max(1, len(self.L)))
        for i in range(0, len(s), chunk):
            out[i:i + chunk] = np.exp(-np.outer(s[i:i + chunk], self.L)) @ coef
        return out


def _sup_on_grid(G: _ShiftedDifference, strip: Rect, tau: float, density: float):
    pts, dx, dy, nx, ny = _grid(strip, density)
    vals = G(pts, tau).reshape(ny, nx)
    mag = np.abs(vals)
    # sampled Lipschitz constant from neighbouring differences
    lip = 0.0
    if nx > 1:
        lip = max(lip, float(np.max(np.abs(np.diff(vals, axis=1)))) / dx)
    if ny > 1:
        lip = max(lip, float(np.max(np.abs(np.diff(vals, axis=0)))) / dy)
    padding = lip * math.hypot(dx, dy) / 2 + G.tail
    return float(mag.max()), padding


def verify_shift(spec: LFunctionSpec, t, strip: Rect, tau: float, epsilon: float, grid_density: float = 2.0,
                 prec: PrecisionConfig = FAST_PRECISION) -> ShiftCheck:
    """sup of |F_t(s + i tau) - F_t(s)| on a grid ``grid_density`` times the default.

    ``passed`` requires the sampled sup plus the Lipschitz and truncation
    padding to stay below epsilon.
    """
    a_t = check_t(t, T_CAP)
    if not tau > 0:
        raise ValueError("tau must be positive")
    G = _ShiftedDifference(spec, -a_t, strip, epsilon / 100)
    sup, pad = _sup_on_grid(G, strip, float(tau), grid_density)
    return ShiftCheck(float(tau), sup, pad, sup + pad < epsilon, grid_density)


def _local_minima(d: np.ndarray):
    inner = np.nonzero((d[1:-1] <= d[:-2]) & (d[1:-1] <= d[2:]))[0] + 1
    return inner


def find_shifts(spec: LFunctionSpec, t, strip: Rect, epsilon: float, tau_max: float, count: int = 1,
                prec: PrecisionConfig = FAST_PRECISION, tau_min: float = TAU_MIN) -> list:
    """Up to ``count`` shifts tau in [tau_min, tau_max] with sup_strip |F_t(s+i tau) - F_t(s)| < epsilon.

    tau_min keeps the trivially small shifts (where F_t barely moves) out of
    the result.  The lowest grid minima of D(tau) are refined by a bounded
    scalar search; those below ``SCREEN_FACTOR`` times epsilon are then
    evaluated on the strip grid, smallest D first, at most
    ``MAX_FULL_EVALS`` of them.  Raises NoShiftFoundError with the best sup
    seen when nothing qualifies.
    """
    a_t = check_t(t, T_CAP)
    t = -a_t
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not (math.isfinite(tau_max) and tau_max > tau_min):
        raise ValueError("tau_max must be finite and above tau_min")
    N = dominant_terms(spec, t, strip.x_lo, epsilon)
    G = _ShiftedDifference(spec, t, strip, epsilon / 100)
    if N <= 1:
        # single dominant term: D vanishes identically, take the first grid tau
        sup, pad = _sup_on_grid(G, strip, tau_min, 1.0)
        if sup + pad < epsilon:
            return [ShiftRecord(tau_min, epsilon, strip, sup, pad)]
    step = math.pi / (8 * math.log(max(N, 2)))
    taus = np.arange(tau_min, tau_max + step, step)
    taus = taus[taus <= tau_max]
    D = screening_bound(spec, t, strip.x_lo, N, taus)
    mins = _local_minima(D)
    if len(mins) == 0:
        mins = np.array([int(np.argmin(D))])
    order = mins[np.argsort(D[mins], kind="stable")][:REFINE_FACTOR * MAX_FULL_EVALS]
    # the grid only brackets each minimum; refine it within one step
    refined = []
    for i in order:
        lo, hi = max(tau_min, taus[i] - step), min(tau_max, taus[i] + step)
        opt = minimize_scalar(lambda u: float(screening_bound(spec, t, strip.x_lo, N, [u])[0]),
                              bounds=(lo, hi), method="bounded", options={"xatol": step * 1e-6})
        refined.append((min(float(opt.fun), float(D[i])), float(opt.x) if opt.fun < D[i] else float(taus[i])))
    refined.sort()
    screened = [r for r in refined if r[0] < SCREEN_FACTOR * epsilon]
    candidates = screened[:MAX_FULL_EVALS] if screened else refined[:3]
    found = []
    best = (None, math.inf)
    for _, tau in candidates:
        sup, pad = _sup_on_grid(G, strip, tau, 1.0)
        if sup < best[1]:
            best = (tau, sup)
        if sup + pad < epsilon and screened:
            if verify_shift(spec, t, strip, tau, epsilon, 2.0, prec).passed:
                found.append(ShiftRecord(tau, epsilon, strip, sup, pad))
    if not found:
        raise NoShiftFoundError(
            f"no shift below epsilon={epsilon} up to tau={tau_max}; best sup {best[1]:.4g} at tau={best[0]}",
            best_tau=best[0], best_sup=best[1])
    found.sort(key=lambda r: r.tau)
    return found[:count]
