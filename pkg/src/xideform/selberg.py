"""L-function data: coefficient rules, gamma data, presets and evaluation of F and xi^F.

An :class:`LFunctionSpec` holds everything needed to complete a Dirichlet
series F(s) = sum a_n n^{-s} into xi^F(s) = gamma(s) F(s), where

    gamma(s) = alpha s^m (s-1)^m Q^s prod_i Gamma(omega_i s + mu_i).

Numbers may be given as Python numbers, ``[re, im]`` pairs, or short
strings such as ``"1/sqrt(pi)"``; strings are evaluated at whatever
precision is active, so presets stay exact at any working precision.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Sequence

from mpmath import mp

from .errors import DomainError, PoleError, PrecisionError
from .precision import DEFAULT_PRECISION, PrecisionConfig, ValueWithError, checked
from .special import log_int, loggamma, periodic_dirichlet

GUARD_DIGITS = 5

ALL_ONES = "AllOnes"
PERIODIC = "PeriodicList"
EXPLICIT = "ExplicitList"
ZETA_LIKE = "ZetaLike"
DIRICHLET_LIKE = "DirichletLLike"
SERIES_ONLY = "SeriesOnly"

_NAMES = {"pi": lambda: mp.pi, "e": lambda: mp.e}
_FUNCS = {"sqrt": mp.sqrt, "exp": mp.exp, "log": mp.log}


def as_mp(x):
    """Convert a stored number to an mpmath value at the current precision."""
    if isinstance(x, str):
        text = x.strip()
        allowed = set("0123456789.+-*/() eEjpqrtxlogsi")
        if not set(text) <= allowed:
            raise ValueError(f"unsupported characters in number {x!r}")
        env = {k: v() for k, v in _NAMES.items()}
        env.update(_FUNCS)
        env["j"] = mp.j
        return mp.mpmathify(eval(text, {"__builtins__": {}}, env))  # noqa: S307
    if isinstance(x, (list, tuple)):
        re, im = x
        return mp.mpc(as_mp(re), as_mp(im))
    return mp.mpmathify(x)


def _freeze(x):
    """Hashable canonical form of a number as given by the user."""
    if isinstance(x, (list, tuple)):
        return tuple(_freeze(v) for v in x)
    if isinstance(x, complex):
        return (x.real, x.imag)
    return x


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    return x


@dataclass(frozen=True)
class CoeffRule:
    """Rule producing the Dirichlet coefficients a_n.

    ``values`` holds a_1, ..., a_q for a periodic rule and the full finite
    list for an explicit one.  ``bound_const`` is c in |a_n| <= c n^2.
    """

    variant: str
    values: tuple = ()
    bound_const: float = 1.0

    def __post_init__(self):
        if self.variant not in (ALL_ONES, PERIODIC, EXPLICIT):
            raise ValueError(f"unknown coefficient variant {self.variant!r}")
        object.__setattr__(self, "values", tuple(_freeze(v) for v in self.values))
        if self.variant != ALL_ONES:
            if not self.values:
                raise ValueError("coefficient list is empty")
            mags = [abs(complex(as_mp(v))) for v in self.values]
            if not any(m > 0 for m in mags):
                raise ValueError("series is identically zero")
            for n, m in enumerate(mags, start=1):
                if m > self.bound_const * n * n * (1 + 1e-12):
                    raise ValueError(f"|a_{n}| exceeds the declared bound c n^2")
        if not self.bound_const > 0:
            raise ValueError("bound_const must be positive")

    @property
    def period(self) -> int:
        return len(self.values) if self.variant == PERIODIC else 1

    def value(self, n: int):
        if n < 1:
            raise ValueError("coefficients are indexed from n = 1")
        if self.variant == ALL_ONES:
            return mp.mpf(1)
        if self.variant == PERIODIC:
            return as_mp(self.values[(n - 1) % len(self.values)])
        return as_mp(self.values[n - 1]) if n <= len(self.values) else mp.mpf(0)

    def periodic_values(self):
        """Period values (a_1..a_q) for series summed by residue classes."""
        if self.variant == ALL_ONES:
            return [mp.mpf(1)]
        if self.variant == PERIODIC:
            return [as_mp(v) for v in self.values]
        raise ValueError("explicit lists are not periodic")

    def abs_bound(self, n: int) -> float:
        """Upper bound for |a_n| usable in tail estimates."""
        if self.variant == ALL_ONES:
            return 1.0
        if self.variant == PERIODIC:
            return max(abs(complex(as_mp(v))) for v in self.values)
        return self.bound_const * n * n if n <= len(self.values) else 0.0


@dataclass(frozen=True)
class GammaData:
    """alpha, Q, m and the (omega, mu) pairs of the gamma factor."""

    alpha: object
    bigQ: object
    pole_order_m: int
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "alpha", _freeze(self.alpha))
        object.__setattr__(self, "bigQ", _freeze(self.bigQ))
        object.__setattr__(self, "factors", tuple((_freeze(w), _freeze(mu)) for w, mu in self.factors))
        with mp.workdps(20):
            if as_mp(self.alpha) == 0:
                raise ValueError("alpha must be nonzero")
            if not as_mp(self.bigQ) > 0:
                raise ValueError("Q must be positive")
            for w, mu in self.factors:
                if not as_mp(w) > 0:
                    raise ValueError("every omega must be positive")
                if mp.re(as_mp(mu)) < 0:
                    raise ValueError("every mu must have nonnegative real part")
        if int(self.pole_order_m) != self.pole_order_m or self.pole_order_m < 0:
            raise ValueError("pole order must be a nonnegative integer")

    def omegas(self):
        return [as_mp(w) for w, _ in self.factors]

    def mus(self):
        return [as_mp(mu) for _, mu in self.factors]

    def omega_sum(self):
        return mp.fsum(self.omegas())

    def gamma_poles(self, im_window: float = math.inf, re_min: float = -60.0):
        """Poles of the Gamma factors with Re above ``re_min``, as complex numbers."""
        out = []
        with mp.workdps(20):
            for w, mu in zip(self.omegas(), self.mus()):
                k = 0
                while True:
                    p = -(mu + k) / w
                    if mp.re(p) < re_min:
                        break
                    if abs(mp.im(p)) <= im_window:
                        out.append(complex(p))
                    k += 1
        return out


@dataclass(frozen=True)
class LFunctionSpec:
    """A member of the extended Selberg class, as data."""

    name: str
    coeffs: CoeffRule
    gamma: GammaData
    analytic_family: str = ZETA_LIKE

    def __post_init__(self):
        if self.analytic_family not in (ZETA_LIKE, DIRICHLET_LIKE, SERIES_ONLY):
            raise ValueError(f"unknown analytic family {self.analytic_family!r}")
        if self.analytic_family != SERIES_ONLY and self.coeffs.variant == EXPLICIT:
            raise ValueError("explicit lists need the SeriesOnly family")

    def to_config(self) -> dict:
        c = self.coeffs
        coeffs = {"variant": c.variant, "bound_const": c.bound_const}
        if c.variant != ALL_ONES:
            coeffs["values"] = [_jsonable(v) for v in c.values]
        if c.variant == PERIODIC:
            coeffs["period"] = len(c.values)
        g = self.gamma
        alpha = g.alpha if isinstance(g.alpha, tuple) else (g.alpha, 0)
        factors = []
        for w, mu in g.factors:
            mu_re, mu_im = mu if isinstance(mu, tuple) else (mu, 0)
            factors.append([w, mu_re, mu_im])
        return {
            "name": self.name,
            "coeffs": coeffs,
            "gamma": {"alpha": list(alpha), "Q": g.bigQ, "m": g.pole_order_m, "factors": factors},
            "family": self.analytic_family,
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "LFunctionSpec":
        try:
            c = cfg["coeffs"]
            values = c.get("values", ())
            if c["variant"] == PERIODIC and "period" in c and int(c["period"]) != len(values):
                raise ValueError("period does not match the number of values")
            rule = CoeffRule(c["variant"], tuple(values), float(c.get("bound_const", 1.0)))
            g = cfg["gamma"]
            alpha = g["alpha"]
            if isinstance(alpha, list) and len(alpha) == 2 and alpha[1] in (0, "0"):
                alpha = alpha[0]
            factors = []
            for f in g["factors"]:
                w, mu_re, mu_im = (list(f) + [0, 0])[:3]
                factors.append((w, mu_re if mu_im in (0, "0") else (mu_re, mu_im)))
            gamma = GammaData(alpha, g["Q"], int(g.get("m", 0)), tuple(factors))
            return cls(str(cfg["name"]), rule, gamma, cfg.get("family", ZETA_LIKE))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed spec config: {exc}") from exc

    def digest(self) -> str:
        """Stable digest of this LFunctionSpec, used as a cache key."""
        blob = json.dumps(self.to_config(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


ZETA = LFunctionSpec(
    "zeta",
    CoeffRule(ALL_ONES, (), 1.0),
    GammaData(0.5, "1/sqrt(pi)", 1, ((0.5, 0),)),
    ZETA_LIKE,
)

CHI4 = LFunctionSpec(
    "chi4",
    CoeffRule(PERIODIC, (1, 0, -1, 0), 1.0),
    GammaData(1, "2/sqrt(pi)", 0, ((0.5, 0.5),)),
    DIRICHLET_LIKE,
)

PRESETS = {"zeta": ZETA, "chi4": CHI4}


def resolve_spec(name_or_path: str) -> LFunctionSpec:
    """Preset name or path to a JSON config file."""
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    with open(name_or_path, encoding="utf-8") as fh:
        return LFunctionSpec.from_config(json.load(fh))


# -- evaluation --------------------------------------------------------------

def coeff(spec: LFunctionSpec, n: int):
    """Dirichlet coefficient a_n."""
    return spec.coeffs.value(int(n))


def _has_pole(spec: LFunctionSpec) -> bool:
    if spec.coeffs.variant == EXPLICIT:
        return False
    return mp.fsum(spec.coeffs.periodic_values()) != 0


def _series_only(spec: LFunctionSpec, s, prec: PrecisionConfig):
    rule = spec.coeffs
    if rule.variant == EXPLICIT:
        # A finite Dirichlet polynomial: exact and entire.
        total = mp.mpc(0)
        size = mp.mpf(0)
        for n, v in enumerate(rule.values, start=1):
            a = as_mp(v)
            if a:
                term = a * mp.exp(-s * log_int(n))
                total += term
                size += abs(term)
        return total, float(size) * 10.0 ** (-mp.dps + 1)
    x = float(mp.re(s))
    if x <= 3:
        raise DomainError("series-only evaluation needs Re s > 3")
    c = rule.bound_const
    N = math.ceil((c / ((x - 3) * prec.target_abs_err / 2)) ** (1 / (x - 3)))
    if N > prec.max_terms:
        raise PrecisionError(f"series truncation needs {N} terms")
    total = mp.fsum(rule.value(n) * mp.exp(-s * log_int(n)) for n in range(1, N + 1))
    return total, c * N ** (3 - x) / (x - 3)


def _library_core(values, s, pole_order: int):
    """(s-1)^m L(s) from mpmath's Hurwitz-zeta based Dirichlet routine."""
    q = len(values)
    chi = [values[-1]] + list(values[:-1])  # mpmath indexes by n mod q
    if q == 1:
        val = mp.zeta(s) * values[0]
    else:
        val = mp.dirichlet(s, chi)
    val *= (s - 1) ** pole_order
    return val, float(abs(val)) * 10.0 ** (-mp.dps + 3)


def _dirichlet_core(spec: LFunctionSpec, s, pole_order: int, prec: PrecisionConfig, engine: str = "own"):
    """(s-1)^pole_order F(s) and its error at the current precision.

    ``engine="library"`` hands the periodic series to mpmath's zeta and
    Hurwitz routines; it is several times faster and is used for bulk
    quadrature nodes.  The default is the self-contained Euler-Maclaurin sum.
    """
    if spec.analytic_family == SERIES_ONLY:
        val, err = _series_only(spec, s, prec)
        if pole_order:
            val *= (s - 1) ** pole_order
            err *= float(abs(s - 1)) ** pole_order
        return val, err
    values = spec.coeffs.periodic_values()
    if engine == "library" and abs(s - 1) > 1e-3:
        return _library_core([as_mp(v) for v in values], s, pole_order)
    return periodic_dirichlet(values, s, pole_order, prec.target_abs_err, prec.max_terms)


def f_eval(spec: LFunctionSpec, s, prec: PrecisionConfig = DEFAULT_PRECISION) -> ValueWithError:
    """F(s), continued analytically according to the analytic family."""
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        s = mp.mpc(s)
        if s == 1 and _has_pole(spec):
            raise PoleError("F has a pole at s = 1")
        val, err = _dirichlet_core(spec, s, 0, prec)
        return checked(val, err, prec, "F(s)")


def log_gamma_factor(spec: LFunctionSpec, s, include_pole_factor: bool = True, route: str = "shifted"):
    """log gamma(s) at the current precision, with an error estimate.

    With ``include_pole_factor=False`` the (s-1)^m factor is left out, which
    is the form paired with (s-1)^m F(s) near s = 1.  ``route`` is passed to
    ``special.loggamma``, or "library" for mpmath's own log-gamma.
    """
    g = spec.gamma
    s = mp.mpc(s)
    m = g.pole_order_m
    total = mp.log(as_mp(g.alpha)) + s * mp.log(as_mp(g.bigQ))
    err = 0.0
    if m:
        if s == 0 or (include_pole_factor and s == 1):
            raise PoleError("gamma factor vanishes here; log undefined")
        total += m * mp.log(s)
        if include_pole_factor:
            total += m * mp.log(s - 1)
    for w, mu in zip(g.omegas(), g.mus()):
        z = w * s + mu
        if mp.im(z) == 0 and mp.re(z) <= 0 and mp.re(z) == mp.floor(mp.re(z)):
            raise PoleError(f"Gamma({mp.nstr(z, 6)}) is a pole")
        if route == "library":
            lg, e = mp.loggamma(z), float(abs(z) + 1) * 10.0 ** (-mp.dps + 1)
        else:
            lg, e = loggamma(z, route)
        total += lg
        err += e
    return total, err + float(abs(total)) * 10.0 ** (-mp.dps + 1)


def _near_gamma_pole(spec: LFunctionSpec, s, dist: float = 0.25) -> bool:
    z = complex(s)
    for p in spec.gamma.gamma_poles(re_min=min(-1.0, z.real - 1.0)):
        if abs(z - p) < dist:
            return True
    return False


def _xi_direct(spec: LFunctionSpec, s, prec: PrecisionConfig, engine: str = "own"):
    m = spec.gamma.pole_order_m
    route = "library" if engine == "library" else "shifted"
    lg, lerr = log_gamma_factor(spec, s, include_pole_factor=False, route=route)
    g = mp.exp(lg)
    core, cerr = _dirichlet_core(spec, s, m, prec, engine)
    val = g * core
    err = float(abs(g)) * cerr + float(abs(val)) * lerr
    return val, err


def xi_F_eval(spec: LFunctionSpec, s, prec: PrecisionConfig = DEFAULT_PRECISION) -> ValueWithError:
    """xi^F(s) = gamma(s) F(s).

    Near s = 1 the (s-1)^m factor is paired with the pole of F.  Within 1/4
    of a Gamma pole the value is taken from the reflected point 1 - conj(s),
    where the functional equation xi(s) = conj xi(1 - conj s) holds for
    genuine members of the class.
    """
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        s = mp.mpc(s)
        if _near_gamma_pole(spec, s):
            val, err = _xi_direct(spec, 1 - mp.conj(s), prec)
            val = mp.conj(val)
        else:
            val, err = _xi_direct(spec, s, prec)
        return checked(val, err, prec, "xi^F(s)")


def xi_F_raw(spec: LFunctionSpec, s, prec: PrecisionConfig, engine: str = "own"):
    """xi^F(s) without the target check; for internal quadrature nodes."""
    s = mp.mpc(s)
    if _near_gamma_pole(spec, s):
        val, err = _xi_direct(spec, 1 - mp.conj(s), prec, engine)
        return mp.conj(val), err
    return _xi_direct(spec, s, prec, engine)


def functional_eq_residual(spec: LFunctionSpec, s, prec: PrecisionConfig = DEFAULT_PRECISION) -> float:
    """|xi(s) - conj xi(1 - conj s)| relative to max(|xi(s)|, 10^-digits)."""
    with mp.workdps(prec.working_digits + GUARD_DIGITS):
        s = mp.mpc(s)
        a = xi_F_eval(spec, s, prec).value
        b = mp.conj(xi_F_eval(spec, 1 - mp.conj(s), prec).value)
        floor = mp.mpf(10) ** (-prec.working_digits)
        return float(abs(a - b) / max(abs(a), floor))


def spec_from_parts(name: str, coeffs: Sequence, period: bool, alpha, Q, m: int, factors, family: str, bound: float = 1.0):
    """Convenience constructor used by tests and the CLI."""
    variant = PERIODIC if period else EXPLICIT
    return LFunctionSpec(name, CoeffRule(variant, tuple(coeffs), bound), GammaData(alpha, Q, m, tuple(factors)), family)
