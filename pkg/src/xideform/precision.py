"""Precision contract and values with attached error estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from mpmath import mp

from .errors import PrecisionError

# Digits at or below this run on the double-precision (numpy) fast paths.
DOUBLE_DIGITS = 15


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision and tolerances for one evaluation.

    working_digits is the decimal precision of the arithmetic; evaluators
    raise PrecisionError instead of returning a value whose error estimate
    exceeds ``target_abs_err``.
    """

    working_digits: int = 34
    target_abs_err: float = 1e-12
    max_terms: int = 10**6
    max_refine: int = 40

    def __post_init__(self):
        if int(self.working_digits) < 15:
            raise ValueError("working_digits must be at least 15")
        if not self.target_abs_err > 0:
            raise ValueError("target_abs_err must be positive")
        if self.max_terms < 1 or self.max_refine < 1:
            raise ValueError("max_terms and max_refine must be positive")

    @property
    def fast(self) -> bool:
        """True when double precision suffices."""
        return self.working_digits <= DOUBLE_DIGITS

    def with_digits(self, digits: int) -> "PrecisionConfig":
        return replace(self, working_digits=int(digits))

    def with_target(self, target: float) -> "PrecisionConfig":
        return replace(self, target_abs_err=float(target))


DEFAULT_PRECISION = PrecisionConfig()
FAST_PRECISION = PrecisionConfig(working_digits=15, target_abs_err=1e-10)


@dataclass(frozen=True)
class ValueWithError:
    """A value together with an absolute error estimate."""

    value: object
    err: float

    def __post_init__(self):
        if not math.isfinite(float(self.err)) or self.err < 0:
            raise ValueError(f"invalid error estimate {self.err!r}")

    def __complex__(self):
        return complex(self.value)

    @property
    def real(self):
        return mp.re(self.value)

    @property
    def imag(self):
        return mp.im(self.value)

    def __abs__(self):
        return abs(self.value)


def checked(value, err, prec: PrecisionConfig, what: str = "value") -> ValueWithError:
    """Wrap ``value`` after enforcing the target tolerance."""
    err = float(err)
    if not math.isfinite(err):
        raise PrecisionError(f"{what}: non-finite error estimate")
    if err > prec.target_abs_err:
        raise PrecisionError(
            f"{what}: error estimate {err:.3g} exceeds target {prec.target_abs_err:.3g}"
        )
    return ValueWithError(value, err)


def eps_at(dps: int) -> float:
    """Unit roundoff for ``dps`` decimal digits, as a float (may underflow to tiny)."""
    return 10.0 ** (-int(dps))
