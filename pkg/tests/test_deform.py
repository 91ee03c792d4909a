import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from mpmath import mp

from xideform.deform import (
    check_t, f_t_eval, f_t_truncation, ft_np, gamma_factor, gamma_t, j_map, j_map_np, log_gamma_t,
)
from xideform.errors import DomainError
from xideform.precision import FAST_PRECISION, PrecisionConfig
from xideform.selberg import CHI4, ZETA, f_eval, xi_F_eval

P = PrecisionConfig(working_digits=25, target_abs_err=1e-15)

upper = st.builds(complex, st.floats(min_value=-2, max_value=3), st.floats(min_value=1, max_value=150))
t_values = st.sampled_from([-0.25, -0.5, -1.0, -2.0, -4.0])


@given(upper, upper, t_values)
def test_j_map_linear_in_logs(s1, s2, t):
    # J_t(s) - s = |t|/2 (log Q + sum_i w_i Log(w_i s)); for one factor only Log s varies
    with mp.workdps(30):
        d1 = j_map(ZETA, t, s1) - s1
        d2 = j_map(ZETA, t, s2) - s2
        expect = -t / 2 * 0.5 * (mp.log(mp.mpc(s1)) - mp.log(mp.mpc(s2)))
        assert abs((d1 - d2) - expect) < 1e-20


@given(upper, t_values)
def test_j_map_double_lane(s, t):
    with mp.workdps(30):
        a = complex(j_map(CHI4, t, s))
    b = complex(j_map_np(CHI4, t, np.array([s]))[0])
    assert abs(a - b) < 1e-12 * max(1, abs(a))


def test_j_map_identity_at_zero():
    assert j_map(ZETA, 0, mp.mpc(0.3, 4)) == mp.mpc(0.3, 4)


def test_sector_guard():
    with pytest.raises(DomainError):
        j_map(ZETA, -1, mp.mpc(-5, 1e-5))


@pytest.mark.parametrize("t", [0, 0.5])
def test_t_validation(t):
    with pytest.raises(DomainError):
        check_t(t)
    with pytest.raises(DomainError):
        f_t_eval(ZETA, t, 2.0, P)


@given(upper, t_values)
def test_gamma_t_never_vanishes(s, t):
    with mp.workdps(30):
        lg, _ = log_gamma_t(ZETA, t, mp.mpc(s))
        assert mp.isfinite(mp.re(lg))
        # |gamma_t| = |gamma| exp(Re(...)) with a finite exponent
        g = gamma_t(ZETA, t, s, PrecisionConfig(working_digits=20, target_abs_err=1e300)).value
        assert g != 0


@pytest.mark.parametrize("s", [complex(0.3, 5), complex(-1.2, 14), complex(2.5, 30), complex(0.8, -9)])
@pytest.mark.parametrize("spec", [ZETA, CHI4], ids=lambda s: s.name)
def test_gamma_times_f_is_xi(spec, s):
    with mp.workdps(30):
        g = gamma_factor(spec, s, P)
        f = f_eval(spec, s, P)
        x = xi_F_eval(spec, s, P)
        assert abs(g.value * f.value - x.value) <= abs(g.value) * f.err + abs(f.value) * g.err + x.err + 1e-28


@pytest.mark.parametrize("spec", [ZETA, CHI4], ids=lambda s: s.name)
@pytest.mark.parametrize("s", [complex(-0.25, 40), complex(1.5, 3), complex(-3, 100)])
def test_f_t_absolute_convergence(spec, s):
    # doubling the truncation point changes the direct sum by less than the target
    t = -4.0
    prec = PrecisionConfig(working_digits=25, target_abs_err=1e-8)
    v = f_t_eval(spec, t, s, prec)
    N = f_t_truncation(spec, t, s.real, prec.target_abs_err)
    assert N < 10**4
    with mp.workdps(30):
        z = mp.mpc(s)

        def direct(M):
            return mp.fsum(spec.coeffs.value(n) * mp.exp(-mp.log(n) ** 2) * mp.power(n, -z) for n in range(1, M + 1))
        d2 = direct(2 * N)
        # the sum past N is below the target, and the evaluator agrees with both partial sums
        assert abs(d2 - direct(N)) <= prec.target_abs_err
        assert abs(d2 - v.value) <= v.err + prec.target_abs_err


def test_f_t_first_term_dominance():
    v = f_t_eval(ZETA, -1, 10, P)
    assert abs(v.value - 1) < 2e-3


def test_f_t_double_lane_matches():
    s = np.array([complex(-0.25, 40), complex(-0.3, 123.4), complex(0.7, 2)])
    val, err = ft_np(ZETA, -1.0, s, with_err=True)
    for z, v, e in zip(s, val, err):
        ref = f_t_eval(ZETA, -1, z, P)
        assert abs(complex(ref.value) - v) <= e + ref.err + 1e-14
    assert f_t_eval(ZETA, -1, s[0], FAST_PRECISION).err < 1e-10


def test_large_t_series():
    # t far beyond the xi_t budget is fine for the series alone
    v = f_t_eval(CHI4, -30, complex(-0.5, 20), P)
    assert math.isfinite(abs(complex(v.value)))
