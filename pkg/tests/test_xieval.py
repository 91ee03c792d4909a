import numpy as np
import pytest
from mpmath import mp

from xideform.deform import gamma_t
from xideform.errors import PoleProximityError, PrecisionError
from xideform.precision import PrecisionConfig
from xideform.selberg import CHI4, ZETA, xi_F_eval
from xideform.xieval import (
    RatioEvaluator, b_tn, saddle_abscissa, theorem4_detail, xi_t, xi_t_contour, xi_t_fourier,
)

P = PrecisionConfig(working_digits=20, target_abs_err=1e-12)


@pytest.mark.parametrize("spec", [ZETA, CHI4], ids=lambda s: s.name)
@pytest.mark.parametrize("s,t", [("0.3+20j", -1.0), ("-0.5+5j", -2.0), ("1.25+12j", -0.5)])
def test_routes_agree(spec, s, t):
    with mp.workdps(30):
        z = mp.mpmathify(s)
        a = xi_t_fourier(spec, t, z, P)
        b = xi_t_contour(spec, t, z, P, abscissa=saddle_abscissa(float(z.real)))
        assert abs(a.value - b.value) <= a.err + b.err


@pytest.mark.parametrize("spec", [ZETA, CHI4], ids=lambda s: s.name)
@pytest.mark.parametrize("y", [0, 3, 14.134725, 25])
def test_real_on_critical_line(spec, y):
    v = xi_t(spec, -1, mp.mpc(0.5, y), P)
    assert abs(mp.im(v.value)) <= v.err


def test_small_t_approaches_xi():
    # xi_t -> xi^F as t -> 0; the Gaussian smoothing shifts values by O(|t|)
    s = mp.mpc(0.5, 3)
    x0 = xi_F_eval(ZETA, s, P).value
    d = [abs(xi_t_fourier(ZETA, t, s, P).value - x0) for t in (-0.04, -0.02, -0.01)]
    assert d[0] > d[1] > d[2]
    assert d[1] / d[0] == pytest.approx(0.5, rel=0.1)


def test_contour_headroom_refused():
    with pytest.raises(PrecisionError):
        xi_t_contour(ZETA, -0.25, mp.mpc(-3, 10), P, abscissa="2")


def test_fourier_loss_refused():
    with pytest.raises(PrecisionError):
        xi_t_fourier(ZETA, -1, mp.mpc(0.5, 200), P)


def test_b_decomposition_partial_sums():
    # sum_n a_n B_{t,n}(s) -> xi_t(J_t(s)); increments shrink with n
    from xideform.deform import j_map
    t = -1.0
    s = mp.mpc("1.5", "20")
    with mp.workdps(30):
        target = xi_t(ZETA, t, j_map(ZETA, t, s), P).value
        parts = [b_tn(ZETA, t, n, s, P).value for n in range(1, 7)]
        incr = [abs(p) for p in parts]
        assert all(b < a for a, b in zip(incr, incr[1:]))
        errs = [abs(target - mp.fsum(parts[:k])) for k in range(1, 7)]
        assert errs[-1] < errs[0] / 20


def test_pole_floor():
    with pytest.raises(PoleProximityError):
        theorem4_detail(ZETA, -1, complex(-0.25, 5), P)
    with pytest.raises(PoleProximityError):
        RatioEvaluator(ZETA, -1, (-0.3, -0.2), (5, 20))


def test_ratio_evaluator_matches_direct():
    h = RatioEvaluator(ZETA, -1, (-0.3, -0.2), (30, 33))
    pts = np.array([complex(-0.3, 30), complex(-0.25, 31.7), complex(-0.2, 33)])
    val, err = h(pts, with_err=True)
    prec = PrecisionConfig(working_digits=20, target_abs_err=1e-8)
    for z, v, e in zip(pts, val, err):
        r = theorem4_detail(ZETA, -1, z, prec)
        assert abs(v - r.ratio) <= e + r.err


def test_gamma_t_normalised_residual_is_moderate():
    r = theorem4_detail(ZETA, -1, complex(-0.25, 30), PrecisionConfig(working_digits=20, target_abs_err=1e-8))
    assert r.residual < 0.5
    assert abs(gamma_t(ZETA, -1, complex(-0.25, 30), P).value) > 0
