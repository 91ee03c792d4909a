import numpy as np
import pytest
from hypothesis import given, strategies as st
from mpmath import mp

from xideform.errors import PrecisionError
from xideform.mellin import MellinKernel, fitted_decay_exponent, phi_F, phi_zeta, psi_closed, psi_quad
from xideform.precision import PrecisionConfig
from xideform.selberg import CHI4, ZETA

P = PrecisionConfig(working_digits=25, target_abs_err=1e-18)


def test_phi_series_matches_theta_series():
    # Phi_F built from the kernel psi against the classical theta-derivative series
    with mp.workdps(30):
        for u in ("0", "0.25", "1"):
            a = phi_F(ZETA, mp.mpf(u), P).value
            b = phi_zeta(mp.mpf(u), P).value
            assert abs(a - b) <= 1e-20 * abs(b)


@pytest.mark.parametrize("spec", [ZETA, CHI4], ids=lambda s: s.name)
@pytest.mark.parametrize("v", ["0.1", "0.7", "1", "2", "5", "10"])
def test_psi_routes_agree(spec, v):
    k = MellinKernel.of(spec)
    prec = PrecisionConfig(working_digits=15, target_abs_err=1e-10)
    with mp.workdps(25):
        q = psi_quad(k, mp.mpf(v), prec)
        c = psi_closed(k, mp.mpf(v))
        assert abs(q.value - c) <= q.err + 1e-20


@pytest.mark.parametrize("spec", [ZETA, CHI4], ids=lambda s: s.name)
def test_psi_decay_superlinear(spec):
    k = MellinKernel.of(spec)
    vs = np.linspace(1, 50, 25)
    with mp.workdps(40):
        logs = [float(-mp.log(abs(psi_closed(k, mp.mpf(v))))) for v in vs]
    assert all(b > a for a, b in zip(logs, logs[1:]))
    # -log|psi| / v increases: faster than any exponential of fixed rate
    ratios = [l / v for l, v in zip(logs, vs)]
    assert ratios[-1] > ratios[len(ratios) // 2] > ratios[0]
    assert fitted_decay_exponent(k, [5, 10, 20, 40]) > 1


@pytest.mark.parametrize("spec", [ZETA, CHI4], ids=lambda s: s.name)
@given(u=st.floats(min_value=-1.0, max_value=1.0))
def test_phi_conjugate_symmetry(spec, u):
    with mp.workdps(25):
        a = phi_F(spec, mp.mpf(u), P)
        b = phi_F(spec, -mp.mpf(u), P)
        assert abs(a.value - mp.conj(b.value)) <= a.err + b.err + 1e-22 * abs(a.value)


def test_phi_zeta_negative_guard():
    with pytest.raises(PrecisionError):
        phi_zeta(mp.mpf(-3), P)
    with mp.workdps(30):
        v = phi_zeta(mp.mpf(-3), P, use_evenness=True)
        assert abs(v.value - phi_zeta(mp.mpf(3), P).value) == 0
