import json

import pytest
from hypothesis import given, strategies as st
from mpmath import mp

from xideform.errors import DomainError, PoleError, PrecisionError
from xideform.precision import PrecisionConfig
from xideform.selberg import (
    CHI4, ZETA, LFunctionSpec, coeff, f_eval, functional_eq_residual, resolve_spec, spec_from_parts, xi_F_eval,
)

P30 = PrecisionConfig(working_digits=30, target_abs_err=1e-20)

# 20 points with |Im s| <= 30, both sides of the critical line
FE_SAMPLES = [complex(x, y) for x, y in [
    (0.3, 5), (0.7, -3), (-1.5, 12), (2.5, 0.5), (0.1, 29), (1.9, -17), (-0.4, 21), (0.5, 14.13), (3.0, 8),
    (-2.2, -6), (0.9, 25), (1.2, 1.5), (-0.7, -28), (0.45, 10), (2.0, 19), (0.05, -11), (1.6, 27), (-1.0, 3),
    (0.8, -22), (0.25, 16)]]


@pytest.mark.parametrize("spec", [ZETA, CHI4], ids=lambda s: s.name)
def test_functional_equation_presets(spec):
    worst = max(functional_eq_residual(spec, s, P30) for s in FE_SAMPLES)
    assert worst <= 1e-10


@pytest.mark.parametrize("s", ["0.3+5j", "-1.5+12j", "0.5+14.134725141734693790457j", "3+0.25j", "0.8-22j"])
def test_zeta_against_library(s):
    with mp.workdps(40):
        z = mp.mpmathify(s)
        got = f_eval(ZETA, z, P30)
        ref = mp.zeta(z)
        assert abs(got.value - ref) <= got.err + abs(ref) * 1e-30


@pytest.mark.parametrize("s", ["0.3+5j", "-1.5+12j", "2+0.25j", "0.5+6.020948904697596j"])
def test_chi4_against_library(s):
    with mp.workdps(40):
        z = mp.mpmathify(s)
        got = f_eval(CHI4, z, P30)
        ref = mp.dirichlet(z, [0, 1, 0, -1])
        assert abs(got.value - ref) <= got.err + abs(ref) * 1e-30


@pytest.mark.parametrize("x", [2.5, 3.0, 4.0, 6.0])
def test_zeta_matches_direct_sum(x):
    # sum_{n<=N} n^-s with the integral tail bound N^{1-x}/(x-1)
    N = 40000
    s = mp.mpc(x, 7.5)
    with mp.workdps(25):
        direct = mp.fsum(mp.power(n, -s) for n in range(1, N + 1))
        tail = float(mp.mpf(N) ** (1 - x) / (x - 1))
        got = f_eval(ZETA, s, PrecisionConfig(working_digits=20, target_abs_err=1e-12))
        assert abs(got.value - direct) <= got.err + tail


def test_zeta_known_values():
    with mp.workdps(30):
        assert abs(f_eval(ZETA, 2, P30).value - mp.pi ** 2 / 6) < 1e-25
        # L(1, chi4) = pi / 4
        assert abs(f_eval(CHI4, 1, P30).value - mp.pi / 4) < 1e-25


def test_xi_real_on_critical_line():
    v = xi_F_eval(ZETA, complex(0.5, 3), P30)
    assert abs(mp.im(v.value)) <= v.err + 1e-28
    # xi(1/2) for the chosen normalisation is about 0.497
    assert abs(xi_F_eval(ZETA, 0.5, P30).value - mp.mpf("0.4971207781883141")) < 1e-15


def test_pole_is_reported():
    with pytest.raises(PoleError):
        f_eval(ZETA, 1, P30)


def test_xi_finite_at_pole():
    v = xi_F_eval(ZETA, 1, P30)
    assert abs(v.value - mp.mpf("0.5")) < 1e-20


@given(st.integers(min_value=1, max_value=10**6))
def test_coeff_total_and_pure(n):
    for spec in (ZETA, CHI4):
        assert coeff(spec, n) == coeff(spec, n)
    assert coeff(CHI4, n) == (1, 0, -1, 0)[(n - 1) % 4]


@given(st.lists(st.integers(min_value=-3, max_value=3), min_size=1, max_size=8).filter(any))
def test_config_round_trip(values):
    spec = spec_from_parts("p", values, True, 1, "2/sqrt(pi)", 0, [(0.5, 0.5)], "SeriesOnly", bound=3.0)
    cfg = json.loads(json.dumps(spec.to_config()))
    back = LFunctionSpec.from_config(cfg)
    assert back == spec
    assert back.digest() == spec.digest()


def test_resolve_spec_from_file(tmp_path):
    path = tmp_path / "z.json"
    path.write_text(json.dumps(ZETA.to_config()))
    assert resolve_spec(str(path)).digest() == ZETA.digest()
    assert resolve_spec("chi4") is CHI4


def test_series_only_region():
    spec = spec_from_parts("sq", [1, 4, 9, 16], True, 1, "1", 0, [(0.5, 0)], "SeriesOnly")
    with pytest.raises(DomainError):
        f_eval(spec, complex(2, 1), P30)
    # |a_n| <= c n^2 with c = 1 holds for these periodic values
    v = f_eval(spec, complex(12, 1), PrecisionConfig(working_digits=20, target_abs_err=1e-8))
    assert abs(v.value - 1) < 0.05


def test_target_is_enforced():
    with pytest.raises(PrecisionError):
        f_eval(ZETA, complex(0.5, 10), PrecisionConfig(working_digits=15, target_abs_err=1e-40))
