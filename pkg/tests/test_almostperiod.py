import math

import pytest
from hypothesis import given, strategies as st

from xideform.almostperiod import dominant_terms, find_shifts, screening_bound, verify_shift
from xideform.errors import NoShiftFoundError
from xideform.selberg import ZETA, spec_from_parts
from xideform.zerofind import Rect

STRIP = Rect(-0.3, -0.2, 0.0, 50.0)
ONE = spec_from_parts("one", [1], False, 1, "1", 0, [(0.5, 0)], "SeriesOnly")
# 1 + 2^-s: exact period 2 pi / log 2 in the imaginary direction
TWO = spec_from_parts("two", [1, 1], False, 1, "1", 0, [(0.5, 0)], "SeriesOnly")


@given(st.floats(min_value=1.0, max_value=1e4))
def test_single_term_admits_every_shift(tau):
    chk = verify_shift(ONE, -1.0, STRIP, tau, 1e-3)
    assert chk.passed and chk.sup_sampled == 0.0


def test_two_terms_find_period():
    found = find_shifts(TWO, -1.0, STRIP, 0.05, 40.0)
    period = 2 * math.pi / math.log(2)
    k = round(found[0].tau / period)
    assert k >= 1
    assert abs(found[0].tau - k * period) < 0.05


@pytest.mark.parametrize("eps", [0.05, 0.1])
def test_shift_quality_monotone_in_epsilon(eps):
    for rec in find_shifts(TWO, -1.0, STRIP, eps, 100.0, count=3):
        assert verify_shift(TWO, -1.0, STRIP, rec.tau, 2 * eps).passed
        assert verify_shift(TWO, -1.0, STRIP, rec.tau, eps, grid_density=2.0).passed


def test_screening_bounds_actual_difference():
    # D(tau) plus the tail is an upper bound for the sampled sup
    N = dominant_terms(ZETA, -1.0, STRIP.x_lo, 0.2)
    for tau in (3.0, 17.5, 1234.5):
        D = float(screening_bound(ZETA, -1.0, STRIP.x_lo, N, [tau])[0])
        chk = verify_shift(ZETA, -1.0, STRIP, tau, 0.2)
        assert chk.sup_sampled <= D + 0.2 / 2


def test_failure_reports_best_candidate():
    with pytest.raises(NoShiftFoundError) as info:
        find_shifts(ZETA, -1.0, STRIP, 0.2, 2000.0)
    assert info.value.best_sup > 0.2
    assert 1.0 <= info.value.best_tau <= 2000.0


def test_argument_checks():
    with pytest.raises(ValueError):
        find_shifts(ZETA, -1.0, STRIP, -1.0, 10.0)
    with pytest.raises(ValueError):
        find_shifts(ZETA, -1.0, STRIP, 0.1, math.inf)
