import numpy as np
import pytest
from hypothesis import assume, example, given, strategies as st
from mpmath import mp

from xideform.deform import f_t_eval
from xideform.errors import BoundaryZeroError
from xideform.precision import PrecisionConfig
from xideform.selberg import CHI4, ZETA
from xideform.xieval import RatioEvaluator
from xideform.zerofind import (
    MARGIN, FtEvaluator, Rect, _circle_data, count_zeros, locate_zeros, newton, phase_scan_count, rouche_certify,
)

F = FtEvaluator(ZETA, -1.0)
BOX = Rect(-1.0, 1.0, -1.0, 1.0)


def poly(roots):
    roots = np.asarray(roots, dtype=complex)

    def f(s):
        s = np.asarray(s, dtype=complex)
        return np.prod(s[..., None] - roots, axis=-1)
    return f


point = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))


def _margin(z, rect):
    return min(z.real - rect.x_lo, rect.x_hi - z.real, z.imag - rect.y_lo, rect.y_hi - z.imag)


@given(st.lists(point, min_size=1, max_size=6))
def test_polynomial_count(roots):
    assume(all(abs(_margin(z, BOX)) > 0.02 for z in roots))
    inside = sum(1 for z in roots if BOX.contains(z))
    assert count_zeros(poly(roots), BOX) == inside


@given(st.lists(point, min_size=1, max_size=5))
@example([0j, -1.5 + 0j, -0.5 + 0j])  # root on the first split lines
def test_polynomial_locate(roots):
    assume(all(abs(_margin(z, BOX)) > 0.02 for z in roots))
    assume(all(abs(a - b) > 0.01 for i, a in enumerate(roots) for b in roots[i + 1:]))
    found = locate_zeros(poly(roots), BOX, tol=1e-12)
    inside = [z for z in roots if BOX.contains(z)]
    assert len(found) == len(inside)
    for z in inside:
        assert min(abs(rec.center - z) for rec in found) < 1e-8


def test_boundary_zero_is_jittered():
    f = poly([0.5 + 1.0j, 0.1j])
    assert count_zeros(f, BOX) in (1, 2)


def test_persistent_boundary_zero_raises():
    # a zero on every jittered boundary is impossible to avoid for the identically zero function
    with pytest.raises(BoundaryZeroError):
        count_zeros(lambda s: np.zeros(np.shape(s), dtype=complex), BOX)


def test_newton_quadratic():
    rec = newton(poly([0.3 + 0.2j]), 0.5 + 0.5j, 1e-14)
    st_ = rec.step_sizes
    assert rec.converged and abs(rec.center - (0.3 + 0.2j)) < 1e-12
    # step ratios |e_{k+1}| / |e_k|^2 stay bounded once close
    assert st_[-2] < 1e-3 or len(st_) <= 3


@pytest.mark.parametrize("rect", [Rect(-1.0, 0.5, 20.0, 24.0), Rect(-0.5, 1.0, 101.0, 105.5), Rect(-2.0, 1.0, 60.0, 61.5)])
def test_count_agrees_with_phase_scan(rect):
    assert count_zeros(F, rect) == phase_scan_count(F, rect)


@given(st.floats(min_value=0.05, max_value=0.95))
def test_count_additive_under_split(frac):
    rect = Rect(-0.8, 0.4, 40.0, 48.0)
    ym = rect.y_lo + frac * rect.height
    lo, hi = Rect(rect.x_lo, rect.x_hi, rect.y_lo, ym), Rect(rect.x_lo, rect.x_hi, ym, rect.y_hi)
    try:
        parts = count_zeros(F, lo) + count_zeros(F, hi)
    except BoundaryZeroError:
        assume(False)
    assert count_zeros(F, rect) == parts


def test_located_zeros_recheck():
    zs = locate_zeros(F, Rect(-0.3, -0.2, 100.0, 120.0))
    assert zs
    prec = PrecisionConfig(working_digits=20, target_abs_err=1e-12)
    for z in zs:
        assert z.residual <= 1e-10
        v = f_t_eval(ZETA, -1, z.center, prec)
        assert abs(v.value) <= 1e-10 + v.err


def test_certificate_recheck_on_finer_circle():
    f = FtEvaluator(CHI4, -1.0)
    zs = locate_zeros(f, Rect(-0.3, -0.2, 55.0, 60.0))
    z = zs[0]
    cert = rouche_certify(CHI4, -1.0, z)
    assert cert.sup_residual < MARGIN * cert.delta
    c = cert.disk_center
    h = RatioEvaluator(CHI4, -1.0, (c.real - 0.1, c.real + 0.1), (c.imag - 0.1, c.imag + 0.1))
    delta, sup, wind = _circle_data(f, h, c, cert.disk_radius, 4 * cert.samples)
    assert wind == 1
    assert sup < MARGIN * delta
    # the xi-plane disk contains J_t of the s-plane circle
    from xideform.deform import j_map_np
    ring = c + cert.disk_radius * np.exp(2j * np.pi * np.arange(256) / 256)
    img = j_map_np(CHI4, -1.0, ring)
    assert np.max(np.abs(img - cert.xi_center)) <= cert.xi_radius


def test_self_certificate_has_zero_sup():
    f = FtEvaluator(ZETA, -1.0)
    z = locate_zeros(f, Rect(-0.3, -0.2, 100.0, 110.0))[0]
    cert = rouche_certify(ZETA, -1.0, z, h_eval=f, f_eval=f)
    assert cert.sup_residual == 0.0 and cert.delta > 0
