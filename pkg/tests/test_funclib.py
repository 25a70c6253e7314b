import math

import numpy as np
import pytest
from scipy import special

from qetprep.errors import DomainError
from qetprep.funclib import (FourierSeries, FunctionSpec, bessel_i0, cosine_series,
                             cycloid_fourier_coeffs, cycloid_phase, evaluate,
                             fourier_l2_error, taylor_coeffs)


def test_bessel_i0_at_one():
    assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-15, abs=1e-15)


def test_bessel_i0_at_zero_is_one():
    assert bessel_i0(0.0) == 1.0


@pytest.mark.parametrize("z", [0.3, 2.0, 10.0, 50.0, 300.0])
def test_bessel_i0_against_scipy(z):
    assert bessel_i0(z) == pytest.approx(special.i0(z), rel=1e-13)


def test_bessel_i0_vectorised():
    zs = np.array([0.0, 1.0, 5.0])
    np.testing.assert_allclose(bessel_i0(zs), special.i0(zs), rtol=1e-14)


def test_bessel_i0_overflow_and_negative():
    with pytest.raises(OverflowError):
        bessel_i0(1000.0)
    with pytest.raises(DomainError):
        bessel_i0(-1.0)


def test_kaiser_endpoints():
    spec = FunctionSpec.kaiser(5.0)
    assert evaluate(spec, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert evaluate(spec, 1.0) == pytest.approx(1.0 / special.i0(5.0), rel=1e-13)


def test_gaussian_values_and_max():
    spec = FunctionSpec.gaussian(4.0)
    assert evaluate(spec, 0.5) == pytest.approx(math.exp(-0.5))
    assert spec.max_abs == pytest.approx(1.0)
    assert spec.parity == "even"


def test_tanh_max_abs_and_parity():
    spec = FunctionSpec.tanh()
    assert spec.max_abs == pytest.approx(math.tanh(1.0), rel=1e-12)
    assert spec.parity == "none"
    assert FunctionSpec.tanh((-1.0, 1.0)).parity == "odd"


def test_domain_error_and_extension():
    spec = FunctionSpec.tanh()
    with pytest.raises(DomainError):
        evaluate(spec, 1.5)
    assert evaluate(spec, 1.5, extend=True) == pytest.approx(math.tanh(1.5))


def test_cycloid_never_extends():
    with pytest.raises(DomainError):
        evaluate(FunctionSpec.cycloid(), 7.0, extend=True)


def test_cycloid_landmarks():
    spec = FunctionSpec.cycloid()
    assert evaluate(spec, math.pi) == pytest.approx(1.0, abs=1e-12)
    assert evaluate(spec, 0.0) == pytest.approx(0.0, abs=1e-12)
    xs = np.linspace(0.1, 3.0, 7)
    np.testing.assert_allclose(evaluate(spec, xs), evaluate(spec, 2 * math.pi - xs), atol=1e-11)


def test_cycloid_phase_inverts_map():
    ts = np.linspace(0.0, 2 * math.pi, 101)
    xs = ts - np.sin(ts)
    np.testing.assert_allclose(cycloid_phase(xs) - np.sin(cycloid_phase(xs)), xs, atol=1e-12)


def test_spec_json_round_trip():
    spec = FunctionSpec.series([1.0, -2.0, 0.5], center=0.2, domain=(0.0, 1.0))
    again = FunctionSpec.from_json(spec.to_json())
    assert again == spec


def test_tanh_taylor_coefficients_exact():
    c = taylor_coeffs(FunctionSpec.tanh(), 0.0, 8)
    np.testing.assert_allclose(c, [0, 1, 0, -1 / 3, 0, 2 / 15, 0, -17 / 315], atol=1e-16)


def test_tanh_taylor_off_centre_matches_derivatives():
    x0 = 0.4
    c = taylor_coeffs(FunctionSpec.tanh(), x0, 3)
    t = math.tanh(x0)
    np.testing.assert_allclose(c, [t, 1 - t * t, -t * (1 - t * t)], rtol=1e-14)


def test_gaussian_taylor_shift_matches_function():
    spec = FunctionSpec.gaussian(2.0)
    c = taylor_coeffs(spec, 0.3, 40)
    h = 0.2
    assert np.polynomial.polynomial.polyval(h, c) == pytest.approx(evaluate(spec, 0.5), rel=1e-13)


def test_kaiser_taylor_sums_to_window():
    spec = FunctionSpec.kaiser(3.0)
    c = taylor_coeffs(spec, 0.0, 60)
    for x in (0.0, 0.4, 0.9):
        assert np.polynomial.polynomial.polyval(x, c) == pytest.approx(evaluate(spec, x),
                                                                      rel=1e-12)


def test_series_shift():
    spec = FunctionSpec.series([1.0, 2.0, 3.0], center=1.0, domain=(0.0, 2.0))
    c = taylor_coeffs(spec, 0.0, 3)
    # 1 + 2(x-1) + 3(x-1)^2 = 2 - 4x + 3x^2
    np.testing.assert_allclose(c, [2.0, -4.0, 3.0])


def test_cycloid_has_no_taylor_series():
    with pytest.raises(ValueError):
        taylor_coeffs(FunctionSpec.cycloid(), 0.0, 3)


def test_cosine_series_recovers_cosines():
    f = lambda x: 0.3 + np.cos(x) - 0.25 * np.cos(3 * x)  # noqa: E731
    s = cosine_series(f, (0.0, 2 * math.pi), 5, grid_size=256)
    np.testing.assert_allclose(s.coeffs, [0.3, 1.0, 0.0, -0.25, 0.0, 0.0], atol=1e-14)


def test_cycloid_series_constant_term():
    s = cycloid_fourier_coeffs(10)
    # Mean of the cycloid height over one arch is 3/4.
    assert s.coeffs[0] == pytest.approx(0.75, abs=1e-6)


def test_cycloid_series_error_decreases():
    e1 = fourier_l2_error(cycloid_fourier_coeffs(1))
    e120 = fourier_l2_error(cycloid_fourier_coeffs(120))
    assert e120 < 1e-3 < e1


def test_fourier_series_json_round_trip():
    s = cycloid_fourier_coeffs(6)
    again = FourierSeries.from_json(s.to_json())
    np.testing.assert_array_equal(again.coeffs, s.coeffs)
    assert again.domain == s.domain
