"""Analysis helpers: Bessel ladder, drive harmonics, peak/dip extraction."""

import json
import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal
from scipy.special import jv

from polspec.diagnostics import (
    analyze_spectrum,
    bessel_jn,
    harmonic_line_positions,
    jacobi_anger_amplitudes,
    side_integrals,
)
from polspec.ensemble import Spectrum

from helpers import TWO_PI, make_setup

# 2 J_2(1.0), frozen from scipy.special.jv
TWO_J2_AT_1 = 0.229806969863801


def test_bessel_matches_reference():
    for x in (0.3, 1.0, 2.0, 3.7, 8.5, -2.2, 0.0):
        got = bessel_jn(40, x)
        expected = jv(np.arange(41), x)
        np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-13)


def test_bessel_anchor_values():
    assert 2.0 * bessel_jn(2, 1.0)[2] == pytest.approx(TWO_J2_AT_1, rel=1e-10)
    zero = bessel_jn(6, 0.0)
    assert zero[0] == pytest.approx(1.0, abs=1e-14)
    assert np.abs(zero[1:]).max() < 1e-14


def test_drive_harmonics_resum_to_cosine():
    # c0 + sum_p c_p cos(2 p phi) reconstructs cos(x cos phi)
    phi = np.linspace(0.0, 2.0 * math.pi, 181)
    for x in (0.5, 1.7, 3.0):
        coeffs = jacobi_anger_amplitudes(z1=0.5 * x, k=1.0, max_order=20)
        orders = 2.0 * np.arange(coeffs.size)
        series = coeffs @ np.cos(orders[:, None] * phi[None, :])
        np.testing.assert_allclose(series, np.cos(x * np.cos(phi)), atol=1e-8)


def test_drive_harmonic_amplitude_scaling():
    # second-harmonic weight grows as the fourth power of the excursion
    lo = jacobi_anger_amplitudes(z1=0.01, k=1.0, max_order=2)[2]
    hi = jacobi_anger_amplitudes(z1=0.02, k=1.0, max_order=2)[2]
    assert math.log2(hi / lo) == pytest.approx(4.0, abs=0.05)


def test_drive_harmonics_validation():
    with pytest.raises(ValueError):
        jacobi_anger_amplitudes(z1=-1.0, k=1.0, max_order=4)
    with pytest.raises(ValueError):
        jacobi_anger_amplitudes(z1=1.0, k=1.0, max_order=-1)


def _exact_well_levels(depth, scales, count):
    # independent dense diagonalization of the single-level ladder at p0 = 0
    n = np.arange(-40, 41)
    diag = scales.omega_k * (0.5 * 0.0 + n) ** 2
    off = np.full(n.size - 1, 0.5 * depth)
    lam = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))[0]
    return lam


def test_line_positions_match_exact_levels():
    model, scales = make_setup(250.0)
    pred = harmonic_line_positions(model, scales, nu_max=3, delta_nus=(2,))
    levels = _exact_well_levels(model.v1, scales, 6)
    for nu in range(4):
        exact = levels[nu + 2] - levels[nu]
        assert pred[2][nu] == pytest.approx(exact, rel=0.03)
    # anharmonicity pulls successive lines down
    assert np.all(np.diff(pred[2]) < 0.0)


def test_line_positions_nonmagic_offset():
    model, scales = make_setup(250.0, 200.0)
    pred = harmonic_line_positions(model, scales, nu_max=3, delta_nus=(0,))
    lev1 = _exact_well_levels(model.v1, scales, 4)
    lev2 = _exact_well_levels(model.v2, scales, 4)
    for nu in range(4):
        exact = lev2[nu] - lev1[nu]
        assert pred[0][nu] == pytest.approx(exact, rel=0.10)
    # carrier lines sit near (V1 - V2) + (nu + 1/2)(trap2 - trap1)
    base = (model.v1 - model.v2) + 0.5 * (scales.trap_omega2 - scales.trap_omega1)
    assert pred[0][0] == pytest.approx(base, rel=1e-6)


def test_shallow_well_warns():
    model, scales = make_setup(12.5)
    with pytest.warns(UserWarning):
        harmonic_line_positions(model, scales, nu_max=1)


def _gaussian(x, center, sigma, height):
    return height * np.exp(-0.5 * ((x - center) / sigma) ** 2)


def test_peak_extraction_on_synthetic_lines():
    x = np.linspace(-10.0, 10.0, 801)
    y = (
        _gaussian(x, 0.0, 0.5, 0.8)
        + _gaussian(x, 3.0, 0.4, 1.0)
        + _gaussian(x, -3.0, 0.4, 0.6)
    )
    spec = Spectrum(model="synthetic", deltas=x, values=y)
    out = analyze_spectrum(spec)
    assert out.peak_positions.size == 3
    np.testing.assert_allclose(np.sort(out.peak_positions), [-3.0, 0.0, 3.0], atol=0.02)
    order = np.argsort(out.peak_positions)
    np.testing.assert_allclose(out.peak_heights[order], [0.6, 0.8, 1.0], rtol=0.02)
    fwhm = 2.0 * math.sqrt(2.0 * math.log(2.0))
    np.testing.assert_allclose(
        out.peak_fwhms[order], [0.4 * fwhm, 0.5 * fwhm, 0.4 * fwhm], rtol=0.03
    )
    assert not out.dip_at_zero


def test_dip_detection_on_synthetic_echo():
    x = np.linspace(-6.0, 6.0, 481)
    y = _gaussian(x, 1.5, 0.7, 0.5) + _gaussian(x, -1.5, 0.7, 0.5) + 0.01
    spec = Spectrum(model="synthetic", deltas=x, values=y)
    out = analyze_spectrum(spec, dip_search=8)
    assert out.dip_at_zero
    assert out.dip_position == pytest.approx(0.0, abs=0.05)
    flank = y.max()
    expected_depth = 1.0 - y[np.argmin(np.abs(x))] / flank
    assert out.dip_depth == pytest.approx(expected_depth, abs=0.05)


def test_flat_spectrum_has_no_features():
    x = np.linspace(-1.0, 1.0, 101)
    out = analyze_spectrum(Spectrum(model="synthetic", deltas=x, values=np.ones(101)))
    assert out.peak_positions.size == 0
    assert not out.dip_at_zero


def test_subline_matching():
    predicted = np.array([5.0, 4.6, 4.2, 3.8])
    x = np.linspace(2.0, 6.0, 801)
    y = np.full(x.size, 1e-4)
    for nu, (pos, height) in enumerate(zip(predicted, [0.2, 0.4, 0.6, 0.8])):
        y += _gaussian(x, pos, 0.05, height)
    spec = Spectrum(model="synthetic", deltas=x, values=y)
    out = analyze_spectrum(spec, subline_positions=predicted, subline_start_nu=2)
    nus = [nu for nu, _, _ in out.sublines]
    assert nus == [2, 3, 4, 5]
    for (_, found_pos, _), pos in zip(out.sublines, predicted):
        assert found_pos == pytest.approx(pos, abs=0.02)
    payload = json.dumps(out.to_dict())
    assert "NaN" not in payload


def test_side_integrals_on_known_shape():
    x = np.linspace(-1.0, 1.0, 201)
    y = np.where(x >= 0.0, 2.0 * x, -x)
    err = np.full(x.size, 0.01)
    spec = Spectrum(model="synthetic", deltas=x, values=y, stderr=err)
    out = side_integrals(spec)
    red = np.trapezoid(y[x <= 0.0], x[x <= 0.0])
    blue = np.trapezoid(y[x >= 0.0], x[x >= 0.0])
    assert out["red"] == pytest.approx(red, rel=1e-12)
    assert out["blue"] == pytest.approx(blue, rel=1e-12)
    # trapezoid error propagation on the blue slice
    xs = x[x >= 0.0]
    w = np.gradient(xs)
    w[0] = 0.5 * (xs[1] - xs[0])
    w[-1] = 0.5 * (xs[-1] - xs[-2])
    expected_err = 0.01 * math.sqrt(float((w**2).sum()))
    assert out["blue_err"] == pytest.approx(expected_err, rel=1e-6)
