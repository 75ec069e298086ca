"""Unit anchors for the model layer: recoil, trap and thermal scales, pulses."""

import math

import numpy as np
import pytest
from scipy import constants as const

from polspec.model import (
    DrivePulse,
    LatticeModel,
    derive_scales,
    pi_pulse_amplitude,
)

from helpers import TWO_PI, make_setup

# Frozen from 2 hbar k^2 / m with CODATA constants, 85Rb (84.911789738 u)
# at 1064 nm; equals 2 pi x 8302.06 Hz.
OMEGA_K = 52163.358408312444
# Frozen from 2 k sqrt(hbar V / m) at V = 2 pi x 1.25 MHz (Hz).
TRAP_F_DEEP = 144066.4459455871
# 20 us FWHM Gaussian: tau0 = FWHM / (2 sqrt(ln 2)).
TAU0_20US = 1.20112240878645e-05
# sqrt(pi) / tau0 for the 20 us pulse.
OMEGA0_PI_20US = 147566.46266356055
# k_B T / (hbar omega_k) at T = 1 uK.
THERMAL_RATIO_1UK = 2.5098142282596267


def test_recoil_frequency_value():
    model, scales = make_setup(1250.0)
    assert scales.omega_k == pytest.approx(OMEGA_K, rel=1e-12)
    # quoted rounded value 2 pi x 8.300 kHz (vacuum-wavelength convention)
    assert abs(scales.omega_k / (TWO_PI * 8300.0) - 1.0) < 5e-4


def test_recoil_scaling_with_wavelength_and_mass():
    base = derive_scales(LatticeModel(v1=1e5, v2=1e5))
    half_lambda = derive_scales(LatticeModel(v1=1e5, v2=1e5, wavelength=532e-9))
    assert half_lambda.omega_k == pytest.approx(4.0 * base.omega_k, rel=1e-12)
    heavy = derive_scales(
        LatticeModel(v1=1e5, v2=1e5, mass=2.0 * 84.911789738 * const.atomic_mass)
    )
    assert heavy.omega_k == pytest.approx(0.5 * base.omega_k, rel=1e-12)


def test_trap_frequency_values():
    _, deep = make_setup(1250.0)
    assert deep.trap_f1 == pytest.approx(TRAP_F_DEEP, rel=1e-12)
    assert deep.trap_f2 == pytest.approx(TRAP_F_DEEP, rel=1e-12)
    # 12.5 kHz depth is 100x shallower -> exactly 10x lower trap frequency
    _, shallow = make_setup(12.5)
    assert shallow.trap_f1 == pytest.approx(TRAP_F_DEEP / 10.0, rel=1e-12)


def test_trap_frequency_square_root_scaling():
    rng = np.random.default_rng(11)
    for _ in range(6):
        v = rng.uniform(1e4, 1e7)
        s1 = derive_scales(LatticeModel(v1=v, v2=v))
        s4 = derive_scales(LatticeModel(v1=4.0 * v, v2=4.0 * v))
        assert s4.trap_omega1 == pytest.approx(2.0 * s1.trap_omega1, rel=1e-12)


def test_free_level_has_zero_trap_frequency():
    scales = derive_scales(LatticeModel(v1=1e5, v2=0.0))
    assert scales.trap_omega2 == 0.0
    assert scales.trap_f2 == 0.0


def test_thermal_scale_anchors():
    for t_uk, ratio in ((1.0, THERMAL_RATIO_1UK), (100.0, 100.0 * THERMAL_RATIO_1UK)):
        _, scales = make_setup(12.5, temperature_uk=t_uk)
        assert scales.omega_t / scales.omega_k == pytest.approx(ratio, rel=1e-12)
        assert scales.sigma_beta == pytest.approx(math.sqrt(2.0 * ratio), rel=1e-12)
    _, cold = make_setup(12.5, temperature_uk=0.0)
    assert cold.omega_t == 0.0
    assert cold.sigma_beta == 0.0


def test_model_validation():
    with pytest.raises(ValueError):
        LatticeModel(v1=-1.0, v2=1.0)
    with pytest.raises(ValueError):
        LatticeModel(v1=1.0, v2=1.0, parity="both")
    with pytest.raises(ValueError):
        LatticeModel(v1=1.0, v2=1.0, temperature=-1e-6)
    with pytest.raises(ValueError):
        LatticeModel(v1=1.0, v2=1.0, wavelength=0.0)
    with pytest.raises(ValueError):
        LatticeModel(v1=1.0, v2=1.0, mass=-1.0)
    assert LatticeModel(v1=1.0, v2=1.0).is_magic
    assert not LatticeModel(v1=1.0, v2=0.5).is_magic


def test_pulse_from_fwhm():
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    assert pulse.tau0 == pytest.approx(TAU0_20US, rel=1e-12)
    assert pulse.tau_fwhm == pytest.approx(20e-6, rel=1e-12)
    assert pulse.omega0 == pytest.approx(OMEGA0_PI_20US, rel=1e-12)
    assert pulse.t_total == pytest.approx(10.0 * pulse.tau0, rel=1e-12)


def test_pulse_argument_validation():
    with pytest.raises(ValueError):
        DrivePulse.gaussian(tau_fwhm=20e-6, tau0=12e-6)
    with pytest.raises(ValueError):
        DrivePulse.gaussian()
    with pytest.raises(ValueError):
        DrivePulse.gaussian(tau_fwhm=20e-6, omega0=1e5, area_over_pi=0.5)
    with pytest.raises(ValueError):
        DrivePulse.gaussian(tau_fwhm=-1e-6)
    with pytest.raises(ValueError):
        DrivePulse(omega0=-1.0, tau0=1e-5, t_total=1e-4)
    with pytest.raises(ValueError):
        DrivePulse(omega0=1.0, tau0=0.0, t_total=1e-4)
    with pytest.raises(ValueError):
        pi_pulse_amplitude(0.0)


def test_envelope_shape():
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    mid = 0.5 * pulse.t_total
    assert pulse.envelope(mid) == pytest.approx(pulse.omega0, rel=1e-12)
    half = pulse.envelope(np.array([mid - 10e-6, mid + 10e-6]))
    np.testing.assert_allclose(half, 0.5 * pulse.omega0, rtol=1e-12)
    # window spans +-5 tau0, so the clipped tails are ~exp(-25)
    assert pulse.envelope(0.0) < 1e-10 * pulse.omega0
    assert pulse.envelope(pulse.t_total) < 1e-10 * pulse.omega0


def test_pulse_area():
    assert DrivePulse.gaussian(tau_fwhm=20e-6).area() == pytest.approx(
        math.pi, abs=1e-6
    )
    assert DrivePulse.gaussian(tau0=240e-6, area_over_pi=0.2).area() == pytest.approx(
        0.2 * math.pi, abs=1e-6
    )
    rng = np.random.default_rng(3)
    for _ in range(5):
        pulse = DrivePulse.gaussian(tau0=rng.uniform(1e-6, 1e-3))
        assert pulse.area() == pytest.approx(math.pi, rel=1e-9)


def test_envelope_sq_integral_matches_quadrature():
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    t = np.linspace(0.0, pulse.t_total, 200001)
    g2 = (pulse.envelope(t) / pulse.omega0) ** 2
    assert pulse.envelope_sq_integral() == pytest.approx(
        np.trapezoid(g2, t), rel=1e-9
    )
