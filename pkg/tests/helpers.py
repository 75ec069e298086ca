"""Shared construction helpers for the test suites."""

import math

from polspec.model import DrivePulse, LatticeModel, derive_scales

TWO_PI = 2.0 * math.pi


def make_setup(v1_khz, v2_khz=None, parity="even", temperature_uk=0.0):
    """LatticeModel + DerivedScales from depths in kHz and temperature in uK."""
    if v2_khz is None:
        v2_khz = v1_khz
    model = LatticeModel(
        v1=TWO_PI * 1e3 * v1_khz,
        v2=TWO_PI * 1e3 * v2_khz,
        parity=parity,
        temperature=1e-6 * temperature_uk,
    )
    return model, derive_scales(model)


def gaussian_pulse(tau_fwhm_us=20.0, area_over_pi=None, omega0=None):
    return DrivePulse.gaussian(
        tau_fwhm=1e-6 * tau_fwhm_us, area_over_pi=area_over_pi, omega0=omega0
    )
