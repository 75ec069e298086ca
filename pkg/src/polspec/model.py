"""Lattice, drive and derived-scale definitions.

Internal conventions used across the package:

* every frequency-like quantity (lattice depths ``v1``/``v2``, Rabi amplitude,
  detuning, recoil and thermal scales) is an angular frequency in rad/s,
* times are in seconds, temperatures in kelvin, lengths in meters,
* momenta are dimensionless, ``beta = p / (hbar k)`` with ``k = 2 pi / lambda``.

Configuration front-ends convert human units (kHz, us, uK, nm) exactly once;
nothing below this module ever sees a non-SI number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants as const
from scipy.special import erf

EVEN = "even"
ODD = "odd"
PARITIES = (EVEN, ODD)

# Rb-85 atomic mass (AME2020), kg.
RB85_MASS = 84.911789738 * const.atomic_mass

DEFAULT_WAVELENGTH = 1064e-9


@dataclass(frozen=True)
class LatticeModel:
    """Two internal levels sharing a one-dimensional ponderomotive lattice.

    Parameters
    ----------
    v1, v2 : float
        Lattice modulation depths of the lower/upper level, rad/s.
    parity : str
        ``"even"`` couples with the cos(2kz) drive quadrature, ``"odd"``
        with sin(2kz).
    temperature : float
        Ensemble temperature in K (0 is allowed and means a single beta=0
        momentum class).
    wavelength : float
        Lattice beam wavelength in m; the lattice period is lambda/2.
    mass : float
        Atomic mass in kg.
    """

    v1: float
    v2: float
    parity: str = EVEN
    temperature: float = 0.0
    wavelength: float = DEFAULT_WAVELENGTH
    mass: float = RB85_MASS

    def __post_init__(self) -> None:
        if self.parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}, got {self.parity!r}")
        if self.v1 < 0 or self.v2 < 0:
            raise ValueError("lattice depths must be non-negative")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.wavelength <= 0 or self.mass <= 0:
            raise ValueError("wavelength and mass must be positive")

    @property
    def is_magic(self) -> bool:
        return self.v1 == self.v2


@dataclass(frozen=True)
class DerivedScales:
    """Frequency/momentum scales derived from a :class:`LatticeModel`.

    ``omega_k`` is the two-photon recoil 2 hbar k^2 / m; ``omega_t`` the
    thermal scale k_B T / hbar; ``sigma_beta`` the standard deviation of the
    Maxwell distribution in beta units; ``trap_omega1/2`` the harmonic
    angular frequencies 2 k sqrt(hbar V / m) at the well bottoms (0 for a
    free level), with ``trap_f1/2`` the same in Hz.
    """

    k: float
    omega_k: float
    omega_t: float
    sigma_beta: float
    trap_omega1: float
    trap_omega2: float

    @property
    def trap_f1(self) -> float:
        return self.trap_omega1 / (2.0 * math.pi)

    @property
    def trap_f2(self) -> float:
        return self.trap_omega2 / (2.0 * math.pi)


def derive_scales(model: LatticeModel) -> DerivedScales:
    """Compute recoil, thermal and trap scales for ``model``.

    Returns
    -------
    DerivedScales
        All members in rad/s except ``k`` (rad/m) and ``sigma_beta``
        (dimensionless).
    """
    k = 2.0 * math.pi / model.wavelength
    omega_k = 2.0 * const.hbar * k * k / model.mass
    omega_t = const.k * model.temperature / const.hbar
    sigma_beta = math.sqrt(2.0 * omega_t / omega_k)
    trap1 = 2.0 * k * math.sqrt(const.hbar * model.v1 / model.mass)
    trap2 = 2.0 * k * math.sqrt(const.hbar * model.v2 / model.mass)
    return DerivedScales(
        k=k,
        omega_k=omega_k,
        omega_t=omega_t,
        sigma_beta=sigma_beta,
        trap_omega1=trap1,
        trap_omega2=trap2,
    )


def pi_pulse_amplitude(tau0: float) -> float:
    """Rabi amplitude giving unit pulse area pi for a Gaussian envelope.

    The envelope exp(-(t - t_p/2)^2 / tau0^2) integrates to tau0 sqrt(pi)
    over the full line, so Omega0 = sqrt(pi) / tau0.
    """
    if tau0 <= 0:
        raise ValueError("tau0 must be positive")
    return math.sqrt(math.pi) / tau0


@dataclass(frozen=True)
class DrivePulse:
    """Gaussian amplitude-modulation pulse Omega(t) = omega0 exp(-(t-t_p/2)^2/tau0^2).

    ``t_total`` is the propagation window [0, t_total]; the envelope peaks at
    its midpoint.  ``omega0`` is in rad/s, times in s.
    """

    omega0: float
    tau0: float
    t_total: float

    def __post_init__(self) -> None:
        if self.tau0 <= 0 or self.t_total <= 0:
            raise ValueError("tau0 and t_total must be positive")
        if self.omega0 < 0:
            raise ValueError("omega0 must be non-negative")

    @classmethod
    def gaussian(
        cls,
        tau_fwhm: float | None = None,
        tau0: float | None = None,
        omega0: float | None = None,
        area_over_pi: float | None = None,
        t_total_factor: float = 10.0,
    ) -> "DrivePulse":
        """Build a pulse from either tau_fwhm or tau0 plus an amplitude rule.

        Exactly one of ``tau_fwhm``/``tau0`` must be given.  If ``omega0`` is
        omitted the amplitude defaults to a pi pulse, optionally scaled by
        ``area_over_pi``; passing both ``omega0`` and ``area_over_pi`` is an
        error (two amplitude prescriptions).
        """
        if (tau_fwhm is None) == (tau0 is None):
            raise ValueError("give exactly one of tau_fwhm or tau0")
        if tau0 is None:
            if tau_fwhm <= 0:
                raise ValueError("tau_fwhm must be positive")
            tau0 = tau_fwhm / (2.0 * math.sqrt(math.log(2.0)))
        if omega0 is not None and area_over_pi is not None:
            raise ValueError("omega0 and area_over_pi are mutually exclusive")
        if omega0 is None:
            omega0 = pi_pulse_amplitude(tau0)
            if area_over_pi is not None:
                omega0 *= area_over_pi
        return cls(omega0=omega0, tau0=tau0, t_total=t_total_factor * tau0)

    @property
    def tau_fwhm(self) -> float:
        return 2.0 * math.sqrt(math.log(2.0)) * self.tau0

    def envelope(self, t) -> np.ndarray:
        """Omega(t) for scalar or array ``t`` inside [0, t_total]."""
        t = np.asarray(t, dtype=float)
        x = (t - 0.5 * self.t_total) / self.tau0
        return self.omega0 * np.exp(-x * x)

    def area(self) -> float:
        """Integral of Omega(t) over [0, t_total] (the pulse area)."""
        return (
            self.omega0
            * self.tau0
            * math.sqrt(math.pi)
            * float(erf(0.5 * self.t_total / self.tau0))
        )

    def envelope_sq_integral(self) -> float:
        """Integral of the squared envelope over [0, t_total], divided by omega0^2."""
        return (
            self.tau0
            * math.sqrt(math.pi / 2.0)
            * float(erf(self.t_total / (math.sqrt(2.0) * self.tau0)))
        )


def envelope(pulse: DrivePulse, t) -> np.ndarray:
    """Module-level alias for :meth:`DrivePulse.envelope`."""
    return pulse.envelope(t)
