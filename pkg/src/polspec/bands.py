"""Bloch bands of the single-level lattice and the golden-rule spectrum.

Each internal level sees a cos-lattice of its own depth; its Bloch problem
on the momentum ladder is a real symmetric tridiagonal eigenproblem per
folded momentum p0 in (-hbar k, hbar k].  Transition rates between band
states of the two levels under the parity-selected drive follow from the
squared ladder coupling and a Gaussian energy-conservation window, summed
over a thermally weighted set of initial states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .ensemble import Spectrum
from .model import EVEN, DerivedScales, DrivePulse, LatticeModel, derive_scales


@dataclass(frozen=True)
class BlochBandSet:
    """Band energies/eigenvectors of one level over the folded-momentum grid.

    ``p0`` is in hbar k units; ``energies[i, ip]`` is the i-th band (rad/s),
    ``vectors[ip, m, i]`` its amplitude on rung ``rungs[m]`` (momentum
    p0 + 2 n hbar k).  ``depth`` is the lattice depth in rad/s; the potential
    maximum sits at +depth.
    """

    depth: float
    p0: np.ndarray
    rungs: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class FgrConfig:
    """Tuning knobs of the golden-rule spectrum.

    ``sigma_e`` (rad/s) is the Gaussian energy-window width, default
    1/tau0; ``extra_bands`` continuum-like bands are retained above the
    ones below the potential maximum.  ``thermal_weight_literal`` switches
    the initial-state weight exponent from (p0 + 2 n0 hbar k)^2 (momentum
    of rung n0, default) to the (p0 + n0 hbar k)^2 variant.
    """

    sigma_e: float | None = None
    saturation_scale: float = 1.0
    thermal_weight_literal: bool = False
    p0_points: int = 200
    extra_bands: int = 8
    band_half_width: int | None = None
    line_weight_cut: float = 1e-12


def compute_bands(
    depth: float,
    scales: DerivedScales,
    n_points: int = 200,
    half_width: int = 16,
    n_bands: int | None = None,
) -> BlochBandSet:
    """Diagonalize the single-level ladder across the folded-momentum grid."""
    if depth < 0:
        raise ValueError("lattice depth must be non-negative")
    if n_points < 2:
        raise ValueError("need at least 2 momentum points")
    p0 = np.linspace(-1.0, 1.0, n_points)
    rungs = np.arange(-half_width, half_width + 1)
    m = rungs.size
    keep = m if n_bands is None else min(n_bands, m)
    energies = np.empty((keep, n_points))
    vectors = np.empty((n_points, m, keep))
    off = np.full(m - 1, 0.5 * depth)
    for ip, q in enumerate(p0):
        diag = scales.omega_k * (0.5 * q + rungs) ** 2
        lam, vec = eigh_tridiagonal(diag, off)
        energies[:, ip] = lam[:keep]
        vectors[ip] = vec[:, :keep]
    return BlochBandSet(
        depth=depth, p0=p0, rungs=rungs, energies=energies, vectors=vectors
    )


def count_bound_bands(bands: BlochBandSet) -> int:
    """Bands lying entirely below the potential maximum +depth."""
    return int(np.sum(bands.energies.max(axis=1) < bands.depth))


def count_tightly_bound_bands(bands: BlochBandSet, width_ratio: float = 0.1) -> int:
    """Bands below +depth with width < width_ratio times the sub-barrier window.

    The potential spans [-depth, +depth], so the energy window available to
    bound motion is 2*depth; a band is "tight" when its tunneling width is a
    small fraction of that window.
    """
    count = 0
    window = 2.0 * bands.depth
    for i in range(bands.energies.shape[0]):
        e = bands.energies[i]
        if e.max() < bands.depth and (e.max() - e.min()) < width_ratio * window:
            count += 1
    return count


def _shifted_sum(vec_a: np.ndarray, vec_b: np.ndarray, parity: str) -> np.ndarray:
    """S[ip, j, i] = sum_n (b*_{n+1} +- b*_{n-1}) a_n for all band pairs."""
    shifted = np.zeros_like(vec_a)
    # sum_n b*_{n+1} a_n = sum_m b*_m a_{m-1};  sum_n b*_{n-1} a_n = sum_m b*_m a_{m+1}
    shifted[:, 1:, :] = vec_a[:, :-1, :]
    if parity == EVEN:
        shifted[:, :-1, :] += vec_a[:, 1:, :]
    else:
        shifted[:, :-1, :] -= vec_a[:, 1:, :]
    return np.einsum("pmj,pmi->pji", vec_b.conj(), shifted)


def coupling_sq(
    bands_a: BlochBandSet,
    bands_b: BlochBandSet,
    i: int,
    i_target: int,
    ip0: int,
    omega: float,
    parity: str,
) -> float:
    """Squared drive matrix element between band i of level 1 and i_target of level 2."""
    if not np.array_equal(bands_a.p0, bands_b.p0) or not np.array_equal(
        bands_a.rungs, bands_b.rungs
    ):
        raise ValueError("band sets live on mismatched grids")
    a = bands_a.vectors[ip0][:, i]
    b = bands_b.vectors[ip0][:, i_target]
    if parity == EVEN:
        s = np.dot(b[1:].conj(), a[:-1]) + np.dot(b[:-1].conj(), a[1:])
    else:
        s = np.dot(b[1:].conj(), a[:-1]) - np.dot(b[:-1].conj(), a[1:])
    return 0.25 * omega**2 * float(np.abs(s) ** 2)


def fgr_probability(
    coupling: np.ndarray,
    delta_e: np.ndarray,
    pulse: DrivePulse,
    sigma_e: float | None = None,
    saturation_scale: float = 1.0,
) -> np.ndarray:
    """Pulse-integrated golden-rule transfer probability.

    ``coupling`` is the squared matrix element at peak amplitude (rad/s)^2,
    ``delta_e`` the energy mismatch E_b - E_a - delta in rad/s.  The rate
    2 pi |V|^2 rho(delta_e) is integrated over the squared envelope; rho is
    a normalized Gaussian of width sigma_e (default 1/tau0).
    """
    if sigma_e is None:
        sigma_e = 1.0 / pulse.tau0
    rho = np.exp(-0.5 * (np.asarray(delta_e) / sigma_e) ** 2) / (
        math.sqrt(2.0 * math.pi) * sigma_e
    )
    # envelope_sq_integral is already normalized by the peak amplitude, so
    # the drive strength enters only through ``coupling``
    g2 = pulse.envelope_sq_integral()
    return saturation_scale * 2.0 * math.pi * np.asarray(coupling) * rho * g2


def _thermal_band_weights(
    bands: BlochBandSet,
    scales: DerivedScales,
    beta_max: float,
    literal: bool,
) -> np.ndarray:
    """w[ip, i]: thermal weight of band i at p0[ip] from plane-wave projection.

    Plane waves (n0, p0) carry Maxwell weight W ~ exp(-beta^2/4 * wk/wT) with
    beta = p0 + 2 n0 (or p0 + n0 in the literal variant); W is normalized over
    the sampled discrete set and distributed over bands by |<band|n0>|^2.
    """
    n0_max = int(math.ceil(0.5 * beta_max)) + 2
    n0 = np.arange(-n0_max, n0_max + 1)
    if n0_max > bands.rungs.max():
        raise ValueError("band window too small for the thermal rung range")
    if scales.omega_t <= 0:
        w = np.zeros((bands.p0.size, n0.size))
        ip0 = int(np.argmin(np.abs(bands.p0)))
        w[ip0, n0_max] = 1.0
    else:
        factor = 2.0 if not literal else 1.0
        beta_eff = bands.p0[:, None] + factor * n0[None, :]
        w = np.exp(-0.25 * beta_eff**2 * (scales.omega_k / scales.omega_t))
    w = w / w.sum()
    idx = n0 - bands.rungs[0]
    amp2 = np.abs(bands.vectors[:, idx, :]) ** 2
    return np.einsum("pn,pni->pi", w, amp2)


def fgr_spectrum(
    model: LatticeModel,
    scales: DerivedScales | None,
    pulse: DrivePulse,
    deltas,
    cfg: FgrConfig | None = None,
) -> Spectrum:
    """Golden-rule spectrum over the detuning grid.

    Discrete transition lines (initial band, final band, p0) are collected
    with their thermally weighted strengths and summed through the Gaussian
    energy window at every detuning, in fixed order.
    """
    if scales is None:
        scales = derive_scales(model)
    if cfg is None:
        cfg = FgrConfig()
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) <= 0):
        raise ValueError("deltas must be strictly increasing")

    beta_max = max(10.0, 4.0 * scales.sigma_beta)
    half_width = cfg.band_half_width
    if half_width is None:
        half_width = max(16, int(math.ceil(0.5 * beta_max)) + 12)

    bands1 = compute_bands(model.v1, scales, cfg.p0_points, half_width)
    if model.v2 == model.v1:
        bands2 = bands1
    else:
        bands2 = compute_bands(model.v2, scales, cfg.p0_points, half_width)

    keep1 = min(bands1.energies.shape[0], count_bound_bands(bands1) + cfg.extra_bands)
    keep2 = min(bands2.energies.shape[0], count_bound_bands(bands2) + cfg.extra_bands)

    vec1 = bands1.vectors[:, :, :keep1]
    vec2 = bands2.vectors[:, :, :keep2]
    e1 = bands1.energies[:keep1]
    e2 = bands2.energies[:keep2]

    csq = 0.25 * pulse.omega0**2 * np.abs(_shifted_sum(vec1, vec2, model.parity)) ** 2

    src = _thermal_band_weights(bands1, scales, beta_max, cfg.thermal_weight_literal)
    src = src[:, :keep1]

    # line positions E_b(i', p0) - E_a(i, p0) and weights, flattened
    pos = (e2.T[:, :, None] - e1.T[:, None, :]).ravel()
    weight = (csq * src[:, None, :]).ravel()
    cut = weight.max() * cfg.line_weight_cut if weight.size else 0.0
    mask = weight > cut
    pos, weight = pos[mask], weight[mask]

    sigma_e = cfg.sigma_e if cfg.sigma_e is not None else 1.0 / pulse.tau0
    g2 = pulse.envelope_sq_integral()
    prefac = cfg.saturation_scale * 2.0 * math.pi * g2 / (
        math.sqrt(2.0 * math.pi) * sigma_e
    )

    values = np.zeros_like(deltas)
    chunk = 4096
    for start in range(0, pos.size, chunk):
        x = pos[start : start + chunk, None] - deltas[None, :]
        values += weight[start : start + chunk] @ np.exp(
            -0.5 * (x / sigma_e) ** 2
        )
    values *= prefac

    meta = {
        "n_bands_level1": int(keep1),
        "n_bands_level2": int(keep2),
        "n_lines": int(pos.size),
        "band_half_width": int(half_width),
        "p0_points": int(cfg.p0_points),
        "sigma_e": float(sigma_e),
        "saturation_scale": float(cfg.saturation_scale),
        "thermal_weight_literal": bool(cfg.thermal_weight_literal),
        "omega_k": scales.omega_k,
    }
    return Spectrum(model="fgr", deltas=deltas, values=values, stderr=None, meta=meta)
