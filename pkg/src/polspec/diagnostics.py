"""Analytic oracles and spectrum feature extraction.

Jacobi-Anger harmonic amplitudes of an oscillating atom's drive factor,
second-order anharmonic line-position predictions for the lattice wells,
and deterministic peak/dip extraction used to compare spectra against
those predictions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ensemble import Spectrum
from .model import DerivedScales, LatticeModel


def bessel_jn(n_max: int, x: float) -> np.ndarray:
    """First-kind Bessel values J_0(x) .. J_n_max(x) by downward recurrence.

    Uses Miller's algorithm: recurse J_{m-1} = (2m/x) J_m - J_{m+1} downward
    from a seed far above max(n_max, |x|), then normalize with
    J_0 + 2 J_2 + 2 J_4 + ... = 1.  Accurate to ~1e-12 for |x| <~ 100.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    ax = abs(x)
    if ax == 0.0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return out
    start = max(n_max, int(ax)) + 2 * int(math.sqrt(42.0 + max(n_max, ax))) + 30
    if start % 2:
        start += 1
    jp, jc = 0.0, 1e-300
    values = np.zeros(n_max + 1)
    norm = 0.0
    for m in range(start, 0, -1):
        jm = (2.0 * m / ax) * jc - jp
        jp, jc = jc, jm
        if abs(jc) > 1e250:
            jc *= 1e-250
            jp *= 1e-250
            values *= 1e-250
            norm *= 1e-250
        if m - 1 <= n_max:
            values[m - 1] = jc
        if (m - 1) % 2 == 0:
            norm += jc if m - 1 == 0 else 2.0 * jc
    values /= norm
    if x < 0:
        values[1::2] *= -1.0
    return values


def jacobi_anger_amplitudes(z1: float, k: float, max_order: int) -> np.ndarray:
    """Harmonic amplitudes of cos(2k z1 cos(w t)) at frequencies 0, 2w, 4w, ...

    Returns c[p] for p = 0..max_order with c[0] = J_0(2 k z1) and
    c[p] = 2 (-1)^p J_{2p}(2 k z1), so that
    sum_p c[p] cos(2 p w t) = cos(2 k z1 cos(w t)).
    """
    if z1 < 0:
        raise ValueError("oscillation amplitude must be non-negative")
    if max_order < 0:
        raise ValueError("max_order must be non-negative")
    x = 2.0 * k * z1
    j = bessel_jn(2 * max_order, x)
    coeffs = j[::2].copy()
    signs = np.ones(max_order + 1)
    signs[1::2] = -1.0
    coeffs *= signs
    coeffs[1:] *= 2.0
    return coeffs


def _well_level_energy(depth, trap_omega, omega_k, nu):
    """Second-order energy of level nu in a well of the cos-lattice (rad/s)."""
    nu = np.asarray(nu, dtype=float)
    return (
        -depth
        + trap_omega * (nu + 0.5)
        - (omega_k / 16.0) * (2.0 * nu**2 + 2.0 * nu + 1.0)
    )


def harmonic_line_positions(
    model: LatticeModel,
    scales: DerivedScales,
    nu_max: int,
    delta_nus: tuple = (-2, -1, 0, 1, 2),
) -> dict:
    """Predicted line detunings (rad/s) per vibrational change, for nu_min <= nu_max.

    Positions are differences of second-order anharmonic well energies; the
    key is the vibrational change, the value an array indexed by nu_min.
    Warns when either well holds fewer than four levels, where the expansion
    is unreliable.
    """
    if nu_max < 0:
        raise ValueError("nu_max must be non-negative")
    for depth, trap in ((model.v1, scales.trap_omega1), (model.v2, scales.trap_omega2)):
        n_levels = int(math.floor(2.0 * depth / trap + 0.5)) if trap > 0 else 0
        if n_levels < 4:
            warnings.warn(
                "fewer than 4 bound levels: harmonic-expansion predictions "
                "are unreliable",
                stacklevel=2,
            )
            break
    nu = np.arange(nu_max + 1)
    out = {}
    for dn in delta_nus:
        if dn >= 0:
            nu_from, nu_to = nu, nu + dn
        else:
            nu_from, nu_to = nu - dn, nu
        e_from = _well_level_energy(model.v1, scales.trap_omega1, scales.omega_k, nu_from)
        e_to = _well_level_energy(model.v2, scales.trap_omega2, scales.omega_k, nu_to)
        out[dn] = e_to - e_from
    return out


@dataclass
class SidebandAnalysis:
    """Extracted spectrum features: peaks, the zero-detuning dip, sub-lines."""

    peak_positions: np.ndarray
    peak_heights: np.ndarray
    peak_fwhms: np.ndarray
    dip_at_zero: bool
    dip_depth: float
    dip_position: float
    sublines: list = field(default_factory=list)
    baseline: float = 0.0

    def to_dict(self) -> dict:
        def clean(value):
            value = float(value)
            return None if not math.isfinite(value) else value

        return {
            "peak_positions": [clean(v) for v in self.peak_positions],
            "peak_heights": [clean(v) for v in self.peak_heights],
            "peak_fwhms": [clean(v) for v in self.peak_fwhms],
            "dip_at_zero": bool(self.dip_at_zero),
            "dip_depth": clean(self.dip_depth),
            "dip_position": clean(self.dip_position),
            "sublines": [
                {"nu": int(nu), "position": clean(pos), "height": clean(height)}
                for nu, pos, height in self.sublines
            ],
            "baseline": clean(self.baseline),
        }


def _refine_quadratic(x, y, i):
    """Sub-grid vertex of the parabola through points i-1, i, i+1."""
    if i <= 0 or i >= len(x) - 1:
        return x[i], y[i]
    coeffs = np.polyfit(x[i - 1 : i + 2], y[i - 1 : i + 2], 2)
    a, b, c = coeffs
    if a == 0:
        return x[i], y[i]
    pos = -b / (2.0 * a)
    if not (x[i - 1] <= pos <= x[i + 1]):
        return x[i], y[i]
    return pos, c - b**2 / (4.0 * a)


def _fwhm(x, y, i, height):
    """Interpolated full width at half of ``height`` around grid maximum i."""
    half = 0.5 * height
    left = np.nan
    for j in range(i - 1, -1, -1):
        if y[j] <= half:
            frac = (half - y[j]) / (y[j + 1] - y[j])
            left = x[j] + frac * (x[j + 1] - x[j])
            break
    right = np.nan
    for j in range(i + 1, len(x)):
        if y[j] <= half:
            frac = (half - y[j - 1]) / (y[j] - y[j - 1])
            right = x[j - 1] + frac * (x[j] - x[j - 1])
            break
    return right - left


def analyze_spectrum(
    spec: Spectrum,
    subline_positions=None,
    subline_start_nu: int = 0,
    match_tol: float | None = None,
    threshold_factor: float = 5.0,
    dip_search: int = 4,
    smooth: int = 0,
) -> SidebandAnalysis:
    """Deterministic peak/dip extraction with quadratic sub-grid refinement.

    Peaks are strict local maxima exceeding ``threshold_factor`` times a
    local median baseline (or half the global maximum, which keeps dominant
    broad features).  The dip detector compares the minimum within
    ``dip_search`` grid points of zero detuning against the one-sided maxima.
    ``subline_positions`` (predicted line detunings for consecutive nu
    starting at ``subline_start_nu``) are matched to refined peaks within
    ``match_tol`` (default: 45% of the minimum predicted spacing).
    """
    x = np.asarray(spec.deltas, dtype=float)
    y = np.asarray(spec.values, dtype=float).copy()
    n = x.size
    if smooth > 1:
        window = smooth + 1 if smooth % 2 == 0 else smooth
        kernel = np.ones(window) / window
        y = np.convolve(y, kernel, mode="same")
    empty = SidebandAnalysis(
        peak_positions=np.array([]),
        peak_heights=np.array([]),
        peak_fwhms=np.array([]),
        dip_at_zero=False,
        dip_depth=0.0,
        dip_position=np.nan,
    )
    if n < 3 or y.max() == y.min():
        return empty
    baseline = float(np.median(y))

    window = max(5, n // 10)
    positions, heights, fwhms = [], [], []
    y_max = y.max()
    for i in range(1, n - 1):
        if not (y[i] > y[i - 1] and y[i] > y[i + 1]):
            continue
        lo, hi = max(0, i - window), min(n, i + window + 1)
        floor = float(np.median(y[lo:hi]))
        if y[i] < threshold_factor * floor and y[i] < 0.5 * y_max:
            continue
        pos, height = _refine_quadratic(x, y, i)
        positions.append(pos)
        heights.append(height)
        fwhms.append(_fwhm(x, y, i, height))

    i0 = int(np.argmin(np.abs(x)))
    lo, hi = max(0, i0 - dip_search), min(n, i0 + dip_search + 1)
    j_star = lo + int(np.argmin(y[lo:hi]))
    dip_pos, dip_val = _refine_quadratic(x, -y, j_star)
    dip_val = -dip_val
    left = y[:j_star].max() if j_star > 0 else -np.inf
    right = y[j_star + 1 :].max() if j_star < n - 1 else -np.inf
    flank = 0.5 * (left + right)
    depth = 1.0 - dip_val / flank if flank > 0 else 0.0
    centered = abs(j_star - i0) <= max(1, dip_search // 2)
    dip_at_zero = bool(np.isfinite(depth) and depth >= 0.05 and centered)

    sublines = []
    if subline_positions is not None and positions:
        preds = np.asarray(subline_positions, dtype=float)
        if match_tol is None:
            spacing = np.min(np.abs(np.diff(preds))) if preds.size > 1 else np.inf
            match_tol = 0.45 * spacing
        pos_arr = np.asarray(positions)
        for offset, pred in enumerate(preds):
            dist = np.abs(pos_arr - pred)
            j = int(np.argmin(dist))
            if dist[j] <= match_tol:
                sublines.append(
                    (subline_start_nu + offset, float(pos_arr[j]), float(heights[j]))
                )

    return SidebandAnalysis(
        peak_positions=np.asarray(positions),
        peak_heights=np.asarray(heights),
        peak_fwhms=np.asarray(fwhms),
        dip_at_zero=dip_at_zero,
        dip_depth=float(depth),
        dip_position=float(dip_pos),
        sublines=sublines,
        baseline=baseline,
    )


def side_integrals(spec: Spectrum) -> dict:
    """Trapezoid-integrated signal on the red (delta<0) and blue (delta>0) sides.

    Returns red/blue integrals and, when the spectrum carries standard
    errors, their propagated uncertainties.
    """
    x = np.asarray(spec.deltas, dtype=float)
    y = np.asarray(spec.values, dtype=float)
    out = {}
    for name, mask in (("red", x <= 0), ("blue", x >= 0)):
        xs, ys = x[mask], y[mask]
        if xs.size < 2:
            out[name] = 0.0
            out[name + "_err"] = 0.0
            continue
        out[name] = float(np.trapezoid(ys, xs))
        if spec.stderr is not None:
            widths = np.zeros(xs.size)
            widths[:-1] += 0.5 * np.diff(xs)
            widths[1:] += 0.5 * np.diff(xs)
            err = np.asarray(spec.stderr)[mask]
            out[name + "_err"] = float(np.sqrt(np.sum((widths * err) ** 2)))
        else:
            out[name + "_err"] = 0.0
    return out
