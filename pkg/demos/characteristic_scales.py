#!/usr/bin/env python3
"""Characteristic scales of the modulated lattice, and its band structure.

Prints the two-photon recoil, the trap frequencies and the bound-band
counts for a shallow, a moderate and a deep lattice, then exports the
Bloch band diagram of each depth as CSV (quasi-momentum sweep across the
Brillouin zone).  Everything here is fast; no spectra are computed.

Run:  python3 demos/characteristic_scales.py [--out DIR]
"""

import argparse
import math
import os

import numpy as np

from polspec.bands import compute_bands, count_bound_bands, count_tightly_bound_bands
from polspec.model import DrivePulse, LatticeModel, derive_scales

TWO_PI = 2.0 * math.pi


def describe(v_khz: float, out_dir: str) -> None:
    model = LatticeModel(v1=TWO_PI * 1e3 * v_khz, v2=TWO_PI * 1e3 * v_khz)
    scales = derive_scales(model)
    wk = scales.omega_k
    bands = compute_bands(model.v1, scales, n_points=121, half_width=24)
    n_bound = count_bound_bands(bands)
    n_tight = count_tightly_bound_bands(bands)

    print(f"\nlattice depth V1 = V2 = 2 pi x {v_khz:g} kHz  ({model.v1 / wk:.1f} recoils)")
    print(f"  well-bottom trap frequency f1 = {scales.trap_f1 / 1e3:.2f} kHz"
          f" = {scales.trap_omega1 / wk:.2f} omega_k")
    print(f"  bound bands: {n_bound}   tightly bound: {n_tight}")

    # lowest few level spacings straight from the band energies at p0 = 0
    i0 = int(np.argmin(np.abs(bands.p0)))
    e0 = bands.energies[:, i0]
    gaps = np.diff(e0[: min(6, n_bound + 1)]) / wk
    if gaps.size:
        print("  level spacings / omega_k:", ", ".join(f"{g:.3f}" for g in gaps))

    path = os.path.join(out_dir, f"bands_{v_khz:g}khz.csv")
    header = "p0_over_hbar_k," + ",".join(f"band{i}" for i in range(min(12, bands.energies.shape[0])))
    table = np.column_stack([bands.p0, (bands.energies[:12] / wk).T])
    np.savetxt(path, table, delimiter=",", header=header, comments="")
    print(f"  band diagram -> {path}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out", help="output directory")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    model = LatticeModel(v1=0.0, v2=0.0)
    scales = derive_scales(model)
    print(f"two-photon recoil omega_k = {scales.omega_k:.1f} rad/s"
          f" = 2 pi x {scales.omega_k / TWO_PI / 1e3:.4f} kHz (Rb-85, 1064 nm)")

    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    print(f"canonical 20 us drive: tau0 = {pulse.tau0 * 1e6:.2f} us,"
          f" amplitude Omega0 = {pulse.omega0:.0f} rad/s (unit time-integrated area / pi)")

    for v_khz in (12.5, 250.0, 1250.0):
        describe(v_khz, args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
