"""Semiclassical trajectory model of the driven lattice.

Atoms move classically in the population-weighted lattice potential
hbar*(p1*V1 + p2*V2)*cos(2kz) while their two internal amplitudes evolve
under the local coupling Omega(t)*s(2kz), with spatial factor s = cos(2kz)
for the even drive parity and sin(2kz) for the odd one.  That coupling is
the position-space resummation of the ladder model's two +-2*hbar*k hops,
so both models saturate at the same drive strength.  Spectra are Monte
Carlo averages of the final upper-level population over thermal initial
conditions.

Trajectories are drawn in fixed-size chunks from counter-based generators
keyed by (seed, chunk index), and chunk results are reduced in chunk order,
so spectra are bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import constants as const

from .ensemble import Spectrum
from .model import EVEN, DerivedScales, DrivePulse, LatticeModel, derive_scales


@dataclass(frozen=True)
class TrajectoryResult:
    """Final state of one trajectory (population = final upper-level |c2|^2)."""

    z: float
    v: float
    c1: complex
    c2: complex
    dt: float
    n_steps: int
    trace: dict | None = None

    @property
    def population(self) -> float:
        return abs(self.c2) ** 2


def default_time_step(model: LatticeModel, scales: DerivedScales, pulse: DrivePulse) -> float:
    """WKB-style step: resolve the fastest trap period and the pulse envelope."""
    dt = pulse.tau0 / 200.0
    f = max(scales.trap_f1, scales.trap_f2)
    if f > 0:
        dt = min(dt, 1.0 / (100.0 * f))
    return dt


def total_energy(
    model: LatticeModel,
    scales: DerivedScales,
    z,
    v,
    pop1=1.0,
    pop2=0.0,
):
    """Mechanical energy (J) of the population-weighted lattice motion."""
    depth = const.hbar * (pop1 * model.v1 + pop2 * model.v2)
    return 0.5 * model.mass * np.asarray(v) ** 2 + depth * np.cos(
        2.0 * scales.k * np.asarray(z)
    )


def _derivatives(model, scales, pulse, delta, t, z, v, c1, c2):
    """Time derivatives of (z, v, c1, c2); works on scalars or arrays."""
    two_kz = 2.0 * scales.k * z
    sin2 = np.sin(two_kz)
    cos2 = np.cos(two_kz)
    p1 = np.abs(c1) ** 2
    p2 = np.abs(c2) ** 2
    acc = (
        (2.0 * const.hbar * scales.k / model.mass)
        * (p1 * model.v1 + p2 * model.v2)
        * sin2
    )
    g = pulse.envelope(t)
    spatial = cos2 if model.parity == EVEN else sin2
    # Same sign convention as the ladder solver: level 1 carries +delta/2,
    # so internal transitions that gain lattice energy resonate at delta > 0.
    dc = delta + (model.v1 - model.v2) * cos2
    dc1 = -0.5j * dc * c1 + 1j * g * spatial * c2
    dc2 = 0.5j * dc * c2 + 1j * g * spatial * c1
    return v, acc, dc1, dc2


def _rk4_step(model, scales, pulse, delta, t, dt, z, v, c1, c2):
    k1 = _derivatives(model, scales, pulse, delta, t, z, v, c1, c2)
    k2 = _derivatives(
        model, scales, pulse, delta, t + 0.5 * dt,
        z + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1],
        c1 + 0.5 * dt * k1[2], c2 + 0.5 * dt * k1[3],
    )
    k3 = _derivatives(
        model, scales, pulse, delta, t + 0.5 * dt,
        z + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1],
        c1 + 0.5 * dt * k2[2], c2 + 0.5 * dt * k2[3],
    )
    k4 = _derivatives(
        model, scales, pulse, delta, t + dt,
        z + dt * k3[0], v + dt * k3[1], c1 + dt * k3[2], c2 + dt * k3[3],
    )
    z = z + (dt / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    v = v + (dt / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    c1 = c1 + (dt / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    c2 = c2 + (dt / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    return z, v, c1, c2


def run_trajectory(
    model: LatticeModel,
    scales: DerivedScales,
    pulse: DrivePulse,
    delta: float,
    z0: float,
    v0: float,
    dt: float | None = None,
    record_every: int = 0,
) -> TrajectoryResult:
    """Integrate a single trajectory with classical RK4 over the pulse window."""
    if dt is None:
        dt = default_time_step(model, scales, pulse)
    n_steps = max(1, int(math.ceil(pulse.t_total / dt)))
    dt = pulse.t_total / n_steps
    z, v = float(z0), float(v0)
    c1, c2 = 1.0 + 0.0j, 0.0 + 0.0j
    trace = None
    if record_every > 0:
        trace = {"t": [], "z": [], "v": [], "population": [], "energy": []}
    for step in range(n_steps):
        t = step * dt
        if trace is not None and step % record_every == 0:
            trace["t"].append(t)
            trace["z"].append(z)
            trace["v"].append(v)
            trace["population"].append(abs(c2) ** 2)
            trace["energy"].append(
                float(total_energy(model, scales, z, v, abs(c1) ** 2, abs(c2) ** 2))
            )
        z, v, c1, c2 = _rk4_step(model, scales, pulse, delta, t, dt, z, v, c1, c2)
    if trace is not None:
        trace = {key: np.asarray(val) for key, val in trace.items()}
    return TrajectoryResult(z=z, v=v, c1=c1, c2=c2, dt=dt, n_steps=n_steps, trace=trace)


def _com_rk4(model, scales, z, v, dt):
    """One RK4 step of the state-independent (equal-depth) lattice motion."""
    coef = 2.0 * const.hbar * scales.k * model.v1 / model.mass

    def acc(zz):
        return coef * np.sin(2.0 * scales.k * zz)

    a1 = acc(z)
    z2 = z + 0.5 * dt * v
    a2 = acc(z2)
    v2 = v + 0.5 * dt * a1
    z3 = z + 0.5 * dt * v2
    a3 = acc(z3)
    v3 = v + 0.5 * dt * a2
    z4 = z + dt * v3
    a4 = acc(z4)
    v4 = v + dt * a3
    z_new = z + (dt / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4)
    v_new = v + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return z_new, v_new


def _chunk_magnus(model, scales, pulse, deltas, dt, n_steps, z0, v0):
    """Equal-depth fast path: classical motion once, then a batched two-level
    propagator per step, exact on the Simpson-averaged drive."""
    even = model.parity == EVEN
    kk = 2.0 * scales.k
    z = z0.copy()
    v = v0.copy()
    n_delta = deltas.size
    n_traj = z0.size
    c1 = np.ones((n_delta, n_traj), dtype=complex)
    c2 = np.zeros((n_delta, n_traj), dtype=complex)
    # exp(-i H dt) with H = +(delta/2) sigma_z - g s sigma_x (level 1 up).
    az = -0.5 * dt * deltas
    az_col = 1j * az[:, None]

    def spatial(zz):
        return np.cos(kk * zz) if even else np.sin(kk * zz)

    s0 = spatial(z)
    for step in range(n_steps):
        t = step * dt
        g0 = pulse.envelope(t)
        gh = pulse.envelope(t + 0.5 * dt)
        g1 = pulse.envelope(t + dt)
        z, v = _com_rk4(model, scales, z, v, 0.5 * dt)
        sh = spatial(z)
        z, v = _com_rk4(model, scales, z, v, 0.5 * dt)
        s1 = spatial(z)
        ax = (dt / 6.0) * (g0 * s0 + 4.0 * gh * sh + g1 * s1)
        s0 = s1
        r = np.sqrt(az[:, None] ** 2 + ax[None, :] ** 2)
        sinc = np.sinc(r / np.pi)
        u11 = np.cos(r) + az_col * sinc
        u12 = 1j * ax[None, :] * sinc
        c1_new = u11 * c1 + u12 * c2
        c2 = u12 * c1 + u11.conj() * c2
        c1 = c1_new
    p2 = np.abs(c2) ** 2
    return p2.sum(axis=1), (p2**2).sum(axis=1)


def _chunk_rk4(model, scales, pulse, deltas, dt, n_steps, z0, v0):
    """General path: co-integrate motion and amplitudes per detuning."""
    sums = np.empty(deltas.size)
    sums_sq = np.empty(deltas.size)
    for i, delta in enumerate(deltas):
        z = z0.copy()
        v = v0.copy()
        c1 = np.ones(z0.size, dtype=complex)
        c2 = np.zeros(z0.size, dtype=complex)
        for step in range(n_steps):
            z, v, c1, c2 = _rk4_step(
                model, scales, pulse, delta, step * dt, dt, z, v, c1, c2
            )
        p2 = np.abs(c2) ** 2
        sums[i] = p2.sum()
        sums_sq[i] = (p2**2).sum()
    return sums, sums_sq


def _chunk_task(args):
    (model, scales, pulse, deltas, dt, n_steps, seed, index, size) = args
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
    )
    period = math.pi / scales.k
    z0 = rng.uniform(0.0, period, size)
    v_sigma = math.sqrt(const.k * model.temperature / model.mass)
    v0 = rng.normal(0.0, v_sigma, size) if v_sigma > 0 else np.zeros(size)
    kernel = _chunk_magnus if model.is_magic else _chunk_rk4
    sums, sums_sq = kernel(model, scales, pulse, deltas, dt, n_steps, z0, v0)
    return index, sums, sums_sq


def sc_spectrum(
    model: LatticeModel,
    scales: DerivedScales | None,
    pulse: DrivePulse,
    deltas,
    n_traj: int = 4096,
    seed: int = 0,
    chunk_size: int = 4096,
    dt: float | None = None,
    workers: int | None = None,
) -> Spectrum:
    """Monte Carlo spectrum: mean final upper-level population per detuning."""
    if scales is None:
        scales = derive_scales(model)
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) <= 0):
        raise ValueError("deltas must be strictly increasing")
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    if dt is None:
        dt = default_time_step(model, scales, pulse)
    n_steps = max(1, int(math.ceil(pulse.t_total / dt)))
    dt = pulse.t_total / n_steps

    sizes = [chunk_size] * (n_traj // chunk_size)
    if n_traj % chunk_size:
        sizes.append(n_traj % chunk_size)
    tasks = [
        (model, scales, pulse, deltas, dt, n_steps, seed, idx, size)
        for idx, size in enumerate(sizes)
    ]

    results = {}
    if workers is None or workers <= 1 or len(tasks) == 1:
        for task in tasks:
            idx, sums, sums_sq = _chunk_task(task)
            results[idx] = (sums, sums_sq)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, sums, sums_sq in pool.map(_chunk_task, tasks):
                results[idx] = (sums, sums_sq)

    total = np.zeros(deltas.size)
    total_sq = np.zeros(deltas.size)
    for idx in sorted(results):
        total += results[idx][0]
        total_sq += results[idx][1]
    mean = total / n_traj
    if n_traj > 1:
        var = np.maximum(total_sq - n_traj * mean**2, 0.0) / (n_traj - 1)
        stderr = np.sqrt(var / n_traj)
    else:
        stderr = np.zeros(deltas.size)

    meta = {
        "method": "magnus" if model.is_magic else "rk4",
        "n_traj": int(n_traj),
        "chunk_size": int(chunk_size),
        "seed": int(seed),
        "dt": float(dt),
        "n_steps": int(n_steps),
        "omega_k": scales.omega_k,
    }
    return Spectrum(
        model="semiclassical", deltas=deltas, values=mean, stderr=stderr, meta=meta
    )
