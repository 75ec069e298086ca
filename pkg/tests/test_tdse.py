"""Ladder-propagator properties: Rabi oracle, unitarity, symmetries, guards."""

import math

import numpy as np
import pytest

from polspec.model import DrivePulse
from polspec.tdse import (
    ConvergenceError,
    assemble_hamiltonian,
    default_time_step,
    nearest_rung,
    propagate,
    propagate_batch,
    _propagate_kernel,
)

from helpers import make_setup


def test_hamiltonian_is_hermitian():
    rng = np.random.default_rng(7)
    for parity in ("even", "odd"):
        for _ in range(6):
            model, scales = make_setup(
                rng.uniform(0.0, 2000.0), rng.uniform(0.0, 2000.0), parity=parity
            )
            h = assemble_hamiltonian(
                model,
                scales,
                beta=rng.uniform(-40.0, 40.0),
                delta=rng.uniform(-2e6, 2e6),
                omega=rng.uniform(0.0, 5e5),
                half_width=9,
            )
            scale = np.abs(h).max()
            assert np.abs(h - h.conj().T).max() <= 1e-12 * scale


def test_hamiltonian_detuning_sign():
    # level 1 carries +delta/2, level 2 -delta/2
    model, scales = make_setup(12.5)
    delta = 3.0e4
    h0 = assemble_hamiltonian(model, scales, beta=0.0, delta=0.0, omega=0.0)
    h = assemble_hamiltonian(model, scales, beta=0.0, delta=delta, omega=0.0)
    m = h.shape[0] // 2
    np.testing.assert_allclose(np.diag(h - h0)[:m].real, 0.5 * delta, rtol=1e-12)
    np.testing.assert_allclose(np.diag(h - h0)[m:].real, -0.5 * delta, rtol=1e-12)


def test_parity_symmetry_of_assembled_operator():
    # at beta = 0 the rest-frame reflection n -> -n commutes with the full
    # driven operator for an even coupling; an odd coupling flips sign under
    # reflection, so the conserved operator gains a level-inversion factor.
    # either way single-quantum changes between like-parity states stay dark.
    for parity, level_sign in (("even", 1.0), ("odd", -1.0)):
        model, scales = make_setup(1250.0, parity=parity)
        h = assemble_hamiltonian(
            model, scales, beta=0.0, delta=4.0e5, omega=1.5e5, half_width=12
        )
        m = h.shape[0] // 2
        reflect = np.eye(m)[::-1]
        sym = np.block([
            [reflect, np.zeros((m, m))],
            [np.zeros((m, m)), level_sign * reflect],
        ])
        assert np.abs(h @ sym - sym @ h).max() <= 1e-12 * np.abs(h).max()


def _rabi_probability(omega, detuning, t):
    """Two-level transfer for constant coupling omega/2 and level gap detuning."""
    gen_sq = 0.25 * (omega**2 + np.asarray(detuning, dtype=float) ** 2)
    return np.where(
        gen_sq > 0.0,
        0.25 * omega**2 * np.sin(np.sqrt(gen_sq) * t) ** 2 / np.where(gen_sq > 0, gen_sq, 1.0),
        0.0,
    )


@pytest.mark.parametrize("order,tol", [(4, 1e-9), (2, 1e-5)])
def test_two_rung_matches_rabi_formula(order, tol):
    # isolate one rung per level: constant drive, square window
    omega = 1.2e5
    gap = 3.0e5
    t_total = 4.0e-5
    deltas = gap + np.linspace(-3.0 * omega, 3.0 * omega, 13)
    pops, norm_err, _edge, _dt, _n = _propagate_kernel(
        diag1=np.array([0.0]),
        off1=np.zeros(0),
        diag2=np.array([gap]),
        off2=np.zeros(0),
        w=np.array([[-0.5 + 0.0j]]),
        deltas=deltas,
        g_of_t=lambda t: np.full(np.shape(t), omega),
        t_total=t_total,
        dt=t_total / 8000,
        init_index=0,
        order=order,
    )
    expected = _rabi_probability(omega, gap - deltas, t_total)
    assert np.abs(pops - expected).max() < tol
    assert norm_err < 1e-10
    # the analytic transfer is even in the detuning mismatch
    np.testing.assert_allclose(expected, expected[::-1], rtol=1e-12)


def test_propagation_is_unitary_and_bounded():
    model, scales = make_setup(1250.0)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    deltas = scales.omega_k * np.array([-10.0, -1.0, 0.0, 1.0, 10.0])
    res = propagate_batch(model, scales, pulse, beta=2.3, deltas=deltas)
    assert res.norm_error < 1e-8
    assert res.edge_occupation <= 1e-10
    assert np.all(res.populations >= 0.0)
    assert np.all(res.populations <= 1.0 + 1e-12)
    assert res.convergence_gap < 1e-4


def test_zero_drive_leaves_lower_level():
    model, scales = make_setup(250.0)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6, omega0=0.0)
    res = propagate_batch(
        model,
        scales,
        pulse,
        beta=1.2,
        deltas=np.array([0.0, scales.omega_k]),
        check_convergence=False,
    )
    assert np.abs(res.populations).max() < 1e-28


def test_ladder_fold_is_arbitrary():
    # the (n0, beta0) split of one physical momentum must not matter
    model, scales = make_setup(12.5)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    beta = 2.6
    deltas = scales.omega_k * np.linspace(-2.0, 2.0, 5)
    results = [
        propagate_batch(
            model, scales, pulse, beta, deltas,
            n0=n0, dt=2e-8, check_convergence=False,
        ).populations
        for n0 in (0, 1, 2)
    ]
    assert np.abs(results[0] - results[1]).max() < 1e-10
    assert np.abs(results[1] - results[2]).max() < 1e-10


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_mirror_symmetry_in_beta(parity):
    model, scales = make_setup(12.5, parity=parity)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    deltas = scales.omega_k * np.linspace(-3.0, 3.0, 7)
    plus = propagate_batch(
        model, scales, pulse, 3.7, deltas, dt=2e-8, check_convergence=False
    )
    minus = propagate_batch(
        model, scales, pulse, -3.7, deltas, dt=2e-8, check_convergence=False
    )
    # symmetry is exact; the bound allows propagator roundoff (norm drift ~1e-11)
    assert np.abs(plus.populations - minus.populations).max() < 1e-10


def test_drive_parity_selects_sideband_structure():
    # at beta = 0 the Hamiltonian conserves spatial parity, so an odd drive
    # cannot connect same-index bands: the carrier collapses and the single
    # vibrational-quantum band takes over
    model_even, scales = make_setup(250.0)
    model_odd, _ = make_setup(250.0, parity="odd")
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6, area_over_pi=0.1)
    deltas = np.r_[0.0, scales.omega_k * np.linspace(5.0, 8.0, 7)]
    even = propagate_batch(model_even, scales, pulse, 0.0, deltas)
    odd = propagate_batch(model_odd, scales, pulse, 0.0, deltas)
    # carrier: strong for even coupling, parity-forbidden for odd
    assert even.populations[0] > 30.0 * odd.populations[0]
    # single-quantum band: present only for the odd coupling
    assert odd.populations[1:].max() > 2.5 * even.populations[1:].max()
    # odd-drive carrier residue is far below its own sideband
    assert odd.populations[0] < 0.05 * odd.populations[1:].max()


def test_blue_sideband_dominates_at_rest():
    # a resting atom can only absorb recoil energy: the +/-2*hbar*k kicks both
    # cost +omega_k, so the blue side carries the line and the red side only
    # sees lattice-mixed residue (shallow lattice keeps the carrier weak)
    model, scales = make_setup(12.5)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6, area_over_pi=0.5)
    res = propagate_batch(
        model, scales, pulse, 0.0, scales.omega_k * np.array([-1.0, 1.0])
    )
    p_red, p_blue = res.populations
    assert p_blue > 1.4 * p_red


def test_window_regression_at_large_beta():
    # hot-tail momentum class: compact auto-expanding window vs a wide one
    model, scales = make_setup(12.5)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    deltas = scales.omega_k * np.linspace(-2.0, 2.0, 5)
    small = propagate_batch(
        model, scales, pulse, 80.0, deltas, dt=2e-8, check_convergence=False
    )
    wide = propagate_batch(
        model, scales, pulse, 80.0, deltas,
        half_width=30, dt=2e-8, check_convergence=False,
    )
    assert np.abs(small.populations - wide.populations).max() < 1e-8


def test_convergence_guards_raise():
    model, scales = make_setup(12.5)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    with pytest.raises(ConvergenceError):
        propagate_batch(
            model, scales, pulse, 0.0, [0.0],
            edge_tol=0.0, max_expansions=0, check_convergence=False,
        )
    with pytest.raises(ConvergenceError):
        propagate_batch(
            model, scales, pulse, 0.0, [scales.omega_k],
            conv_tol=0.0, max_refinements=0,
        )


def test_nearest_rung_ties_to_even():
    assert nearest_rung(0.6) == 0
    assert nearest_rung(1.5) == 1
    assert nearest_rung(1.0) == 0
    assert nearest_rung(3.0) == 2
    assert nearest_rung(-1.0) == 0


def test_default_time_step_bounds():
    model, scales = make_setup(1250.0)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    dt0 = default_time_step(model, scales, pulse, beta=0.0, delta_max=1e5)
    dt_hot = default_time_step(model, scales, pulse, beta=60.0, delta_max=1e5)
    assert 0.0 < dt_hot <= dt0 <= pulse.tau0 / 150.0


def test_scalar_wrapper_matches_batch():
    model, scales = make_setup(12.5)
    pulse = DrivePulse.gaussian(tau_fwhm=20e-6)
    delta = 0.8 * scales.omega_k
    batch = propagate_batch(model, scales, pulse, 1.1, [delta])
    single = propagate(model, scales, pulse, 1.1, delta)
    assert single == pytest.approx(batch.populations[0], rel=1e-12)
