"""Spectra of lattice-trapped atoms under amplitude-modulated drive.

Three cross-validating models of the same physical system:

* :mod:`polspec.tdse` — exact wave-function propagation on a truncated
  momentum ladder (two internal levels, split-step unitary integrator),
* :mod:`polspec.bands` — Bloch bands of the single-level lattice and a
  golden-rule spectrum between them,
* :mod:`polspec.semiclassical` — classical trajectories carrying quantum
  two-level amplitudes, Monte Carlo averaged.

:mod:`polspec.ensemble` supplies thermal averaging and the common
:class:`~polspec.ensemble.Spectrum` container, :mod:`polspec.diagnostics`
analytic oracles and feature extraction, and :mod:`polspec.runio` /
:mod:`polspec.cli` the config-driven front end.
"""

from .bands import (
    BlochBandSet,
    FgrConfig,
    compute_bands,
    count_bound_bands,
    count_tightly_bound_bands,
    coupling_sq,
    fgr_probability,
    fgr_spectrum,
)
from .diagnostics import (
    SidebandAnalysis,
    analyze_spectrum,
    bessel_jn,
    harmonic_line_positions,
    jacobi_anger_amplitudes,
    side_integrals,
)
from .ensemble import (
    Spectrum,
    ThermalGrid,
    assemble_tdse_spectrum,
    initial_ladder_index,
    maxwell_beta_weight,
    thermal_grid,
)
from .model import (
    DEFAULT_WAVELENGTH,
    EVEN,
    ODD,
    RB85_MASS,
    DerivedScales,
    DrivePulse,
    LatticeModel,
    derive_scales,
    pi_pulse_amplitude,
)
from .runio import (
    PRESETS,
    ConfigError,
    RunConfig,
    RunFailure,
    parse_config,
    preset_config,
    read_spectrum_csv,
    run,
    serialize_config,
    write_output,
)
from .semiclassical import (
    TrajectoryResult,
    run_trajectory,
    sc_spectrum,
    total_energy,
)
from .tdse import (
    ConvergenceError,
    PropagationResult,
    assemble_hamiltonian,
    nearest_rung,
    propagate,
    propagate_batch,
)

__version__ = "0.1.0"

__all__ = [
    "BlochBandSet",
    "ConfigError",
    "ConvergenceError",
    "DEFAULT_WAVELENGTH",
    "DerivedScales",
    "DrivePulse",
    "EVEN",
    "FgrConfig",
    "LatticeModel",
    "ODD",
    "PRESETS",
    "PropagationResult",
    "RB85_MASS",
    "RunConfig",
    "RunFailure",
    "SidebandAnalysis",
    "Spectrum",
    "ThermalGrid",
    "TrajectoryResult",
    "analyze_spectrum",
    "assemble_hamiltonian",
    "assemble_tdse_spectrum",
    "bessel_jn",
    "compute_bands",
    "count_bound_bands",
    "count_tightly_bound_bands",
    "coupling_sq",
    "derive_scales",
    "fgr_probability",
    "fgr_spectrum",
    "harmonic_line_positions",
    "initial_ladder_index",
    "jacobi_anger_amplitudes",
    "maxwell_beta_weight",
    "nearest_rung",
    "parse_config",
    "pi_pulse_amplitude",
    "preset_config",
    "propagate",
    "propagate_batch",
    "read_spectrum_csv",
    "run",
    "run_trajectory",
    "sc_spectrum",
    "serialize_config",
    "side_integrals",
    "thermal_grid",
    "total_energy",
    "write_output",
]
