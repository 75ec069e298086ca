"""Thermal averaging of single-momentum-class results into spectra.

A 1-D Maxwell distribution in the scaled momentum beta = p/(hbar k) is
sampled on a symmetric trapezoid grid, each class is propagated over the
detuning grid, and the weighted sum forms the spectrum.  The grid defaults
keep more than 1 - 1e-4 of the thermal mass inside the sampled range.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import constants as const
from scipy.special import erf

from .model import DerivedScales, DrivePulse, LatticeModel, derive_scales
from . import tdse

COVERAGE_TOL = 1e-4


@dataclass
class Spectrum:
    """One model's excitation spectrum over a detuning grid.

    ``deltas`` (rad/s) must be strictly increasing; ``values`` are
    probabilities; ``stderr`` is present only for Monte Carlo models.
    ``meta`` records grid/convergence diagnostics of the run.
    """

    model: str
    deltas: np.ndarray
    values: np.ndarray
    stderr: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.deltas.ndim != 1 or self.deltas.size < 1:
            raise ValueError("deltas must be a non-empty 1-D array")
        if np.any(np.diff(self.deltas) <= 0):
            raise ValueError("deltas must be strictly increasing")
        if self.values.shape != self.deltas.shape:
            raise ValueError("values and deltas must have matching shapes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectrum values must be finite")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != self.deltas.shape:
                raise ValueError("stderr shape must match deltas")


@dataclass(frozen=True)
class ThermalGrid:
    """Symmetric beta grid with normalized trapezoid Maxwell weights."""

    betas: np.ndarray
    weights: np.ndarray
    temperature: float
    coverage: float


def initial_ladder_index(beta: float) -> tuple[int, float]:
    """Map beta to its ladder decomposition (n0, beta0).

    n0 = NINT(beta/2) with ties to even, beta0 = beta - 2 n0 in [-1, 1];
    rung n0 of the ladder then carries momentum beta exactly, and the
    propagated physics depends only on beta, not on the (n0, beta0) split.
    """
    n0 = int(np.rint(0.5 * beta))
    return n0, beta - 2.0 * n0


def maxwell_beta_weight(beta, scales: DerivedScales):
    """1-D Maxwell density in beta; integrates to 1 over the real line."""
    if scales.omega_t <= 0:
        raise ValueError("maxwell_beta_weight requires temperature > 0")
    beta = np.asarray(beta, dtype=float)
    ratio = scales.omega_k / scales.omega_t
    return np.sqrt(ratio / (4.0 * math.pi)) * np.exp(-0.25 * beta * beta * ratio)


def default_beta_points(temperature: float) -> int:
    """Grid-size rule: 161 points at 1 uK rising to 321 at 100 uK (log-linear)."""
    if temperature <= 1e-6:
        return 161
    n = int(round(161 + 80.0 * math.log10(temperature / 1e-6)))
    n = min(max(n, 41), 321)
    return n if n % 2 == 1 else n + 1


def thermal_grid(
    scales: DerivedScales,
    n_points: int | None = None,
    beta_max: float | None = None,
) -> ThermalGrid:
    """Build the default symmetric Maxwell grid for the model temperature.

    beta_max defaults to max(10, 4 sigma_beta); the Gaussian mass outside
    [-beta_max, beta_max] must stay below 1e-4 or a ValueError is raised.
    Temperature 0 degenerates to the single class beta = 0.
    """
    temperature = scales.omega_t * const.hbar / const.k
    if temperature <= 0:
        return ThermalGrid(
            betas=np.zeros(1), weights=np.ones(1), temperature=0.0, coverage=1.0
        )
    if beta_max is None:
        beta_max = max(10.0, 4.0 * scales.sigma_beta)
    coverage = float(erf(beta_max / (math.sqrt(2.0) * scales.sigma_beta)))
    if 1.0 - coverage > COVERAGE_TOL:
        raise ValueError(
            f"beta_max={beta_max:g} leaves {1.0 - coverage:.2e} of the thermal "
            f"mass outside the grid (> {COVERAGE_TOL:g})"
        )
    if n_points is None:
        n_points = default_beta_points(temperature)
    if n_points < 3:
        raise ValueError("thermal grid needs at least 3 points")
    betas = np.linspace(-beta_max, beta_max, n_points)
    weights = maxwell_beta_weight(betas, scales)
    # trapezoid rule with endpoint halving, then renormalized to sum to 1
    trap = np.ones(n_points)
    trap[0] = trap[-1] = 0.5
    weights = weights * trap
    weights = weights / weights.sum()
    return ThermalGrid(
        betas=betas, weights=weights, temperature=temperature, coverage=coverage
    )


def _limit_worker_blas() -> None:
    # workers each own one core; stop BLAS from oversubscribing
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(1)
    except Exception:
        os.environ.setdefault("OMP_NUM_THREADS", "1")


_ROW_CONTEXT: dict = {}


def _row_task(args):
    (model, scales, pulse, beta, deltas, kwargs) = args
    res = tdse.propagate_batch(model, scales, pulse, beta, deltas, **kwargs)
    diag = (
        res.n_hi - res.n_lo,
        res.dt,
        res.n_steps,
        res.norm_error,
        res.edge_occupation,
        res.expansions,
        res.refinements,
        res.convergence_gap,
    )
    return res.populations, diag


def _mirror_tasks(grid: ThermalGrid):
    """Fold beta -> -beta (exact ladder symmetry) into non-negative tasks."""
    betas, weights = grid.betas, grid.weights
    n = betas.size
    if not np.allclose(betas, -betas[::-1], rtol=0, atol=1e-12):
        return [(float(b), float(w)) for b, w in zip(betas, weights)]
    tasks = []
    for i in range((n + 1) // 2):
        j = n - 1 - i
        b = betas[j]
        w = weights[j] + (weights[i] if i != j else 0.0)
        tasks.append((float(b), float(w)))
    return tasks[::-1]


def assemble_tdse_spectrum(
    model: LatticeModel,
    scales: DerivedScales | None,
    pulse: DrivePulse,
    deltas,
    grid: ThermalGrid | None = None,
    workers: int | None = None,
    use_mirror: bool = True,
    **propagate_kwargs,
) -> Spectrum:
    """Thermally averaged ladder-propagation spectrum.

    Momentum classes are independent; they are fanned across a process pool
    (``workers`` > 1) and reduced in fixed grid order, so the result does not
    depend on the worker count.  The beta -> -beta mirror symmetry of the
    ladder halves the work on symmetric grids.
    """
    if scales is None:
        scales = derive_scales(model)
    deltas = np.asarray(deltas, dtype=float)
    if np.any(np.diff(deltas) <= 0):
        raise ValueError("deltas must be strictly increasing")
    if grid is None:
        grid = thermal_grid(scales)

    if use_mirror:
        tasks = _mirror_tasks(grid)
    else:
        tasks = [(float(b), float(w)) for b, w in zip(grid.betas, grid.weights)]

    arglist = [
        (model, scales, pulse, beta, deltas, propagate_kwargs) for beta, _w in tasks
    ]
    if workers is None or workers <= 1:
        results = [_row_task(a) for a in arglist]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_limit_worker_blas
        ) as pool:
            results = list(pool.map(_row_task, arglist, chunksize=1))

    rows = np.stack([r[0] for r in results])
    w = np.array([t[1] for t in tasks])
    values = w @ rows

    diags = np.array([r[1] for r in results])
    meta = {
        "n_beta": grid.betas.size,
        "beta_max": float(grid.betas.max()),
        "coverage": grid.coverage,
        "omega_k": scales.omega_k,
        "mirror_folded": use_mirror and len(tasks) < grid.betas.size,
        "max_window": int(diags[:, 0].max()),
        "min_dt": float(diags[:, 1].min()),
        "max_steps": int(diags[:, 2].max()),
        "max_norm_error": float(diags[:, 3].max()),
        "max_edge_occupation": float(diags[:, 4].max()),
        "max_expansions": int(diags[:, 5].max()),
        "max_refinements": int(diags[:, 6].max()),
        "max_convergence_gap": float(diags[:, 7].max()),
    }
    return Spectrum(model="tdse", deltas=deltas, values=values, stderr=None, meta=meta)
