"""Config-driven run orchestration, presets, and CSV/JSON output.

A run is described by a strict JSON document (unknown keys are errors).
Human units appear only here: lattice depths as v/(2 pi) in kHz, times in
us, temperatures in uK, wavelengths in nm, rates in krad/s.  ``run``
dispatches the selected models over one detuning grid and returns spectra
plus a report; ``write_output`` emits one CSV per model and a JSON report.
Output formatting is fixed (12 significant digits), so reruns of an
identical config are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import constants as const

from .bands import FgrConfig, fgr_spectrum
from .ensemble import Spectrum, assemble_tdse_spectrum, thermal_grid
from .model import PARITIES, DrivePulse, LatticeModel, derive_scales
from .semiclassical import sc_spectrum
from .tdse import ConvergenceError

VERSION = "0.1.0"

MODEL_NAMES = ("tdse", "fgr", "semiclassical")

KHZ = 2.0e3 * math.pi  # rad/s per configured kHz unit


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class RunFailure(RuntimeError):
    """A solver aborted; carries the partial report and finished spectra."""

    def __init__(self, message, report, spectra):
        super().__init__(message)
        self.report = report
        self.spectra = spectra


@dataclass(frozen=True)
class RunConfig:
    """Validated, unit-resolved description of one run."""

    models: tuple
    lattice: LatticeModel
    pulse: DrivePulse
    deltas: tuple
    n_beta: int | None
    beta_max: float | None
    fgr: FgrConfig
    n_traj: int
    chunk_size: int
    sc_dt: float | None
    output: str | None
    seed: int
    workers: int
    normalized: str

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.normalized.encode("utf-8")).hexdigest()


def _check_keys(section, allowed, where):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _number(section, key, where, default=None, required=False, kind=float):
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"missing required key {where}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{where}.{key} must be an integer")
        return int(value)
    return float(value)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run description.

    Every key is checked (typos are errors), units are resolved here, and a
    canonical normalized echo of the effective configuration (defaults
    applied, sorted keys) is stored for hashing and provenance.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(
        doc,
        (
            "models",
            "lattice",
            "pulse",
            "deltas",
            "thermal",
            "fgr",
            "semiclassical",
            "output",
            "seed",
            "workers",
        ),
        "top level",
    )

    models = doc.get("models")
    if not isinstance(models, list) or not models:
        raise ConfigError("models must be a non-empty list")
    for name in models:
        if name not in MODEL_NAMES:
            raise ConfigError(f"unknown model {name!r}; choose from {MODEL_NAMES}")
    models = tuple(dict.fromkeys(models))

    lat = doc.get("lattice")
    if not isinstance(lat, dict):
        raise ConfigError("missing required section: lattice")
    _check_keys(
        lat,
        ("v1_khz", "v2_khz", "parity", "temperature_uk", "wavelength_nm", "mass_amu"),
        "lattice",
    )
    parity = lat.get("parity", "even")
    if parity not in PARITIES:
        raise ConfigError(f"lattice.parity must be one of {PARITIES}")
    lattice = LatticeModel(
        v1=KHZ * _number(lat, "v1_khz", "lattice", required=True),
        v2=KHZ * _number(lat, "v2_khz", "lattice", required=True),
        parity=parity,
        temperature=1e-6 * _number(lat, "temperature_uk", "lattice", required=True),
        wavelength=1e-9 * _number(lat, "wavelength_nm", "lattice", default=1064.0),
        mass=const.atomic_mass * _number(lat, "mass_amu", "lattice", default=84.911789738),
    )
    scales = derive_scales(lattice)

    pul = doc.get("pulse")
    if not isinstance(pul, dict):
        raise ConfigError("missing required section: pulse")
    _check_keys(
        pul,
        ("tau_fwhm_us", "tau0_us", "omega0_krad_s", "area_over_pi", "t_total_factor"),
        "pulse",
    )
    tau_fwhm = _number(pul, "tau_fwhm_us", "pulse")
    tau0 = _number(pul, "tau0_us", "pulse")
    if (tau_fwhm is None) == (tau0 is None):
        raise ConfigError("pulse needs exactly one of tau_fwhm_us or tau0_us")
    omega0 = _number(pul, "omega0_krad_s", "pulse")
    area = _number(pul, "area_over_pi", "pulse")
    if omega0 is not None and area is not None:
        raise ConfigError("pulse.omega0_krad_s and pulse.area_over_pi are exclusive")
    try:
        pulse = DrivePulse.gaussian(
            tau_fwhm=1e-6 * tau_fwhm if tau_fwhm is not None else None,
            tau0=1e-6 * tau0 if tau0 is not None else None,
            omega0=1e3 * omega0 if omega0 is not None else None,
            area_over_pi=area,
            t_total_factor=_number(pul, "t_total_factor", "pulse", default=10.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    del_sec = doc.get("deltas")
    if not isinstance(del_sec, dict):
        raise ConfigError("missing required section: deltas")
    _check_keys(
        del_sec,
        ("min_over_omega_k", "max_over_omega_k", "min_khz", "max_khz", "points"),
        "deltas",
    )
    points = _number(del_sec, "points", "deltas", required=True, kind=int)
    if points < 2:
        raise ConfigError("deltas.points must be at least 2")
    in_recoil = "min_over_omega_k" in del_sec or "max_over_omega_k" in del_sec
    in_khz = "min_khz" in del_sec or "max_khz" in del_sec
    if in_recoil == in_khz:
        raise ConfigError("deltas needs either *_over_omega_k or *_khz bounds")
    if in_recoil:
        lo = _number(del_sec, "min_over_omega_k", "deltas", required=True)
        hi = _number(del_sec, "max_over_omega_k", "deltas", required=True)
        unit = scales.omega_k
    else:
        lo = _number(del_sec, "min_khz", "deltas", required=True)
        hi = _number(del_sec, "max_khz", "deltas", required=True)
        unit = KHZ
    if not lo < hi:
        raise ConfigError("deltas bounds must satisfy min < max")
    deltas = tuple(np.linspace(lo * unit, hi * unit, points))

    thermal = doc.get("thermal", {})
    if not isinstance(thermal, dict):
        raise ConfigError("thermal must be an object")
    _check_keys(thermal, ("n_beta", "beta_max"), "thermal")
    n_beta = _number(thermal, "n_beta", "thermal", kind=int)
    beta_max = _number(thermal, "beta_max", "thermal")

    fgr_sec = doc.get("fgr", {})
    if not isinstance(fgr_sec, dict):
        raise ConfigError("fgr must be an object")
    _check_keys(
        fgr_sec,
        (
            "sigma_e_krad_s",
            "saturation_scale",
            "thermal_weight_literal",
            "p0_points",
            "extra_bands",
            "band_half_width",
        ),
        "fgr",
    )
    literal = fgr_sec.get("thermal_weight_literal", False)
    if not isinstance(literal, bool):
        raise ConfigError("fgr.thermal_weight_literal must be a boolean")
    sigma_e = _number(fgr_sec, "sigma_e_krad_s", "fgr")
    fgr_cfg = FgrConfig(
        sigma_e=1e3 * sigma_e if sigma_e is not None else None,
        saturation_scale=_number(fgr_sec, "saturation_scale", "fgr", default=1.0),
        thermal_weight_literal=literal,
        p0_points=_number(fgr_sec, "p0_points", "fgr", default=200, kind=int),
        extra_bands=_number(fgr_sec, "extra_bands", "fgr", default=8, kind=int),
        band_half_width=_number(fgr_sec, "band_half_width", "fgr", kind=int),
    )

    sc_sec = doc.get("semiclassical", {})
    if not isinstance(sc_sec, dict):
        raise ConfigError("semiclassical must be an object")
    _check_keys(sc_sec, ("n_traj", "chunk_size", "dt_us"), "semiclassical")
    n_traj = _number(sc_sec, "n_traj", "semiclassical", default=4096, kind=int)
    chunk_size = _number(sc_sec, "chunk_size", "semiclassical", default=4096, kind=int)
    sc_dt = _number(sc_sec, "dt_us", "semiclassical")
    if n_traj < 1 or chunk_size < 1:
        raise ConfigError("semiclassical.n_traj and chunk_size must be >= 1")

    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output must be a string path prefix")
    seed = _number(doc, "seed", "top level", default=0, kind=int)
    workers = _number(doc, "workers", "top level", default=1, kind=int)
    if workers < 1:
        raise ConfigError("workers must be >= 1")

    normalized = {
        "models": list(models),
        "lattice": {
            "v1_khz": lattice.v1 / KHZ,
            "v2_khz": lattice.v2 / KHZ,
            "parity": lattice.parity,
            "temperature_uk": lattice.temperature * 1e6,
            "wavelength_nm": lattice.wavelength * 1e9,
            "mass_amu": lattice.mass / const.atomic_mass,
        },
        "pulse": {
            "tau0_us": pulse.tau0 * 1e6,
            "omega0_krad_s": pulse.omega0 / 1e3,
            "t_total_factor": pulse.t_total / pulse.tau0,
        },
        "deltas": {
            "min_over_omega_k": deltas[0] / scales.omega_k,
            "max_over_omega_k": deltas[-1] / scales.omega_k,
            "points": points,
        },
        "thermal": {"n_beta": n_beta, "beta_max": beta_max},
        "fgr": {
            "sigma_e_krad_s": (fgr_cfg.sigma_e / 1e3 if fgr_cfg.sigma_e else None),
            "saturation_scale": fgr_cfg.saturation_scale,
            "thermal_weight_literal": fgr_cfg.thermal_weight_literal,
            "p0_points": fgr_cfg.p0_points,
            "extra_bands": fgr_cfg.extra_bands,
            "band_half_width": fgr_cfg.band_half_width,
        },
        "semiclassical": {"n_traj": n_traj, "chunk_size": chunk_size,
                          "dt_us": sc_dt},
        "output": output,
        "seed": seed,
        "workers": workers,
    }
    return RunConfig(
        models=models,
        lattice=lattice,
        pulse=pulse,
        deltas=deltas,
        n_beta=n_beta,
        beta_max=beta_max,
        fgr=fgr_cfg,
        n_traj=n_traj,
        chunk_size=chunk_size,
        sc_dt=1e-6 * sc_dt if sc_dt is not None else None,
        output=output,
        seed=seed,
        workers=workers,
        normalized=json.dumps(normalized, sort_keys=True, indent=2),
    )


def serialize_config(config: RunConfig) -> str:
    """Canonical JSON echo; parse(serialize(parse(text))) == parse(text)."""
    return config.normalized


PRESETS = {
    # magic deep lattice, short pulse, cold/hot
    "fig2a": {
        "models": ["tdse", "fgr", "semiclassical"],
        "lattice": {"v1_khz": 1250.0, "v2_khz": 1250.0, "parity": "even",
                    "temperature_uk": 1.0},
        "pulse": {"tau_fwhm_us": 20.0},
        "deltas": {"min_over_omega_k": -40.0, "max_over_omega_k": 40.0,
                   "points": 201},
        "semiclassical": {"n_traj": 20000},
    },
    "fig2b": {
        "models": ["tdse", "fgr", "semiclassical"],
        "lattice": {"v1_khz": 1250.0, "v2_khz": 1250.0, "parity": "even",
                    "temperature_uk": 100.0},
        "pulse": {"tau_fwhm_us": 20.0},
        "deltas": {"min_over_omega_k": -40.0, "max_over_omega_k": 40.0,
                   "points": 201},
        "semiclassical": {"n_traj": 20000},
    },
    # magic shallow lattice, short pulse, cold/hot
    "fig3a": {
        "models": ["tdse", "fgr", "semiclassical"],
        "lattice": {"v1_khz": 12.5, "v2_khz": 12.5, "parity": "even",
                    "temperature_uk": 1.0},
        "pulse": {"tau_fwhm_us": 20.0},
        "deltas": {"min_over_omega_k": -8.0, "max_over_omega_k": 8.0,
                   "points": 161},
        "semiclassical": {"n_traj": 20000},
    },
    "fig3b": {
        "models": ["tdse", "fgr", "semiclassical"],
        "lattice": {"v1_khz": 12.5, "v2_khz": 12.5, "parity": "even",
                    "temperature_uk": 100.0},
        "pulse": {"tau_fwhm_us": 20.0},
        "deltas": {"min_over_omega_k": -30.0, "max_over_omega_k": 30.0,
                   "points": 241},
        "semiclassical": {"n_traj": 20000},
    },
    # magic moderate lattice, long pulse: anharmonic sub-lines
    "fig4": {
        "models": ["tdse", "fgr", "semiclassical"],
        "lattice": {"v1_khz": 250.0, "v2_khz": 250.0, "parity": "even",
                    "temperature_uk": 10.0},
        "pulse": {"tau_fwhm_us": 400.0},
        "deltas": {"min_over_omega_k": -18.0, "max_over_omega_k": 18.0,
                   "points": 1441},
        "semiclassical": {"n_traj": 20000},
    },
    # non-magic: split central band
    "fig5": {
        "models": ["tdse", "fgr"],
        "lattice": {"v1_khz": 250.0, "v2_khz": 200.0, "parity": "even",
                    "temperature_uk": 10.0},
        "pulse": {"tau_fwhm_us": 400.0},
        "deltas": {"min_over_omega_k": -2.0, "max_over_omega_k": 10.0,
                   "points": 961},
    },
    # magic moderate lattice, odd drive parity
    "fig7": {
        "models": ["tdse", "fgr"],
        "lattice": {"v1_khz": 250.0, "v2_khz": 250.0, "parity": "odd",
                    "temperature_uk": 10.0},
        "pulse": {"tau_fwhm_us": 400.0},
        "deltas": {"min_over_omega_k": -10.0, "max_over_omega_k": 10.0,
                   "points": 1001},
    },
}


def preset_config(name: str, **overrides) -> RunConfig:
    """Named parameter set as a RunConfig; keyword sections override/extend."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    doc = json.loads(json.dumps(PRESETS[name]))
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(doc.get(key), dict):
            doc[key].update(value)
        else:
            doc[key] = value
    return parse_config(json.dumps(doc))


def _clean_meta(meta: dict) -> dict:
    out = {}
    for key, value in meta.items():
        if isinstance(value, float) and not math.isfinite(value):
            out[key] = None
        elif isinstance(value, (np.integer,)):
            out[key] = int(value)
        elif isinstance(value, (np.floating,)):
            out[key] = float(value)
        else:
            out[key] = value
    return out


def run(config: RunConfig):
    """Dispatch every selected model over the detuning grid.

    Returns ``(spectra, report)`` where ``spectra`` maps model name to
    :class:`Spectrum`.  A convergence failure raises :class:`RunFailure`
    carrying the partial report and any finished spectra.
    """
    scales = derive_scales(config.lattice)
    deltas = np.asarray(config.deltas)
    spectra: dict = {}
    report = {
        "version": VERSION,
        "config_hash": config.config_hash,
        "omega_k": scales.omega_k,
        "config": json.loads(config.normalized),
        "models": {},
    }
    for name in config.models:
        start = time.perf_counter()
        try:
            if name == "tdse":
                grid = thermal_grid(
                    scales, n_points=config.n_beta, beta_max=config.beta_max
                )
                spec = assemble_tdse_spectrum(
                    config.lattice, scales, config.pulse, deltas,
                    grid=grid, workers=config.workers,
                )
            elif name == "fgr":
                spec = fgr_spectrum(
                    config.lattice, scales, config.pulse, deltas, cfg=config.fgr
                )
            else:
                spec = sc_spectrum(
                    config.lattice, scales, config.pulse, deltas,
                    n_traj=config.n_traj, seed=config.seed,
                    chunk_size=config.chunk_size, dt=config.sc_dt,
                    workers=config.workers,
                )
        except ConvergenceError as exc:
            report["models"][name] = {
                "error": str(exc),
                "wall_time_s": time.perf_counter() - start,
            }
            raise RunFailure(
                f"model {name} failed to converge: {exc}", report, spectra
            ) from exc
        report["models"][name] = {
            "wall_time_s": time.perf_counter() - start,
            "meta": _clean_meta(spec.meta),
        }
        spectra[name] = spec
    return spectra, report


CSV_HEADER = "delta_rad_per_s,delta_over_omega_k,probability,stderr"


def write_output(spectra: dict, report: dict, prefix: str) -> list:
    """Write one CSV per model plus ``<prefix>_report.json``; returns paths."""
    omega_k = report["omega_k"]
    paths = []
    for name, spec in spectra.items():
        path = f"{prefix}_{name}.csv"
        lines = [CSV_HEADER]
        for i, delta in enumerate(spec.deltas):
            err = "" if spec.stderr is None else f"{spec.stderr[i]:.12g}"
            lines.append(
                f"{delta:.12g},{delta / omega_k:.12g},{spec.values[i]:.12g},{err}"
            )
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise OSError(f"while writing spectrum CSV {path}: {exc}") from exc
        report["models"].setdefault(name, {})["csv"] = path
        paths.append(path)
    report_path = f"{prefix}_report.json"
    try:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"while writing report {report_path}: {exc}") from exc
    paths.append(report_path)
    return paths


def read_spectrum_csv(path: str) -> Spectrum:
    """Load a spectrum CSV written by :func:`write_output`."""
    try:
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
    except OSError as exc:
        raise OSError(f"while reading spectrum CSV {path}: {exc}") from exc
    if data.ndim == 1:
        data = data[None, :]
    deltas = data[:, 0]
    values = data[:, 2]
    stderr = data[:, 3] if data.shape[1] > 3 else np.full(deltas.size, np.nan)
    if np.all(np.isnan(stderr)):
        stderr_arr = None
    else:
        stderr_arr = np.nan_to_num(stderr)
    return Spectrum(
        model="csv", deltas=deltas, values=values, stderr=stderr_arr,
        meta={"path": path},
    )
