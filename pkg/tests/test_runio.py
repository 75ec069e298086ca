"""Config parsing, canonical echo, CSV round-trips, deterministic reruns."""

import json
import math

import numpy as np
import pytest

from polspec.ensemble import Spectrum
from polspec.runio import (
    PRESETS,
    ConfigError,
    parse_config,
    preset_config,
    read_spectrum_csv,
    run,
    serialize_config,
    write_output,
)

BASE = {
    "models": ["fgr"],
    "lattice": {"v1_khz": 12.5, "v2_khz": 12.5, "temperature_uk": 1.0},
    "pulse": {"tau_fwhm_us": 20.0},
    "deltas": {"min_over_omega_k": -2.0, "max_over_omega_k": 2.0, "points": 11},
}


def _doc(**overrides):
    doc = json.loads(json.dumps(BASE))
    doc.update(overrides)
    return doc


def test_parse_resolves_units():
    config = parse_config(json.dumps(_doc()))
    assert config.lattice.v1 == pytest.approx(2.0 * math.pi * 12.5e3, rel=1e-12)
    assert config.lattice.temperature == pytest.approx(1e-6)
    assert config.pulse.tau0 == pytest.approx(1.20112240878645e-05, rel=1e-12)
    assert len(config.deltas) == 11
    assert config.models == ("fgr",)
    assert config.seed == 0
    assert config.workers == 1
    assert config.n_traj == 4096


def test_delta_bounds_in_khz():
    config = parse_config(
        json.dumps(_doc(deltas={"min_khz": -10.0, "max_khz": 10.0, "points": 5}))
    )
    assert config.deltas[0] == pytest.approx(-2.0 * math.pi * 10e3, rel=1e-12)
    assert config.deltas[-1] == pytest.approx(2.0 * math.pi * 10e3, rel=1e-12)


def test_round_trip_is_idempotent():
    config = parse_config(json.dumps(_doc()))
    again = parse_config(serialize_config(config))
    assert again.normalized == config.normalized
    assert again.config_hash == config.config_hash


def test_hash_ignores_key_order_but_not_values():
    doc = _doc()
    shuffled = json.dumps(dict(reversed(list(doc.items()))))
    assert parse_config(shuffled).config_hash == parse_config(json.dumps(doc)).config_hash
    other = parse_config(json.dumps(_doc(seed=1)))
    assert other.config_hash != parse_config(json.dumps(doc)).config_hash


@pytest.mark.parametrize(
    "section", ["lattice", "pulse", "deltas", "thermal", "fgr", "semiclassical"]
)
def test_unknown_keys_rejected(section):
    doc = _doc()
    doc.setdefault(section, {})
    doc[section]["bogus"] = 1
    with pytest.raises(ConfigError):
        parse_config(json.dumps(doc))
    with pytest.raises(ConfigError):
        parse_config(json.dumps(_doc(bogus=1)))


def test_invalid_configs_rejected():
    cases = [
        _doc(models=[]),
        _doc(models=["magic"]),
        _doc(pulse={"tau_fwhm_us": 20.0, "tau0_us": 12.0}),
        _doc(pulse={}),
        _doc(pulse={"tau_fwhm_us": 20.0, "omega0_krad_s": 10.0, "area_over_pi": 1.0}),
        _doc(deltas={"min_over_omega_k": -1.0, "max_over_omega_k": 1.0,
                     "min_khz": -1.0, "max_khz": 1.0, "points": 5}),
        _doc(deltas={"points": 5}),
        _doc(deltas={"min_over_omega_k": -1.0, "max_over_omega_k": 1.0, "points": 1}),
        _doc(workers=0),
        _doc(lattice={"v1_khz": 12.5}),
    ]
    for doc in cases:
        with pytest.raises(ConfigError):
            parse_config(json.dumps(doc))
    with pytest.raises(ConfigError):
        parse_config("not json")
    with pytest.raises(ConfigError):
        parse_config("[1, 2]")


def test_presets_all_parse():
    for name in PRESETS:
        config = preset_config(name)
        assert config.models
    with pytest.raises(ConfigError):
        preset_config("fig99")


def test_preset_overrides_merge():
    config = preset_config("fig3a", semiclassical={"n_traj": 64}, seed=5)
    assert config.n_traj == 64
    assert config.seed == 5
    assert config.lattice.v1 == pytest.approx(2.0 * math.pi * 12.5e3, rel=1e-12)


def test_csv_round_trip(tmp_path):
    deltas = np.linspace(-1e5, 1e5, 7)
    values = np.linspace(0.0, 0.5, 7)
    stderr = np.full(7, 0.01)
    spec = Spectrum(model="semiclassical", deltas=deltas, values=values, stderr=stderr)
    report = {"omega_k": 52163.358408312444, "models": {}}
    paths = write_output({"semiclassical": spec}, report, str(tmp_path / "case"))
    csv_path = str(tmp_path / "case_semiclassical.csv")
    assert csv_path in paths
    back = read_spectrum_csv(csv_path)
    np.testing.assert_allclose(back.deltas, deltas, rtol=1e-10)
    np.testing.assert_allclose(back.values, values, rtol=1e-10, atol=1e-15)
    np.testing.assert_allclose(back.stderr, stderr, rtol=1e-10)
    with open(tmp_path / "case_report.json", encoding="utf-8") as fh:
        saved = json.load(fh)
    assert saved["models"]["semiclassical"]["csv"] == csv_path


def test_csv_round_trip_without_stderr(tmp_path):
    deltas = np.linspace(0.0, 1.0, 4)
    spec = Spectrum(model="fgr", deltas=deltas, values=np.ones(4))
    write_output({"fgr": spec}, {"omega_k": 1.0, "models": {}}, str(tmp_path / "x"))
    back = read_spectrum_csv(str(tmp_path / "x_fgr.csv"))
    assert back.stderr is None


def test_rerun_is_bit_identical():
    doc = _doc(
        models=["semiclassical"],
        lattice={"v1_khz": 12.5, "v2_khz": 12.5, "temperature_uk": 100.0},
        semiclassical={"n_traj": 256},
        seed=7,
    )
    config = parse_config(json.dumps(doc))
    first, report1 = run(config)
    second, report2 = run(config)
    assert np.array_equal(
        first["semiclassical"].values, second["semiclassical"].values
    )
    assert np.array_equal(
        first["semiclassical"].stderr, second["semiclassical"].stderr
    )
    assert report1["config_hash"] == report2["config_hash"]


def test_seed_only_affects_monte_carlo():
    spectra_a, _ = run(parse_config(json.dumps(_doc(seed=0))))
    spectra_b, _ = run(parse_config(json.dumps(_doc(seed=99))))
    assert np.array_equal(spectra_a["fgr"].values, spectra_b["fgr"].values)
