"""Calibration sweep over the acceptance regimes.

Computes every spectrum the acceptance tests will recompute, saves them as
CSV, and extracts the observables so thresholds can be frozen against real
numbers.  Results accumulate in calib/results.json after every stage.
"""

import json
import math
import time
import traceback

import numpy as np

from polspec.bands import FgrConfig, fgr_spectrum
from polspec.diagnostics import analyze_spectrum, harmonic_line_positions, side_integrals
from polspec.ensemble import assemble_tdse_spectrum, thermal_grid
from polspec.model import DrivePulse, LatticeModel, derive_scales
from polspec.semiclassical import sc_spectrum

TWO_PI = 2.0 * math.pi
OUT = "/root/pkg/calib"
RESULTS = {}


def log(msg):
    line = f"[{time.strftime('%H:%M:%S')}] {msg}"
    print(line, flush=True)
    with open(f"{OUT}/progress.log", "a") as fh:
        fh.write(line + "\n")


def save_results():
    def clean(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(type(o))

    with open(f"{OUT}/results.json", "w") as fh:
        json.dump(RESULTS, fh, indent=1, default=clean)


def save_csv(name, spec):
    cols = [spec.deltas, spec.values]
    header = "delta_rad_s,value"
    if spec.stderr is not None:
        cols.append(spec.stderr)
        header += ",stderr"
    np.savetxt(f"{OUT}/{name}.csv", np.column_stack(cols), delimiter=",", header=header)


def stage(name):
    def deco(fn):
        def run():
            t0 = time.time()
            log(f"start {name}")
            try:
                RESULTS[name] = fn()
                RESULTS[name]["wall_s"] = round(time.time() - t0, 1)
                log(f"done  {name} in {RESULTS[name]['wall_s']}s")
            except Exception:
                RESULTS[name] = {"error": traceback.format_exc()}
                log(f"FAIL  {name}\n{traceback.format_exc()}")
            save_results()

        return run

    return deco


def setup(v1_khz, v2_khz, t_uk, parity="even"):
    model = LatticeModel(
        v1=TWO_PI * 1e3 * v1_khz,
        v2=TWO_PI * 1e3 * v2_khz,
        parity=parity,
        temperature=1e-6 * t_uk,
    )
    return model, derive_scales(model)


def pulse20(area=1.0):
    return DrivePulse.gaussian(tau_fwhm=20e-6, area_over_pi=area)


def pulse400(area=1.0):
    return DrivePulse.gaussian(tau_fwhm=400e-6, area_over_pi=area)


def tdse_meta(spec):
    return {k: spec.meta[k] for k in (
        "n_beta", "beta_max", "max_window", "min_dt", "max_steps",
        "max_norm_error", "max_edge_occupation", "max_convergence_gap")}


# ---------------------------------------------------------------- stages

@stage("constants")
def run_constants():
    model, scales = setup(250.0, 250.0, 10.0)
    lines = harmonic_line_positions(model, scales, nu_max=6)
    model5, scales5 = setup(250.0, 200.0, 10.0)
    lines5 = harmonic_line_positions(model5, scales5, nu_max=6)
    return {
        "omega_k": scales.omega_k,
        "trap_f_250": scales.trap_f1,
        "pred_dnu2_250_over_wk": np.asarray(lines[2]) / scales.omega_k,
        "pred_dnu1_250_over_wk": np.asarray(lines[1]) / scales.omega_k,
        "pred_dnu0_fig5_over_wk": np.asarray(lines5[0]) / scales5.omega_k,
        "fig5_f2_minus_f1_hz": scales5.trap_f2 - scales5.trap_f1,
    }


@stage("fig5_fgr")
def run_fig5_fgr():
    model, scales = setup(250.0, 200.0, 10.0)
    wk = scales.omega_k
    deltas = wk * np.linspace(-2.0, 10.0, 961)
    spec = fgr_spectrum(model, scales, pulse400(), deltas)
    save_csv("fig5_fgr", spec)
    ana = analyze_spectrum(spec, threshold_factor=3.0)
    return {
        "peaks_over_wk": ana.peak_positions / wk,
        "heights": ana.peak_heights,
        "spacing_pred_hz": scales.trap_f2 - scales.trap_f1,
    }


@stage("fig7_fgr")
def run_fig7_fgr():
    model, scales = setup(250.0, 250.0, 10.0, parity="odd")
    wk = scales.omega_k
    deltas = wk * np.linspace(-10.0, 10.0, 1001)
    spec = fgr_spectrum(model, scales, pulse400(), deltas)
    save_csv("fig7_fgr", spec)
    y = spec.values
    x = deltas / wk
    p0 = y[np.argmin(np.abs(x))]
    blue = y[x > 2.0].max()
    red = y[x < -2.0].max()
    xb = x[x > 2.0][np.argmax(y[x > 2.0])]
    xr = x[x < -2.0][np.argmax(y[x < -2.0])]
    return {
        "p_at_zero": p0, "blue_max": blue, "red_max": red,
        "blue_pos_over_wk": xb, "red_pos_over_wk": xr,
        "separation_over_wk": xb - xr,
        "two_f1_over_wk": 2.0 * TWO_PI * scales.trap_f1 / wk,
    }


@stage("fig4_fgr")
def run_fig4_fgr():
    model, scales = setup(250.0, 250.0, 10.0)
    wk = scales.omega_k
    deltas = wk * np.linspace(-18.0, 18.0, 1441)
    spec = fgr_spectrum(model, scales, pulse400(), deltas)
    save_csv("fig4_fgr", spec)
    pred = harmonic_line_positions(model, scales, nu_max=6)[2]
    mask = (deltas / wk > 11.0) & (deltas / wk < 16.0)
    sub = analyze_spectrum(
        type(spec)(model="fgr", deltas=deltas[mask], values=spec.values[mask]),
        subline_positions=pred, subline_start_nu=0, threshold_factor=2.0,
    )
    out = {
        "pred_over_wk": np.asarray(pred) / wk,
        "sub_nus": [s[0] for s in sub.sublines],
        "sub_pos_over_wk": [s[1] / wk for s in sub.sublines],
        "sub_heights": [s[2] for s in sub.sublines],
        "all_peaks_over_wk": sub.peak_positions / wk,
        "all_heights": sub.peak_heights,
    }
    if len(sub.sublines) >= 3:
        nus = np.array([s[0] for s in sub.sublines], dtype=float)
        pos = np.array([s[1] for s in sub.sublines]) / wk
        hts = np.array([s[2] for s in sub.sublines])
        keep = nus <= 4
        coef, res = np.polyfit(nus[keep], pos[keep], 1, full=False), None
        fit = np.poly1d(coef)(nus[keep])
        ss_res = float(((pos[keep] - fit) ** 2).sum())
        ss_tot = float(((pos[keep] - pos[keep].mean()) ** 2).sum())
        out["shift_fit_slope"] = coef[0]
        out["shift_fit_r2"] = 1.0 - ss_res / ss_tot
        nu_av = nus + 1.0
        pcoef = np.polyfit(np.log(nu_av), np.log(hts), 1)
        out["height_loglog_slope"] = pcoef[0]
    return out


@stage("fig3a")
def run_fig3a():
    model, scales = setup(12.5, 12.5, 1.0)
    wk = scales.omega_k
    deltas = wk * np.linspace(-8.0, 8.0, 161)
    pulse = pulse20()
    td = assemble_tdse_spectrum(model, scales, pulse, deltas)
    save_csv("fig3a_tdse", td)
    sc = sc_spectrum(model, scales, pulse, deltas, n_traj=20000, seed=0)
    save_csv("fig3a_sc", sc)
    td_sides = side_integrals(td)
    sc_sides = side_integrals(sc)
    # asymmetry metric used by the acceptance check
    ex = wk * 2.0
    mb, mr = td.deltas >= ex, td.deltas <= -ex
    td_blue = float(np.trapezoid(td.values[mb], td.deltas[mb]))
    td_red = float(np.trapezoid(td.values[mr], td.deltas[mr]))
    sc_blue = float(np.trapezoid(sc.values[mb], sc.deltas[mb]))
    sc_red = float(np.trapezoid(sc.values[mr], sc.deltas[mr]))
    eb = sc.stderr[mb]
    er = sc.stderr[mr]
    w = np.gradient(sc.deltas[mb])
    sig_b = float(np.sqrt(((w * eb) ** 2).sum()))
    w = np.gradient(sc.deltas[mr])
    sig_r = float(np.sqrt(((w * er) ** 2).sum()))
    return {
        "tdse_meta": tdse_meta(td),
        "td_sides": td_sides, "sc_sides": sc_sides,
        "tail_blue_tdse": td_blue, "tail_red_tdse": td_red,
        "tail_blue_sc": sc_blue, "tail_red_sc": sc_red,
        "tail_sigma_sc": math.hypot(sig_b, sig_r),
    }


@stage("fig3b")
def run_fig3b():
    model, scales = setup(12.5, 12.5, 100.0)
    wk = scales.omega_k
    deltas = wk * np.linspace(-30.0, 30.0, 241)
    pulse = pulse20()
    td = assemble_tdse_spectrum(model, scales, pulse, deltas)
    save_csv("fig3b_tdse", td)
    sc = sc_spectrum(model, scales, pulse, deltas, n_traj=20000, seed=0)
    save_csv("fig3b_sc", sc)
    fg = fgr_spectrum(model, scales, pulse, deltas)
    save_csv("fig3b_fgr", fg)
    out = {"tdse_meta": tdse_meta(td)}
    for name, spec in (("tdse", td), ("sc", sc), ("fgr", fg)):
        ana = analyze_spectrum(spec, dip_search=10)
        i0 = int(np.argmin(np.abs(spec.deltas)))
        out[name] = {
            "dip_at_zero": ana.dip_at_zero,
            "dip_depth": ana.dip_depth,
            "dip_position_over_wk": ana.dip_position / wk,
            "value_at_zero": spec.values[i0],
            "max": spec.values.max(),
        }
    return out


@stage("fig2_cold_central")
def run_fig2_cold_central():
    model, scales = setup(1250.0, 1250.0, 1.0)
    wk = scales.omega_k
    deltas = wk * np.linspace(-8.0, 8.0, 81)
    td = assemble_tdse_spectrum(model, scales, pulse20(), deltas)
    save_csv("fig2_cold_central", td)
    ana = analyze_spectrum(td)
    return {
        "tdse_meta": tdse_meta(td),
        "height": td.values.max(),
        "fwhm_over_wk": (ana.peak_fwhms / wk) if ana.peak_fwhms.size else [],
        "peak_pos_over_wk": ana.peak_positions / wk,
    }


@stage("fig2_hot_central")
def run_fig2_hot_central():
    model, scales = setup(1250.0, 1250.0, 100.0)
    wk = scales.omega_k
    deltas = wk * np.linspace(-8.0, 8.0, 81)
    grid = thermal_grid(scales, n_points=161)
    td = assemble_tdse_spectrum(model, scales, pulse20(), deltas, grid=grid)
    save_csv("fig2_hot_central", td)
    ana = analyze_spectrum(td)
    return {
        "tdse_meta": tdse_meta(td),
        "height": td.values.max(),
        "fwhm_over_wk": (ana.peak_fwhms / wk) if ana.peak_fwhms.size else [],
        "peak_pos_over_wk": ana.peak_positions / wk,
    }


@stage("fig2_hot_central_dbl")
def run_fig2_hot_central_dbl():
    model, scales = setup(1250.0, 1250.0, 100.0)
    wk = scales.omega_k
    deltas = wk * np.linspace(-8.0, 8.0, 81)
    grid = thermal_grid(scales, n_points=321)
    td = assemble_tdse_spectrum(model, scales, pulse20(), deltas, grid=grid)
    save_csv("fig2_hot_central_dbl", td)
    ana = analyze_spectrum(td)
    coarse = RESULTS.get("fig2_hot_central", {})
    return {
        "height": td.values.max(),
        "fwhm_over_wk": (ana.peak_fwhms / wk) if ana.peak_fwhms.size else [],
        "height_161": coarse.get("height"),
        "rel_height_change": abs(td.values.max() - coarse.get("height", np.nan))
        / td.values.max(),
    }


@stage("fig2a_full")
def run_fig2a_full():
    model, scales = setup(1250.0, 1250.0, 1.0)
    wk = scales.omega_k
    deltas = wk * np.linspace(-40.0, 40.0, 201)
    td = assemble_tdse_spectrum(model, scales, pulse20(), deltas)
    save_csv("fig2a_tdse", td)
    x = deltas / wk
    y = td.values
    ana = analyze_spectrum(td)
    out = {
        "tdse_meta": tdse_meta(td),
        "central_height": y[np.abs(x) < 8.0].max(),
        "peak_pos_over_wk": ana.peak_positions / wk,
        "peak_fwhm_over_wk": ana.peak_fwhms / wk,
    }
    # sideband fringe measurements, each side independently
    for side, mask in (("blue", x > 15.0), ("red", x < -15.0)):
        xs, ys = x[mask], y[mask]
        h = ys.max()
        crossing = np.abs(xs)[ys >= 0.2 * h].max()
        # outermost local maximum above 20% of the sideband height
        loc = [i for i in range(1, xs.size - 1)
               if ys[i] >= ys[i - 1] and ys[i] >= ys[i + 1] and ys[i] >= 0.2 * h]
        outer_peak = max(np.abs(xs[loc])) if loc else np.nan
        out[side] = {
            "height": h, "pos_of_max": xs[np.argmax(ys)],
            "outer_20pct_crossing": crossing, "outer_peak": outer_peak,
        }
    out["separation_crossing"] = out["blue"]["outer_20pct_crossing"] + \
        out["red"]["outer_20pct_crossing"]
    out["separation_peaks"] = out["blue"]["outer_peak"] + out["red"]["outer_peak"]
    return out


@stage("fig7_tdse_spots")
def run_fig7_tdse_spots():
    model, scales = setup(250.0, 250.0, 10.0, parity="odd")
    wk = scales.omega_k
    fg = RESULTS.get("fig7_fgr", {})
    bp = fg.get("blue_pos_over_wk", 7.3)
    rp = fg.get("red_pos_over_wk", -7.3)
    deltas = wk * np.unique(np.array([rp - 0.3, rp, rp + 0.3, 0.0,
                                      bp - 0.3, bp, bp + 0.3]))
    td = assemble_tdse_spectrum(model, scales, pulse400(), deltas)
    save_csv("fig7_tdse_spots", td)
    x = deltas / wk
    y = td.values
    return {
        "tdse_meta": tdse_meta(td),
        "x_over_wk": x, "y": y,
        "p_zero": y[np.argmin(np.abs(x))],
        "blue_max": y[x > 2.0].max(), "red_max": y[x < -2.0].max(),
    }


@stage("fig4_tdse_probe")
def run_fig4_tdse_probe():
    model, scales = setup(250.0, 250.0, 10.0)
    wk = scales.omega_k
    deltas = wk * np.arange(11.5, 15.6001, 0.05)
    grid = thermal_grid(scales)
    t0 = time.time()
    from polspec.tdse import propagate_batch
    res = propagate_batch(model, scales, pulse400(), 0.0, deltas)
    dt_row0 = time.time() - t0
    t0 = time.time()
    propagate_batch(model, scales, pulse400(), float(grid.betas.max()), deltas)
    dt_rowmax = time.time() - t0
    n_rows = (grid.betas.size + 1) // 2
    return {
        "n_deltas": deltas.size, "default_n_beta": grid.betas.size,
        "mirror_rows": n_rows,
        "row0_s": round(dt_row0, 2), "rowmax_s": round(dt_rowmax, 2),
        "full_est_min": round(n_rows * 0.5 * (dt_row0 + dt_rowmax) / 60, 1),
        "row0_peak": res.populations.max(),
    }


@stage("fig4_tdse_pi")
def run_fig4_tdse_pi():
    model, scales = setup(250.0, 250.0, 10.0)
    wk = scales.omega_k
    deltas = wk * np.arange(11.5, 15.6001, 0.05)
    grid = thermal_grid(scales, n_points=121)
    td = assemble_tdse_spectrum(model, scales, pulse400(), deltas, grid=grid)
    save_csv("fig4_tdse_pi", td)
    pred = harmonic_line_positions(model, scales, nu_max=6)[2]
    ana = analyze_spectrum(td, subline_positions=pred, subline_start_nu=0,
                           threshold_factor=2.0)
    return {
        "tdse_meta": tdse_meta(td),
        "sub_nus": [s[0] for s in ana.sublines],
        "sub_pos_over_wk": [s[1] / wk for s in ana.sublines],
        "sub_heights": [s[2] for s in ana.sublines],
        "all_peaks_over_wk": ana.peak_positions / wk,
    }


@stage("fig4_tdse_02")
def run_fig4_tdse_02():
    model, scales = setup(250.0, 250.0, 10.0)
    wk = scales.omega_k
    deltas = wk * np.arange(11.5, 15.6001, 0.05)
    grid = thermal_grid(scales, n_points=121)
    td = assemble_tdse_spectrum(model, scales, pulse400(area=0.2), deltas, grid=grid)
    save_csv("fig4_tdse_02", td)
    pred = harmonic_line_positions(model, scales, nu_max=6)[2]
    ana = analyze_spectrum(td, subline_positions=pred, subline_start_nu=0,
                           threshold_factor=2.0)
    fg = fgr_spectrum(model, scales, pulse400(area=0.2), deltas)
    save_csv("fig4_fgr_02_window", fg)
    fga = analyze_spectrum(fg, subline_positions=pred, subline_start_nu=0,
                           threshold_factor=2.0)
    return {
        "tdse_meta": tdse_meta(td),
        "sigma_e_over_wk": (1.0 / pulse400().tau0) / wk,
        "td_sub": [[s[0], s[1] / wk, s[2]] for s in ana.sublines],
        "fg_sub": [[s[0], s[1] / wk, s[2]] for s in fga.sublines],
    }


@stage("fig4_beta_doubling")
def run_fig4_beta_doubling():
    model, scales = setup(250.0, 250.0, 10.0)
    wk = scales.omega_k
    deltas = wk * np.arange(11.5, 15.6001, 0.2)
    a = assemble_tdse_spectrum(model, scales, pulse400(), deltas,
                               grid=thermal_grid(scales, n_points=121))
    b = assemble_tdse_spectrum(model, scales, pulse400(), deltas,
                               grid=thermal_grid(scales, n_points=241))
    rel = np.abs(a.values - b.values).max() / b.values.max()
    return {"rel_max_diff": rel, "scale": b.values.max()}


if __name__ == "__main__":
    for fn in (
        run_constants, run_fig5_fgr, run_fig7_fgr, run_fig4_fgr,
        run_fig3a, run_fig3b,
        run_fig2_cold_central, run_fig2_hot_central, run_fig2_hot_central_dbl,
        run_fig2a_full, run_fig7_tdse_spots,
        run_fig4_tdse_probe, run_fig4_tdse_pi, run_fig4_tdse_02,
        run_fig4_beta_doubling,
    ):
        fn()
    log("all stages complete")
