"""Monte Carlo harness: seeded sweeps over SINR grids, metric aggregation,
theory overlays, and CSV emission."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import channel, csi, fft_baseline, music, qam, theory
from .config import RunContext
from .music import beamform_and_erase, music_aoa, music_doppler, music_range
from .scenario import Scenario, generate_scenario
from .steering import Angle2D

CSV_HEADER = ["sinr_db", "metric", "series", "value", "ci", "trials", "seed"]


@dataclass(frozen=True)
class ResultRow:
    sinr_db: float
    metric: str
    series: str
    value: float
    ci: float
    trials: int
    seed: int


@dataclass
class ResultTable:
    rows: list[ResultRow]

    def filter(self, metric: str | None = None,
               series: str | None = None) -> "ResultTable":
        rows = [r for r in self.rows
                if (metric is None or r.metric == metric)
                and (series is None or r.series == series)]
        return ResultTable(rows)

    def value(self, sinr_db: float, metric: str, series: str) -> float:
        for r in self.rows:
            if (r.metric == metric and r.series == series
                    and abs(r.sinr_db - sinr_db) < 1e-9):
                return r.value
        raise KeyError(f"no row for ({sinr_db}, {metric}, {series})")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([f"{r.sinr_db:.9g}", r.metric, r.series,
                        f"{r.value:.9g}", f"{r.ci:.9g}", r.trials, r.seed])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header}")
        rows = [ResultRow(sinr_db=float(a), metric=b, series=c,
                          value=float(d), ci=float(e), trials=int(f),
                          seed=int(g))
                for a, b, c, d, e, f, g in reader]
        return cls(rows)


def resolution_constants(ctx: RunContext) -> tuple[float, float]:
    """(range bin, velocity bin) of the on-grid baseline: c/(2B) and
    lambda*df/(2*M_s)."""
    wave = ctx.wave
    dr = ctx.c / (2.0 * wave.bandwidth)
    dv = wave.wavelength(ctx.c) * wave.subcarrier_spacing / (2.0 * wave.n_symbols)
    return dr, dv


def trial_rng(master_seed: int, point_idx: int, trial_idx: int):
    """Independent (scenario_seed, rng) for one trial, scheduling-invariant."""
    ss = np.random.SeedSequence([master_seed, point_idx, trial_idx])
    scen_ss, noise_ss = ss.spawn(2)
    scen_seed = int(scen_ss.generate_state(1)[0])
    return scen_seed, np.random.default_rng(noise_ss)


def _wrap_angle(x: float) -> float:
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def _nearest_aoa(estimates, truth: Angle2D):
    """Estimate whose angles are closest to the truth (azimuth wrapped)."""
    best, best_d = None, np.inf
    for est in estimates:
        daz = _wrap_angle(float(est.value[0]) - truth.azimuth)
        del_ = float(est.value[1]) - truth.elevation
        d = daz ** 2 + del_ ** 2
        if d < best_d:
            best, best_d = est, d
    return best


def _nearest_estimate(estimates, anchor: float, period: float | None = None,
                      tol: float | None = None):
    """Estimate associated with an on-grid anchor (optionally circular).

    The MUSIC pseudo-spectrum height orders targets by subspace null
    depth, not by power, so the strongest peak in a beam is not always
    the beam's dominant target; the on-grid periodogram peak is
    power-ordered and anchors the association instead.  The anchor is
    quantized to its bin, so when `tol` (roughly half a bin width) is
    given, the deepest-null estimate within tol wins over a marginally
    nearer spurious one; with no candidate inside tol the nearest is
    returned.
    """
    def dist(v):
        d = abs(v - anchor)
        return min(d, period - d) if period is not None else d

    if tol is not None:
        near = [e for e in estimates if dist(float(e.value)) <= tol]
        if near:
            return max(near, key=lambda e: e.spectrum)
    return min(estimates, key=lambda e: dist(float(e.value)))


def _principal_doppler(f: float, symbol_duration: float) -> float:
    """Map a Doppler estimate from [0, 1/T) to (-1/(2T), 1/(2T)]."""
    span = 1.0 / symbol_duration
    return f - span if f > span / 2.0 else f


def _local_location(d: float, az: float, el: float) -> np.ndarray:
    return d * np.array([np.sin(el) * np.cos(az),
                         np.sin(el) * np.sin(az),
                         np.cos(el)])


def sensing_trial(ctx: RunContext, sinr_db: float, scen_seed: int,
                  rng: np.random.Generator,
                  use_true_beam: bool = False) -> dict:
    """One end-to-end sensing trial; per-metric squared errors for the
    direct path, for both the subspace and the on-grid estimators."""
    cfg = ctx.config["scenario"]
    scenario = generate_scenario(scen_seed, n_scatterers=int(cfg["n_scatterers"]),
                                 reflect_var=float(cfg["reflect_var"]),
                                 mue_x=cfg["mue_x"])
    beams = channel.build_beamformers(scenario, ctx.array)
    p_tx = channel.calibrate_power_sense(scenario, ctx.wave, beams, ctx.noise,
                                         sinr_db, ctx.c)
    wave = ctx.wave.with_power(p_tx)
    echo = channel.synthesize_echo(scenario, wave, ctx.array, beams, ctx.noise,
                                   rng, fading=cfg["fading"], c=ctx.c)
    truth = scenario.mue_path
    lam = wave.wavelength(ctx.c)

    if use_true_beam:
        beam_angle = truth.aoa
        az_err = el_err = 0.0
    else:
        ests, _ = music_aoa(echo.snapshots, ctx.array)
        est = _nearest_aoa(ests, truth.aoa)
        beam_angle = Angle2D(float(est.value[0]), float(est.value[1]))
        az_err = _wrap_angle(beam_angle.azimuth - truth.aoa.azimuth)
        el_err = beam_angle.elevation - truth.aoa.elevation

    w_k = channel.sense_rx_beamformer(ctx.array, beam_angle)
    h_bar = beamform_and_erase(echo.snapshots, w_k, echo.symbols)
    per = fft_baseline.fft_range_doppler(h_bar, wave, c=ctx.c)

    r_ests, dec_r = music_range(h_bar, wave, c=ctx.c)
    r_hat = float(_nearest_estimate(r_ests, per.range_rt,
                                    tol=0.6 * per.range_bin_width).value)
    d_hat = r_hat / 2.0
    f_ests, _ = music_doppler(h_bar, wave, n_sources=dec_r.source_count)
    f_span = 1.0 / wave.symbol_duration
    f_est = _nearest_estimate(f_ests, per.doppler, period=f_span,
                              tol=0.6 * per.doppler_bin_width)
    f_hat = _principal_doppler(float(f_est.value), wave.symbol_duration)
    v_hat = lam * f_hat / 2.0

    f_true = 2.0 * truth.v1 / lam
    loc_mus = _local_location(d_hat, beam_angle.azimuth, beam_angle.elevation)
    loc_true = _local_location(truth.d1, truth.aoa.azimuth, truth.aoa.elevation)

    fft_f = _principal_doppler(per.doppler, wave.symbol_duration)
    fft_v = lam * fft_f / 2.0

    return {
        "azimuth_mse": {"music": az_err ** 2},
        "elevation_mse": {"music": el_err ** 2},
        "range_mse": {"music": (d_hat - truth.d1) ** 2,
                      "fft": (per.distance - truth.d1) ** 2},
        "velocity_mse": {"music": (v_hat - truth.v1) ** 2,
                         "fft": (fft_v - truth.v1) ** 2},
        "doppler_mse": {"music": (f_hat - f_true) ** 2},
        "location_mse": {"music": float(np.sum((loc_mus - loc_true) ** 2))},
    }


def _aggregate(point_values: dict, sinr_db: float, trials: int,
               seed: int) -> list[ResultRow]:
    rows = []
    for metric, series_map in point_values.items():
        for series, vals in series_map.items():
            arr = np.asarray(vals, dtype=float)
            ci = float(1.96 * arr.std(ddof=1) / np.sqrt(len(arr))) \
                if len(arr) > 1 else 0.0
            rows.append(ResultRow(sinr_db=sinr_db, metric=metric,
                                  series=series, value=float(arr.mean()),
                                  ci=ci, trials=trials, seed=seed))
    return rows


def run_sweep_mse(ctx: RunContext, sinr_grid=None, trials: int | None = None,
                  master_seed: int = 0,
                  use_true_beam: bool = False) -> ResultTable:
    """Monte Carlo MSE sweep for the subspace and on-grid estimators."""
    sweep = ctx.config["sweep"]
    grid = list(sweep["sinr_grid_db"]) if sinr_grid is None else list(sinr_grid)
    n = int(sweep["trials"]) if trials is None else int(trials)
    rows: list[ResultRow] = []
    for pi, sinr in enumerate(grid):
        acc: dict = {}
        for t in range(n):
            scen_seed, rng = trial_rng(master_seed, pi, t)
            res = sensing_trial(ctx, sinr, scen_seed, rng, use_true_beam)
            for metric, smap in res.items():
                for series, val in smap.items():
                    acc.setdefault(metric, {}).setdefault(series, []).append(val)
        rows.extend(_aggregate(acc, sinr, n, master_seed))
    return ResultTable(rows)


def ber_trial(ctx: RunContext, csinr_db: float, scen_seed: int,
              rng: np.random.Generator, mue_x: float = 75.0,
              qam_order: int = 64) -> dict:
    """One CSI-enhancement trial: BER for cases A (perfect CSI), B (raw
    LS), C (delay from subspace range estimate), D (delay from FFT bin)."""
    cfg = ctx.config["scenario"]
    scenario = generate_scenario(scen_seed, n_scatterers=int(cfg["n_scatterers"]),
                                 reflect_var=float(cfg["reflect_var"]),
                                 mue_x=mue_x)
    beams = channel.build_beamformers(scenario, ctx.array)
    p_tx = channel.calibrate_power_comm(scenario, ctx.wave, beams, ctx.noise,
                                        csinr_db, ctx.c)
    wave = replace(ctx.wave, tx_power=p_tx, qam_order=qam_order)
    refl = channel.draw_reflections(scenario, rng, cfg["fading"])

    # preamble frame: LS CSI
    pre = qam.preamble(wave.n_subcarriers, wave.n_symbols)
    comm_pre = channel.synthesize_comm(scenario, wave, beams, ctx.noise, rng,
                                       symbols=pre, reflections=refl, c=ctx.c)
    h_ls = csi.ls_csi(comm_pre.samples, pre, wave.tx_power)

    # sensing frame: range estimate through the aligned beam
    echo = channel.synthesize_echo(scenario, wave, ctx.array, beams, ctx.noise,
                                   rng, reflections=refl,
                                   fading=cfg["fading"], c=ctx.c)
    w0 = channel.sense_rx_beamformer(ctx.array, scenario.mue_path.aoa)
    h_bar = beamform_and_erase(echo.snapshots, w0, echo.symbols)
    per = fft_baseline.fft_range_doppler(h_bar, wave, c=ctx.c)
    r_ests, _ = music_range(h_bar, wave, c=ctx.c)
    tau_music = float(_nearest_estimate(
        r_ests, per.range_rt, tol=0.6 * per.range_bin_width).value) \
        / (2.0 * ctx.c)
    tau_fft = per.range_rt / (2.0 * ctx.c)

    # data frame over the same channel realization
    comm_data = channel.synthesize_comm(scenario, wave, beams, ctx.noise, rng,
                                        reflections=refl, c=ctx.c)

    sigma_p2 = csi.estimate_sigma_p(h_ls)
    df = wave.subcarrier_spacing
    cases = {
        "case_a": comm_data.csi,
        "case_b": h_ls,
        "case_c": csi.kalman_enhance(h_ls, tau_music, df, sigma_p2),
        "case_d": csi.kalman_enhance(h_ls, tau_fft, df, sigma_p2),
    }
    out = {}
    for name, h in cases.items():
        dem = csi.equalize_and_demodulate(comm_data.samples, h, wave.tx_power,
                                          qam_order, comm_data.labels)
        out[name] = dem.ber
    out["csi_mse_ls"] = float(np.mean(np.abs(h_ls - comm_data.csi) ** 2))
    out["csi_mse_enhanced"] = float(
        np.mean(np.abs(cases["case_c"] - comm_data.csi) ** 2))
    return out


def run_sweep_ber(ctx: RunContext, csinr_grid=None, trials: int | None = None,
                  master_seed: int = 0, mue_x: float = 75.0,
                  qam_order: int = 64) -> ResultTable:
    """BER sweep over C-SINR for the four CSI cases."""
    grid = [10.0, 15.0, 20.0, 25.0, 30.0] if csinr_grid is None \
        else list(csinr_grid)
    n = int(ctx.config["sweep"]["trials"]) if trials is None else int(trials)
    rows: list[ResultRow] = []
    for pi, sinr in enumerate(grid):
        acc: dict = {"ber": {}, "csi_mse": {}}
        for t in range(n):
            scen_seed, rng = trial_rng(master_seed, pi, t)
            res = ber_trial(ctx, sinr, scen_seed, rng, mue_x, qam_order)
            for case in ("case_a", "case_b", "case_c", "case_d"):
                acc["ber"].setdefault(case, []).append(res[case])
            acc["csi_mse"].setdefault("ls", []).append(res["csi_mse_ls"])
            acc["csi_mse"].setdefault("enhanced", []).append(
                res["csi_mse_enhanced"])
        rows.extend(_aggregate(acc, sinr, n, master_seed))
    return ResultTable(rows)


def spectrum_snapshot(ctx: RunContext, sinr_db: float = -20.0,
                      master_seed: int = 0, n_scatterers: int | None = None,
                      pad: int = 8) -> dict:
    """Normalized range and velocity spectra of one realization, with PSLR."""
    scen_seed, rng = trial_rng(master_seed, 0, 0)
    cfg = ctx.config["scenario"]
    if n_scatterers is None:
        n_scatterers = int(cfg["n_scatterers"])
    scenario = generate_scenario(scen_seed, n_scatterers=n_scatterers,
                                 reflect_var=float(cfg["reflect_var"]),
                                 mue_x=cfg["mue_x"])
    beams = channel.build_beamformers(scenario, ctx.array)
    p_tx = channel.calibrate_power_sense(scenario, ctx.wave, beams, ctx.noise,
                                         sinr_db, ctx.c)
    wave = ctx.wave.with_power(p_tx)
    echo = channel.synthesize_echo(scenario, wave, ctx.array, beams, ctx.noise,
                                   rng, fading=cfg["fading"], c=ctx.c)
    w0 = channel.sense_rx_beamformer(ctx.array, scenario.mue_path.aoa)
    h_bar = beamform_and_erase(echo.snapshots, w0, echo.symbols)
    lam = wave.wavelength(ctx.c)

    # half-aperture smoothed covariance keeps the subspace usable at the
    # deep-negative SINRs this snapshot targets
    r_max = ctx.c / wave.subcarrier_spacing
    r_grid = np.arange(0.0, r_max, ctx.c / (16.0 * wave.bandwidth))
    s_range = music.range_spectrum(h_bar, wave, r_grid, c=ctx.c,
                                   window=wave.n_subcarriers // 2,
                                   n_sources=1)
    f_max = 1.0 / wave.symbol_duration
    f_grid = np.arange(0.0, f_max, f_max / (16.0 * wave.n_symbols))
    s_dopp = music.doppler_spectrum(h_bar, wave, f_grid,
                                    window=wave.n_symbols // 2,
                                    n_sources=1)

    mag = fft_baseline.periodogram_map(h_bar, pad=pad)
    power = mag ** 2
    kr, kd = np.unravel_index(int(np.argmax(power)), power.shape)
    fft_range_profile = power[:, kd]
    fft_dopp_profile = power[kr, :]

    return {
        "range_grid_m": r_grid / 2.0,
        "velocity_grid": lam * f_grid / 2.0,
        "music_range_spectrum": s_range / s_range.max(),
        "music_velocity_spectrum": s_dopp / s_dopp.max(),
        "fft_range_spectrum": fft_range_profile / fft_range_profile.max(),
        "fft_velocity_spectrum": fft_dopp_profile / fft_dopp_profile.max(),
        "music_range_pslr_db": fft_baseline.pslr_db(s_range),
        "music_velocity_pslr_db": fft_baseline.pslr_db(s_dopp),
        "fft_range_pslr_db": fft_baseline.pslr_db(fft_range_profile),
        "fft_velocity_pslr_db": fft_baseline.pslr_db(fft_dopp_profile),
        "truth_distance_m": scenario.mue_path.d1,
        "truth_velocity": scenario.mue_path.v1,
    }


def validate_theory(ctx: RunContext, sinr_grid=(0.0, 5.0, 10.0),
                    trials: int = 200, master_seed: int = 0,
                    n_draws: int = 1000) -> ResultTable:
    """Simulated MUSIC MSEs next to perturbation predictions and CRBs.

    One fixed scenario per run; trials vary noise, symbols, and
    reflection phases only, matching the conditioning of the analytic
    formulas.
    """
    scen_seed, _ = trial_rng(master_seed, 0, 0)
    cfg = ctx.config["scenario"]
    scenario = generate_scenario(scen_seed, n_scatterers=int(cfg["n_scatterers"]),
                                 reflect_var=float(cfg["reflect_var"]),
                                 mue_x=cfg["mue_x"])
    beams = channel.build_beamformers(scenario, ctx.array)
    truth = scenario.mue_path
    lam = ctx.wave.wavelength(ctx.c)
    rows: list[ResultRow] = []
    for pi, sinr in enumerate(sinr_grid):
        p_tx = channel.calibrate_power_sense(scenario, ctx.wave, beams,
                                             ctx.noise, sinr, ctx.c)
        wave = ctx.wave.with_power(p_tx)
        acc: dict = {}
        for t in range(trials):
            _, rng = trial_rng(master_seed, pi + 1, t)
            echo = channel.synthesize_echo(scenario, wave, ctx.array, beams,
                                           ctx.noise, rng,
                                           fading=cfg["fading"], c=ctx.c)
            w0 = channel.sense_rx_beamformer(ctx.array, truth.aoa)
            h_bar = beamform_and_erase(echo.snapshots, w0, echo.symbols)
            per = fft_baseline.fft_range_doppler(h_bar, wave, c=ctx.c)
            r_ests, dec_r = music_range(h_bar, wave, c=ctx.c)
            d_hat = float(_nearest_estimate(
                r_ests, per.range_rt,
                tol=0.6 * per.range_bin_width).value) / 2.0
            f_ests, _ = music_doppler(h_bar, wave,
                                      n_sources=dec_r.source_count)
            f_est = _nearest_estimate(f_ests, per.doppler,
                                      period=1.0 / wave.symbol_duration,
                                      tol=0.6 * per.doppler_bin_width)
            f_hat = _principal_doppler(float(f_est.value),
                                       wave.symbol_duration)
            v_hat = lam * f_hat / 2.0
            acc.setdefault("range_mse", {}).setdefault("music", []).append(
                (d_hat - truth.d1) ** 2)
            acc.setdefault("velocity_mse", {}).setdefault("music", []).append(
                (v_hat - truth.v1) ** 2)
        rows.extend(_aggregate(acc, sinr, trials, master_seed))

        rep = theory.perturbation_report(scenario, wave, ctx.array, beams,
                                         ctx.noise, seed=master_seed,
                                         n_draws=n_draws, c=ctx.c)
        bound = theory.crb(wave, ctx.array, sinr, truth.aoa.azimuth,
                           truth.aoa.elevation, ctx.c)
        for metric, th_val, crb_val in (
                ("range_mse", rep.mse_distance, bound.distance),
                ("velocity_mse", rep.mse_velocity, bound.velocity)):
            rows.append(ResultRow(sinr, metric, "theory", th_val, 0.0,
                                  n_draws, master_seed))
            rows.append(ResultRow(sinr, metric, "crb", crb_val, 0.0,
                                  0, master_seed))
    return ResultTable(rows)


def crb_table(ctx: RunContext, sinr_grid=None, master_seed: int = 0) -> ResultTable:
    """Closed-form bounds across the SINR grid for a drawn scenario."""
    grid = list(ctx.config["sweep"]["sinr_grid_db"]) if sinr_grid is None \
        else list(sinr_grid)
    scen_seed, _ = trial_rng(master_seed, 0, 0)
    cfg = ctx.config["scenario"]
    scenario = generate_scenario(scen_seed, n_scatterers=int(cfg["n_scatterers"]),
                                 reflect_var=float(cfg["reflect_var"]),
                                 mue_x=cfg["mue_x"])
    truth = scenario.mue_path
    rows = []
    for sinr in grid:
        b = theory.crb(ctx.wave, ctx.array, sinr, truth.aoa.azimuth,
                       truth.aoa.elevation, ctx.c)
        for metric, val in (("range_mse", b.distance),
                            ("velocity_mse", b.velocity),
                            ("azimuth_mse", b.azimuth),
                            ("elevation_mse", b.elevation)):
            rows.append(ResultRow(sinr, metric, "crb", val, 0.0, 0, master_seed))
    return ResultTable(rows)


PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot result tables emitted alongside this script (needs matplotlib).\"\"\"
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt

path = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "table.csv")
series = defaultdict(lambda: ([], []))
with open(path) as fh:
    for row in csv.DictReader(fh):
        key = (row["metric"], row["series"])
        series[key][0].append(float(row["sinr_db"]))
        series[key][1].append(float(row["value"]))

metrics = sorted({m for m, _ in series})
fig, axes = plt.subplots(len(metrics), 1, figsize=(7, 4 * len(metrics)),
                         squeeze=False)
for ax, metric in zip(axes[:, 0], metrics):
    for (m, s), (x, y) in sorted(series.items()):
        if m != metric:
            continue
        ax.semilogy(x, y, marker="o", label=s)
    ax.set_xlabel("SINR (dB)")
    ax.set_ylabel(metric)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
fig.tight_layout()
out = path.with_suffix(".png")
fig.savefig(out, dpi=150)
print(f"wrote {out}")
"""


def emit_results(table: ResultTable, out_dir: str | Path,
                 name: str = "table") -> list[Path]:
    """Write the CSV and a companion plot script; returns written paths."""
    if not table.rows:
        metrics = ["azimuth_mse", "elevation_mse", "range_mse",
                   "velocity_mse", "location_mse", "ber", "pslr"]
        raise ValueError(
            "empty result table; available metrics: " + ", ".join(metrics))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    csv_path.write_text(table.to_csv())
    script_path = out / "plot_results.py"
    script_path.write_text(PLOT_SCRIPT)
    return [csv_path, script_path]
