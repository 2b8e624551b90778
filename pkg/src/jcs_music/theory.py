"""Analytic performance predictions: first-order perturbation MSEs for
AoA, range, Doppler, velocity, and location, plus closed-form CRBs.

The perturbation formulas condition on a deterministic noiseless signal
(reflection factors at their RMS magnitude) and are averaged over
explicit noise draws.  The noise matrix only enters each formula through
a fixed projection of one of its slices, so an equivalent low-dimensional
Gaussian vector is drawn instead of the full matrix; this is exact for
Gaussian noise and keeps draw averaging cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel, qam
from .channel import Beamformers, NoiseConfig, WaveformConfig
from .constants import SPEED_OF_LIGHT
from .scenario import Scenario
from .steering import (ArrayConfig, doppler_steering_derivs,
                       range_steering_derivs, spatial_steering,
                       spatial_steering_derivs)


@dataclass(frozen=True)
class TheoryReport:
    mse_azimuth: float          # rad^2
    mse_elevation: float        # rad^2
    mse_distance: float         # m^2, one-way
    mse_doppler: float          # Hz^2
    mse_velocity: float         # (m/s)^2
    mse_location: float         # m^2


@dataclass(frozen=True)
class CrbReport:
    distance: float             # m^2, one-way
    velocity: float             # (m/s)^2
    azimuth: float              # rad^2
    elevation: float            # rad^2


def inverse_symbol_power(order: int) -> float:
    """E[1 / |d|^2] over a uniform unit-energy QAM draw."""
    pts = qam.constellation(order)
    return float(np.mean(1.0 / np.abs(pts) ** 2))


def _complex_normal(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    std = np.sqrt(var / 2.0)
    return std * (rng.normal(size=shape) + 1j * rng.normal(size=shape))


def _null_basis(u_full: np.ndarray, rank: int) -> np.ndarray:
    return u_full[:, rank:]


def _effective_rank(s: np.ndarray, n_rows: int, n_cols: int,
                    noise_var: float, max_rank: int) -> int:
    """Signal components the estimator can actually resolve.

    Components whose singular value sits below the noise matrix's own
    singular-value scale, sigma*(sqrt(rows)+sqrt(cols)), are buried: the
    estimator's subspace split treats them as noise, so including them in
    the linear response (pseudo-inverse amplification and curvature)
    overstates the predicted error.  At least the dominant component is
    always kept.
    """
    floor = np.sqrt(noise_var) * (np.sqrt(n_rows) + np.sqrt(n_cols))
    return max(1, min(max_rank, int(np.sum(s > floor))))


def aoa_perturbation_draws(scenario: Scenario, wave: WaveformConfig,
                           array: ArrayConfig, beams: Beamformers,
                           noise: NoiseConfig, rng: np.random.Generator,
                           n_draws: int = 1000,
                           c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """Draws of the direct-path AoA error (azimuth, elevation), shape (2, n).

    First-order subspace perturbation: the error is a fixed linear map of
    the noise matrix projected onto the signal subspace, normalized by
    the noise-subspace curvature.
    """
    rms = np.array([np.sqrt(p.reflect_var_sense) for p in scenario.paths],
                   dtype=complex)
    real = channel.synthesize_echo(scenario, wave, array, beams, noise,
                                   rng, reflections=rms, noiseless=True, c=c)
    y = real.snapshots.reshape(array.size, -1)
    u, s, _ = np.linalg.svd(y, full_matrices=False)
    sigma_w2 = noise.total_sense_var
    rank = _effective_rank(s, y.shape[0], y.shape[1], sigma_w2,
                           scenario.n_paths)
    u_s, s_s = u[:, :rank], s[:rank]
    u_0 = _null_basis(u, rank)

    p0 = scenario.mue_path.aoa
    a = spatial_steering(array, p0)
    first, _ = spatial_steering_derivs(array, p0)
    proj0 = u_0 @ (u_0.conj().T @ first)            # P0 a1, (PQ, 2)
    h_p0 = np.real(first.conj().T @ proj0)          # 2x2 curvature (no 2x)
    # ||V_s Sigma^-1 U_s^H a|| with orthonormal V_s columns
    vnorm2 = float(np.sum(np.abs((u_s.conj().T @ a) / s_s) ** 2))
    z = _complex_normal(rng, (array.size, n_draws), sigma_w2 * vnorm2)
    rhs = np.real(proj0.conj().T @ z)               # (2, n_draws)
    return np.linalg.solve(h_p0, rhs)


def _beam_channel_noiseless(scenario: Scenario, wave: WaveformConfig,
                            array: ArrayConfig, beams: Beamformers,
                            noise: NoiseConfig, rng: np.random.Generator,
                            c: float) -> np.ndarray:
    """Noiseless symbol-erased per-beam channel matrix for the direct path."""
    rms = np.array([np.sqrt(p.reflect_var_sense) for p in scenario.paths],
                   dtype=complex)
    real = channel.synthesize_echo(scenario, wave, array, beams, noise,
                                   rng, reflections=rms, noiseless=True, c=c)
    w = channel.sense_rx_beamformer(array, scenario.mue_path.aoa)
    ybar = np.tensordot(w.conj(), real.signal, axes=([0], [0]))
    return ybar / real.symbols


def range_doppler_perturbation_draws(scenario: Scenario, wave: WaveformConfig,
                                     array: ArrayConfig, beams: Beamformers,
                                     noise: NoiseConfig,
                                     rng: np.random.Generator,
                                     n_draws: int = 1000,
                                     c: float = SPEED_OF_LIGHT):
    """Draws of round-trip range error and Doppler error for the direct path.

    Returns (delta_r_rt, delta_f), each shape (n_draws,).  The effective
    per-entry noise variance accounts for the unit-norm beamformer and
    the symbol division's power inflation E[1/|d|^2].
    """
    h_p = _beam_channel_noiseless(scenario, wave, array, beams, noise, rng, c)
    sigma_tr2 = noise.total_sense_var * inverse_symbol_power(wave.qam_order)
    lam = wave.wavelength(c)

    # range stage: SVD of the (N_c x M_s) noiseless matrix
    u, s, _ = np.linalg.svd(h_p, full_matrices=True)
    rank = _effective_rank(s, wave.n_subcarriers, wave.n_symbols,
                           sigma_tr2, scenario.n_paths)
    u_s, s_s, u_0 = u[:, :rank], s[:rank], u[:, rank:]
    r0 = 2.0 * scenario.mue_path.d1
    a, a1, _ = range_steering_derivs(wave.n_subcarriers,
                                     wave.subcarrier_spacing, r0, c)
    proj1 = u_0 @ (u_0.conj().T @ a1)
    h_r0 = float(np.real(np.vdot(a1, proj1)))
    vnorm2 = float(np.sum(np.abs((u_s.conj().T @ a) / s_s) ** 2))
    z = _complex_normal(rng, (wave.n_subcarriers, n_draws),
                        sigma_tr2 * vnorm2)
    delta_r = np.real(proj1.conj().T @ z) / h_r0

    # Doppler stage: SVD of the transposed matrix
    u, s, _ = np.linalg.svd(h_p.T, full_matrices=True)
    rank = _effective_rank(s, wave.n_symbols, wave.n_subcarriers,
                           sigma_tr2, scenario.n_paths)
    u_s, s_s, u_0 = u[:, :rank], s[:rank], u[:, rank:]
    f0 = 2.0 * scenario.mue_path.v1 / lam
    a, a1, _ = doppler_steering_derivs(wave.n_symbols, wave.symbol_duration, f0)
    proj1 = u_0 @ (u_0.conj().T @ a1)
    h_f0 = float(np.real(np.vdot(a1, proj1)))
    vnorm2 = float(np.sum(np.abs((u_s.conj().T @ a) / s_s) ** 2))
    z = _complex_normal(rng, (wave.n_symbols, n_draws), sigma_tr2 * vnorm2)
    delta_f = np.real(proj1.conj().T @ z) / h_f0
    return delta_r, delta_f


def location_error_samples(delta_d: np.ndarray, delta_az: np.ndarray,
                           delta_el: np.ndarray, distance: float,
                           azimuth: float, elevation: float) -> np.ndarray:
    """Squared location error per draw from first-order coordinate errors.

    delta_d is the one-way radial error; angles are the spherical
    coordinates of the target in the array frame.
    """
    se, ce = np.sin(elevation), np.cos(elevation)
    sa, ca = np.sin(azimuth), np.cos(azimuth)
    r = distance
    dx = delta_d * se * ca + r * (delta_el * ce * ca - delta_az * se * sa)
    dy = delta_d * se * sa + r * (delta_az * se * ca + delta_el * ce * sa)
    dz = delta_d * ce - r * delta_el * se
    return dx ** 2 + dy ** 2 + dz ** 2


def perturbation_report(scenario: Scenario, wave: WaveformConfig,
                        array: ArrayConfig, beams: Beamformers,
                        noise: NoiseConfig, seed: int = 0,
                        n_draws: int = 1000,
                        c: float = SPEED_OF_LIGHT) -> TheoryReport:
    """Predicted direct-path estimation MSEs at the configured power.

    Reported range/velocity MSEs follow the harness conventions: one-way
    distance (round-trip error halved) and radial velocity (half a
    wavelength per unit Doppler).
    """
    rng = np.random.default_rng(seed)
    dp = aoa_perturbation_draws(scenario, wave, array, beams, noise, rng,
                                n_draws, c)
    dr_rt, df = range_doppler_perturbation_draws(scenario, wave, array, beams,
                                                 noise, rng, n_draws, c)
    lam = wave.wavelength(c)
    delta_d = dr_rt / 2.0
    p0 = scenario.mue_path
    loc = location_error_samples(delta_d, dp[0], dp[1], p0.d1,
                                 p0.aoa.azimuth, p0.aoa.elevation)
    return TheoryReport(mse_azimuth=float(np.mean(dp[0] ** 2)),
                        mse_elevation=float(np.mean(dp[1] ** 2)),
                        mse_distance=float(np.mean(delta_d ** 2)),
                        mse_doppler=float(np.mean(df ** 2)),
                        mse_velocity=float(np.mean((lam * df / 2.0) ** 2)),
                        mse_location=float(np.mean(loc)))


def crb(wave: WaveformConfig, array: ArrayConfig, sinr_db: float,
        azimuth: float, elevation: float,
        c: float = SPEED_OF_LIGHT) -> CrbReport:
    """Closed-form single-target bounds at a given linear-scale S-SINR."""
    gamma = 10.0 ** (sinr_db / 10.0)
    if gamma <= 0:
        raise ValueError("SINR must be positive in linear scale")
    lam = wave.wavelength(c)
    nc, ms = wave.n_subcarriers, wave.n_symbols
    pq = array.size
    n2 = np.sum(np.arange(nc) ** 2) * wave.subcarrier_spacing ** 2
    m2 = np.sum(np.arange(ms) ** 2) * wave.symbol_duration ** 2
    c_r = c ** 2 / (32.0 * np.pi ** 2 * gamma * ms * pq * n2)
    c_v = lam ** 2 / (32.0 * np.pi ** 2 * gamma * nc * pq * m2)

    p = np.repeat(np.arange(array.rows), array.cols)
    q = np.tile(np.arange(array.cols), array.rows)
    se, ce = np.sin(elevation), np.cos(elevation)
    sa, ca = np.sin(azimuth), np.cos(azimuth)
    w_az = np.sum((q * ca * se - p * sa * se) ** 2)
    w_el = np.sum((p * ca * ce + q * sa * ce) ** 2)
    base = 8.0 * np.pi ** 2 * array.spacing ** 2 * gamma * nc * ms
    c_az = lam ** 2 / (base * w_az) if w_az > 0 else float("inf")
    c_el = lam ** 2 / (base * w_el) if w_el > 0 else float("inf")
    return CrbReport(distance=float(c_r), velocity=float(c_v),
                     azimuth=float(c_az), elevation=float(c_el))
