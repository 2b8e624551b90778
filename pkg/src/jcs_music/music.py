"""MUSIC estimators: 2D AoA search, per-beam symbol erasure, range and
Doppler spectra, and coarse-grid plus Newton two-step refinement."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import WaveformConfig
from .constants import SPEED_OF_LIGHT
from .steering import (Angle2D, ArrayConfig, doppler_steering_derivs,
                       doppler_steering_grid, range_steering_derivs,
                       range_steering_grid, spatial_steering,
                       spatial_steering_derivs, spatial_steering_grid)
from .subspace import (SubspaceDecomposition, covariance, decompose,
                       smoothed_covariance)

NEWTON_MAX_ITER = 20
NEWTON_TOL = 1e-7
CURVATURE_TOL = 1e-14


@dataclass(frozen=True)
class SpectrumEstimate:
    value: np.ndarray | float       # refined parameter(s)
    spectrum: float                 # S = 1/f at the refined point
    objective: float                # f at the refined point
    iterations: int
    converged: bool


def _objective_1d(basis: np.ndarray, a: np.ndarray) -> float:
    proj = basis.conj().T @ a
    return float(np.real(np.vdot(proj, proj)))


def newton_refine_1d(x0: float, derivs, scale: float) -> SpectrumEstimate:
    """Minimize a 1-D spectrum objective by Newton descent.

    derivs(x) must return (f, f', f'').  scale is the parameter's natural
    unit (coarse cell width); iteration stops once |update| < tol * scale.
    On singular curvature or an objective increase the start point is
    kept and the estimate flagged unconverged.
    """
    x = x0
    f0, _, _ = derivs(x0)
    f_best = f0
    converged = False
    it = 0
    for it in range(1, NEWTON_MAX_ITER + 1):
        f, g, h = derivs(x)
        if abs(h) < CURVATURE_TOL:
            x, f_best = x0, f0
            break
        step = g / h
        x_new = x - step
        f_new, _, _ = derivs(x_new)
        if f_new > f_best + 1e-12:
            x, f_best = x0, f0
            break
        x, f_best = x_new, f_new
        if abs(step) < NEWTON_TOL * scale:
            converged = True
            break
    f_final, _, _ = derivs(x)
    return SpectrumEstimate(value=x, spectrum=1.0 / max(f_final, 1e-300),
                            objective=f_final, iterations=it,
                            converged=converged)


def _peaks_1d(spec: np.ndarray, n_peaks: int) -> np.ndarray:
    """Indices of strict local maxima, strongest first, top n_peaks."""
    left = np.roll(spec, 1)
    right = np.roll(spec, -1)
    mask = (spec > left) & (spec > right)
    mask[0] = spec[0] > spec[1]
    mask[-1] = spec[-1] > spec[-2]
    idx = np.flatnonzero(mask)
    if len(idx) == 0:
        idx = np.array([int(np.argmax(spec))])
    order = np.argsort(spec[idx])[::-1]
    return idx[order][:n_peaks]


def _peaks_2d(spec: np.ndarray, n_peaks: int, wrap_axis0: bool = True):
    """(i, j) indices of strict 8-neighbor local maxima, strongest first.

    Axis 0 (azimuth) is treated circularly when wrap_axis0 is set; axis 1
    edges compare against available neighbors only.
    """
    s = spec
    best = np.full(s.shape, -np.inf)
    for di in (-1, 0, 1):
        shifted = np.roll(s, di, axis=0)
        if not wrap_axis0:
            if di == 1:
                shifted[0, :] = -np.inf
            elif di == -1:
                shifted[-1, :] = -np.inf
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            sh = np.roll(shifted, dj, axis=1)
            if dj == 1:
                sh[:, 0] = -np.inf
            elif dj == -1:
                sh[:, -1] = -np.inf
            best = np.maximum(best, sh)
    mask = s > best
    ii, jj = np.nonzero(mask)
    if len(ii) == 0:
        flat = int(np.argmax(s))
        ii, jj = np.array([flat // s.shape[1]]), np.array([flat % s.shape[1]])
    order = np.argsort(s[ii, jj])[::-1]
    return ii[order][:n_peaks], jj[order][:n_peaks]


@lru_cache(maxsize=8)
def _aoa_grid(rows: int, cols: int, spacing: float, wavelength: float,
              step_deg: float):
    """Coarse AoA grid and its steering matrix, cached per array config."""
    az = np.deg2rad(np.arange(-180.0, 180.0, step_deg))
    el = np.deg2rad(np.arange(0.0, 90.0 + step_deg / 2, step_deg))
    azg, elg = np.meshgrid(az, el, indexing="ij")
    cfg = ArrayConfig(rows, cols, spacing, wavelength)
    a = spatial_steering_grid(cfg, azg.ravel(), elg.ravel())
    return az, el, a


def music_aoa(snapshots: np.ndarray, array: ArrayConfig,
              grid_step_deg: float = 1.0, epsilon: float = 1.0,
              n_sources: int | None = None):
    """2D AoA estimates from echo snapshots.

    snapshots: (PQ, ...) tensor, flattened to (PQ, n_snap).
    Returns (list of SpectrumEstimate with Angle2D-like value arrays,
    SubspaceDecomposition).
    """
    y = snapshots.reshape(snapshots.shape[0], -1)
    r = covariance(y)
    dec = decompose(r, epsilon=epsilon,
                    max_rank=min(y.shape), n_sources=n_sources)
    us = dec.signal_basis
    un = dec.noise_basis

    az, el, a_grid = _aoa_grid(array.rows, array.cols, array.spacing,
                               array.wavelength, grid_step_deg)
    # f = ||a||^2 - ||U_s^H a||^2; signal-subspace form is cheap when
    # the source count is small
    proj = us.conj().T @ a_grid
    f_grid = (array.size - np.sum(np.abs(proj) ** 2, axis=0))
    f_grid = f_grid.reshape(len(az), len(el))
    spec = 1.0 / np.maximum(f_grid, 1e-300)

    ii, jj = _peaks_2d(spec, dec.source_count, wrap_axis0=True)
    scale = np.deg2rad(grid_step_deg)
    estimates = []
    for i, j in zip(ii, jj):
        est = _newton_refine_aoa(np.array([az[i], el[j]]), un, array, scale)
        estimates.append(est)
    return estimates, dec


def _newton_refine_aoa(p0: np.ndarray, noise_basis: np.ndarray,
                       array: ArrayConfig, scale: float) -> SpectrumEstimate:
    un = noise_basis

    def evaluate(p):
        ang = Angle2D(float(p[0]), float(p[1]))
        first, second = spatial_steering_derivs(array, ang)
        a = spatial_steering(array, ang)
        wa = un @ (un.conj().T @ a)
        f = float(np.real(np.vdot(a, wa)))
        grad = 2.0 * np.real(first.conj().T @ wa)
        w1 = un @ (un.conj().T @ first)
        hess = 2.0 * np.real(first.conj().T @ w1)
        for r_ in range(2):
            for c_ in range(2):
                hess[r_, c_] += 2.0 * np.real(np.vdot(second[:, r_, c_], wa))
        return f, grad, hess

    p = p0.copy()
    f0, _, _ = evaluate(p0)
    f_best = f0
    converged = False
    it = 0
    for it in range(1, NEWTON_MAX_ITER + 1):
        f, g, h = evaluate(p)
        det = np.linalg.det(h)
        if abs(det) < CURVATURE_TOL:
            p, f_best = p0.copy(), f0
            break
        step = np.linalg.solve(h, g)
        p_new = p - step
        f_new, _, _ = evaluate(p_new)
        if f_new > f_best + 1e-12:
            p, f_best = p0.copy(), f0
            break
        p, f_best = p_new, f_new
        if np.max(np.abs(step)) < NEWTON_TOL * scale:
            converged = True
            break
    f_final, _, _ = evaluate(p)
    return SpectrumEstimate(value=p, spectrum=1.0 / max(f_final, 1e-300),
                            objective=f_final, iterations=it,
                            converged=converged)


def beamform_and_erase(snapshots: np.ndarray, w_rx: np.ndarray,
                       symbols: np.ndarray) -> np.ndarray:
    """Beamform the echo tensor and divide out the transmit symbols.

    snapshots: (PQ, N_c, M_s); returns the (N_c, M_s) per-beam channel
    estimate H_bar.
    """
    if np.any(symbols == 0):
        raise ValueError("cannot erase zero-valued symbols")
    ybar = np.tensordot(w_rx.conj(), snapshots, axes=([0], [0]))
    return ybar / symbols


def music_range(h_bar: np.ndarray, wave: WaveformConfig,
                c: float = SPEED_OF_LIGHT, epsilon: float = 1.0,
                n_sources: int | None = None, n_peaks: int | None = None):
    """Round-trip range estimates from a per-beam channel matrix."""
    nc = wave.n_subcarriers
    r_cov = covariance(h_bar)          # (N_c, N_c), divides by M_s
    dec = decompose(r_cov, epsilon=epsilon,
                    max_rank=min(h_bar.shape), n_sources=n_sources)
    us, un = dec.signal_basis, dec.noise_basis

    r_max = c / wave.subcarrier_spacing           # unambiguous round trip
    step = c / (4.0 * wave.bandwidth)             # half the FFT bin
    grid = np.arange(0.0, r_max, step)
    a_grid = range_steering_grid(nc, wave.subcarrier_spacing, grid, c)
    f_grid = nc - np.sum(np.abs(us.conj().T @ a_grid) ** 2, axis=0)
    spec = 1.0 / np.maximum(f_grid, 1e-300)

    take = dec.source_count if n_peaks is None else n_peaks
    idx = _peaks_1d(spec, take)

    def derivs(r):
        a, a1, a2 = range_steering_derivs(nc, wave.subcarrier_spacing, float(r), c)
        wa = un @ (un.conj().T @ a)
        f = float(np.real(np.vdot(a, wa)))
        g = 2.0 * float(np.real(np.vdot(a1, wa)))
        wa1 = un @ (un.conj().T @ a1)
        h = 2.0 * float(np.real(np.vdot(a2, wa)) + np.real(np.vdot(a1, wa1)))
        return f, g, h

    estimates = [newton_refine_1d(float(grid[i]), derivs, step) for i in idx]
    return estimates, dec


def music_doppler(h_bar: np.ndarray, wave: WaveformConfig,
                  epsilon: float = 1.0, n_sources: int | None = None,
                  n_peaks: int | None = None):
    """Doppler-frequency estimates from a per-beam channel matrix."""
    ms = wave.n_symbols
    r_cov = covariance(h_bar.T)         # (1/N_c) H^T H^*
    dec = decompose(r_cov, epsilon=epsilon,
                    max_rank=min(h_bar.shape), n_sources=n_sources)
    us, un = dec.signal_basis, dec.noise_basis

    t = wave.symbol_duration
    f_max = 1.0 / t
    step = 1.0 / (2.0 * ms * t)
    grid = np.arange(0.0, f_max, step)
    a_grid = doppler_steering_grid(ms, t, grid)
    f_grid = ms - np.sum(np.abs(us.conj().T @ a_grid) ** 2, axis=0)
    spec = 1.0 / np.maximum(f_grid, 1e-300)

    take = dec.source_count if n_peaks is None else n_peaks
    idx = _peaks_1d(spec, take)

    def derivs(f):
        a, a1, a2 = doppler_steering_derivs(ms, t, float(f))
        wa = un @ (un.conj().T @ a)
        fv = float(np.real(np.vdot(a, wa)))
        g = 2.0 * float(np.real(np.vdot(a1, wa)))
        wa1 = un @ (un.conj().T @ a1)
        h = 2.0 * float(np.real(np.vdot(a2, wa)) + np.real(np.vdot(a1, wa1)))
        return fv, g, h

    estimates = [newton_refine_1d(float(grid[i]), derivs, step) for i in idx]
    return estimates, dec


def range_spectrum(h_bar: np.ndarray, wave: WaveformConfig,
                   grid: np.ndarray, c: float = SPEED_OF_LIGHT,
                   n_sources: int | None = None,
                   window: int | None = None) -> np.ndarray:
    """MUSIC range pseudo-spectrum sampled on an arbitrary grid.

    window selects a subaperture-smoothed forward-backward covariance
    instead of the plain one; robust at very low SINR at the cost of a
    wider main lobe.
    """
    if window is None:
        dim = wave.n_subcarriers
        dec = decompose(covariance(h_bar), max_rank=min(h_bar.shape),
                        n_sources=n_sources)
    else:
        dim = window
        dec = decompose(smoothed_covariance(h_bar, window),
                        n_sources=n_sources)
    a_grid = range_steering_grid(dim, wave.subcarrier_spacing, grid, c)
    f = dim - np.sum(np.abs(dec.signal_basis.conj().T @ a_grid) ** 2, axis=0)
    return 1.0 / np.maximum(f, 1e-300)


def doppler_spectrum(h_bar: np.ndarray, wave: WaveformConfig,
                     grid: np.ndarray,
                     n_sources: int | None = None,
                     window: int | None = None) -> np.ndarray:
    """MUSIC Doppler pseudo-spectrum sampled on an arbitrary grid."""
    if window is None:
        dim = wave.n_symbols
        dec = decompose(covariance(h_bar.T), max_rank=min(h_bar.shape),
                        n_sources=n_sources)
    else:
        dim = window
        dec = decompose(smoothed_covariance(h_bar.T, window),
                        n_sources=n_sources)
    a_grid = doppler_steering_grid(dim, wave.symbol_duration, grid)
    f = dim - np.sum(np.abs(dec.signal_basis.conj().T @ a_grid) ** 2, axis=0)
    return 1.0 / np.maximum(f, 1e-300)
