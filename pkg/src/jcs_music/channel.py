"""OFDM waveform numerology, beamforming, power calibration, and synthesis
of echo and communication snapshots at calibrated SINR."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import qam
from .constants import SPEED_OF_LIGHT
from .scenario import Scenario
from .steering import Angle2D, ArrayConfig, spatial_steering


@dataclass(frozen=True)
class WaveformConfig:
    """OFDM numerology plus transmit power."""

    n_subcarriers: int = 256
    n_symbols: int = 64
    subcarrier_spacing: float = 480e3
    guard_interval: float = 0.0
    carrier_freq: float = 63e9
    qam_order: int = 4
    tx_power: float = 1.0

    def __post_init__(self):
        if self.qam_order not in (4, 16, 64):
            raise ValueError("qam_order must be 4, 16, or 64")
        if self.subcarrier_spacing <= 0 or self.guard_interval < 0:
            raise ValueError("invalid numerology")

    @property
    def symbol_duration(self) -> float:
        return 1.0 / self.subcarrier_spacing + self.guard_interval

    @property
    def bandwidth(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing

    def wavelength(self, c: float = SPEED_OF_LIGHT) -> float:
        return c / self.carrier_freq

    def with_power(self, p: float) -> "WaveformConfig":
        return replace(self, tx_power=p)


@dataclass(frozen=True)
class NoiseConfig:
    """Noise floor and interference levels."""

    noise_var: float = 4.9177e-12
    inr_sense_db: float = 3.0
    inr_comm_db: float = 3.0

    @property
    def interference_power_sense(self) -> float:
        return self.noise_var * 10.0 ** (self.inr_sense_db / 10.0)

    @property
    def interference_power_comm(self) -> float:
        return self.noise_var * 10.0 ** (self.inr_comm_db / 10.0)

    @property
    def total_sense_var(self) -> float:
        return self.noise_var + self.interference_power_sense

    @property
    def total_comm_var(self) -> float:
        return self.noise_var + self.interference_power_comm


@dataclass(frozen=True)
class Beamformers:
    tx: np.ndarray                 # (PQ,), unit norm
    rx_comm: np.ndarray            # (PrQr,), unit norm
    tx_gains: np.ndarray           # chi_l = a(p_l)^T tx per path


def build_beamformers(scenario: Scenario, tx_array: ArrayConfig,
                      rx_array: ArrayConfig | None = None) -> Beamformers:
    """Least-squares beams aimed at the direct path.

    The pseudo-inverse of a single steering row is its scaled conjugate,
    so the unit-norm transmit beam is conj(a)/||a|| and the aligned gain
    is ||a|| = sqrt(P*Q).
    """
    a0 = spatial_steering(tx_array, scenario.mue_path.aoa)
    w_tx = np.conj(a0) / np.linalg.norm(a0)
    if rx_array is None or rx_array.size == 1:
        w_rx = np.ones(1, dtype=complex)
    else:
        # MUE sees the direct path at broadside of its own frame; a full
        # MUE-frame geometry is out of scope, so aim at boresight
        ar = spatial_steering(rx_array, Angle2D(0.0, 0.0))
        w_rx = ar / np.linalg.norm(ar)
    gains = np.array([spatial_steering(tx_array, p.aoa) @ w_tx
                      for p in scenario.paths])
    return Beamformers(tx=w_tx, rx_comm=w_rx, tx_gains=gains)


def sense_rx_beamformer(tx_array: ArrayConfig, angle: Angle2D) -> np.ndarray:
    """Unit-norm echo receive beam for one detected AoA."""
    a = spatial_steering(tx_array, angle)
    return a / np.linalg.norm(a)


def echo_amplitude(scenario: Scenario, wave: WaveformConfig, l: int,
                   c: float = SPEED_OF_LIGHT) -> float:
    """Deterministic part of b_S,l: two-way spreading loss, unit reflection."""
    lam = wave.wavelength(c)
    d = scenario.paths[l].d1
    return float(np.sqrt(lam ** 2 / ((4.0 * np.pi) ** 3 * d ** 4)))


def comm_los_amplitude(scenario: Scenario, wave: WaveformConfig,
                       c: float = SPEED_OF_LIGHT) -> float:
    lam = wave.wavelength(c)
    return float(lam / (4.0 * np.pi * scenario.mue_path.d1))


def comm_nlos_amplitude(scenario: Scenario, wave: WaveformConfig, l: int,
                        c: float = SPEED_OF_LIGHT) -> float:
    lam = wave.wavelength(c)
    p = scenario.paths[l]
    return float(np.sqrt(lam ** 2 / ((4.0 * np.pi) ** 3 * p.d1 ** 2 * p.d2 ** 2)))


def draw_reflections(scenario: Scenario, rng: np.random.Generator,
                     fading: str = "phase") -> np.ndarray:
    """One reflection factor per path for a frame (slow fading).

    "phase": fixed magnitude sqrt(var), uniform phase — keeps the frame
    SINR deterministic.  "rayleigh": CN(0, var).
    """
    out = np.empty(scenario.n_paths, dtype=complex)
    for i, p in enumerate(scenario.paths):
        sig = np.sqrt(p.reflect_var_sense)
        if fading == "phase":
            out[i] = sig * np.exp(2j * np.pi * rng.uniform())
        elif fading == "rayleigh":
            out[i] = sig * (rng.normal() + 1j * rng.normal()) / np.sqrt(2.0)
        else:
            raise ValueError(f"unknown fading mode {fading!r}")
    return out


def calibrate_power_sense(scenario: Scenario, wave: WaveformConfig,
                          beams: Beamformers, noise: NoiseConfig,
                          target_sinr_db: float,
                          c: float = SPEED_OF_LIGHT) -> float:
    """Transmit power that puts the direct echo at the target S-SINR.

    Inverts sinr = P * |b_S,0 * chi_0|^2 / (P_IS + sigma_N^2) with the
    reflection factor at its RMS magnitude.
    """
    gain = echo_amplitude(scenario, wave, 0, c) * abs(beams.tx_gains[0])
    gain2 = gain ** 2 * scenario.mue_path.reflect_var_sense
    if gain2 <= 0:
        raise ValueError("zero echo path gain; cannot calibrate power")
    sinr = 10.0 ** (target_sinr_db / 10.0)
    return sinr * noise.total_sense_var / gain2


def calibrate_power_comm(scenario: Scenario, wave: WaveformConfig,
                         beams: Beamformers, noise: NoiseConfig,
                         target_sinr_db: float,
                         c: float = SPEED_OF_LIGHT) -> float:
    """Transmit power that puts the LoS link at the target C-SINR."""
    rx_gain = abs(np.vdot(beams.rx_comm, np.ones(len(beams.rx_comm))))
    gain = comm_los_amplitude(scenario, wave, c) * abs(beams.tx_gains[0]) * rx_gain
    if gain <= 0:
        raise ValueError("zero LoS gain; cannot calibrate power")
    sinr = 10.0 ** (target_sinr_db / 10.0)
    return sinr * noise.total_comm_var / gain ** 2


@dataclass(frozen=True)
class EchoRealization:
    """Echo snapshots with their exact signal/noise split."""

    snapshots: np.ndarray          # (PQ, N_c, M_s)
    signal: np.ndarray             # (PQ, N_c, M_s)
    noise: np.ndarray              # (PQ, N_c, M_s)
    symbols: np.ndarray            # (N_c, M_s)
    labels: np.ndarray
    reflections: np.ndarray        # per-path beta draw
    steering: np.ndarray           # (PQ, L) echo steering matrix


def path_phases(scenario: Scenario, wave: WaveformConfig, l: int,
                c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """Echo phase ramp e^{-j2 pi n df tau} e^{+j2 pi m T f}, (N_c, M_s)."""
    p = scenario.paths[l]
    lam = wave.wavelength(c)
    tau = 2.0 * p.d1 / c
    fd = 2.0 * p.v1 / lam
    n = np.arange(wave.n_subcarriers)
    m = np.arange(wave.n_symbols)
    rng_ph = np.exp(-2j * np.pi * n * wave.subcarrier_spacing * tau)
    dop_ph = np.exp(2j * np.pi * m * wave.symbol_duration * fd)
    return np.outer(rng_ph, dop_ph)


def synthesize_echo(scenario: Scenario, wave: WaveformConfig,
                    tx_array: ArrayConfig, beams: Beamformers,
                    noise: NoiseConfig, rng: np.random.Generator,
                    symbols: np.ndarray | None = None,
                    labels: np.ndarray | None = None,
                    reflections: np.ndarray | None = None,
                    fading: str = "phase",
                    c: float = SPEED_OF_LIGHT,
                    noiseless: bool = False) -> EchoRealization:
    """Received echo tensor Y_S at the BS across all subcarriers/symbols."""
    nc, ms = wave.n_subcarriers, wave.n_symbols
    if symbols is None:
        symbols, labels = qam.random_symbols((nc, ms), wave.qam_order, rng)
    elif labels is None:
        labels = np.zeros_like(symbols, dtype=int)
    if reflections is None:
        reflections = draw_reflections(scenario, rng, fading)

    steering = np.column_stack([spatial_steering(tx_array, p.aoa)
                                for p in scenario.paths])
    signal = np.zeros((tx_array.size, nc, ms), dtype=complex)
    amp = np.sqrt(wave.tx_power)
    for l in range(scenario.n_paths):
        b = echo_amplitude(scenario, wave, l, c) * reflections[l]
        gain = b * beams.tx_gains[l]
        contrib = amp * gain * symbols * path_phases(scenario, wave, l, c)
        signal += steering[:, l][:, None, None] * contrib[None, :, :]

    if noiseless:
        nse = np.zeros_like(signal)
    else:
        std = np.sqrt(noise.total_sense_var / 2.0)
        nse = std * (rng.normal(size=signal.shape)
                     + 1j * rng.normal(size=signal.shape))
    return EchoRealization(snapshots=signal + nse, signal=signal, noise=nse,
                           symbols=symbols, labels=labels,
                           reflections=reflections, steering=steering)


@dataclass(frozen=True)
class CommRealization:
    """Post-beamforming scalar communication samples and true CSI."""

    samples: np.ndarray            # (N_c, M_s) received y_C
    csi: np.ndarray                # (N_c, M_s) true h_C
    noise: np.ndarray
    symbols: np.ndarray
    labels: np.ndarray


def comm_csi(scenario: Scenario, wave: WaveformConfig, beams: Beamformers,
             reflections: np.ndarray | None = None,
             rng: np.random.Generator | None = None,
             fading: str = "phase",
             c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """True scalar channel h_C[n, m] seen through the aligned beams."""
    nc, ms = wave.n_subcarriers, wave.n_symbols
    lam = wave.wavelength(c)
    n = np.arange(nc)
    m = np.arange(ms)
    rx_gain = np.vdot(beams.rx_comm, np.ones(len(beams.rx_comm)))

    p0 = scenario.mue_path
    tau0 = p0.d1 / c
    fd0 = p0.v1 / lam
    h = (comm_los_amplitude(scenario, wave, c) * beams.tx_gains[0] * rx_gain
         * np.outer(np.exp(-2j * np.pi * n * wave.subcarrier_spacing * tau0),
                    np.exp(2j * np.pi * m * wave.symbol_duration * fd0)))

    if scenario.n_paths > 1:
        if reflections is None:
            if rng is None:
                raise ValueError("need reflections or an rng for NLoS paths")
            reflections = draw_reflections(scenario, rng, fading)
        for l in range(1, scenario.n_paths):
            p = scenario.paths[l]
            tau = (p.d1 + p.d2) / c
            fd = (p.v1 + p.v2) / lam
            b = comm_nlos_amplitude(scenario, wave, l, c) * reflections[l]
            h += (b * beams.tx_gains[l] * rx_gain
                  * np.outer(np.exp(-2j * np.pi * n * wave.subcarrier_spacing * tau),
                             np.exp(2j * np.pi * m * wave.symbol_duration * fd)))
    return h


def synthesize_comm(scenario: Scenario, wave: WaveformConfig,
                    beams: Beamformers, noise: NoiseConfig,
                    rng: np.random.Generator,
                    symbols: np.ndarray | None = None,
                    labels: np.ndarray | None = None,
                    reflections: np.ndarray | None = None,
                    fading: str = "phase",
                    c: float = SPEED_OF_LIGHT,
                    noiseless: bool = False) -> CommRealization:
    """Received communication samples y_C at the MUE."""
    nc, ms = wave.n_subcarriers, wave.n_symbols
    if symbols is None:
        symbols, labels = qam.random_symbols((nc, ms), wave.qam_order, rng)
    elif labels is None:
        labels = np.zeros_like(symbols, dtype=int)
    h = comm_csi(scenario, wave, beams, reflections, rng, fading, c)
    if noiseless:
        nse = np.zeros((nc, ms), dtype=complex)
    else:
        std = np.sqrt(noise.total_comm_var / 2.0)
        nse = std * (rng.normal(size=(nc, ms)) + 1j * rng.normal(size=(nc, ms)))
    samples = np.sqrt(wave.tx_power) * symbols * h + nse
    return CommRealization(samples=samples, csi=h, noise=nse,
                           symbols=symbols, labels=labels)
