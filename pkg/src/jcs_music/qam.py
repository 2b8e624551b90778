"""Gray-mapped square QAM with unit average symbol energy."""

from __future__ import annotations

import numpy as np

_ORDERS = (4, 16, 64)


def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


def constellation(order: int) -> np.ndarray:
    """Unit-energy Gray-labelled square QAM points, indexed by symbol label.

    Label bits split evenly between I (high bits) and Q (low bits); each
    half is Gray-coded over the PAM levels, so adjacent points differ in
    one bit per axis.
    """
    if order not in _ORDERS:
        raise ValueError(f"unsupported QAM order {order}; choose from {_ORDERS}")
    side = int(np.sqrt(order))
    bits_per_axis = side.bit_length() - 1
    levels = 2 * np.arange(side) - (side - 1)  # odd integers, ascending
    # scale so that E|d|^2 = 1 over a uniform draw
    scale = np.sqrt(2.0 * (side * side - 1) / 3.0)
    labels = np.arange(order)
    i_bits = labels >> bits_per_axis
    q_bits = labels & (side - 1)
    # point at axis position p carries Gray code gray(p); invert so that a
    # label's bit half selects its level position
    inv = np.empty(side, dtype=int)
    inv[_gray(np.arange(side))] = np.arange(side)
    points = (levels[inv[i_bits]] + 1j * levels[inv[q_bits]]) / scale
    return points


def symbols_from_labels(labels: np.ndarray, order: int) -> np.ndarray:
    return constellation(order)[np.asarray(labels)]


def random_symbols(shape, order: int, rng: np.random.Generator):
    """Uniform random QAM symbols; returns (symbols, labels)."""
    labels = rng.integers(0, order, size=shape)
    return constellation(order)[labels], labels


def preamble(n_subcarriers: int, n_symbols: int, order: int = 4) -> np.ndarray:
    """Deterministic unit-modulus-envelope preamble grid.

    Built from a fixed-seed QAM draw so it is constant across calls and
    processes but has the same statistics as data symbols.
    """
    rng = np.random.default_rng(0x9E3779B9)
    sym, _ = random_symbols((n_subcarriers, n_symbols), order, rng)
    return sym


def demodulate(received: np.ndarray, order: int) -> np.ndarray:
    """ML hard decision: nearest constellation point, returns labels."""
    points = constellation(order)
    r = np.asarray(received)
    d2 = np.abs(r[..., None] - points) ** 2
    return np.argmin(d2, axis=-1)


def labels_to_bits(labels: np.ndarray, order: int) -> np.ndarray:
    """Unpack symbol labels into bits, MSB first, shape (..., log2(order))."""
    nbits = order.bit_length() - 1
    shifts = np.arange(nbits - 1, -1, -1)
    return (np.asarray(labels)[..., None] >> shifts) & 1


def bit_error_rate(tx_labels: np.ndarray, rx_labels: np.ndarray, order: int) -> float:
    tx = labels_to_bits(tx_labels, order)
    rx = labels_to_bits(rx_labels, order)
    return float(np.mean(tx != rx))
