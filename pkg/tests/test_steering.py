"""Steering vectors and their analytic derivatives against scalar and
finite-difference oracles."""

import numpy as np
import pytest

from jcs_music.steering import (Angle2D, ArrayConfig, doppler_steering,
                                doppler_steering_derivs, doppler_steering_grid,
                                range_steering, range_steering_derivs,
                                range_steering_grid, spatial_steering,
                                spatial_steering_derivs, spatial_steering_grid)

LAM = 0.00476


def cfg(rows=4, cols=4, spacing=None, lam=LAM):
    return ArrayConfig(rows=rows, cols=cols,
                       spacing=lam / 2 if spacing is None else spacing,
                       wavelength=lam)


def test_unit_modulus_entries():
    a = spatial_steering(cfg(8, 8), Angle2D(0.7, 1.1))
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.abs(range_steering(64, 480e3, 33.0)), 1.0,
                               atol=1e-12)
    np.testing.assert_allclose(np.abs(doppler_steering(32, 2.1e-6, 4e3)), 1.0,
                               atol=1e-12)


def test_zero_elevation_gives_all_ones():
    a = spatial_steering(cfg(5, 3), Angle2D(1.234, 0.0))
    np.testing.assert_allclose(a, np.ones(15), atol=1e-12)


def test_two_element_half_wave_endfire():
    a = spatial_steering(cfg(2, 1), Angle2D(0.0, np.pi / 2))
    np.testing.assert_allclose(a, [1.0, np.exp(-1j * np.pi)], atol=1e-12)


def test_per_element_scalar_oracle():
    c = cfg(2, 2)
    ang = Angle2D(np.pi / 4, np.pi / 3)
    a = spatial_steering(c, ang)
    k = 2 * np.pi / c.wavelength * c.spacing
    for p in range(2):
        for q in range(2):
            phase = -k * (p * np.cos(ang.azimuth) * np.sin(ang.elevation)
                          + q * np.sin(ang.azimuth) * np.sin(ang.elevation))
            assert abs(a[p * 2 + q] - np.exp(1j * phase)) < 1e-12


def test_row_major_stacking():
    c = cfg(3, 2)
    ang = Angle2D(0.3, 0.8)
    a = spatial_steering(c, ang)
    k = 2 * np.pi / c.wavelength * c.spacing
    # element (p=2, q=1) lives at index p*Q + q = 5
    phase = -k * (2 * np.cos(0.3) * np.sin(0.8) + 1 * np.sin(0.3) * np.sin(0.8))
    assert abs(a[5] - np.exp(1j * phase)) < 1e-12


def test_grid_matches_singles():
    c = cfg(4, 3)
    az = np.array([0.1, -1.2, 2.5])
    el = np.array([0.4, 1.0, 1.4])
    g = spatial_steering_grid(c, az, el)
    for i in range(3):
        np.testing.assert_allclose(g[:, i],
                                   spatial_steering(c, Angle2D(az[i], el[i])),
                                   atol=1e-12)
    rg = range_steering_grid(16, 480e3, np.array([10.0, 31.4]))
    np.testing.assert_allclose(rg[:, 1], range_steering(16, 480e3, 31.4),
                               atol=1e-12)
    dg = doppler_steering_grid(8, 2e-6, np.array([0.0, 5e3]))
    np.testing.assert_allclose(dg[:, 1], doppler_steering(8, 2e-6, 5e3),
                               atol=1e-12)


def test_range_dft_periodicity():
    nc, df = 32, 480e3
    c_light = 299792458.0
    k = 5
    r = c_light / (nc * df) * k
    a = range_steering(nc, df, r, c_light)
    dft_col = np.exp(-2j * np.pi * np.arange(nc) * k / nc)
    np.testing.assert_allclose(a, dft_col, atol=1e-9)


def test_doppler_conjugate_dft_periodicity():
    ms, t = 16, 2.083e-6
    k = 3
    a = doppler_steering(ms, t, k / (ms * t))
    col = np.exp(2j * np.pi * np.arange(ms) * k / ms)
    np.testing.assert_allclose(a, col, atol=1e-9)


def test_single_column_array_azimuth_symmetry():
    c = cfg(6, 1)
    a_pos = spatial_steering(c, Angle2D(0.9, 0.7))
    a_neg = spatial_steering(c, Angle2D(-0.9, 0.7))
    np.testing.assert_allclose(a_pos, a_neg, atol=1e-12)


def test_invalid_array_config():
    with pytest.raises(ValueError):
        ArrayConfig(rows=0, cols=4, spacing=1.0, wavelength=1.0)
    with pytest.raises(ValueError):
        ArrayConfig(rows=4, cols=4, spacing=-1.0, wavelength=1.0)


# -- derivative oracles -------------------------------------------------

def _fd(fun, x, h=1e-6):
    return (fun(x + h) - fun(x - h)) / (2 * h)


def _rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def test_spatial_derivs_match_finite_differences():
    c = cfg(4, 3)
    rng = np.random.default_rng(7)
    for _ in range(100):
        az = rng.uniform(-np.pi, np.pi)
        el = rng.uniform(0.05, np.pi / 2 - 0.05)
        first, second = spatial_steering_derivs(c, Angle2D(az, el))
        fd_az = _fd(lambda x: spatial_steering(c, Angle2D(x, el)), az)
        fd_el = _fd(lambda x: spatial_steering(c, Angle2D(az, x)), el)
        assert _rel_err(first[:, 0], fd_az) < 1e-5
        assert _rel_err(first[:, 1], fd_el) < 1e-5
        fd_azaz = _fd(lambda x: spatial_steering_derivs(c, Angle2D(x, el))[0][:, 0], az)
        fd_azel = _fd(lambda x: spatial_steering_derivs(c, Angle2D(az, x))[0][:, 0], el)
        fd_elel = _fd(lambda x: spatial_steering_derivs(c, Angle2D(az, x))[0][:, 1], el)
        assert _rel_err(second[:, 0, 0], fd_azaz) < 1e-5
        assert _rel_err(second[:, 0, 1], fd_azel) < 1e-5
        assert _rel_err(second[:, 1, 1], fd_elel) < 1e-5


def test_hessian_symmetry():
    _, second = spatial_steering_derivs(cfg(5, 4), Angle2D(0.3, 1.0))
    np.testing.assert_allclose(second[:, 0, 1], second[:, 1, 0], atol=1e-12)


def test_zero_elevation_azimuth_deriv_is_zero():
    first, _ = spatial_steering_derivs(cfg(4, 4), Angle2D(0.8, 0.0))
    np.testing.assert_allclose(first[:, 0], 0.0, atol=1e-12)


def test_range_doppler_derivs_match_finite_differences():
    rng = np.random.default_rng(11)
    for _ in range(100):
        r = rng.uniform(1.0, 500.0)
        f = rng.uniform(-2e5, 2e5)
        a, a1, a2 = range_steering_derivs(48, 480e3, r)
        fd1 = _fd(lambda x: range_steering_derivs(48, 480e3, x)[0], r, h=1e-6)
        fd2 = _fd(lambda x: range_steering_derivs(48, 480e3, x)[1], r, h=1e-6)
        assert _rel_err(a1, fd1) < 1e-5
        assert _rel_err(a2, fd2) < 1e-5
        b, b1, b2 = doppler_steering_derivs(24, 2.083e-6, f)
        fdb1 = _fd(lambda x: doppler_steering_derivs(24, 2.083e-6, x)[0], f, h=1e-3)
        fdb2 = _fd(lambda x: doppler_steering_derivs(24, 2.083e-6, x)[1], f, h=1e-3)
        assert _rel_err(b1, fdb1) < 1e-5
        assert _rel_err(b2, fdb2) < 1e-5


def test_range_first_deriv_at_zero():
    nc, df = 16, 480e3
    c_light = 299792458.0
    _, a1, _ = range_steering_derivs(nc, df, 0.0, c_light)
    expected = -2j * np.pi * np.arange(nc) * df / c_light
    np.testing.assert_allclose(a1, expected, atol=1e-18)


def test_doppler_second_deriv_identity():
    ms, t, f = 16, 2.083e-6, 7.3e3
    a, _, a2 = doppler_steering_derivs(ms, t, f)
    g = 2j * np.pi * np.arange(ms) * t
    np.testing.assert_allclose(a2, g ** 2 * a, atol=1e-15)
