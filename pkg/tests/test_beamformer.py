import math

import numpy as np
import pytest

from nearfield.beamformer import (
    AnalogCombiner,
    digital_steer,
    lorentzian_residual,
    lorentzian_weight,
    lossy_relative_gain,
    matched_filter_argmax,
    matched_filter_powers,
    microstrip_factor,
    microstrip_factors,
    optimal_gain,
    receive_analog_combiner,
    relative_gain,
    relative_gains,
    transmit_focus,
    transmit_gain,
)
from nearfield.channel import focusing_vector, los_channel
from nearfield.geometry import DmaConfig, PolarPosition, fresnel_distances


def test_lorentzian_weights_on_circle():
    theta = np.linspace(-4, 4, 101)
    q = lorentzian_weight(theta, 0.3)
    assert np.max(lorentzian_residual(q, 0.3)) < 1e-15
    assert np.max(np.abs(q)) <= 0.3 + 1e-15


def test_microstrip_factor(cfg):
    lossy = DmaConfig(attenuation=0.8)
    f = microstrip_factor(lossy, 2, 100)
    assert abs(f) == pytest.approx(math.exp(-0.8 * 100 * lossy.element_spacing))
    assert microstrip_factors(lossy)[2 * 200 + 100] == pytest.approx(f)
    with pytest.raises(IndexError):
        microstrip_factor(cfg, 10, 0)


def test_transmit_power_and_peak_gain(cfg):
    p = PolarPosition(20, 1.1)
    tx = transmit_focus(cfg, p)
    # |0.5 (a + j e^{-j beta rho})|^2 / N_e per element, summed
    assert tx.power == pytest.approx(0.5, abs=0.01)
    assert np.max(lorentzian_residual(tx.analog.weights, 1 / math.sqrt(cfg.n_elements_per_strip))) < 1e-12
    assert transmit_gain(cfg, tx, p) == pytest.approx(optimal_gain(cfg), rel=0.01)


def test_transmit_gain_ratio_tracks_correlation(cfg):
    focus = PolarPosition(20, 1.1)
    tx = transmit_focus(cfg, focus)
    off = PolarPosition(20.6, 1.12)
    ratio = transmit_gain(cfg, tx, off) / optimal_gain(cfg)
    assert ratio == pytest.approx(relative_gain(cfg, off, focus), abs=0.02)


def test_relative_gain_bounds(cfg):
    p = PolarPosition(9, 0.8)
    assert relative_gain(cfg, p, p) == pytest.approx(1.0)
    assert 0 <= relative_gain(cfg, PolarPosition(9.5, 0.9), p) < 1


def test_relative_gains_vectorized(cfg):
    focus = PolarPosition(15, 1.3)
    r = np.array([14.0, 15.0, 16.5])
    phi = np.array([1.3, 1.25, 1.4])
    got = relative_gains(cfg, focus, r, phi)
    want = [relative_gain(cfg, PolarPosition(a, b), focus) for a, b in zip(r, phi)]
    np.testing.assert_allclose(got, want, rtol=1e-10)


def test_lossy_gain_reduces_to_lossless(cfg):
    a, b = PolarPosition(20, 1.0), PolarPosition(21, 1.02)
    assert lossy_relative_gain(cfg, a, b) == pytest.approx(relative_gain(cfg, a, b), rel=1e-12)
    lossy = DmaConfig(attenuation=0.86)
    assert lossy_relative_gain(lossy, b, b) == pytest.approx(1.0)


def test_receive_identity(cfg):
    """v^H Qbar^H equals the Fresnel focusing vector plus a constant-modulus term."""
    r, phi = 12.0, 1.2
    comb = receive_analog_combiner(cfg, r, include_loss=True)
    v = digital_steer(cfg, r, phi)
    row = np.repeat(v.conj(), cfg.n_elements_per_strip) * comb.effective.conj()
    a = np.exp(-1j * cfg.wavenumber * fresnel_distances(cfg, r, phi))
    c = np.exp(-1j * cfg.wavenumber * (r + cfg.height_offset**2 / (2 * r)))
    spurious = row - 0.5 * c * a.conj()
    np.testing.assert_allclose(np.abs(spurious), 0.5, atol=1e-12)


def test_combiner_apply_and_combine_are_adjoint(cfg, rng):
    comb = receive_analog_combiner(cfg, 7.0)
    v = rng.standard_normal(cfg.n_microstrips) + 1j * rng.standard_normal(cfg.n_microstrips)
    x = rng.standard_normal(cfg.n_elements) + 1j * rng.standard_normal(cfg.n_elements)
    assert np.vdot(comb.apply(v), x) == pytest.approx(np.vdot(v, comb.combine(x)))
    np.testing.assert_allclose(comb.as_matrix() @ v, comb.apply(v))


def test_combiner_without_propagation(cfg):
    q = np.ones(cfg.n_elements, complex)
    comb = AnalogCombiner(q, cfg.n_elements_per_strip, cfg.n_microstrips, includes_propagation=False)
    np.testing.assert_allclose(comb.effective, q)


def test_matched_filter_peaks_at_truth(cfg):
    p = PolarPosition(25, 1.0)
    h = los_channel(cfg, p)
    comb = receive_analog_combiner(cfg, p.r)
    y = comb.combine(h)
    phis = np.linspace(0.9, 1.1, 41)
    pw = matched_filter_powers(cfg, p.r, phis, y)
    assert abs(phis[matched_filter_argmax(pw)] - p.phi) <= 0.0051


def test_argmax_tie_break():
    assert matched_filter_argmax([1.0, 3.0, 3.0, 2.0]) == 1


def test_bad_ranges(cfg):
    with pytest.raises(ValueError):
        receive_analog_combiner(cfg, 0.0)
    with pytest.raises(ValueError):
        digital_steer(cfg, -1.0, 1.0)


def test_focus_vector_type(cfg):
    a = focusing_vector(cfg, PolarPosition(5, 1))
    assert a.target == PolarPosition(5, 1)
