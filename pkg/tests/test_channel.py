import math

import numpy as np
import pytest

from nearfield.beamformer import receive_analog_combiner
from nearfield.channel import (
    Scatterer,
    complex_noise,
    focusing_vector,
    los_channel,
    nlos_component,
    random_scatterer,
    received_symbol_ue,
    received_vector_bs,
    scatterer_gain,
    synthesize_channel,
)
from nearfield.geometry import DmaConfig, PlanePoint, PolarPosition, center_distance, exact_distances


def test_focusing_vector_unit_modulus(cfg):
    a = focusing_vector(cfg, PolarPosition(10, 1.0))
    assert len(a) == cfg.n_elements
    np.testing.assert_allclose(np.abs(np.asarray(a)), 1.0)


def test_far_field_limit_is_linear_phase(cfg):
    far = np.asarray(focusing_vector(cfg, PolarPosition(math.inf, 0.7)))
    near = np.asarray(focusing_vector(cfg, PolarPosition(1e7, 0.7)))
    # equal up to one common phase
    ratio = near / far
    np.testing.assert_allclose(ratio / ratio[0], 1.0, atol=1e-3)


def test_los_constant_pathloss_amplitude(cfg):
    p = PolarPosition(15, 1.2)
    h = los_channel(cfg, p)
    np.testing.assert_allclose(np.abs(h), cfg.wavelength / (4 * math.pi * center_distance(cfg, p)))


def test_los_exact_pathloss(cfg):
    p = PolarPosition(6, 0.4)
    h = los_channel(cfg, p, pathloss="exact")
    d = exact_distances(cfg, p.r, p.phi)
    np.testing.assert_allclose(np.abs(h), cfg.wavelength / (4 * math.pi * d))


def test_unknown_modes(cfg):
    with pytest.raises(ValueError):
        los_channel(cfg, PolarPosition(5, 1), pathloss="free")
    with pytest.raises(ValueError):
        focusing_vector(cfg, PolarPosition(5, 1), distance_mode="taylor")


def test_scatterer_gain_magnitude(cfg):
    s = Scatterer(PlanePoint(3.0, 4.0), 2.0, 0.3)
    assert abs(scatterer_gain(cfg, s)) == pytest.approx(cfg.wavelength / (4 * math.pi * 2.0))
    assert nlos_component(cfg, s).shape == (cfg.n_elements,)


def test_scatterer_needs_positive_distance():
    with pytest.raises(ValueError):
        Scatterer(PlanePoint(1.0, 1.0), 0.0, 0.0)


def test_random_scatterer_inside_region(cfg, rng):
    c = PolarPosition(20, 1.0)
    ue = PolarPosition(20.5, 1.0)
    for _ in range(200):
        s = random_scatterer(rng, c, 3.0, ue)
        pc = c.to_plane()
        assert math.hypot(s.position.x - pc.x, s.position.y - pc.y) <= 3.0 + 1e-12
        assert s.position.y > 0
        assert -math.pi <= s.reflection_phase <= math.pi


def test_channel_is_sum_of_parts(cfg, rng):
    p = PolarPosition(12, 1.4)
    scat = [random_scatterer(rng, p, 2.0, p) for _ in range(3)]
    ch = synthesize_channel(cfg, p, scat)
    np.testing.assert_allclose(ch.h, ch.los_part + sum(ch.nlos_parts))
    assert synthesize_channel(cfg, p).nlos_parts == ()


def test_noise_variance(rng):
    z = complex_noise(rng, 2.5, 200_000)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(2.5, rel=0.02)
    assert abs(np.mean(z.real * z.imag)) < 0.02


def test_ue_symbol_power_budget(cfg, rng):
    h = np.ones(cfg.n_elements, complex)
    x = np.full(cfg.n_elements, 1.0, complex)
    with pytest.raises(ValueError):
        received_symbol_ue(cfg, h, x, 0.0, rng)
    x = x / np.linalg.norm(x)
    assert received_symbol_ue(cfg, h, x, 0.0, rng) == pytest.approx(np.vdot(h, x))


def test_bs_receive_matches_dense_matrix(cfg, rng):
    comb = receive_analog_combiner(cfg, 10.0)
    h = los_channel(cfg, PolarPosition(10, 1.0))
    y1 = received_vector_bs(cfg, comb, h, 2.0, 0.0, rng)
    y2 = received_vector_bs(cfg, comb.as_matrix(), h, 2.0, 0.0, rng)
    np.testing.assert_allclose(y1, y2)
    assert y1.shape == (cfg.n_microstrips,)


def test_bs_receive_measurement_columns(cfg, rng):
    comb = receive_analog_combiner(cfg, 10.0)
    h = los_channel(cfg, PolarPosition(10, 1.0))
    y = received_vector_bs(cfg, comb, h, 1.0, 1e-6, rng, n_measurements=7)
    assert y.shape == (cfg.n_microstrips, 7)


def test_bs_receive_rejects_bad_combiner(cfg, rng):
    h = np.zeros(cfg.n_elements, complex)
    with pytest.raises(ValueError):
        received_vector_bs(cfg, np.ones((cfg.n_elements, cfg.n_microstrips)), h, 1.0, 0.0, rng)
    with pytest.raises(ValueError):
        received_vector_bs(cfg, np.ones((5, 2)), h, 1.0, 0.0, rng)
    other = receive_analog_combiner(DmaConfig(n_microstrips=4), 10.0)
    with pytest.raises(ValueError):
        received_vector_bs(cfg, other, h, 1.0, 0.0, rng)
