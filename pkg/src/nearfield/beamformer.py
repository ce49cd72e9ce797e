"""DMA weights: Lorentzian analog stage, microstrip propagation, digital steering.

Transmit configurations follow the matched hybrid design that reaches
``G_opt = 0.25 P_b N``. Receive combiners are the unnormalized sweep
combiners whose response, after digital steering, is half a conjugated
Fresnel focusing vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import focusing_vector
from .geometry import DmaConfig, PolarPosition


@dataclass(frozen=True)
class MicrostripPropagation:
    """Per-element factor ``exp(-(alpha + j beta) rho)`` from the feed port."""

    factors: np.ndarray
    attenuation: float
    beta: float

    @classmethod
    def of(cls, cfg: DmaConfig) -> "MicrostripPropagation":
        return cls(microstrip_factors(cfg), cfg.attenuation, cfg.microstrip_wavenumber)


@dataclass(frozen=True)
class AnalogCombiner:
    """Block-diagonal analog stage: element ``i*N_e + n`` feeds output ``i``.

    ``weights`` holds q_{i,n}; when ``includes_propagation`` is set the
    effective per-element coefficient is ``q * propagation``.
    """

    weights: np.ndarray
    n_elements_per_strip: int
    n_microstrips: int
    includes_propagation: bool = True
    propagation: np.ndarray | None = None

    @property
    def effective(self) -> np.ndarray:
        if self.includes_propagation and self.propagation is not None:
            return self.weights * self.propagation
        return self.weights

    def combine(self, v: np.ndarray) -> np.ndarray:
        """Apply ``Qbar^H`` to a length-N vector or to the columns of an (N, K) array."""
        v = np.asarray(v)
        e = self.effective.conj().reshape(self.n_microstrips, self.n_elements_per_strip)
        if v.ndim == 1:
            return np.einsum("mn,mn->m", e, v.reshape(self.n_microstrips, self.n_elements_per_strip))
        return np.einsum("mn,mnk->mk", e, v.reshape(self.n_microstrips, self.n_elements_per_strip, -1))

    def apply(self, v: np.ndarray) -> np.ndarray:
        """``Qbar v`` for a length-N_m digital vector."""
        v = np.asarray(v)
        return self.effective * np.repeat(v, self.n_elements_per_strip)

    def as_matrix(self) -> np.ndarray:
        n = self.n_elements_per_strip
        q = np.zeros((n * self.n_microstrips, self.n_microstrips), dtype=complex)
        e = self.effective
        for i in range(self.n_microstrips):
            q[i * n : (i + 1) * n, i] = e[i * n : (i + 1) * n]
        return q


@dataclass(frozen=True)
class HybridTxConfig:
    vector: np.ndarray
    focus: PolarPosition
    power: float
    analog: AnalogCombiner
    digital: np.ndarray


def microstrip_factor(cfg: DmaConfig, i: int, n: int) -> complex:
    """exp(-(alpha + j beta) rho_{i,n}) with rho = n d_e; independent of the strip."""
    if not 0 <= i < cfg.n_microstrips or not 0 <= n < cfg.n_elements_per_strip:
        raise IndexError(f"element ({i}, {n}) out of range")
    rho = n * cfg.element_spacing
    return complex(np.exp(-(cfg.attenuation + 1j * cfg.microstrip_wavenumber) * rho))


def microstrip_factors(cfg: DmaConfig) -> np.ndarray:
    """Vector of :func:`microstrip_factor` over all elements, strip-major."""
    return np.exp(-(cfg.attenuation + 1j * cfg.microstrip_wavenumber) * cfg.feed_distance)


def lorentzian_weight(theta, scale: float = 1.0):
    """Point ``scale * 0.5 (j + e^{j theta})`` on the Lorentzian circle."""
    return scale * 0.5 * (1j + np.exp(1j * np.asarray(theta)))


def lorentzian_residual(q, scale: float = 1.0) -> np.ndarray:
    """Distance of each weight from the circle |q - 0.5 j s| = 0.5 s."""
    return np.abs(np.abs(np.asarray(q) - 0.5j * scale) - 0.5 * scale)


def transmit_focus(cfg: DmaConfig, focus: PolarPosition, distance_mode: str = "exact") -> HybridTxConfig:
    """Matched hybrid transmit configuration focused at ``focus``.

    Analog phases are ``angle(a) + beta rho`` so the microstrip phase is
    pre-compensated, and the digital stage is ``sqrt(P_b / N_m)`` on every
    strip. The effective vector is ``0.5 sqrt(P_b/N) (a + j e^{-j beta rho})``
    for lossless strips.
    """
    a = focusing_vector(cfg, focus, distance_mode).entries
    beta_rho = cfg.microstrip_wavenumber * cfg.feed_distance
    q = lorentzian_weight(np.angle(a) + beta_rho, 1 / math.sqrt(cfg.n_elements_per_strip))
    analog = AnalogCombiner(q, cfg.n_elements_per_strip, cfg.n_microstrips, True, microstrip_factors(cfg))
    digital = np.full(cfg.n_microstrips, math.sqrt(cfg.transmit_power / cfg.n_microstrips), dtype=complex)
    x = analog.apply(digital)
    return HybridTxConfig(x, focus, float(np.vdot(x, x).real), analog, digital)


def optimal_gain(cfg: DmaConfig) -> float:
    """G_opt = 0.25 P_b N."""
    return 0.25 * cfg.transmit_power * cfg.n_elements


def transmit_gain(cfg: DmaConfig, tx: HybridTxConfig, p: PolarPosition, distance_mode: str = "exact") -> float:
    """|a(p)^H Qbar v|^2 for the full effective transmit vector."""
    a = focusing_vector(cfg, p, distance_mode).entries
    return float(abs(np.vdot(a, tx.vector)) ** 2)


def relative_gain(cfg: DmaConfig, p_true: PolarPosition, p_focus: PolarPosition, distance_mode: str = "exact") -> float:
    """Correlation factor |a(p)^H a(p_hat)|^2 / N^2."""
    a = focusing_vector(cfg, p_true, distance_mode).entries
    b = focusing_vector(cfg, p_focus, distance_mode).entries
    return float(abs(np.vdot(a, b)) ** 2) / cfg.n_elements**2


def relative_gains(cfg: DmaConfig, p_focus: PolarPosition, r, phi) -> np.ndarray:
    """Vectorized exact-distance :func:`relative_gain` at many true positions."""
    w = focusing_vector(cfg, p_focus).entries
    c = kernels.correlate(cfg.element_x, cfg.element_z, w, cfg.wavenumber, r, phi)
    return (c.real**2 + c.imag**2) / cfg.n_elements**2


def lossy_relative_gain(cfg: DmaConfig, p_true: PolarPosition, p_focus: PolarPosition, distance_mode: str = "exact") -> float:
    """Normalized gain G / G_opt(alpha) with attenuating microstrips.

    With the matched configuration each element radiates with amplitude
    ``e^{-alpha rho}``, so ``G`` is ``|sum w a*(p) a(p_hat)|^2`` and its peak
    over ``p`` is ``(sum w)^2`` at ``p = p_hat``. The small constant feed term
    of the Lorentzian weights is dropped, as in the lossless correlation.
    """
    w = np.exp(-cfg.attenuation * cfg.feed_distance)
    a = focusing_vector(cfg, p_true, distance_mode).entries
    b = focusing_vector(cfg, p_focus, distance_mode).entries
    return float(abs(np.sum(w * a.conj() * b)) ** 2 / np.sum(w) ** 2)


def receive_analog_combiner(cfg: DmaConfig, r: float, include_loss: bool = True) -> AnalogCombiner:
    """Sweep combiner focused on range ``r`` (no 1/sqrt(N_e) normalization).

    The weights cancel the quadratic and z0-linear range phases and the
    microstrip phase; the azimuth is left to :func:`digital_steer`.
    """
    if not r > 0:
        raise ValueError("range must be positive")
    k = cfg.wavenumber
    x = cfg.element_x
    rho = cfg.feed_distance
    beta = cfg.microstrip_wavenumber
    theta = -(k * (x * x + rho * rho) / (2 * r) + k * cfg.height_offset * rho / r - beta * rho)
    q = lorentzian_weight(theta)
    if include_loss:
        prop = microstrip_factors(cfg)
    else:
        prop = np.exp(-1j * beta * rho)
    return AnalogCombiner(q, cfg.n_elements_per_strip, cfg.n_microstrips, True, prop)


def digital_steer(cfg: DmaConfig, r: float, phi) -> np.ndarray:
    """[v_phi]_i = exp(j k (i_x d_m cos phi + i_x^2 d_m^2 cos^2 phi / (2 r))).

    ``phi`` may be an array, giving one row per azimuth.
    """
    if not r > 0:
        raise ValueError("range must be positive")
    x = cfg.strip_offsets * cfg.microstrip_spacing
    c = np.cos(np.asarray(phi, dtype=float))[..., None]
    return np.exp(1j * cfg.wavenumber * (x * c + x * x * c * c / (2 * r)))


def matched_filter_powers(cfg: DmaConfig, r: float, phis, y: np.ndarray) -> np.ndarray:
    """|v_phi^H y|^2 for each azimuth in ``phis``."""
    v = digital_steer(cfg, r, phis)
    return np.abs(v.conj() @ y) ** 2


def matched_filter_argmax(powers) -> int:
    """Index of the largest power; the lowest index wins exact ties."""
    return int(np.argmax(powers))
