"""Near-field focusing vectors, LoS/NLoS channels and noisy receive models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    DmaConfig,
    PlanePoint,
    PolarPosition,
    center_distance,
    exact_distances,
    fresnel_distances,
    point_distances,
)


@dataclass(frozen=True)
class FocusingVector:
    """Unit-modulus vector ``exp(-j 2 pi / lambda r_{i,n})``, strip-major order."""

    entries: np.ndarray
    target: PolarPosition

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __len__(self):
        return self.entries.shape[0]


@dataclass(frozen=True)
class Scatterer:
    """Point scatterer on the UE plane.

    ``ue_distance`` is d_l, the UE-scatterer distance; ``reflection_phase`` is
    the uniform random phase w of the reflection.
    """

    position: PlanePoint
    ue_distance: float
    reflection_phase: float

    def __post_init__(self):
        if not self.ue_distance > 0:
            raise ValueError("scatterer must not coincide with the UE")


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    los_part: np.ndarray
    scatterers: tuple[Scatterer, ...] = ()
    nlos_parts: tuple[np.ndarray, ...] = field(default=(), repr=False)


def element_distances(cfg: DmaConfig, p: PolarPosition, distance_mode: str = "exact") -> np.ndarray:
    if distance_mode == "exact":
        return exact_distances(cfg, p.r, p.phi)
    if distance_mode == "fresnel":
        return fresnel_distances(cfg, p.r, p.phi)
    raise ValueError(f"unknown distance mode {distance_mode!r}")


def focusing_vector(cfg: DmaConfig, p: PolarPosition, distance_mode: str = "exact") -> FocusingVector:
    """Focusing vector a(r, phi).

    ``p.r = inf`` gives the far-field limit: only the linear phase
    ``k i_x d_m cos(phi)`` survives, up to a common phase.
    """
    k = cfg.wavenumber
    if math.isinf(p.r):
        entries = np.exp(1j * k * cfg.element_x * math.cos(p.phi))
    else:
        entries = np.exp(-1j * k * element_distances(cfg, p, distance_mode))
    return FocusingVector(entries, p)


def los_channel(cfg: DmaConfig, p: PolarPosition, pathloss: str = "constant", distance_mode: str = "exact") -> np.ndarray:
    """LoS channel vector.

    ``pathloss="constant"`` uses one amplitude lambda / (4 pi r_0) for the
    whole aperture (radiative near field); ``"exact"`` uses per-element
    amplitudes lambda / (4 pi r_{i,n}).
    """
    d = element_distances(cfg, p, distance_mode)
    phase = np.exp(-1j * cfg.wavenumber * d)
    if pathloss == "constant":
        return cfg.wavelength / (4 * math.pi * center_distance(cfg, p)) * phase
    if pathloss == "exact":
        return cfg.wavelength / (4 * math.pi * d) * phase
    raise ValueError(f"unknown pathloss mode {pathloss!r}")


def scatterer_gain(cfg: DmaConfig, s: Scatterer) -> complex:
    """Reflection coefficient g_l = e^{-jw} e^{-jk d_l} lambda / (4 pi d_l)."""
    d = s.ue_distance
    return complex(
        np.exp(-1j * s.reflection_phase)
        * np.exp(-1j * cfg.wavenumber * d)
        * cfg.wavelength
        / (4 * math.pi * d)
    )


def nlos_component(cfg: DmaConfig, s: Scatterer) -> np.ndarray:
    """Channel contribution of one scatterer, using exact element distances."""
    d = point_distances(cfg, s.position.x, s.position.y)
    if np.any(d <= 0):
        raise ValueError("scatterer coincides with a DMA element")
    return scatterer_gain(cfg, s) * cfg.wavelength / (4 * math.pi * d) * np.exp(-1j * cfg.wavenumber * d)


def random_scatterer(rng: np.random.Generator, center: PolarPosition, radius: float, ue: PolarPosition) -> Scatterer:
    """Scatterer uniform in the disk C(center, radius), restricted to y > 0."""
    c = center.to_plane()
    u = ue.to_plane()
    for _ in range(1000):
        rho = radius * math.sqrt(rng.random())
        ang = rng.uniform(0.0, 2 * math.pi)
        x, y = c.x + rho * math.cos(ang), c.y + rho * math.sin(ang)
        if y <= 0:
            continue
        d = math.hypot(x - u.x, y - u.y)
        if d > 0:
            w = rng.uniform(-math.pi, math.pi)
            return Scatterer(PlanePoint(x, y), d, w)
    raise RuntimeError("could not place a scatterer in the upper half-plane")


def synthesize_channel(
    cfg: DmaConfig,
    p: PolarPosition,
    scatterers: tuple[Scatterer, ...] | list[Scatterer] = (),
    pathloss: str = "constant",
) -> ChannelRealization:
    """Full channel h = h_LoS + sum of NLoS parts at the true UE position."""
    los = los_channel(cfg, p, pathloss=pathloss)
    parts = tuple(nlos_component(cfg, s) for s in scatterers)
    h = los.copy()
    for part in parts:
        h = h + part
    return ChannelRealization(h, los, tuple(scatterers), parts)


def complex_noise(rng: np.random.Generator, variance: float, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples."""
    scale = math.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def received_symbol_ue(cfg: DmaConfig, h: np.ndarray, x: np.ndarray, noise_power: float, rng: np.random.Generator) -> complex:
    """Downlink sample y_u = h^H x + n_u."""
    power = float(np.vdot(x, x).real)
    if power > cfg.transmit_power * (1 + 1e-9):
        raise ValueError(f"transmit power {power} exceeds budget {cfg.transmit_power}")
    y = np.vdot(h, x)
    if noise_power > 0:
        y += complex_noise(rng, noise_power, ())
    return complex(y)


def received_vector_bs(
    cfg: DmaConfig,
    combiner,
    h: np.ndarray,
    pilot: complex,
    noise_power: float,
    rng: np.random.Generator,
    n_measurements: int | None = None,
) -> np.ndarray:
    """Uplink microstrip outputs y_b = Qbar^H h x_u + Qbar^H n_b.

    ``combiner`` is an :class:`~nearfield.beamformer.AnalogCombiner` or a
    dense ``(N, N_m)`` matrix with the block-diagonal DMA structure. Noise is
    drawn per element and then combined. With ``n_measurements`` the result
    has shape ``(N_m, n_measurements)``, one column per noise realization.
    """
    apply = _combiner_apply(cfg, combiner)
    n = cfg.n_elements
    if n_measurements is None:
        noise = complex_noise(rng, noise_power, n) if noise_power > 0 else 0.0
        return apply(h * pilot + noise)
    noise = complex_noise(rng, noise_power, (n, n_measurements)) if noise_power > 0 else np.zeros((n, n_measurements))
    return apply((h * pilot)[:, None] + noise)


def _combiner_apply(cfg: DmaConfig, combiner):
    if hasattr(combiner, "combine"):
        if combiner.n_elements_per_strip != cfg.n_elements_per_strip or combiner.n_microstrips != cfg.n_microstrips:
            raise ValueError("combiner shape does not match the DMA")
        return combiner.combine
    q = np.asarray(combiner)
    ne, nm = cfg.n_elements_per_strip, cfg.n_microstrips
    if q.shape != (cfg.n_elements, nm):
        raise ValueError(f"combiner must have shape {(cfg.n_elements, nm)}, got {q.shape}")
    mask = np.zeros(q.shape, dtype=bool)
    for i in range(nm):
        mask[i * ne : (i + 1) * ne, i] = True
    if np.any(q[~mask] != 0):
        raise ValueError("combiner is not block-diagonal over microstrips")
    return lambda v: q.conj().T @ v
