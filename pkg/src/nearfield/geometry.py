"""Array layout of the metasurface base station and BS-UE distances.

The DMA lies in the xz-plane: strip ``i`` sits at x = i_x * d_m with
``i_x = i - 0.5 (N_m - 1)``, element ``n`` of a strip at z = n * d_e + z_0.
The UE moves in the xy-plane (z = 0) and is addressed by polar coordinates
``(r, phi)`` with ``phi`` in [0, pi]. Distances are in meters, angles in
radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class DmaConfig:
    """Physical description of the DMA.

    Defaults reproduce the simulation setup: 200 elements on each of 10
    microstrips at half-wavelength spacing, 1 cm wavelength, 1 m height
    offset, lossless strips.
    """

    n_elements_per_strip: int = 200
    n_microstrips: int = 10
    element_spacing: float = 0.005
    microstrip_spacing: float = 0.005
    wavelength: float = 0.01
    height_offset: float = 1.0
    dielectric_constant: float = 2.2
    attenuation: float = 0.0
    transmit_power: float = 1.0

    def __post_init__(self):
        if self.n_elements_per_strip < 1 or self.n_microstrips < 1:
            raise ValueError("element and microstrip counts must be >= 1")
        if self.element_spacing <= 0 or self.microstrip_spacing <= 0:
            raise ValueError("spacings must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.dielectric_constant < 1:
            raise ValueError("dielectric constant must be >= 1")
        if self.attenuation < 0:
            raise ValueError("attenuation must be non-negative")
        if self.transmit_power <= 0:
            raise ValueError("transmit power must be positive")

    @classmethod
    def from_frequency(cls, carrier_frequency: float, **kwargs) -> "DmaConfig":
        """Build a config from a carrier frequency in Hz.

        Spacings default to half a wavelength unless given explicitly.
        """
        lam = SPEED_OF_LIGHT / carrier_frequency
        kwargs.setdefault("element_spacing", lam / 2)
        kwargs.setdefault("microstrip_spacing", lam / 2)
        return cls(wavelength=lam, **kwargs)

    def replace(self, **changes) -> "DmaConfig":
        return replace(self, **changes)

    @property
    def n_elements(self) -> int:
        return self.n_elements_per_strip * self.n_microstrips

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def microstrip_wavenumber(self) -> float:
        """beta = 2 pi sqrt(eps_r) / lambda, in rad/m."""
        return 2 * math.pi * math.sqrt(self.dielectric_constant) / self.wavelength

    @property
    def strip_length(self) -> float:
        """Vertical extent (N_e - 1) d_e."""
        return (self.n_elements_per_strip - 1) * self.element_spacing

    @property
    def center_height(self) -> float:
        """Height of the aperture center above the UE plane."""
        return self.height_offset + 0.5 * self.strip_length

    @cached_property
    def strip_offsets(self) -> np.ndarray:
        """i_x for every strip."""
        return np.arange(self.n_microstrips) - 0.5 * (self.n_microstrips - 1)

    @cached_property
    def element_x(self) -> np.ndarray:
        """x coordinate of every element, strip-major order i*N_e + n."""
        x = self.strip_offsets * self.microstrip_spacing
        x = np.repeat(x, self.n_elements_per_strip)
        x.flags.writeable = False
        return x

    @cached_property
    def element_index(self) -> np.ndarray:
        """Element index n within its strip, strip-major order."""
        n = np.tile(np.arange(self.n_elements_per_strip), self.n_microstrips)
        n.flags.writeable = False
        return n

    @cached_property
    def element_z(self) -> np.ndarray:
        z = self.element_index * self.element_spacing + self.height_offset
        z.flags.writeable = False
        return z

    @cached_property
    def feed_distance(self) -> np.ndarray:
        """rho_{i,n}: distance of each element from its strip's RF port (n d_e)."""
        rho = self.element_index * self.element_spacing
        rho.flags.writeable = False
        return rho


@dataclass(frozen=True)
class PolarPosition:
    """UE position on the motion plane: range ``r`` (m), azimuth ``phi`` (rad)."""

    r: float
    phi: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"range must be positive, got {self.r}")
        if not -1e-12 <= self.phi <= math.pi + 1e-12:
            raise ValueError(f"azimuth must lie in [0, pi], got {self.phi}")

    def to_plane(self) -> "PlanePoint":
        return PlanePoint(self.r * math.cos(self.phi), self.r * math.sin(self.phi))

    def distance_to(self, other: "PolarPosition") -> float:
        """Planar Euclidean distance between two positions."""
        a, b = self.to_plane(), other.to_plane()
        return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class PlanePoint:
    """Cartesian point on the UE plane (z = 0)."""

    x: float
    y: float

    def to_polar(self) -> PolarPosition:
        return PolarPosition(math.hypot(self.x, self.y), math.atan2(self.y, self.x))


def _check_indices(cfg: DmaConfig, i: int, n: int):
    if not 0 <= i < cfg.n_microstrips:
        raise IndexError(f"strip index {i} out of range [0, {cfg.n_microstrips})")
    if not 0 <= n < cfg.n_elements_per_strip:
        raise IndexError(f"element index {n} out of range [0, {cfg.n_elements_per_strip})")


def element_position(cfg: DmaConfig, i: int, n: int) -> np.ndarray:
    """3D position ``[i_x d_m, 0, n d_e + z_0]`` of element (i, n)."""
    _check_indices(cfg, i, n)
    ix = i - 0.5 * (cfg.n_microstrips - 1)
    return np.array([ix * cfg.microstrip_spacing, 0.0, n * cfg.element_spacing + cfg.height_offset])


def exact_distance(cfg: DmaConfig, i: int, n: int, p: PolarPosition) -> float:
    """Euclidean distance from element (i, n) to the UE at ``p``."""
    e = element_position(cfg, i, n)
    ue = np.array([p.r * math.cos(p.phi), p.r * math.sin(p.phi), 0.0])
    return float(np.linalg.norm(ue - e))


def fresnel_distance(cfg: DmaConfig, i: int, n: int, p: PolarPosition, verbatim_z0_term: bool = False) -> float:
    """Second-order (Fresnel) approximation of :func:`exact_distance`.

    The constant term is ``z_0**2 / (2 r)``. ``verbatim_z0_term`` swaps in the
    dimensionally inconsistent ``z_0 / (2 r)`` variant for auditing. The term
    is index-independent and cancels from every relative-gain quantity.
    """
    _check_indices(cfg, i, n)
    ix = i - 0.5 * (cfg.n_microstrips - 1)
    dm, de, z0 = cfg.microstrip_spacing, cfg.element_spacing, cfg.height_offset
    r, c = p.r, math.cos(p.phi)
    const = z0 / (2 * r) if verbatim_z0_term else z0 * z0 / (2 * r)
    return (
        r
        + ix * ix * dm * dm * (1 - c * c) / (2 * r)
        - c * ix * dm
        + n * n * de * de / (2 * r)
        + z0 * n * de / r
        + const
    )


def exact_distances(cfg: DmaConfig, r: float, phi: float) -> np.ndarray:
    """Distances from every element (strip-major) to the UE at (r, phi)."""
    dx = r * math.cos(phi) - cfg.element_x
    y = r * math.sin(phi)
    return np.sqrt(dx * dx + y * y + cfg.element_z**2)


def fresnel_distances(cfg: DmaConfig, r: float, phi: float, verbatim_z0_term: bool = False) -> np.ndarray:
    """Vectorized :func:`fresnel_distance` over all elements."""
    x = cfg.element_x
    rho = cfg.feed_distance
    z0 = cfg.height_offset
    c = math.cos(phi)
    const = z0 / (2 * r) if verbatim_z0_term else z0 * z0 / (2 * r)
    return r + x * x * (1 - c * c) / (2 * r) - c * x + rho * rho / (2 * r) + z0 * rho / r + const


def point_distances(cfg: DmaConfig, x: float, y: float) -> np.ndarray:
    """Distances from every element to an arbitrary point (x, y, 0) of the plane."""
    dx = x - cfg.element_x
    return np.sqrt(dx * dx + y * y + cfg.element_z**2)


def approx_validity_radius(cfg: DmaConfig) -> float:
    """Range beyond which the Fresnel phase error stays below pi/8 at broadside."""
    lz0 = math.sqrt(
        (cfg.strip_length + cfg.height_offset) ** 2
        + 0.25 * (cfg.n_microstrips - 1) ** 2 * cfg.microstrip_spacing**2
    )
    return (2 * lz0**4 / cfg.wavelength) ** (1 / 3)


def aperture_diagonal(cfg: DmaConfig) -> float:
    """Largest aperture dimension D, taken as the planar diagonal."""
    return math.hypot(cfg.strip_length, (cfg.n_microstrips - 1) * cfg.microstrip_spacing)


def regime_radii(cfg: DmaConfig) -> tuple[float, float]:
    """Fresnel and Rayleigh distances ``(r_FD, r_RD)`` of the aperture."""
    d = aperture_diagonal(cfg)
    return 0.62 * math.sqrt(d**3 / cfg.wavelength), 2 * d * d / cfg.wavelength


def center_distance(cfg: DmaConfig, p: PolarPosition | float) -> float:
    """Distance r_0 from the aperture center to a UE at planar range r."""
    r = p.r if isinstance(p, PolarPosition) else p
    return math.hypot(r, cfg.center_height)


def planar_range(cfg: DmaConfig, r0: float) -> float:
    """Inverse of :func:`center_distance`: planar range for a center distance."""
    h = cfg.center_height
    if r0 < abs(h):
        raise ValueError(f"center distance {r0} is below the aperture height {abs(h)}")
    return math.sqrt(r0 * r0 - h * h)
