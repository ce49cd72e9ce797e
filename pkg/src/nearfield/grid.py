"""Non-uniform polar search grid over a circular region of interest.

Both ladders start on the near edge of the region. Consecutive range samples
have touching decision regions, which in 1/r is a uniform step of 2 / r_lim;
azimuth samples do the same in cos(phi) with twice the beam half-width. Each
arc keeps only the azimuths whose decision region reaches the part of the
disk that the arc's range band intersects.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    angle_interval,
    angle_limit,
    cos_halfwidth,
    depth_limits,
    solve_a_kappa,
)
from .geometry import DmaConfig, PolarPosition, approx_validity_radius, regime_radii

log = logging.getLogger(__name__)

_RTOL = 1e-9


@dataclass(frozen=True)
class SearchRegion:
    """Disk C(center, radius) in the UE plane."""

    center: PolarPosition
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("region radius must be positive")

    def contains(self, r, phi) -> np.ndarray:
        r, phi = np.asarray(r), np.asarray(phi)
        d2 = r * r + self.center.r**2 - 2 * r * self.center.r * np.cos(phi - self.center.phi)
        return d2 <= self.radius**2 * (1 + _RTOL)

    def sample(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        """``n`` points uniform in the disk, restricted to azimuths in [0, pi]."""
        c = self.center.to_plane()
        rs, ps = [], []
        while sum(len(x) for x in rs) < n:
            rho = self.radius * np.sqrt(rng.random(2 * n))
            ang = rng.uniform(0, 2 * math.pi, 2 * n)
            x = c.x + rho * np.cos(ang)
            y = c.y + rho * np.sin(ang)
            keep = y > 0
            rs.append(np.hypot(x[keep], y[keep]))
            ps.append(np.arctan2(y[keep], x[keep]))
        return np.concatenate(rs)[:n], np.concatenate(ps)[:n]


@dataclass(frozen=True)
class Arc:
    r: float
    azimuths: np.ndarray
    delta_minus: float
    delta_plus: float
    # per-azimuth decision interval edges
    phi_lo: np.ndarray = field(repr=False)
    phi_hi: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class CoordinateGrid:
    arcs: tuple[Arc, ...]
    delta: float
    region: SearchRegion

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @property
    def n_samples(self) -> int:
        return sum(len(a.azimuths) for a in self.arcs)

    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (r, phi) of every sample, arc by arc."""
        r = np.concatenate([np.full(len(a.azimuths), a.r) for a in self.arcs])
        phi = np.concatenate([a.azimuths for a in self.arcs])
        return r, phi

    def rows(self, cfg: DmaConfig):
        """(r, phi, delta_minus, delta_plus, delta_phi) per sample."""
        for a in self.arcs:
            for phi in a.azimuths:
                yield a.r, float(phi), a.delta_minus, a.delta_plus, angle_limit(float(phi), self.delta, cfg)


def _bounded_max_angle(lo: float, hi: float, center: PolarPosition, radius: float) -> float:
    """max over rho in [lo, hi] of the half-angle subtended by the disk at range rho."""
    rc = center.r
    if radius >= rc:
        return math.pi
    best = math.sqrt(rc * rc - radius * radius)
    rho = min(max(best, lo), hi)
    if rho <= 0:
        return math.pi
    arg = (rho * rho + rc * rc - radius * radius) / (2 * rho * rc)
    return math.acos(min(max(arg, -1.0), 1.0))


def _range_ladder(r_start: float, r_end: float, delta: float, cfg: DmaConfig) -> list[float]:
    radii = [r_start]
    while True:
        _, plus, _ = depth_limits(radii[-1], delta, cfg)
        if radii[-1] + plus >= r_end * (1 - _RTOL):
            break
        r_temp = radii[-1] + plus
        _, plus_t, _ = depth_limits(r_temp, delta, cfg)
        # beyond r_lim one sample at r_temp covers everything farther out
        radii.append(r_temp if math.isinf(plus_t) else r_temp + plus_t)
    return radii


def _azimuth_ladder(start: float, end: float, delta: float, cfg: DmaConfig, method: str, reach: tuple[float, float] | None = None) -> list[float]:
    """Azimuth samples from ``start`` upward until a decision region passes ``end``.

    ``reach`` optionally widens the span that must be covered on both sides;
    samples are prepended below ``start`` and appended past ``end`` as needed.
    """
    lo_reach, hi_reach = reach if reach is not None else (start, end)
    end = min(max(end, hi_reach), math.pi)
    phis = [min(max(start, 0.0), math.pi)]
    while phis[-1] < math.pi:
        hi = _decision_interval(phis[-1], delta, cfg, method)[1]
        if hi >= end * (1 - _RTOL):
            break
        phis.append(min(_decision_interval(hi, delta, cfg, method)[1], math.pi))
    lo_reach = max(lo_reach, 0.0)
    while phis[0] > 0:
        lo = _decision_interval(phis[0], delta, cfg, method)[0]
        if lo <= lo_reach + _RTOL * max(1.0, lo_reach):
            break
        phis.insert(0, max(_step_down(lo, delta, cfg, method), 0.0))
    return phis


def _step_down(edge: float, delta: float, cfg: DmaConfig, method: str) -> float:
    """Center of the sample whose decision region ends exactly at ``edge``."""
    if method == "exact":
        return math.acos(min(math.cos(edge) + cos_halfwidth(delta, cfg), 1.0))
    return edge - _taylor_or_numeric(edge, delta, cfg)


def _taylor_or_numeric(phi: float, delta: float, cfg: DmaConfig) -> float:
    if math.sin(phi) < 1e-6:
        return angle_limit(phi, delta, cfg, "numeric")
    return angle_limit(phi, delta, cfg, "taylor")


def _decision_interval(phi: float, delta: float, cfg: DmaConfig, method: str) -> tuple[float, float]:
    if method == "exact":
        return angle_interval(phi, delta, cfg)
    w = _taylor_or_numeric(phi, delta, cfg)
    return max(phi - w, 0.0), min(phi + w, math.pi)


def range_floor(cfg: DmaConfig) -> float:
    return max(1e-3, 0.1 * approx_validity_radius(cfg))


def build_grid(region: SearchRegion, delta: float, cfg: DmaConfig, angle_method: str = "exact") -> CoordinateGrid:
    """Dynamic non-uniform grid with per-coordinate resolution ``delta`` percent.

    ``angle_method="exact"`` tiles the exact beam intervals in cos(phi);
    ``"taylor"`` steps by the first-order beamwidth instead, which can leave
    small gaps away from broadside.
    """
    if not 0 < delta < 100:
        raise ValueError("delta must lie in (0, 100)")
    rc, phic, radius = region.center.r, region.center.phi, region.radius
    floor = range_floor(cfg)
    r_start = rc - radius
    if r_start <= floor:
        log.warning("search region reaches the array (r=%.3g, c=%.3g); clamping the range ladder", rc, radius)
        r_start = floor
    r_end = rc + radius
    if radius >= rc:
        dphi_max = dphi_reach = math.pi
    else:
        # the ladder starts where the pseudocode puts it (angle at rho = r_hat)
        # but must reach the true extent asin(c / r_hat) of the disk
        dphi_max = math.acos(1 - radius * radius / (2 * rc * rc))
        dphi_reach = math.asin(radius / rc)

    radii = _range_ladder(r_start, r_end, delta, cfg)
    master = np.array(
        _azimuth_ladder(phic - dphi_max, phic + dphi_max, delta, cfg, angle_method, (phic - dphi_reach, phic + dphi_reach))
    )
    edges = np.array([_decision_interval(p, delta, cfg, angle_method) for p in master]).reshape(-1, 2)

    arcs = []
    for r_s in radii:
        minus, plus, _ = depth_limits(r_s, delta, cfg)
        band_lo = max(r_s - minus, r_start)
        band_hi = min(r_s + plus, r_end)
        w = _bounded_max_angle(band_lo, band_hi, region.center, radius)
        tol = _RTOL * max(1.0, abs(phic))
        keep = (edges[:, 1] >= phic - w - tol) & (edges[:, 0] <= phic + w + tol)
        if not np.any(keep):
            continue
        arcs.append(Arc(r_s, master[keep], minus, plus, edges[keep, 0], edges[keep, 1]))
    return CoordinateGrid(tuple(arcs), delta, region)


def covers(grid: CoordinateGrid, r, phi, rtol: float = _RTOL) -> np.ndarray:
    """True where (r, phi) falls inside some sample's decision region."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    hit = np.zeros(r.shape, dtype=bool)
    for a in grid.arcs:
        lo = (a.r - a.delta_minus) * (1 - rtol)
        hi = (a.r + a.delta_plus) * (1 + rtol)
        inr = (r >= lo) & (r <= hi)
        if not np.any(inr):
            continue
        p = phi[inr][:, None]
        ina = np.any((p >= a.phi_lo[None, :] - rtol) & (p <= a.phi_hi[None, :] + rtol), axis=1)
        hit[np.nonzero(inr)[0][ina]] = True
    return hit


def nearest_sample(grid: CoordinateGrid, r: float, phi: float) -> PolarPosition:
    """Sample whose decision region holds (r, phi); closest in the plane otherwise."""
    for a in grid.arcs:
        if a.r - a.delta_minus <= r <= a.r + a.delta_plus:
            inside = np.nonzero((phi >= a.phi_lo) & (phi <= a.phi_hi))[0]
            if inside.size:
                return PolarPosition(a.r, float(a.azimuths[inside[0]]))
    rs, ps = grid.samples()
    d2 = rs * rs + r * r - 2 * rs * r * np.cos(ps - phi)
    j = int(np.argmin(d2))
    return PolarPosition(float(rs[j]), float(ps[j]))


def assign(grid: CoordinateGrid, r, phi) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`nearest_sample` for points inside the grid.

    Returns the sample (r, phi) holding each point, NaN where none does.
    The first matching arc and azimuth win, as in ``nearest_sample``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    sr = np.full(r.shape, np.nan)
    sp = np.full(r.shape, np.nan)
    for a in grid.arcs:
        todo = np.isnan(sr) & (r >= a.r - a.delta_minus) & (r <= a.r + a.delta_plus)
        if not np.any(todo):
            continue
        idx = np.nonzero(todo)[0]
        inside = (phi[idx, None] >= a.phi_lo[None, :]) & (phi[idx, None] <= a.phi_hi[None, :])
        hit = inside.any(axis=1)
        sr[idx[hit]] = a.r
        sp[idx[hit]] = a.azimuths[np.argmax(inside[hit], axis=1)]
    return sr, sp


def radial_bound(r: float, kappa: float, delta: float, cfg: DmaConfig, e_c: float = 0.0) -> float:
    """Upper bound on the number of range samples for a region of radius c_kappa.

    ``(1 + e_c) * (eta + r a_kappa^2 (eta - 1) / (2 r_RD) + 1)`` with
    ``eta = a_kappa^2 / a_delta^2``.
    """
    a_k = solve_a_kappa(kappa, cfg)
    a_d = solve_a_kappa(delta, cfg)
    eta = a_k * a_k / (a_d * a_d)
    _, r_rd = regime_radii(cfg)
    return (1 + e_c) * (eta + r * a_k * a_k * (eta - 1) / (2 * r_rd) + 1)


def grid_stats(grid: CoordinateGrid) -> tuple[int, int]:
    """(number of arcs S_r, total sample count)."""
    return grid.n_arcs, grid.n_samples


def uniform_grid(region: SearchRegion, range_step: float, angle_step: float) -> CoordinateGrid:
    """Fixed-resolution rectangular grid in (r, phi) over the region's bounding box.

    Ranges run from r_hat - c_hat in ``range_step`` increments until r_hat + c_hat
    is reached, and every arc carries the same azimuth ladder across
    phi_hat +- Dphi_max. Each sample's decision region is half a step on
    either side.
    """
    if not (range_step > 0 and angle_step > 0):
        raise ValueError("steps must be positive")
    rc, phic, radius = region.center.r, region.center.phi, region.radius
    r_start = max(rc - radius, 1e-3)
    n_r = math.ceil((rc + radius - r_start) / range_step - _RTOL) + 1
    dphi_max = math.pi if radius >= rc else math.acos(1 - radius * radius / (2 * rc * rc))
    lo = max(phic - dphi_max, 0.0)
    hi = min(phic + dphi_max, math.pi)
    n_phi = math.ceil((hi - lo) / angle_step - _RTOL) + 1
    phis = np.minimum(lo + angle_step * np.arange(n_phi), math.pi)
    half_r, half_p = 0.5 * range_step, 0.5 * angle_step
    arcs = tuple(
        Arc(r_start + i * range_step, phis, half_r, half_r, phis - half_p, phis + half_p) for i in range(n_r)
    )
    return CoordinateGrid(arcs, math.nan, region)


def high_resolution_steps(r_min: float, delta: float, cfg: DmaConfig) -> tuple[float, float]:
    """Uniform steps that meet ``delta`` everywhere at ranges >= ``r_min``.

    The range step is the full decision width at ``r_min``, where the depth of
    focus is smallest; the angle step is the broadside beamwidth.
    """
    minus, plus, _ = depth_limits(r_min, delta, cfg)
    return minus + plus, 2 * angle_limit(math.pi / 2, delta, cfg)
