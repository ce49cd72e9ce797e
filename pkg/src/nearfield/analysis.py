"""Closed-form beam-focusing correlations, depth/width limits and coherence time.

All kappa/delta arguments are percentages (50 means half the optimal gain).
Ranges ``r`` are planar polar ranges as in :class:`~nearfield.geometry.PolarPosition`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .beamformer import lossy_relative_gain
from .geometry import DmaConfig, PolarPosition

_SCAN_POINTS = 1000


@dataclass(frozen=True)
class BeamLimits:
    delta_r_minus: float
    delta_r_plus: float
    delta_phi: float
    r_lim_kappa: float
    kappa: float
    # closed forms are trusted only while a_kappa < 1
    in_regime: bool = True


@dataclass(frozen=True)
class CoherenceResult:
    c_min: float
    worst_d: float
    worst_position: PolarPosition
    T_c: float


def _check_percent(kappa: float):
    if not 0 < kappa < 100:
        raise ValueError(f"percentage must lie in (0, 100), got {kappa}")


def fresnel_C(x):
    """C(x) = int_0^x cos(pi t^2 / 2) dt."""
    return special.fresnel(x)[1]


def fresnel_S(x):
    """S(x) = int_0^x sin(pi t^2 / 2) dt."""
    return special.fresnel(x)[0]


def height_ratio(cfg: DmaConfig) -> float:
    """z_0 / ((N_e - 1) d_e); the only geometry the range correlation depends on."""
    if cfg.n_elements_per_strip < 2:
        return 0.0
    return cfg.height_offset / cfg.strip_length


def _corr_I_ratio(x, rho):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    safe = np.where(ax < 1e-9, 1.0, ax)
    s1, c1 = special.fresnel(safe * (1 + rho))
    s0, c0 = special.fresnel(safe * rho)
    val = np.hypot(c1 - c0, s1 - s0) / safe
    out = np.where(ax < 1e-9, 1.0, val)
    return out if out.ndim else float(out)


def corr_I(x, cfg: DmaConfig):
    """Range correlation |F(x (1 + rho)) - F(x rho)| / |x| with F = C + jS.

    Even in ``x``, equal to 1 at ``x = 0``.
    """
    return _corr_I_ratio(x, height_ratio(cfg))


def mismatch_arg(delta_r, r: float, cfg: DmaConfig):
    """a(dr) = sqrt(2 |dr| / (r^2 + r dr)) (N_e - 1) d_e / sqrt(lambda).

    ``delta_r = inf`` gives the limit of a focus at infinity.
    """
    dr = np.asarray(delta_r, dtype=float)
    if np.any(r + dr <= 0):
        raise ValueError("r + delta_r must be positive")
    scale = cfg.strip_length / math.sqrt(cfg.wavelength)
    with np.errstate(invalid="ignore"):
        inv = np.where(np.isinf(dr), 1.0 / r, np.abs(dr) / (r * (r + np.where(np.isinf(dr), 0.0, dr))))
    out = np.sqrt(2 * inv) * scale
    return out if out.ndim else float(out)


def _phi_correction(a, phi, cfg: DmaConfig):
    if cfg.n_elements_per_strip < 2:
        return 1.0
    t = np.asarray(a) * (cfg.n_microstrips - 1) * cfg.microstrip_spacing / (2 * cfg.strip_length)
    return 1 - math.pi**2 / 90 * (t * abs(math.sin(phi))) ** 4


def corr_K(delta_r, r: float, phi: float, cfg: DmaConfig):
    """I(a(dr)) with the small azimuth-dependent correction from the strip spread."""
    a = mismatch_arg(delta_r, r, cfg)
    return corr_I(a, cfg) * _phi_correction(a, phi, cfg)


def corr_L(zeta, cfg: DmaConfig | int, sinc: bool = False):
    """Angular correlation |sin z| / |N_m sin(z / N_m)|, or |sin z| / |z| with ``sinc``."""
    nm = cfg if isinstance(cfg, int) else cfg.n_microstrips
    z = np.asarray(zeta, dtype=float)
    small = np.abs(z) < 1e-12
    zs = np.where(small, 1.0, z)
    den = np.abs(zs) if sinc else np.abs(nm * np.sin(zs / nm))
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(den == 0, 1.0, np.abs(np.sin(zs)) / np.where(den == 0, 1.0, den))
    out = np.where(small, 1.0, val)
    return out if out.ndim else float(out)


def zeta_arg(delta_phi, phi: float, cfg: DmaConfig):
    """zeta = N_m (pi d_m / lambda) (cos phi - cos(phi + dphi))."""
    dphi = np.asarray(delta_phi, dtype=float)
    out = cfg.n_microstrips * math.pi * cfg.microstrip_spacing / cfg.wavelength * (math.cos(phi) - np.cos(phi + dphi))
    return out if out.ndim else float(out)


def corr_M(delta_r, delta_phi, r: float, phi: float, cfg: DmaConfig):
    """Joint correlation I(a(dr)) L(zeta(dphi)); its square approximates the relative gain."""
    return corr_I(mismatch_arg(delta_r, r, cfg), cfg) * corr_L(zeta_arg(delta_phi, phi, cfg), cfg)


def _first_descent(fn, target: float, x_max: float):
    """Smallest x > 0 with fn(x) = target on the first decreasing lobe of fn."""
    hi = x_max
    for _ in range(12):
        xs = np.linspace(0.0, hi, _SCAN_POINTS + 1)[1:]
        ys = fn(xs)
        rising = np.nonzero(np.diff(ys) > 0)[0]
        end = rising[0] + 1 if rising.size else len(xs) - 1
        below = np.nonzero(ys[: end + 1] <= target)[0]
        if below.size:
            j = below[0]
            lo_x = xs[j - 1] if j > 0 else 0.0
            return optimize.brentq(lambda t: float(fn(t)) - target, lo_x, xs[j], xtol=1e-13, rtol=1e-15)
        if rising.size:
            raise ValueError(f"level {target:.4g} is never reached on the first lobe (minimum {ys[end]:.4g})")
        hi *= 2
    raise ValueError("no crossing found")


@lru_cache(maxsize=256)
def _a_kappa(kappa: float, rho: float) -> float:
    return _first_descent(lambda x: _corr_I_ratio(x, rho), math.sqrt(0.01 * kappa), 8.0)


def solve_a_kappa(kappa: float, cfg: DmaConfig) -> float:
    """a_kappa: smallest positive root of I^2(x) = kappa / 100."""
    _check_percent(kappa)
    return _a_kappa(float(kappa), height_ratio(cfg))


@lru_cache(maxsize=256)
def _zeta_kappa(kappa: float, nm: int) -> float:
    target = math.sqrt(0.01 * kappa)
    return optimize.brentq(lambda z: float(corr_L(z, nm)) - target, 1e-12, math.pi, xtol=1e-13, rtol=1e-15)


def solve_zeta_kappa(kappa: float, n_microstrips: int) -> float:
    """zeta_kappa: smallest positive root of L^2(x) = kappa / 100, inside (0, pi)."""
    _check_percent(kappa)
    if n_microstrips < 2:
        raise ValueError("a single microstrip has no angular selectivity")
    return _zeta_kappa(float(kappa), int(n_microstrips))


def limit_range(kappa: float, cfg: DmaConfig) -> float:
    """r_lim,kappa = 2 d_e^2 (N_e - 1)^2 / (lambda a_kappa^2)."""
    a = solve_a_kappa(kappa, cfg)
    return 2 * cfg.strip_length**2 / (cfg.wavelength * a * a)


def depth_limits(r: float, kappa: float, cfg: DmaConfig) -> tuple[float, float, float]:
    """(delta_minus, delta_plus, r_lim) with delta_plus = inf once r >= r_lim."""
    if not r > 0:
        raise ValueError("range must be positive")
    r_lim = limit_range(kappa, cfg)
    minus = r * r / (r_lim + r)
    plus = r * r / (r_lim - r) if r < r_lim else math.inf
    return minus, plus, r_lim


def cos_halfwidth(kappa: float, cfg: DmaConfig) -> float:
    """Half-width c = zeta_kappa lambda / (pi N_m d_m) of a beam in cos(phi)."""
    if cfg.n_microstrips < 2:
        return math.inf
    return solve_zeta_kappa(kappa, cfg.n_microstrips) * cfg.wavelength / (math.pi * cfg.n_microstrips * cfg.microstrip_spacing)


def angle_limit(phi: float, kappa: float, cfg: DmaConfig, method: str = "numeric") -> float:
    """Azimuth mismatch Delta_kappa(phi) at which the angular gain drops to kappa %.

    ``taylor`` is the first-order form c / |sin phi|. ``numeric`` solves
    |cos phi - cos(phi +- dphi)| = c exactly and returns the smaller side.
    """
    c = cos_halfwidth(kappa, cfg)
    if method == "taylor":
        s = math.sin(phi)
        if abs(s) < 1e-12:
            raise ValueError("taylor beamwidth is singular at endfire")
        return abs(c / s)
    if method != "numeric":
        raise ValueError(f"unknown method {method!r}")
    if not -1e-12 <= phi <= math.pi + 1e-12:
        raise ValueError("azimuth must lie in [0, pi]")
    cphi = math.cos(phi)
    sides = []
    if cphi - c >= -1:
        sides.append(math.acos(cphi - c) - phi)
    if cphi + c <= 1:
        sides.append(phi - math.acos(cphi + c))
    return min(sides) if sides else math.pi


def angle_interval(phi: float, kappa: float, cfg: DmaConfig) -> tuple[float, float]:
    """Exact azimuth interval around ``phi`` where the angular gain is >= kappa %."""
    c = cos_halfwidth(kappa, cfg)
    cphi = math.cos(phi)
    return math.acos(min(cphi + c, 1.0)), math.acos(max(cphi - c, -1.0))


def beam_limits(p: PolarPosition, kappa: float, cfg: DmaConfig) -> BeamLimits:
    minus, plus, r_lim = depth_limits(p.r, kappa, cfg)
    return BeamLimits(minus, plus, angle_limit(p.phi, kappa, cfg), r_lim, kappa, solve_a_kappa(kappa, cfg) < 1)


def _angle_step(r: float, d, c: float) -> np.ndarray:
    cosy = 1 - (c * c - d * d) / (2 * r * r + 2 * r * d)
    return np.arccos(np.clip(cosy, -1.0, 1.0))


def displacement_corr(d, c: float, p: PolarPosition, cfg: DmaConfig, sign: int = 1):
    """M for a displacement of length c with range change d, angle moving by ``sign``."""
    d = np.asarray(d, dtype=float)
    y = _angle_step(p.r, d, c)
    return corr_I(mismatch_arg(d, p.r, cfg), cfg) * corr_L(zeta_arg(sign * y, p.phi, cfg), cfg)


def worst_direction(c: float, p: PolarPosition, cfg: DmaConfig) -> tuple[float, PolarPosition, float]:
    """Displacement of length ``c`` that degrades the gain most.

    Scans the range change d over [-c, 0] on a dense grid for both angular
    directions, refines around the best grid point and checks both ends.
    Returns ``(d_min, worst_position, M(d_min)^2)``.
    """
    if not 0 < c < p.r:
        raise ValueError("displacement must satisfy 0 < c < r")
    ds = np.linspace(-c, 0.0, _SCAN_POINTS + 1)
    best = (math.inf, 0.0, 1)
    for sign in (1, -1):
        vals = displacement_corr(ds, c, p, cfg, sign)
        j = int(np.argmin(vals))
        lo, hi = ds[max(j - 1, 0)], ds[min(j + 1, len(ds) - 1)]
        res = optimize.minimize_scalar(
            lambda t: float(displacement_corr(t, c, p, cfg, sign)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * max(c, 1.0)}
        )
        for d, v in ((ds[j], vals[j]), (res.x, res.fun)):
            if v < best[0]:
                best = (float(v), float(d), sign)
    m, d, sign = best
    y = float(_angle_step(p.r, d, c))
    phi = min(max(p.phi + sign * y, 0.0), math.pi)
    return d, PolarPosition(p.r + d, phi), m * m


def min_displacement(p: PolarPosition, kappa: float, cfg: DmaConfig) -> float:
    """c_min ~ min(delta_minus(r), 2 r sin(delta_kappa(phi) / 2))."""
    minus, _, _ = depth_limits(p.r, kappa, cfg)
    dphi = angle_limit(p.phi, kappa, cfg)
    return min(minus, 2 * p.r * math.sin(0.5 * dphi))


def beam_coherence_time(p: PolarPosition, kappa: float, speed: float, cfg: DmaConfig) -> CoherenceResult:
    """Effective beam coherence time c_min / u, with the worst movement direction."""
    if not speed > 0:
        raise ValueError("speed must be positive")
    c = min_displacement(p, kappa, cfg)
    d, worst, _ = worst_direction(c, p, cfg)
    return CoherenceResult(c, d, worst, c / speed)


def lossy_depth_limits(
    r: float, phi: float, kappa: float, cfg: DmaConfig, distance_mode: str = "fresnel", rtol: float = 1e-7
) -> tuple[float, float]:
    """Numeric (delta_minus, delta_plus) from :func:`lossy_relative_gain`.

    The focus stays at (r, phi) and the UE moves along the radial line.
    ``delta_plus`` is inf when the gain never falls to kappa % out to 1e4 r.
    """
    _check_percent(kappa)
    target = 0.01 * kappa
    focus = PolarPosition(r, phi)

    def excess(rt):
        return lossy_relative_gain(cfg, PolarPosition(rt, phi), focus, distance_mode) - target

    # outward: geometric scan then root polish
    plus = math.inf
    prev = r
    step = r * 1e-3
    while prev - r < 1e4 * r:
        nxt = prev + step
        if excess(nxt) < 0:
            plus = optimize.brentq(excess, prev, nxt, rtol=rtol) - r
            break
        prev, step = nxt, step * 1.5
    # inward: the gain vanishes well before the array
    minus = math.nan
    prev = r
    step = r * 1e-3
    while prev - step > 0:
        nxt = prev - step
        if excess(nxt) < 0:
            minus = r - optimize.brentq(excess, nxt, prev, rtol=rtol)
            break
        prev, step = nxt, step * 1.5
    return minus, plus
