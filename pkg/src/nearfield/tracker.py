"""Sensing-aided beam tracking: hybrid beam sweep, velocity prediction, scheduling.

One estimation step searches the disk around the previous estimate whose
radius is the expected displacement inflated by ``1 + e_c``. Each grid arc
gets its own analog range focus and the uplink pilots are split evenly
between arcs; azimuths are scanned digitally with a matched filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analysis import min_displacement
from .beamformer import matched_filter_argmax, matched_filter_powers, receive_analog_combiner
from .channel import ChannelRealization, received_vector_bs
from .geometry import DmaConfig, PolarPosition
from .grid import CoordinateGrid, SearchRegion, build_grid


@dataclass(frozen=True)
class TrackerParams:
    kappa: float = 50.0
    delta: float = 99.0
    e_c: float = 1.5
    e_u: float = 0.5
    gamma: float = 2.0
    u_th: float = 2.5
    n_pilots: int = 200
    # upper clamp on the predicted speed; see predict_speed
    u_max: float = 50.0

    def __post_init__(self):
        if not (0 < self.kappa < 100 and 0 < self.delta < 100):
            raise ValueError("kappa and delta must lie in (0, 100)")
        if self.e_c < 0 or self.e_u < 0:
            raise ValueError("robustness factors must be non-negative")
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if not self.u_th > 0:
            raise ValueError("velocity floor must be positive")
        if not self.u_max >= self.u_th:
            raise ValueError("velocity cap must not be below the floor")
        if self.n_pilots < 1:
            raise ValueError("need at least one pilot")


@dataclass
class TrackerState:
    cfg: DmaConfig
    params: TrackerParams
    positions: list[PolarPosition]
    velocities: list[float]
    predicted_speed: float
    coherence_time: float
    # set by request_estimation(); the harness fires an early sweep when true
    pending_request: bool = False

    @property
    def estimate(self) -> PolarPosition:
        return self.positions[-1]


@dataclass(frozen=True)
class EstimationReport:
    estimate: PolarPosition
    arc_powers: np.ndarray
    best_arc: int
    grid: CoordinateGrid = field(repr=False)
    pilots_used: int
    search_radius: float
    time_spent: float = 0.0


def predict_speed(history, gamma: float, u_th: float, u_max: float = math.inf) -> float:
    """Geometrically weighted average max(sum_j gamma^j / (gamma^m - 1) u_j, u_th).

    The weights are used as written; they sum to 1/(gamma - 1), so only
    gamma = 2 gives a true average. ``u_max`` bounds the result from above:
    raw speeds are position jitter divided by T_c, and without a cap a short
    T_c feeds back into ever larger predictions.
    """
    u = np.asarray(history, dtype=float)
    if u.size == 0:
        return u_th
    m = u.size
    # gamma^j / (gamma^m - 1) rewritten so long histories do not overflow
    w = np.power(float(gamma), np.arange(m) - m, dtype=float) / (1 - float(gamma) ** -m)
    return min(max(float(w @ u), u_th), u_max)


def coherence_time(p: PolarPosition, speed: float, params: TrackerParams, cfg: DmaConfig) -> float:
    """T_c = c_kappa / (u (1 + e_u))."""
    if not speed > 0:
        raise ValueError("speed must be positive")
    return min_displacement(p, params.kappa, cfg) / (speed * (1 + params.e_u))


def search_radius(p: PolarPosition, params: TrackerParams, cfg: DmaConfig) -> float:
    return min_displacement(p, params.kappa, cfg) * (1 + params.e_c)


def init_from_positions(p0: PolarPosition, p1: PolarPosition, dt: float, params: TrackerParams, cfg: DmaConfig) -> TrackerState:
    """Bootstrap from two exactly known positions ``dt`` seconds apart."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u1 = p0.distance_to(p1) / dt
    pred = predict_speed([u1], params.gamma, params.u_th, params.u_max)
    tc = coherence_time(p1, pred, params, cfg)
    return TrackerState(cfg, params, [p0, p1], [u1], pred, tc)


def estimate_position(
    state: TrackerState,
    channel_source: Callable[[SearchRegion], ChannelRealization],
    noise_power: float,
    rng: np.random.Generator,
    pilot_amplitude: float = 1.0,
    exact_pilots: bool = False,
    grid: CoordinateGrid | None = None,
) -> EstimationReport:
    """Sweep the grid around the last estimate and return the best sample.

    ``channel_source`` receives the search region and returns the channel at
    the (stationary) true UE position. By default the ``M`` pilots per arc
    are averaged analytically: the mean of M noise draws of variance
    sigma^2 is one draw of variance sigma^2 / M. ``exact_pilots`` draws all
    M measurements and averages them. A prebuilt ``grid`` replaces the
    dynamic one, e.g. for fixed-resolution baselines.
    """
    cfg, params = state.cfg, state.params
    if grid is None:
        region = SearchRegion(state.estimate, search_radius(state.estimate, params, cfg))
        grid = build_grid(region, params.delta, cfg)
    region = grid.region
    n_arcs = grid.n_arcs
    m = params.n_pilots // n_arcs
    if m == 0:
        raise ValueError(f"{params.n_pilots} pilots cannot cover {n_arcs} arcs; raise n_pilots or lower delta")
    h = channel_source(region).h
    powers = np.empty(n_arcs)
    picks = []
    for s, arc in enumerate(grid.arcs):
        comb = receive_analog_combiner(cfg, arc.r)
        if exact_pilots:
            y = received_vector_bs(cfg, comb, h, pilot_amplitude, noise_power, rng, n_measurements=m).mean(axis=1)
        else:
            y = received_vector_bs(cfg, comb, h, pilot_amplitude, noise_power / m, rng)
        pw = matched_filter_powers(cfg, arc.r, arc.azimuths, y)
        j = matched_filter_argmax(pw)
        powers[s] = pw[j]
        picks.append(float(arc.azimuths[j]))
    best = matched_filter_argmax(powers)
    estimate = PolarPosition(grid.arcs[best].r, picks[best])
    return EstimationReport(estimate, powers, best, grid, m * n_arcs, region.radius)


def update_velocity(state: TrackerState, p_new: PolarPosition) -> tuple[float, float]:
    """Append the raw speed |p_t - p_{t-1}| / T_c(t-1) and return (raw, prediction)."""
    if not state.coherence_time > 0:
        raise ValueError("previous coherence time must be positive")
    raw = state.estimate.distance_to(p_new) / state.coherence_time
    state.velocities.append(raw)
    state.predicted_speed = predict_speed(state.velocities, state.params.gamma, state.params.u_th, state.params.u_max)
    return raw, state.predicted_speed


def schedule_next(state: TrackerState, p_new: PolarPosition, speed: float) -> float:
    """Coherence time until the next sweep, from the new estimate and predicted speed."""
    if speed < state.params.u_th * (1 - 1e-12):
        raise ValueError("predicted speed is below the floor u_th")
    state.coherence_time = coherence_time(p_new, speed, state.params, state.cfg)
    return state.coherence_time


def advance(state: TrackerState, report: EstimationReport) -> float:
    """Fold an estimation report into the state; returns the next T_c."""
    _, speed = update_velocity(state, report.estimate)
    tc = schedule_next(state, report.estimate, speed)
    state.positions.append(report.estimate)
    state.pending_request = False
    return tc


def request_estimation(state: TrackerState):
    """Outage hook: ask for a sweep before the current T_c expires."""
    state.pending_request = True


def on_grid(report: EstimationReport) -> bool:
    r, phi = report.grid.samples()
    return bool(np.any((r == report.estimate.r) & (phi == report.estimate.phi)))


def expected_snr_db(cfg: DmaConfig, r0: float, pu_dbm: float, noise_dbm: float) -> float:
    """Per-element SNR P_u PL / sigma^2 with PL = (lambda / (4 pi r0))^2."""
    pl = (cfg.wavelength / (4 * math.pi * r0)) ** 2
    return pu_dbm - noise_dbm + 10 * math.log10(pl)
