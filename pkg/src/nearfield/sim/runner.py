"""Tracking runs over trajectories, the fixed-parameter baseline and Monte-Carlo reduction."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..analysis import angle_limit, depth_limits
from ..beamformer import relative_gains
from ..channel import random_scatterer, synthesize_channel
from ..geometry import PolarPosition, center_distance
from ..grid import SearchRegion, uniform_grid
from ..tracker import (
    TrackerState,
    advance,
    estimate_position,
    init_from_positions,
    predict_speed,
)
from .scenario import Scenario
from .trajectory import Trajectory, bezier_trajectory

BUCKET_WIDTH = 2.5


@dataclass(frozen=True)
class EstimationEvent:
    time: float
    true_r: float
    true_phi: float
    estimate: PolarPosition
    next_interval: float
    n_arcs: int
    n_samples: int
    search_radius: float
    true_r0: float


@dataclass
class RunResult:
    t: np.ndarray
    true_r: np.ndarray
    true_phi: np.ndarray
    r0: np.ndarray
    focus_r: np.ndarray
    focus_phi: np.ndarray
    gain: np.ndarray
    events: list[EstimationEvent] = field(default_factory=list)
    initial_interval: float = math.nan
    truncated: bool = False

    @property
    def intervals(self) -> np.ndarray:
        """Every scheduled estimation interval, the bootstrap one first."""
        return np.array([self.initial_interval] + [e.next_interval for e in self.events])

    def summary(self) -> dict:
        g = self.gain
        return {
            "mean_gain": float(np.mean(g)) if g.size else math.nan,
            "p2_5": float(np.percentile(g, 2.5)) if g.size else math.nan,
            "p97_5": float(np.percentile(g, 97.5)) if g.size else math.nan,
            "mean_interval": float(np.mean(self.intervals)),
            "n_estimations": len(self.events),
        }


def _end_time(traj: Trajectory, scenario: Scenario) -> tuple[float, bool]:
    if traj.inside:
        return float(traj.t[-1]), False
    spec, cfg = scenario.trajectory, scenario.dma
    r0 = np.hypot(np.hypot(traj.x, traj.y), cfg.center_height)
    phi = np.arctan2(traj.y, traj.x)
    bad = (r0 < spec.r0_min) | (r0 > spec.r0_max) | (phi < spec.phi_min) | (phi > spec.phi_max)
    first = int(np.argmax(bad))
    return float(traj.t[max(first - 1, 1)]), True


def _channel_source(scenario: Scenario, p_true: PolarPosition, rng: np.random.Generator):
    def source(region: SearchRegion):
        scat = [random_scatterer(rng, region.center, region.radius, p_true) for _ in range(scenario.n_scatterers)]
        return synthesize_channel(scenario.dma, p_true, scat, pathloss=scenario.pathloss)

    return source


def _run(scenario: Scenario, traj: Trajectory, rng: np.random.Generator, fixed=None) -> RunResult:
    """Shared protocol loop; ``fixed = (T_fix, range_step, angle_step)`` selects the baseline."""
    cfg, params = scenario.dma, scenario.tracker
    t_end, truncated = _end_time(traj, scenario)
    t0, t1 = float(traj.t[0]), float(traj.t[1])
    (r_a, p_a), (r_b, p_b) = (traj.at(t0), traj.at(t1))
    state = init_from_positions(PolarPosition(float(r_a), float(p_a)), PolarPosition(float(r_b), float(p_b)), t1 - t0, params, cfg)
    if fixed is not None:
        state.coherence_time = fixed[0]
    initial = state.coherence_time

    n_samples = int(math.floor((t_end - t1) / scenario.sample_step + 1e-9)) + 1
    ts = t1 + scenario.sample_step * np.arange(n_samples)
    r_true, phi_true = traj.at(ts)
    focus_r = np.empty(n_samples)
    focus_phi = np.empty(n_samples)
    gain = np.empty(n_samples)

    events = []
    focus = state.estimate
    t_event = t1
    k = 0
    while True:
        t_next = t_event + state.coherence_time
        k_next = int(np.searchsorted(ts, t_next, side="left"))
        if k_next > k:
            sl = slice(k, k_next)
            gain[sl] = relative_gains(cfg, focus, r_true[sl], phi_true[sl])
            focus_r[sl], focus_phi[sl] = focus.r, focus.phi
            k = k_next
        if t_next > t_end or k >= n_samples:
            break
        rt, pt = traj.at(t_next)
        p_true = PolarPosition(float(rt), float(min(max(pt, 0.0), math.pi)))
        grid = None
        if fixed is not None:
            radius = (1 + params.e_c) * state.predicted_speed * (1 + params.e_u) * fixed[0]
            grid = uniform_grid(SearchRegion(state.estimate, radius), fixed[1], fixed[2])
        report = estimate_position(
            state,
            _channel_source(scenario, p_true, rng),
            scenario.noise_power,
            rng,
            scenario.pilot_amplitude,
            scenario.exact_pilots,
            grid=grid,
        )
        tc = advance(state, report)
        if fixed is not None:
            state.coherence_time = tc = fixed[0]
        focus = report.estimate
        events.append(
            EstimationEvent(
                t_next,
                p_true.r,
                p_true.phi,
                focus,
                tc,
                report.grid.n_arcs,
                report.grid.n_samples,
                report.search_radius,
                center_distance(cfg, p_true.r),
            )
        )
        t_event = t_next

    r0 = np.hypot(r_true, cfg.center_height)
    return RunResult(ts, r_true, phi_true, r0, focus_r, focus_phi, gain, events, initial, truncated)


def run_tracking(scenario: Scenario, rng: np.random.Generator, trajectory: Trajectory | None = None) -> RunResult:
    """Proposed protocol on one trajectory (drawn from ``rng`` when not given)."""
    traj = trajectory if trajectory is not None else bezier_trajectory(rng, scenario.trajectory, scenario.dma)
    return _run(scenario, traj, rng)


def run_fixed_baseline(
    scenario: Scenario,
    t_fix: float,
    dr_fix: float,
    dphi_fix: float,
    rng: np.random.Generator,
    trajectory: Trajectory | None = None,
) -> RunResult:
    """Baseline with a constant interval and a uniform grid of half-widths (dr_fix, dphi_fix).

    The search radius scales with the predicted speed over one interval,
    inflated by the same robustness factors as the proposed scheme.
    """
    if not (t_fix > 0 and dr_fix > 0 and dphi_fix > 0):
        raise ValueError("fixed parameters must be positive")
    traj = trajectory if trajectory is not None else bezier_trajectory(rng, scenario.trajectory, scenario.dma)
    return _run(scenario, traj, rng, fixed=(t_fix, 2 * dr_fix, 2 * dphi_fix))


def fixed_parameters(scenario: Scenario, runs: list[RunResult]) -> tuple[float, float, float]:
    """(T_fix, Dr_fix, Dphi_fix): slot averages of T_c, mean Delta+-_99 and Delta_99 over estimates."""
    cfg, delta = scenario.dma, scenario.tracker.delta
    intervals = np.concatenate([r.intervals for r in runs])
    dr, dphi = [], []
    for run in runs:
        for e in run.events:
            minus, plus, _ = depth_limits(e.estimate.r, delta, cfg)
            dr.append(0.5 * (minus + plus))
            dphi.append(angle_limit(e.estimate.phi, delta, cfg))
    return float(np.mean(intervals)), float(np.mean(dr)), float(np.mean(dphi))


def trajectory_streams(seed: int, index: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent (trajectory, proposed, baseline) streams for one trajectory index."""
    ss = np.random.SeedSequence([seed, index])
    return tuple(np.random.default_rng(s) for s in ss.spawn(3))


def _proposed_task(args):
    scenario, index = args
    g_traj, g_prop, _ = trajectory_streams(scenario.seed, index)
    traj = bezier_trajectory(g_traj, scenario.trajectory, scenario.dma)
    return _run(scenario, traj, g_prop)


def _baseline_task(args):
    scenario, index, fixed = args
    g_traj, _, g_base = trajectory_streams(scenario.seed, index)
    traj = bezier_trajectory(g_traj, scenario.trajectory, scenario.dma)
    return run_fixed_baseline(scenario, *fixed, g_base, traj)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class MonteCarloResult:
    scenario: Scenario
    proposed: list[RunResult]
    baseline: list[RunResult] | None = None
    fixed: tuple[float, float, float] | None = None

    def summary(self, which: str = "proposed") -> dict:
        return pooled_summary(self.proposed if which == "proposed" else self.baseline)

    def buckets(self, which: str = "proposed") -> list[dict]:
        return bucket_stats(self.proposed if which == "proposed" else self.baseline, self.scenario)


def monte_carlo(scenario: Scenario, baseline: bool = False) -> MonteCarloResult:
    """Run every trajectory of the scenario; optionally follow with the fixed baseline.

    Trajectory ``i`` uses streams derived from ``(seed, i)``, so the result
    does not depend on the worker count or completion order.
    """
    idx = range(scenario.n_trajectories)
    mc = MonteCarloResult(scenario, _map(_proposed_task, [(scenario, i) for i in idx], scenario.workers))
    return add_baseline(mc) if baseline else mc


def add_baseline(mc: MonteCarloResult) -> MonteCarloResult:
    """Fixed baseline on the same trajectories, parameterised from the proposed runs."""
    scenario = mc.scenario
    fixed = fixed_parameters(scenario, mc.proposed)
    idx = range(len(mc.proposed))
    base = _map(_baseline_task, [(scenario, i, fixed) for i in idx], scenario.workers)
    return MonteCarloResult(scenario, mc.proposed, base, fixed)


def pooled_summary(runs: list[RunResult]) -> dict:
    """Pooled time-sample statistics over runs, reduced in run order."""
    g = np.concatenate([r.gain for r in runs])
    intervals = np.concatenate([r.intervals for r in runs])
    return {
        "n_runs": len(runs),
        "n_samples": int(g.size),
        "mean_gain": float(np.mean(g)),
        "p2_5": float(np.percentile(g, 2.5)),
        "p5": float(np.percentile(g, 5)),
        "p95": float(np.percentile(g, 95)),
        "p97_5": float(np.percentile(g, 97.5)),
        "mean_interval": float(np.mean(intervals)),
        "n_estimations": int(sum(len(r.events) for r in runs)),
        "truncated_runs": int(sum(r.truncated for r in runs)),
    }


def bucket_index(r0) -> np.ndarray:
    """Bins of width 2.5 m centred on multiples of 2.5 m."""
    return np.floor(np.asarray(r0) / BUCKET_WIDTH + 0.5).astype(int)


def bucket_stats(runs: list[RunResult], scenario: Scenario) -> list[dict]:
    """Per-r0 statistics: gain over time samples, estimations by true r0 at the sweep."""
    g = np.concatenate([r.gain for r in runs])
    b = bucket_index(np.concatenate([r.r0 for r in runs]))
    eb = bucket_index(np.array([e.true_r0 for r in runs for e in r.events])) if any(r.events for r in runs) else np.array([], int)
    ei = np.array([e.next_interval for r in runs for e in r.events])
    rows = []
    for k in np.unique(b):
        sel = g[b == k]
        ev = eb == k
        rows.append(
            {
                "r0": k * BUCKET_WIDTH,
                "n_samples": int(sel.size),
                "time": float(sel.size * scenario.sample_step),
                "mean_gain": float(np.mean(sel)),
                "p5": float(np.percentile(sel, 5)),
                "p95": float(np.percentile(sel, 95)),
                "n_estimations": int(np.sum(ev)),
                "mean_interval": float(np.mean(ei[ev])) if np.any(ev) else math.nan,
            }
        )
    return rows


def fixed_as_dict(fixed) -> dict:
    t, dr, dphi = fixed
    return {"T_fix": t, "Dr_fix": dr, "Dphi_fix": dphi}


def speed_prediction(history, scenario: Scenario) -> float:
    return predict_speed(history, scenario.tracker.gamma, scenario.tracker.u_th, scenario.tracker.u_max)


__all__ = [
    "EstimationEvent",
    "MonteCarloResult",
    "add_baseline",
    "RunResult",
    "TrackerState",
    "bucket_stats",
    "fixed_parameters",
    "monte_carlo",
    "pooled_summary",
    "run_fixed_baseline",
    "run_tracking",
    "trajectory_streams",
]
