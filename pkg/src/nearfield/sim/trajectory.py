"""Random Bezier UE trajectories with piecewise-linear interpolation in time."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from ..geometry import DmaConfig, planar_range
from .scenario import TrajectorySpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Trajectory:
    """Anchor points (x, y) at times ``t``; positions in between are linear."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    inside: bool = True

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def length(self) -> float:
        return float(np.sum(np.hypot(np.diff(self.x), np.diff(self.y))))

    def at(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Polar (r, phi) at times ``t``, clamped to the trajectory span."""
        x = np.interp(t, self.t, self.x)
        y = np.interp(t, self.t, self.y)
        return np.hypot(x, y), np.arctan2(y, x)


def bezier_curve(control: np.ndarray, steps: int) -> np.ndarray:
    """Evaluate the Bezier curve of the (k, 2) control polygon at ``steps`` parameters."""
    k = control.shape[0] - 1
    s = np.linspace(0.0, 1.0, steps)[:, None]
    i = np.arange(k + 1)[None, :]
    basis = comb(k, i) * s**i * (1 - s) ** (k - i)
    return basis @ control


def _in_region(x, y, r_lo, r_hi, spec: TrajectorySpec) -> bool:
    r = np.hypot(x, y)
    phi = np.arctan2(y, x)
    tol = 1e-9
    return bool(
        np.all(r >= r_lo * (1 - tol))
        and np.all(r <= r_hi * (1 + tol))
        and np.all(phi >= spec.phi_min - tol)
        and np.all(phi <= spec.phi_max + tol)
    )


def bezier_trajectory(rng: np.random.Generator, spec: TrajectorySpec, cfg: DmaConfig) -> Trajectory:
    """Random trajectory whose mean speed equals ``spec.mean_speed``.

    Control points are uniform by area in the annular sector. A curve that
    leaves the sector is redrawn up to ``max_redraws`` times; the last draw is
    returned with ``inside=False`` if none fits.
    """
    r_lo = planar_range(cfg, spec.r0_min) if spec.r0_min > cfg.center_height else 1e-3
    r_hi = planar_range(cfg, spec.r0_max)
    for _ in range(spec.max_redraws):
        r = np.sqrt(rng.uniform(r_lo**2, r_hi**2, spec.control_points))
        phi = rng.uniform(spec.phi_min, spec.phi_max, spec.control_points)
        pts = bezier_curve(np.column_stack([r * np.cos(phi), r * np.sin(phi)]), spec.steps)
        inside = _in_region(pts[:, 0], pts[:, 1], r_lo, r_hi, spec)
        if inside:
            break
    else:
        log.warning("no trajectory inside the region after %d draws", spec.max_redraws)
    return _timed(pts, spec, inside)


def _timed(pts: np.ndarray, spec: TrajectorySpec, inside: bool = True) -> Trajectory:
    length = float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))
    if length < 1e-12:
        log.warning("degenerate trajectory of zero length; using a 1 s duration")
        duration = 1.0
    else:
        duration = length / spec.mean_speed
    t = np.linspace(0.0, duration, pts.shape[0])
    return Trajectory(t, pts[:, 0].copy(), pts[:, 1].copy(), inside)


def trajectory_from_points(pts, spec: TrajectorySpec) -> Trajectory:
    """Time an explicit (steps, 2) polyline at the target mean speed."""
    return _timed(np.asarray(pts, dtype=float), spec)


def straight_line(r0: float, phi0: float, heading: float, speed: float, duration: float, steps: int = 100) -> Trajectory:
    """Constant-velocity path, handy for protocol checks."""
    t = np.linspace(0.0, duration, steps)
    x = r0 * math.cos(phi0) + speed * t * math.cos(heading)
    y = r0 * math.sin(phi0) + speed * t * math.sin(heading)
    return Trajectory(t, x, y)
