"""Data behind each reproduced figure and table, written as CSV plus a metadata sidecar."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import subprocess
from pathlib import Path

import numpy as np

from ..analysis import angle_limit, depth_limits, lossy_depth_limits, min_displacement
from ..beamformer import relative_gain
from ..geometry import DmaConfig, PolarPosition, planar_range, regime_radii
from ..grid import SearchRegion, build_grid, high_resolution_steps, radial_bound, uniform_grid
from .runner import bucket_stats, fixed_as_dict, monte_carlo
from .scenario import Scenario, dump_config

LOSSES = {"lossless": 0.0, "duroid": 0.7381, "ro3003": 0.8629}
TABLE1_R0 = (5.0, 15.0, 25.0, 35.0, 45.0)
FIG6_KAPPAS = (30.0, 50.0, 70.0, 90.0)


@dataclasses.dataclass
class Table:
    """Rows sharing one header; ``meta`` goes to the sidecar file."""

    name: str
    header: list[str]
    rows: list[list]
    meta: dict = dataclasses.field(default_factory=dict)

    def column(self, key: str) -> np.ndarray:
        j = self.header.index(key)
        return np.array([row[j] for row in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def centered_config(n_elements: int = 200, **kw) -> DmaConfig:
    """Config whose aperture centre sits at the UE plane height (z0 = -(N_e - 1) d_e / 2)."""
    d_e = kw.pop("element_spacing", 0.005)
    return DmaConfig(n_elements_per_strip=n_elements, element_spacing=d_e, height_offset=-0.5 * (n_elements - 1) * d_e, **kw)


def fig2(n_max: int = 4000, n_points: int = 12, r: float = 28.0, phi: float = math.pi / 4, kappa: float = 50.0) -> Table:
    """Depth limits versus strip length for lossless and two lossy substrates."""
    ns = np.unique(np.round(np.geomspace(200, n_max, n_points)).astype(int))
    rows = []
    for n in ns:
        base = centered_config(int(n))
        minus0, plus0, r_lim = depth_limits(r, kappa, base)
        for name, alpha in LOSSES.items():
            cfg = dataclasses.replace(base, attenuation=alpha)
            minus, plus = lossy_depth_limits(r, phi, kappa, cfg)
            rows.append([int(n), name, alpha, minus, plus, minus0, plus0, r_lim])
    header = ["n_elements", "substrate", "alpha", "delta_minus", "delta_plus", "closed_minus", "closed_plus", "r_lim"]
    return Table("fig2", header, rows, {"r": r, "phi": phi, "kappa": kappa, "n_max": n_max})


def limits_config(n_elements: int = 200) -> DmaConfig:
    """Setup of the depth-limit figures: z0 = -N_e d_e / 2."""
    return DmaConfig(n_elements_per_strip=n_elements, height_offset=-0.5 * n_elements * 0.005)


def _radial_sweep(cfg: DmaConfig, n_points: int, hi_frac: float = 2.0):
    r_fd, r_rd = regime_radii(cfg)
    return np.geomspace(r_fd, hi_frac * r_rd, n_points)


FIG3_PHIS = (math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2, 2 * math.pi / 3)
# range offset used as "infinitely far" once the plus limit no longer exists
FAR = 1e4


def _shifted(phi: float, dphi: float) -> float:
    return phi + dphi if phi + dphi <= math.pi else phi - dphi


def fig3(kappa: float = 50.0, n_points: int = 40, phis=FIG3_PHIS) -> Table:
    """Closed-form depth limits and the exact gain at the limits, across range and azimuth."""
    cfg = limits_config()
    rows = []
    for r0 in _radial_sweep(cfg, n_points):
        r = planar_range(cfg, r0)
        minus, plus, r_lim = depth_limits(r, kappa, cfg)
        for phi in phis:
            p = PolarPosition(r, phi)
            g_minus = relative_gain(cfg, PolarPosition(r - minus, phi), p)
            g_plus = relative_gain(cfg, PolarPosition(r + plus, phi), p) if math.isfinite(plus) else math.nan
            rows.append([float(r0), phi, minus, plus, g_minus, g_plus, r_lim])
    header = ["r0", "phi", "delta_minus", "delta_plus", "gain_minus", "gain_plus", "r_lim"]
    return Table("fig3", header, rows, {"kappa": kappa, "z0": cfg.height_offset})


def fig4(kappa: float = 50.0, n_points: int = 40, phis=FIG3_PHIS) -> Table:
    """Exact gain under angle mismatch alone and jointly with the plus range limit.

    Where the plus limit is infinite the joint column uses a point ``FAR``
    times further out.
    """
    cfg = limits_config()
    rows = []
    for r0 in _radial_sweep(cfg, n_points):
        r = planar_range(cfg, r0)
        _, plus, r_lim = depth_limits(r, kappa, cfg)
        r_far = r + plus if math.isfinite(plus) else FAR * r
        for phi in phis:
            p = PolarPosition(r, phi)
            dphi = angle_limit(phi, kappa, cfg)
            phi2 = _shifted(phi, dphi)
            g_angle = relative_gain(cfg, PolarPosition(r, phi2), p)
            g_range = relative_gain(cfg, PolarPosition(r_far, phi), p)
            g_joint = relative_gain(cfg, PolarPosition(r_far, phi2), p)
            rows.append([float(r0), phi, plus, dphi, g_range, g_angle, g_joint, r_lim])
    header = ["r0", "phi", "delta_plus", "delta_phi", "gain_range", "gain_angle", "gain_joint", "r_lim"]
    return Table("fig4", header, rows, {"kappa": kappa, "z0": cfg.height_offset})


def grid_table(r_hat: float, phi_hat: float, radius: float, delta: float, cfg: DmaConfig | None = None, name="grid") -> Table:
    cfg = cfg or DmaConfig()
    g = build_grid(SearchRegion(PolarPosition(r_hat, phi_hat), radius), delta, cfg)
    rows = []
    for s, arc in enumerate(g.arcs):
        for phi, lo, hi in zip(arc.azimuths, arc.phi_lo, arc.phi_hi):
            rows.append([s, arc.r, float(phi), arc.r - arc.delta_minus, arc.r + arc.delta_plus, float(lo), float(hi)])
    header = ["arc", "r", "phi", "r_lo", "r_hi", "phi_lo", "phi_hi"]
    meta = {"r_hat": r_hat, "phi_hat": phi_hat, "radius": radius, "delta": delta, "n_arcs": g.n_arcs, "n_samples": g.n_samples}
    return Table(name, header, rows, meta)


def fig5() -> Table:
    """Worked grid example: r_hat = 70 m at broadside, delta = 80 %, radius 30 m."""
    return grid_table(70.0, math.pi / 2, 30.0, 80.0, name="fig5")


def table1(
    r0s=TABLE1_R0,
    n_phi: int = 64,
    phi_range: tuple[float, float] = (0.0, math.pi),
    kappa: float = 50.0,
    delta: float = 99.0,
    cfg: DmaConfig | None = None,
) -> Table:
    """Sample counts versus distance, averaged over ``n_phi`` azimuth bin midpoints.

    The search radius is c_kappa at each centre. The uniform grid uses the
    steps that guarantee ``delta`` at the closest distance of the sweep.
    """
    cfg = cfg or DmaConfig()
    lo, hi = phi_range
    phis = lo + (hi - lo) * (np.arange(n_phi) + 0.5) / n_phi
    hr = high_resolution_steps(planar_range(cfg, min(r0s)), delta, cfg)
    rows = []
    for r0 in r0s:
        r = planar_range(cfg, r0)
        s_r, tot, uni = [], [], []
        for phi in phis:
            p = PolarPosition(r, float(phi))
            region = SearchRegion(p, min_displacement(p, kappa, cfg))
            g = build_grid(region, delta, cfg)
            s_r.append(g.n_arcs)
            tot.append(g.n_samples)
            uni.append(uniform_grid(region, *hr).n_samples)
        ub = radial_bound(r0, kappa, delta, cfg)
        rows.append([float(r0), float(np.mean(s_r)), ub, float(np.mean(tot)), float(np.mean(uni))])
    header = ["r0", "s_r", "s_r_bound", "total", "uniform_total"]
    meta = {"kappa": kappa, "delta": delta, "n_phi": n_phi, "phi_range": list(phi_range), "range_step": hr[0], "angle_step": hr[1]}
    return Table("table1", header, rows, meta)


def fig6(scenario: Scenario, kappas=FIG6_KAPPAS) -> Table:
    """Pooled gain statistics and mean coherence time per kappa."""
    rows = []
    for kappa in kappas:
        s = monte_carlo(scenario.replace(kappa=kappa)).summary()
        rows.append([kappa, s["mean_gain"], s["p2_5"], s["p5"], s["p95"], s["p97_5"], s["mean_interval"], s["n_estimations"]])
    header = ["kappa", "mean_gain", "p2_5", "p5", "p95", "p97_5", "mean_interval", "n_estimations"]
    return Table("fig6", header, rows, {"config": dump_config(scenario)})


def fig7(scenario: Scenario) -> Table:
    """Per-distance gain and estimation counts, proposed scheme against the fixed baseline."""
    mc = monte_carlo(scenario, baseline=True)
    base = {b["r0"]: b for b in bucket_stats(mc.baseline, scenario)}
    rows = []
    for b in bucket_stats(mc.proposed, scenario):
        o = base.get(b["r0"], {})
        rows.append(
            [
                b["r0"],
                b["time"],
                b["mean_gain"],
                o.get("mean_gain", math.nan),
                b["n_estimations"],
                o.get("n_estimations", 0),
            ]
        )
    header = ["r0", "time", "gain_proposed", "gain_baseline", "est_proposed", "est_baseline"]
    return Table("fig7", header, rows, {"config": dump_config(scenario), **fixed_as_dict(mc.fixed)})


def run_preset(name: str, scenario: Scenario | None = None, full: bool = False) -> Table:
    """Dispatch by name; ``full`` lifts the desk-scale caps."""
    scenario = scenario or Scenario()
    if full:
        scenario = scenario.replace(n_trajectories=1000)
    builders = {
        "fig2": lambda: fig2(n_max=10_000 if full else 4000),
        "fig3": fig3,
        "fig4": fig4,
        "fig5": fig5,
        "fig6": lambda: fig6(scenario),
        "fig7": lambda: fig7(scenario),
        "table1": table1,
    }
    if name not in builders:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(sorted(builders))}")
    return builders[name]()


PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "table1")


def build_version() -> str:
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"], cwd=here, capture_output=True, text=True, timeout=10
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def write_table(table: Table, out_dir, seed: int | None = None) -> Path:
    """Write ``<name>.csv`` and ``<name>.txt`` (parameters, seed, build version)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{table.name}.csv"
    path.write_text(table.to_csv(), encoding="utf-8")
    lines = [f"table: {table.name}", f"seed: {seed}", f"build: {build_version()}"]
    for k, v in table.meta.items():
        if k == "config":
            lines.append("config:")
            lines.extend("  " + ln for ln in str(v).splitlines())
        else:
            lines.append(f"{k}: {v}")
    (out / f"{table.name}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
