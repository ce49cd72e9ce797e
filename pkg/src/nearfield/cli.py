"""Command-line entry point: ``nearfield <subcommand> [--config FILE] [--seed N]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

from .analysis import angle_limit, beam_coherence_time, depth_limits
from .geometry import PolarPosition, planar_range
from .sim import presets
from .sim.runner import monte_carlo, pooled_summary, run_tracking, trajectory_streams
from .sim.scenario import Scenario, load_config
from .sim.trajectory import bezier_trajectory


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _scenario(args) -> Scenario:
    overrides = {"seed": args.seed}
    if getattr(args, "trajectories", None) is not None:
        overrides["n_trajectories"] = args.trajectories
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if args.config:
        return load_config(args.config, **overrides)
    return Scenario().replace(**{k: v for k, v in overrides.items() if v is not None})


def _emit(rows, header, out):
    fh = open(out, "w", encoding="utf-8", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    finally:
        if out:
            fh.close()


def cmd_analyze(args):
    s = _scenario(args)
    cfg = s.dma
    r = planar_range(cfg, args.r0) if args.r0 is not None else args.r
    if r is None:
        raise SystemExit("give --r or --r0")
    p = PolarPosition(r, args.phi)
    minus, plus, r_lim = depth_limits(r, args.kappa, cfg)
    dphi = angle_limit(args.phi, args.kappa, cfg)
    coh = beam_coherence_time(p, args.kappa, args.speed, cfg)
    out = {
        "r": r,
        "phi": args.phi,
        "kappa": args.kappa,
        "delta_minus": minus,
        "delta_plus": plus,
        "r_lim": r_lim,
        "delta_phi": dphi,
        "c_min": coh.c_min,
        "worst_d": coh.worst_d,
        "T_c": coh.T_c,
    }
    print(json.dumps(out, indent=2, allow_nan=True))


def cmd_grid(args):
    s = _scenario(args)
    t = presets.grid_table(args.r, args.phi, args.radius, args.delta, s.dma)
    if args.out:
        Path(args.out).write_text(t.to_csv(), encoding="utf-8")
    else:
        sys.stdout.write(t.to_csv())
    logging.info("%d arcs, %d samples", t.meta["n_arcs"], t.meta["n_samples"])


def cmd_track(args):
    s = _scenario(args)
    g_traj, g_prop, _ = trajectory_streams(s.seed, args.index)
    run = run_tracking(s, g_prop, bezier_trajectory(g_traj, s.trajectory, s.dma))
    if args.out:
        rows = zip(run.t.tolist(), run.true_r.tolist(), run.true_phi.tolist(), run.focus_r.tolist(), run.focus_phi.tolist(), run.gain.tolist())
        _emit(rows, ["t", "true_r", "true_phi", "focus_r", "focus_phi", "gain"], args.out)
    print(json.dumps({**run.summary(), "truncated": run.truncated}, indent=2))


def cmd_montecarlo(args):
    s = _scenario(args)
    mc = monte_carlo(s, baseline=args.baseline)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = presets.Table("summary", ["scheme", *_SUMMARY_KEYS], [["proposed", *_summary_row(mc.proposed)]])
    if mc.baseline is not None:
        summary.rows.append(["baseline", *_summary_row(mc.baseline)])
        summary.meta.update(presets.fixed_as_dict(mc.fixed))
    summary.meta["config"] = presets.dump_config(s)
    presets.write_table(summary, out, s.seed)
    for which in ("proposed", "baseline") if mc.baseline is not None else ("proposed",):
        b = mc.buckets(which)
        keys = list(b[0])
        presets.write_table(presets.Table(f"buckets_{which}", keys, [[row[k] for k in keys] for row in b]), out, s.seed)
    print(out / "summary.csv")


_SUMMARY_KEYS = ("n_runs", "n_samples", "mean_gain", "p2_5", "p5", "p95", "p97_5", "mean_interval", "n_estimations", "truncated_runs")


def _summary_row(runs):
    s = pooled_summary(runs)
    return [s[k] for k in _SUMMARY_KEYS]


def cmd_fig(args):
    s = _scenario(args)
    table = presets.run_preset(args.name, s, full=args.full)
    path = presets.write_table(table, args.out, s.seed)
    print(path)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat YAML scenario file")
    common.add_argument("--seed", type=_seed, default=None, help="master seed (u64)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="nearfield", description="Near-field DMA beam focusing and tracking")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="beam limits and coherence time at a position")
    a.add_argument("--r", type=float, help="planar range (m)")
    a.add_argument("--r0", type=float, help="distance from the aperture centre (m)")
    a.add_argument("--phi", type=float, default=math.pi / 2)
    a.add_argument("--kappa", type=float, default=50.0)
    a.add_argument("--speed", type=float, default=10.0)
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("grid", parents=[common], help="search grid as CSV")
    g.add_argument("--r", type=float, default=70.0)
    g.add_argument("--phi", type=float, default=math.pi / 2)
    g.add_argument("--radius", type=float, default=30.0)
    g.add_argument("--delta", type=float, default=80.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_grid)

    t = sub.add_parser("track", parents=[common], help="one tracked trajectory")
    t.add_argument("--index", type=int, default=0, help="trajectory index within the seed's stream")
    t.add_argument("--out", help="per-sample CSV")
    t.set_defaults(func=cmd_track)

    m = sub.add_parser("montecarlo", parents=[common], help="batch of trajectories")
    m.add_argument("--trajectories", type=int)
    m.add_argument("--workers", type=int)
    m.add_argument("--baseline", action="store_true", help="also run the fixed-parameter baseline")
    m.add_argument("--out", default="out/montecarlo")
    m.set_defaults(func=cmd_montecarlo)

    f = sub.add_parser("fig", parents=[common], help="reproduce a figure or table")
    f.add_argument("name", choices=presets.PRESETS)
    f.add_argument("--out", default="out")
    f.add_argument("--trajectories", type=int)
    f.add_argument("--workers", type=int)
    f.add_argument("--full", action="store_true", help="1000 trajectories and the full N_e sweep")
    f.set_defaults(func=cmd_fig)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
