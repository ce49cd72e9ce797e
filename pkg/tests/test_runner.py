import math

import numpy as np
import pytest

from nearfield.analysis import corr_I, corr_L, mismatch_arg, zeta_arg
from nearfield.sim.runner import (
    bucket_index,
    bucket_stats,
    fixed_parameters,
    monte_carlo,
    pooled_summary,
    run_fixed_baseline,
    run_tracking,
    trajectory_streams,
)
from nearfield.sim.scenario import Scenario
from nearfield.sim.trajectory import Trajectory, straight_line


def small(**kw):
    # short paths keep each run well under a second
    return Scenario().replace(**{"r0_min": 24.0, "r0_max": 30.0, "n_trajectories": 2, **kw})


def line():
    return straight_line(25.0, 1.2, 0.3, 10.0, 0.3)


def test_run_basic_invariants():
    s = small()
    run = run_tracking(s, np.random.default_rng(0), line())
    assert run.gain.size == run.t.size > 0
    assert np.all((run.gain >= 0) & (run.gain <= 1 + 1e-12))
    times = [e.time for e in run.events]
    assert all(a < b for a, b in zip(times, times[1:]))
    assert np.all(run.intervals > 0)
    assert run.summary()["n_estimations"] == len(run.events)
    assert not run.truncated


def test_run_is_deterministic():
    a = run_tracking(small(), np.random.default_rng(5), line())
    b = run_tracking(small(), np.random.default_rng(5), line())
    np.testing.assert_array_equal(a.gain, b.gain)
    assert [e.estimate for e in a.events] == [e.estimate for e in b.events]


def test_noiseless_estimates_meet_resolution():
    s = small(noise_dbm=-300.0, n_scatterers=0)
    cfg, delta = s.dma, s.tracker.delta
    run = run_tracking(s, np.random.default_rng(1), line())
    assert run.events
    for e in run.events:
        gr = corr_I(mismatch_arg(e.true_r - e.estimate.r, e.estimate.r, cfg), cfg) ** 2
        ga = corr_L(zeta_arg(e.true_phi - e.estimate.phi, e.estimate.phi, cfg), cfg) ** 2
        assert gr >= delta / 100 - 0.02
        assert ga >= delta / 100 - 0.02


def test_truncation_flag():
    tr = line()
    out = Trajectory(tr.t, tr.x * 3, tr.y * 3, inside=False)
    run = run_tracking(small(), np.random.default_rng(0), out)
    assert run.truncated


def test_baseline():
    s = small()
    run = run_fixed_baseline(s, 0.01, 0.1, 0.01, np.random.default_rng(0), line())
    iv = run.intervals[1:]
    np.testing.assert_allclose(iv, 0.01)
    assert np.all((run.gain >= 0) & (run.gain <= 1 + 1e-12))
    with pytest.raises(ValueError):
        run_fixed_baseline(s, 0.0, 0.1, 0.01, np.random.default_rng(0), line())


def test_fixed_parameters_positive():
    s = small()
    run = run_tracking(s, np.random.default_rng(0), line())
    t, dr, dphi = fixed_parameters(s, [run])
    assert t == pytest.approx(np.mean(run.intervals))
    assert dr > 0 and dphi > 0


def test_streams_independent_of_order():
    a = trajectory_streams(3, 1)[0].random(4)
    trajectory_streams(3, 0)
    b = trajectory_streams(3, 1)[0].random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, trajectory_streams(3, 2)[0].random(4))


def test_monte_carlo_summary_matches_single_run():
    s = small(n_trajectories=1)
    mc = monte_carlo(s)
    run = mc.proposed[0]
    pooled = mc.summary()
    assert pooled["mean_gain"] == run.summary()["mean_gain"]
    assert pooled["n_estimations"] == len(run.events)
    assert pooled["n_runs"] == 1


def test_monte_carlo_worker_count_irrelevant():
    a = monte_carlo(small(workers=1))
    b = monte_carlo(small(workers=2))
    assert pooled_summary(a.proposed) == pooled_summary(b.proposed)


def test_buckets():
    np.testing.assert_array_equal(bucket_index([1.2, 1.3, 3.74, 3.76, 45.0]), [0, 1, 1, 2, 18])
    s = small()
    run = run_tracking(s, np.random.default_rng(0), line())
    rows = bucket_stats([run], s)
    assert sum(r["n_samples"] for r in rows) == run.gain.size
    assert sum(r["n_estimations"] for r in rows) == len(run.events)
    assert sum(r["time"] for r in rows) == pytest.approx(run.gain.size * s.sample_step)
    assert all(math.isclose(r["r0"] % 2.5, 0, abs_tol=1e-9) for r in rows)
