"""Time the compiled and numpy correlation kernels on the default array.

    python benchmarks/bench_kernels.py [--points 2000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from nearfield import kernels
from nearfield.channel import focusing_vector
from nearfield.geometry import DmaConfig, PolarPosition


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    cfg = DmaConfig()
    rng = np.random.default_rng(0)
    r = rng.uniform(5, 45, args.points)
    phi = rng.uniform(0.4, 2.7, args.points)
    w = focusing_vector(cfg, PolarPosition(20.0, 1.2)).entries
    ex, ez, k = cfg.element_x, cfg.element_z, cfg.wavenumber

    print(f"{cfg.n_elements} elements, {args.points} points, best of {args.repeat}")
    ref = None
    for name, mod in sorted(kernels.backends().items()):
        corr = min(timeit.repeat(lambda: mod.correlate(ex, ez, w, k, r, phi), number=1, repeat=args.repeat))
        pair = min(timeit.repeat(lambda: mod.pair_gains(ex, ez, k, r, phi, r[::-1], phi), number=1, repeat=args.repeat))
        out = mod.correlate(ex, ez, w, k, r, phi)
        diff = 0.0 if ref is None else float(np.max(np.abs(out - ref)))
        ref = out if ref is None else ref
        print(f"{name:>8}: correlate {corr * 1e3:8.2f} ms  pair_gains {pair * 1e3:8.2f} ms  max diff {diff:.1e}")
    print(f"selected backend: {kernels.BACKEND}")


if __name__ == "__main__":
    main()
