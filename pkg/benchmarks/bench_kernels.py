"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--points 3072] [--repeat 5]
"""

import argparse
import time

import numpy as np

from contourfp import kernels
from contourfp.embed import EDGE_EPS, PAIR_BINS
from contourfp.pointcloud import FPS_TIE_TOL


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=3072, help="cloud size for the pair histogram; FPS uses 4x")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    raw = rng.normal(size=(4 * args.points, 3))
    cloud = raw[: args.points] / np.linalg.norm(raw[: args.points], axis=1).max()
    found = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(sorted(found))}")

    results = {}
    for name, mod in sorted(found.items()):
        t_fps, idx = best_of(lambda: mod.fps_indices(raw, args.points, 0, FPS_TIE_TOL), args.repeat)
        t_d2, hist = best_of(lambda: mod.pair_distance_histogram(cloud, PAIR_BINS, 0.0, PAIR_BINS / 2.0, EDGE_EPS),
                             args.repeat)
        results[name] = (idx, hist)
        print(f"{name:>7}  fps {len(raw)}->{args.points}: {t_fps * 1e3:8.1f} ms   "
              f"pair histogram n={args.points}: {t_d2 * 1e3:8.1f} ms")

    if len(results) == 2:
        (ia, ha), (ib, hb) = results.values()
        same = np.array_equal(ia, ib) and np.array_equal(ha, hb)
        print("outputs identical" if same else "OUTPUTS DIFFER")


if __name__ == "__main__":
    main()
