"""Time the numba and numpy backends on the clip kernel and full enumeration.

    python benchmarks/bench_enumerate.py [--repeats 5]
"""
import argparse
import time

import numpy as np

from relu_regions import AffineSlice, InitSpec, he_init
from relu_regions._kernels import clip_polygons
from relu_regions.regions import enumerate_regions, square_window


def best_of(fn, repeats):
    fn()  # warm-up (JIT compile for numba)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def random_squares(n, rng):
    centers = rng.uniform(-10, 10, size=(n, 2))
    unit = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=np.float64) * 0.5
    vx = (centers[:, None, :] + unit[None]).reshape(-1, 2)
    start = np.arange(0, 4 * n + 1, 4)
    return vx, start


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)

    print(f"{'case':<38}{'numba [s]':>12}{'numpy [s]':>12}{'ratio':>9}")
    for n in (1_000, 20_000):
        vx, start = random_squares(n, rng)
        vals = vx @ np.array([1.0, 0.3]) - 0.1
        cut = np.ones(n, dtype=np.bool_)
        t = {b: best_of(lambda b=b: clip_polygons(vx, start, vals, cut, backend=b), args.repeats)
             for b in ("numba", "numpy")}
        print(f"{'clip ' + str(n) + ' squares':<38}{t['numba']:12.5f}{t['numpy']:12.5f}"
              f"{t['numpy'] / t['numba']:9.1f}")

    slc = AffineSlice.coordinate_plane(2, 2)
    for widths in ([16, 16, 16], [32, 32, 32], [64, 64]):
        net = he_init(2, widths + [1], InitSpec(bias_std=1e-3, seed=0))
        t = {b: best_of(lambda b=b: enumerate_regions(net, slc, square_window(3.0), merge=False,
                                                      backend=b), args.repeats)
             for b in ("numba", "numpy")}
        n_cells = enumerate_regions(net, slc, square_window(3.0), merge=False).activation_count
        label = f"enumerate {widths} ({n_cells} cells)"
        print(f"{label:<38}{t['numba']:12.5f}{t['numpy']:12.5f}{t['numpy'] / t['numba']:9.1f}")


if __name__ == "__main__":
    main()
