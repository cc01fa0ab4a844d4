"""Time the hot kernels and the full filter recipe under both backends.

    python benchmarks/bench_kernels.py [--size 512] [--repeat 5]
"""
import argparse
import time

import numpy as np

from angiotree import _backend, kernels
from angiotree.candidates import rasterize_polygons
from angiotree.config import load_config
from angiotree.pipeline import run_stages
from angiotree.synthetic import bar_polygon


def best_of(fn, repeat):
    fn()  # warm-up, includes numba compilation or cache load
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(size):
    rng = np.random.default_rng(0)
    img = rng.uniform(0, 255, (size, size))
    levels = rng.integers(0, 256, (size, size))
    luts = np.sort(rng.uniform(0, 255, (size // 64 or 1, size // 64 or 1, 256)), axis=-1)
    polys = [bar_polygon((rng.uniform(0, size), rng.uniform(0, size)), rng.uniform(0, 360), 80.0)
             for _ in range(20)]
    stages = load_config().stages
    return [
        ("erode r=3", lambda: kernels.erode_disk(img, 3)),
        ("erode r=19", lambda: kernels.erode_disk(img, 19)),
        ("gaussian 13 taps", lambda: kernels.correlate_separable(img, np.full(13, 1 / 13))),
        ("box mean r=8", lambda: kernels.box_mean(img, 8)),
        ("resize 1/2", lambda: kernels.resize_bilinear(img, size // 2, size // 2)),
        ("clahe blend", lambda: kernels.clahe_blend(levels, luts, 64)),
        ("rasterise 20 bars", lambda: rasterize_polygons(polys, size, size)),
        ("7-stage recipe", lambda: run_stages(img, stages)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [b for b in _backend.BACKENDS if b != "numba" or _backend.HAVE_NUMBA]
    results = {}
    for name in backends:
        with _backend.use_backend(name):
            for label, fn in cases(args.size):
                results[label, name] = best_of(fn, args.repeat)
    print(f"{args.size}x{args.size}, best of {args.repeat} (ms)")
    print(f"{'kernel':<20}" + "".join(f"{b:>10}" for b in backends) + ("   speed-up" if len(backends) == 2 else ""))
    for label, _ in cases(8):
        row = [results[label, b] for b in backends]
        line = f"{label:<20}" + "".join(f"{1e3 * t:>10.2f}" for t in row)
        if len(row) == 2:
            line += f"   {row[1] / row[0]:8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
