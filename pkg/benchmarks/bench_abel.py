"""Benchmark the convolution-weight assembly: compiled kernel vs numpy fallback.

The assembly is the O(N^2) hot loop of the package (one per mesh/order pair;
every Picard sweep afterwards is a cached mat-vec).  Run:

    python benchmarks/bench_abel.py [--sizes 256,512,1024,2048] [--repeats 3]
"""

import argparse
import time

import numpy as np

from gkfrac import _abel_fallback
from gkfrac.quadrature import build_mesh

try:
    from gkfrac import _abel
except ImportError:
    _abel = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="256,512,1024,2048")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--alpha", type=float, default=0.5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _abel is None:
        print("compiled extension not available; timing the fallback only")

    header = f"{'N':>6} {'numpy (ms)':>12} {'compiled (ms)':>14} {'speedup':>8} {'matvec (ms)':>12}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        mesh = build_mesh(1.0, n, 3.0)
        t_py = best_of(lambda: _abel_fallback.assemble_weights(mesh.nodes, args.alpha, 1.0),
                       args.repeats)
        if _abel is not None:
            t_cy = best_of(lambda: _abel.assemble_weights(mesh.nodes, args.alpha, 1.0),
                           args.repeats)
            w = _abel.assemble_weights(mesh.nodes, args.alpha, 1.0)
            w_py = _abel_fallback.assemble_weights(mesh.nodes, args.alpha, 1.0)
            np.testing.assert_allclose(w, w_py, rtol=1e-12, atol=1e-15)
            cy_ms = f"{t_cy * 1e3:14.2f}"
            speedup = f"{t_py / t_cy:8.2f}"
        else:
            w = _abel_fallback.assemble_weights(mesh.nodes, args.alpha, 1.0)
            cy_ms = f"{'-':>14}"
            speedup = f"{'-':>8}"
        g = np.sqrt(mesh.nodes)
        t_mv = best_of(lambda: w @ g, max(args.repeats, 5))
        print(f"{n:>6} {t_py * 1e3:12.2f} {cy_ms} {speedup} {t_mv * 1e3:12.3f}")


if __name__ == "__main__":
    main()
