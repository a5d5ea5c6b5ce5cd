"""Time the compiled kernels against the numpy reference versions.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--quick]

Prints one line per kernel and size with the best time of each backend, the
speed-up and the largest deviation between the two results.
"""

import argparse
import time

import numpy as np

from polygevrey import _kernels_py

try:
    from polygevrey import _kernels as compiled
except ImportError:
    compiled = None


def best_time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(quick):
    rng = np.random.default_rng(7)
    sizes = [(2, 64, 4096), (4, 256, 16384)] if not quick else [(2, 32, 1024)]
    for N, D, n_pts in sizes:
        coeffs = rng.normal(size=(N, D)) + 1j * rng.normal(size=(N, D))
        z = np.exp(2j * np.pi * rng.uniform(size=n_pts)) * rng.uniform(size=n_pts)
        yield "horner_eval", f"N={N} D={D} pts={n_pts}", (coeffs, z), {}
    for M, n_modes in ([(256, 64), (2048, 256)] if not quick else [(128, 32)]):
        vals = rng.normal(size=M) + 1j * rng.normal(size=M)
        modes = np.arange(-n_modes // 2, n_modes // 2)
        yield "dft_direct", f"M={M} modes={n_modes}", (vals, modes), {}
    for n_z, n_src in ([(16, 16384), (64, 65536)] if not quick else [(4, 4096)]):
        z = rng.uniform(-0.5, 0.5, n_z) + 1j * rng.uniform(-0.5, 0.5, n_z)
        zeta = rng.uniform(-1, 1, n_src) + 1j * rng.uniform(-1, 1, n_src)
        w = rng.normal(size=n_src) + 0j
        for order in (1, 3):
            yield "pompeiu_sum", f"N={order} z={n_z} src={n_src}", (z, zeta, w, order), {}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args(argv)

    if compiled is None:
        print("compiled extension not built; timing the numpy kernels only")
    print(f"{'kernel':<12} {'case':<26} {'numpy s':>10} {'cython s':>10} {'speed-up':>9} {'max dev':>9}")
    for name, label, pos, kw in cases(args.quick):
        t_py, ref = best_time(lambda: getattr(_kernels_py, name)(*pos, **kw), args.repeat)
        if compiled is None:
            print(f"{name:<12} {label:<26} {t_py:10.4f}")
            continue
        t_c, out = best_time(lambda: getattr(compiled, name)(*pos, **kw), args.repeat)
        dev = float(np.abs(out - ref).max() / max(np.abs(ref).max(), 1e-300))
        print(f"{name:<12} {label:<26} {t_py:10.4f} {t_c:10.4f} {t_py / t_c:9.1f} {dev:9.1e}")


if __name__ == "__main__":
    main()
