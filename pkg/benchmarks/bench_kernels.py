"""Compare the numba and numpy batched LU kernels.

Runs both on the same random complex systems (and on a real biquad sweep
through ac_sweep) and prints the best-of-N wall time per backend.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--batch 4000]
"""

import argparse
import os
import time
import warnings

import numpy as np

from ccfilter import FilterDesign, FilterMode, ac_sweep, build_reference_netlist, design_params
from ccfilter import _kernels
from ccfilter.response import log_grid


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def random_systems(rng, batch, n):
    A = rng.standard_normal((batch, n, n)) + 1j * rng.standard_normal((batch, n, n))
    A += n * np.eye(n)
    b = rng.standard_normal((batch, n)) + 0j
    return A, b


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--batch", type=int, default=4000)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    warnings.filterwarnings("ignore", message="The TBB threading layer")

    if not _kernels.HAVE_NUMBA:
        print("numba not importable; only the numpy kernel is available")

    print(f"{'case':<28}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}")
    for n in (4, 10, 24):
        A, b = random_systems(rng, args.batch, n)
        t_np = best_of(lambda: _kernels.lu_solve_batch_numpy(A, b), args.repeat)
        row = f"{f'LU {args.batch} x {n}x{n}':<28}{1e3 * t_np:>12.2f}"
        if _kernels.HAVE_NUMBA:
            _kernels.lu_solve_batch_numba(A[:2], b[:2])  # compile outside the timing
            t_nb = best_of(lambda: _kernels.lu_solve_batch_numba(A, b), args.repeat)
            x_np, _ = _kernels.lu_solve_batch_numpy(A, b)
            x_nb, _ = _kernels.lu_solve_batch_numba(A, b)
            assert np.allclose(x_np, x_nb, rtol=1e-10, atol=1e-12)
            row += f"{1e3 * t_nb:>12.2f}{t_np / t_nb:>8.1f}x"
        print(row)

    d = FilterDesign()
    nl = build_reference_netlist(d, FilterMode.NOTCH)
    w = log_grid(design_params(d).omega0, 4, 1000)
    timings = {}
    for name in ("numpy", "numba") if _kernels.HAVE_NUMBA else ("numpy",):
        os.environ["CCFILTER_BACKEND"] = name
        ac_sweep(nl, w[:4])
        timings[name] = best_of(lambda: ac_sweep(nl, w), args.repeat)
    os.environ.pop("CCFILTER_BACKEND", None)
    row = f"{f'ac_sweep notch, {w.size} pts':<28}{1e3 * timings['numpy']:>12.2f}"
    if "numba" in timings:
        row += f"{1e3 * timings['numba']:>12.2f}{timings['numpy'] / timings['numba']:>8.1f}x"
    print(row)


if __name__ == "__main__":
    main()
