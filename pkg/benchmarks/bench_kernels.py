"""Compare the compiled and NumPy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Reports the median wall time per call and the largest disagreement between
backends for each kernel.
"""

import argparse
import statistics
import time

import numpy as np

from gasloc import kernels


def _time(fn, repeat):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def _cases(rng):
    A = rng.uniform(-500, 500, (8, 3))
    x = rng.uniform(-200, 200, 3)
    rho = np.linalg.norm(A - x, axis=1)
    d = rho + rng.normal(0, 1.0, rho.size)
    w = np.ones(rho.size)
    ii = np.arange(1, A.shape[0])
    jj = np.zeros(ii.size, dtype=np.intp)
    dd = rho[ii] - rho[jj] + rng.normal(0, 1.0, ii.size)
    grid = np.array([(gx, gy, gz) for gx in np.linspace(-1e3, 1e3, 41)
                     for gy in np.linspace(-1e3, 1e3, 41) for gz in (100.0, 1e3, 5e3)])
    x0 = x + 40.0
    return {
        "solve_range (8 anchors)": (
            lambda k: k.solve_range(A, d, w, x0), lambda out: out[0], 2000),
        "solve_tdoa (8 anchors)": (
            lambda k: k.solve_tdoa(A, ii, jj, dd, w[:ii.size], x0), lambda out: out[0], 2000),
        f"dop_batch ({grid.shape[0]} nodes)": (
            lambda k: k.dop_batch(A, grid), lambda out: out[0], 20),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repetitions (median reported)")
    args = ap.parse_args(argv)
    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled backend not built; run `python setup.py build_ext --inplace`")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} " + " ".join(f"{n:>12s}" for n in impls) + "   speedup  max |diff|")
    for name, (call, value, inner) in _cases(rng).items():
        times = {}
        for bname, mod in impls.items():
            times[bname] = _time(lambda: [call(mod) for _ in range(inner)], args.repeat) / inner
        line = f"{name:28s} " + " ".join(f"{times[n] * 1e6:10.1f}us" for n in impls)
        if len(impls) > 1:
            diff = np.nanmax(np.abs(value(call(impls["python"])) - value(call(impls["cython"]))))
            line += f"   {times['python'] / times['cython']:6.1f}x  {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
