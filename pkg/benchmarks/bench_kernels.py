"""Compare the compiled and pure-Python kernel backends.

Run as: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from rmtkit.kernels import _fast, reference
from rmtkit.spectra import PowerLawPrior, powerlaw_prior_density


def timeit(fn, repeat=3):
    best = np.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    rng = np.random.default_rng(0)
    grid = np.linspace(0.05, 3.0, 2000)
    prior = powerlaw_prior_density(PowerLawPrior(0.35))
    returns = rng.standard_normal((2000, 100))
    v_ref = np.ones(100) / 10.0
    empty = np.array([])

    cases = [
        ("ewma_resolvent_grid",
         lambda m: m.ewma_resolvent_grid(grid, 0.5, 1e-6)),
        ("dressed_resolvent_grid",
         lambda m: m.dressed_resolvent_grid(
             grid, 0.5, 1e-3, prior.grid, prior.density, empty, empty)),
        ("track_top",
         lambda m: m.track_top(returns, 0.02, v_ref)),
    ]
    print(f"{'kernel':<24}{'python':>10}{'cython':>10}{'speedup':>9}{'max|diff|':>12}")
    for name, call in cases:
        t_py, r_py = timeit(lambda: call(reference))
        t_cy, r_cy = timeit(lambda: call(_fast))
        if isinstance(r_py, tuple):
            diff = max(np.max(np.abs(np.asarray(a) - np.asarray(b)))
                       for a, b in zip(r_py, r_cy))
        else:
            diff = np.max(np.abs(np.asarray(r_py) - np.asarray(r_cy)))
        print(f"{name:<24}{t_py:>9.3f}s{t_cy:>9.3f}s{t_py / t_cy:>8.1f}x{diff:>12.2e}")


if __name__ == "__main__":
    main()
