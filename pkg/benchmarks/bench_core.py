"""Benchmark the compiled core against the pure-numpy fallback.

Run:  python3 benchmarks/bench_core.py

Times the three hot loops on workloads shaped like the real callers
(boundary-refined Berezin profiles and batched moment tables), then one
end-to-end Berezin profile.
"""

import time

import numpy as np

from bergkit._core import IMPLEMENTATIONS


def timeit(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    fast = IMPLEMENTATIONS.get("compiled")
    slow = IMPLEMENTATIONS.get("python")
    if fast is None:
        print("compiled extension not built; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'workload':<44} {'compiled':>10} {'numpy':>10} {'speedup':>8}")

    rows = []
    for n_coeff, n_pts in ((20_000, 512), (200_000, 512), (800_000, 64)):
        coeffs = rng.uniform(0.5, 2.0, n_coeff)
        x = rng.uniform(0.0, 0.99995, n_pts)
        tf, a = timeit(fast.poly_eval_d, coeffs, x)
        ts, b = timeit(slow.poly_eval_d, coeffs, x)
        assert np.allclose(a, b, rtol=1e-10)
        rows.append((f"poly_eval_d  {n_coeff:>7} coeffs x {n_pts:>4} pts", tf, ts))

    coeffs = rng.uniform(0.5, 2.0, 100_000)
    z = rng.uniform(0, 0.999, 256) * np.exp(1j * rng.uniform(0, 6.28, 256))
    tf, a = timeit(fast.poly_eval_z, coeffs,
                   np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag))
    ts, b = timeit(slow.poly_eval_z, coeffs, z.real.copy(), z.imag.copy())
    assert np.allclose(a, b, rtol=1e-10)
    rows.append(("poly_eval_z   100000 coeffs x  256 pts", tf, ts))

    r = rng.uniform(0.0, 1.0 - 1e-12, 900)
    wts = rng.uniform(0.0, 1.0, 900)
    for count in (100_000, 500_000):
        tf, a = timeit(fast.power_moments_d, r, wts, 0, count)
        ts, b = timeit(slow.power_moments_d, r, wts, 0, count)
        assert np.allclose(a, b, rtol=1e-10)
        rows.append((f"power_moments   900 nodes x {count:>7} n", tf, ts))

    for label, tf, ts in rows:
        print(f"{label:<44} {tf * 1e3:>8.1f}ms {ts * 1e3:>8.1f}ms {ts / tf:>7.1f}x")

    # end-to-end: Berezin radial profile of a log-weight counterexample
    import os
    import subprocess
    import sys
    script = (
        "import time, numpy as np\n"
        "from bergkit.weights import log_weight\n"
        "from bergkit.measures import Measure\n"
        "from bergkit.toeplitz import berezin_radial_profile\n"
        "w = log_weight(2.0)\n"
        "v = lambda r: (1-np.asarray(r))**-0.5*(1-np.log1p(-np.asarray(r)))**-1.25\n"
        "mu = Measure.radial_density(v, name='v')\n"
        "t0 = time.perf_counter()\n"
        "prof = berezin_radial_profile(mu, w, 1-2.0**-np.arange(1, 15))\n"
        "print('%.2fs' % (time.perf_counter()-t0), flush=True)\n"
    )
    print("\nend-to-end Berezin profile to depth 14 (includes moment tables):")
    for name, env in (("compiled", {}), ("numpy", {"BERGKIT_PURE": "1"})):
        out = subprocess.run(
            [sys.executable, "-c", script],
            env={**os.environ, **env}, capture_output=True, text=True,
        )
        print(f"  {name + ':':<10} {out.stdout.strip() or out.stderr.strip()}")


if __name__ == "__main__":
    main()
