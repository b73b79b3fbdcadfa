"""Compare the compiled and pure-Python kernels on production-sized inputs.

    python benchmarks/bench_kernels.py [--repeat 20]

Reports per-call time for each backend and the largest disagreement.
"""
import argparse
import time

import numpy as np

from gkpbreed import kernels


def _gausspoly_case(rng, degree=80, points=4096):
    coeffs = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)) / np.arange(1, degree + 2)
    q = np.linspace(-8.0, 8.0, points)
    return coeffs.astype(np.complex128), 6.4, 0.7, 0.3, q


def _zak_case(rng, shells=9, nodes=384):
    values = rng.standard_normal((shells, nodes)) + 1j * rng.standard_normal((shells, nodes))
    weights = rng.random(nodes)
    d = np.arange(-(shells - 1), shells, dtype=np.float64)
    kernel = np.where(d == 0, np.sqrt(np.pi) / 3, np.sin(d * np.pi / 3) / np.where(d == 0, 1, d * np.sqrt(np.pi)))
    return np.ascontiguousarray(values), weights, kernel


def _time(fn, repeat):
    fn()
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    gp = _gausspoly_case(rng)
    zk = _zak_case(rng)
    found = kernels.backends()
    results = {}
    for name, mod in found.items():
        out = np.zeros(gp[-1].shape, dtype=np.complex128)

        def run_gp(mod=mod, out=out):
            out[:] = 0
            mod.gausspoly_eval(*gp, out)

        t_gp = _time(run_gp, args.repeat)
        run_gp()
        t_zk = _time(lambda mod=mod: mod.zak_window_mass(*zk), args.repeat)
        results[name] = (t_gp, t_zk, out.copy(), mod.zak_window_mass(*zk))
        print(f"{name:>7}: gausspoly_eval {t_gp * 1e3:8.3f} ms   zak_window_mass {t_zk * 1e3:8.3f} ms")
    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        gp_err = np.max(np.abs(py[2] - cy[2])) / np.max(np.abs(py[2]))
        zk_err = abs(py[3] - cy[3]) / abs(py[3])
        print(f"speedup: gausspoly_eval x{py[0] / cy[0]:.1f}   zak_window_mass x{py[1] / cy[1]:.1f}")
        print(f"max relative disagreement: {max(gp_err, zk_err):.2e}")
    else:
        print("compiled backend not built; only the fallback was timed")
    _end_to_end(found, max(1, args.repeat // 4))


def _end_to_end(found, repeat):
    """gk_no_error on a bred n = 30 state, with each backend swapped in."""
    import mpmath as mp

    from gkpbreed import breeding_approx, metrics
    from gkpbreed.numerics import using

    with using():
        p = mp.mpf("1.9")
        delta = breeding_approx.corrective_delta(30, p).delta
        wave = breeding_approx.displaced_wave(30, p, delta)
    saved = kernels.gausspoly_eval, kernels.zak_window_mass
    try:
        for name, mod in found.items():
            kernels.gausspoly_eval, kernels.zak_window_mass = mod.gausspoly_eval, mod.zak_window_mass
            t = _time(lambda: metrics.gk_no_error(wave), repeat)
            print(f"{name:>7}: gk_no_error(n=30 bred state) {t * 1e3:8.2f} ms")
    finally:
        kernels.gausspoly_eval, kernels.zak_window_mass = saved


if __name__ == "__main__":
    main()
