"""Compare the compiled and NumPy kernel backends.

    python benchmarks/bench_core.py [--repeat 200] [--T 2]

Times the per-step kernels on diamond-sized inputs and a short diamond run
with each backend swapped in.
"""
import argparse
import time

import numpy as np

from nonlocal_networks import builtin_diamond, core, scheme
from nonlocal_networks.runner import run_scenario


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_timings(mod, repeat):
    rng = np.random.default_rng(0)
    n, m = 200, 50
    gamma = rng.uniform(size=m)
    w = rng.uniform(size=n + m)
    rho, va, vb = rng.uniform(size=m), rng.uniform(size=m), rng.uniform(size=m)
    flux = rng.uniform(size=n)
    rho_n = rng.uniform(size=n)
    params = (0.6, 0.9, 0.3, 0.7, 0.7, 0.3, 0.4)
    return {
        "lookahead": best_of(lambda: mod.lookahead(w, gamma, n), repeat),
        "coupling": best_of(lambda: mod.coupling(2, rho, va, vb, params), repeat),
        "godunov_interior": best_of(lambda: mod.godunov_interior(rho_n, 0.5, 1.0), repeat),
        "update": best_of(lambda: mod.update(rho_n, 0.1, flux, 0.2), repeat),
    }


def run_timing(mod, T):
    saved = {k: getattr(core, k) for k in ("lookahead", "coupling", "godunov_interior")}
    saved_update = scheme.NonlocalScheme.update
    try:
        for k in saved:
            setattr(core, k, getattr(mod, k))
        scheme.NonlocalScheme.update = staticmethod(mod.update)
        cfg = builtin_diamond(eta=0.5, model="nonlocal-maxflux", T=T)
        t0 = time.perf_counter()
        traj = run_scenario(cfg)
        return time.perf_counter() - t0, traj.n_steps
    finally:
        for k, v in saved.items():
            setattr(core, k, v)
        scheme.NonlocalScheme.update = saved_update


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--T", type=float, default=2.0)
    args = ap.parse_args()
    backends = core.backends()
    if len(backends) == 1:
        print("compiled extension not built; only the NumPy fallback is available")
    results = {name: kernel_timings(mod, args.repeat) for name, mod in backends}
    names = [n for n, _ in backends]
    print(f"{'kernel':<18}" + "".join(f"{n + ' [us]':>16}" for n in names))
    for k in results[names[0]]:
        print(f"{k:<18}" + "".join(f"{results[n][k] * 1e6:>16.2f}" for n in names))
    print()
    for name, mod in backends:
        secs, steps = run_timing(mod, args.T)
        print(f"diamond eta=0.5 T={args.T:g} [{name}]: {secs:.2f} s for {steps} steps ({secs / steps * 1e3:.3f} ms/step)")


if __name__ == "__main__":
    main()
