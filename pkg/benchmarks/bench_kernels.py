"""Time the compiled and pure-Python kernels on random QUBOs.

    python3 benchmarks/bench_kernels.py [--sizes 12,16,20] [--repeat 3]
"""
import argparse
import time

import numpy as np

from qodelab import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="12,16,20")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--reads", type=int, default=50)
    ap.add_argument("--sweeps", type=int, default=200)
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    print(f"backends: {', '.join(backends)}")
    print(f"{'kernel':<8}{'n':>4}" + "".join(f"{b:>12}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for n in (int(v) for v in args.sizes.split(",")):
        h = rng.normal(size=n)
        J = np.triu(rng.normal(size=(n, n)), 1)
        J = J + J.T
        init = rng.integers(0, 2, (args.reads, n), dtype=np.int8)
        U = rng.random((args.reads, args.sweeps, n))
        betas = np.geomspace(0.1, 10, args.sweeps)
        jobs = {
            "exact": lambda k: k.exact_minimize(h, J, 0.0, 1e-11),
            "anneal": lambda k: k.anneal(h, J, init, U, betas),
        }
        for name, job in jobs.items():
            t = [best_of(lambda: job(kernels.get_backend(b)), args.repeat) for b in backends]
            line = f"{name:<8}{n:>4}" + "".join(f"{v * 1e3:>10.2f}ms" for v in t)
            if len(t) > 1:
                line += f"{t[backends.index('python')] / t[backends.index('compiled')]:>9.1f}x"
            print(line)


if __name__ == "__main__":
    main()
