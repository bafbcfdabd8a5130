"""Compiled vs numpy kernels on the nested Monte Carlo workload.

    python benchmarks/bench_kernels.py [--outer 2000] [--inner 1000] [--repeat 5]

Times ``count_exceed`` (the inner loop of the decomposed Pr[f2 < f1]
estimate) and ``loglik`` per family, and checks that both backends agree.
"""
import argparse
import time

import numpy as np

from modelchoice import kernels
from modelchoice.models import DataSet, Family

WORKLOADS = {
    "poisson": (Family.poisson(), DataSet((3,)), lambda r, n: r.gamma(4, 0.5, n)),
    "binomial": (Family.binomial(5), DataSet((3,)), lambda r, n: r.beta(4, 3, n)),
    "gaussian": (Family.gaussian(1.0), DataSet((0.5,) * 10), lambda r, n: r.normal(0.5, 0.3, n)),
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outer", type=int, default=2000)
    ap.add_argument("--inner", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if kernels.BACKEND != "cython":
        print("compiled kernels not built; only the numpy backend is available")
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    rng = np.random.default_rng(0)
    print(f"{'family':<10}{'kernel':<14}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, (fam, data, draw) in WORKLOADS.items():
        code, coef = fam.kernel(data)
        theta = draw(rng, args.outer * args.inner).reshape(args.outer, args.inner)
        thr = np.quantile(kernels.loglik(code, coef, theta[:, 0]), rng.random(args.outer))
        for label, fn in (
            ("count_exceed", lambda b: kernels.count_exceed(code, coef, theta, thr, True, backend=b)),
            ("loglik", lambda b: kernels.loglik(code, coef, theta.ravel(), backend=b)),
        ):
            results = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
            if len(backends) == 2:
                a, c = results["python"][1], results["cython"][1]
                assert np.allclose(a, c, rtol=1e-12, atol=1e-12), f"{name} {label}: backends disagree"
            cells = "".join(f"{results[b][0] * 1e3:>10.1f}ms" for b in backends)
            speedup = results["python"][0] / results[backends[-1]][0]
            print(f"{name:<10}{label:<14}{cells}{speedup:>9.2f}x")


if __name__ == "__main__":
    main()
