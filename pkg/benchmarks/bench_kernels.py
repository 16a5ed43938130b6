"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Times three workloads under each available backend: small-table algebra
(the typical clique sizes), a batch of SPU solves, and the brute-force
strategy search of the oracle. Results from both backends are checked for
equality before timing is reported.
"""
import argparse
import timeit

import numpy as np

from limid import _backend
from limid.generate import random_limid
from limid.oracle import brute_optimal
from limid.spu import solve
from limid.tables import OpCounter, Table, t_divide, t_multiply, t_sum_out


def table_workload():
    rng = np.random.default_rng(0)
    a = Table((0, 1, 2, 3), [2] * 4, rng.uniform(0.1, 1, 16))
    b = Table((2, 3, 4), [2] * 3, rng.uniform(0.1, 1, 8))

    def run():
        ctr = OpCounter()
        out = None
        for _ in range(200):
            c = t_multiply(a, b, ctr)
            m = t_sum_out(c, [0, 4], ctr)
            out = t_divide(m, t_sum_out(m, [1], ctr), ctr)
        return out.values

    return run


def solve_workload():
    limids = [random_limid(s, n_vars=8, n_decisions=3, n_values=3) for s in range(20)]

    def run():
        return np.array([solve(lim, arch).eu for lim in limids for arch in ("ss", "hugin", "lp")])

    return run


def oracle_workload():
    limids = [random_limid(s, n_vars=8, n_decisions=3, n_values=3) for s in range(20)]

    def run():
        return np.array([brute_optimal(lim)[1] for lim in limids])

    return run


WORKLOADS = {"tables": table_workload, "solve": solve_workload, "oracle": oracle_workload}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = _backend.available()
    print(f"backends: {', '.join(backends)}")
    print(f"{'workload':<10}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    previous = _backend.name()
    try:
        for name, make in WORKLOADS.items():
            run = make()
            times, results = {}, {}
            for b in backends:
                _backend.use(b)
                results[b] = run()
                times[b] = min(timeit.repeat(run, number=1, repeat=args.repeat))
            ref = results[backends[0]]
            for b in backends[1:]:
                if not np.allclose(results[b], ref, rtol=1e-12, atol=1e-12):
                    raise SystemExit(f"{name}: backends disagree")
            line = f"{name:<10}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends)
            if "compiled" in times:
                line += f"{times['python'] / times['compiled']:>11.2f}x"
            print(line)
    finally:
        _backend.use(previous)


if __name__ == "__main__":
    main()
