"""Throughput comparison of the compiled and pure-Python sweep kernels.

Usage: python benchmarks/bench_sweeps.py [--sweeps N]
"""

import argparse
import time

from rp_toolkit.kernels import NearestNeighbor, periodize
from rp_toolkit.models import ModelSpec
from rp_toolkit.sampling import SamplerSpec, run_chain, sweep_backend
from rp_toolkit.torus import TorusSpec

CASES = [
    ("Ising d=3 L=8", ModelSpec(family="Ising"), TorusSpec(d=3, L=8), 0.2),
    ("Potts q=3 d=2 L=16", ModelSpec(family="Potts", q=3), TorusSpec(d=2, L=16), 0.5),
    ("O(2) d=3 L=6", ModelSpec(family="O_n", n=2), TorusSpec(d=3, L=6), 0.5),
]


def throughput(model, torus, beta, sweeps, backend):
    couplings = periodize(NearestNeighbor(torus.d), torus)
    sampler = SamplerSpec(beta=beta, sweeps=sweeps, burn_in=0, seed=0)
    t0 = time.perf_counter()
    n = sum(1 for _ in run_chain(model, couplings, sampler, backend=backend))
    elapsed = time.perf_counter() - t0
    return n * torus.N / elapsed  # site updates per second


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sweeps", type=int, default=300)
    args = ap.parse_args()

    try:
        sweep_backend("cython")
        backends = ["python", "cython"]
    except RuntimeError:
        print("compiled kernels unavailable; benchmarking python only")
        backends = ["python"]

    print(f"{'case':24s}" + "".join(f"{b:>16s}" for b in backends) + f"{'speedup':>10s}")
    for name, model, torus, beta in CASES:
        rates = [throughput(model, torus, beta, args.sweeps, b) for b in backends]
        row = f"{name:24s}" + "".join(f"{r:14.3g}/s" for r in rates)
        if len(rates) == 2:
            row += f"{rates[1] / rates[0]:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
