"""Compare the compiled and NumPy Abel-summation kernels.

    python benchmarks/bench_kernels.py [--K 100000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from regtrace import _kernels
from regtrace.bc_model import separated
from regtrace.coeffmat import build_structure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--K", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    sm = build_structure(separated(4, 0.0, 1.0, [0, 1], [0, 1]))
    X = np.linalg.solve(sm.hatW[0], sm.Amat)
    Y = np.linalg.solve(sm.hatW[0], sm.Bmat)
    backends = _kernels.backends()
    print(f"K={args.K}, best of {args.repeat}; backends: {', '.join(sorted(backends))}")
    times = {}
    for name, mod in sorted(backends.items()):
        for label, fn in [("root_sums", lambda: mod.abel_root_sums(4, 0.999, args.K)),
                          ("trace_sums", lambda: mod.abel_trace_sums(4, sm.nu1, X, Y, 0.999,
                                                                     args.K))]:
            t = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            times[name, label] = t
            print(f"{name:>7} {label:<10} {t * 1e3:9.2f} ms")
    if "cython" in backends:
        for label in ("root_sums", "trace_sums"):
            print(f"speedup {label:<10} {times['python', label] / times['cython', label]:9.1f}x")


if __name__ == "__main__":
    main()
