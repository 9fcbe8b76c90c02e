"""Compare the compiled and pure-Python enumeration kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

from byzshield import _backend
from byzshield.assignment import build_mols_assignment, build_ramanujan_assignment
from byzshield.distortion import max_distortion_exhaustive

CASES = [
    ("mols(5,3) q=5", lambda: build_mols_assignment(5, 3), 5),
    ("mols(7,3) q=6", lambda: build_mols_assignment(7, 3), 6),
    ("ramanujan(5,5) q=8", lambda: build_ramanujan_assignment(5, 5), 8),
]


def best_time(graph, q, backend, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        rep = max_distortion_exhaustive(graph, q, backend=backend)
        times.append(time.perf_counter() - t0)
    return min(times), rep


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    if _backend.compiled_kernel is None:
        print("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'case':<22}{'subsets':>10}{'python s':>11}{'cython s':>11}{'speedup':>9}")
    for name, build, q in CASES:
        g = build()
        tp, rp = best_time(g, q, "python", args.repeat)
        tc, rc = best_time(g, q, "cython", args.repeat)
        assert (rp.c_max, rp.witness) == (rc.c_max, rc.witness), name
        print(f"{name:<22}{rc.visited:>10}{tp:>11.3f}{tc:>11.4f}{tp / tc:>8.0f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
