"""Benchmark the compiled counting kernel against the numpy fallback.

Runs the exact diophantine count J_k(P) with both backends over a small
grid of (P, m, k), checks the counts agree, and prints timings with the
speedup ratio.

    python3 benchmarks/bench_counting.py
"""

import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from polyrand.vinogradov import _counting_py  # noqa: E402

try:
    from polyrand.vinogradov import _counting
except ImportError:
    _counting = None


CASES = [
    # (P, m, k, method)
    (6, 3, 3, "histogram"),
    (12, 3, 3, "histogram"),
    (20, 3, 3, "histogram"),
    (30, 2, 4, "histogram"),
    (8, 3, 2, "enumerate"),
    (16, 3, 2, "enumerate"),
    (40, 2, 2, "enumerate"),
]


def timeit(fn, *args, repeat=3):
    best, value = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return value, best


def main():
    if _counting is None:
        print("compiled kernel not available; showing pure-python timings only")
    header = f"{'case':>24} {'python':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for P, m, k, method in CASES:
        py_fn = getattr(_counting_py, f"count_{method}")
        v_py, t_py = timeit(py_fn, P, m, k)
        if _counting is not None:
            cy_fn = getattr(_counting, f"count_{method}")
            v_cy, t_cy = timeit(cy_fn, P, m, k)
            assert v_py == v_cy, f"backend mismatch at {(P, m, k, method)}"
            line = f"{t_py:>9.4f}s {t_cy:>9.4f}s {t_py / t_cy:>7.1f}x"
        else:
            line = f"{t_py:>9.4f}s {'-':>10} {'-':>8}"
        print(f"{f'{method} P={P} m={m} k={k}':>24} {line}   J={v_py}")


if __name__ == "__main__":
    main()
