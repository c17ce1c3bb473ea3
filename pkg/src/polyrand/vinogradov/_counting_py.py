"""Pure-Python (numpy) diophantine counting kernels.

Fallback twin of the Cython extension ``_counting``; same signatures,
same exact integer results.  Selected at import time by
:mod:`polyrand.vinogradov.kernels`.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _tuple_grid(P: int, k: int) -> np.ndarray:
    """All P^k tuples (x_1..x_k) with entries in 1..P, shape (P^k, k)."""
    grids = np.meshgrid(*([np.arange(1, P + 1, dtype=np.int64)] * k), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _signatures(tuples: np.ndarray, m: int) -> np.ndarray:
    """Power-sum vectors (sum x_i, sum x_i^2, ..., sum x_i^m)."""
    return np.stack(
        [np.sum(tuples**j, axis=1, dtype=np.int64) for j in range(1, m + 1)],
        axis=1,
    )


def count_enumerate(P: int, m: int, k: int) -> int:
    """Brute-force count of solution pairs (x, y), blockwise over x.

    Checks sum(x_i^j - y_i^j) = 0 for every j = 1..m directly on all
    P^{2k} pairs; no hashing, so it stays an independent oracle for the
    histogram kernel.
    """
    tuples = _tuple_grid(P, k)
    sig = _signatures(tuples, m)
    total = 0
    block = max(1, 10**7 // max(sig.shape[0], 1))
    for lo in range(0, sig.shape[0], block):
        diff = sig[lo : lo + block, None, :] - sig[None, :, :]
        total += int(np.all(diff == 0, axis=2).sum())
    return total


def count_histogram(P: int, m: int, k: int) -> int:
    """Meet-in-the-middle count: J_k = sum over signatures of N(v)^2."""
    sig = _signatures(_tuple_grid(P, k), m)
    # pack into a single int64 key when the mixed radix fits
    radii = [int(k) * P**j + 1 for j in range(1, m + 1)]
    total_radix = 1
    for r in radii:
        total_radix *= r
    if total_radix < 2**62:
        key = np.zeros(sig.shape[0], dtype=np.int64)
        for j, r in enumerate(radii):
            key = key * r + sig[:, j]
        _, counts = np.unique(key, return_counts=True)
    else:
        _, counts = np.unique(sig, axis=0, return_counts=True)
    return int(np.sum(counts.astype(object) ** 2))
