"""Monte-Carlo estimates with jackknife standard errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ComplexEstimate:
    """Monte-Carlo estimate of a complex expectation."""

    value: complex
    std_error: float
    n_samples: int

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.n_samples <= 0:
            raise ValueError("n_samples must be > 0")


@dataclass(frozen=True)
class MeanValueEstimate:
    """Estimate of the coefficient-box mean value integral I_k(P)."""

    value: float
    std_error: float
    P: float
    m: int
    k: int
    n_mc: int
    flagged: bool = False
    note: str = ""


def jackknife_complex_mean(samples: np.ndarray) -> ComplexEstimate:
    """Mean of complex samples with leave-one-out jackknife SE.

    The SE combines real and imaginary parts in quadrature, so
    |value - truth| <~ 3 * std_error acts as a joint band.
    """
    z = np.asarray(samples)
    n = z.size
    if n < 2:
        raise ValueError("need at least 2 samples")
    total = z.sum()
    loo = (total - z) / (n - 1)  # leave-one-out means
    mean = total / n
    var_re = np.sum((loo.real - mean.real) ** 2) * (n - 1) / n
    var_im = np.sum((loo.imag - mean.imag) ** 2) * (n - 1) / n
    return ComplexEstimate(complex(mean), float(np.sqrt(var_re + var_im)), n)


def mean_and_se(x: np.ndarray):
    """Plain mean and standard error of a real sample."""
    x = np.asarray(x, dtype=float)
    n = x.size
    se = x.std(ddof=1) / np.sqrt(n) if n > 1 else 0.0
    return float(x.mean()), float(se)
