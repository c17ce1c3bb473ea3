"""Sampleable laws with optional exact structure.

A ``Distribution`` bundles a deterministic-given-seed sampler with
whatever exact structure the law has: characteristic function, unit-scale
concentration function, support bound, atom list.  Exact fields are used
by the verification suites whenever present; everything falls back to
Monte Carlo otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .seeding import rng_for

# Depth of the ternary expansion used by the Cantor sampler; 3^-40 is far
# below double precision resolution.
_CANTOR_DEPTH = 40
_CANTOR_WEIGHTS = 2.0 * np.pi * 3.0 ** -np.arange(1, _CANTOR_DEPTH + 1)


@dataclass(frozen=True)
class Distribution:
    name: str
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    exact_cf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    unit_concentration: Optional[float] = None
    support_bound: Optional[float] = None
    atoms: Optional[tuple] = None  # (values, probs) for finite discrete laws

    def sample(self, seed, size: int, *path) -> np.ndarray:
        """Draw ``size`` i.i.d. values; ``path`` extends the seed fan-out."""
        rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed, *path)
        return self.sampler(rng, size)

    def __repr__(self):
        return f"Distribution({self.name!r})"


def point_mass(c: float) -> Distribution:
    c = float(c)
    return Distribution(
        name=f"point_mass({c})",
        sampler=lambda rng, size: np.full(size, c),
        exact_cf=lambda t: np.exp(1j * np.asarray(t, dtype=float) * c),
        unit_concentration=1.0,
        support_bound=abs(c),
        atoms=(np.array([c]), np.array([1.0])),
    )


def normal(mu: float = 0.0, sigma: float = 1.0) -> Distribution:
    mu, sigma = float(mu), float(sigma)
    return Distribution(
        name=f"normal({mu},{sigma})",
        sampler=lambda rng, size: mu + sigma * rng.standard_normal(size),
        exact_cf=lambda t: np.exp(
            1j * mu * np.asarray(t, dtype=float)
            - 0.5 * (sigma * np.asarray(t, dtype=float)) ** 2
        ),
    )


def std_normal() -> Distribution:
    return normal(0.0, 1.0)


def uniform_interval(lo: float, hi: float) -> Distribution:
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise ValueError("need hi > lo")
    width = hi - lo

    def cf(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (np.exp(1j * t * hi) - np.exp(1j * t * lo)) / (1j * t * width)
        return np.where(t == 0, 1.0 + 0j, val)

    return Distribution(
        name=f"uniform[{lo},{hi}]",
        sampler=lambda rng, size: rng.uniform(lo, hi, size),
        exact_cf=cf,
        unit_concentration=min(1.0, 1.0 / width),
        support_bound=max(abs(lo), abs(hi)),
    )


def lattice_uniform(P: int) -> Distribution:
    """Uniform on {1, 2, ..., P}.

    A half-open unit interval (a, a+1] contains exactly one integer, so
    the unit-scale concentration function equals 1/P.
    """
    P = int(P)
    if P < 1:
        raise ValueError("P must be >= 1")
    values = np.arange(1, P + 1, dtype=float)
    probs = np.full(P, 1.0 / P)

    def cf(t):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * np.outer(t, values)).mean(axis=-1)

    return Distribution(
        name=f"lattice_uniform({P})",
        sampler=lambda rng, size: rng.integers(1, P + 1, size).astype(float),
        exact_cf=cf,
        unit_concentration=1.0 / P,
        support_bound=float(P),
        atoms=(values, probs),
    )


def cantor(k: int = 1) -> Distribution:
    """k-fold convolution of the Cantor-type law with CF L(t)^k.

    The underlying variable is sum_j s_j * 2*pi*3^-j with i.i.d. fair
    signs s_j, whose CF is the infinite cosine product L(t).  A k-fold
    sum collapses, level by level, to sum_j (2 B_j - k) * 2*pi*3^-j with
    B_j ~ Binomial(k, 1/2), which is what the sampler draws.
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")

    def sampler(rng, size):
        b = rng.binomial(k, 0.5, size=(size, _CANTOR_DEPTH))
        return (2.0 * b - k) @ _CANTOR_WEIGHTS

    def cf(t):
        from .charfun import cantor_cf

        return cantor_cf(t, tol=1e-14) ** k

    return Distribution(
        name=f"cantor^{k}",
        sampler=sampler,
        exact_cf=cf,
        support_bound=k * np.pi,
    )


def double_sqrt_exponential() -> Distribution:
    """Symmetric law with density exp(-sqrt(|x|))/4 on the whole line.

    |X| equals G^2 for G ~ Gamma(2, 1), with an independent fair sign.
    Moments: E|X|^n = (2n+1)!.
    """

    def sampler(rng, size):
        g = rng.gamma(2.0, 1.0, size)
        sign = rng.integers(0, 2, size) * 2 - 1
        return sign * g**2

    return Distribution(name="double_sqrt_exponential", sampler=sampler)


def symmetrized_exponential(scale: float = 1.0) -> Distribution:
    """Exponential(scale) with an independent fair sign (Laplace law)."""
    scale = float(scale)

    def cf(t):
        t = np.asarray(t, dtype=float)
        return 1.0 / (1.0 + (scale * t) ** 2) + 0j

    def sampler(rng, size):
        e = rng.exponential(scale, size)
        sign = rng.integers(0, 2, size) * 2 - 1
        return sign * e

    return Distribution(name=f"laplace({scale})", sampler=sampler, exact_cf=cf)


def normalized_sum(dist: Distribution, n: int, seed, *path) -> float:
    """One draw of S_n = n^{-1/2} (X_1 + ... + X_n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x = dist.sample(seed, int(n), *path)
    return float(x.sum() / np.sqrt(n))


def normalized_sums(dist: Distribution, n: int, size: int, seed, *path) -> np.ndarray:
    """``size`` independent draws of S_n, vectorized."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else rng_for(seed, *path)
    x = dist.sampler(rng, int(n) * int(size)).reshape(size, n)
    return x.sum(axis=1) / np.sqrt(n)
