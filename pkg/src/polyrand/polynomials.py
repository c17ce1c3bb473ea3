"""Polynomial maps applied to random elements.

Three flavours are used throughout the package:

* ``Polynomial1D`` -- monic one-dimensional polynomial of degree >= 2,
  the map whose characteristic-function decay is studied.
* ``VinogradovPolynomial`` -- no constant term, coefficients indexed
  alpha_1 .. alpha_m; the phase polynomial of Weyl sums.
* ``MultiIndexPolynomial`` -- a general polynomial on R^k with vanishing
  constant term, carrying its total degree and top-degree coefficient size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Polynomial1D:
    """Monic polynomial x^m + a_{m-1} x^{m-1} + ... + a_0, m >= 2.

    ``coeffs`` holds (a_0, ..., a_{m-1}); the leading coefficient is 1.
    """

    degree: int
    coeffs: tuple = ()

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("degree must be >= 2")
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) == 0:
            coeffs = (0.0,) * self.degree
        if len(coeffs) != self.degree:
            raise ValueError(
                f"need {self.degree} lower coefficients, got {len(coeffs)}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, x):
        # Horner nesting on (1, a_{m-1}, ..., a_0)
        x = np.asarray(x, dtype=float)
        acc = np.ones_like(x)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


@dataclass(frozen=True)
class VinogradovPolynomial:
    """f(x) = a_m x^m + ... + a_1 x, no constant term.

    ``coeffs`` holds (a_1, ..., a_m).
    """

    degree: int
    coeffs: tuple = ()

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) == 0:
            coeffs = (0.0,) * self.degree
        if len(coeffs) != self.degree:
            raise ValueError(f"need {self.degree} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in reversed(self.coeffs):  # a_m first: (((a_m) x + a_{m-1}) x + ...) x
            acc = (acc + c) * x
        return acc


@dataclass(frozen=True)
class MultiIndexPolynomial:
    """Polynomial on R^k given by a map multi-index -> coefficient.

    The constant term must vanish.  ``total_degree`` is the largest
    |m_1 + ... + m_k| over nonzero terms and ``alpha_star`` the largest
    |coefficient| among the top-degree terms.
    """

    dimension: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for idx, a in self.terms.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.dimension:
                raise ValueError(f"multi-index {idx} has wrong length")
            if any(i < 0 for i in idx):
                raise ValueError(f"negative exponent in {idx}")
            if float(a) != 0.0:
                clean[idx] = float(a)
        if clean.get((0,) * self.dimension):
            raise ValueError("constant term must vanish")
        if not clean:
            raise ValueError("polynomial must have a nonzero term")
        object.__setattr__(self, "terms", clean)

    @property
    def total_degree(self) -> int:
        return max(sum(idx) for idx in self.terms)

    @property
    def alpha_star(self) -> float:
        M = self.total_degree
        return max(abs(a) for idx, a in self.terms.items() if sum(idx) == M)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(
                f"point dimension {x.shape[-1]} != {self.dimension}"
            )
        out = np.zeros(x.shape[:-1])
        for idx, a in self.terms.items():
            term = np.full(x.shape[:-1], a)
            for axis, power in enumerate(idx):
                if power:
                    term = term * x[..., axis] ** power
            out = out + term
        return out


def monomial_product(k: int) -> MultiIndexPolynomial:
    """x_1 * x_2 * ... * x_k."""
    return MultiIndexPolynomial(k, {tuple([1] * k): 1.0})


def eval_poly(f, x):
    """Evaluate any of the three polynomial types at ``x``.

    1-D polynomials accept scalars or arrays; MultiIndexPolynomial
    expects the last axis to index coordinates.
    """
    return f(x)
