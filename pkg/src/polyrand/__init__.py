"""polyrand: numerical checks for polynomials in random elements.

Four benches built on shared sampling/reporting infrastructure:

- ``charfun``: decay envelopes of characteristic functions of
  polynomial images, including the exact Cantor-distribution CF.
- ``vinogradov``: exact diophantine mean values J_k(P), their
  stochastic counterparts I_k(P), and the explicit-constant bounds.
- ``quadform``: two-sided density and tail bounds for Gaussian
  quadratic forms in Hilbert space.
- ``characterization``: when the law of a quadratic form pins down the
  law of its inputs, and the counterexamples when it does not.
"""

from . import characterization, charfun, distributions, quadform, vinogradov
from .distributions import (
    Distribution,
    cantor,
    lattice_uniform,
    normal,
    normalized_sums,
    point_mass,
    std_normal,
    symmetrized_exponential,
    uniform_interval,
)
from .estimate import ComplexEstimate, MeanValueEstimate, jackknife_complex_mean
from .polynomials import (
    MultiIndexPolynomial,
    Polynomial1D,
    VinogradovPolynomial,
    monomial_product,
)
from .report import EnvelopeReport, EnvelopeRow
from .seeding import rng_for, subseed
from .vinogradov import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ComplexEstimate",
    "Distribution",
    "EnvelopeReport",
    "EnvelopeRow",
    "MeanValueEstimate",
    "MultiIndexPolynomial",
    "Polynomial1D",
    "VinogradovPolynomial",
    "__version__",
    "cantor",
    "characterization",
    "charfun",
    "distributions",
    "jackknife_complex_mean",
    "lattice_uniform",
    "monomial_product",
    "normal",
    "normalized_sums",
    "point_mass",
    "quadform",
    "rng_for",
    "std_normal",
    "subseed",
    "symmetrized_exponential",
    "uniform_interval",
    "vinogradov",
]
