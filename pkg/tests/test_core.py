"""Shared infrastructure: seeding, polynomials, estimates, reports,
distributions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyrand.distributions import (
    cantor,
    lattice_uniform,
    normal,
    normalized_sums,
    point_mass,
    std_normal,
    symmetrized_exponential,
    uniform_interval,
)
from polyrand.estimate import jackknife_complex_mean, mean_and_se
from polyrand.polynomials import (
    MultiIndexPolynomial,
    Polynomial1D,
    VinogradovPolynomial,
    monomial_product,
)
from polyrand.report import EnvelopeReport
from polyrand.seeding import rng_for, subseed


class TestSeeding:
    def test_reproducible(self):
        assert np.array_equal(
            rng_for(7, "a", 1).random(5), rng_for(7, "a", 1).random(5)
        )

    def test_paths_independent(self):
        assert not np.array_equal(
            rng_for(7, "a", 1).random(5), rng_for(7, "a", 2).random(5)
        )
        assert not np.array_equal(
            rng_for(7, "a").random(5), rng_for(7, "b").random(5)
        )

    def test_tuple_seed_folds_into_path(self):
        assert np.array_equal(
            rng_for((7, "x"), "a").random(3), rng_for(7, "x", "a").random(3)
        )

    @given(st.integers(0, 2**32 - 1), st.text(max_size=12))
    @settings(max_examples=50, deadline=None)
    def test_subseed_stable(self, seed, part):
        a = subseed(seed, part).spawn_key
        b = subseed(seed, part).spawn_key
        assert a == b


class TestPolynomials:
    def test_polynomial1d_horner(self):
        # x^3 + 2x + 5, monic with coeffs (a_0, a_1, a_2)
        f = Polynomial1D(3, (5.0, 2.0, 0.0))
        x = np.array([0.0, 1.0, -2.0])
        assert np.allclose(f(x), x**3 + 2 * x + 5)

    def test_vinogradov_no_constant(self):
        f = VinogradovPolynomial(3, (1.0, 0.5, 0.25))
        assert f(0.0) == 0.0
        x = 1.7
        assert math.isclose(f(x), 0.25 * x**3 + 0.5 * x**2 + x)

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=6), st.floats(-3, 3))
    @settings(max_examples=100, deadline=None)
    def test_vinogradov_matches_naive(self, coeffs, x):
        f = VinogradovPolynomial(len(coeffs), tuple(coeffs))
        naive = sum(c * x ** (j + 1) for j, c in enumerate(coeffs))
        assert f(x) == pytest.approx(naive, rel=1e-9, abs=1e-9)

    def test_monomial_product(self):
        f = monomial_product(3)
        assert f(np.array([2.0, 3.0, 4.0])) == pytest.approx(24.0)
        assert f.total_degree == 3

    def test_multiindex_rejects_constant_term(self):
        with pytest.raises(ValueError):
            MultiIndexPolynomial(2, {(0, 0): 1.0})


class TestEstimates:
    def test_jackknife_matches_direct_se(self):
        rng = rng_for(0, "jack")
        x = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        est = jackknife_complex_mean(x)
        assert est.value == pytest.approx(x.mean())
        direct = math.sqrt(
            (x.real.var(ddof=1) + x.imag.var(ddof=1)) / x.size
        )
        assert est.std_error == pytest.approx(direct, rel=1e-6)

    def test_mean_and_se(self):
        v, se = mean_and_se(np.array([1.0, 2.0, 3.0]))
        assert v == pytest.approx(2.0)
        assert se == pytest.approx(1.0 / math.sqrt(3.0))


class TestReport:
    def test_check_logic(self):
        rep = EnvelopeReport()
        rep.add(1.0, 0.5, upper=1.0)
        rep.add(2.0, 1.5, upper=1.0)
        rep.add(3.0, 0.5, lower=0.6)
        assert [r.passed for r in rep.rows] == [True, False, False]
        assert not rep.all_pass

    def test_csv_header_and_shape(self):
        rep = EnvelopeReport()
        rep.add(1.0, 2.0, lower=0.0, upper=3.0)
        lines = rep.to_csv().splitlines()
        assert lines[0].startswith("# envelope-report v1")
        assert lines[1] == "abscissa,statistic,lower,upper,pass"
        assert lines[2].split(",")[-1] == "1"

    def test_json_roundtrip(self):
        import json

        rep = EnvelopeReport()
        rep.add(1.0, 2.0)
        rep.meta["note"] = "x"
        obj = json.loads(rep.to_json())
        assert obj["summary"]["n_rows"] == 1
        assert obj["rows"][0]["statistic"] == 2.0


class TestDistributions:
    def test_samplers_reproducible(self):
        for dist in [std_normal(), uniform_interval(-1, 1), cantor(), lattice_uniform(5)]:
            a = dist.sample(3, 100, "x")
            b = dist.sample(3, 100, "x")
            assert np.array_equal(a, b), dist.name

    def test_point_mass(self):
        d = point_mass(2.5)
        assert np.all(d.sample(0, 10) == 2.5)
        assert d.exact_cf(np.array([1.0]))[0] == pytest.approx(np.exp(2.5j))

    def test_lattice_uniform_atoms(self):
        d = lattice_uniform(4)
        vals, probs = d.atoms
        assert list(vals) == [1, 2, 3, 4]
        assert np.allclose(probs, 0.25)
        x = d.sample(0, 2000)
        assert set(np.unique(x)) <= {1.0, 2.0, 3.0, 4.0}

    def test_cantor_sampler_matches_exact_cf(self):
        d = cantor()
        x = d.sample(0, 200_000)
        for t in [0.7, 2.3]:
            emp = np.exp(1j * t * x).mean()
            assert abs(emp - d.exact_cf(np.array([t]))[0]) < 0.01

    def test_cantor_support(self):
        # X = sum s_j 2 pi 3^{-j}, s_j = +-1, so |X| <= 2 pi / 2 = pi
        x = cantor().sample(1, 10_000)
        assert np.all(np.abs(x) <= np.pi + 1e-12)

    def test_symmetrized_exponential_symmetry(self):
        x = symmetrized_exponential().sample(0, 100_000)
        assert abs(x.mean()) < 0.02
        assert np.mean(np.abs(x)) == pytest.approx(1.0, abs=0.02)

    def test_normalized_sums_clt(self):
        x = normalized_sums(uniform_interval(-1, 1), 64, 50_000, 0, "clt")
        # variance of uniform(-1,1) is 1/3; normalized sum keeps it
        assert x.var() == pytest.approx(1.0 / 3.0, rel=0.05)
        assert abs(x.mean()) < 0.02


class TestBackends:
    def test_backend_reported(self):
        import polyrand

        assert polyrand.BACKEND in {"cython", "python"}

    @pytest.mark.parametrize("P,m,k", [(2, 2, 2), (4, 3, 2), (5, 2, 3), (3, 4, 2)])
    def test_kernels_agree(self, P, m, k):
        from polyrand.vinogradov import _counting_py

        assert _counting_py.count_enumerate(P, m, k) == _counting_py.count_histogram(
            P, m, k
        )
        try:
            from polyrand.vinogradov import _counting
        except ImportError:
            pytest.skip("compiled kernel not built")
        assert _counting.count_enumerate(P, m, k) == _counting_py.count_enumerate(
            P, m, k
        )
        assert _counting.count_histogram(P, m, k) == _counting_py.count_histogram(
            P, m, k
        )
